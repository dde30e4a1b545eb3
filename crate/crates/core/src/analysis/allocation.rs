use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{factorial, multinomial, BigNat, Rational};

/// Nonnegative integer matrix `ℓ` with its row sums `nᵢ` and column sums `Lⱼ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AllocationMatrix {
    ell: Vec<Vec<u32>>,
    row_sums: Vec<u32>,
    col_sums: Vec<u32>,
}

impl AllocationMatrix {
    /// Rows must all have the same length.
    pub fn new(ell: Vec<Vec<u32>>) -> Result<Self> {
        let cols = ell.first().map_or(0, Vec::len);
        if let Some(row) = ell.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: row.len(),
            });
        }
        let row_sums = ell.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..cols).map(|j| ell.iter().map(|r| r[j]).sum()).collect();
        Ok(AllocationMatrix {
            ell,
            row_sums,
            col_sums,
        })
    }

    pub fn rows(&self) -> usize {
        self.ell.len()
    }

    pub fn cols(&self) -> usize {
        self.col_sums.len()
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.ell[i][j]
    }

    pub fn entries(&self) -> &[Vec<u32>] {
        &self.ell
    }

    pub fn row_sums(&self) -> &[u32] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u32] {
        &self.col_sums
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        self.ell.iter().map(|r| r[j]).collect()
    }

    /// True when no column has two or more nonzero entries.
    pub fn columns_singly_supported(&self) -> bool {
        (0..self.cols()).all(|j| self.ell.iter().filter(|r| r[j] != 0).count() <= 1)
    }
}

/// Both sides of `∏ⱼ (2Lⱼ)!/∏ᵢ(2ℓᵢⱼ)!  ≥  ∏ⱼ Lⱼ!/∏ᵢ ℓᵢⱼ!`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ineq7Verdict {
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
    pub equality: bool,
}

/// Evaluates the factorial inequality on one allocation. Columns with
/// `Lⱼ = 0` contribute a factor of 1 to both sides.
pub fn check_ineq7(alloc: &AllocationMatrix) -> Ineq7Verdict {
    let mut lhs = BigNat::from(1u32);
    let mut rhs = BigNat::from(1u32);
    for j in 0..alloc.cols() {
        let col: Vec<u64> = alloc.column(j).into_iter().map(u64::from).collect();
        let total: u64 = col.iter().sum();
        let doubled: Vec<u64> = col.iter().map(|x| 2 * x).collect();
        lhs *= multinomial(2 * total, &doubled).expect("column sums are consistent");
        rhs *= multinomial(total, &col).expect("column sums are consistent");
    }
    let lhs = Rational::from_nat(lhs);
    let rhs = Rational::from_nat(rhs);
    Ineq7Verdict {
        holds: lhs >= rhs,
        equality: lhs == rhs,
        lhs,
        rhs,
    }
}

/// Number of allocations with row sums `n` and `cols` columns:
/// `∏ᵢ binom(nᵢ + cols - 1, cols - 1)`.
pub fn allocation_count(n: &[u32], cols: usize) -> BigNat {
    if cols == 0 {
        return if n.iter().all(|&x| x == 0) {
            BigNat::from(1u32)
        } else {
            BigNat::from(0u32)
        };
    }
    n.iter().fold(BigNat::from(1u32), |acc, &ni| {
        let top = u64::from(ni) + cols as u64 - 1;
        acc * (factorial(top) / (factorial(u64::from(ni)) * factorial(cols as u64 - 1)))
    })
}

/// All compositions of `total` into `parts` nonnegative parts, ascending
/// lexicographically.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=remaining {
            prefix.push(first);
            rec(remaining - first, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Iterator over allocation matrices in lexicographic order of their rows
/// (first row most significant).
#[derive(Clone, Debug)]
pub struct Allocations {
    per_row: Vec<Vec<Vec<u32>>>,
    cursor: Vec<usize>,
    done: bool,
}

impl Iterator for Allocations {
    type Item = AllocationMatrix;

    fn next(&mut self) -> Option<AllocationMatrix> {
        if self.done {
            return None;
        }
        let ell = self
            .per_row
            .iter()
            .zip(&self.cursor)
            .map(|(choices, &c)| choices[c].clone())
            .collect();
        // Advance the odometer, last row fastest.
        self.done = true;
        for r in (0..self.cursor.len()).rev() {
            self.cursor[r] += 1;
            if self.cursor[r] < self.per_row[r].len() {
                self.done = false;
                break;
            }
            self.cursor[r] = 0;
        }
        Some(AllocationMatrix::new(ell).expect("rows have equal length"))
    }
}

/// Every `len(n) × cols` nonnegative integer matrix whose row `i` sums to `nᵢ`.
pub fn enumerate_allocations(n: &[u32], cols: usize) -> Allocations {
    let per_row: Vec<Vec<Vec<u32>>> = n.iter().map(|&ni| compositions(ni, cols)).collect();
    let done = per_row.iter().any(Vec::is_empty);
    Allocations {
        cursor: vec![0; per_row.len()],
        per_row,
        done,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alloc(rows: &[&[u32]]) -> AllocationMatrix {
        AllocationMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn ineq7_examples() {
        let v = check_ineq7(&alloc(&[&[1, 0], &[0, 1]]));
        assert_eq!((v.lhs.clone(), v.rhs.clone()), (1.into(), 1.into()));
        assert!(v.holds && v.equality);

        let v = check_ineq7(&alloc(&[&[1, 0], &[1, 0]]));
        assert_eq!(v.lhs, 6);
        assert_eq!(v.rhs, 2);
        assert!(v.holds && !v.equality);

        let v = check_ineq7(&alloc(&[&[2, 0], &[1, 1]]));
        assert_eq!(v.lhs, 15);
        assert_eq!(v.rhs, 3);
        assert!(v.holds);
    }

    #[test]
    fn allocation_sums() {
        let a = alloc(&[&[2, 0, 1], &[1, 1, 0]]);
        assert_eq!(a.row_sums(), &[3, 2]);
        assert_eq!(a.col_sums(), &[3, 1, 1]);
        assert!(!a.columns_singly_supported());
        assert!(AllocationMatrix::new(vec![vec![1, 2], vec![1]]).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let all: Vec<_> = enumerate_allocations(&[1, 1], 2).collect();
        assert_eq!(all.len(), 4);
        assert_eq!(all[0].entries(), &[vec![0, 1], vec![0, 1]]);
        assert_eq!(all[1].entries(), &[vec![0, 1], vec![1, 0]]);
        assert_eq!(all[3].entries(), &[vec![1, 0], vec![1, 0]]);

        let zeros: Vec<_> = enumerate_allocations(&[0, 0, 0], 3).collect();
        assert_eq!(zeros.len(), 1);
        assert!(zeros[0].entries().iter().flatten().all(|&x| x == 0));

        assert_eq!(enumerate_allocations(&[3, 3, 3], 3).count(), 1000);
        assert_eq!(allocation_count(&[3, 3, 3], 3), BigNat::from(1000u32));
        assert_eq!(enumerate_allocations(&[], 3).count(), 1);
        assert_eq!(enumerate_allocations(&[1], 0).count(), 0);
        assert_eq!(allocation_count(&[1], 0), BigNat::from(0u32));
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let n = [2, 1, 3];
        let all: Vec<_> = enumerate_allocations(&n, 3).collect();
        assert_eq!(BigNat::from(all.len()), allocation_count(&n, 3));
        for w in all.windows(2) {
            assert!(w[0].entries() < w[1].entries());
        }
        assert!(all.iter().all(|a| a.row_sums() == n));
    }

    #[test]
    fn ineq7_exhaustive_small() {
        for n0 in 0..=4 {
            for n1 in 0..=4 {
                for n2 in 0..=4 {
                    for a in enumerate_allocations(&[n0, n1, n2], 3) {
                        let v = check_ineq7(&a);
                        assert!(v.holds, "{a:?}");
                        assert_eq!(v.equality, a.columns_singly_supported(), "{a:?}");
                    }
                }
            }
        }
    }
}
