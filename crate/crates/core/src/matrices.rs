//! Dense matrices over exact rationals: symmetric covariance matrices,
//! signature conjugation, square-root-free LDLᵀ factorization, inversion.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Rational;

/// Largest dimension for which a sweep over all signature classes is run.
pub const MAX_SIGNATURE_DIM: usize = 16;

/// Row-major dense rational matrix of arbitrary shape.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = RatMatrix::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    expected: ncols,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(RatMatrix {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    /// Parses a grid of rational strings; panics on malformed input.
    /// Intended for literals in tests and fixtures.
    pub fn from_strs(rows: &[&[&str]]) -> Self {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|s| s.parse().expect("bad rational literal")).collect())
            .collect();
        RatMatrix::from_rows(rows).expect("ragged matrix literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(Rational::to_f64).collect())
            .collect()
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = RatMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let prod = a * &rhs[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        Ok(out)
    }

    /// `self · selfᵀ`, which is always symmetric.
    pub fn gram(&self) -> CovMatrix {
        let mut out = RatMatrix::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in 0..=i {
                let v: Rational = self
                    .row(i)
                    .iter()
                    .zip(self.row(j))
                    .map(|(a, b)| a * b)
                    .sum();
                out[(j, i)] = v.clone();
                out[(i, j)] = v;
            }
        }
        CovMatrix(out)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|x| !x.is_negative())
    }

    pub fn first_negative(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(Rational::is_negative)
            .map(|p| (p / self.cols, p % self.cols))
    }

    pub fn is_symmetric(&self) -> bool {
        self.first_asymmetry().is_none()
    }

    fn first_asymmetry(&self) -> Option<(usize, usize)> {
        if !self.is_square() {
            return Some((0, 0));
        }
        for i in 0..self.rows {
            for j in 0..i {
                if self[(i, j)] != self[(j, i)] {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn sub_matrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> RatMatrix {
        let mut out = RatMatrix::zeros(rows.len(), cols.len());
        for (oi, i) in rows.clone().enumerate() {
            for (oj, j) in cols.clone().enumerate() {
                out[(oi, oj)] = self[(i, j)].clone();
            }
        }
        out
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

impl Serialize for RatMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Rational>>::deserialize(d)?;
        RatMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Symmetric square matrix of exact rationals.
///
/// Positive definiteness is a queried property rather than an invariant, so
/// singular PSD matrices can be represented too.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CovMatrix(RatMatrix);

/// Wire form `{"d": 3, "entries": [["3/2", "9/8", ...], ...]}`.
#[derive(Serialize, Deserialize)]
struct CovMatrixJson {
    d: usize,
    entries: Vec<Vec<Rational>>,
}

impl CovMatrix {
    pub fn new(m: RatMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        if let Some((row, col)) = m.first_asymmetry() {
            return Err(Error::NotSymmetric { row, col });
        }
        Ok(CovMatrix(m))
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            let found = rows.iter().map(Vec::len).find(|&l| l != d).unwrap_or(d);
            return Err(Error::DimensionMismatch { expected: d, found });
        }
        CovMatrix::new(RatMatrix::from_rows(rows)?)
    }

    /// See [`RatMatrix::from_strs`]; also panics if the literal is not symmetric.
    pub fn from_strs(rows: &[&[&str]]) -> Self {
        CovMatrix::new(RatMatrix::from_strs(rows)).expect("non-symmetric matrix literal")
    }

    pub fn identity(d: usize) -> Self {
        CovMatrix(RatMatrix::identity(d))
    }

    pub fn diagonal(values: &[Rational]) -> Self {
        let mut m = RatMatrix::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        CovMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> RatMatrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.0[(i, j)]
    }

    pub fn diag(&self) -> Vec<Rational> {
        (0..self.dim()).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.is_nonnegative()
    }

    /// Principal submatrix on the contiguous index range.
    pub fn principal(&self, range: std::ops::Range<usize>) -> CovMatrix {
        CovMatrix(self.0.sub_matrix(range.clone(), range))
    }

    /// Simultaneous permutation of rows and columns: `out[i][j] = self[p[i]][p[j]]`.
    pub fn permute(&self, perm: &[usize]) -> Result<CovMatrix> {
        let d = self.dim();
        if perm.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: perm.len(),
            });
        }
        let mut out = RatMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] = self.get(perm[i], perm[j]).clone();
            }
        }
        Ok(CovMatrix(out))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CovMatrixJson {
            d: self.dim(),
            entries: self.0.to_rows(),
        })
        .expect("matrix serialization cannot fail")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let raw: CovMatrixJson =
            serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.entries.len() != raw.d {
            return Err(Error::DimensionMismatch {
                expected: raw.d,
                found: raw.entries.len(),
            });
        }
        CovMatrix::from_rows(raw.entries)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        CovMatrix::from_json(&value)
    }
}

impl fmt::Debug for CovMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for CovMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CovMatrixJson {
            d: self.dim(),
            entries: self.0.to_rows(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CovMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        CovMatrix::from_json(&value).map_err(serde::de::Error::custom)
    }
}

/// Diagonal ±1 matrix, stored as its sign vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct SignatureMatrix {
    signs: Vec<i8>,
}

impl SignatureMatrix {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if let Some(bad) = signs.iter().find(|s| **s != 1 && **s != -1) {
            return Err(Error::InvalidArgument(format!(
                "signature entries must be ±1, got {bad}"
            )));
        }
        Ok(SignatureMatrix { signs })
    }

    pub fn identity(d: usize) -> Self {
        SignatureMatrix { signs: vec![1; d] }
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Entrywise product, i.e. the matrix product of two diagonal matrices.
    pub fn compose(&self, other: &SignatureMatrix) -> Result<SignatureMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(SignatureMatrix {
            signs: self.signs.iter().zip(&other.signs).map(|(a, b)| a * b).collect(),
        })
    }

    /// `D` with all signs flipped; acts identically under conjugation.
    pub fn negated(&self) -> SignatureMatrix {
        SignatureMatrix {
            signs: self.signs.iter().map(|s| -s).collect(),
        }
    }

    /// `self` scaled so its first sign is `+1`.
    pub fn canonical(&self) -> SignatureMatrix {
        match self.signs.first() {
            Some(-1) => self.negated(),
            _ => self.clone(),
        }
    }

    /// Applies `D` to the rows of `m` (i.e. `D · m`).
    pub fn scale_rows(&self, m: &RatMatrix) -> Result<RatMatrix> {
        if m.rows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.rows(),
            });
        }
        let mut out = m.clone();
        for (i, &s) in self.signs.iter().enumerate() {
            if s < 0 {
                for j in 0..m.cols() {
                    out[(i, j)] = -&m[(i, j)];
                }
            }
        }
        Ok(out)
    }
}

impl<'de> Deserialize<'de> for SignatureMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let signs = Vec::<i8>::deserialize(d)?;
        SignatureMatrix::new(signs).map_err(serde::de::Error::custom)
    }
}

/// The `2^{d-1}` signature classes modulo `D ~ -D`, in canonical order:
/// a binary counter over positions `1..d` with position 0 pinned to `+1`,
/// bit `b` of the counter flipping position `b + 1`.
pub fn signature_classes(d: usize) -> Result<impl Iterator<Item = SignatureMatrix>> {
    if d > MAX_SIGNATURE_DIM {
        return Err(Error::DimensionTooLarge {
            d,
            cap: MAX_SIGNATURE_DIM,
        });
    }
    let count: u32 = if d == 0 { 1 } else { 1 << (d - 1) };
    Ok((0..count).map(move |counter| {
        let signs = (0..d)
            .map(|i| {
                if i > 0 && counter & (1 << (i - 1)) != 0 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        SignatureMatrix { signs }
    }))
}

/// All `2^d` signature matrices (not reduced modulo `±`).
pub fn all_signatures(d: usize) -> Result<Vec<SignatureMatrix>> {
    let classes: Vec<_> = signature_classes(d)?.collect();
    let mut out = classes.clone();
    out.extend(classes.iter().map(SignatureMatrix::negated));
    Ok(out)
}

/// `D M D`: entry `(i, j)` is multiplied by `signs[i] · signs[j]`.
pub fn conjugate_by_signature(m: &CovMatrix, d: &SignatureMatrix) -> Result<CovMatrix> {
    if m.dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: d.dim(),
        });
    }
    let n = m.dim();
    let mut out = m.0.clone();
    for i in 0..n {
        for j in 0..n {
            if d.signs[i] * d.signs[j] < 0 {
                out[(i, j)] = -m.get(i, j);
            }
        }
    }
    Ok(CovMatrix(out))
}

/// Inverse of an arbitrary square rational matrix by Gauss–Jordan elimination.
pub fn invert_matrix(m: &RatMatrix) -> Result<RatMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = RatMatrix::identity(n);
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !a[(r, col)].is_zero()).ok_or(Error::Singular)?;
        if pivot_row != col {
            for j in 0..n {
                a.data.swap(pivot_row * n + j, col * n + j);
                inv.data.swap(pivot_row * n + j, col * n + j);
            }
        }
        let p = a[(col, col)].recip()?;
        for j in 0..n {
            a[(col, j)] *= &p;
            inv[(col, j)] *= &p;
        }
        for r in 0..n {
            if r == col || a[(r, col)].is_zero() {
                continue;
            }
            let factor = a[(r, col)].clone();
            for j in 0..n {
                let da = &factor * &a[(col, j)];
                a[(r, j)] -= &da;
                let di = &factor * &inv[(col, j)];
                inv[(r, j)] -= &di;
            }
        }
    }
    Ok(inv)
}

/// Exact inverse of a symmetric matrix.
pub fn invert(m: &CovMatrix) -> Result<CovMatrix> {
    let inv = invert_matrix(&m.0)?;
    Ok(CovMatrix(inv))
}

/// Definiteness read off the LDLᵀ pivots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Definiteness {
    #[serde(rename = "PD")]
    PositiveDefinite,
    #[serde(rename = "PSD")]
    PositiveSemidefinite,
    #[serde(rename = "indefinite")]
    Indefinite,
}

/// `M = L · diag(pivots) · Lᵀ` with `L` unit lower triangular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LdlFactorization {
    pub l: RatMatrix,
    pub pivots: Vec<Rational>,
}

impl LdlFactorization {
    pub fn reconstruct(&self) -> CovMatrix {
        let n = self.pivots.len();
        let mut scaled = self.l.clone();
        for i in 0..n {
            for j in 0..n {
                scaled[(i, j)] = &self.l[(i, j)] * &self.pivots[j];
            }
        }
        let full = scaled.mul(&self.l.transpose()).expect("square factors");
        CovMatrix(full)
    }

    pub fn definiteness(&self) -> Definiteness {
        if self.pivots.iter().all(Rational::is_positive) {
            Definiteness::PositiveDefinite
        } else if self.pivots.iter().all(|p| !p.is_negative()) {
            Definiteness::PositiveSemidefinite
        } else {
            Definiteness::Indefinite
        }
    }
}

/// Square-root-free Cholesky factorization by elimination without pivoting.
///
/// A zero pivot whose remaining column is also zero is accepted (PSD
/// case, `L` gets a unit column). A zero pivot with a nonzero residual
/// column means the matrix is not PSD and cannot be factored this way.
pub fn ldl_factor(m: &CovMatrix) -> Result<LdlFactorization> {
    let n = m.dim();
    let mut work = m.0.clone();
    let mut l = RatMatrix::identity(n);
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let p = work[(k, k)].clone();
        if p.is_zero() {
            if ((k + 1)..n).any(|i| !work[(i, k)].is_zero()) {
                return Err(Error::NotFactorizable { pivot: k });
            }
            pivots.push(p);
            continue;
        }
        for i in (k + 1)..n {
            l[(i, k)] = &work[(i, k)] / &p;
        }
        for i in (k + 1)..n {
            if l[(i, k)].is_zero() {
                continue;
            }
            for j in (k + 1)..=i {
                let delta = &l[(i, k)] * &work[(k, j)];
                work[(i, j)] -= &delta;
                if i != j {
                    work[(j, i)] = work[(i, j)].clone();
                }
            }
        }
        pivots.push(p);
    }
    Ok(LdlFactorization { l, pivots })
}

/// Definiteness of `m`; a failed factorization means indefinite.
pub fn definiteness(m: &CovMatrix) -> Definiteness {
    match ldl_factor(m) {
        Ok(f) => f.definiteness(),
        Err(_) => Definiteness::Indefinite,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(x: &Rational) -> Sign {
        match x.signum() {
            -1 => Sign::Negative,
            0 => Sign::Zero,
            _ => Sign::Positive,
        }
    }
}

/// Entrywise signs of a lower-triangular Cholesky factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignPattern {
    pub signs: Vec<Vec<Sign>>,
}

impl SignPattern {
    pub fn has_negative(&self) -> bool {
        self.signs.iter().flatten().any(|s| *s == Sign::Negative)
    }

    pub fn get(&self, i: usize, j: usize) -> Sign {
        self.signs[i][j]
    }
}

/// Signs of the Cholesky factor `C = L · diag(√pivots)` of a PD matrix.
/// Scaling columns by positive square roots keeps signs, so no roots are taken.
pub fn cholesky_signs(m: &CovMatrix) -> Result<SignPattern> {
    let f = ldl_factor(m).map_err(|_| Error::NotPositiveDefinite)?;
    if f.definiteness() != Definiteness::PositiveDefinite {
        return Err(Error::NotPositiveDefinite);
    }
    let n = m.dim();
    let signs = (0..n)
        .map(|i| (0..n).map(|j| Sign::of(&f.l[(i, j)])).collect())
        .collect();
    Ok(SignPattern { signs })
}

/// `a₁₂ a₂₃ a₃₁` of a 3×3 matrix, invariant under signature conjugation.
pub fn cyclic_product_3(a: &CovMatrix) -> Result<Rational> {
    if a.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: a.dim(),
        });
    }
    Ok(a.get(0, 1) * a.get(1, 2) * a.get(2, 0))
}

/// Floating-point Cholesky factor (lower triangular), for sampling only.
pub fn cholesky_f64(m: &CovMatrix) -> Result<Vec<Vec<f64>>> {
    let a = m.0.to_f64_rows();
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut diag = a[j][j];
        for k in 0..j {
            diag -= l[j][k] * l[j][k];
        }
        if diag < 0.0 {
            return Err(Error::NotPositiveSemidefinite);
        }
        let root = diag.sqrt();
        l[j][j] = root;
        for i in (j + 1)..n {
            let mut v = a[i][j];
            for k in 0..j {
                v -= l[i][k] * l[j][k];
            }
            l[i][j] = if root > 0.0 { v / root } else { 0.0 };
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn paper_3x3() -> CovMatrix {
        CovMatrix::from_strs(&[
            &["3/2", "9/8", "9/8"],
            &["9/8", "21/16", "3/4"],
            &["9/8", "3/4", "21/16"],
        ])
    }

    #[test]
    fn ldl_identity() {
        let f = ldl_factor(&CovMatrix::identity(3)).unwrap();
        assert_eq!(f.l, RatMatrix::identity(3));
        assert_eq!(f.pivots, vec![Rational::one(); 3]);
    }

    #[test]
    fn ldl_two_by_two_by_hand() {
        let m = CovMatrix::from_strs(&[&["2", "1"], &["1", "2"]]);
        let f = ldl_factor(&m).unwrap();
        assert_eq!(f.l, RatMatrix::from_strs(&[&["1", "0"], &["1/2", "1"]]));
        assert_eq!(f.pivots, vec![r("2"), r("3/2")]);
        assert_eq!(f.reconstruct(), m);
        assert_eq!(f.definiteness(), Definiteness::PositiveDefinite);
    }

    #[test]
    fn ldl_paper_fixture_is_pd() {
        let f = ldl_factor(&paper_3x3()).unwrap();
        assert!(f.pivots.iter().all(Rational::is_positive));
        assert_eq!(f.reconstruct(), paper_3x3());
    }

    #[test]
    fn ldl_psd_and_failures() {
        let psd = CovMatrix::from_strs(&[&["1", "1"], &["1", "1"]]);
        let f = ldl_factor(&psd).unwrap();
        assert_eq!(f.definiteness(), Definiteness::PositiveSemidefinite);
        assert_eq!(f.reconstruct(), psd);

        let zero_first = CovMatrix::from_strs(&[&["0", "0"], &["0", "3"]]);
        assert_eq!(
            ldl_factor(&zero_first).unwrap().definiteness(),
            Definiteness::PositiveSemidefinite
        );

        let bad = CovMatrix::from_strs(&[&["0", "1"], &["1", "0"]]);
        assert_eq!(ldl_factor(&bad), Err(Error::NotFactorizable { pivot: 0 }));
        assert_eq!(definiteness(&bad), Definiteness::Indefinite);

        let indefinite = CovMatrix::from_strs(&[&["1", "2"], &["2", "1"]]);
        assert_eq!(definiteness(&indefinite), Definiteness::Indefinite);
    }

    #[test]
    fn cholesky_sign_examples() {
        let sigma = CovMatrix::from_strs(&[&["2/3", "1/3"], &["1/3", "2/3"]]);
        assert_eq!(
            invert(&sigma).unwrap(),
            CovMatrix::from_strs(&[&["2", "-1"], &["-1", "2"]])
        );
        assert!(!cholesky_signs(&sigma).unwrap().has_negative());

        let id = cholesky_signs(&CovMatrix::identity(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { Sign::Positive } else { Sign::Zero };
                assert_eq!(id.get(i, j), expect);
            }
        }

        let neg = CovMatrix::from_strs(&[&["1", "-1/2"], &["-1/2", "1"]]);
        let p = cholesky_signs(&neg).unwrap();
        assert!(p.has_negative());
        assert_eq!(p.get(1, 0), Sign::Negative);

        let psd = CovMatrix::from_strs(&[&["1", "1"], &["1", "1"]]);
        assert_eq!(cholesky_signs(&psd), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn invert_examples() {
        assert_eq!(invert(&CovMatrix::identity(4)).unwrap(), CovMatrix::identity(4));
        let m = CovMatrix::from_strs(&[&["2", "1"], &["1", "2"]]);
        // Adjugate over determinant 3.
        let expect = CovMatrix::from_strs(&[&["2/3", "-1/3"], &["-1/3", "2/3"]]);
        assert_eq!(invert(&m).unwrap(), expect);
        let diag = CovMatrix::diagonal(&[r("4"), r("9")]);
        assert_eq!(
            invert(&diag).unwrap(),
            CovMatrix::diagonal(&[r("1/4"), r("1/9")])
        );
        let singular = CovMatrix::from_strs(&[&["1", "2"], &["2", "4"]]);
        assert_eq!(invert(&singular), Err(Error::Singular));
        // Needs a row swap.
        let swap = CovMatrix::from_strs(&[&["0", "1"], &["1", "0"]]);
        assert_eq!(invert(&swap).unwrap(), swap);
    }

    #[test]
    fn conjugation_examples() {
        let m = CovMatrix::from_strs(&[&["1", "1/2"], &["1/2", "1"]]);
        assert_eq!(
            conjugate_by_signature(&m, &SignatureMatrix::identity(2)).unwrap(),
            m
        );
        let flip = SignatureMatrix::new(vec![1, -1]).unwrap();
        assert_eq!(
            conjugate_by_signature(&m, &flip).unwrap(),
            CovMatrix::from_strs(&[&["1", "-1/2"], &["-1/2", "1"]])
        );
        let all_neg = SignatureMatrix::new(vec![-1, -1, -1]).unwrap();
        assert_eq!(conjugate_by_signature(&paper_3x3(), &all_neg).unwrap(), paper_3x3());
        assert!(conjugate_by_signature(&m, &all_neg).is_err());
    }

    #[test]
    fn cyclic_product_examples() {
        assert_eq!(cyclic_product_3(&CovMatrix::identity(3)).unwrap(), Rational::zero());
        let a = invert(&paper_3x3()).unwrap();
        let c = cyclic_product_3(&a).unwrap();
        assert!(c.is_positive());
        for d in all_signatures(3).unwrap() {
            let conj = conjugate_by_signature(&a, &d).unwrap();
            assert_eq!(cyclic_product_3(&conj).unwrap(), c);
        }
        assert!(cyclic_product_3(&CovMatrix::identity(2)).is_err());
    }

    #[test]
    fn signature_class_order() {
        let classes: Vec<_> = signature_classes(3).unwrap().map(|s| s.signs).collect();
        assert_eq!(
            classes,
            vec![vec![1, 1, 1], vec![1, -1, 1], vec![1, 1, -1], vec![1, -1, -1]]
        );
        assert_eq!(signature_classes(1).unwrap().count(), 1);
        assert_eq!(all_signatures(4).unwrap().len(), 16);
        assert!(signature_classes(17).is_err());
    }

    #[test]
    fn json_schema() {
        let text = r#"{"d": 3, "entries": [["3/2","9/8","9/8"],["9/8","21/16","3/4"],["9/8","3/4","21/16"]]}"#;
        let m = CovMatrix::from_json_str(text).unwrap();
        assert_eq!(m, paper_3x3());
        let back = CovMatrix::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let ints = CovMatrix::from_json_str(r#"{"d":2,"entries":[[1,0],[0,"2"]]}"#).unwrap();
        assert_eq!(ints, CovMatrix::diagonal(&[r("1"), r("2")]));
        assert!(matches!(
            CovMatrix::from_json_str(r#"{"d":2,"entries":[[1,1],[0,1]]}"#),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(CovMatrix::from_json_str(r#"{"d":3,"entries":[[1,0],[0,1]]}"#).is_err());
        assert!(CovMatrix::from_json_str(r#"{"d":2,"entries":[[1,0],[0]]}"#).is_err());
    }

    #[test]
    fn float_cholesky_reconstructs() {
        let l = cholesky_f64(&paper_3x3()).unwrap();
        let a = paper_3x3().matrix().to_f64_rows();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l[i][k] * l[j][k]).sum();
                assert!((v - a[i][j]).abs() < 1e-14);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_rational() -> impl Strategy<Value = Rational> {
            (-6i64..=6, 1i64..=4).prop_map(|(p, q)| Rational::new(p, q).unwrap())
        }

        fn symmetric(max_d: usize) -> impl Strategy<Value = CovMatrix> {
            (1..=max_d).prop_flat_map(|d| {
                proptest::collection::vec(small_rational(), d * d).prop_map(move |v| {
                    let mut m = RatMatrix::zeros(d, d);
                    for i in 0..d {
                        for j in 0..=i {
                            m[(i, j)] = v[i * d + j].clone();
                            m[(j, i)] = v[i * d + j].clone();
                        }
                    }
                    CovMatrix::new(m).unwrap()
                })
            })
        }

        fn signature(d: usize) -> impl Strategy<Value = SignatureMatrix> {
            proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], d)
                .prop_map(|s| SignatureMatrix::new(s).unwrap())
        }

        proptest! {
            #[test]
            fn ldl_reconstructs_exactly(m in symmetric(6)) {
                if let Ok(f) = ldl_factor(&m) {
                    prop_assert_eq!(f.reconstruct(), m);
                }
            }

            #[test]
            fn ldl_reconstructs_gram_matrices(m in symmetric(6)) {
                let g = m.matrix().gram();
                let f = ldl_factor(&g).unwrap();
                prop_assert_ne!(f.definiteness(), Definiteness::Indefinite);
                prop_assert_eq!(f.reconstruct(), g);
            }

            #[test]
            fn invert_round_trip(m in symmetric(5)) {
                if let Ok(inv) = invert(&m) {
                    let prod = m.matrix().mul(inv.matrix()).unwrap();
                    prop_assert_eq!(prod, RatMatrix::identity(m.dim()));
                    prop_assert_eq!(invert(&inv).unwrap(), m);
                }
            }

            #[test]
            fn conjugation_is_group_action(
                (m, d1, d2) in symmetric(5).prop_flat_map(|m| {
                    let d = m.dim();
                    (Just(m), signature(d), signature(d))
                })
            ) {
                let once = conjugate_by_signature(&m, &d1).unwrap();
                prop_assert_eq!(conjugate_by_signature(&once, &d1).unwrap(), m.clone());
                let twice = conjugate_by_signature(&once, &d2).unwrap();
                let composed = conjugate_by_signature(&m, &d1.compose(&d2).unwrap()).unwrap();
                prop_assert_eq!(twice, composed);
                prop_assert_eq!(once.diag(), m.diag());
            }

            #[test]
            fn cyclic_product_invariant(
                v in proptest::collection::vec(small_rational(), 6)
            ) {
                let m = CovMatrix::from_rows(vec![
                    vec![v[0].clone(), v[1].clone(), v[2].clone()],
                    vec![v[1].clone(), v[3].clone(), v[4].clone()],
                    vec![v[2].clone(), v[4].clone(), v[5].clone()],
                ]).unwrap();
                let c = cyclic_product_3(&m).unwrap();
                for d in all_signatures(3).unwrap() {
                    let conj = conjugate_by_signature(&m, &d).unwrap();
                    prop_assert_eq!(cyclic_product_3(&conj).unwrap(), c.clone());
                }
            }
        }
    }
}
