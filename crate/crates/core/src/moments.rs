//! Exact mixed moments of centered Gaussian vectors and the two multinomial
//! expansions of the moment inequality under nonnegative mixing.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::analysis::{enumerate_allocations, AllocationMatrix};
use crate::error::{Error, Result};
use crate::matrices::{cholesky_f64, CovMatrix, RatMatrix};
use crate::numerics::{factorial, gaussian_even_moment, multinomial, BigNat, Rational};

/// Half-exponents `n₁, …, n_d`; the moment uses `X_i^{2nᵢ}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExponentVector {
    n: Vec<u32>,
}

impl ExponentVector {
    pub fn new(n: Vec<u32>) -> Self {
        ExponentVector { n }
    }

    pub fn zeros(d: usize) -> Self {
        ExponentVector { n: vec![0; d] }
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.n
    }

    /// `Σ nᵢ`; the moment has total degree twice this.
    pub fn half_degree(&self) -> u32 {
        self.n.iter().sum()
    }

    /// Doubled exponents `2nᵢ`, i.e. the variable multiplicities.
    pub fn multiplicities(&self) -> Vec<u32> {
        self.n.iter().map(|x| 2 * x).collect()
    }

    pub fn permute(&self, perm: &[usize]) -> ExponentVector {
        ExponentVector {
            n: perm.iter().map(|&p| self.n[p]).collect(),
        }
    }

    /// Parses `"1,2,0"`.
    pub fn parse_list(s: &str) -> Result<Self> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad exponent {t:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(ExponentVector::new)
    }
}

impl From<Vec<u32>> for ExponentVector {
    fn from(n: Vec<u32>) -> Self {
        ExponentVector::new(n)
    }
}

/// Square matrix `C` with entrywise nonnegative rational entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct MixingMatrix(RatMatrix);

impl MixingMatrix {
    pub fn new(c: RatMatrix) -> Result<Self> {
        if !c.is_square() {
            return Err(Error::DimensionMismatch {
                expected: c.rows(),
                found: c.cols(),
            });
        }
        if let Some((row, col)) = c.first_negative() {
            return Err(Error::NegativeEntry { row, col });
        }
        Ok(MixingMatrix(c))
    }

    pub fn identity(d: usize) -> Self {
        MixingMatrix(RatMatrix::identity(d))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.0[(i, j)]
    }

    /// `C Cᵀ`, the covariance of `C Z`.
    pub fn covariance(&self) -> CovMatrix {
        self.0.gram()
    }
}

impl<'de> Deserialize<'de> for MixingMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = RatMatrix::deserialize(d)?;
        MixingMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `E(∏ Xᵢ^{mᵢ})` for `X ~ N(0, Σ)` and arbitrary multiplicities with even
/// total degree.
///
/// Uses the Isserlis recursion: pair one copy of the first variable `j`
/// present with every remaining copy of each `k`,
/// `E[X^m] = Σₖ σⱼₖ (mₖ − δⱼₖ) E[X^{m − eⱼ − eₖ}]`, memoized on the
/// multiplicity vector.
pub fn mixed_moment(sigma: &CovMatrix, multiplicities: &[u32]) -> Result<Rational> {
    check_dim(sigma.dim(), multiplicities.len())?;
    let total: u32 = multiplicities.iter().sum();
    if !total.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "odd total degree {total} has zero moment and is not evaluated"
        )));
    }
    let mut memo = HashMap::new();
    Ok(isserlis(sigma, &mut multiplicities.to_vec(), &mut memo))
}

fn isserlis(sigma: &CovMatrix, m: &mut Vec<u32>, memo: &mut HashMap<Vec<u32>, Rational>) -> Rational {
    let Some(j) = m.iter().position(|&x| x > 0) else {
        return Rational::one();
    };
    if let Some(v) = memo.get(m.as_slice()) {
        return v.clone();
    }
    let key = m.clone();
    m[j] -= 1;
    let mut acc = Rational::zero();
    for k in j..m.len() {
        let copies = m[k];
        if copies == 0 || sigma.get(j, k).is_zero() {
            continue;
        }
        m[k] -= 1;
        let sub = isserlis(sigma, m, memo);
        m[k] += 1;
        acc += sigma.get(j, k) * &Rational::from_integer(i64::from(copies)) * sub;
    }
    m[j] += 1;
    memo.insert(key, acc.clone());
    acc
}

/// `E(∏ Xᵢ^{2nᵢ})` exactly.
pub fn wick_moment(sigma: &CovMatrix, n: &ExponentVector) -> Result<Rational> {
    mixed_moment(sigma, &n.multiplicities())
}

/// `∏ᵢ E(Xᵢ^{2nᵢ}) = ∏ᵢ (2nᵢ)!/(2^{nᵢ} nᵢ!) · σᵢᵢ^{nᵢ}`.
pub fn marginal_moment_product(sigma: &CovMatrix, n: &ExponentVector) -> Result<Rational> {
    check_dim(sigma.dim(), n.len())?;
    let mut out = Rational::one();
    for (i, &ni) in n.as_slice().iter().enumerate() {
        let var = sigma.get(i, i);
        if var.is_negative() {
            return Err(Error::NegativeEntry { row: i, col: i });
        }
        out *= &(gaussian_even_moment(u64::from(ni)) * var.pow(ni));
    }
    Ok(out)
}

/// Integer coefficient of `∏ c_ij^{2ℓᵢⱼ}` in the even-index lower bound:
/// `∏ⱼ (2Lⱼ)!/(2^{Lⱼ} Lⱼ!) · ∏ᵢ binom(2nᵢ; 2ℓᵢ₁, …, 2ℓᵢ_d)`.
pub fn lower_bound_coefficient(alloc: &AllocationMatrix) -> BigNat {
    let mut coef = BigNat::from(1u32);
    for &lj in alloc.col_sums() {
        let lj = u64::from(lj);
        coef *= factorial(2 * lj) / (factorial(lj) << (lj as usize));
    }
    for (row, &ni) in alloc.entries().iter().zip(alloc.row_sums()) {
        let doubled: Vec<u64> = row.iter().map(|&x| 2 * u64::from(x)).collect();
        coef *= multinomial(2 * u64::from(ni), &doubled).expect("row sums are consistent");
    }
    coef
}

/// Integer coefficient of `∏ c_ij^{2ℓᵢⱼ}` in the product of marginal moments:
/// `∏ᵢ (2nᵢ)!/(2^{nᵢ} nᵢ!) · binom(nᵢ; ℓᵢ₁, …, ℓᵢ_d)`.
pub fn marginal_coefficient(alloc: &AllocationMatrix) -> BigNat {
    let mut coef = BigNat::from(1u32);
    for (row, &ni) in alloc.entries().iter().zip(alloc.row_sums()) {
        let ni = u64::from(ni);
        let parts: Vec<u64> = row.iter().map(|&x| u64::from(x)).collect();
        coef *= factorial(2 * ni) / (factorial(ni) << (ni as usize));
        coef *= multinomial(ni, &parts).expect("row sums are consistent");
    }
    coef
}

/// One allocation's contribution to both expansions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExpansionTerm {
    pub allocation: AllocationMatrix,
    pub lower_bound_coefficient: Rational,
    pub marginal_coefficient: Rational,
    /// `∏ᵢⱼ c_ij^{2ℓᵢⱼ}`.
    pub monomial: Rational,
}

/// Cache of `c_ij^{2k}` for `k ≤ max`.
struct EvenPowers {
    d: usize,
    table: Vec<Vec<Rational>>,
}

impl EvenPowers {
    fn new(c: &MixingMatrix, max: u32) -> Self {
        let d = c.dim();
        let mut table = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let sq = c.get(i, j) * c.get(i, j);
                let mut row = vec![Rational::one()];
                for _ in 0..max {
                    let next = row.last().unwrap() * &sq;
                    row.push(next);
                }
                table.push(row);
            }
        }
        EvenPowers { d, table }
    }

    fn monomial(&self, alloc: &AllocationMatrix) -> Rational {
        let mut out = Rational::one();
        for i in 0..self.d {
            for j in 0..self.d {
                let k = alloc.get(i, j) as usize;
                if k > 0 {
                    out *= &self.table[i * self.d + j][k];
                }
            }
        }
        out
    }
}

/// Per-allocation terms of both expansions, in lexicographic allocation order.
pub fn expansion_terms(c: &MixingMatrix, n: &ExponentVector) -> Result<Vec<ExpansionTerm>> {
    check_dim(c.dim(), n.len())?;
    let powers = EvenPowers::new(c, n.as_slice().iter().copied().max().unwrap_or(0));
    Ok(enumerate_allocations(n.as_slice(), c.dim())
        .map(|alloc| ExpansionTerm {
            lower_bound_coefficient: Rational::from_nat(lower_bound_coefficient(&alloc)),
            marginal_coefficient: Rational::from_nat(marginal_coefficient(&alloc)),
            monomial: powers.monomial(&alloc),
            allocation: alloc,
        })
        .collect())
}

/// The even-index truncation of the expanded moment of `C Z`: a lower bound
/// on `E(∏ (Σⱼ cᵢⱼ Zⱼ)^{2nᵢ})` whenever `C ≥ 0`.
pub fn expansion_lower_bound(c: &MixingMatrix, n: &ExponentVector) -> Result<Rational> {
    check_dim(c.dim(), n.len())?;
    let powers = EvenPowers::new(c, n.as_slice().iter().copied().max().unwrap_or(0));
    let mut sum = Rational::zero();
    for alloc in enumerate_allocations(n.as_slice(), c.dim()) {
        let monomial = powers.monomial(&alloc);
        if monomial.is_zero() {
            continue;
        }
        sum += Rational::from_nat(lower_bound_coefficient(&alloc)) * monomial;
    }
    Ok(sum)
}

/// Closed form `∏ᵢ (2nᵢ)!/(2^{nᵢ} nᵢ!) · (Σⱼ cᵢⱼ²)^{nᵢ}`.
pub fn expansion_rhs(c: &MixingMatrix, n: &ExponentVector) -> Result<Rational> {
    check_dim(c.dim(), n.len())?;
    let mut out = Rational::one();
    for (i, &ni) in n.as_slice().iter().enumerate() {
        let row_sq: Rational = (0..c.dim()).map(|j| c.get(i, j) * c.get(i, j)).sum();
        out *= &(gaussian_even_moment(u64::from(ni)) * row_sq.pow(ni));
    }
    Ok(out)
}

/// Sum of the per-allocation marginal terms; equals [`expansion_rhs`].
pub fn expansion_rhs_by_terms(c: &MixingMatrix, n: &ExponentVector) -> Result<Rational> {
    Ok(expansion_terms(c, n)?
        .into_iter()
        .map(|t| t.marginal_coefficient * t.monomial)
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub draws: u64,
}

/// Sample mean and standard error of `∏ Xᵢ^{2nᵢ}` for `X = L Z`, `L` the
/// float Cholesky factor of `Σ`. Seeded and deterministic; a cross-check,
/// never a source of truth.
pub fn monte_carlo_moment(
    sigma: &CovMatrix,
    n: &ExponentVector,
    draws: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    check_dim(sigma.dim(), n.len())?;
    if draws < 2 {
        return Err(Error::InvalidArgument("need at least two draws".into()));
    }
    let l = cholesky_f64(sigma)?;
    let d = sigma.dim();
    let exps: Vec<i32> = n.multiplicities().iter().map(|&m| m as i32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = vec![0.0; d];
    // Welford running mean/variance.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for k in 1..=draws {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        let mut value = 1.0;
        for i in 0..d {
            let x: f64 = (0..=i).map(|j| l[i][j] * z[j]).sum();
            value *= x.powi(exps[i]);
        }
        let delta = value - mean;
        mean += delta / k as f64;
        m2 += delta * (value - mean);
    }
    let variance = m2 / (draws - 1) as f64;
    Ok(MonteCarloEstimate {
        mean,
        std_error: (variance / draws as f64).sqrt(),
        draws,
    })
}
