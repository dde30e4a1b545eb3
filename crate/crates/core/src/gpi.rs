//! Exact checkers for the product inequality, its split form, and the
//! expansion chain that proves it under nonnegative mixing.

use serde::Serialize;

use crate::analysis::{check_ineq7, AllocationMatrix, Ineq7Verdict};
use crate::error::{Error, Result};
use crate::matrices::{definiteness, CovMatrix, Definiteness};
use crate::moments::{
    expansion_lower_bound, expansion_rhs, expansion_terms, marginal_moment_product, wick_moment,
    ExponentVector, MixingMatrix,
};
use crate::numerics::Rational;

/// `lhs ≥ rhs` with its exact margin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GpiVerdict {
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
    pub margin: Rational,
}

impl GpiVerdict {
    pub fn new(lhs: Rational, rhs: Rational) -> Self {
        let margin = &lhs - &rhs;
        GpiVerdict {
            holds: !margin.is_negative(),
            lhs,
            rhs,
            margin,
        }
    }
}

fn require_psd(sigma: &CovMatrix) -> Result<()> {
    match definiteness(sigma) {
        Definiteness::Indefinite => Err(Error::NotPositiveSemidefinite),
        _ => Ok(()),
    }
}

fn check_dim(sigma: &CovMatrix, n: &ExponentVector) -> Result<()> {
    if sigma.dim() != n.len() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: n.len(),
        });
    }
    Ok(())
}

/// `E(∏ Xᵢ^{2nᵢ})` against `∏ E(Xᵢ^{2nᵢ})`.
pub fn check_gpi_product(sigma: &CovMatrix, n: &ExponentVector) -> Result<GpiVerdict> {
    check_dim(sigma, n)?;
    require_psd(sigma)?;
    Ok(GpiVerdict::new(
        wick_moment(sigma, n)?,
        marginal_moment_product(sigma, n)?,
    ))
}

/// `E(∏₁ᵈ Xᵢ^{2nᵢ})` against `E(∏₁ᵏ) · E(∏ₖ₊₁ᵈ)` for `1 ≤ k ≤ d − 1`.
pub fn check_gpi_split(sigma: &CovMatrix, n: &ExponentVector, k: usize) -> Result<GpiVerdict> {
    check_dim(sigma, n)?;
    let d = sigma.dim();
    if k == 0 || k >= d {
        return Err(Error::InvalidSplit {
            k,
            max: d.saturating_sub(1),
        });
    }
    require_psd(sigma)?;
    let head = ExponentVector::new(n.as_slice()[..k].to_vec());
    let tail = ExponentVector::new(n.as_slice()[k..].to_vec());
    let rhs = wick_moment(&sigma.principal(0..k), &head)? * wick_moment(&sigma.principal(k..d), &tail)?;
    Ok(GpiVerdict::new(wick_moment(sigma, n)?, rhs))
}

/// Coefficient comparison for one allocation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AllocationComparison {
    pub allocation: AllocationMatrix,
    pub lower_bound_coefficient: Rational,
    pub marginal_coefficient: Rational,
    pub ineq7: Ineq7Verdict,
    pub holds: bool,
}

/// All quantities of the chain
/// `E(∏(CZ)ᵢ^{2nᵢ}) ≥ even-index lower bound ≥ product of marginals`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub wick: Rational,
    pub lower_bound: Rational,
    pub rhs: Rational,
    pub marginal_product: Rational,
    pub wick_ge_lower: bool,
    pub lower_ge_rhs: bool,
    pub rhs_eq_marginal: bool,
    pub allocations_checked: usize,
    /// Allocations whose coefficient comparison fails; expected empty.
    pub failing: Vec<AllocationComparison>,
}

impl ChainReport {
    pub fn holds(&self) -> bool {
        self.wick_ge_lower && self.lower_ge_rhs && self.rhs_eq_marginal && self.failing.is_empty()
    }
}

/// Per-allocation comparison of the two expansions. The ratio of the two
/// coefficients equals the ratio of the two sides of the factorial
/// inequality, and both comparisons are recorded.
pub fn compare_allocations(c: &MixingMatrix, n: &ExponentVector) -> Result<Vec<AllocationComparison>> {
    Ok(expansion_terms(c, n)?
        .into_iter()
        .map(|t| {
            let ineq7 = check_ineq7(&t.allocation);
            let holds = t.lower_bound_coefficient >= t.marginal_coefficient && ineq7.holds;
            AllocationComparison {
                allocation: t.allocation,
                lower_bound_coefficient: t.lower_bound_coefficient,
                marginal_coefficient: t.marginal_coefficient,
                ineq7,
                holds,
            }
        })
        .collect())
}

pub fn check_expansion_chain(c: &MixingMatrix, n: &ExponentVector) -> Result<ChainReport> {
    let sigma = c.covariance();
    check_dim(&sigma, n)?;
    let wick = wick_moment(&sigma, n)?;
    let lower_bound = expansion_lower_bound(c, n)?;
    let rhs = expansion_rhs(c, n)?;
    let marginal_product = marginal_moment_product(&sigma, n)?;
    let comparisons = compare_allocations(c, n)?;
    let allocations_checked = comparisons.len();
    let failing = comparisons.into_iter().filter(|a| !a.holds).collect();
    Ok(ChainReport {
        wick_ge_lower: wick >= lower_bound,
        lower_ge_rhs: lower_bound >= rhs,
        rhs_eq_marginal: rhs == marginal_product,
        wick,
        lower_bound,
        rhs,
        marginal_product,
        allocations_checked,
        failing,
    })
}
