//! Combinatorial and analytic kernels behind the moment inequality:
//! allocation matrices and the factorial inequality, the gamma-ratio
//! function with its log-derivatives, polygamma evaluation, and the
//! exponential-sum lemma that makes the trigamma integrand nonnegative.

mod allocation;
mod gamma;
mod lemma;

pub use allocation::{
    allocation_count, check_ineq7, enumerate_allocations, AllocationMatrix, Allocations,
    Ineq7Verdict,
};
pub use gamma::{
    digamma, gamma_ratio, gamma_ratio_log_derivatives, ln_gamma_ratio, polygamma, trigamma,
    GammaRatioSpec,
};
pub use lemma::{check_braces_nonneg, check_lemma_a1, BracesVerdict, LemmaVerdict};
