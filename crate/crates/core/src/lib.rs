//! Exact verification of the Gaussian product inequality for even integer
//! exponents, the combinatorial ingredients of its proof under nonnegative
//! mixing, and classification of covariance matrices by sign structure.
//!
//! All moment and matrix computations run over exact rationals; floats only
//! appear in the gamma-function analysis, the nonnegative-factorization
//! heuristic and the Monte Carlo cross-check.

pub mod analysis;
pub mod classify;
pub mod cli;
pub mod error;
pub mod gpi;
pub mod matrices;
pub mod moments;
pub mod numerics;
pub mod tolerance;

pub use error::{Error, Result};
pub use matrices::{CovMatrix, RatMatrix, SignatureMatrix};
pub use numerics::Rational;
