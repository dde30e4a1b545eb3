//! Floating-point slack used by every numeric check in the crate.

/// Float tolerances. Exact checks never consult these.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// `|d/da ln g(0)|` must not exceed this.
    pub first_derivative_at_zero: f64,
    /// Second log-derivative of `g` must be at least `-second_derivative`.
    pub second_derivative: f64,
    /// Allowed decrease of `ln g` between consecutive grid points.
    pub monotone: f64,
    /// Relative agreement of `g` at integer `a` with the exact factorial ratio.
    pub integer_point_relative: f64,
    /// Allowed negativity of the trigamma-integral braces.
    pub braces: f64,
    /// Braces vs. lemma evaluation, relative to `max(1, 1/(y-1))`.
    pub braces_vs_lemma: f64,
    /// `|Σ uᵢ - 1|` accepted for a simplex vector.
    pub simplex_sum: f64,
    /// Max-abs residual below which a float nonnegative factorization counts.
    pub factorization_residual: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    first_derivative_at_zero: 1e-12,
    second_derivative: 1e-10,
    monotone: 1e-12,
    integer_point_relative: 1e-12,
    braces: 1e-12,
    braces_vs_lemma: 1e-12,
    simplex_sum: 1e-12,
    factorization_residual: 1e-10,
};
