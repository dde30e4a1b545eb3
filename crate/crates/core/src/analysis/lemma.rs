use serde::Serialize;

use crate::error::{Error, Result};
use crate::tolerance::TOLERANCES;

/// `1/(y−1)` against `Σᵢ 1/(y^{1/uᵢ} − 1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Checks `1/(y−1) > Σᵢ 1/(y^{1/uᵢ} − 1)` for `y > 1` and a simplex vector `u`
/// with at least two parts.
///
/// With `strict_interior`, every `uᵢ` must lie in `(0, 1)`. Without it, zero
/// weights are accepted and contribute nothing (their term is `1/∞`).
pub fn check_lemma_a1(y: f64, u: &[f64], strict_interior: bool) -> Result<LemmaVerdict> {
    if !(y > 1.0 && y.is_finite()) {
        return Err(Error::InvalidArgument(format!("y must be finite and > 1, got {y}")));
    }
    if u.len() < 2 {
        return Err(Error::InvalidArgument("simplex needs at least two parts".into()));
    }
    let in_range = |x: f64| {
        if strict_interior {
            x > 0.0 && x < 1.0
        } else {
            (0.0..1.0).contains(&x)
        }
    };
    if let Some(bad) = u.iter().find(|&&x| !in_range(x)) {
        return Err(Error::InvalidArgument(format!("simplex weight {bad} out of range")));
    }
    let sum: f64 = u.iter().sum();
    if (sum - 1.0).abs() > TOLERANCES.simplex_sum {
        return Err(Error::InvalidArgument(format!("simplex weights sum to {sum}")));
    }
    let ln_y = y.ln();
    let lhs = 1.0 / (y - 1.0);
    let rhs: f64 = u
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| 1.0 / (ln_y / x).exp_m1())
        .sum();
    let margin = lhs - rhs;
    Ok(LemmaVerdict {
        lhs,
        rhs,
        margin,
        holds: margin > 0.0,
    })
}

/// Value of the braces in the trigamma-integral form of the second
/// log-derivative.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BracesVerdict {
    pub value: f64,
    pub holds: bool,
}

/// `1/(e^{s/L} − 1) − Σᵢ 1/(e^{s/ℓᵢ} − 1)`, zero parts omitted, checked
/// for nonnegativity. `(e^{s/L})^{L/ℓ} = e^{s/ℓ}` is used directly.
pub fn check_braces_nonneg(total: u32, parts: &[u32], s: f64) -> Result<BracesVerdict> {
    if total == 0 {
        return Err(Error::InvalidArgument("L must be positive".into()));
    }
    let sum: u32 = parts.iter().sum();
    if sum != total {
        return Err(Error::PartsMismatch {
            sum: u64::from(sum),
            expected: u64::from(total),
        });
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!("s must be finite and > 0, got {s}")));
    }
    let head = 1.0 / (s / f64::from(total)).exp_m1();
    let tail: f64 = parts
        .iter()
        .filter(|&&p| p > 0)
        .map(|&p| 1.0 / (s / f64::from(p)).exp_m1())
        .sum();
    let value = head - tail;
    Ok(BracesVerdict {
        value,
        holds: value >= -TOLERANCES.braces,
    })
}
