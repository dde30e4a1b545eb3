//! Classification of a covariance matrix against four nested sign
//! conditions, up to a signature flip `D`:
//!
//! * (II) `(DΣD)⁻¹` has nonpositive off-diagonal entries;
//! * (III) `DΣD = C Cᵀ` for some entrywise nonnegative `C`;
//! * (IV) `DΣD` is entrywise nonnegative;
//! * (I), total positivity of `|X|`, which for Gaussians is equivalent to (II).
//!
//! (II) ⇒ (III) ⇒ (IV). (II) and (IV) are decided exactly by sweeping the
//! `2^{d−1}` signature classes. (III) is complete positivity, which has no
//! effective test in general, so its verdict is three-valued.

mod factor;
pub mod generators;

use serde::{Deserialize, Serialize};

pub use factor::{default_rank, exact_residual, nonnegative_factor, FloatFactor};
pub use generators::generate_m_matrix_family;

use crate::error::{Error, Result};
use crate::matrices::{
    conjugate_by_signature, definiteness, invert, ldl_factor, signature_classes, CovMatrix,
    Definiteness, RatMatrix, SignatureMatrix,
};
use crate::numerics::Rational;
use crate::tolerance::TOLERANCES;

/// Below this dimension a doubly nonnegative matrix is always completely
/// positive (Maxfield and Minc, 1962; see also Berman and Shaked-Monderer,
/// "Completely Positive Matrices", 2003, Thm. 2.4).
pub const DNN_IS_CP_MAX_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

/// Evidence for a complete-positivity verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CpCertificate {
    /// Exact `DΣD = C Cᵀ` with rational `C ≥ 0`.
    Explicit {
        signature: SignatureMatrix,
        #[serde(rename = "C")]
        c: RatMatrix,
    },
    /// Exact `DΣD = L diag(pivots) Lᵀ` with `L ≥ 0` and positive pivots, so
    /// `C = L diag(√pivots)` is nonnegative.
    Cholesky {
        signature: SignatureMatrix,
        #[serde(rename = "L")]
        l: RatMatrix,
        pivots: Vec<Rational>,
    },
    /// Float factor found numerically. `residual` is the exact max-abs
    /// entry of `DΣD − C Cᵀ` with the float entries read as rationals.
    Float {
        signature: SignatureMatrix,
        #[serde(rename = "C_float")]
        c_float: Vec<Vec<f64>>,
        residual: Rational,
        residual_float: f64,
    },
    /// No factor in hand; doubly nonnegative in dimension at most four.
    DoublyNonnegativeSmallDim { signature: SignatureMatrix },
}

impl CpCertificate {
    pub fn is_exact(&self) -> bool {
        matches!(self, CpCertificate::Explicit { .. } | CpCertificate::Cholesky { .. })
    }

    /// `"exact"`, `"float"` or `"theorem"`.
    pub fn exactness(&self) -> &'static str {
        match self {
            CpCertificate::Explicit { .. } | CpCertificate::Cholesky { .. } => "exact",
            CpCertificate::Float { .. } => "float",
            CpCertificate::DoublyNonnegativeSmallDim { .. } => "theorem",
        }
    }

    pub fn signature(&self) -> &SignatureMatrix {
        match self {
            CpCertificate::Explicit { signature, .. }
            | CpCertificate::Cholesky { signature, .. }
            | CpCertificate::Float { signature, .. }
            | CpCertificate::DoublyNonnegativeSmallDim { signature } => signature,
        }
    }
}

/// A user-supplied factorization `DΣD = C Cᵀ`. `C` may have any number of
/// columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserCertificate {
    #[serde(rename = "C")]
    pub c: RatMatrix,
    pub signature: SignatureMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionIII {
    pub verdict: Verdict,
    pub certificate: Option<CpCertificate>,
    pub exact: bool,
    pub certificate_exactness: Option<&'static str>,
    /// Which step of the decision procedure produced the verdict.
    pub route: String,
}

impl ConditionIII {
    fn new(verdict: Verdict, certificate: Option<CpCertificate>, route: &str) -> Self {
        let exact = match (&verdict, &certificate) {
            (Verdict::Yes, Some(c)) => c.is_exact(),
            (Verdict::No, _) => true,
            _ => false,
        };
        ConditionIII {
            verdict,
            certificate_exactness: certificate.as_ref().map(CpCertificate::exactness),
            certificate,
            exact,
            route: route.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionIV {
    pub verdict: bool,
    pub signature: Option<SignatureMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub pd: bool,
    pub pd_status: Definiteness,
    #[serde(rename = "I")]
    pub cond_i: bool,
    #[serde(rename = "II")]
    pub cond_ii: bool,
    #[serde(rename = "II_signature")]
    pub cond_ii_signature: Option<SignatureMatrix>,
    #[serde(rename = "III")]
    pub cond_iii: ConditionIII,
    #[serde(rename = "IV")]
    pub cond_iv: ConditionIV,
}

/// Settings for the float factorization search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeuristicOptions {
    pub budget: usize,
    pub seed: u64,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        HeuristicOptions {
            budget: 10_000,
            seed: 0,
        }
    }
}

fn require_pd(sigma: &CovMatrix) -> Result<()> {
    if definiteness(sigma) == Definiteness::PositiveDefinite {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite)
    }
}

fn off_diagonal_nonpositive(m: &CovMatrix) -> bool {
    let d = m.dim();
    (0..d).all(|i| (0..d).all(|j| i == j || !m.get(i, j).is_positive()))
}

/// First signature class (in canonical order) making `(DΣD)⁻¹` have
/// nonpositive off-diagonal entries, if any. `(DΣD)⁻¹ = D Σ⁻¹ D`.
pub fn check_condition_ii(sigma: &CovMatrix) -> Result<Option<SignatureMatrix>> {
    require_pd(sigma)?;
    let precision = invert(sigma)?;
    for d in signature_classes(sigma.dim())? {
        if off_diagonal_nonpositive(&conjugate_by_signature(&precision, &d)?) {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// First signature class making `DΣD` entrywise nonnegative, if any.
pub fn check_condition_iv(sigma: &CovMatrix) -> Result<Option<SignatureMatrix>> {
    for d in signature_classes(sigma.dim())? {
        if conjugate_by_signature(sigma, &d)?.is_nonnegative() {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// Checks a user certificate exactly; failure is an error, not a "no".
pub fn verify_certificate(sigma: &CovMatrix, cert: &UserCertificate) -> Result<CpCertificate> {
    let d = sigma.dim();
    if cert.signature.dim() != d || cert.c.rows() != d {
        return Err(Error::InvalidCertificate(format!(
            "certificate dimensions do not match a {d}×{d} matrix"
        )));
    }
    if let Some((i, j)) = cert.c.first_negative() {
        return Err(Error::InvalidCertificate(format!("C has a negative entry at ({i}, {j})")));
    }
    let flipped = conjugate_by_signature(sigma, &cert.signature)?;
    if cert.c.gram() != flipped {
        return Err(Error::InvalidCertificate("D Σ D ≠ C Cᵀ".into()));
    }
    Ok(CpCertificate::Explicit {
        signature: cert.signature.clone(),
        c: cert.c.clone(),
    })
}

/// Exact certificate from the LDLᵀ factor of `DΣD` when that factor is
/// entrywise nonnegative.
pub fn nonnegative_cholesky(sigma: &CovMatrix, d: &SignatureMatrix) -> Option<CpCertificate> {
    let flipped = conjugate_by_signature(sigma, d).ok()?;
    let f = ldl_factor(&flipped).ok()?;
    if f.definiteness() != Definiteness::PositiveDefinite || !f.l.is_nonnegative() {
        return None;
    }
    Some(CpCertificate::Cholesky {
        signature: d.clone(),
        l: f.l,
        pivots: f.pivots,
    })
}

fn heuristic_certificate(
    sigma: &CovMatrix,
    d: &SignatureMatrix,
    opts: &HeuristicOptions,
) -> Option<CpCertificate> {
    let flipped = conjugate_by_signature(sigma, d).ok()?;
    let found = nonnegative_factor(
        &flipped,
        default_rank(sigma.dim()),
        opts.budget,
        opts.seed,
        TOLERANCES.factorization_residual,
    )?;
    Some(CpCertificate::Float {
        signature: d.clone(),
        residual_float: found.residual_f64(),
        residual: found.residual,
        c_float: found.c,
    })
}

fn decide_condition_iii(
    sigma: &CovMatrix,
    user: Option<&UserCertificate>,
    cond_ii: Option<&SignatureMatrix>,
    cond_iv: Option<&SignatureMatrix>,
    opts: &HeuristicOptions,
) -> Result<ConditionIII> {
    if let Some(cert) = user {
        let cert = verify_certificate(sigma, cert)?;
        return Ok(ConditionIII::new(Verdict::Yes, Some(cert), "user certificate"));
    }
    let Some(iv) = cond_iv else {
        return Ok(ConditionIII::new(Verdict::No, None, "condition IV fails"));
    };
    // A IV witness is unique up to flips of blocks that do not interact,
    // so DΣD does not depend on which witness is used.
    let exact_route = || {
        cond_ii
            .and_then(|d| nonnegative_cholesky(sigma, d))
            .or_else(|| nonnegative_cholesky(sigma, iv))
    };
    if sigma.dim() <= DNN_IS_CP_MAX_DIM {
        let cert = exact_route()
            .or_else(|| heuristic_certificate(sigma, iv, opts))
            .unwrap_or_else(|| CpCertificate::DoublyNonnegativeSmallDim {
                signature: iv.clone(),
            });
        let route = match cert.exactness() {
            "exact" => "d ≤ 4, nonnegative Cholesky factor",
            "float" => "d ≤ 4, float factorization",
            _ => "d ≤ 4, doubly nonnegative",
        };
        return Ok(ConditionIII::new(Verdict::Yes, Some(cert), route));
    }
    if let Some(d) = cond_ii {
        let cert = nonnegative_cholesky(sigma, d);
        assert!(cert.is_some(), "nonpositive off-diagonal inverse must give a nonnegative Cholesky factor");
        return Ok(ConditionIII::new(Verdict::Yes, cert, "condition II, nonnegative Cholesky factor"));
    }
    if let Some(cert) = nonnegative_cholesky(sigma, iv) {
        return Ok(ConditionIII::new(Verdict::Yes, Some(cert), "nonnegative Cholesky factor"));
    }
    match heuristic_certificate(sigma, iv, opts) {
        Some(cert) => Ok(ConditionIII::new(Verdict::Yes, Some(cert), "float factorization")),
        None => Ok(ConditionIII::new(Verdict::Unknown, None, "float factorization budget exhausted")),
    }
}

/// Decides (III) for a positive definite `Σ`. Steps, in order: a supplied
/// certificate; failure of (IV) gives "no"; in dimension ≤ 4 (IV) suffices;
/// (II) gives an exact nonnegative Cholesky factor; otherwise a float search.
pub fn check_condition_iii(
    sigma: &CovMatrix,
    user: Option<&UserCertificate>,
    opts: &HeuristicOptions,
) -> Result<ConditionIII> {
    require_pd(sigma)?;
    let iv = check_condition_iv(sigma)?;
    let ii = if iv.is_some() { check_condition_ii(sigma)? } else { None };
    decide_condition_iii(sigma, user, ii.as_ref(), iv.as_ref(), opts)
}

/// Full report. Matrices that are not positive definite get (I) = (II) =
/// false, and (III) is "no" if (IV) fails and "unknown" otherwise.
pub fn classify(
    sigma: &CovMatrix,
    user: Option<&UserCertificate>,
    opts: &HeuristicOptions,
) -> Result<ConditionReport> {
    let pd_status = definiteness(sigma);
    let pd = pd_status == Definiteness::PositiveDefinite;
    let iv = check_condition_iv(sigma)?;
    let (ii, iii) = if pd {
        let ii = check_condition_ii(sigma)?;
        let iii = decide_condition_iii(sigma, user, ii.as_ref(), iv.as_ref(), opts)?;
        (ii, iii)
    } else if iv.is_some() {
        (None, ConditionIII::new(Verdict::Unknown, None, "not positive definite"))
    } else {
        (None, ConditionIII::new(Verdict::No, None, "condition IV fails"))
    };

    assert!(
        ii.is_none() || iii.verdict == Verdict::Yes,
        "condition II holds but III was not confirmed"
    );
    assert!(
        iii.verdict != Verdict::Yes || iv.is_some(),
        "condition III confirmed but IV fails"
    );

    Ok(ConditionReport {
        pd,
        pd_status,
        cond_i: ii.is_some(),
        cond_ii: ii.is_some(),
        cond_ii_signature: ii,
        cond_iii: iii,
        cond_iv: ConditionIV {
            verdict: iv.is_some(),
            signature: iv,
        },
    })
}
