//! Command-line front end: embedded fixtures, matrix file loading, the
//! `classify`, `gpi`, `moment` and `sweeps` commands, and report rendering.
//!
//! Every command returns its full output and exit code instead of printing,
//! so the binary stays a thin wrapper and tests can call commands directly.
//! Exact values are serialized as rational strings; floats only appear in
//! fields whose name ends in `_float`.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;
use serde_json::Value;

use crate::analysis::{
    check_braces_nonneg, check_ineq7, check_lemma_a1, enumerate_allocations, gamma_ratio,
    gamma_ratio_log_derivatives, ln_gamma_ratio, GammaRatioSpec,
};
use crate::classify::generators::{random_exponents, random_mixing_matrix, rng_for};
use crate::classify::{classify, ConditionReport, HeuristicOptions, UserCertificate, Verdict};
use crate::error::{Error, Result};
use crate::gpi::{check_expansion_chain, check_gpi_product, check_gpi_split, GpiVerdict};
use crate::matrices::{CovMatrix, RatMatrix, SignatureMatrix};
use crate::moments::{marginal_moment_product, monte_carlo_moment, wick_moment, ExponentVector};
use crate::numerics::{multinomial, Rational};
use crate::tolerance::TOLERANCES;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Largest dimension and per-row exponent for the exhaustive factorial sweep.
pub const INEQ7_MAX_DIM: usize = 3;
pub const INEQ7_MAX_N: u32 = 4;

/// Default perturbation of the 5×5 fixture. Any small positive value keeps
/// the matrix positive definite and entrywise nonnegative. At 1/10 the
/// comparison matrix of this cycle-supported matrix has negative
/// determinant, so it is not completely positive either.
pub fn default_epsilon() -> Rational {
    Rational::new(1, 10).expect("nonzero denominator")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fixture {
    pub name: String,
    pub description: String,
    pub matrix: CovMatrix,
    pub certificate: Option<UserCertificate>,
}

impl Fixture {
    fn new(name: &str, description: &str, matrix: CovMatrix) -> Self {
        Fixture {
            name: name.to_string(),
            description: description.to_string(),
            matrix,
            certificate: None,
        }
    }

    /// Matrix file form: `{"d", "entries"}` plus `"certificate"` when present.
    pub fn to_json(&self) -> Value {
        let mut v = self.matrix.to_json();
        if let Some(cert) = &self.certificate {
            v["certificate"] = serde_json::to_value(cert).expect("certificate serialization");
        }
        v
    }
}

pub fn paper_3x3() -> CovMatrix {
    CovMatrix::from_strs(&[
        &["3/2", "9/8", "9/8"],
        &["9/8", "21/16", "3/4"],
        &["9/8", "3/4", "21/16"],
    ])
}

pub fn paper_3x3_certificate() -> UserCertificate {
    UserCertificate {
        c: RatMatrix::from_strs(&[
            &["1", "1/2", "1/2"],
            &["1/2", "1", "1/4"],
            &["1/2", "1/4", "1"],
        ]),
        signature: SignatureMatrix::identity(3),
    }
}

/// The 5-cycle matrix with `3/4` on one edge, plus `ε I`.
pub fn paper_5x5(epsilon: &Rational) -> Result<CovMatrix> {
    if epsilon.is_negative() {
        return Err(Error::InvalidArgument(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    let base = CovMatrix::from_strs(&[
        &["1", "0", "0", "1/2", "1/2"],
        &["0", "1", "3/4", "0", "1/2"],
        &["0", "3/4", "1", "1/2", "0"],
        &["1/2", "0", "1/2", "1", "0"],
        &["1/2", "1/2", "0", "0", "1"],
    ]);
    let mut m = base.into_matrix();
    for i in 0..5 {
        m[(i, i)] = &m[(i, i)] + epsilon;
    }
    CovMatrix::new(m)
}

/// Named matrices resolvable with `--fixture`.
#[derive(Clone, Debug, PartialEq)]
pub struct FixtureSet {
    fixtures: BTreeMap<String, Fixture>,
}

impl FixtureSet {
    pub fn standard(epsilon: &Rational) -> Result<Self> {
        let mut with_cert = Fixture::new(
            "paper_3x3",
            "completely positive, inverse has a positive off-diagonal under every signature",
            paper_3x3(),
        );
        with_cert.certificate = Some(paper_3x3_certificate());
        let list = vec![
            with_cert,
            Fixture::new(
                "paper_5x5",
                &format!("5-cycle plus {epsilon}·I: doubly nonnegative, expected not completely positive"),
                paper_5x5(epsilon)?,
            ),
            Fixture::new("identity2", "2×2 identity", CovMatrix::identity(2)),
            Fixture::new("identity3", "3×3 identity", CovMatrix::identity(3)),
            Fixture::new("identity4", "4×4 identity", CovMatrix::identity(4)),
            Fixture::new(
                "m_matrix_2",
                "inverse [[2,-1],[-1,2]] has nonpositive off-diagonals",
                CovMatrix::from_strs(&[&["2/3", "1/3"], &["1/3", "2/3"]]),
            ),
            Fixture::new(
                "flip_2",
                "nonnegative after flipping the second coordinate",
                CovMatrix::from_strs(&[&["1", "-1/2"], &["-1/2", "1"]]),
            ),
            Fixture::new(
                "odd_cycle_3",
                "odd cycle of signs: no signature makes it nonnegative",
                CovMatrix::from_strs(&[
                    &["1", "1/4", "1/4"],
                    &["1/4", "1", "-1/4"],
                    &["1/4", "-1/4", "1"],
                ]),
            ),
        ];
        Ok(FixtureSet {
            fixtures: list.into_iter().map(|f| (f.name.clone(), f)).collect(),
        })
    }

    pub fn get(&self, name: &str) -> Result<&Fixture> {
        self.fixtures.get(name).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown fixture {name:?}; known: {}",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.fixtures.keys().map(String::as_str).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fixture> {
        self.fixtures.values()
    }
}

/// Parses a matrix file body, with an optional `"certificate"` object
/// holding `"C"` and `"signature"`.
pub fn parse_matrix_document(text: &str) -> Result<(CovMatrix, Option<UserCertificate>)> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let matrix = CovMatrix::from_json(&value)?;
    let certificate = match value.get("certificate") {
        None | Some(Value::Null) => None,
        Some(c) => Some(
            serde_json::from_value::<UserCertificate>(c.clone())
                .map_err(|e| Error::Parse(format!("certificate: {e}")))?,
        ),
    };
    Ok((matrix, certificate))
}

/// Where a command reads its matrix from.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixSource {
    Fixture { name: String, epsilon: Rational },
    File(std::path::PathBuf),
}

impl MatrixSource {
    pub fn fixture(name: &str) -> Self {
        MatrixSource::Fixture {
            name: name.to_string(),
            epsilon: default_epsilon(),
        }
    }

    pub fn load(&self) -> Result<(CovMatrix, Option<UserCertificate>)> {
        match self {
            MatrixSource::Fixture { name, epsilon } => {
                let set = FixtureSet::standard(epsilon)?;
                let f = set.get(name)?;
                Ok((f.matrix.clone(), f.certificate.clone()))
            }
            MatrixSource::File(path) => parse_matrix_document(&read_file(path)?),
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Rendered output of one command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmdOutput {
    pub stdout: String,
    pub code: i32,
}

fn render<T: Serialize>(value: &T, json: bool, code: i32) -> CmdOutput {
    let v = serde_json::to_value(value).expect("report serialization");
    let stdout = if json {
        serde_json::to_string_pretty(&v).expect("json rendering") + "\n"
    } else {
        render_text(&v)
    };
    CmdOutput { stdout, code }
}

fn render_text(v: &Value) -> String {
    let mut out = String::new();
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                let shown = match val {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                out.push_str(&format!("{k}: {shown}\n"));
            }
        }
        other => out.push_str(&format!("{other}\n")),
    }
    out
}

fn classify_text(r: &ConditionReport) -> String {
    let sig = |s: &Option<SignatureMatrix>| match s {
        Some(d) => format!(" D = {:?}", d.signs()),
        None => String::new(),
    };
    let verdict = match r.cond_iii.verdict {
        Verdict::Yes => "yes",
        Verdict::No => "no",
        Verdict::Unknown => "unknown",
    };
    let mut out = format!("pd: {} ({})\n", r.pd, serde_json::to_value(r.pd_status).unwrap().as_str().unwrap_or(""));
    out.push_str(&format!("I: {}\n", r.cond_i));
    out.push_str(&format!("II: {}{}\n", r.cond_ii, sig(&r.cond_ii_signature)));
    out.push_str(&format!(
        "III: {verdict} ({}; certificate {})\n",
        r.cond_iii.route,
        r.cond_iii.certificate_exactness.unwrap_or("none")
    ));
    out.push_str(&format!("IV: {}{}\n", r.cond_iv.verdict, sig(&r.cond_iv.signature)));
    out
}

/// Classifies the matrix, using its attached certificate if any. Exit 0
/// whatever the verdicts.
pub fn cmd_classify(source: &MatrixSource, opts: &HeuristicOptions, json: bool) -> Result<CmdOutput> {
    let (sigma, cert) = source.load()?;
    let report = classify(&sigma, cert.as_ref(), opts)?;
    if json {
        Ok(render(&report, true, EXIT_OK))
    } else {
        Ok(CmdOutput {
            stdout: classify_text(&report),
            code: EXIT_OK,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
struct GpiReport {
    mode: &'static str,
    n: Vec<u32>,
    split: Option<usize>,
    lhs: Rational,
    rhs: Rational,
    margin: Rational,
    holds: bool,
}

/// Product form, or split form with `split = Some(k)`. Exit 1 if the
/// inequality fails.
pub fn cmd_gpi(source: &MatrixSource, n: &ExponentVector, split: Option<usize>, json: bool) -> Result<CmdOutput> {
    let (sigma, _) = source.load()?;
    let v: GpiVerdict = match split {
        Some(k) => check_gpi_split(&sigma, n, k)?,
        None => check_gpi_product(&sigma, n)?,
    };
    let code = if v.holds { EXIT_OK } else { EXIT_VIOLATION };
    let report = GpiReport {
        mode: if split.is_some() { "split" } else { "product" },
        n: n.as_slice().to_vec(),
        split,
        lhs: v.lhs,
        rhs: v.rhs,
        margin: v.margin,
        holds: v.holds,
    };
    Ok(render(&report, json, code))
}

#[derive(Clone, Debug, Serialize)]
struct MomentReport {
    n: Vec<u32>,
    moment: Rational,
    moment_float: f64,
    marginal_product: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<MonteCarloReport>,
}

#[derive(Clone, Debug, Serialize)]
struct MonteCarloReport {
    draws: u64,
    seed: u64,
    mean_float: f64,
    std_error_float: f64,
    z_score_float: f64,
}

/// Exact `E(∏ Xᵢ^{2nᵢ})` and the marginal product, with an optional
/// seeded Monte Carlo estimate.
pub fn cmd_moment(
    source: &MatrixSource,
    n: &ExponentVector,
    samples: Option<u64>,
    seed: u64,
    json: bool,
) -> Result<CmdOutput> {
    let (sigma, _) = source.load()?;
    let moment = wick_moment(&sigma, n)?;
    let marginal_product = marginal_moment_product(&sigma, n)?;
    let monte_carlo = match samples {
        Some(draws) => {
            let est = monte_carlo_moment(&sigma, n, draws, seed)?;
            Some(MonteCarloReport {
                draws,
                seed,
                mean_float: est.mean,
                std_error_float: est.std_error,
                z_score_float: (est.mean - moment.to_f64()) / est.std_error,
            })
        }
        None => None,
    };
    let report = MomentReport {
        n: n.as_slice().to_vec(),
        moment_float: moment.to_f64(),
        moment,
        marginal_product,
        monte_carlo,
    };
    Ok(render(&report, json, EXIT_OK))
}

#[derive(Clone, Debug, Serialize)]
struct FixtureListing {
    name: String,
    d: usize,
    has_certificate: bool,
    description: String,
}

pub fn cmd_fixtures_list(epsilon: &Rational, json: bool) -> Result<CmdOutput> {
    let set = FixtureSet::standard(epsilon)?;
    let rows: Vec<FixtureListing> = set
        .iter()
        .map(|f| FixtureListing {
            name: f.name.clone(),
            d: f.matrix.dim(),
            has_certificate: f.certificate.is_some(),
            description: f.description.clone(),
        })
        .collect();
    if json {
        return Ok(render(&rows, true, EXIT_OK));
    }
    let stdout = rows
        .iter()
        .map(|r| format!("{}\t{}×{}\t{}\n", r.name, r.d, r.d, r.description))
        .collect();
    Ok(CmdOutput { stdout, code: EXIT_OK })
}

/// Matrix file for one fixture, always JSON.
pub fn cmd_fixtures_show(name: &str, epsilon: &Rational) -> Result<CmdOutput> {
    let set = FixtureSet::standard(epsilon)?;
    let f = set.get(name)?;
    Ok(CmdOutput {
        stdout: serde_json::to_string_pretty(&f.to_json()).expect("json rendering") + "\n",
        code: EXIT_OK,
    })
}

/// Summary shared by the sweeps: what was checked and how many failed.
pub trait SweepSummary: Serialize {
    fn violations(&self) -> usize;
}

fn sweep_output<S: SweepSummary>(s: &S, json: bool) -> CmdOutput {
    let code = if s.violations() == 0 { EXIT_OK } else { EXIT_VIOLATION };
    render(s, json, code)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ineq7Summary {
    pub d: usize,
    pub nmax: u32,
    pub tuples: usize,
    pub allocations: usize,
    pub max_allocations_per_tuple: usize,
    pub equality_cases: usize,
    pub violations: usize,
    /// Allocations where equality and single column support disagree.
    pub equality_mismatches: usize,
    /// Smallest `lhs/rhs` over allocations with a column of two or more
    /// nonzero entries.
    pub min_strict_ratio: Option<Rational>,
}

impl SweepSummary for Ineq7Summary {
    fn violations(&self) -> usize {
        self.violations + self.equality_mismatches
    }
}

/// Every exponent tuple in `{0..nmax}^d` and every `d × d` allocation.
pub fn sweep_ineq7(d: usize, nmax: u32) -> Result<Ineq7Summary> {
    if d == 0 || d > INEQ7_MAX_DIM || nmax > INEQ7_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "exhaustive sweep needs 1 ≤ d ≤ {INEQ7_MAX_DIM} and nmax ≤ {INEQ7_MAX_N}, got d = {d}, nmax = {nmax}"
        )));
    }
    let mut s = Ineq7Summary {
        d,
        nmax,
        tuples: 0,
        allocations: 0,
        max_allocations_per_tuple: 0,
        equality_cases: 0,
        violations: 0,
        equality_mismatches: 0,
        min_strict_ratio: None,
    };
    let mut n = vec![0u32; d];
    loop {
        s.tuples += 1;
        let mut count = 0;
        for alloc in enumerate_allocations(&n, d) {
            count += 1;
            let v = check_ineq7(&alloc);
            if !v.holds {
                s.violations += 1;
            }
            if v.equality {
                s.equality_cases += 1;
            }
            if v.equality != alloc.columns_singly_supported() {
                s.equality_mismatches += 1;
            }
            if !v.equality {
                let ratio = &v.lhs / &v.rhs;
                if s.min_strict_ratio.as_ref().is_none_or(|m| &ratio < m) {
                    s.min_strict_ratio = Some(ratio);
                }
            }
        }
        s.allocations += count;
        s.max_allocations_per_tuple = s.max_allocations_per_tuple.max(count);
        // Odometer over {0..nmax}^d.
        let mut i = d;
        loop {
            if i == 0 {
                return Ok(s);
            }
            i -= 1;
            if n[i] < nmax {
                n[i] += 1;
                break;
            }
            n[i] = 0;
        }
    }
}

pub fn cmd_sweep_ineq7(d: usize, nmax: u32, json: bool) -> Result<CmdOutput> {
    Ok(sweep_output(&sweep_ineq7(d, nmax)?, json))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaSummary {
    pub samples: usize,
    pub seed: u64,
    pub violations: usize,
    pub min_margin_float: f64,
    /// Smallest margin relative to the left side.
    pub min_relative_margin_float: f64,
    pub consistency_failures: usize,
    /// Largest `|braces − margin| / max(1, lhs)`.
    pub max_consistency_error_float: f64,
}

impl SweepSummary for LemmaSummary {
    fn violations(&self) -> usize {
        self.violations + self.consistency_failures
    }
}

fn random_simplex(k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x: f64| x / total).collect()
}

/// Splits `total` into `k ≥ 1` positive integer parts.
fn random_positive_parts(total: u32, k: usize, rng: &mut impl Rng) -> Vec<u32> {
    let mut parts = vec![1u32; k];
    for _ in k as u32..total {
        parts[rng.random_range(0..k)] += 1;
    }
    parts
}

/// Samples `y ∈ (1, 100)` and simplex vectors of dimension 2 to 6 and
/// checks the strict inequality. Each sample also draws integer parts
/// `ℓ` with `L ≤ 12` and compares the braces at `s = L ln y` with the
/// lemma margin at `u = ℓ/L`.
pub fn sweep_lemma_a1(samples: usize, seed: u64) -> Result<LemmaSummary> {
    let mut rng = rng_for(seed);
    let mut s = LemmaSummary {
        samples,
        seed,
        violations: 0,
        min_margin_float: f64::INFINITY,
        min_relative_margin_float: f64::INFINITY,
        consistency_failures: 0,
        max_consistency_error_float: 0.0,
    };
    for _ in 0..samples {
        let y = loop {
            let y = 1.0 + 99.0 * rng.random::<f64>();
            if y > 1.0 {
                break y;
            }
        };
        let k = rng.random_range(2..=6);
        let u = random_simplex(k, &mut rng);
        let v = check_lemma_a1(y, &u, true)?;
        if !(v.holds && v.margin > 0.0) {
            s.violations += 1;
        }
        s.min_margin_float = s.min_margin_float.min(v.margin);
        s.min_relative_margin_float = s.min_relative_margin_float.min(v.margin / v.lhs);

        let total = rng.random_range(k as u32..=12);
        let parts = random_positive_parts(total, k, &mut rng);
        let braces = check_braces_nonneg(total, &parts, f64::from(total) * y.ln())?;
        let u_int: Vec<f64> = parts.iter().map(|&p| f64::from(p) / f64::from(total)).collect();
        let w = check_lemma_a1(y, &u_int, true)?;
        let err = (braces.value - w.margin).abs() / w.lhs.max(1.0);
        s.max_consistency_error_float = s.max_consistency_error_float.max(err);
        if err > TOLERANCES.braces_vs_lemma {
            s.consistency_failures += 1;
        }
    }
    Ok(s)
}

pub fn cmd_sweep_lemma_a1(samples: usize, seed: u64, json: bool) -> Result<CmdOutput> {
    Ok(sweep_output(&sweep_lemma_a1(samples, seed)?, json))
}

/// Evenly spaced grid `A, A + STEP, …, B`. Serialized as `"A:B:STEP"`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.end - self.start) / self.step).round() as usize;
        (0..=count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.step)
    }
}

impl Serialize for Grid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl std::str::FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Parse(format!("grid must be A:B:STEP with 0 ≤ A ≤ B and STEP > 0, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let (start, end, step) = (nums[0], nums[1], nums[2]);
        if !(start >= 0.0 && end >= start && step > 0.0 && end.is_finite()) {
            return Err(bad());
        }
        Ok(Grid { start, end, step })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaSummary {
    pub specs: usize,
    pub seed: u64,
    pub grid: Grid,
    pub grid_points: usize,
    pub max_abs_first_derivative_at_zero_float: f64,
    pub min_second_derivative_float: f64,
    /// Largest decrease of `ln g` between consecutive grid points.
    pub max_monotone_drop_float: f64,
    pub integer_points_checked: usize,
    pub max_integer_relative_error_float: f64,
    pub first_derivative_failures: usize,
    pub second_derivative_failures: usize,
    pub monotone_failures: usize,
    pub integer_point_failures: usize,
}

impl SweepSummary for GammaSummary {
    fn violations(&self) -> usize {
        self.first_derivative_failures
            + self.second_derivative_failures
            + self.monotone_failures
            + self.integer_point_failures
    }
}

/// Random column spec with `1 ≤ L ≤ max_total` and 1 to 5 parts (zeros
/// allowed).
pub fn random_gamma_spec(max_total: u32, rng: &mut impl Rng) -> GammaRatioSpec {
    let total = rng.random_range(1..=max_total);
    let k = rng.random_range(1..=5usize);
    let mut parts = vec![0u32; k];
    for _ in 0..total {
        parts[rng.random_range(0..k)] += 1;
    }
    GammaRatioSpec::new(total, parts).expect("parts sum to total")
}

/// Checks the shape of `a ↦ g(a)` for `specs` random column specs:
/// zero slope at 0, convex logarithm on the grid, nondecreasing on the
/// grid, and exact multinomials at integer grid points.
pub fn sweep_gratio(grid: &Grid, specs: usize, seed: u64) -> Result<GammaSummary> {
    let mut rng = rng_for(seed);
    let points = grid.points();
    let mut s = GammaSummary {
        specs,
        seed,
        grid: grid.clone(),
        grid_points: points.len(),
        max_abs_first_derivative_at_zero_float: 0.0,
        min_second_derivative_float: f64::INFINITY,
        max_monotone_drop_float: 0.0,
        integer_points_checked: 0,
        max_integer_relative_error_float: 0.0,
        first_derivative_failures: 0,
        second_derivative_failures: 0,
        monotone_failures: 0,
        integer_point_failures: 0,
    };
    for _ in 0..specs {
        let spec = random_gamma_spec(12, &mut rng);
        let (first, _) = gamma_ratio_log_derivatives(&spec, 0.0)?;
        s.max_abs_first_derivative_at_zero_float = s.max_abs_first_derivative_at_zero_float.max(first.abs());
        if first.abs() > TOLERANCES.first_derivative_at_zero {
            s.first_derivative_failures += 1;
        }
        let mut prev: Option<f64> = None;
        for &a in &points {
            let (_, second) = gamma_ratio_log_derivatives(&spec, a)?;
            s.min_second_derivative_float = s.min_second_derivative_float.min(second);
            if second < -TOLERANCES.second_derivative {
                s.second_derivative_failures += 1;
            }
            let ln_g = ln_gamma_ratio(&spec, a)?;
            if let Some(p) = prev {
                let drop = p - ln_g;
                s.max_monotone_drop_float = s.max_monotone_drop_float.max(drop);
                if drop > TOLERANCES.monotone {
                    s.monotone_failures += 1;
                }
            }
            prev = Some(ln_g);
            if a == a.round() {
                let m = a as u64;
                let scaled: Vec<u64> = spec.parts().iter().map(|&p| m * u64::from(p)).collect();
                let exact = Rational::from_nat(multinomial(m * u64::from(spec.total()), &scaled)?).to_f64();
                let rel = (gamma_ratio(&spec, a)? - exact).abs() / exact;
                s.integer_points_checked += 1;
                s.max_integer_relative_error_float = s.max_integer_relative_error_float.max(rel);
                if rel > TOLERANCES.integer_point_relative {
                    s.integer_point_failures += 1;
                }
            }
        }
    }
    Ok(s)
}

pub fn cmd_sweep_gratio(grid: &Grid, specs: usize, seed: u64, json: bool) -> Result<CmdOutput> {
    Ok(sweep_output(&sweep_gratio(grid, specs, seed)?, json))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainSummary {
    pub samples: usize,
    pub seed: u64,
    pub max_d: usize,
    pub max_total: u32,
    pub allocations_checked: usize,
    pub wick_below_lower_bound: usize,
    pub lower_bound_below_rhs: usize,
    pub rhs_not_marginal: usize,
    pub allocation_failures: usize,
    /// Smallest `wick − marginal product` seen.
    pub min_margin: Option<Rational>,
}

impl SweepSummary for ChainSummary {
    fn violations(&self) -> usize {
        self.wick_below_lower_bound + self.lower_bound_below_rhs + self.rhs_not_marginal + self.allocation_failures
    }
}

/// Random nonnegative mixing matrices with `d ≤ max_d` and exponents with
/// `Σ nᵢ ≤ max_total`, each checked through the full expansion chain.
pub fn sweep_chain(samples: usize, seed: u64, max_d: usize, max_total: u32) -> Result<ChainSummary> {
    if max_d == 0 {
        return Err(Error::InvalidArgument("max dimension must be at least 1".into()));
    }
    let mut rng = rng_for(seed);
    let mut s = ChainSummary {
        samples,
        seed,
        max_d,
        max_total,
        allocations_checked: 0,
        wick_below_lower_bound: 0,
        lower_bound_below_rhs: 0,
        rhs_not_marginal: 0,
        allocation_failures: 0,
        min_margin: None,
    };
    for _ in 0..samples {
        let d = rng.random_range(1..=max_d);
        let c = random_mixing_matrix(d, &mut rng);
        let n = random_exponents(d, max_total, &mut rng);
        let r = check_expansion_chain(&c, &n)?;
        s.allocations_checked += r.allocations_checked;
        s.wick_below_lower_bound += usize::from(!r.wick_ge_lower);
        s.lower_bound_below_rhs += usize::from(!r.lower_ge_rhs);
        s.rhs_not_marginal += usize::from(!r.rhs_eq_marginal);
        s.allocation_failures += r.failing.len();
        let margin = &r.wick - &r.marginal_product;
        if s.min_margin.as_ref().is_none_or(|m| &margin < m) {
            s.min_margin = Some(margin);
        }
    }
    Ok(s)
}

pub fn cmd_sweep_chain(samples: usize, seed: u64, max_d: usize, max_total: u32, json: bool) -> Result<CmdOutput> {
    Ok(sweep_output(&sweep_chain(samples, seed, max_d, max_total)?, json))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_round_trip_through_json() {
        let set = FixtureSet::standard(&default_epsilon()).unwrap();
        for f in set.iter() {
            let text = serde_json::to_string(&f.to_json()).unwrap();
            let (m, cert) = parse_matrix_document(&text).unwrap();
            assert_eq!(m, f.matrix, "{}", f.name);
            assert_eq!(cert, f.certificate, "{}", f.name);
        }
    }

    #[test]
    fn paper_5x5_epsilon() {
        let m = paper_5x5(&default_epsilon()).unwrap();
        assert_eq!(m.get(0, 0), &"11/10".parse::<Rational>().unwrap());
        assert_eq!(m.get(1, 2), &"3/4".parse::<Rational>().unwrap());
        assert!(paper_5x5(&Rational::new(-1, 2).unwrap()).is_err());
    }

    #[test]
    fn certificate_reconstructs_fixture() {
        let cert = paper_3x3_certificate();
        assert_eq!(cert.c.gram(), paper_3x3());
    }

    #[test]
    fn classify_fixture_outputs() {
        let out = cmd_classify(&MatrixSource::fixture("paper_3x3"), &HeuristicOptions::default(), true).unwrap();
        assert_eq!(out.code, EXIT_OK);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["II"], false);
        assert_eq!(v["III"]["verdict"], "yes");
        assert_eq!(v["III"]["exact"], true);
        let text = cmd_classify(&MatrixSource::fixture("paper_3x3"), &HeuristicOptions::default(), false).unwrap();
        assert!(text.stdout.contains("III: yes"));
    }

    #[test]
    fn gpi_outputs() {
        let n = ExponentVector::new(vec![1, 1, 1]);
        let out = cmd_gpi(&MatrixSource::fixture("paper_3x3"), &n, None, true).unwrap();
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["lhs"], "9477/512");
        assert_eq!(v["holds"], true);
        let n = ExponentVector::new(vec![2, 2, 2]);
        let out = cmd_gpi(&MatrixSource::fixture("identity3"), &n, None, true).unwrap();
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["margin"], "0");
        let n = ExponentVector::new(vec![1, 1]);
        let a = cmd_gpi(&MatrixSource::fixture("m_matrix_2"), &n, Some(1), true).unwrap();
        let b = cmd_gpi(&MatrixSource::fixture("m_matrix_2"), &n, None, true).unwrap();
        let (a, b): (Value, Value) = (serde_json::from_str(&a.stdout).unwrap(), serde_json::from_str(&b.stdout).unwrap());
        assert_eq!((&a["lhs"], &a["rhs"]), (&b["lhs"], &b["rhs"]));
    }

    #[test]
    fn grid_parsing() {
        let g: Grid = "0:10:0.1".parse().unwrap();
        let p = g.points();
        assert_eq!(p.len(), 101);
        assert_eq!(p[0], 0.0);
        assert!((p[100] - 10.0).abs() < 1e-12);
        assert!("1:0:0.1".parse::<Grid>().is_err());
        assert!("0:1".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
        assert_eq!(serde_json::to_value(&g).unwrap(), "0:10:0.1");
    }

    #[test]
    fn small_sweeps_are_clean_and_deterministic() {
        let a = sweep_ineq7(2, 2).unwrap();
        assert_eq!(a.tuples, 9);
        assert_eq!(a.violations(), 0);
        assert!(sweep_ineq7(4, 1).is_err());
        assert_eq!(sweep_lemma_a1(200, 3).unwrap(), sweep_lemma_a1(200, 3).unwrap());
        assert_eq!(sweep_lemma_a1(200, 3).unwrap().violations(), 0);
        let g: Grid = "0:3:0.5".parse().unwrap();
        assert_eq!(sweep_gratio(&g, 10, 1).unwrap().violations(), 0);
        assert_eq!(sweep_chain(20, 2, 3, 4).unwrap().violations(), 0);
    }
}
