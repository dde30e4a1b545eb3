//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line; exits nonzero if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use gaussprod::analysis::{check_ineq7, enumerate_allocations};
use gaussprod::classify::generators::{generate_mixed, random_exponents, random_mixing_matrix, rng_for};
use gaussprod::classify::{
    check_condition_ii, classify, generate_m_matrix_family, CpCertificate, HeuristicOptions, Verdict,
};
use gaussprod::cli::{self, sweep_gratio, sweep_ineq7, sweep_lemma_a1, Grid, MatrixSource, SweepSummary};
use gaussprod::gpi::check_expansion_chain;
use gaussprod::matrices::{all_signatures, cholesky_signs, conjugate_by_signature, cyclic_product_3, invert, signature_classes};
use gaussprod::moments::{monte_carlo_moment, wick_moment, ExponentVector, MixingMatrix};
use gaussprod::{CovMatrix, RatMatrix, Rational, SignatureMatrix};

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

/// Inverse of a 3×3 matrix by cofactors.
fn adjugate_inverse(m: &CovMatrix) -> [[Rational; 3]; 3] {
    let a = |i: usize, j: usize| m.get(i, j).clone();
    let cof = |i: usize, j: usize| {
        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
        a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0)
    };
    let det = a(0, 0) * cof(0, 0) + a(0, 1) * cof(0, 1) + a(0, 2) * cof(0, 2);
    std::array::from_fn(|i| std::array::from_fn(|j| cof(j, i) / &det))
}

fn criterion_1() -> Outcome {
    let report_out = cli::cmd_classify(&MatrixSource::fixture("paper_3x3"), &HeuristicOptions::default(), true).unwrap();
    let report: serde_json::Value = serde_json::from_str(&report_out.stdout).unwrap();
    let sigma = cli::paper_3x3();
    let inv = adjugate_inverse(&sigma);
    let classes_failing = signature_classes(3)
        .unwrap()
        .filter(|d| {
            let s = d.signs();
            (0..3).any(|i| (0..3).any(|j| i != j && (&inv[i][j] * Rational::from_integer(i64::from(s[i] * s[j]))).is_positive()))
        })
        .count();
    let cert = cli::paper_3x3_certificate();
    let residual_zero = cert.c.gram() == sigma;
    let c_expected = RatMatrix::from_strs(&[&["1", "1/2", "1/2"], &["1/2", "1", "1/4"], &["1/2", "1/4", "1"]]);
    let cert_json_matches = report["III"]["certificate"]["C"] == serde_json::to_value(&c_expected).unwrap();
    let pass = report["II"] == false
        && report["I"] == false
        && classes_failing == 4
        && report["III"]["verdict"] == "yes"
        && report["III"]["exact"] == true
        && cert_json_matches
        && residual_zero
        && report["IV"]["verdict"] == true;
    outcome(
        pass,
        format!(
            "II={} (classes failing {classes_failing}/4), III={} exact={}, CCᵀ=Σ {residual_zero}, IV={}",
            report["II"], report["III"]["verdict"], report["III"]["exact"], report["IV"]["verdict"]
        ),
    )
}

fn criterion_2() -> Outcome {
    let sigma = cli::paper_3x3();
    let inv = invert(&sigma).unwrap();
    let oracle = adjugate_inverse(&sigma);
    let oracle_product = &oracle[0][1] * &oracle[1][2] * &oracle[2][0];
    let base = cyclic_product_3(&inv).unwrap();
    let all_equal = all_signatures(3)
        .unwrap()
        .iter()
        .all(|d| cyclic_product_3(&conjugate_by_signature(&inv, d).unwrap()).unwrap() == base);
    outcome(
        base.is_positive() && base == oracle_product && all_equal,
        format!("cyclic product {base} (oracle {oracle_product}), equal under all 8 signatures: {all_equal}"),
    )
}

fn criterion_3() -> Outcome {
    let report = classify(&cli::paper_5x5(&cli::default_epsilon()).unwrap(), None, &HeuristicOptions::default()).unwrap();
    let iii = &report.cond_iii;
    let exact_yes = iii.verdict == Verdict::Yes && iii.exact;
    let pass = report.pd
        && report.cond_iv.verdict
        && report.cond_iv.signature == Some(SignatureMatrix::identity(5))
        && matches!(iii.verdict, Verdict::Unknown | Verdict::No)
        && !exact_yes;
    outcome(
        pass,
        format!("PD={}, IV={} D=identity, III={:?} ({})", report.pd, report.cond_iv.verdict, iii.verdict, iii.route),
    )
}

/// `E ∏ᵢ (Σⱼ cᵢⱼ Zⱼ)^{2nᵢ}` by expanding the polynomial in `Z` and
/// applying `E Zʲ = (j−1)!!` for even `j`.
fn moment_by_polynomial_expansion(c: &MixingMatrix, n: &ExponentVector) -> Rational {
    let d = c.dim();
    let mut poly: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
    poly.insert(vec![0; d], Rational::one());
    for (i, &ni) in n.as_slice().iter().enumerate() {
        for _ in 0..2 * ni {
            let mut next: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
            for (mono, coef) in &poly {
                for j in 0..d {
                    let cij = c.get(i, j);
                    if cij.is_zero() {
                        continue;
                    }
                    let mut m = mono.clone();
                    m[j] += 1;
                    let e = next.entry(m).or_insert_with(Rational::zero);
                    *e += coef * cij;
                }
            }
            poly = next;
        }
    }
    let odd_double_factorial = |k: u32| (1..k).step_by(2).fold(Rational::one(), |acc, x| acc * Rational::from_integer(i64::from(x)));
    poly.into_iter()
        .filter(|(m, _)| m.iter().all(|e| e % 2 == 0))
        .map(|(m, coef)| m.iter().fold(coef, |acc, &e| acc * odd_double_factorial(e)))
        .sum()
}

fn criterion_4() -> Outcome {
    let mut rng = rng_for(4);
    let (mut violations, mut oracle_mismatches, mut allocations) = (0, 0, 0);
    for _ in 0..200 {
        use rand::Rng;
        let d = rng.random_range(1..=4);
        let c = random_mixing_matrix(d, &mut rng);
        let n = random_exponents(d, 8, &mut rng);
        let report = check_expansion_chain(&c, &n).unwrap();
        allocations += report.allocations_checked;
        if !report.holds() {
            violations += 1;
        }
        if moment_by_polynomial_expansion(&c, &n) != report.wick {
            oracle_mismatches += 1;
        }
    }
    outcome(
        violations == 0 && oracle_mismatches == 0,
        format!("200 cases, {allocations} allocations, {violations} chain violations, {oracle_mismatches} wick/expansion mismatches"),
    )
}

fn factorial_u128(n: u32) -> u128 {
    (1..=u128::from(n)).product()
}

/// All `d`-part compositions of `total`, in any order.
fn compositions(total: u32, d: usize) -> Vec<Vec<u32>> {
    if d == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, d - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let summary = sweep_ineq7(3, 3).unwrap();
    // Independent enumeration and u128 factorial arithmetic.
    let mut oracle_total = 0usize;
    let mut oracle_bad = 0usize;
    let mut disagreements = 0usize;
    for n0 in 0..=3 {
        for n1 in 0..=3 {
            for n2 in 0..=3 {
                let n = [n0, n1, n2];
                let rows: Vec<Vec<Vec<u32>>> = n.iter().map(|&ni| compositions(ni, 3)).collect();
                let mut listed = 0usize;
                for a in &rows[0] {
                    for b in &rows[1] {
                        for c in &rows[2] {
                            listed += 1;
                            let (mut lhs, mut rhs) = (1u128, 1u128);
                            for j in 0..3 {
                                let col = [a[j], b[j], c[j]];
                                let total: u32 = col.iter().sum();
                                lhs *= factorial_u128(2 * total) / col.iter().map(|&x| factorial_u128(2 * x)).product::<u128>();
                                rhs *= factorial_u128(total) / col.iter().map(|&x| factorial_u128(x)).product::<u128>();
                            }
                            let single = (0..3).all(|j| [a[j], b[j], c[j]].iter().filter(|&&x| x > 0).count() <= 1);
                            if lhs < rhs || (lhs == rhs) != single {
                                oracle_bad += 1;
                            }
                            let lib = check_ineq7(&gaussprod::analysis::AllocationMatrix::new(vec![a.clone(), b.clone(), c.clone()]).unwrap());
                            if lib.lhs != Rational::from_integer(lhs as i64) || lib.rhs != Rational::from_integer(rhs as i64) {
                                disagreements += 1;
                            }
                        }
                    }
                }
                if listed != enumerate_allocations(&n, 3).count() {
                    disagreements += 1;
                }
                oracle_total += listed;
            }
        }
    }
    let pass = summary.violations() == 0
        && summary.max_allocations_per_tuple == 1000
        && summary.allocations == oracle_total
        && oracle_bad == 0
        && disagreements == 0;
    outcome(
        pass,
        format!(
            "{} tuples, {} allocations (max {} per tuple), {} violations, {} equality mismatches, oracle disagreements {disagreements}",
            summary.tuples, summary.allocations, summary.max_allocations_per_tuple, summary.violations, summary.equality_mismatches
        ),
    )
}

fn criterion_6() -> Outcome {
    let grid: Grid = "0:10:0.1".parse().unwrap();
    let s = sweep_gratio(&grid, 100, 6).unwrap();
    outcome(
        s.violations() == 0 && s.specs == 100 && s.grid_points == 101,
        format!(
            "100 specs: |first log-derivative at 0| ≤ {:.1e}, min second derivative {:.1e}, max drop {:.1e}, max integer-point rel. error {:.1e} over {} points",
            s.max_abs_first_derivative_at_zero_float,
            s.min_second_derivative_float,
            s.max_monotone_drop_float,
            s.max_integer_relative_error_float,
            s.integer_points_checked
        ),
    )
}

fn criterion_7() -> Outcome {
    let s = sweep_lemma_a1(10_000, 7).unwrap();
    outcome(
        s.violations() == 0 && s.min_margin_float > 0.0,
        format!(
            "10000 samples, {} violations, min margin {:.3e}, braces consistency max error {:.1e}",
            s.violations, s.min_margin_float, s.max_consistency_error_float
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut negative = 0;
    let mut not_ii = 0;
    for seed in 0..500u64 {
        let d = 1 + (seed % 6) as usize;
        let sigma = generate_m_matrix_family(d, seed);
        if cholesky_signs(&sigma).unwrap().has_negative() {
            negative += 1;
        }
        if check_condition_ii(&sigma).unwrap() != Some(SignatureMatrix::identity(d)) {
            not_ii += 1;
        }
    }
    outcome(
        negative == 0 && not_ii == 0,
        format!("500 covariances (d ≤ 6): {negative} with a negative Cholesky entry, {not_ii} failing II at D = identity"),
    )
}

fn criterion_9() -> Outcome {
    let sigma = cli::paper_3x3();
    let n = ExponentVector::new(vec![1, 1, 1]);
    let exact = wick_moment(&sigma, &n).unwrap();
    let est = monte_carlo_moment(&sigma, &n, 1_000_000, 9).unwrap();
    let z = (est.mean - exact.to_f64()) / est.std_error;
    outcome(
        exact == r("9477/512") && z.abs() <= 5.0,
        format!("exact {exact}, mean {:.4} ± {:.4}, z = {z:.2}", est.mean, est.std_error),
    )
}

fn criterion_10() -> Outcome {
    let opts = HeuristicOptions::default();
    let (mut ii_not_iii, mut iii_not_iv, mut i_ne_ii, mut bad_cert) = (0, 0, 0, 0);
    let mut counts = [0usize; 3];
    for seed in 0..1000u64 {
        let (_, sigma) = generate_mixed(5, seed);
        let report = classify(&sigma, None, &opts).unwrap();
        if report.cond_ii && report.cond_iii.verdict != Verdict::Yes {
            ii_not_iii += 1;
        }
        if report.cond_iii.verdict == Verdict::Yes && !report.cond_iv.verdict {
            iii_not_iv += 1;
        }
        if report.cond_i != report.cond_ii {
            i_ne_ii += 1;
        }
        if let Some(CpCertificate::Cholesky { signature, l, pivots }) = &report.cond_iii.certificate {
            let f = gaussprod::matrices::LdlFactorization { l: l.clone(), pivots: pivots.clone() };
            if f.reconstruct() != conjugate_by_signature(&sigma, signature).unwrap() || !l.is_nonnegative() {
                bad_cert += 1;
            }
        }
        counts[report.cond_iii.verdict as usize] += 1;
    }
    let violations = ii_not_iii + iii_not_iv + i_ne_ii + bad_cert;
    outcome(
        violations == 0,
        format!(
            "1000 matrices: III yes/no/unknown = {}/{}/{}; II⇏III {ii_not_iii}, III⇏IV {iii_not_iv}, I≠II {i_ne_ii}, bad certificates {bad_cert}",
            counts[0], counts[1], counts[2]
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("3×3 fixture classification", criterion_1, Duration::from_secs(1)),
        ("cyclic product of the inverse", criterion_2, Duration::from_secs(1)),
        ("5×5 fixture, ε = 1/10", criterion_3, Duration::from_secs(30)),
        ("expansion chain, 200 random cases", criterion_4, Duration::from_secs(60)),
        ("factorial inequality, exhaustive d = 3", criterion_5, Duration::from_secs(30)),
        ("gamma-ratio structure", criterion_6, Duration::from_secs(10)),
        ("reciprocal-power inequality, 10⁴ samples", criterion_7, Duration::from_secs(5)),
        ("M-matrix Cholesky signs, 500 cases", criterion_8, Duration::from_secs(30)),
        ("Monte Carlo cross-check, 10⁶ draws", criterion_9, Duration::from_secs(60)),
        ("implication chain, 1000 mixed matrices", criterion_10, Duration::from_secs(60)),
    ];
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run);
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= *limit, o.detail),
            Err(_) => (false, "panicked".to_string()),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {:>2}: {name} [{:.2}s / {}s] {detail}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
