//! Seeded random covariance families, each staying inside the hypothesis
//! class it is meant to exercise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::matrices::{
    conjugate_by_signature, definiteness, invert, CovMatrix, Definiteness, RatMatrix,
    SignatureMatrix,
};
use crate::moments::{ExponentVector, MixingMatrix};
use crate::numerics::Rational;

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p/q` with `p ∈ [0, max_num]`, `q ∈ [1, max_den]`, zero with probability
/// about `zero_prob`.
pub fn random_nonneg_rational(rng: &mut impl Rng, max_num: i64, max_den: i64, zero_prob: f64) -> Rational {
    if rng.random_bool(zero_prob) {
        return Rational::zero();
    }
    let p = rng.random_range(0..=max_num);
    let q = rng.random_range(1..=max_den);
    Rational::new(p, q).expect("positive denominator")
}

fn random_signed_rational(rng: &mut impl Rng, max_num: i64, max_den: i64) -> Rational {
    let p = rng.random_range(-max_num..=max_num);
    let q = rng.random_range(1..=max_den);
    Rational::new(p, q).expect("positive denominator")
}

pub fn random_signature(d: usize, rng: &mut impl Rng) -> SignatureMatrix {
    let signs = (0..d).map(|_| if rng.random_bool(0.5) { -1 } else { 1 }).collect();
    SignatureMatrix::new(signs).expect("±1 entries")
}

/// Square nonnegative rational matrix with small entries.
pub fn random_mixing_matrix(d: usize, rng: &mut impl Rng) -> MixingMatrix {
    let mut c = RatMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            c[(i, j)] = random_nonneg_rational(rng, 3, 4, 0.3);
        }
    }
    MixingMatrix::new(c).expect("nonnegative by construction")
}

/// Half-exponents of length `d` with `Σ nᵢ ≤ max_total`.
pub fn random_exponents(d: usize, max_total: u32, rng: &mut impl Rng) -> ExponentVector {
    let total = rng.random_range(0..=max_total);
    let mut n = vec![0u32; d];
    for _ in 0..total {
        n[rng.random_range(0..d)] += 1;
    }
    ExponentVector::new(n)
}

/// Covariance whose inverse is `s I − B` with `B ≥ 0` symmetric and
/// `s` above every row sum of `B`, so the inverse is a diagonally dominant
/// M-matrix: positive definite with nonpositive off-diagonal entries.
pub fn generate_m_matrix_family(d: usize, seed: u64) -> CovMatrix {
    let mut rng = rng_for(seed);
    let mut b = RatMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..i {
            let v = random_nonneg_rational(&mut rng, 3, 4, 0.3);
            b[(i, j)] = v.clone();
            b[(j, i)] = v;
        }
    }
    let max_row: Rational = (0..d)
        .map(|i| b.row(i).iter().cloned().sum::<Rational>())
        .max()
        .unwrap_or_else(Rational::zero);
    let bump = Rational::new(rng.random_range(1..=4), 4).expect("positive denominator");
    let s = max_row + bump;
    let mut precision = RatMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            precision[(i, j)] = if i == j { &s - &b[(i, j)] } else { -&b[(i, j)] };
        }
    }
    let precision = CovMatrix::new(precision).expect("symmetric by construction");
    invert(&precision).expect("diagonally dominant matrices are nonsingular")
}

/// `C Cᵀ` for random nonnegative `C`, plus the identity when `C Cᵀ` is
/// singular (which stays completely positive: `[C I][C I]ᵀ`).
pub fn generate_cp_family(d: usize, seed: u64) -> CovMatrix {
    let mut rng = rng_for(seed);
    let sigma = random_mixing_matrix(d, &mut rng).covariance();
    if definiteness(&sigma) == Definiteness::PositiveDefinite {
        sigma
    } else {
        add_diagonal(&sigma, &Rational::one())
    }
}

/// `A Aᵀ + δ I` with `A ≥ 0`: entrywise nonnegative and positive definite.
pub fn generate_nonneg_family(d: usize, seed: u64) -> CovMatrix {
    let mut rng = rng_for(seed);
    let a = random_mixing_matrix(d, &mut rng);
    let delta = Rational::new(1, rng.random_range(1..=8)).expect("positive denominator");
    add_diagonal(&a.covariance(), &delta)
}

/// `A Aᵀ + δ I` with `A` of arbitrary signs.
pub fn generate_signed_family(d: usize, seed: u64) -> CovMatrix {
    let mut rng = rng_for(seed);
    let mut a = RatMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = random_signed_rational(&mut rng, 3, 4);
        }
    }
    let delta = Rational::new(1, rng.random_range(1..=8)).expect("positive denominator");
    add_diagonal(&a.gram(), &delta)
}

fn add_diagonal(m: &CovMatrix, delta: &Rational) -> CovMatrix {
    let mut out = m.matrix().clone();
    for i in 0..m.dim() {
        out[(i, i)] = &out[(i, i)] + delta;
    }
    CovMatrix::new(out).expect("symmetric")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    MMatrix,
    CompletelyPositive,
    Nonnegative,
    Signed,
}

/// One of the four families, chosen by seed, with dimension in `2..=max_d`
/// and a random signature conjugation applied.
pub fn generate_mixed(max_d: usize, seed: u64) -> (Family, CovMatrix) {
    let mut rng = rng_for(seed ^ 0x9e37_79b9_7f4a_7c15);
    let d = rng.random_range(2..=max_d.max(2));
    let family = match seed % 4 {
        0 => Family::MMatrix,
        1 => Family::CompletelyPositive,
        2 => Family::Nonnegative,
        _ => Family::Signed,
    };
    let sigma = match family {
        Family::MMatrix => generate_m_matrix_family(d, seed),
        Family::CompletelyPositive => generate_cp_family(d, seed),
        Family::Nonnegative => generate_nonneg_family(d, seed),
        Family::Signed => generate_signed_family(d, seed),
    };
    let signature = random_signature(d, &mut rng);
    let sigma = conjugate_by_signature(&sigma, &signature).expect("matching dimension");
    (family, sigma)
}
