//! Float search for a nonnegative factor `A ≈ C Cᵀ`, `C ≥ 0`.
//!
//! Alternating projections between the nonnegative orthant and the set
//! `{B Q : Q orthogonal}` of all exact factors of `A`, where `B` is any
//! fixed factor (here the float Cholesky factor padded with zero columns).
//! The orthogonal step is the polar factor of `Bᵀ P`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrices::{cholesky_f64, CovMatrix, RatMatrix};
use crate::numerics::Rational;

/// Iterations between residual checks.
const CHECK_EVERY: usize = 10;
/// Iterations per random restart.
const RESTART_EVERY: usize = 1000;

#[derive(Clone, Debug)]
pub struct FloatFactor {
    /// `d × r` nonnegative factor.
    pub c: Vec<Vec<f64>>,
    /// Exact max-abs entry of `A − C Cᵀ`, with `C` read as exact rationals.
    pub residual: Rational,
    pub iterations: usize,
}

impl FloatFactor {
    pub fn residual_f64(&self) -> f64 {
        self.residual.to_f64()
    }
}

/// Number of factor columns tried for dimension `d`: `d` up to 4 (where the
/// cp-rank never exceeds `d`), and the known cp-rank bound
/// `d(d+1)/2 − 4` from dimension 5 on.
pub fn default_rank(d: usize) -> usize {
    if d <= 4 {
        d
    } else {
        d * (d + 1) / 2 - 4
    }
}

fn random_orthogonal(r: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(r, r, |_, _| StandardNormal.sample(rng));
    g.qr().q()
}

fn polar(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let svd = m.clone().svd(true, true);
    Some(svd.u? * svd.v_t?)
}

fn clip(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.map(|x| x.max(0.0))
}

fn float_residual(a: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    (a - p * p.transpose()).amax()
}

/// Exact `max |A − C Cᵀ|` for a float factor.
pub fn exact_residual(a: &CovMatrix, c: &[Vec<f64>]) -> Rational {
    let rows = c
        .iter()
        .map(|row| {
            row.iter()
                .map(|&x| Rational::from_f64(x).unwrap_or_else(Rational::zero))
                .collect()
        })
        .collect();
    let c = RatMatrix::from_rows(rows).expect("rectangular factor");
    let gram = c.gram();
    let mut worst = Rational::zero();
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let diff = (a.get(i, j) - gram.get(i, j)).abs();
            if diff > worst {
                worst = diff;
            }
        }
    }
    worst
}

/// Searches for `C ≥ 0` with `max |A − C Cᵀ| < tol`, spending at most
/// `budget` iterations across seeded restarts. Returns `None` if no factor
/// meets the tolerance.
pub fn nonnegative_factor(
    a: &CovMatrix,
    rank: usize,
    budget: usize,
    seed: u64,
    tol: f64,
) -> Option<FloatFactor> {
    let d = a.dim();
    let rank = rank.max(d);
    let chol = cholesky_f64(a).ok()?;
    let b = DMatrix::from_fn(d, rank, |i, j| if j < d { chol[i][j] } else { 0.0 });
    let target = DMatrix::from_fn(d, d, |i, j| a.get(i, j).to_f64());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut spent = 0;
    while spent < budget {
        // The first attempt starts from the Cholesky factor itself.
        let mut q = if spent == 0 {
            DMatrix::identity(rank, rank)
        } else {
            random_orthogonal(rank, &mut rng)
        };
        let stop = (spent + RESTART_EVERY).min(budget);
        while spent < stop {
            let p = clip(&(&b * &q));
            spent += 1;
            let check = spent % CHECK_EVERY == 0 || spent == stop;
            if check && float_residual(&target, &p) < tol {
                let c: Vec<Vec<f64>> = (0..d)
                    .map(|i| (0..rank).map(|j| p[(i, j)]).collect())
                    .collect();
                let residual = exact_residual(a, &c);
                if residual.to_f64() < tol {
                    return Some(FloatFactor {
                        c,
                        residual,
                        iterations: spent,
                    });
                }
            }
            q = polar(&(b.transpose() * &p))?;
        }
    }
    None
}
