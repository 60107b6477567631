// SPDX-License-Identifier: Apache-2.0

//! Decoherence time `τ*` of the averaged two-point commutator and its upper
//! bound from the algebraic Lyapunov inequality `AG + GAᵀ ≺ −2λG`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, RMat};
use crate::spectrum;

pub const DEFAULT_HORIZON_FACTOR: f64 = 10.0;
pub const GRID_POINTS: usize = 400;
pub const LAMBDA_GRID: usize = 32;
const BISECTION_REL_WIDTH: f64 = 1e-10;
const INV_SQRT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TauStar {
    /// First time with `‖e^{τA}C‖_F ≤ ‖C‖_F / e`, or the horizon when no
    /// crossing was found.
    pub tau: f64,
    /// False means `tau` is only a lower bound.
    pub crossed: bool,
    pub horizon: f64,
}

pub fn tau_star(a: &RMat, ccr: &RMat, horizon_factor: f64) -> Result<TauStar> {
    if a.shape() != ccr.shape() || !a.is_square() {
        return Err(Error::DimensionMismatch("A and the CCR matrix must be square of equal size".into()));
    }
    if !(horizon_factor > 0.0 && horizon_factor.is_finite()) {
        return Err(Error::OutOfRange(format!("horizon factor must be positive, got {horizon_factor}")));
    }
    let sigma = spectrum::require_hurwitz(a)?;
    let horizon = horizon_factor / sigma.abs();
    let c0 = ccr.norm();
    if c0 == 0.0 {
        return Ok(TauStar { tau: 0.0, crossed: true, horizon });
    }
    let level = c0 / std::f64::consts::E;
    let excess = |t: f64| -> Result<f64> { Ok((linalg::expm(&(a * t))? * ccr).norm() - level) };

    let step = horizon / (GRID_POINTS - 1) as f64;
    let mut prev = 0.0;
    for i in 1..GRID_POINTS {
        let t = step * i as f64;
        if excess(t)? <= 0.0 {
            let (mut lo, mut hi) = (prev, t);
            while hi - lo > BISECTION_REL_WIDTH * hi {
                let mid = 0.5 * (lo + hi);
                if excess(mid)? <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(TauStar { tau: hi, crossed: true, horizon });
        }
        prev = t;
    }
    Ok(TauStar { tau: horizon, crossed: false, horizon })
}

#[derive(Debug, Clone)]
pub struct LyapunovSolution {
    pub g: RMat,
    /// Max entry of `(A+λI)G + G(A+λI)ᵀ + K`.
    pub residual: f64,
    pub min_eigenvalue: f64,
}

/// Solves `(A+λI)G + G(A+λI)ᵀ + K = 0` through the vectorised system.
pub fn lyapunov_g(a: &RMat, lambda: f64, k: &RMat) -> Result<LyapunovSolution> {
    let n = a.nrows();
    if a.shape() != k.shape() || !a.is_square() {
        return Err(Error::DimensionMismatch("A and K must be square of equal size".into()));
    }
    let sigma = spectrum::require_hurwitz(a)?;
    if !(lambda > 0.0 && lambda < -sigma) {
        return Err(Error::OutOfRange(format!("λ = {lambda} outside (0, {})", -sigma)));
    }
    linalg::require_positive_definite(k, 0.0)?;
    let shifted = a + RMat::identity(n, n) * lambda;
    let op = linalg::kron_sum(&shifted, &shifted);
    let rhs = -linalg::vec_cols(k);
    let g = linalg::unvec(&linalg::solve_real(&op, &rhs)?, n, n);
    let g = (&g + g.transpose()) * 0.5;
    let residual = linalg::max_abs(&(&shifted * &g + &g * shifted.transpose() + k));
    let min_eigenvalue = linalg::min_symmetric_eigenvalue(&g)?;
    if min_eigenvalue <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    // AG + GAᵀ + 2λG = −K must be negative definite.
    let gap = linalg::max_symmetric_eigenvalue(&(a * &g + &g * a.transpose() + &g * (2.0 * lambda)))?;
    if gap >= -1e-9 * linalg::max_abs(k).max(f64::MIN_POSITIVE) {
        return Err(Error::Numeric(format!("Lyapunov inequality not strict (top eigenvalue {gap:.3e})")));
    }
    Ok(LyapunovSolution { g, residual, min_eigenvalue })
}

/// `(1/λ)(1 + ln(√‖G‖ ‖G^{−1/2}C‖_F / ‖C‖_F))`.
pub fn tau_upper_bound(a: &RMat, ccr: &RMat, lambda: f64, k: &RMat) -> Result<f64> {
    let sol = lyapunov_g(a, lambda, k)?;
    bound_from_g(&sol.g, ccr, lambda)
}

fn bound_from_g(g: &RMat, ccr: &RMat, lambda: f64) -> Result<f64> {
    let c0 = ccr.norm();
    if c0 == 0.0 {
        return Err(Error::OutOfRange("the bound needs a nonzero CCR matrix".into()));
    }
    let g_norm = linalg::max_symmetric_eigenvalue(g)?;
    let inv_sqrt = linalg::symmetric_inv_sqrt(g, INV_SQRT_FLOOR)?;
    let ratio = g_norm.sqrt() * (inv_sqrt * ccr).norm() / c0;
    Ok((1.0 + ratio.ln()) / lambda)
}

/// Spectral norm of `G^{−1/2} e^{τA} √G`, at most `e^{−λτ}`.
pub fn contraction_norm(a: &RMat, g: &RMat, tau: f64) -> Result<f64> {
    let inv_sqrt = linalg::symmetric_inv_sqrt(g, INV_SQRT_FLOOR)?;
    let sqrt = linalg::symmetric_sqrt(g)?;
    let m = inv_sqrt * linalg::expm(&(a * tau))? * sqrt;
    Ok(linalg::max_symmetric_eigenvalue(&(m.transpose() * &m))?.max(0.0).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundEvaluation {
    pub k_index: usize,
    pub lambda: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundOptimum {
    pub bound: f64,
    pub lambda: f64,
    #[serde(skip)]
    pub k: RMat,
    pub k_index: usize,
    pub seed: u64,
    pub trace: Vec<BoundEvaluation>,
}

/// `32` values log-spaced over `(0.01, 0.99)·(−σ(A))`, ascending.
pub fn lambda_grid(decay_rate: f64) -> Vec<f64> {
    let (lo, hi) = ((0.01 * decay_rate).ln(), (0.99 * decay_rate).ln());
    (0..LAMBDA_GRID)
        .map(|i| (lo + (hi - lo) * i as f64 / (LAMBDA_GRID - 1) as f64).exp())
        .collect()
}

/// `K` dictionary entry `idx`: the identity first, then `WᵀW + 10⁻⁶I`
/// normalised to unit trace with Gaussian `W` drawn from `rng`.
fn next_k(idx: usize, n: usize, rng: &mut ChaCha8Rng) -> RMat {
    if idx == 0 {
        return RMat::identity(n, n);
    }
    let w = RMat::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let k = w.transpose() * w + RMat::identity(n, n) * 1e-6;
    let tr = k.trace();
    k / tr
}

/// Minimises the bound over the `λ` grid crossed with the `K` dictionary,
/// `K` outer and `λ` inner, stopping after `budget` evaluations.
pub fn optimize_tau_bound(a: &RMat, ccr: &RMat, budget: usize, seed: u64) -> Result<BoundOptimum> {
    if budget == 0 {
        return Err(Error::OutOfRange("evaluation budget must be at least 1".into()));
    }
    let sigma = spectrum::require_hurwitz(a)?;
    let n = a.nrows();
    let lambdas = lambda_grid(-sigma);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<BoundOptimum> = None;
    let mut trace = Vec::with_capacity(budget);
    let mut k_index = 0;
    'outer: loop {
        let k = next_k(k_index, n, &mut rng);
        for &lambda in &lambdas {
            if trace.len() == budget {
                break 'outer;
            }
            let bound = tau_upper_bound(a, ccr, lambda, &k)?;
            trace.push(BoundEvaluation { k_index, lambda, bound });
            let better = match &best {
                None => true,
                Some(b) => bound < b.bound || (bound == b.bound && lambda < b.lambda),
            };
            if better {
                best = Some(BoundOptimum { bound, lambda, k: k.clone(), k_index, seed, trace: Vec::new() });
            }
        }
        k_index += 1;
    }
    let mut best = best.expect("budget ≥ 1 guarantees one evaluation");
    best.trace = trace;
    Ok(best)
}
