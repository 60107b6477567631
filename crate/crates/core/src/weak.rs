// SPDX-License-Identifier: Apache-2.0

//! Weak-coupling analysis: `(M, N) = ε(sM, sN)` gives `A_ε = A₀ + ε²sA`,
//! `b_ε = ε²sb`, and the eigenvalues of `A_ε` move as
//! `iω_k + ε²ν_k + o(ε²)` with `ν_k = v_k* α^{−1/2} sA √α v_k`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::isolated::EigenModes;
use crate::linalg::{self, c, CVec, RMat, RVec, C64};
use crate::model::{self, StructureConstants};
use crate::qsde::{self, QsdeCoefficients, SystemSpec};

/// Frequencies closer than this are treated as repeated.
pub const DISTINCT_TOL: f64 = 1e-9;

/// A system whose coupling `(M, N)` is read as the shape `(sM, sN)`.
#[derive(Debug, Clone)]
pub struct CouplingShape {
    pub spec: SystemSpec,
}

impl CouplingShape {
    pub fn new(spec: SystemSpec) -> Self {
        Self { spec }
    }

    pub fn constants(&self) -> &StructureConstants {
        &self.spec.constants
    }

    pub fn split(&self) -> Result<WeakSplit> {
        let unit = qsde::build_coefficients(&self.spec)?;
        Ok(WeakSplit { a0: unit.a0, s_a: unit.a_tilde, s_b: unit.b })
    }
}

/// `A_ε = A₀ + ε² sA`, `b_ε = ε² sb`.
#[derive(Debug, Clone)]
pub struct WeakSplit {
    pub a0: RMat,
    pub s_a: RMat,
    pub s_b: RVec,
}

impl WeakSplit {
    pub fn a_eps(&self, eps: f64) -> RMat {
        &self.a0 + &self.s_a * (eps * eps)
    }

    pub fn b_eps(&self, eps: f64) -> RVec {
        &self.s_b * (eps * eps)
    }
}

/// Coefficients at coupling strength `ε`, checked against the `ε²` split.
pub fn scaled_coefficients(shape: &CouplingShape, eps: f64) -> Result<QsdeCoefficients> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::OutOfRange(format!("coupling strength must be ≥ 0, got {eps}")));
    }
    let coeffs = qsde::build_coefficients(&shape.spec.scaled_coupling(eps))?;
    let split = shape.split()?;
    let scale = 1.0 + linalg::max_abs(&split.s_a) * eps * eps;
    let residual = linalg::max_abs(&(&coeffs.a_tilde - &split.s_a * (eps * eps)));
    if residual > 1e-12 * scale {
        return Err(Error::Numeric(format!("ε² homogeneity of Ã violated by {residual:.3e}")));
    }
    Ok(coeffs)
}

fn require_distinct(modes: &EigenModes) -> Result<()> {
    let w = &modes.omegas;
    for j in 0..w.len() {
        for k in j + 1..w.len() {
            if (w[j] - w[k]).abs() <= DISTINCT_TOL {
                return Err(Error::RepeatedFrequency { j, k, omega_j: w[j], omega_k: w[k] });
            }
        }
    }
    Ok(())
}

fn nu_single(s_a: &RMat, modes: &EigenModes, k: usize) -> C64 {
    let conj = linalg::to_complex(&(&modes.inv_sqrt_alpha * s_a * &modes.sqrt_alpha));
    let v: CVec = modes.v.column(k).into_owned();
    (v.adjoint() * conj * &v)[(0, 0)]
}

/// `ν_k` for every mode; refuses repeated eigenfrequencies.
pub fn nu_values(split: &WeakSplit, modes: &EigenModes) -> Result<Vec<C64>> {
    if split.s_a.shape() != (modes.n(), modes.n()) {
        return Err(Error::DimensionMismatch("sA and modes differ in size".into()));
    }
    require_distinct(modes)?;
    Ok((0..modes.n()).map(|k| nu_single(&split.s_a, modes, k)).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsRow {
    pub eps: f64,
    /// `|λ_k(ε) − iω_k − ε²ν_k| / ε²` per mode.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Matched eigenvalues `λ_k(ε)`, as `[re, im]`.
    pub eigenvalues: Vec<[f64; 2]>,
    /// Some match was farther than a quarter of the smallest gap of `A₀`.
    pub ambiguous: bool,
}

/// Greedy assignment of eigenvalues to predictions, closest pairs first.
fn greedy_match(pred: &[C64], ev: &[C64]) -> Vec<(usize, f64)> {
    let n = pred.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, p) in pred.iter().enumerate() {
        for (j, e) in ev.iter().enumerate() {
            pairs.push(((p - e).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![(usize::MAX, f64::INFINITY); n];
    let mut used = vec![false; ev.len()];
    for (d, i, j) in pairs {
        if out[i].0 == usize::MAX && !used[j] {
            out[i] = (j, d);
            used[j] = true;
        }
    }
    out
}

pub fn eigenvalue_asymptotics_check(
    split: &WeakSplit,
    modes: &EigenModes,
    nus: &[C64],
    eps_list: &[f64],
) -> Result<Vec<AsymptoticsRow>> {
    let n = modes.n();
    if nus.len() != n {
        return Err(Error::DimensionMismatch("one ν per mode expected".into()));
    }
    require_distinct(modes)?;
    let mut gap = f64::INFINITY;
    for j in 0..n {
        for k in j + 1..n {
            gap = gap.min((modes.omegas[j] - modes.omegas[k]).abs());
        }
    }
    eps_list
        .iter()
        .map(|&eps| {
            if !(eps >= 0.0) {
                return Err(Error::OutOfRange(format!("ε must be ≥ 0, got {eps}")));
            }
            let pred: Vec<C64> = (0..n).map(|k| c(0.0, modes.omegas[k]) + nus[k] * (eps * eps)).collect();
            if eps == 0.0 {
                return Ok(AsymptoticsRow {
                    eps,
                    residuals: vec![0.0; n],
                    max_residual: 0.0,
                    eigenvalues: pred.iter().map(|z| [z.re, z.im]).collect(),
                    ambiguous: false,
                });
            }
            let ev = linalg::eigenvalues_real(&split.a_eps(eps))?;
            let matches = greedy_match(&pred, &ev);
            let residuals: Vec<f64> = matches.iter().map(|&(_, d)| d / (eps * eps)).collect();
            let ambiguous = matches.iter().any(|&(_, d)| d > gap / 4.0);
            Ok(AsymptoticsRow {
                eps,
                max_residual: residuals.iter().copied().fold(0.0, f64::max),
                residuals,
                eigenvalues: matches.iter().map(|&(j, _)| [ev[j].re, ev[j].im]).collect(),
                ambiguous,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationResult {
    /// `ν_k` as `[re, im]`, in mode order.
    pub nus: Vec<[f64; 2]>,
    pub stable: bool,
    /// `max_k Re ν_k`.
    pub lead_abscissa_coefficient: f64,
    /// `c` in `τ̂(ε) = c / ε²`, i.e. `1 / max_k |Re ν_k|`.
    pub tau_hat_coefficient: f64,
    pub eps_hat: Option<f64>,
    pub eps_tilde: Option<f64>,
}

impl PerturbationResult {
    pub fn tau_hat(&self, eps: f64) -> f64 {
        self.tau_hat_coefficient / (eps * eps)
    }
}

pub fn stability_and_thresholds(modes: &EigenModes, nus: &[C64]) -> Result<PerturbationResult> {
    if nus.len() != modes.n() {
        return Err(Error::DimensionMismatch("one ν per mode expected".into()));
    }
    let re: Vec<f64> = nus.iter().map(|z| z.re).collect();
    let lead = re.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_abs_re = re.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let min_abs_re = re.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
    let two_pi = 2.0 * std::f64::consts::PI;
    let positive = modes.positive_indices();
    let (eps_hat, eps_tilde) = if positive.is_empty() {
        (None, None)
    } else {
        let min_pos = positive.iter().map(|&k| modes.omegas[k]).fold(f64::INFINITY, f64::min);
        let worst = positive.iter().map(|&k| re[k].abs() / modes.omegas[k]).fold(0.0, f64::max);
        (Some((min_pos / (two_pi * min_abs_re)).sqrt()), Some(1.0 / (two_pi * worst).sqrt()))
    };
    Ok(PerturbationResult {
        nus: nus.iter().map(|z| [z.re, z.im]).collect(),
        stable: lead < 0.0,
        lead_abscissa_coefficient: lead,
        tau_hat_coefficient: 1.0 / max_abs_re,
        eps_hat,
        eps_tilde,
    })
}

/// `lim_{ε→0} μ*_ε = −(1/ν_{k₀}) √α v_{k₀} v_{k₀}ᵀ α^{−1/2} sb` for the
/// simple zero frequency `k₀`.
pub fn invariant_mean_limit(split: &WeakSplit, modes: &EigenModes) -> Result<RVec> {
    let n = modes.n();
    if n.is_multiple_of(2) {
        return Err(Error::OutOfRange(format!("invariant-mean limit needs odd n, got {n}")));
    }
    let zeros = modes.zero_indices();
    if zeros.len() != 1 {
        return Err(Error::OutOfRange(format!(
            "invariant-mean limit needs a simple zero frequency, found {}",
            zeros.len()
        )));
    }
    let k0 = zeros[0];
    let nu = nu_single(&split.s_a, modes, k0);
    if !(nu.re < 0.0) || nu.norm() <= 1e-12 {
        return Err(Error::OutOfRange(format!("ν for the zero mode is {nu}, need Re ν < 0")));
    }
    let v = RVec::from_iterator(n, modes.v.column(k0).iter().map(|z| z.re));
    let weight = v.dot(&(&modes.inv_sqrt_alpha * &split.s_b));
    Ok(&modes.sqrt_alpha * v * (-weight / nu.re))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergencePoint {
    pub eps: f64,
    pub distance: f64,
}

/// `‖μ*_ε − limit‖` from the exact steady mean at each `ε`.
pub fn invariant_mean_convergence(split: &WeakSplit, limit: &RVec, eps_list: &[f64]) -> Result<Vec<ConvergencePoint>> {
    eps_list
        .iter()
        .map(|&eps| {
            crate::spectrum::require_hurwitz(&split.a_eps(eps))?;
            let mu = linalg::solve_real(&split.a_eps(eps), &(-split.b_eps(eps)))?;
            Ok(ConvergencePoint { eps, distance: (mu - limit).norm() })
        })
        .collect()
}

/// `Γ = −Σ_ℓ Θ_ℓ MᵀM Θ_ℓ` for Pauli constants, with the residual against
/// `‖M‖_F² I − MᵀM`.
pub fn pauli_gamma(m: &RMat) -> Result<(RMat, f64)> {
    if m.ncols() != 3 {
        return Err(Error::DimensionMismatch(format!("Pauli coupling must have 3 columns, got {}", m.ncols())));
    }
    let p = model::pauli_constants();
    let mtm = m.transpose() * m;
    let mut gamma = RMat::zeros(3, 3);
    for t in p.theta() {
        gamma -= t * &mtm * t;
    }
    let closed = RMat::identity(3, 3) * m.norm_squared() - mtm;
    let residual = (&gamma - closed).norm();
    Ok((gamma, residual))
}

/// Orthonormal basis of the plane orthogonal to `e`: Gram–Schmidt of the two
/// standard basis vectors least aligned with `e`, ties by index.
pub fn orthogonal_plane_basis(e: &RVec) -> Result<(RVec, RVec)> {
    let norm = e.norm();
    if e.len() != 3 || norm == 0.0 {
        return Err(Error::OutOfRange("need a nonzero 3-vector".into()));
    }
    let unit = e / norm;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| unit[a].abs().total_cmp(&unit[b].abs()).then(a.cmp(&b)));
    let basis = |i: usize| {
        let mut v = RVec::zeros(3);
        v[i] = 1.0;
        v
    };
    let mut u1 = basis(order[0]);
    u1 -= &unit * unit.dot(&u1);
    u1 /= u1.norm();
    let mut u2 = basis(order[1]);
    u2 -= &unit * unit.dot(&u2) + &u1 * u1.dot(&u2);
    u2 /= u2.norm();
    Ok((u1, u2))
}

#[derive(Debug, Clone, Serialize)]
pub struct PauliDiagnostic {
    pub gamma: Vec<Vec<f64>>,
    pub identity_residual: f64,
    /// `Re ν₁` from the general formula.
    pub re_nu1_normative: f64,
    /// `−(u₁ᵀΓu₁ + u₂ᵀΓu₂)`.
    pub re_nu1_quadratic: f64,
    /// `−2(‖u₁‖²_Γ + ‖u₂‖²_Γ)` read with `‖u‖²_Γ = uᵀΓu`.
    pub re_nu1_display: f64,
    /// `−2 v₃ᵀΓv₃` with `v₃ = E/|E|`.
    pub re_nu3_closed: f64,
    pub re_nu3_normative: f64,
    /// `re_nu1_display / re_nu1_normative`.
    pub display_ratio: f64,
}

/// Closed-form Pauli decay rates next to the general `ν` formula.
pub fn pauli_diagnostic(shape: &CouplingShape, modes: &EigenModes) -> Result<PauliDiagnostic> {
    let k = shape.constants();
    let p = model::pauli_constants();
    if k.alpha_complex() != p.alpha_complex() || k.beta() != p.beta() {
        return Err(Error::InvalidConstants("Pauli diagnostic needs Pauli constants".into()));
    }
    let (gamma, identity_residual) = pauli_gamma(&shape.spec.coupling)?;
    let (u1, u2) = orthogonal_plane_basis(&shape.spec.energy)?;
    let split = shape.split()?;
    let nus = nu_values(&split, modes)?;
    let quad = u1.dot(&(&gamma * &u1)) + u2.dot(&(&gamma * &u2));
    let v3 = &shape.spec.energy / shape.spec.energy.norm();
    let zero = modes.zero_indices();
    let k0 = *zero.first().ok_or_else(|| Error::Numeric("no zero mode".into()))?;
    Ok(PauliDiagnostic {
        gamma: gamma.row_iter().map(|r| r.iter().copied().collect()).collect(),
        identity_residual,
        re_nu1_normative: nus[0].re,
        re_nu1_quadratic: -quad,
        re_nu1_display: -2.0 * quad,
        re_nu3_closed: -2.0 * v3.dot(&(&gamma * &v3)),
        re_nu3_normative: nus[k0].re,
        display_ratio: -2.0 * quad / nus[0].re,
    })
}

/// Complex `ν_k` read off an exact eigensolve: `(λ_k(ε) − iω_k)/ε²`.
pub fn nu_from_eigensolve(split: &WeakSplit, modes: &EigenModes, nus: &[C64], eps: f64) -> Result<Vec<C64>> {
    if !(eps > 0.0) {
        return Err(Error::OutOfRange("ε must be positive".into()));
    }
    let ev = linalg::eigenvalues_real(&split.a_eps(eps))?;
    let pred: Vec<C64> = (0..modes.n()).map(|k| c(0.0, modes.omegas[k]) + nus[k] * (eps * eps)).collect();
    Ok(greedy_match(&pred, &ev)
        .iter()
        .enumerate()
        .map(|(k, &(j, _))| (ev[j] - c(0.0, modes.omegas[k])) / (eps * eps))
        .collect())
}

/// `sA` replaced by its symmetric part; `Re ν` is unchanged.
pub fn symmetric_part(split: &WeakSplit) -> WeakSplit {
    WeakSplit { s_a: (&split.s_a + split.s_a.transpose()) * 0.5, ..split.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isolated::eigenmodes;
    use crate::qsde::pauli_worked_example;

    fn worked() -> (CouplingShape, WeakSplit, EigenModes) {
        let shape = CouplingShape::new(pauli_worked_example());
        let split = shape.split().unwrap();
        let modes = eigenmodes(&split.a0, shape.constants().alpha()).unwrap();
        (shape, split, modes)
    }

    #[test]
    fn scaled_coefficients_are_homogeneous() {
        let (shape, split, _) = worked();
        let k0 = scaled_coefficients(&shape, 0.0).unwrap();
        assert_eq!(k0.a, split.a0);
        assert_eq!(k0.b, RVec::zeros(3));
        let half = scaled_coefficients(&shape, 0.5).unwrap();
        let want = -RMat::from_diagonal(&RVec::from_vec(vec![2.0, 2.0, 4.0])) * 0.25;
        assert!(linalg::max_abs(&(half.a_tilde - want)) < 1e-15);
        assert!((half.b - RVec::from_vec(vec![0.0, 0.0, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn worked_nu_and_thresholds() {
        let (_, split, modes) = worked();
        let nus = nu_values(&split, &modes).unwrap();
        let want = [c(-2.0, 0.0), c(-4.0, 0.0), c(-2.0, 0.0)];
        for (g, w) in nus.iter().zip(want) {
            assert!((g - w).norm() < 1e-14, "{nus:?}");
        }
        let r = stability_and_thresholds(&modes, &nus).unwrap();
        assert!(r.stable);
        assert!((r.tau_hat(0.5) - 1.0).abs() < 1e-14);
        let target = (1.0 / (2.0 * std::f64::consts::PI)).sqrt();
        assert!((r.eps_hat.unwrap() - target).abs() < 1e-12);
        assert!((r.eps_tilde.unwrap() - target).abs() < 1e-12);
    }

    #[test]
    fn worked_expansion_is_exact() {
        let (_, split, modes) = worked();
        let nus = nu_values(&split, &modes).unwrap();
        let rows = eigenvalue_asymptotics_check(&split, &modes, &nus, &[0.0, 0.2, 0.5, 1.0]).unwrap();
        for r in rows {
            assert!(r.max_residual < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn worked_invariant_mean() {
        let (_, split, modes) = worked();
        let lim = invariant_mean_limit(&split, &modes).unwrap();
        assert!((lim - RVec::from_vec(vec![0.0, 0.0, 1.0])).norm() < 1e-14);
        let conv = invariant_mean_convergence(&split, &RVec::from_vec(vec![0.0, 0.0, 1.0]), &[0.1, 0.5]).unwrap();
        assert!(conv.iter().all(|p| p.distance < 1e-14));
    }

    #[test]
    fn no_coupling_is_not_stable() {
        let shape = CouplingShape::new(pauli_worked_example().scaled_coupling(0.0));
        let split = shape.split().unwrap();
        let modes = eigenmodes(&split.a0, shape.constants().alpha()).unwrap();
        let nus = nu_values(&split, &modes).unwrap();
        assert!(nus.iter().all(|z| z.norm() == 0.0));
        assert!(!stability_and_thresholds(&modes, &nus).unwrap().stable);
        let zero_b = WeakSplit { s_b: RVec::zeros(3), ..worked().1 };
        assert_eq!(invariant_mean_limit(&zero_b, &worked().2).unwrap(), RVec::zeros(3));
    }

    #[test]
    fn repeated_frequencies_are_refused() {
        let spec = pauli_worked_example();
        let shape = CouplingShape::new(qsde::SystemSpec { energy: RVec::zeros(3), ..spec });
        let split = shape.split().unwrap();
        let modes = eigenmodes(&split.a0, shape.constants().alpha()).unwrap();
        assert!(matches!(nu_values(&split, &modes), Err(Error::RepeatedFrequency { .. })));
    }

    #[test]
    fn gamma_examples() {
        let (g, r) = pauli_gamma(&RMat::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0])).unwrap();
        assert_eq!(g, RMat::from_diagonal(&RVec::from_vec(vec![1.0, 1.0, 2.0])));
        assert_eq!(r, 0.0);
        assert_eq!(pauli_gamma(&RMat::zeros(2, 3)).unwrap().0, RMat::zeros(3, 3));
    }

    #[test]
    fn worked_pauli_diagnostic() {
        let (shape, _, modes) = worked();
        let d = pauli_diagnostic(&shape, &modes).unwrap();
        assert!((d.re_nu1_normative + 2.0).abs() < 1e-14);
        assert!((d.re_nu1_quadratic + 2.0).abs() < 1e-14);
        assert!((d.re_nu1_display + 4.0).abs() < 1e-14);
        assert!((d.re_nu3_closed - d.re_nu3_normative).abs() < 1e-14);
        assert!((d.display_ratio - 2.0).abs() < 1e-14);
    }

    #[test]
    fn plane_basis_is_orthonormal() {
        let e = RVec::from_vec(vec![0.3, -1.2, 0.5]);
        let (u1, u2) = orthogonal_plane_basis(&e).unwrap();
        assert!(u1.dot(&e).abs() < 1e-15 && u2.dot(&e).abs() < 1e-15);
        assert!(u1.dot(&u2).abs() < 1e-15);
        assert!((u1.norm() - 1.0).abs() < 1e-15 && (u2.norm() - 1.0).abs() < 1e-15);
    }
}
