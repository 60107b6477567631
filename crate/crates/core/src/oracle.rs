// SPDX-License-Identifier: Apache-2.0

//! Finite-dimensional ground truth. The variables are explicit Hermitian
//! matrices, the Heisenberg generator is evaluated literally, and states
//! are propagated with the exponential of its adjoint.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, RVec};
use crate::model::StructureConstants;
use crate::qsde::{QsdeCoefficients, SystemSpec};

/// Largest Hilbert dimension handled (superoperators are `d² × d²`).
pub const MAX_HILBERT_DIM: usize = 16;

#[derive(Debug, Clone)]
pub struct HilbertRep {
    pub d: usize,
    pub x: Vec<CMat>,
}

impl HilbertRep {
    pub fn new(x: Vec<CMat>) -> Result<Self> {
        let d = x.first().map(|m| m.nrows()).ok_or_else(|| Error::DimensionMismatch("empty representation".into()))?;
        if x.iter().any(|m| m.shape() != (d, d)) {
            return Err(Error::DimensionMismatch("representation matrices must all be d×d".into()));
        }
        for (k, m) in x.iter().enumerate() {
            let r = linalg::hermitian_residual(m);
            if r > 1e-12 {
                return Err(Error::InvalidState(format!("X_{k} is not Hermitian (residual {r:.3e})")));
            }
        }
        Ok(Self { d, x })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `Σ_k u_k X_k`.
    pub fn combine(&self, u: &RVec) -> CMat {
        let mut out = CMat::zeros(self.d, self.d);
        for (k, m) in self.x.iter().enumerate() {
            out += m * c(u[k], 0.0);
        }
        out
    }

    /// `Tr(ρ X_k)` for each `k`.
    pub fn expectations(&self, rho: &CMat) -> RVec {
        RVec::from_iterator(self.n(), self.x.iter().map(|m| (rho * m).trace().re))
    }
}

pub fn pauli_matrices() -> [CMat; 3] {
    [
        CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
    ]
}

pub fn pauli_representation() -> HilbertRep {
    HilbertRep { d: 2, x: pauli_matrices().to_vec() }
}

/// `(X⁽¹⁾ ⊗ I, I ⊗ X⁽²⁾, X⁽¹⁾_j ⊗ X⁽²⁾_k)` with `j` outer, `k` inner.
pub fn tensor_representation(r1: &HilbertRep, r2: &HilbertRep) -> HilbertRep {
    let i1 = CMat::identity(r1.d, r1.d);
    let i2 = CMat::identity(r2.d, r2.d);
    let mut x: Vec<CMat> = r1.x.iter().map(|a| linalg::kron(a, &i2)).collect();
    x.extend(r2.x.iter().map(|b| linalg::kron(&i1, b)));
    for a in &r1.x {
        for b in &r2.x {
            x.push(linalg::kron(a, b));
        }
    }
    HilbertRep { d: r1.d * r2.d, x }
}

/// `max_jk ‖X_j X_k − α_jk I − Σ_ℓ β_jkℓ X_ℓ‖_F`.
pub fn representation_check(rep: &HilbertRep, constants: &StructureConstants) -> Result<f64> {
    let n = constants.n();
    if rep.n() != n {
        return Err(Error::DimensionMismatch(format!("{} matrices for n = {n}", rep.n())));
    }
    let id = CMat::identity(rep.d, rep.d);
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            let mut r = &rep.x[j] * &rep.x[k] - &id * constants.alpha_complex()[(j, k)];
            for l in 0..n {
                r -= &rep.x[l] * constants.beta_at(j, k, l);
            }
            worst = worst.max(r.norm());
        }
    }
    Ok(worst)
}

fn operators(rep: &HilbertRep, spec: &SystemSpec) -> Result<(CMat, Vec<CMat>)> {
    if rep.n() != spec.n() {
        return Err(Error::DimensionMismatch(format!("representation has {} variables, system {}", rep.n(), spec.n())));
    }
    let h = rep.combine(&spec.energy);
    let id = CMat::identity(rep.d, rep.d);
    let l = (0..spec.m())
        .map(|a| rep.combine(&spec.coupling.row(a).transpose()) + &id * c(spec.offset[a], 0.0))
        .collect();
    Ok((h, l))
}

fn gksl_with(h: &CMat, l: &[CMat], omega: &CMat, xi: &CMat) -> CMat {
    let mut out = (h * xi - xi * h) * c(0.0, 1.0);
    for (a, la) in l.iter().enumerate() {
        let left = la * xi - xi * la;
        for (b, lb) in l.iter().enumerate() {
            let w = omega[(a, b)];
            if w == c(0.0, 0.0) {
                continue;
            }
            let right = xi * lb - lb * xi;
            out += (&left * lb + la * right) * (w * 0.5);
        }
    }
    out
}

/// `𝒢(ξ) = i[H, ξ] + ½ Σ_ab Ω_ab ([L_a, ξ] L_b + L_a [ξ, L_b])`.
pub fn gksl_apply(rep: &HilbertRep, spec: &SystemSpec, xi: &CMat) -> Result<CMat> {
    if xi.shape() != (rep.d, rep.d) {
        return Err(Error::DimensionMismatch(format!("ξ must be {0}×{0}", rep.d)));
    }
    let (h, l) = operators(rep, spec)?;
    let out = gksl_with(&h, &l, &spec.ito.omega, xi);
    if linalg::hermitian_residual(xi) <= 1e-14 * (1.0 + linalg::max_abs(xi)) {
        let r = linalg::hermitian_residual(&out);
        if r > 1e-12 * (1.0 + linalg::max_abs(&out)) {
            return Err(Error::Numeric(format!("generator broke Hermiticity (residual {r:.3e})")));
        }
    }
    Ok(out)
}

/// `max_k ‖𝒢(X_k) − Σ_j A_kj X_j − b_k I‖_F`.
pub fn generator_identity_check(rep: &HilbertRep, spec: &SystemSpec, coeffs: &QsdeCoefficients) -> Result<f64> {
    let (h, l) = operators(rep, spec)?;
    if coeffs.n() != rep.n() {
        return Err(Error::DimensionMismatch("coefficients and representation differ in n".into()));
    }
    let id = CMat::identity(rep.d, rep.d);
    let mut worst: f64 = 0.0;
    for k in 0..rep.n() {
        let lhs = gksl_with(&h, &l, &spec.ito.omega, &rep.x[k]);
        let rhs = rep.combine(&coeffs.a.row(k).transpose()) + &id * c(coeffs.b[k], 0.0);
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Checks that `rho` is a density matrix to within `tol`.
pub fn check_density(rho: &CMat, tol: f64) -> Result<()> {
    let h = linalg::hermitian_residual(rho);
    if h > tol {
        return Err(Error::InvalidState(format!("ρ is not Hermitian (residual {h:.3e})")));
    }
    let tr = rho.trace();
    if (tr - c(1.0, 0.0)).norm() > tol {
        return Err(Error::InvalidState(format!("Tr ρ = {tr}")));
    }
    let (ev, _) = linalg::hermitian_eigen(rho)?;
    if ev.first().copied().unwrap_or(0.0) < -tol {
        return Err(Error::InvalidState(format!("ρ has eigenvalue {:.3e}", ev[0])));
    }
    Ok(())
}

pub fn maximally_mixed(d: usize) -> CMat {
    CMat::identity(d, d) / c(d as f64, 0.0)
}

#[derive(Debug, Clone)]
pub struct Propagated {
    pub rho: CMat,
    /// `|Tr ρ(t) − 1|` before renormalisation.
    pub trace_residual: f64,
}

/// Generator superoperators of one system, built once.
#[derive(Debug, Clone)]
pub struct GkslOracle {
    pub rep: HilbertRep,
    pub spec: SystemSpec,
    /// Heisenberg picture: `vec 𝒢(ξ) = S vec ξ`.
    pub heisenberg: CMat,
    /// State picture, `Tr(ρ 𝒢(ξ)) = Tr(𝓛(ρ) ξ)`.
    pub lindblad: CMat,
}

impl GkslOracle {
    pub fn new(rep: HilbertRep, spec: SystemSpec) -> Result<Self> {
        let d = rep.d;
        if d > MAX_HILBERT_DIM {
            return Err(Error::Capability(format!("oracle limited to d ≤ {MAX_HILBERT_DIM}, got {d}")));
        }
        let (h, l) = operators(&rep, &spec)?;
        let dd = d * d;
        let mut heisenberg = CMat::zeros(dd, dd);
        for b in 0..d {
            for a in 0..d {
                let mut unit = CMat::zeros(d, d);
                unit[(a, b)] = c(1.0, 0.0);
                heisenberg.set_column(a + b * d, &linalg::vec_cols(&gksl_with(&h, &l, &spec.ito.omega, &unit)));
            }
        }
        // vec(Xᵀ) = T vec(X), hence vec 𝓛(ρ) = T Sᵀ T vec ρ.
        let mut t = CMat::zeros(dd, dd);
        for a in 0..d {
            for b in 0..d {
                t[(b + a * d, a + b * d)] = c(1.0, 0.0);
            }
        }
        let lindblad = &t * heisenberg.transpose() * &t;
        Ok(Self { rep, spec, heisenberg, lindblad })
    }

    pub fn d(&self) -> usize {
        self.rep.d
    }

    fn evolve(&self, z: &CMat, t: f64) -> Result<CMat> {
        if t == 0.0 {
            return Ok(z.clone());
        }
        let v = linalg::expm(&(&self.lindblad * c(t, 0.0)))? * linalg::vec_cols(z);
        Ok(linalg::unvec(&v, self.d(), self.d()))
    }

    pub fn lindblad_propagate(&self, rho0: &CMat, t: f64) -> Result<Propagated> {
        if rho0.shape() != (self.d(), self.d()) {
            return Err(Error::DimensionMismatch(format!("ρ must be {0}×{0}", self.d())));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::OutOfRange(format!("time must be ≥ 0, got {t}")));
        }
        check_density(rho0, 1e-10)?;
        let rho = self.evolve(rho0, t)?;
        let tr = rho.trace();
        let trace_residual = (tr - c(1.0, 0.0)).norm();
        let rho = (&rho + rho.adjoint()) * c(0.5 / tr.re, 0.0);
        Ok(Propagated { rho, trace_residual })
    }

    /// `[X(t), X(s)ᵀ]_jk = Tr(X_j e^{(t−s)𝓛}(X_k ρ(s) − ρ(s) X_k))`.
    pub fn two_point_commutator(&self, rho0: &CMat, s: f64, t: f64) -> Result<CMat> {
        if t < s {
            return Err(Error::OutOfRange(format!("need t ≥ s, got s = {s}, t = {t}")));
        }
        let rho_s = self.lindblad_propagate(rho0, s)?.rho;
        let n = self.rep.n();
        let mut out = CMat::zeros(n, n);
        for k in 0..n {
            let xk = &self.rep.x[k];
            let evolved = self.evolve(&(xk * &rho_s - &rho_s * xk), t - s)?;
            for j in 0..n {
                out[(j, k)] = (&self.rep.x[j] * &evolved).trace();
            }
        }
        Ok(out)
    }

    /// Unique `ρ` with `𝓛(ρ) = 0`, `Tr ρ = 1`.
    pub fn stationary_state(&self) -> Result<CMat> {
        let d = self.d();
        let mut sys = self.lindblad.clone();
        // Diagonal rows of 𝓛 sum to zero, so one of them can carry the trace.
        sys.row_mut(0).fill(c(0.0, 0.0));
        for a in 0..d {
            sys[(0, a + a * d)] = c(1.0, 0.0);
        }
        let mut rhs = linalg::CVec::zeros(d * d);
        rhs[0] = c(1.0, 0.0);
        let v = sys
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numeric("stationary state is not unique".into()))?;
        let rho = linalg::unvec(&v, d, d);
        let rho = (&rho + rho.adjoint()) * c(0.5, 0.0);
        let residual = linalg::max_abs(&(&self.lindblad * linalg::vec_cols(&rho)));
        if residual > 1e-9 {
            return Err(Error::Numeric(format!("stationary residual {residual:.3e}")));
        }
        Ok(rho)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub check: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualRow {
    pub fn new(check: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self { check: check.into(), residual, tolerance, pass: residual <= tolerance }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::pauli_constants;
    use crate::qsde::{build_coefficients, pauli_worked_example};

    #[test]
    fn pauli_products_and_traces() {
        let rep = pauli_representation();
        let s = &rep.x;
        assert_eq!(&s[0] * &s[1], &s[2] * c(0.0, 1.0));
        assert!(s.iter().all(|m| m.trace() == c(0.0, 0.0)));
        assert_eq!(representation_check(&rep, &pauli_constants()).unwrap(), 0.0);
    }

    #[test]
    fn tensor_rep_commutes_across_factors() {
        let t = tensor_representation(&pauli_representation(), &pauli_representation());
        assert_eq!(t.d, 4);
        assert_eq!(t.n(), 15);
        for j in 0..3 {
            for k in 3..6 {
                assert_eq!(&t.x[j] * &t.x[k], &t.x[k] * &t.x[j]);
            }
        }
        assert!(t.x.iter().all(|m| m.trace().norm() == 0.0));
    }

    #[test]
    fn generator_basics() {
        let spec = pauli_worked_example();
        let rep = pauli_representation();
        let id = CMat::identity(2, 2);
        assert!(linalg::max_abs(&gksl_apply(&rep, &spec, &id).unwrap()) < 1e-15);
        let closed = spec.scaled_coupling(0.0);
        let h = rep.combine(&closed.energy);
        assert!(linalg::max_abs(&gksl_apply(&rep, &closed, &h).unwrap()) < 1e-15);
    }

    #[test]
    fn worked_example_identity() {
        let spec = pauli_worked_example();
        let k = build_coefficients(&spec).unwrap();
        assert!(generator_identity_check(&pauli_representation(), &spec, &k).unwrap() <= 1e-12);
    }

    #[test]
    fn propagation_and_stationary_state() {
        let o = GkslOracle::new(pauli_representation(), pauli_worked_example()).unwrap();
        let rho0 = maximally_mixed(2);
        assert_eq!(o.lindblad_propagate(&rho0, 0.0).unwrap().rho, rho0);
        for t in [0.1, 1.0, 10.0] {
            assert!(o.lindblad_propagate(&rho0, t).unwrap().trace_residual <= 1e-9);
        }
        let late = o.lindblad_propagate(&rho0, 20.0).unwrap().rho;
        assert!((o.rep.expectations(&late)[2] - 1.0).abs() < 1e-12);
        let st = o.stationary_state().unwrap();
        let mu = o.rep.expectations(&st);
        assert!((mu - RVec::from_vec(vec![0.0, 0.0, 1.0])).norm() < 1e-12);
    }

    #[test]
    fn commutator_at_equal_times_is_the_ccr() {
        let o = GkslOracle::new(pauli_representation(), pauli_worked_example()).unwrap();
        let rho0 = maximally_mixed(2) + &o.rep.x[0] * c(0.3, 0.0);
        let got = o.two_point_commutator(&rho0, 0.7, 0.7).unwrap();
        let mu = o.rep.expectations(&o.lindblad_propagate(&rho0, 0.7).unwrap().rho);
        let ccr = crate::model::dot_product(pauli_constants().theta(), &mu).unwrap();
        assert!(linalg::max_abs(&(got - linalg::to_complex(&ccr) * c(0.0, 2.0))) < 1e-10);
        assert!(o.two_point_commutator(&rho0, 1.0, 0.5).is_err());
    }

    #[test]
    fn invalid_density_rejected() {
        let o = GkslOracle::new(pauli_representation(), pauli_worked_example()).unwrap();
        assert!(o.lindblad_propagate(&CMat::identity(2, 2), 1.0).is_err());
    }
}
