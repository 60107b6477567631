// SPDX-License-Identifier: Apache-2.0

//! Quasilinear QSDE coefficients `dX = (AX + b)dt + B(X)dW` and the
//! first-moment dynamics they induce.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, RMat, RVec, C64};
use crate::model::{self, StructureConstants};
use crate::spectrum;

/// Itô table `dW dWᵀ = Ω dt` with `Ω = I + iJ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ItoStructure {
    pub m: usize,
    pub j: RMat,
    pub omega: CMat,
}

/// Standard structure for `m` channels: `J = [[0, 1], [-1, 0]] ⊗ I_{m/2}`.
pub fn ito_structure(m: usize) -> Result<ItoStructure> {
    if m == 0 || !m.is_multiple_of(2) {
        return Err(Error::OddChannelCount(m));
    }
    let bj = RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let j = linalg::kron(&bj, &RMat::identity(m / 2, m / 2));
    Ok(ItoStructure::from_j(j))
}

impl ItoStructure {
    fn from_j(j: RMat) -> Self {
        let m = j.nrows();
        let omega = CMat::identity(m, m) + linalg::to_complex(&j) * c(0.0, 1.0);
        Self { m, j, omega }
    }

    /// Block-diagonal structure of independent field groups.
    pub fn block_diag(parts: &[&ItoStructure]) -> Self {
        let m: usize = parts.iter().map(|p| p.m).sum();
        let mut j = RMat::zeros(m, m);
        let mut at = 0;
        for p in parts {
            j.view_mut((at, at), (p.m, p.m)).copy_from(&p.j);
            at += p.m;
        }
        Self::from_j(j)
    }
}

/// Energy and coupling data: `H = EᵀX`, `L = MX + N`.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub constants: StructureConstants,
    pub energy: RVec,
    pub coupling: RMat,
    pub offset: RVec,
    pub ito: ItoStructure,
}

impl SystemSpec {
    pub fn new(constants: StructureConstants, energy: RVec, coupling: RMat, offset: RVec) -> Result<Self> {
        let ito = ito_structure(coupling.nrows())?;
        Self::with_ito(constants, energy, coupling, offset, ito)
    }

    pub fn with_ito(
        constants: StructureConstants,
        energy: RVec,
        coupling: RMat,
        offset: RVec,
        ito: ItoStructure,
    ) -> Result<Self> {
        let n = constants.n();
        let m = coupling.nrows();
        if !m.is_multiple_of(2) {
            return Err(Error::OddChannelCount(m));
        }
        if energy.len() != n {
            return Err(Error::DimensionMismatch(format!("E has length {}, expected {n}", energy.len())));
        }
        if coupling.ncols() != n {
            return Err(Error::DimensionMismatch(format!("M is {m}×{}, expected {m}×{n}", coupling.ncols())));
        }
        if offset.len() != m {
            return Err(Error::DimensionMismatch(format!("N has length {}, expected {m}", offset.len())));
        }
        if ito.m != m {
            return Err(Error::DimensionMismatch(format!("Ito structure has {} channels, M has {m}", ito.m)));
        }
        let finite = energy.iter().chain(coupling.iter()).chain(offset.iter()).all(|x| x.is_finite());
        if !finite {
            return Err(Error::DimensionMismatch("non-finite entry in E, M or N".into()));
        }
        Ok(Self { constants, energy, coupling, offset, ito })
    }

    pub fn n(&self) -> usize {
        self.constants.n()
    }

    pub fn m(&self) -> usize {
        self.coupling.nrows()
    }

    /// Same system with `(M, N)` replaced by `(sM, sN)`.
    pub fn scaled_coupling(&self, s: f64) -> Self {
        Self { coupling: &self.coupling * s, offset: &self.offset * s, ..self.clone() }
    }
}

/// The Pauli system with `E = e₃`, `M = [[1,0,0],[0,1,0]]`, `N = 0`.
pub fn pauli_worked_example() -> SystemSpec {
    SystemSpec::new(
        model::pauli_constants(),
        RVec::from_vec(vec![0.0, 0.0, 1.0]),
        RMat::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
        RVec::zeros(2),
    )
    .expect("worked example is well-formed")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DispersionLayout {
    Single,
    /// Variables ordered `(X⁽¹⁾, X⁽²⁾, X⁽¹²⁾)`, channels `(W⁽¹⁾, W⁽²⁾)`.
    Composite { n1: usize, n2: usize, m1: usize, m2: usize },
}

/// The dispersion map `X ↦ 2(Θ·X)Mᵀ`.
#[derive(Debug, Clone)]
pub struct Dispersion {
    pub theta: Vec<RMat>,
    pub coupling: RMat,
    pub layout: DispersionLayout,
}

impl Dispersion {
    pub fn apply(&self, x: &CVec) -> Result<CMat> {
        let theta: Vec<CMat> = self.theta.iter().map(linalg::to_complex).collect();
        let dot = model::dot_product(&theta, x)?;
        Ok(dot * linalg::to_complex(&self.coupling.transpose()) * c(2.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.coupling.iter().all(|&x| x == 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct QsdeCoefficients {
    pub a: RMat,
    pub a0: RMat,
    pub a_tilde: RMat,
    pub b: RVec,
    pub dispersion: Dispersion,
}

impl QsdeCoefficients {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
}

/// Drift and dispersion of the Heisenberg dynamics driven by vacuum fields.
pub fn build_coefficients(spec: &SystemSpec) -> Result<QsdeCoefficients> {
    let k = &spec.constants;
    if !k.alpha_is_real(1e-12) {
        return Err(Error::InvalidConstants("build_coefficients needs Im α = 0".into()));
    }
    let n = k.n();
    let m = &spec.coupling;
    let mt = m.transpose();
    let j = &spec.ito.j;
    let theta = k.theta();
    let re_beta = k.re_beta();

    let a0 = model::diam_product(theta, &spec.energy)? * 2.0;
    // Ã collects every term carrying the coupling, so it is exactly quadratic in (M, N).
    let mut a_tilde = model::diam_product(theta, &(&mt * j * &spec.offset))? * 2.0;
    let mut b = RVec::zeros(n);
    let jm = j * m;
    let mtjm = &mt * &jm;
    for l in 0..n {
        // θ_{ℓ••} and Re β_{ℓ••}: slices along the first index.
        let th_l = model::first_index_slice(theta, l);
        let rb_l = model::first_index_slice(re_beta, l);
        let inner = m * th_l + &jm * rb_l;
        a_tilde += &theta[l] * &mt * inner * 2.0;
        b += &theta[l] * (&mtjm * k.alpha().column(l)) * 2.0;
    }
    let a = &a0 + &a_tilde;
    Ok(QsdeCoefficients {
        a,
        a0,
        a_tilde,
        b,
        dispersion: Dispersion { theta: theta.to_vec(), coupling: m.clone(), layout: DispersionLayout::Single },
    })
}

/// `μ(t)` on each grid time, from the exponential of `[[A, b], [0, 0]]`.
pub fn mean_flow(coeffs: &QsdeCoefficients, mu0: &RVec, times: &[f64]) -> Result<Vec<RVec>> {
    let n = coeffs.n();
    if mu0.len() != n {
        return Err(Error::DimensionMismatch(format!("mu0 has length {}, expected {n}", mu0.len())));
    }
    let mut aug = RMat::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&coeffs.a);
    aug.view_mut((0, n), (n, 1)).copy_from(&coeffs.b);
    let mut start = RVec::zeros(n + 1);
    start.rows_mut(0, n).copy_from(mu0);
    start[n] = 1.0;
    times
        .iter()
        .map(|&t| {
            if !t.is_finite() {
                return Err(Error::OutOfRange(format!("non-finite time {t}")));
            }
            let e = linalg::expm(&(&aug * t))?;
            Ok((e * &start).rows(0, n).into_owned())
        })
        .collect()
}

/// `μ* = −A⁻¹b`, refused unless `A` is Hurwitz.
pub fn steady_mean(coeffs: &QsdeCoefficients) -> Result<RVec> {
    spectrum::require_hurwitz(&coeffs.a)?;
    linalg::solve_real(&coeffs.a, &(-&coeffs.b))
}

/// Limiting mixed moment `E(X_{j1}^{p1} ⋯)` under the invariant state.
pub fn equilibrium_moment(
    factor_indices: &[usize],
    powers: &[u32],
    constants: &StructureConstants,
    mu_star: &RVec,
) -> Result<C64> {
    if mu_star.len() != constants.n() {
        return Err(Error::DimensionMismatch("mu_star length differs from n".into()));
    }
    Ok(model::reduce_monomial(factor_indices, powers, constants)?.expectation(mu_star))
}

/// Invariant-state quasi-characteristic function `E e^{iuᵀX}`.
pub fn qcf(constants: &StructureConstants, mu_star: &RVec, u: &RVec) -> Result<C64> {
    let n = constants.n();
    if mu_star.len() != n || u.len() != n {
        return Err(Error::DimensionMismatch("qcf: mu_star and u must have length n".into()));
    }
    let uc = linalg::to_complex_vec(u);
    let mut gen = CMat::zeros(n + 1, n + 1);
    for k in 0..n {
        gen[(0, k + 1)] = uc[k];
    }
    let au = constants.alpha_complex() * &uc;
    gen.view_mut((1, 0), (n, 1)).copy_from(&au);
    gen.view_mut((1, 1), (n, n)).copy_from(&model::diam_product(constants.beta(), &uc)?);
    let e = linalg::expm(&(gen * c(0.0, 1.0)))?;
    let mut acc = e[(0, 0)];
    for k in 0..n {
        acc += e[(0, k + 1)] * mu_star[k];
    }
    Ok(acc)
}

/// Averaged work rate `Eᵀ(Ãμ + b)`.
pub fn energy_rate(spec: &SystemSpec, coeffs: &QsdeCoefficients, mu: &RVec) -> Result<f64> {
    if mu.len() != spec.n() {
        return Err(Error::DimensionMismatch("mu length differs from n".into()));
    }
    Ok(spec.energy.dot(&(&coeffs.a_tilde * mu + &coeffs.b)))
}

/// `E[X(s+τ), X(s)ᵀ] = 2i e^{τA} (Θ·μ(s))`.
pub fn mean_two_point_ccr(
    coeffs: &QsdeCoefficients,
    constants: &StructureConstants,
    mu_s: &RVec,
    tau: f64,
) -> Result<CMat> {
    if !(tau >= 0.0) {
        return Err(Error::OutOfRange(format!("tau must be non-negative, got {tau}")));
    }
    let ccr = model::dot_product(constants.theta(), mu_s)?;
    let flow = linalg::expm(&(&coeffs.a * tau))?;
    Ok(linalg::to_complex(&(flow * ccr)) * c(0.0, 2.0))
}
