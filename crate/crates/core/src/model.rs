// SPDX-License-Identifier: Apache-2.0

//! Structure constants of a finite-level operator algebra and the affine
//! reduction of polynomials in the system variables.
//!
//! The variables `X_1, …, X_n` close under multiplication as
//! `X_j X_k = α_jk I + Σ_ℓ β_jkℓ X_ℓ`. The array `β` is stored as `n`
//! Hermitian sections `β_ℓ = β[:, :, ℓ]`; its imaginary part `Θ` carries the
//! commutation relations `[X, Xᵀ] = 2i Θ·X`.
//!
//! All indices in this crate are zero-based.

use nalgebra::{ComplexField, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, RMat, RVec, C64};

pub const DEFAULT_TOL: f64 = 1e-10;

/// The pair `(α, β)` with the derived CCR array `Θ = Im β` cached.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    alpha_c: CMat,
    alpha: RMat,
    beta: Vec<CMat>,
    theta: Vec<RMat>,
    re_beta: Vec<RMat>,
}

impl StructureConstants {
    /// Builds constants from a complex `α` and the sections `β_ℓ`.
    ///
    /// Only shapes and finiteness are checked here; algebraic consistency is
    /// the job of [`validate`].
    pub fn new(alpha: CMat, beta: Vec<CMat>) -> Result<Self> {
        let n = alpha.nrows();
        if n == 0 {
            return Err(Error::DimensionMismatch("structure constants need n ≥ 1".into()));
        }
        if alpha.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "alpha is {}×{}, expected square",
                alpha.nrows(),
                alpha.ncols()
            )));
        }
        if beta.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "alpha is {n}×{n} but beta has {} sections",
                beta.len()
            )));
        }
        for (l, s) in beta.iter().enumerate() {
            if s.nrows() != n || s.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "beta section {l} is {}×{}, expected {n}×{n}",
                    s.nrows(),
                    s.ncols()
                )));
            }
        }
        let finite = alpha.iter().chain(beta.iter().flat_map(|s| s.iter())).all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(Error::InvalidConstants("non-finite entry in alpha or beta".into()));
        }
        let theta = beta.iter().map(linalg::imag_part).collect();
        let re_beta = beta.iter().map(linalg::real_part).collect();
        Ok(Self {
            alpha: linalg::real_part(&alpha),
            alpha_c: alpha,
            beta,
            theta,
            re_beta,
        })
    }

    pub fn from_real_alpha(alpha: RMat, beta: Vec<CMat>) -> Result<Self> {
        Self::new(linalg::to_complex(&alpha), beta)
    }

    pub fn n(&self) -> usize {
        self.alpha.nrows()
    }

    /// Real part of `α`. Downstream formulas assume `Im α = 0`.
    pub fn alpha(&self) -> &RMat {
        &self.alpha
    }

    pub fn alpha_complex(&self) -> &CMat {
        &self.alpha_c
    }

    pub fn beta(&self) -> &[CMat] {
        &self.beta
    }

    pub fn theta(&self) -> &[RMat] {
        &self.theta
    }

    pub fn re_beta(&self) -> &[RMat] {
        &self.re_beta
    }

    /// `β_jkℓ`.
    pub fn beta_at(&self, j: usize, k: usize, l: usize) -> C64 {
        self.beta[l][(j, k)]
    }

    pub fn theta_at(&self, j: usize, k: usize, l: usize) -> f64 {
        self.theta[l][(j, k)]
    }

    pub fn alpha_is_real(&self, tol: f64) -> bool {
        linalg::max_abs(&linalg::imag_part(&self.alpha_c)) <= tol
    }

    /// Builds constants from the full array, `beta[j][k][l] = β_jkℓ`.
    pub fn from_array(alpha: CMat, beta: &[Vec<Vec<C64>>]) -> Result<Self> {
        let n = alpha.nrows();
        if beta.len() != n || beta.iter().any(|r| r.len() != n || r.iter().any(|c| c.len() != n)) {
            return Err(Error::DimensionMismatch("beta array must be n×n×n".into()));
        }
        let sections = (0..n)
            .map(|l| CMat::from_fn(n, n, |j, k| beta[j][k][l]))
            .collect();
        Self::new(alpha, sections)
    }
}

/// Matrix `[a, b]` of the first-index slice `s[l, a, b]` of an array stored
/// by last-index sections, i.e. `θ_{ℓ••}` from the sections `Θ_k`.
pub fn first_index_slice<T: ComplexField<RealField = f64> + Copy>(
    sections: &[DMatrix<T>],
    l: usize,
) -> DMatrix<T> {
    let n = sections.len();
    DMatrix::from_fn(n, n, |a, b| sections[b][(l, a)])
}

/// Pauli algebra: `α = I₃`, `β = iΘ` with `θ_jkℓ` the Levi-Civita symbol.
pub fn pauli_constants() -> StructureConstants {
    let beta = (0..3)
        .map(|l| CMat::from_fn(3, 3, |j, k| c(0.0, levi_civita(j, k, l))))
        .collect();
    StructureConstants::new(CMat::identity(3, 3), beta).expect("Pauli constants are well-formed")
}

pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (2, 1, 0) | (0, 2, 1) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    AlphaSymmetric,
    BetaHermitian,
    AlphaReal,
    /// Scalar part of associativity.
    Con1,
    /// Linear part of associativity.
    Con2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub indices: Vec<usize>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
    pub max_residual: f64,
    pub alpha_min_eigenvalue: f64,
    /// Informational only; a negative `α` eigenvalue is not a violation.
    pub alpha_psd: bool,
    /// Preconditions that cannot be checked from `(α, β)` alone.
    pub assumptions: Vec<String>,
}

/// Checks symmetry of `α`, Hermiticity of every `β_ℓ`, `Im α = 0`, and the
/// two associativity constraints over every index tuple.
pub fn validate(constants: &StructureConstants, tol: f64) -> Result<ValidationReport> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::OutOfRange(format!("tolerance must be positive, got {tol}")));
    }
    let n = constants.n();
    let alpha = constants.alpha_complex();
    let beta = constants.beta();
    let mut violations = Vec::new();
    let mut max_residual: f64 = 0.0;
    let mut record = |constraint, indices: Vec<usize>, residual: f64| {
        max_residual = max_residual.max(residual);
        if residual > tol {
            violations.push(Violation { constraint, indices, residual });
        }
    };

    for j in 0..n {
        for k in j + 1..n {
            record(Constraint::AlphaSymmetric, vec![j, k], (alpha[(j, k)] - alpha[(k, j)]).norm());
        }
    }
    for (l, s) in beta.iter().enumerate() {
        for j in 0..n {
            for k in j..n {
                record(Constraint::BetaHermitian, vec![j, k, l], (s[(j, k)] - s[(k, j)].conj()).norm());
            }
        }
    }
    for j in 0..n {
        for k in 0..n {
            record(Constraint::AlphaReal, vec![j, k], alpha[(j, k)].im.abs());
        }
    }
    for j in 0..n {
        for k in 0..n {
            for s in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for l in 0..n {
                    acc += alpha[(l, s)] * beta[l][(j, k)] - alpha[(j, l)] * beta[l][(k, s)];
                }
                record(Constraint::Con1, vec![j, k, s], acc.norm());
            }
        }
    }
    for j in 0..n {
        for k in 0..n {
            for s in 0..n {
                for r in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    if r == s {
                        acc += alpha[(j, k)];
                    }
                    if r == j {
                        acc -= alpha[(k, s)];
                    }
                    for l in 0..n {
                        acc += beta[l][(j, k)] * beta[r][(l, s)] - beta[l][(k, s)] * beta[r][(j, l)];
                    }
                    record(Constraint::Con2, vec![j, k, s, r], acc.norm());
                }
            }
        }
    }

    let alpha_min_eigenvalue = linalg::min_symmetric_eigenvalue(constants.alpha())?;
    Ok(ValidationReport {
        passed: violations.is_empty(),
        violations,
        max_residual,
        alpha_min_eigenvalue,
        alpha_psd: alpha_min_eigenvalue >= -tol,
        assumptions: vec!["operators I, X_1, ..., X_n assumed linearly independent".into()],
    })
}

/// Validates and turns a failed report into an error.
pub fn require_valid(constants: &StructureConstants, tol: f64) -> Result<ValidationReport> {
    let report = validate(constants, tol)?;
    if let Some(v) = report.violations.first() {
        return Err(Error::InvalidConstants(format!(
            "{} violation(s), first {:?} at {:?} with residual {:.3e}",
            report.violations.len(),
            v.constraint,
            v.indices,
            v.residual
        )));
    }
    Ok(report)
}

fn check_sections<T>(sections: &[DMatrix<T>], len: usize) -> Result<()>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = sections.len();
    if len != n {
        return Err(Error::DimensionMismatch(format!("array has {n} sections, vector has length {len}")));
    }
    if sections.iter().any(|s| s.nrows() != n || s.ncols() != n) {
        return Err(Error::DimensionMismatch("array sections must be n×n".into()));
    }
    Ok(())
}

/// `β⋄u = [β_1 u, …, β_n u]`, assembled column by column.
pub fn diam_product<T>(sections: &[DMatrix<T>], u: &DVector<T>) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    check_sections(sections, u.len())?;
    let n = sections.len();
    let mut out = DMatrix::<T>::zeros(n, n);
    for (l, s) in sections.iter().enumerate() {
        out.set_column(l, &(s * u));
    }
    Ok(out)
}

/// `β·u = Σ_ℓ β_ℓ u_ℓ`.
pub fn dot_product<T>(sections: &[DMatrix<T>], u: &DVector<T>) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    check_sections(sections, u.len())?;
    let n = sections.len();
    let mut out = DMatrix::<T>::zeros(n, n);
    for (l, s) in sections.iter().enumerate() {
        out += s * u[l];
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormBounds {
    pub tau: Vec<f64>,
    pub gamma: f64,
    pub bounds: Vec<f64>,
}

/// Operator-norm bounds `‖X_k‖ ≤ |τ_k|/2 + γ` with `τ_k = Tr β_k` and
/// `γ = sqrt(Tr α + |τ|²/4)`.
pub fn norm_bounds(constants: &StructureConstants) -> Result<NormBounds> {
    let tau: Vec<f64> = constants.beta().iter().map(|s| s.trace().re).collect();
    let tau_sq: f64 = tau.iter().map(|t| t * t).sum();
    let radicand = constants.alpha().trace() + tau_sq / 4.0;
    if radicand < 0.0 {
        return Err(Error::InvalidConstants(format!(
            "Tr α + |τ|²/4 = {radicand:.3e} is negative"
        )));
    }
    let gamma = radicand.sqrt();
    let bounds = tau.iter().map(|t| t.abs() / 2.0 + gamma).collect();
    Ok(NormBounds { tau, gamma, bounds })
}

/// `c0 I + cᵀX`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineOperator {
    pub c0: C64,
    pub c: CVec,
}

impl AffineOperator {
    pub fn identity(n: usize) -> Self {
        Self { c0: c(1.0, 0.0), c: CVec::zeros(n) }
    }

    /// The single variable `X_j`.
    pub fn variable(n: usize, j: usize) -> Result<Self> {
        if j >= n {
            return Err(Error::IndexOutOfRange(format!("variable index {j} with n = {n}")));
        }
        let mut c_vec = CVec::zeros(n);
        c_vec[j] = c(1.0, 0.0);
        Ok(Self { c0: c(0.0, 0.0), c: c_vec })
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.c0.im.abs() <= tol && self.c.iter().all(|z| z.im.abs() <= tol)
    }

    /// Expectation given the mean vector of the variables.
    pub fn expectation(&self, mu: &RVec) -> C64 {
        self.c0 + self.c.iter().zip(mu.iter()).map(|(a, &m)| a * m).sum::<C64>()
    }

    /// Largest coefficient difference.
    pub fn distance(&self, other: &Self) -> f64 {
        let tail = (&self.c - &other.c).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        tail.max((self.c0 - other.c0).norm())
    }
}

pub fn affine_mul(
    a: &AffineOperator,
    b: &AffineOperator,
    constants: &StructureConstants,
) -> Result<AffineOperator> {
    let n = constants.n();
    if a.c.len() != n || b.c.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "affine operands of length {} and {} with n = {n}",
            a.c.len(),
            b.c.len()
        )));
    }
    let alpha = constants.alpha_complex();
    let quad = (a.c.transpose() * alpha * &b.c)[(0, 0)];
    let mut lin = &b.c * a.c0 + &a.c * b.c0;
    for (l, s) in constants.beta().iter().enumerate() {
        lin[l] += (a.c.transpose() * s * &b.c)[(0, 0)];
    }
    Ok(AffineOperator { c0: a.c0 * b.c0 + quad, c: lin })
}

/// Reduces `X_{j1}^{p1} X_{j2}^{p2} …` (rightward order) to affine form.
pub fn reduce_monomial(
    factor_indices: &[usize],
    powers: &[u32],
    constants: &StructureConstants,
) -> Result<AffineOperator> {
    if factor_indices.len() != powers.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} factor indices but {} powers",
            factor_indices.len(),
            powers.len()
        )));
    }
    let n = constants.n();
    let mut acc = AffineOperator::identity(n);
    for (&j, &p) in factor_indices.iter().zip(powers) {
        if p == 0 {
            return Err(Error::OutOfRange(format!("power of X_{j} must be at least 1")));
        }
        let x = AffineOperator::variable(n, j)?;
        for _ in 0..p {
            acc = affine_mul(&acc, &x, constants)?;
        }
    }
    Ok(acc)
}

/// `XᵀRX = ⟨R, α⟩ + Σ_ℓ ⟨R, β_ℓ⟩ X_ℓ` for symmetric `R`.
pub fn quadratic_form(r: &RMat, constants: &StructureConstants) -> Result<AffineOperator> {
    let n = constants.n();
    if r.nrows() != n || r.ncols() != n {
        return Err(Error::DimensionMismatch(format!("R is {}×{}, expected {n}×{n}", r.nrows(), r.ncols())));
    }
    let residual = linalg::symmetric_residual(r);
    if residual > 1e-12 * (1.0 + linalg::max_abs(r)) {
        return Err(Error::NotSymmetric { residual });
    }
    let pair = |m: &CMat| -> C64 { r.iter().zip(m.iter()).map(|(&x, &z)| z * x).sum() };
    let c0 = pair(constants.alpha_complex());
    let lin = CVec::from_iterator(n, constants.beta().iter().map(pair));
    Ok(AffineOperator { c0, c: lin })
}
