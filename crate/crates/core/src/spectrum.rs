// SPDX-License-Identifier: Apache-2.0

//! Spectral abscissas and the second-moment operator `Λ = Φ + U`,
//! `Λ(Z) = AZ + ZAᵀ − 4 Σ_jk z_jk Θ_j MᵀΩM Θ_k`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, RMat, RVec, C64};
use crate::qsde::{QsdeCoefficients, SystemSpec};

pub const HURWITZ_MARGIN: f64 = 1e-10;
/// Largest `n` for which the dense `n² × n²` matrix of `Λ` is built.
pub const MAX_LAMBDA_DIM: usize = 16;

/// `max Re λ(A)`.
pub fn spectral_abscissa(a: &RMat) -> Result<f64> {
    Ok(leading_eigenvalue(&linalg::eigenvalues_real(a)?).map_or(f64::NEG_INFINITY, |z| z.re))
}

pub fn spectral_abscissa_complex(a: &CMat) -> Result<f64> {
    Ok(leading_eigenvalue(&linalg::eigenvalues_complex(a)?).map_or(f64::NEG_INFINITY, |z| z.re))
}

fn leading_eigenvalue(ev: &[C64]) -> Option<C64> {
    ev.iter().copied().max_by(|x, y| x.re.total_cmp(&y.re))
}

/// Returns `σ(A)` when `σ(A) < −1e−10`, otherwise the offending eigenvalue.
pub fn require_hurwitz(a: &RMat) -> Result<f64> {
    let ev = linalg::eigenvalues_real(a)?;
    let lead = leading_eigenvalue(&ev).ok_or_else(|| Error::DimensionMismatch("empty drift matrix".into()))?;
    if lead.re < -HURWITZ_MARGIN {
        Ok(lead.re)
    } else {
        Err(Error::NotHurwitz { abscissa: lead.re, eigenvalue: lead })
    }
}

/// Averages eigenvalues that sit within `tol` of each other (single linkage).
///
/// A defective eigenvalue of multiplicity `k` is computed with error of order
/// `ε^{1/k}`, but the mean of its cluster is accurate to round-off.
pub fn cluster_eigenvalues(ev: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let n = ev.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (ev[i] - ev[j]).norm() <= tol {
                let (ri, rj) = (root(&mut label, i), root(&mut label, j));
                label[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut out: Vec<(usize, C64, usize)> = Vec::new();
    for i in 0..n {
        let r = root(&mut label, i);
        match out.iter_mut().find(|(k, _, _)| *k == r) {
            Some((_, sum, count)) => {
                *sum += ev[i];
                *count += 1;
            }
            None => out.push((r, ev[i], 1)),
        }
    }
    out.into_iter().map(|(_, sum, count)| (sum / count as f64, count)).collect()
}

#[derive(Debug, Clone)]
pub struct LambdaOperator {
    pub a: RMat,
    pub theta: Vec<RMat>,
    pub coupling: RMat,
    pub omega: CMat,
    /// `MᵀΩM`.
    q: CMat,
    matrix: CMat,
}

impl LambdaOperator {
    pub fn new(a: RMat, theta: Vec<RMat>, coupling: RMat, omega: CMat) -> Result<Self> {
        let n = a.nrows();
        if n > MAX_LAMBDA_DIM {
            return Err(Error::Capability(format!(
                "second-moment operator limited to n ≤ {MAX_LAMBDA_DIM}, got n = {n}"
            )));
        }
        if !a.is_square() || theta.len() != n || theta.iter().any(|t| t.shape() != (n, n)) {
            return Err(Error::DimensionMismatch("A and Θ sections must be n×n with n sections".into()));
        }
        if coupling.ncols() != n || omega.shape() != (coupling.nrows(), coupling.nrows()) {
            return Err(Error::DimensionMismatch("M must be m×n and Ω m×m".into()));
        }
        let mc = linalg::to_complex(&coupling);
        let q = mc.transpose() * &omega * &mc;
        let ac = linalg::to_complex(&a);
        let mut matrix = linalg::kron_sum(&ac, &ac);
        let theta_c: Vec<CMat> = theta.iter().map(linalg::to_complex).collect();
        for k in 0..n {
            let right = &q * &theta_c[k];
            for j in 0..n {
                let block = &theta_c[j] * &right * c(-4.0, 0.0);
                let mut col = matrix.column_mut(j + k * n);
                col += linalg::vec_cols(&block);
            }
        }
        Ok(Self { a, theta, coupling, omega, q, matrix })
    }

    pub fn from_system(spec: &SystemSpec, coeffs: &QsdeCoefficients) -> Result<Self> {
        Self::new(
            coeffs.a.clone(),
            spec.constants.theta().to_vec(),
            spec.coupling.clone(),
            spec.ito.omega.clone(),
        )
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Direct evaluation of `Λ(Z)`.
    pub fn apply(&self, z: &CMat) -> Result<CMat> {
        let n = self.n();
        if z.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("Z must be {n}×{n}")));
        }
        let ac = linalg::to_complex(&self.a);
        let mut out = &ac * z + z * ac.transpose();
        let theta_c: Vec<CMat> = self.theta.iter().map(linalg::to_complex).collect();
        for j in 0..n {
            for k in 0..n {
                if z[(j, k)] != c(0.0, 0.0) {
                    out -= &theta_c[j] * &self.q * &theta_c[k] * (z[(j, k)] * 4.0);
                }
            }
        }
        Ok(out)
    }

    /// `U(Z)` alone.
    pub fn apply_u(&self, z: &CMat) -> Result<CMat> {
        let ac = linalg::to_complex(&self.a);
        Ok(self.apply(z)? - (&ac * z + z * ac.transpose()))
    }

    /// Column-major matrix `A ⊕ A + Ψ` with `vec Λ(Z) = (A ⊕ A + Ψ) vec Z`.
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Matrix of `Λ` restricted to Hermitian matrices, in [`hermitian_basis`].
    pub fn hermitian_matrix(&self) -> RMat {
        let n = self.n();
        let basis = hermitian_basis(n);
        let images: Vec<CMat> = basis
            .iter()
            .map(|h| linalg::unvec(&(&self.matrix * linalg::vec_cols(h)), n, n))
            .collect();
        RMat::from_fn(basis.len(), basis.len(), |r, col| frobenius_pair(&basis[r], &images[col]).re)
    }
}

pub fn lambda_matrix(op: &LambdaOperator) -> CMat {
    op.matrix.clone()
}

/// `Tr(X* Y)`.
pub fn frobenius_pair(x: &CMat, y: &CMat) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Orthonormal basis of the real space of Hermitian `n × n` matrices:
/// diagonal units, then `(E_jk + E_kj)/√2` and `i(E_jk − E_kj)/√2` for `j < k`.
pub fn hermitian_basis(n: usize) -> Vec<CMat> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        let mut h = CMat::zeros(n, n);
        h[(j, j)] = c(1.0, 0.0);
        out.push(h);
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut h = CMat::zeros(n, n);
            h[(j, k)] = c(s, 0.0);
            h[(k, j)] = c(s, 0.0);
            out.push(h);
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut h = CMat::zeros(n, n);
            h[(j, k)] = c(0.0, s);
            h[(k, j)] = c(0.0, -s);
            out.push(h);
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct HermitianAbscissa {
    /// `σ(Λ|H_n)`.
    pub abscissa: f64,
    /// Largest real eigenvalue of `Λ|H_n`; equals the abscissa because
    /// `e^{tΛ}` preserves the cone of positive semi-definite matrices.
    pub leading_real_eigenvalue: f64,
    /// Largest `|Im|` over the whole restricted spectrum. Need not vanish.
    pub max_imag_part: f64,
}

/// `σ(Λ|H_n)` from the real matrix of the restriction.
pub fn lambda_hermitian_abscissa(op: &LambdaOperator) -> Result<HermitianAbscissa> {
    let r = op.hermitian_matrix();
    let ev = linalg::eigenvalues_real(&r)?;
    let scale = ev.iter().fold(1.0_f64, |acc, z| acc.max(z.norm()));
    let clusters = cluster_eigenvalues(&ev, 1e-6 * scale);
    let abscissa = clusters.iter().map(|(z, _)| z.re).fold(f64::NEG_INFINITY, f64::max);
    let leading_real_eigenvalue = clusters
        .iter()
        .filter(|(z, _)| z.im.abs() <= 1e-8 * scale)
        .map(|(z, _)| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if abscissa - leading_real_eigenvalue > 1e-8 * scale {
        return Err(Error::Numeric(format!(
            "leading eigenvalue of the Hermitian restriction is not real: abscissa {abscissa:.6e}, \
             best real eigenvalue {leading_real_eigenvalue:.6e}"
        )));
    }
    let max_imag_part = ev.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()));
    Ok(HermitianAbscissa { abscissa, leading_real_eigenvalue, max_imag_part })
}

/// `Tr e^{tΛ}(I)` on each grid time.
pub fn pi_trace_flow(op: &LambdaOperator, times: &[f64]) -> Result<Vec<f64>> {
    let n = op.n();
    let r = op.hermitian_matrix();
    // Coordinates of I in the Hermitian basis are the first n units.
    let mut start = RVec::zeros(n * n);
    start.rows_mut(0, n).fill(1.0);
    times
        .iter()
        .map(|&t| {
            if !(t >= 0.0) {
                return Err(Error::OutOfRange(format!("times must be non-negative, got {t}")));
            }
            let z = linalg::expm(&(&r * t))? * &start;
            let tr = z.rows(0, n).sum();
            if tr < -1e-9 {
                return Err(Error::Numeric(format!("Tr e^(tΛ)(I) = {tr:.3e} is negative at t = {t}")));
            }
            Ok(tr)
        })
        .collect()
}

/// `e^{tΛ}(Z0)` for a general initial matrix.
pub fn lambda_flow(op: &LambdaOperator, z0: &CMat, t: f64) -> Result<CMat> {
    let n = op.n();
    let v = linalg::expm(&(op.matrix() * c(t, 0.0)))? * linalg::vec_cols(z0);
    Ok(linalg::unvec(&v, n, n))
}

/// `‖e^{tA}‖_F²` on each grid time.
pub fn flow_frobenius_sq(a: &RMat, times: &[f64]) -> Result<Vec<f64>> {
    times.iter().map(|&t| Ok(linalg::expm(&(a * t))?.norm_squared())).collect()
}
