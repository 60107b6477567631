// SPDX-License-Identifier: Apache-2.0

//! Oscillatory structure of the isolated drift `A₀ = αΥ` for `α ≻ 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, RMat, RVec, C64};

const ALPHA_PD_TOL: f64 = 1e-12;

/// `Υ = α⁻¹A₀`, antisymmetric whenever the constants are consistent.
pub fn upsilon(a0: &RMat, alpha: &RMat) -> Result<RMat> {
    if a0.shape() != alpha.shape() || !a0.is_square() {
        return Err(Error::DimensionMismatch("A0 and alpha must be square of equal size".into()));
    }
    linalg::require_positive_definite(alpha, ALPHA_PD_TOL)?;
    let ups = alpha
        .clone()
        .lu()
        .solve(a0)
        .ok_or_else(|| Error::Numeric("singular alpha".into()))?;
    let residual = linalg::max_abs(&(&ups + ups.transpose()));
    if residual > 1e-10 * (1.0 + linalg::max_abs(&ups)) {
        return Err(Error::InvalidConstants(format!(
            "α⁻¹A₀ is not antisymmetric (residual {residual:.3e})"
        )));
    }
    Ok(ups)
}

#[derive(Debug, Clone)]
pub struct EigenModes {
    /// Eigenfrequencies, descending.
    pub omegas: Vec<f64>,
    /// Unitary eigenvectors of `−i√α Υ √α`, column `k` for `omegas[k]`.
    pub v: CMat,
    /// `√α V`.
    pub sigma: CMat,
    /// `V* α^{−1/2}`.
    pub sigma_inv: CMat,
    pub zero_tol: f64,
    pub sqrt_alpha: RMat,
    pub inv_sqrt_alpha: RMat,
    /// False when a nonzero frequency is repeated, so the conjugate pairing
    /// depends on the basis chosen inside the eigenspace.
    pub pairing_unique: bool,
}

impl EigenModes {
    pub fn n(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_zero(&self, k: usize) -> bool {
        self.omegas[k].abs() <= self.zero_tol
    }

    pub fn zero_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&k| self.is_zero(k)).collect()
    }

    pub fn positive_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&k| self.omegas[k] > self.zero_tol).collect()
    }

    /// `iΣ diag(ω) Σ⁻¹`, which should reproduce `A₀`.
    pub fn reconstruct(&self) -> CMat {
        let d = CMat::from_diagonal(&linalg::to_complex_vec(&RVec::from_vec(self.omegas.clone())));
        &self.sigma * d * &self.sigma_inv * c(0.0, 1.0)
    }
}

/// Makes the largest-modulus entry (first one on ties) real positive.
fn fix_phase(v: &mut CMat, col: usize) {
    let mags: Vec<f64> = v.column(col).iter().map(|z| z.norm()).collect();
    let top = mags.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return;
    }
    let pivot = mags.iter().position(|&m| m >= top * (1.0 - 1e-12)).unwrap_or(0);
    let z = v[(pivot, col)];
    let phase = z.conj() / z.norm();
    let mut column = v.column_mut(col);
    column *= phase;
}

pub fn eigenmodes(a0: &RMat, alpha: &RMat) -> Result<EigenModes> {
    let ups = upsilon(a0, alpha)?;
    let n = a0.nrows();
    let sqrt_alpha = linalg::symmetric_sqrt(alpha)?;
    let inv_sqrt_alpha = linalg::symmetric_inv_sqrt(alpha, 0.0)?;
    let s = &sqrt_alpha * &ups * &sqrt_alpha;
    let s = (&s - s.transpose()) * 0.5;
    let herm = linalg::to_complex(&s) * c(0.0, -1.0);
    let (asc, vecs) = linalg::hermitian_eigen(&herm)?;

    let omegas: Vec<f64> = asc.iter().rev().copied().collect();
    let max_abs_omega = omegas.iter().fold(0.0_f64, |a, w| a.max(w.abs()));
    let zero_tol = 1e-9 * max_abs_omega.max(1.0);
    let mut v = CMat::zeros(n, n);
    for k in 0..n {
        v.set_column(k, &vecs.column(n - 1 - k));
    }

    let positive = omegas.iter().filter(|&&w| w > zero_tol).count();
    let negative = omegas.iter().filter(|&&w| w < -zero_tol).count();
    if positive != negative {
        return Err(Error::Numeric(format!(
            "eigenfrequencies not symmetric about zero ({positive} positive, {negative} negative)"
        )));
    }
    for k in 0..positive {
        fix_phase(&mut v, k);
        let mirrored = v.column(k).map(|z| z.conj());
        v.set_column(n - 1 - k, &mirrored);
    }

    // Real orthonormal basis of the kernel of S for the zero frequencies.
    let zeros = n - 2 * positive;
    if zeros > 0 {
        let kernel = if linalg::max_abs(&s) == 0.0 {
            RMat::identity(n, n)
        } else {
            linalg::symmetric_eigen(&(s.transpose() * &s))?.1
        };
        for z in 0..zeros {
            let col = positive + z;
            v.set_column(col, &linalg::to_complex_vec(&kernel.column(z).into_owned()));
            fix_phase(&mut v, col);
        }
    }

    let pairing_unique = (1..positive).all(|k| (omegas[k - 1] - omegas[k]).abs() > zero_tol);
    let sigma = linalg::to_complex(&sqrt_alpha) * &v;
    let sigma_inv = v.adjoint() * linalg::to_complex(&inv_sqrt_alpha);
    Ok(EigenModes { omegas, v, sigma, sigma_inv, zero_tol, sqrt_alpha, inv_sqrt_alpha, pairing_unique })
}

/// Largest period `2π / min ω⁺` of the nontrivial oscillations.
pub fn oscillation_period(modes: &EigenModes) -> Option<f64> {
    let min_pos = modes
        .omegas
        .iter()
        .copied()
        .filter(|&w| w > modes.zero_tol)
        .fold(f64::INFINITY, f64::min);
    min_pos.is_finite().then(|| 2.0 * std::f64::consts::PI / min_pos)
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeCoordinate {
    /// `ξ = (Re v)ᵀ α^{−1/2} X`, `η = −(Im v)ᵀ α^{−1/2} X`, rotating at `omega`.
    Oscillatory { index: usize, omega: f64, xi: Vec<f64>, eta: Vec<f64> },
    /// `vᵀ α^{−1/2} X` with real `v`.
    Static { index: usize, row: Vec<f64> },
}

pub fn mode_coordinates(modes: &EigenModes) -> Vec<ModeCoordinate> {
    let n = modes.n();
    let mut out = Vec::new();
    let row_of = |col: &dyn Fn(C64) -> f64, k: usize| -> Vec<f64> {
        let v = RVec::from_iterator(n, modes.v.column(k).iter().map(|&z| col(z)));
        (modes.inv_sqrt_alpha.transpose() * v).iter().copied().collect()
    };
    for k in 0..n {
        if modes.omegas[k] > modes.zero_tol {
            out.push(ModeCoordinate::Oscillatory {
                index: k,
                omega: modes.omegas[k],
                xi: row_of(&|z| z.re, k),
                eta: row_of(&|z| -z.im, k),
            });
        } else if modes.is_zero(k) {
            out.push(ModeCoordinate::Static { index: k, row: row_of(&|z| z.re, k) });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::model::pauli_constants;
    use crate::qsde::{build_coefficients, pauli_worked_example};

    fn pauli_a0() -> RMat {
        build_coefficients(&pauli_worked_example()).unwrap().a0
    }

    #[test]
    fn upsilon_of_pauli_is_a0() {
        let a0 = pauli_a0();
        assert_eq!(upsilon(&a0, pauli_constants().alpha()).unwrap(), a0);
        assert_eq!(upsilon(&RMat::zeros(3, 3), &RMat::identity(3, 3)).unwrap(), RMat::zeros(3, 3));
        let singular = RMat::from_diagonal(&RVec::from_vec(vec![1.0, 1.0, 0.0]));
        assert!(matches!(upsilon(&a0, &singular), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn pauli_modes() {
        let m = eigenmodes(&pauli_a0(), &RMat::identity(3, 3)).unwrap();
        assert!((m.omegas[0] - 2.0).abs() < 1e-14);
        assert!((m.omegas[1]).abs() < 1e-14);
        assert!((m.omegas[2] + 2.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m.v[(0, 0)] - c(s, 0.0)).norm() < 1e-14);
        assert!((m.v[(1, 0)] - c(0.0, -s)).norm() < 1e-14);
        assert!((m.v[(2, 1)] - c(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(m.v[(0, 2)], m.v[(0, 0)].conj());
        assert!(max_abs(&(m.reconstruct() - linalg::to_complex(&pauli_a0()))) < 1e-13);
        assert!((oscillation_period(&m).unwrap() - std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn pauli_mode_rows() {
        let m = eigenmodes(&pauli_a0(), &RMat::identity(3, 3)).unwrap();
        let rows = mode_coordinates(&m);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match &rows[0] {
            ModeCoordinate::Oscillatory { xi, eta, omega, .. } => {
                assert!((omega - 2.0).abs() < 1e-14);
                assert!((xi[0] - s).abs() < 1e-14 && xi[1].abs() < 1e-14);
                assert!((eta[1] - s).abs() < 1e-14 && eta[0].abs() < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
        match &rows[1] {
            ModeCoordinate::Static { row, .. } => assert_eq!(row, &vec![0.0, 0.0, 1.0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_energy_gives_identity_modes() {
        let alpha = RMat::from_diagonal(&RVec::from_vec(vec![4.0, 1.0, 9.0]));
        let m = eigenmodes(&RMat::zeros(3, 3), &alpha).unwrap();
        assert_eq!(m.omegas, vec![0.0; 3]);
        assert_eq!(m.v, CMat::identity(3, 3));
        assert!(oscillation_period(&m).is_none());
        let rows = mode_coordinates(&m);
        for (k, r) in rows.iter().enumerate() {
            match r {
                ModeCoordinate::Static { row, .. } => {
                    for (j, x) in row.iter().enumerate() {
                        let want = if j == k { 1.0 / alpha[(k, k)].sqrt() } else { 0.0 };
                        assert!((x - want).abs() < 1e-15);
                    }
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn period_uses_smallest_positive_frequency() {
        // Block rotation with frequencies ±5, ±3.
        let mut a0 = RMat::zeros(4, 4);
        a0[(0, 1)] = -5.0;
        a0[(1, 0)] = 5.0;
        a0[(2, 3)] = -3.0;
        a0[(3, 2)] = 3.0;
        let m = eigenmodes(&a0, &RMat::identity(4, 4)).unwrap();
        assert!((m.omegas[0] - 5.0).abs() < 1e-13 && (m.omegas[3] + 5.0).abs() < 1e-13);
        assert!((oscillation_period(&m).unwrap() - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-13);
        assert!(m.pairing_unique);
    }
}
