// SPDX-License-Identifier: Apache-2.0

//! Dense linear-algebra helpers shared by every analysis module.
//!
//! Vectorisation is column-major throughout: `vec(Z)` stacks the columns of
//! `Z`, so that `vec(A Z B) = (Bᵀ ⊗ A) vec(Z)`. This matches the storage
//! order of [`nalgebra::DMatrix`].

use nalgebra::storage::RawStorage;
use nalgebra::{ComplexField, DMatrix, DVector, Dim, Matrix, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<C64>;
pub type RVec = DVector<f64>;
pub type CVec = DVector<C64>;

const SCHUR_MAX_ITER: usize = 100_000;
const EIGEN_MAX_ITER: usize = 100_000;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn to_complex_vec(v: &RVec) -> CVec {
    v.map(|x| C64::new(x, 0.0))
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

pub fn imag_part(m: &CMat) -> RMat {
    m.map(|z| z.im)
}

/// Largest entry modulus.
pub fn max_abs<T, R, C, S>(m: &Matrix<T, R, C, S>) -> f64
where
    T: ComplexField<RealField = f64> + Copy,
    R: Dim,
    C: Dim,
    S: RawStorage<T, R, C>,
{
    m.iter().fold(0.0, |acc, z| acc.max(z.modulus()))
}

pub fn kron<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a.kronecker(b)
}

/// Column-major vectorisation.
pub fn vec_cols<T: ComplexField<RealField = f64> + Copy>(m: &DMatrix<T>) -> DVector<T> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_cols`].
pub fn unvec<T: ComplexField<RealField = f64> + Copy>(
    v: &DVector<T>,
    rows: usize,
    cols: usize,
) -> DMatrix<T> {
    assert_eq!(v.len(), rows * cols, "unvec: length mismatch");
    DMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Kronecker sum `I ⊗ A + B ⊗ I`, the column-major matrix of `Z ↦ AZ + ZBᵀ`.
pub fn kron_sum<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let ia = DMatrix::<T>::identity(b.nrows(), b.ncols());
    let ib = DMatrix::<T>::identity(a.nrows(), a.ncols());
    kron(&ia, a) + kron(b, &ib)
}

pub fn one_norm<T: ComplexField<RealField = f64> + Copy>(m: &DMatrix<T>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn symmetric_residual(m: &RMat) -> f64 {
    max_abs(&(m - m.transpose()))
}

pub fn hermitian_residual(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

// Padé coefficients of the diagonal [m/m] approximants to exp, m = 3, 5, 7, 9, 13.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
// 1-norm bounds below which the degree-m approximant meets unit round-off.
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.539_398_330_063_23e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068e0;
const THETA13: f64 = 5.371920351148152e0;

fn scaled<T: ComplexField<RealField = f64> + Copy>(m: &DMatrix<T>, s: f64) -> DMatrix<T> {
    m * T::from_real(s)
}

fn pade_low<T: ComplexField<RealField = f64> + Copy>(
    a: &DMatrix<T>,
    coeffs: &[f64],
) -> (DMatrix<T>, DMatrix<T>) {
    let n = a.nrows();
    let a2 = a * a;
    let mut even = DMatrix::<T>::identity(n, n);
    let mut u_inner = scaled(&even, coeffs[1]);
    let mut v = scaled(&even, coeffs[0]);
    let mut k = 2;
    while k < coeffs.len() {
        even = &even * &a2;
        v += scaled(&even, coeffs[k]);
        if k + 1 < coeffs.len() {
            u_inner += scaled(&even, coeffs[k + 1]);
        }
        k += 2;
    }
    (a * u_inner, v)
}

fn pade13<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let b = &PADE13;
    let n = a.nrows();
    let id = DMatrix::<T>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let u = a
        * (&a6 * u_hi
            + scaled(&a6, b[7])
            + scaled(&a4, b[5])
            + scaled(&a2, b[3])
            + scaled(&id, b[1]));
    let v_hi = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let v = &a6 * v_hi + scaled(&a6, b[6]) + scaled(&a4, b[4]) + scaled(&a2, b[2]) + scaled(&id, b[0]);
    (u, v)
}

/// Matrix exponential by scaling and squaring with a Padé approximant of
/// degree at most 13.
pub fn expm<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("expm of a non-square matrix".into()));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(a.clone());
    }
    if a.iter().any(|z| !z.modulus().is_finite()) {
        return Err(Error::Numeric("expm of a matrix with non-finite entries".into()));
    }
    let norm = one_norm(a);
    let (u, v, squarings) = if norm <= THETA3 {
        let (u, v) = pade_low(a, &PADE3);
        (u, v, 0)
    } else if norm <= THETA5 {
        let (u, v) = pade_low(a, &PADE5);
        (u, v, 0)
    } else if norm <= THETA7 {
        let (u, v) = pade_low(a, &PADE7);
        (u, v, 0)
    } else if norm <= THETA9 {
        let (u, v) = pade_low(a, &PADE9);
        (u, v, 0)
    } else {
        let s = (norm / THETA13).log2().ceil().max(0.0) as i32;
        let a_scaled = scaled(a, 2f64.powi(-s));
        let (u, v) = pade13(&a_scaled);
        (u, v, s)
    };
    let numer = &v + &u;
    let denom = &v - &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .ok_or_else(|| Error::Numeric("singular Padé denominator in expm".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues_real(m: &RMat) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eigenvalues of a non-square matrix".into()));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::Numeric("real Schur decomposition did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Eigenvalues of a complex square matrix.
pub fn eigenvalues_complex(m: &CMat) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eigenvalues of a non-square matrix".into()));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::Numeric("complex Schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|k| t[(k, k)]).collect())
}

/// Symmetric eigen-decomposition, eigenvalues ascending with matching columns.
pub fn symmetric_eigen(m: &RMat) -> Result<(Vec<f64>, RMat)> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = RMat::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    Ok((values, vectors))
}

/// Hermitian eigen-decomposition, eigenvalues ascending with matching columns.
pub fn hermitian_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(herm, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numeric("Hermitian eigensolver did not converge".into()))?;
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    Ok((values, vectors))
}

pub fn min_symmetric_eigenvalue(m: &RMat) -> Result<f64> {
    Ok(symmetric_eigen(m)?.0.first().copied().unwrap_or(0.0))
}

pub fn max_symmetric_eigenvalue(m: &RMat) -> Result<f64> {
    Ok(symmetric_eigen(m)?.0.last().copied().unwrap_or(0.0))
}

/// `f(M)` for a symmetric `M`, applied to eigenvalues clamped below at `floor`.
pub fn symmetric_function(m: &RMat, floor: f64, f: impl Fn(f64) -> f64) -> Result<RMat> {
    let (values, vectors) = symmetric_eigen(m)?;
    let diag = RVec::from_iterator(values.len(), values.iter().map(|&x| f(x.max(floor))));
    Ok(&vectors * RMat::from_diagonal(&diag) * vectors.transpose())
}

pub fn symmetric_sqrt(m: &RMat) -> Result<RMat> {
    symmetric_function(m, 0.0, f64::sqrt)
}

/// Inverse square root with eigenvalues floored at `floor`.
pub fn symmetric_inv_sqrt(m: &RMat, floor: f64) -> Result<RMat> {
    symmetric_function(m, floor, |x| 1.0 / x.sqrt())
}

/// Requires `m` symmetric positive definite with smallest eigenvalue above `tol`.
pub fn require_positive_definite(m: &RMat, tol: f64) -> Result<f64> {
    let residual = symmetric_residual(m);
    if residual > 1e-10 * (1.0 + max_abs(m)) {
        return Err(Error::NotSymmetric { residual });
    }
    let min = min_symmetric_eigenvalue(m)?;
    if min <= tol {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(min)
}

pub fn solve_real(a: &RMat, b: &RVec) -> Result<RVec> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Numeric("singular linear system".into()))
}
