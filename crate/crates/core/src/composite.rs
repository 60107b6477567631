// SPDX-License-Identifier: Apache-2.0

//! Direct energy coupling of two systems through `X⁽¹⁾ᵀE⁽¹²⁾X⁽²⁾`.
//!
//! The composite variables are ordered `(X⁽¹⁾, X⁽²⁾, X⁽¹²⁾)` with
//! `X⁽¹²⁾_{(j,k)} = X⁽¹⁾_j X⁽²⁾_k` at offset `n₁ + n₂ + j·n₂ + k`, which is
//! the column-major `vec` of `X⁽²⁾X⁽¹⁾ᵀ` and the Kronecker order of
//! `X⁽¹⁾ ⊗ X⁽²⁾`.

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, RMat, RVec, C64};
use crate::model::{self, StructureConstants};
use crate::qsde::{self, Dispersion, DispersionLayout, ItoStructure, QsdeCoefficients, SystemSpec};
use crate::weak::WeakSplit;

/// `P` with `P(u ⊗ v) = v ⊗ u` for `u ∈ ℝ^{n₁}`, `v ∈ ℝ^{n₂}`.
///
/// `P` is orthogonal; it is an involution only when `n₁ = n₂`.
pub fn commutation_permutation(n1: usize, n2: usize) -> RMat {
    let mut p = RMat::zeros(n1 * n2, n1 * n2);
    for j in 0..n1 {
        for k in 0..n2 {
            p[(k * n1 + j, j * n2 + k)] = 1.0;
        }
    }
    p
}

/// Element `c0 I + Σ c_l X_l` of one factor algebra.
struct Reduced {
    c0: C64,
    c: CVec,
}

impl Reduced {
    fn identity(n: usize) -> Self {
        Self { c0: c(1.0, 0.0), c: CVec::zeros(n) }
    }
}

/// Product of two factor-algebra elements that are each `I` or a single
/// variable; `None` stands for `I`.
fn factor_product(k: &StructureConstants, a: Option<usize>, b: Option<usize>) -> Reduced {
    let n = k.n();
    match (a, b) {
        (None, None) => Reduced::identity(n),
        (Some(j), None) | (None, Some(j)) => {
            let mut v = CVec::zeros(n);
            v[j] = c(1.0, 0.0);
            Reduced { c0: c(0.0, 0.0), c: v }
        }
        (Some(j), Some(l)) => Reduced {
            c0: k.alpha_complex()[(j, l)],
            c: CVec::from_iterator(n, (0..n).map(|r| k.beta_at(j, l, r))),
        },
    }
}

/// `(first-factor part, second-factor part)` of composite variable `a`.
fn factors(a: usize, n1: usize, n2: usize) -> (Option<usize>, Option<usize>) {
    if a < n1 {
        (Some(a), None)
    } else if a < n1 + n2 {
        (None, Some(a - n1))
    } else {
        let r = a - n1 - n2;
        (Some(r / n2), Some(r % n2))
    }
}

fn augment_unchecked(c1: &StructureConstants, c2: &StructureConstants) -> Result<StructureConstants> {
    let (n1, n2) = (c1.n(), c2.n());
    let n = n1 + n2 + n1 * n2;
    let off = n1 + n2;
    let mut alpha = CMat::zeros(n, n);
    let mut beta = vec![CMat::zeros(n, n); n];
    for a in 0..n {
        let (p, q) = factors(a, n1, n2);
        for b in 0..n {
            let (pp, qq) = factors(b, n1, n2);
            // Factors of different subsystems commute, so the product splits.
            let left = factor_product(c1, p, pp);
            let right = factor_product(c2, q, qq);
            alpha[(a, b)] = left.c0 * right.c0;
            for l in 0..n1 {
                beta[l][(a, b)] += left.c[l] * right.c0;
            }
            for m in 0..n2 {
                beta[n1 + m][(a, b)] += left.c0 * right.c[m];
            }
            for l in 0..n1 {
                if left.c[l] == c(0.0, 0.0) {
                    continue;
                }
                for m in 0..n2 {
                    beta[off + l * n2 + m][(a, b)] += left.c[l] * right.c[m];
                }
            }
        }
    }
    StructureConstants::new(alpha, beta)
}

/// Structure constants of `(X⁽¹⁾, X⁽²⁾, X⁽¹²⁾)`, validated before return.
pub fn augment_constants(c1: &StructureConstants, c2: &StructureConstants) -> Result<StructureConstants> {
    for (label, k) in [("first", c1), ("second", c2)] {
        if !k.alpha_is_real(1e-12) {
            return Err(Error::InvalidConstants(format!("{label} subsystem has complex α")));
        }
        model::require_valid(k, model::DEFAULT_TOL)
            .map_err(|e| Error::InvalidConstants(format!("{label} subsystem: {e}")))?;
    }
    let out = augment_unchecked(c1, c2)?;
    model::require_valid(&out, model::DEFAULT_TOL)
        .map_err(|e| Error::InvalidConstants(format!("augmented constants: {e}")))?;
    Ok(out)
}

/// `(E⁽¹⁾; E⁽²⁾; vec E⁽¹²⁾ᵀ)`.
pub fn augment_energy(e1: &RVec, e2: &RVec, e12: &RMat) -> Result<RVec> {
    if e12.shape() != (e1.len(), e2.len()) {
        return Err(Error::DimensionMismatch(format!(
            "E12 is {}×{}, expected {}×{}",
            e12.nrows(),
            e12.ncols(),
            e1.len(),
            e2.len()
        )));
    }
    let tail = linalg::vec_cols(&e12.transpose());
    Ok(RVec::from_iterator(
        e1.len() + e2.len() + tail.len(),
        e1.iter().chain(e2.iter()).chain(tail.iter()).copied(),
    ))
}

/// Recovers `E⁽¹²⁾` from the tail of an augmented energy vector.
pub fn unvec_coupling(energy: &RVec, n1: usize, n2: usize) -> Result<RMat> {
    if energy.len() != n1 + n2 + n1 * n2 {
        return Err(Error::DimensionMismatch("augmented energy has the wrong length".into()));
    }
    let tail = energy.rows(n1 + n2, n1 * n2).into_owned();
    Ok(linalg::unvec(&tail, n2, n1).transpose())
}

#[derive(Debug, Clone)]
pub struct CompositeSpec {
    pub sys1: SystemSpec,
    pub sys2: SystemSpec,
    pub e12: RMat,
}

impl CompositeSpec {
    pub fn new(sys1: SystemSpec, sys2: SystemSpec, e12: RMat) -> Result<Self> {
        if e12.shape() != (sys1.n(), sys2.n()) {
            return Err(Error::DimensionMismatch(format!(
                "E12 is {}×{}, expected {}×{}",
                e12.nrows(),
                e12.ncols(),
                sys1.n(),
                sys2.n()
            )));
        }
        Ok(Self { sys1, sys2, e12 })
    }

    pub fn n1(&self) -> usize {
        self.sys1.n()
    }

    pub fn n2(&self) -> usize {
        self.sys2.n()
    }

    pub fn n(&self) -> usize {
        self.n1() + self.n2() + self.n1() * self.n2()
    }

    /// `blockdiag(α⁽¹⁾, α⁽²⁾, α⁽¹⁾ ⊗ α⁽²⁾)`.
    pub fn alpha(&self) -> RMat {
        let (a1, a2) = (self.sys1.constants.alpha(), self.sys2.constants.alpha());
        let (n1, n2) = (self.n1(), self.n2());
        let mut out = RMat::zeros(self.n(), self.n());
        out.view_mut((0, 0), (n1, n1)).copy_from(a1);
        out.view_mut((n1, n1), (n2, n2)).copy_from(a2);
        out.view_mut((n1 + n2, n1 + n2), (n1 * n2, n1 * n2)).copy_from(&linalg::kron(a1, a2));
        out
    }

    /// Block coupling `[[M⁽¹⁾, 0, 0], [0, M⁽²⁾, 0]]`.
    pub fn coupling(&self) -> RMat {
        let (m1, m2) = (self.sys1.m(), self.sys2.m());
        let (n1, n2) = (self.n1(), self.n2());
        let mut out = RMat::zeros(m1 + m2, self.n());
        out.view_mut((0, 0), (m1, n1)).copy_from(&self.sys1.coupling);
        out.view_mut((m1, n1), (m2, n2)).copy_from(&self.sys2.coupling);
        out
    }

    pub fn offset(&self) -> RVec {
        let (a, b) = (&self.sys1.offset, &self.sys2.offset);
        RVec::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
    }

    pub fn ito(&self) -> ItoStructure {
        ItoStructure::block_diag(&[&self.sys1.ito, &self.sys2.ito])
    }

    pub fn energy(&self) -> Result<RVec> {
        augment_energy(&self.sys1.energy, &self.sys2.energy, &self.e12)
    }

    /// The composite as a single system on the augmented constants.
    pub fn augmented(&self) -> Result<SystemSpec> {
        let constants = augment_constants(&self.sys1.constants, &self.sys2.constants)?;
        SystemSpec::with_ito(constants, self.energy()?, self.coupling(), self.offset(), self.ito())
    }

    fn layout(&self) -> DispersionLayout {
        DispersionLayout::Composite { n1: self.n1(), n2: self.n2(), m1: self.sys1.m(), m2: self.sys2.m() }
    }
}

struct Blocks {
    f1: RMat,
    f2: RMat,
    g1: RMat,
    g2: RMat,
    g12: RMat,
}

fn coupling_blocks(spec: &CompositeSpec) -> Blocks {
    let (k1, k2) = (&spec.sys1.constants, &spec.sys2.constants);
    let (n1, n2) = (k1.n(), k2.n());
    let nn = n1 * n2;
    let e12 = &spec.e12;
    let e21 = linalg::vec_cols(&e12.transpose());
    let p = commutation_permutation(n1, n2);

    let mut f1 = RMat::zeros(n1, nn);
    for j in 0..n1 {
        f1.view_mut((0, j * n2), (n1, n2)).copy_from(&(&k1.theta()[j] * e12 * 2.0));
    }
    let mut f2 = RMat::zeros(n2, nn);
    for k in 0..n2 {
        f2.view_mut((0, k * n1), (n2, n1)).copy_from(&(&k2.theta()[k] * e12.transpose() * 2.0));
    }
    let f2 = f2 * p;

    let mut g1 = RMat::zeros(nn, n1);
    for j in 0..n1 {
        g1.set_column(j, &(linalg::kron(&k1.theta()[j], k2.alpha()) * &e21 * 2.0));
    }
    let mut g2 = RMat::zeros(nn, n2);
    for k in 0..n2 {
        g2.set_column(k, &(linalg::kron(k1.alpha(), &k2.theta()[k]) * &e21 * 2.0));
    }
    let mut g12 = RMat::zeros(nn, nn);
    for j in 0..n1 {
        for k in 0..n2 {
            let m = linalg::kron(&k1.theta()[j], &k2.re_beta()[k]) + linalg::kron(&k1.re_beta()[j], &k2.theta()[k]);
            g12.set_column(j * n2 + k, &(m * &e21 * 2.0));
        }
    }
    Blocks { f1, f2, g1, g2, g12 }
}

/// Assembles the composite drift from subsystem drifts `a1, a2`, offsets
/// `b1, b2` and the energy-coupling blocks.
fn assemble(spec: &CompositeSpec, blocks: &Blocks, a1: &RMat, b1: &RVec, a2: &RMat, b2: &RVec) -> RMat {
    let (n1, n2) = (spec.n1(), spec.n2());
    let nn = n1 * n2;
    let off = n1 + n2;
    let p = commutation_permutation(n1, n2);
    let mut a = RMat::zeros(spec.n(), spec.n());
    a.view_mut((0, 0), (n1, n1)).copy_from(a1);
    a.view_mut((n1, n1), (n2, n2)).copy_from(a2);
    a.view_mut((0, off), (n1, nn)).copy_from(&blocks.f1);
    a.view_mut((n1, off), (n2, nn)).copy_from(&blocks.f2);
    let b2_block = linalg::kron(&RMat::from_column_slice(n2, 1, b2.as_slice()), &RMat::identity(n1, n1));
    a.view_mut((off, 0), (nn, n1)).copy_from(&(p.transpose() * b2_block + &blocks.g1));
    let b1_block = linalg::kron(&RMat::from_column_slice(n1, 1, b1.as_slice()), &RMat::identity(n2, n2));
    a.view_mut((off, n1), (nn, n2)).copy_from(&(b1_block + &blocks.g2));
    let sum = linalg::kron(a1, &RMat::identity(n2, n2)) + linalg::kron(&RMat::identity(n1, n1), a2);
    a.view_mut((off, off), (nn, nn)).copy_from(&(sum + &blocks.g12));
    a
}

fn stacked_offset(spec: &CompositeSpec, b1: &RVec, b2: &RVec) -> RVec {
    let mut b = RVec::zeros(spec.n());
    b.rows_mut(0, spec.n1()).copy_from(b1);
    b.rows_mut(spec.n1(), spec.n2()).copy_from(b2);
    b
}

/// Composite coefficients assembled block by block from the subsystems.
pub fn composite_coefficients(spec: &CompositeSpec) -> Result<QsdeCoefficients> {
    let k1 = qsde::build_coefficients(&spec.sys1)?;
    let k2 = qsde::build_coefficients(&spec.sys2)?;
    let blocks = coupling_blocks(spec);
    let zero1 = RVec::zeros(spec.n1());
    let zero2 = RVec::zeros(spec.n2());
    let a = assemble(spec, &blocks, &k1.a, &k1.b, &k2.a, &k2.b);
    let a0 = assemble(spec, &blocks, &k1.a0, &zero1, &k2.a0, &zero2);
    let b = stacked_offset(spec, &k1.b, &k2.b);
    let theta = augment_unchecked(&spec.sys1.constants, &spec.sys2.constants)?.theta().to_vec();
    Ok(QsdeCoefficients {
        a_tilde: &a - &a0,
        a,
        a0,
        b,
        dispersion: Dispersion { theta, coupling: spec.coupling(), layout: spec.layout() },
    })
}

/// Weak-coupling split of a composite whose subsystem couplings are read as
/// shapes; `A₀` keeps every energy-coupling block.
pub fn composite_weak(spec: &CompositeSpec) -> Result<WeakSplit> {
    for (label, s) in [("first", &spec.sys1), ("second", &spec.sys2)] {
        linalg::require_positive_definite(s.constants.alpha(), 1e-12)
            .map_err(|e| Error::InvalidConstants(format!("{label} subsystem α: {e}")))?;
    }
    let k = composite_coefficients(spec)?;
    Ok(WeakSplit { a0: k.a0, s_a: k.a_tilde, s_b: k.b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::pauli_constants;

    fn pauli_spec(e: [f64; 3], m: &[f64], n: &[f64]) -> SystemSpec {
        SystemSpec::new(
            pauli_constants(),
            RVec::from_row_slice(&e),
            RMat::from_row_slice(n.len(), 3, m),
            RVec::from_row_slice(n),
        )
        .unwrap()
    }

    #[test]
    fn permutation_swaps_kronecker_factors() {
        assert_eq!(commutation_permutation(1, 1), RMat::identity(1, 1));
        let u = RVec::from_vec(vec![2.0, -3.0]);
        let v = RVec::from_vec(vec![1.0, 4.0, -5.0]);
        let p = commutation_permutation(2, 3);
        let uv = linalg::kron(&RMat::from_column_slice(2, 1, u.as_slice()), &RMat::from_column_slice(3, 1, v.as_slice()));
        let vu = linalg::kron(&RMat::from_column_slice(3, 1, v.as_slice()), &RMat::from_column_slice(2, 1, u.as_slice()));
        assert_eq!(&p * uv, vu);
        assert_eq!(&p * p.transpose(), RMat::identity(6, 6));
        let p3 = commutation_permutation(3, 3);
        assert_eq!(&p3 * &p3, RMat::identity(9, 9));
    }

    #[test]
    fn pauli_pair_constants() {
        let k = augment_constants(&pauli_constants(), &pauli_constants()).unwrap();
        assert_eq!(k.n(), 15);
        assert_eq!(k.alpha(), &RMat::identity(15, 15));
    }

    #[test]
    fn pauli_with_scalar_algebra() {
        let scalar = StructureConstants::new(CMat::identity(1, 1), vec![CMat::identity(1, 1)]).unwrap();
        let k = augment_constants(&pauli_constants(), &scalar).unwrap();
        assert_eq!(k.n(), 7);
        assert!(model::validate(&k, model::DEFAULT_TOL).unwrap().passed);
    }

    #[test]
    fn ccr_sections_on_the_product_block() {
        let scalar = StructureConstants::new(CMat::identity(1, 1), vec![CMat::identity(1, 1)]).unwrap();
        for (c1, c2) in [(pauli_constants(), pauli_constants()), (pauli_constants(), scalar)] {
            let k = augment_constants(&c1, &c2).unwrap();
            let (n1, n2) = (c1.n(), c2.n());
            let (off, nn) = (n1 + n2, n1 * n2);
            let block = |s: usize| k.theta()[s].view((off, off), (nn, nn)).into_owned();
            for l in 0..n1 {
                assert_eq!(block(l), linalg::kron(&c1.theta()[l], c2.alpha()));
            }
            for m in 0..n2 {
                assert_eq!(block(n1 + m), linalg::kron(c1.alpha(), &c2.theta()[m]));
            }
            for l in 0..n1 {
                for m in 0..n2 {
                    let want = linalg::kron(&c1.theta()[l], &c2.re_beta()[m])
                        + linalg::kron(&c1.re_beta()[l], &c2.theta()[m]);
                    assert_eq!(block(off + l * n2 + m), want);
                }
            }
        }
    }

    #[test]
    fn energy_vectorisation() {
        let e1 = RVec::from_vec(vec![1.0, 2.0, 3.0]);
        let e2 = RVec::from_vec(vec![4.0, 5.0, 6.0]);
        let mut e12 = RMat::zeros(3, 3);
        let e = augment_energy(&e1, &e2, &e12).unwrap();
        assert!(e.rows(6, 9).iter().all(|&x| x == 0.0));
        e12[(0, 0)] = 1.0;
        let e = augment_energy(&e1, &e2, &e12).unwrap();
        assert_eq!(e.rows(6, 9).iter().filter(|&&x| x != 0.0).count(), 1);
        assert_eq!(e[6], 1.0);
        let e12 = RMat::from_fn(2, 3, |j, k| (10 * j + k) as f64);
        let e = augment_energy(&RVec::zeros(2), &RVec::zeros(3), &e12).unwrap();
        assert_eq!(e[5 + 3 + 2], 12.0);
        assert_eq!(unvec_coupling(&e, 2, 3).unwrap(), e12);
    }

    #[test]
    fn uncoupled_composite_is_block_diagonal() {
        let s1 = pauli_spec([0.0, 0.0, 1.0], &[0.0; 6], &[0.0; 2]);
        let s2 = pauli_spec([0.5, 0.0, 0.0], &[0.0; 6], &[0.0; 2]);
        let spec = CompositeSpec::new(s1.clone(), s2.clone(), RMat::zeros(3, 3)).unwrap();
        let k = composite_coefficients(&spec).unwrap();
        let a1 = qsde::build_coefficients(&s1).unwrap().a0;
        let a2 = qsde::build_coefficients(&s2).unwrap().a0;
        let mut want = RMat::zeros(15, 15);
        want.view_mut((0, 0), (3, 3)).copy_from(&a1);
        want.view_mut((3, 3), (3, 3)).copy_from(&a2);
        want.view_mut((6, 6), (9, 9)).copy_from(&(linalg::kron(&a1, &RMat::identity(3, 3)) + linalg::kron(&RMat::identity(3, 3), &a2)));
        assert_eq!(k.a, want);
        assert_eq!(k.b, RVec::zeros(15));
    }

    #[test]
    fn direct_assembly_matches_augmented_route() {
        let s1 = pauli_spec([0.3, -0.2, 0.9], &[0.5, -0.1, 0.2, 0.0, 0.7, -0.4], &[0.1, -0.3]);
        let s2 = pauli_spec([-0.6, 0.4, 0.1], &[-0.2, 0.3, 0.8, 0.6, -0.5, 0.1], &[0.4, 0.2]);
        let e12 = RMat::from_row_slice(3, 3, &[0.2, -0.7, 0.1, 0.5, 0.3, -0.2, -0.4, 0.6, 0.9]);
        let spec = CompositeSpec::new(s1, s2, e12).unwrap();
        let direct = composite_coefficients(&spec).unwrap();
        let generic = qsde::build_coefficients(&spec.augmented().unwrap()).unwrap();
        assert!(linalg::max_abs(&(&direct.a - &generic.a)) < 1e-12);
        assert!(linalg::max_abs(&(&direct.a0 - &generic.a0)) < 1e-12);
        assert!((&direct.b - &generic.b).norm() < 1e-12);
    }

    #[test]
    fn unequal_sizes_with_real_beta() {
        // The scalar algebra X² = I + X has Re β ≠ 0, exercising the G₁₂ terms.
        let scalar = StructureConstants::new(CMat::identity(1, 1), vec![CMat::identity(1, 1)]).unwrap();
        let s1 = pauli_spec([0.3, -0.2, 0.9], &[0.5, -0.1, 0.2, 0.0, 0.7, -0.4], &[0.1, -0.3]);
        let s2 = SystemSpec::new(
            scalar,
            RVec::from_vec(vec![0.7]),
            RMat::from_row_slice(2, 1, &[0.4, -0.9]),
            RVec::from_vec(vec![0.2, 0.5]),
        )
        .unwrap();
        let e12 = RMat::from_row_slice(3, 1, &[0.6, -0.3, 0.8]);
        let spec = CompositeSpec::new(s1.clone(), s2.clone(), e12.clone()).unwrap();
        let direct = composite_coefficients(&spec).unwrap();
        let generic = qsde::build_coefficients(&spec.augmented().unwrap()).unwrap();
        assert!(linalg::max_abs(&(&direct.a - &generic.a)) < 1e-12);
        assert!((&direct.b - &generic.b).norm() < 1e-12);
        let swapped = CompositeSpec::new(s2, s1, e12.transpose()).unwrap();
        let direct = composite_coefficients(&swapped).unwrap();
        let generic = qsde::build_coefficients(&swapped.augmented().unwrap()).unwrap();
        assert!(linalg::max_abs(&(&direct.a - &generic.a)) < 1e-12);
    }

    #[test]
    fn weak_split_keeps_coupling_blocks_in_a0() {
        let s1 = pauli_spec([0.0, 0.0, 1.0], &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0], &[0.0; 2]);
        let s2 = pauli_spec([0.0, 1.0, 0.0], &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0], &[0.0; 2]);
        let e12 = RMat::from_row_slice(3, 3, &[0.0, 0.3, 0.0, 0.0, 0.0, 0.0, 0.2, 0.0, 0.0]);
        let spec = CompositeSpec::new(s1, s2, e12).unwrap();
        let split = composite_weak(&spec).unwrap();
        assert!(linalg::max_abs(&split.a0.view((0, 6), (3, 9)).into_owned()) > 0.0);
        assert_eq!(split.s_a.view((0, 6), (6, 9)).into_owned(), RMat::zeros(6, 9));
        assert_eq!(split.s_b.rows(6, 9).into_owned(), RVec::zeros(9));
        let half = composite_coefficients(&CompositeSpec {
            sys1: spec.sys1.scaled_coupling(0.5),
            sys2: spec.sys2.scaled_coupling(0.5),
            e12: spec.e12.clone(),
        })
        .unwrap();
        assert!(linalg::max_abs(&(half.a - split.a_eps(0.5))) < 1e-14);
    }
}
