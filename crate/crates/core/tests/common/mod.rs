// SPDX-License-Identifier: Apache-2.0

//! Seeded random systems shared by the integration tests.

#![allow(dead_code)]

use qsde_core::composite::CompositeSpec;
use qsde_core::linalg::{c, CMat, RMat, RVec};
use qsde_core::model::{self, StructureConstants};
use qsde_core::qsde::SystemSpec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize) -> RVec {
    RVec::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn uniform_mat(rng: &mut ChaCha8Rng, r: usize, cols: usize) -> RMat {
    RMat::from_fn(r, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// One-variable algebra `X² = I + X`; `Re β ≠ 0`.
pub fn scalar_constants() -> StructureConstants {
    StructureConstants::new(CMat::from_element(1, 1, c(1.0, 0.0)), vec![CMat::from_element(1, 1, c(1.0, 0.0))])
        .unwrap()
}

/// Entries of `E`, `M`, `N` uniform on `(−1, 1)`.
pub fn random_spec(rng: &mut ChaCha8Rng, constants: StructureConstants, m: usize) -> SystemSpec {
    let n = constants.n();
    let e = uniform_vec(rng, n);
    let mm = uniform_mat(rng, m, n);
    let off = uniform_vec(rng, m);
    SystemSpec::new(constants, e, mm, off).unwrap()
}

pub fn random_pauli(rng: &mut ChaCha8Rng, m: usize) -> SystemSpec {
    random_spec(rng, model::pauli_constants(), m)
}

pub fn random_composite(rng: &mut ChaCha8Rng, c1: StructureConstants, c2: StructureConstants) -> CompositeSpec {
    let s1 = random_spec(rng, c1, 2);
    let s2 = random_spec(rng, c2, 2);
    let e12 = uniform_mat(rng, s1.n(), s2.n());
    CompositeSpec::new(s1, s2, e12).unwrap()
}

/// `(I + r·σ)/2` with `|r| < 1`.
pub fn random_qubit_state(rng: &mut ChaCha8Rng) -> CMat {
    let r = uniform_vec(rng, 3) * 0.5;
    let s = qsde_core::oracle::pauli_matrices();
    (CMat::identity(2, 2) + &s[0] * c(r[0], 0.0) + &s[1] * c(r[1], 0.0) + &s[2] * c(r[2], 0.0)) * c(0.5, 0.0)
}
