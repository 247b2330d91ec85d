//! Shared helpers for the unit-test modules: seeded random matrices, states,
//! and tolerance assertions. Compiled only for tests.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{hermitize, unitary_exp_i, HermitianMatrix};

pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!(
        (a - b).abs() <= tol,
        "{what}: {a:.17e} vs {b:.17e} (|diff| = {:.3e} > {tol:.0e})",
        (a - b).abs()
    );
}

pub fn assert_close_c(a: Complex64, b: Complex64, tol: f64, what: &str) {
    assert!(
        (a - b).norm() <= tol,
        "{what}: {a} vs {b} (|diff| = {:.3e} > {tol:.0e})",
        (a - b).norm()
    );
}

pub fn random_complex_matrix(n: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
    Array2::from_shape_fn((n, n), |_| {
        cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_complex_vector(n: usize, rng: &mut ChaCha8Rng) -> Array1<Complex64> {
    Array1::from_shape_fn(n, |_| {
        cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    hermitize(&random_complex_matrix(n, rng))
}

/// Random positive semidefinite matrix W·W†.
pub fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let w = random_complex_matrix(n, rng);
    hermitize(&w.dot(&crate::linalg::dagger(&w)))
}

pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
    unitary_exp_i(&random_hermitian(n, rng)).unwrap()
}

/// Random valid reduced state assembled as r = (PSD correlation) + |α⟩⟨α|.
pub fn random_state(n: usize, rng: &mut ChaCha8Rng) -> crate::state::ReducedState {
    let c = crate::state::CorrelationMatrix::new(random_psd(n, rng)).unwrap();
    let alpha = random_complex_vector(n, rng);
    crate::state::ReducedState::from_correlation(&c, alpha).unwrap()
}
