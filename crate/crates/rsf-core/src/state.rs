//! The reduced state of a multimode field: the couple (r, α).
//!
//! r is the single-particle density matrix r_kk' = Tr[ρ̂ â†_k' â_k],
//! normalized to the particle number tr r = N, and α_k = Tr[ρ̂ â_k] is the
//! coherence vector. The derived correlation matrix
//!
//! ```text
//! r^α = r − |α⟩⟨α|
//! ```
//!
//! is Hermitian positive semidefinite for any physical state, vanishes
//! exactly on coherent states, and is the sole carrier of entropy and the
//! other thermodynamic functionals.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitize, min_eigenvalue, norm_sqr, outer, HermitianMatrix,
};

/// Negative-eigenvalue band treated as numerically zero: eigenvalues in
/// [−PSD_TOL, 0) are clipped to 0 at use sites, anything below is an error.
pub const PSD_TOL: f64 = 1e-9;

/// Physical constants threaded through every formula; natural units
/// ħ = k_B = 1 by default.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Units {
    pub hbar: f64,
    pub kb: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self { hbar: 1.0, kb: 1.0 }
    }
}

impl Units {
    pub fn new(hbar: f64, kb: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::Domain(format!(
                "hbar must be positive and finite, got {hbar}"
            )));
        }
        if !(kb.is_finite() && kb > 0.0) {
            return Err(Error::Domain(format!(
                "kB must be positive and finite, got {kb}"
            )));
        }
        Ok(Self { hbar, kb })
    }
}

/// The mode frequencies ω_k > 0 of the field.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSet {
    omega: Vec<f64>,
}

impl ModeSet {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::Domain("at least one mode is required".into()));
        }
        for (k, &w) in omega.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Domain(format!(
                    "omega[{k}] must be positive and finite, got {w}"
                )));
            }
        }
        Ok(Self { omega })
    }

    pub fn n_modes(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Single-particle Hamiltonian h = ħ · diag(ω).
    pub fn hamiltonian(&self, hbar: f64) -> HermitianMatrix {
        let d: Vec<f64> = self.omega.iter().map(|&w| hbar * w).collect();
        HermitianMatrix::from_diag_real(&d)
    }
}

/// Correlation matrix r^α = r − |α⟩⟨α|: Hermitian, PSD within [`PSD_TOL`].
#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    matrix: HermitianMatrix,
}

impl CorrelationMatrix {
    /// Validate PSD within the tolerance band and wrap.
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let min_eig = min_eigenvalue(&matrix)?;
        if min_eig < -PSD_TOL {
            return Err(Error::NegativeEigenvalue {
                context: "correlation matrix",
                min_eigenvalue: min_eig,
                tol: PSD_TOL,
            });
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> HermitianMatrix {
        self.matrix
    }

    /// Eigenvalues ascending with the [−PSD_TOL, 0) band clipped to 0.
    pub fn clipped_eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(crate::linalg::eig_hermitian(&self.matrix)?
            .eigenvalues
            .into_iter()
            .map(|x| if x < 0.0 { 0.0 } else { x })
            .collect())
    }
}

/// The couple (r, α) describing the reduced state of the field.
#[derive(Clone, Debug)]
pub struct ReducedState {
    r: HermitianMatrix,
    alpha: Array1<Complex64>,
}

impl ReducedState {
    /// Validating constructor: dimensions must match, r must be PSD within
    /// [`PSD_TOL`], and so must r − |α⟩⟨α|.
    pub fn new(r: HermitianMatrix, alpha: Array1<Complex64>) -> Result<Self> {
        if alpha.len() != r.dim() {
            return Err(Error::DimensionMismatch {
                context: "reduced state (r vs alpha)",
                expected: r.dim(),
                found: alpha.len(),
            });
        }
        let state = Self { r, alpha };
        state.validate()?;
        Ok(state)
    }

    /// Check the PSD invariants of the couple.
    pub fn validate(&self) -> Result<()> {
        let min_r = min_eigenvalue(&self.r)?;
        if min_r < -PSD_TOL {
            return Err(Error::NegativeEigenvalue {
                context: "single-particle density matrix",
                min_eigenvalue: min_r,
                tol: PSD_TOL,
            });
        }
        // Correlation PSD; the constructor of CorrelationMatrix re-checks.
        self.correlation_matrix().map(|_| ())
    }

    /// Vacuum: r = 0, α = 0.
    pub fn vacuum(n_modes: usize) -> Self {
        assert!(n_modes >= 1, "at least one mode is required");
        Self {
            r: HermitianMatrix::zeros(n_modes),
            alpha: Array1::from_elem(n_modes, Complex64::new(0.0, 0.0)),
        }
    }

    /// Coherent state: r = |α⟩⟨α| exactly, so the correlation vanishes.
    pub fn coherent(alpha: Array1<Complex64>) -> Self {
        assert!(!alpha.is_empty(), "at least one mode is required");
        let r = hermitize(&outer(&alpha, &alpha));
        Self { r, alpha }
    }

    /// Assemble a state from its correlation matrix and coherence vector:
    /// r = r^α + |α⟩⟨α|. Valid by construction.
    pub fn from_correlation(c: &CorrelationMatrix, alpha: Array1<Complex64>) -> Result<Self> {
        if alpha.len() != c.dim() {
            return Err(Error::DimensionMismatch {
                context: "reduced state (correlation vs alpha)",
                expected: c.dim(),
                found: alpha.len(),
            });
        }
        let r = hermitize(&(c.matrix().raw() + &outer(&alpha, &alpha)));
        Ok(Self { r, alpha })
    }

    pub fn n_modes(&self) -> usize {
        self.r.dim()
    }

    pub fn r(&self) -> &HermitianMatrix {
        &self.r
    }

    pub fn alpha(&self) -> &Array1<Complex64> {
        &self.alpha
    }

    /// r^α = r − |α⟩⟨α|, validated PSD within [`PSD_TOL`].
    pub fn correlation_matrix(&self) -> Result<CorrelationMatrix> {
        CorrelationMatrix::new(self.correlation_unchecked())
    }

    /// The Hermitian difference r − |α⟩⟨α| without the PSD gate — for
    /// callers that validate separately (e.g. the integrator's per-step
    /// check, which wants the eigenvalue for its error report).
    pub fn correlation_unchecked(&self) -> HermitianMatrix {
        hermitize(&(self.r.raw() - &outer(&self.alpha, &self.alpha)))
    }

    /// Total particle number N = tr r.
    pub fn total_particle_number(&self) -> f64 {
        self.r.trace()
    }

    /// ‖α‖² = Σ_k |α_k|², the coherent share of the particle number.
    pub fn alpha_norm_sqr(&self) -> f64 {
        norm_sqr(&self.alpha)
    }
}

/// Expectation value of the additive single-particle observable with
/// coefficient matrix b: Tr[ρ̂ B̂] = tr[r b] for B̂ = Σ_kk' b_kk' â†_k â_k'.
pub fn additive_expectation(s: &ReducedState, b: &HermitianMatrix) -> Result<f64> {
    if b.dim() != s.n_modes() {
        return Err(Error::DimensionMismatch {
            context: "additive observable",
            expected: s.n_modes(),
            found: b.dim(),
        });
    }
    Ok(trace_product(s.r().raw(), b.raw()))
}

/// tr[A·B] computed entrywise; real part (exact for Hermitian A, B).
pub(crate) fn trace_product(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{assert_close, cx, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn herm2(entries: [[Complex64; 2]; 2]) -> HermitianMatrix {
        let m = Array2::from_shape_fn((2, 2), |(i, j)| entries[i][j]);
        HermitianMatrix::new(m).unwrap()
    }

    #[test]
    fn coherent_state_has_zero_correlation() {
        let alpha = Array1::from_vec(vec![cx(0.7, -0.3), cx(0.1, 1.2)]);
        let s = ReducedState::coherent(alpha);
        let c = s.correlation_matrix().unwrap();
        assert_eq!(c.matrix().frobenius_norm(), 0.0);
    }

    #[test]
    fn correlation_of_diagonal_r_with_zero_alpha_is_r() {
        let r = HermitianMatrix::from_diag_real(&[0.5, 1.5]);
        let s = ReducedState::new(r.clone(), Array1::from_elem(2, cx(0.0, 0.0))).unwrap();
        let c = s.correlation_matrix().unwrap();
        assert_eq!(c.matrix().raw(), r.raw());
    }

    #[test]
    fn correlation_subtracts_outer_product() {
        let r = herm2([
            [cx(2.0, 0.0), cx(0.5, 0.0)],
            [cx(0.5, 0.0), cx(1.0, 0.0)],
        ]);
        let alpha = Array1::from_vec(vec![cx(1.0, 0.0), cx(0.0, 0.0)]);
        let s = ReducedState::new(r, alpha).unwrap();
        let c = s.correlation_matrix().unwrap();
        let want = herm2([
            [cx(1.0, 0.0), cx(0.5, 0.0)],
            [cx(0.5, 0.0), cx(1.0, 0.0)],
        ]);
        assert_eq!(c.matrix().raw(), want.raw());
    }

    #[test]
    fn particle_number_is_trace() {
        let r = HermitianMatrix::from_diag_real(&[1.0, 2.0]);
        let s = ReducedState::new(r, Array1::from_elem(2, cx(0.0, 0.0))).unwrap();
        assert_eq!(s.total_particle_number(), 3.0);
    }

    #[test]
    fn coherent_particle_number_is_alpha_norm() {
        let alpha = Array1::from_vec(vec![cx(1.0, 0.0), cx(0.0, 1.0)]);
        let s = ReducedState::coherent(alpha);
        assert_close(s.total_particle_number(), 2.0, 1e-15, "N of coherent");
        assert_close(s.alpha_norm_sqr(), 2.0, 1e-15, "|alpha|^2");
    }

    #[test]
    fn additive_expectation_identity_gives_particle_number() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let s = random_state(3, &mut rng);
        let id = HermitianMatrix::from_diag_real(&[1.0, 1.0, 1.0]);
        let n = additive_expectation(&s, &id).unwrap();
        assert_close(n, s.total_particle_number(), 1e-12, "tr r");
    }

    #[test]
    fn additive_expectation_diagonal_weights() {
        let r = HermitianMatrix::from_diag_real(&[0.25, 0.5]);
        let s = ReducedState::new(r, Array1::from_elem(2, cx(0.0, 0.0))).unwrap();
        let b = HermitianMatrix::from_diag_real(&[1.0, 2.0]);
        assert_close(
            additive_expectation(&s, &b).unwrap(),
            1.25,
            1e-15,
            "weighted occupation",
        );
    }

    #[test]
    fn additive_expectation_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let s = random_state(3, &mut rng);
        let b1 = crate::testutil::random_hermitian(3, &mut rng);
        let b2 = crate::testutil::random_hermitian(3, &mut rng);
        let combo = HermitianMatrix::new(
            b1.raw() + &b2.raw().mapv(|z| 2.0 * z),
        )
        .unwrap();
        let lhs = additive_expectation(&s, &combo).unwrap();
        let rhs = additive_expectation(&s, &b1).unwrap()
            + 2.0 * additive_expectation(&s, &b2).unwrap();
        assert_close(lhs, rhs, 1e-12, "linearity");
    }

    #[test]
    fn additive_expectation_rejects_dimension_mismatch() {
        let s = ReducedState::vacuum(2);
        let b = HermitianMatrix::from_diag_real(&[1.0]);
        assert!(matches!(
            additive_expectation(&s, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trace_dominates_alpha_norm_on_valid_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let s = random_state(3, &mut rng);
            assert!(s.total_particle_number() >= s.alpha_norm_sqr() - PSD_TOL);
        }
    }

    #[test]
    fn validation_rejects_negative_r() {
        let m = HermitianMatrix::from_diag_real(&[-0.5, 1.0]);
        let res = ReducedState::new(m, Array1::from_elem(2, cx(0.0, 0.0)));
        assert!(matches!(res, Err(Error::NegativeEigenvalue { .. })));
    }

    #[test]
    fn validation_rejects_indefinite_correlation() {
        // r = 0 with α ≠ 0 gives r^α = −|α⟩⟨α| ≺ 0.
        let res = ReducedState::new(
            HermitianMatrix::zeros(2),
            Array1::from_vec(vec![cx(1.0, 0.0), cx(0.0, 0.0)]),
        );
        assert!(matches!(res, Err(Error::NegativeEigenvalue { .. })));
    }

    #[test]
    fn validation_rejects_dimension_mismatch() {
        let res = ReducedState::new(
            HermitianMatrix::zeros(2),
            Array1::from_elem(3, cx(0.0, 0.0)),
        );
        assert!(matches!(res, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn mode_set_rejects_nonpositive_frequency() {
        assert!(ModeSet::new(vec![1.0, 0.0]).is_err());
        assert!(ModeSet::new(vec![-1.0]).is_err());
        assert!(ModeSet::new(vec![]).is_err());
        assert!(ModeSet::new(vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn hamiltonian_scales_with_hbar() {
        let m = ModeSet::new(vec![1.0, 2.0]).unwrap();
        let h = m.hamiltonian(0.5);
        assert_eq!(h.diagonal(), vec![0.5, 1.0]);
    }

    #[test]
    fn units_reject_nonpositive_constants() {
        assert!(Units::new(0.0, 1.0).is_err());
        assert!(Units::new(1.0, -2.0).is_err());
        assert!(Units::new(1.0, 1.0).is_ok());
    }

    #[test]
    fn correlation_gate_rejects_deep_negative() {
        let m = HermitianMatrix::from_diag_real(&[1.0, -1e-6]);
        assert!(CorrelationMatrix::new(m).is_err());
        let shallow = HermitianMatrix::from_diag_real(&[1.0, -1e-10]);
        let c = CorrelationMatrix::new(shallow).unwrap();
        let eigs = c.clipped_eigenvalues().unwrap();
        assert_eq!(eigs[0], 0.0);
        assert_eq!(eigs[1], 1.0);
    }
}
