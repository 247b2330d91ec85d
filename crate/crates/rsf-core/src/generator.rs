//! Quasi-free generators and the closed moment equations.
//!
//! A generator combines up to four channels acting on the couple (r, α):
//!
//! * free evolution at the mode frequencies ω_k,
//! * a coherent drive ζ,
//! * a bath with upward/downward rate matrices γ↑, γ↓ (in thermal form the
//!   downward rates Γ↓_k are supplied and Γ↑_k = Γ↓_k e^{−βħω_k} follows
//!   from detailed balance),
//! * random unitary scattering channels (w_j, u_j).
//!
//! The moment equations read (h = ħ diag ω, so ħ cancels in the commutator):
//!
//! ```text
//! dr/dt = −(i/ħ)[h, r] + (|ζ⟩⟨α| + |α⟩⟨ζ|) + ½{γ↑ − γ↓, r} + γ↑
//!          + Σ_j w_j (u_j r u_j† − r)
//! dα/dt = −(i/ħ) h α + ζ + ½(γ↑ − γ↓) α + Σ_j w_j (u_j − 1) α
//! ```
//!
//! and the correlation matrix r^α = r − |α⟩⟨α| obeys the drive-free
//!
//! ```text
//! dr^α/dt = −(i/ħ)[h, r^α] + ½{γ↑ − γ↓, r^α} + γ↑
//!            + Σ_j w_j (u_j r^α u_j† − r^α)
//!            + Σ_j w_j (u_j − 1)|α⟩⟨α|(u_j† − 1)
//! ```
//!
//! consistent with the chain rule: dr^α/dt = dr/dt − (dα/dt)α† − α(dα/dt)†.
//! The absence of ζ above is structural — coherent sources move |α⟩⟨α| but
//! never the correlation — and the implementation mirrors it: the
//! correlation right-hand side never reads the drive.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    dagger, hermitize, identity, min_eigenvalue, unitarity_deviation, HermitianMatrix,
    UNITARITY_TOL,
};
use crate::state::{ModeSet, ReducedState, Units, PSD_TOL};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Bath specification: either explicit Hermitian PSD rate matrices, or the
/// thermal form (β, Γ↓) with upward rates derived from detailed balance.
#[derive(Clone, Debug)]
pub enum BathSpec {
    Thermal { beta: f64, gamma_down: Vec<f64> },
    General {
        gamma_up: HermitianMatrix,
        gamma_down: HermitianMatrix,
    },
}

impl BathSpec {
    pub fn thermal(beta: f64, gamma_down: Vec<f64>) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!(
                "bath beta must be positive and finite, got {beta}"
            )));
        }
        for (k, &g) in gamma_down.iter().enumerate() {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::Domain(format!(
                    "gamma_down[{k}] must be nonnegative and finite, got {g}"
                )));
            }
        }
        Ok(Self::Thermal { beta, gamma_down })
    }

    pub fn general(gamma_up: HermitianMatrix, gamma_down: HermitianMatrix) -> Result<Self> {
        if gamma_up.dim() != gamma_down.dim() {
            return Err(Error::DimensionMismatch {
                context: "bath rate matrices",
                expected: gamma_up.dim(),
                found: gamma_down.dim(),
            });
        }
        for (name, m) in [("gamma_up", &gamma_up), ("gamma_down", &gamma_down)] {
            let min_eig = min_eigenvalue(m)?;
            if min_eig < -PSD_TOL {
                return Err(Error::NegativeEigenvalue {
                    context: if name == "gamma_up" {
                        "bath rate matrix gamma_up"
                    } else {
                        "bath rate matrix gamma_down"
                    },
                    min_eigenvalue: min_eig,
                    tol: PSD_TOL,
                });
            }
        }
        Ok(Self::General {
            gamma_up,
            gamma_down,
        })
    }

    /// Inverse temperature, when the bath has one.
    pub fn beta(&self) -> Option<f64> {
        match self {
            Self::Thermal { beta, .. } => Some(*beta),
            Self::General { .. } => None,
        }
    }
}

/// One random scattering channel: weight w ≥ 0 and a mode-space unitary.
#[derive(Clone, Debug)]
pub struct ScatterChannel {
    pub weight: f64,
    pub unitary: Array2<Complex64>,
}

/// A finite mixture of unitary scattering channels.
#[derive(Clone, Debug, Default)]
pub struct ScatteringSpec {
    channels: Vec<ScatterChannel>,
}

impl ScatteringSpec {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(channels: Vec<ScatterChannel>) -> Result<Self> {
        for (j, ch) in channels.iter().enumerate() {
            if !(ch.weight.is_finite() && ch.weight >= 0.0) {
                return Err(Error::Domain(format!(
                    "scattering weight[{j}] must be nonnegative and finite, got {}",
                    ch.weight
                )));
            }
            if ch.unitary.nrows() != ch.unitary.ncols() {
                return Err(Error::NotSquare {
                    rows: ch.unitary.nrows(),
                    cols: ch.unitary.ncols(),
                });
            }
            let deviation = unitarity_deviation(&ch.unitary);
            if deviation > UNITARITY_TOL {
                return Err(Error::NotUnitary {
                    deviation,
                    tol: UNITARITY_TOL,
                });
            }
        }
        Ok(Self { channels })
    }

    pub fn channels(&self) -> &[ScatterChannel] {
        &self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Σ_j w_j, the total scattering rate.
    pub fn total_weight(&self) -> f64 {
        self.channels.iter().map(|c| c.weight).sum()
    }
}

/// Resolved bath rates in the form the right-hand sides consume.
#[derive(Clone, Debug)]
pub(crate) enum Rates {
    Absent,
    /// Mode-diagonal rates (thermal form): per-mode Γ↑, Γ↓ and the net
    /// gain Γ↑ − Γ↓.
    Diagonal {
        up: Vec<f64>,
        down: Vec<f64>,
        gain: Vec<f64>,
    },
    /// Full Hermitian rate matrices and their difference γ↑ − γ↓.
    Full {
        up: Array2<Complex64>,
        down: Array2<Complex64>,
        gain: Array2<Complex64>,
    },
}

/// Per-channel precomputation: u and (u − 1).
#[derive(Clone, Debug)]
pub(crate) struct ResolvedChannel {
    pub weight: f64,
    pub u: Array2<Complex64>,
    pub u_minus_id: Array2<Complex64>,
}

/// A validated generator with everything the right-hand sides need
/// precomputed: resolved rates, per-channel (u − 1), and the summed
/// scattering drift Σ_j w_j (u_j − 1) acting on α.
#[derive(Clone, Debug)]
pub struct GeneratorSpec {
    modes: ModeSet,
    zeta: Array1<Complex64>,
    bath: Option<BathSpec>,
    units: Units,
    rates: Rates,
    channels: Vec<ResolvedChannel>,
    scatter_drift: Option<Array2<Complex64>>,
}

impl GeneratorSpec {
    pub fn new(
        modes: ModeSet,
        zeta: Array1<Complex64>,
        bath: Option<BathSpec>,
        scattering: ScatteringSpec,
        units: Units,
    ) -> Result<Self> {
        let n = modes.n_modes();
        if zeta.len() != n {
            return Err(Error::DimensionMismatch {
                context: "drive vector",
                expected: n,
                found: zeta.len(),
            });
        }
        let rates = match &bath {
            None => Rates::Absent,
            Some(BathSpec::Thermal { beta, gamma_down }) => {
                if gamma_down.len() != n {
                    return Err(Error::DimensionMismatch {
                        context: "thermal bath rates",
                        expected: n,
                        found: gamma_down.len(),
                    });
                }
                let up: Vec<f64> = gamma_down
                    .iter()
                    .zip(modes.omega())
                    .map(|(&g, &w)| g * (-beta * units.hbar * w).exp())
                    .collect();
                let gain: Vec<f64> = up
                    .iter()
                    .zip(gamma_down)
                    .map(|(&u, &d)| u - d)
                    .collect();
                Rates::Diagonal {
                    up,
                    down: gamma_down.clone(),
                    gain,
                }
            }
            Some(BathSpec::General {
                gamma_up,
                gamma_down,
            }) => {
                if gamma_up.dim() != n {
                    return Err(Error::DimensionMismatch {
                        context: "bath rate matrices",
                        expected: n,
                        found: gamma_up.dim(),
                    });
                }
                let up = gamma_up.raw().clone();
                let down = gamma_down.raw().clone();
                let gain = &up - &down;
                Rates::Full { up, down, gain }
            }
        };
        let mut channels = Vec::with_capacity(scattering.channels().len());
        for ch in scattering.channels() {
            if ch.unitary.nrows() != n {
                return Err(Error::DimensionMismatch {
                    context: "scattering unitary",
                    expected: n,
                    found: ch.unitary.nrows(),
                });
            }
            channels.push(ResolvedChannel {
                weight: ch.weight,
                u: ch.unitary.clone(),
                u_minus_id: &ch.unitary - &identity(n),
            });
        }
        let scatter_drift = if channels.is_empty() {
            None
        } else {
            let mut drift = Array2::from_elem((n, n), ZERO);
            for ch in &channels {
                drift = drift + ch.u_minus_id.mapv(|z| z * ch.weight);
            }
            Some(drift)
        };
        Ok(Self {
            modes,
            zeta,
            bath,
            units,
            rates,
            channels,
            scatter_drift,
        })
    }

    /// Free evolution only: no drive, bath, or scattering; natural units.
    pub fn free(modes: ModeSet) -> Self {
        let n = modes.n_modes();
        Self::new(
            modes,
            Array1::from_elem(n, ZERO),
            None,
            ScatteringSpec::empty(),
            Units::default(),
        )
        .expect("free generator is always valid")
    }

    /// Coherent drive without bath or scattering; natural units.
    pub fn driven(modes: ModeSet, zeta: Array1<Complex64>) -> Result<Self> {
        Self::new(modes, zeta, None, ScatteringSpec::empty(), Units::default())
    }

    /// Thermal bath (β, Γ↓) with an optional drive; natural units.
    pub fn thermal(
        modes: ModeSet,
        zeta: Array1<Complex64>,
        beta: f64,
        gamma_down: Vec<f64>,
    ) -> Result<Self> {
        Self::new(
            modes,
            zeta,
            Some(BathSpec::thermal(beta, gamma_down)?),
            ScatteringSpec::empty(),
            Units::default(),
        )
    }

    pub fn n_modes(&self) -> usize {
        self.modes.n_modes()
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn zeta(&self) -> &Array1<Complex64> {
        &self.zeta
    }

    pub fn bath(&self) -> Option<&BathSpec> {
        self.bath.as_ref()
    }

    pub fn units(&self) -> Units {
        self.units
    }

    /// Inverse temperature of the bath, when it is thermal.
    pub fn thermal_beta(&self) -> Option<f64> {
        self.bath.as_ref().and_then(|b| b.beta())
    }

    pub fn has_bath(&self) -> bool {
        self.bath.is_some()
    }

    pub fn has_drive(&self) -> bool {
        self.zeta.iter().any(|z| *z != ZERO)
    }

    pub fn has_scattering(&self) -> bool {
        !self.channels.is_empty()
    }

    pub(crate) fn rates(&self) -> &Rates {
        &self.rates
    }

    pub(crate) fn resolved_channels(&self) -> &[ResolvedChannel] {
        &self.channels
    }

    /// Resolved (γ↑, γ↓) as full Hermitian matrices, if a bath is present.
    pub fn resolved_rates(&self) -> Option<(HermitianMatrix, HermitianMatrix)> {
        match &self.rates {
            Rates::Absent => None,
            Rates::Diagonal { up, down, .. } => Some((
                HermitianMatrix::from_diag_real(up),
                HermitianMatrix::from_diag_real(down),
            )),
            Rates::Full { up, down, .. } => Some((
                hermitize(up),
                hermitize(down),
            )),
        }
    }

    /// Fastest rate in the generator: max(ω_k, Γ↓_k − Γ↑_k, Σ_j w_j).
    /// The product dt · rate_scale() should stay ≲ 0.1 for a stable and
    /// accurate fixed-step integration.
    pub fn rate_scale(&self) -> f64 {
        let mut scale = self
            .modes
            .omega()
            .iter()
            .fold(0.0f64, |acc, &w| acc.max(w));
        match &self.rates {
            Rates::Absent => {}
            Rates::Diagonal { gain, .. } => {
                for &g in gain {
                    scale = scale.max(-g);
                }
            }
            Rates::Full { up, down, .. } => {
                let n = up.nrows();
                for k in 0..n {
                    scale = scale.max((down[(k, k)] - up[(k, k)]).re.abs());
                }
            }
        }
        let w_total: f64 = self.channels.iter().map(|c| c.weight).sum();
        scale.max(w_total)
    }
}

/// dα/dt without dimension checks — the integrator's hot path.
pub(crate) fn alpha_rhs_raw(
    alpha: &Array1<Complex64>,
    g: &GeneratorSpec,
) -> Array1<Complex64> {
    let n = g.n_modes();
    let om = g.modes.omega();
    let mut out = Array1::from_elem(n, ZERO);
    for k in 0..n {
        out[k] = Complex64::new(0.0, -om[k]) * alpha[k] + g.zeta[k];
    }
    match &g.rates {
        Rates::Absent => {}
        Rates::Diagonal { gain, .. } => {
            for k in 0..n {
                out[k] += 0.5 * gain[k] * alpha[k];
            }
        }
        Rates::Full { gain, .. } => {
            for k in 0..n {
                let mut acc = ZERO;
                for m in 0..n {
                    acc += gain[(k, m)] * alpha[m];
                }
                out[k] += 0.5 * acc;
            }
        }
    }
    if let Some(drift) = &g.scatter_drift {
        for k in 0..n {
            let mut acc = ZERO;
            for m in 0..n {
                acc += drift[(k, m)] * alpha[m];
            }
            out[k] += acc;
        }
    }
    out
}

/// Shared bath + scattering action on a Hermitian moment matrix m:
/// ½{γ↑ − γ↓, m} + γ↑ + Σ_j w_j (u_j m u_j† − m), accumulated into `out`.
fn accumulate_dissipative(
    m: &Array2<Complex64>,
    g: &GeneratorSpec,
    out: &mut Array2<Complex64>,
) {
    let n = g.n_modes();
    match &g.rates {
        Rates::Absent => {}
        Rates::Diagonal { up, gain, .. } => {
            for k in 0..n {
                for kp in 0..n {
                    out[(k, kp)] += 0.5 * (gain[k] + gain[kp]) * m[(k, kp)];
                }
                out[(k, k)] += Complex64::new(up[k], 0.0);
            }
        }
        Rates::Full { up, gain, .. } => {
            let gm = gain.dot(m);
            let mg = m.dot(gain);
            for k in 0..n {
                for kp in 0..n {
                    out[(k, kp)] += 0.5 * (gm[(k, kp)] + mg[(k, kp)]) + up[(k, kp)];
                }
            }
        }
    }
    for ch in &g.channels {
        let umu = ch.u.dot(m).dot(&dagger(&ch.u));
        for k in 0..n {
            for kp in 0..n {
                out[(k, kp)] += ch.weight * (umu[(k, kp)] - m[(k, kp)]);
            }
        }
    }
}

/// dr/dt without dimension checks or final symmetrization.
pub(crate) fn r_rhs_raw(
    r: &Array2<Complex64>,
    alpha: &Array1<Complex64>,
    g: &GeneratorSpec,
) -> Array2<Complex64> {
    let n = g.n_modes();
    let om = g.modes.omega();
    let mut out = Array2::from_elem((n, n), ZERO);
    for k in 0..n {
        for kp in 0..n {
            // −(i/ħ)[h, r] with h = ħ diag ω, plus the drive dyads.
            out[(k, kp)] = Complex64::new(0.0, -(om[k] - om[kp])) * r[(k, kp)]
                + g.zeta[k] * alpha[kp].conj()
                + alpha[k] * g.zeta[kp].conj();
        }
    }
    accumulate_dissipative(r, g, &mut out);
    out
}

/// dr^α/dt without dimension checks or final symmetrization. Reads the
/// drive nowhere; α enters only through the scattering cross term.
pub(crate) fn correlation_rhs_raw(
    c: &Array2<Complex64>,
    alpha: &Array1<Complex64>,
    g: &GeneratorSpec,
) -> Array2<Complex64> {
    let n = g.n_modes();
    let om = g.modes.omega();
    let mut out = Array2::from_elem((n, n), ZERO);
    for k in 0..n {
        for kp in 0..n {
            out[(k, kp)] = Complex64::new(0.0, -(om[k] - om[kp])) * c[(k, kp)];
        }
    }
    accumulate_dissipative(c, g, &mut out);
    // Scattering moves coherent amplitude into correlation:
    // Σ_j w_j (u_j − 1)|α⟩⟨α|(u_j† − 1).
    for ch in &g.channels {
        let v = Array1::from_shape_fn(n, |k| {
            (0..n)
                .map(|m| ch.u_minus_id[(k, m)] * alpha[m])
                .sum::<Complex64>()
        });
        for k in 0..n {
            for kp in 0..n {
                out[(k, kp)] += ch.weight * v[k] * v[kp].conj();
            }
        }
    }
    out
}

/// dr/dt for a validated state. Hermitian by construction of the output.
pub fn rhs_r(s: &ReducedState, g: &GeneratorSpec) -> Result<HermitianMatrix> {
    check_dims(s, g)?;
    Ok(hermitize(&r_rhs_raw(s.r().raw(), s.alpha(), g)))
}

/// dα/dt for a validated state.
pub fn rhs_alpha(s: &ReducedState, g: &GeneratorSpec) -> Result<Array1<Complex64>> {
    check_dims(s, g)?;
    Ok(alpha_rhs_raw(s.alpha(), g))
}

/// dr^α/dt for a validated state. Hermitian by construction; independent
/// of the drive ζ by construction.
pub fn rhs_correlation(s: &ReducedState, g: &GeneratorSpec) -> Result<HermitianMatrix> {
    check_dims(s, g)?;
    let c = s.correlation_unchecked();
    Ok(hermitize(&correlation_rhs_raw(c.raw(), s.alpha(), g)))
}

fn check_dims(s: &ReducedState, g: &GeneratorSpec) -> Result<()> {
    if s.n_modes() != g.n_modes() {
        return Err(Error::DimensionMismatch {
            context: "state vs generator",
            expected: g.n_modes(),
            found: s.n_modes(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;
    use crate::state::CorrelationMatrix;
    use crate::testutil::{
        assert_close, assert_close_c, cx, random_complex_vector, random_psd,
        random_state, random_unitary,
    };
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_mode_full_generator(rng: &mut ChaCha8Rng) -> GeneratorSpec {
        let modes = ModeSet::new(vec![1.0, 1.7]).unwrap();
        let zeta = random_complex_vector(2, rng);
        let bath = BathSpec::general(random_psd(2, rng), random_psd(2, rng)).unwrap();
        let scattering = ScatteringSpec::new(vec![
            ScatterChannel {
                weight: 0.3,
                unitary: random_unitary(2, rng),
            },
            ScatterChannel {
                weight: 0.1,
                unitary: random_unitary(2, rng),
            },
        ])
        .unwrap();
        GeneratorSpec::new(modes, zeta, Some(bath), scattering, Units::default()).unwrap()
    }

    #[test]
    fn free_rhs_of_diagonal_r_vanishes() {
        let g = GeneratorSpec::free(ModeSet::new(vec![1.0, 2.0]).unwrap());
        let r = HermitianMatrix::from_diag_real(&[0.3, 0.7]);
        let s = ReducedState::new(r, Array1::from_elem(2, cx(0.0, 0.0))).unwrap();
        let out = rhs_r(&s, &g).unwrap();
        assert_eq!(out.frobenius_norm(), 0.0);
    }

    #[test]
    fn bath_rhs_at_vacuum_is_gamma_up() {
        let up = HermitianMatrix::from_diag_real(&[0.1, 0.1]);
        let down = HermitianMatrix::from_diag_real(&[0.3, 0.4]);
        let g = GeneratorSpec::new(
            ModeSet::new(vec![1.0, 2.0]).unwrap(),
            Array1::from_elem(2, cx(0.0, 0.0)),
            Some(BathSpec::general(up.clone(), down).unwrap()),
            ScatteringSpec::empty(),
            Units::default(),
        )
        .unwrap();
        let s = ReducedState::vacuum(2);
        let out = rhs_r(&s, &g).unwrap();
        assert!(frobenius(&(out.raw() - up.raw())) <= 1e-15);
    }

    #[test]
    fn drive_rhs_r_vanishes_at_zero_alpha() {
        let g = GeneratorSpec::driven(
            ModeSet::new(vec![1.0, 2.0]).unwrap(),
            Array1::from_vec(vec![cx(0.5, 0.2), cx(-0.1, 0.0)]),
        )
        .unwrap();
        let r = HermitianMatrix::from_diag_real(&[0.3, 0.7]);
        let s = ReducedState::new(r, Array1::from_elem(2, cx(0.0, 0.0))).unwrap();
        let out = rhs_r(&s, &g).unwrap();
        assert_eq!(out.frobenius_norm(), 0.0);
    }

    #[test]
    fn free_rhs_alpha_rotates() {
        let g = GeneratorSpec::free(ModeSet::new(vec![2.0, 3.0]).unwrap());
        let s = ReducedState::coherent(Array1::from_vec(vec![cx(1.0, 0.0), cx(0.0, 0.0)]));
        let out = rhs_alpha(&s, &g).unwrap();
        assert_close_c(out[0], cx(0.0, -2.0), 1e-15, "mode 0");
        assert_close_c(out[1], cx(0.0, 0.0), 1e-15, "mode 1");
    }

    #[test]
    fn drive_rhs_alpha_at_vacuum_is_zeta() {
        let zeta = Array1::from_vec(vec![cx(0.3, -0.4), cx(0.0, 0.9)]);
        let g =
            GeneratorSpec::driven(ModeSet::new(vec![1.0, 2.0]).unwrap(), zeta.clone()).unwrap();
        let s = ReducedState::vacuum(2);
        let out = rhs_alpha(&s, &g).unwrap();
        for k in 0..2 {
            assert_close_c(out[k], zeta[k], 1e-15, "zeta passthrough");
        }
    }

    #[test]
    fn thermal_rhs_alpha_damping_frozen_value() {
        // Single mode, ω = 1, β = 1, Γ↓ = 0.2, α = 1:
        // dα = −iα + ½ Γ↓ (e^{−1} − 1) α = −0.06321205588285577 − i.
        let g = GeneratorSpec::thermal(
            ModeSet::new(vec![1.0]).unwrap(),
            Array1::from_elem(1, cx(0.0, 0.0)),
            1.0,
            vec![0.2],
        )
        .unwrap();
        let c = CorrelationMatrix::new(HermitianMatrix::from_diag_real(&[0.5])).unwrap();
        let s =
            ReducedState::from_correlation(&c, Array1::from_elem(1, cx(1.0, 0.0))).unwrap();
        let out = rhs_alpha(&s, &g).unwrap();
        assert_close_c(
            out[0],
            cx(-0.06321205588285577, -1.0),
            1e-15,
            "thermal damping of alpha",
        );
    }

    #[test]
    fn detailed_balance_is_exact() {
        let beta = 1.3;
        let gamma_down = vec![0.2, 0.45];
        let modes = ModeSet::new(vec![1.0, 2.5]).unwrap();
        let g = GeneratorSpec::thermal(
            modes.clone(),
            Array1::from_elem(2, cx(0.0, 0.0)),
            beta,
            gamma_down.clone(),
        )
        .unwrap();
        let (up, down) = g.resolved_rates().unwrap();
        for (k, &g_down) in gamma_down.iter().enumerate() {
            let want_up = g_down * (-beta * modes.omega()[k]).exp();
            assert_eq!(up.diagonal()[k], want_up);
            assert_eq!(down.diagonal()[k], g_down);
        }
    }

    #[test]
    fn detailed_balance_scales_with_hbar() {
        let g = GeneratorSpec::new(
            ModeSet::new(vec![1.0]).unwrap(),
            Array1::from_elem(1, cx(0.0, 0.0)),
            Some(BathSpec::thermal(1.0, vec![0.2]).unwrap()),
            ScatteringSpec::empty(),
            Units::new(2.0, 1.0).unwrap(),
        )
        .unwrap();
        let (up, _) = g.resolved_rates().unwrap();
        assert_close(up.diagonal()[0], 0.2 * (-2.0f64).exp(), 1e-18, "hbar in balance");
    }

    #[test]
    fn correlation_rhs_is_zero_for_driven_coherent_state() {
        let g = GeneratorSpec::driven(
            ModeSet::new(vec![1.0, 2.0]).unwrap(),
            Array1::from_vec(vec![cx(0.4, 0.0), cx(0.0, -0.2)]),
        )
        .unwrap();
        let s = ReducedState::coherent(Array1::from_vec(vec![cx(0.8, 0.1), cx(-0.3, 0.5)]));
        let out = rhs_correlation(&s, &g).unwrap();
        assert_eq!(out.frobenius_norm(), 0.0);
    }

    #[test]
    fn correlation_rhs_never_reads_the_drive() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let s = random_state(2, &mut rng);
        let with_drive = two_mode_full_generator(&mut rng);
        let without_drive = GeneratorSpec::new(
            with_drive.modes().clone(),
            Array1::from_elem(2, cx(0.0, 0.0)),
            with_drive.bath().cloned(),
            ScatteringSpec::new(
                with_drive
                    .resolved_channels()
                    .iter()
                    .map(|c| ScatterChannel {
                        weight: c.weight,
                        unitary: c.u.clone(),
                    })
                    .collect(),
            )
            .unwrap(),
            Units::default(),
        )
        .unwrap();
        let a = rhs_correlation(&s, &with_drive).unwrap();
        let b = rhs_correlation(&s, &without_drive).unwrap();
        assert_eq!(a.raw(), b.raw());
    }

    #[test]
    fn bath_correlation_rhs_at_vacuum_is_gamma_up() {
        let g = GeneratorSpec::thermal(
            ModeSet::new(vec![1.0]).unwrap(),
            Array1::from_elem(1, cx(0.0, 0.0)),
            2.0,
            vec![0.5],
        )
        .unwrap();
        let s = ReducedState::vacuum(1);
        let out = rhs_correlation(&s, &g).unwrap();
        let gamma_up = 0.5 * (-2.0f64).exp();
        assert_close(out.raw()[(0, 0)].re, gamma_up, 1e-17, "spontaneous feed");
    }

    #[test]
    fn chain_rule_consistency_of_the_three_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        for trial in 0..20 {
            let g = two_mode_full_generator(&mut rng);
            let s = random_state(2, &mut rng);
            let dc = rhs_correlation(&s, &g).unwrap();
            let dr = rhs_r(&s, &g).unwrap();
            let da = rhs_alpha(&s, &g).unwrap();
            let chain = dr.raw()
                - &crate::linalg::outer(&da, s.alpha())
                - &crate::linalg::outer(s.alpha(), &da);
            let dev = frobenius(&(dc.raw() - &chain));
            let scale = dr.frobenius_norm().max(1.0);
            assert!(
                dev <= 1e-12 * scale,
                "chain rule broken at trial {trial}: {dev:.3e}"
            );
        }
    }

    #[test]
    fn trace_law_of_particle_number() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..10 {
            let g = two_mode_full_generator(&mut rng);
            let s = random_state(2, &mut rng);
            let dr = rhs_r(&s, &g).unwrap();
            // d tr r/dt = 2 Re⟨α|ζ⟩ + tr[(γ↑−γ↓) r] + tr γ↑; scattering drops out.
            let drive: f64 = s
                .alpha()
                .iter()
                .zip(g.zeta().iter())
                .map(|(a, z)| (a.conj() * z).re)
                .sum::<f64>()
                * 2.0;
            let (up, down) = g.resolved_rates().unwrap();
            let gain = up.raw() - down.raw();
            let bath = crate::state::trace_product(&gain, s.r().raw()) + up.trace();
            assert_close(dr.trace(), drive + bath, 1e-12, "trace law");
        }
    }

    #[test]
    fn scattering_only_contracts_alpha_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..50 {
            let modes = ModeSet::new(vec![1.0, 2.0, 0.5]).unwrap();
            let scattering = ScatteringSpec::new(vec![ScatterChannel {
                weight: rng.gen_range(0.01..2.0),
                unitary: random_unitary(3, &mut rng),
            }])
            .unwrap();
            let g = GeneratorSpec::new(
                modes,
                Array1::from_elem(3, cx(0.0, 0.0)),
                None,
                scattering,
                Units::default(),
            )
            .unwrap();
            let s = random_state(3, &mut rng);
            let da = rhs_alpha(&s, &g).unwrap();
            let growth: f64 = s
                .alpha()
                .iter()
                .zip(da.iter())
                .map(|(a, d)| (a.conj() * d).re)
                .sum::<f64>()
                * 2.0;
            assert!(
                growth <= 1e-12,
                "coherent amplitude must not grow under scattering: {growth:.3e}"
            );
        }
    }

    #[test]
    fn identity_scattering_channel_is_inert() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let modes = ModeSet::new(vec![1.0, 2.0]).unwrap();
        let with_id = GeneratorSpec::new(
            modes.clone(),
            Array1::from_elem(2, cx(0.0, 0.0)),
            None,
            ScatteringSpec::new(vec![ScatterChannel {
                weight: 5.0,
                unitary: identity(2),
            }])
            .unwrap(),
            Units::default(),
        )
        .unwrap();
        let without = GeneratorSpec::free(modes);
        let s = random_state(2, &mut rng);
        let a = rhs_r(&s, &with_id).unwrap();
        let b = rhs_r(&s, &without).unwrap();
        assert!(frobenius(&(a.raw() - b.raw())) <= 1e-15);
        let ca = rhs_correlation(&s, &with_id).unwrap();
        let cb = rhs_correlation(&s, &without).unwrap();
        assert!(frobenius(&(ca.raw() - cb.raw())) <= 1e-15);
    }

    #[test]
    fn swap_channel_moves_population() {
        let swap = Array2::from_shape_vec(
            (2, 2),
            vec![cx(0.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0)],
        )
        .unwrap();
        let w = 0.7;
        let g = GeneratorSpec::new(
            ModeSet::new(vec![1.0, 1.0]).unwrap(),
            Array1::from_elem(2, cx(0.0, 0.0)),
            None,
            ScatteringSpec::new(vec![ScatterChannel {
                weight: w,
                unitary: swap,
            }])
            .unwrap(),
            Units::default(),
        )
        .unwrap();
        let r = HermitianMatrix::from_diag_real(&[1.0, 0.0]);
        let s = ReducedState::new(r, Array1::from_elem(2, cx(0.0, 0.0))).unwrap();
        let out = rhs_r(&s, &g).unwrap();
        assert_close(out.raw()[(0, 0)].re, -w, 1e-15, "drain");
        assert_close(out.raw()[(1, 1)].re, w, 1e-15, "fill");
    }

    #[test]
    fn outputs_are_exactly_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let g = two_mode_full_generator(&mut rng);
        let s = random_state(2, &mut rng);
        for m in [rhs_r(&s, &g).unwrap(), rhs_correlation(&s, &g).unwrap()] {
            let dev = frobenius(&(m.raw() - &dagger(m.raw())));
            assert!(dev <= 1e-12, "hermiticity drift {dev:.3e}");
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(BathSpec::thermal(0.0, vec![0.1]).is_err());
        assert!(BathSpec::thermal(-1.0, vec![0.1]).is_err());
        assert!(BathSpec::thermal(1.0, vec![-0.1]).is_err());
        assert!(BathSpec::general(
            HermitianMatrix::from_diag_real(&[-0.5]),
            HermitianMatrix::from_diag_real(&[0.1]),
        )
        .is_err());
        let skewed = Array2::from_shape_vec(
            (2, 2),
            vec![cx(1.0, 0.0), cx(0.5, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)],
        )
        .unwrap();
        assert!(ScatteringSpec::new(vec![ScatterChannel {
            weight: 0.5,
            unitary: skewed,
        }])
        .is_err());
        assert!(ScatteringSpec::new(vec![ScatterChannel {
            weight: -0.5,
            unitary: identity(2),
        }])
        .is_err());
        // Dimension mismatches surface at generator assembly.
        assert!(GeneratorSpec::driven(
            ModeSet::new(vec![1.0, 2.0]).unwrap(),
            Array1::from_elem(3, cx(0.0, 0.0)),
        )
        .is_err());
        assert!(GeneratorSpec::new(
            ModeSet::new(vec![1.0]).unwrap(),
            Array1::from_elem(1, cx(0.0, 0.0)),
            Some(BathSpec::thermal(1.0, vec![0.1, 0.2]).unwrap()),
            ScatteringSpec::empty(),
            Units::default(),
        )
        .is_err());
    }

    #[test]
    fn rate_scale_tracks_fastest_channel() {
        let g = GeneratorSpec::thermal(
            ModeSet::new(vec![1.0, 3.0]).unwrap(),
            Array1::from_elem(2, cx(0.0, 0.0)),
            1.0,
            vec![0.2, 0.2],
        )
        .unwrap();
        // ω = 3 dominates the thermal decay rates here.
        assert_close(g.rate_scale(), 3.0, 1e-15, "rate scale");
    }
}
