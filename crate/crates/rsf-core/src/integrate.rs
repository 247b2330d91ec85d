//! Time evolution: fixed-step RK4 on the moment equations, closed-form
//! propagators for the exactly solvable regimes, and the steady state of
//! a driven mode set coupled to a thermal bath.
//!
//! The integrator advances the couple (r^α, α) rather than (r, α) and
//! reconstructs r = r^α + |α⟩⟨α| when a sample is recorded. The two
//! parametrizations are mathematically equivalent (chain rule), but the
//! correlation route has two structural advantages: the right-hand side of
//! r^α never reads the drive, so drive-independence of every correlation
//! functional holds to machine precision rather than to integration
//! accuracy; and positivity of r given r^α ⪰ 0 is automatic because
//! |α⟩⟨α| ⪰ 0.
//!
//! Positive semidefiniteness of r^α is enforced at every recorded sample;
//! a violation beyond the shared tolerance aborts the run with
//! [`Error::Integration`].

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::generator::{alpha_rhs_raw, correlation_rhs_raw, GeneratorSpec, Rates};
use crate::linalg::hermitize;
use crate::state::{CorrelationMatrix, ReducedState};

/// Fixed-step integrations should keep dt · rate_scale at or below this.
pub const STABILITY_LIMIT: f64 = 0.1;

/// Fixed-step integration parameters. The final time is rounded to the
/// nearest whole number of steps.
#[derive(Clone, Copy, Debug)]
pub struct SimulationConfig {
    dt: f64,
    t_final: f64,
    output_stride: usize,
}

impl SimulationConfig {
    pub fn new(dt: f64, t_final: f64, output_stride: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Domain(format!(
                "time step must be positive and finite, got {dt}"
            )));
        }
        if !(t_final.is_finite() && t_final >= 0.0) {
            return Err(Error::Domain(format!(
                "final time must be nonnegative and finite, got {t_final}"
            )));
        }
        if output_stride == 0 {
            return Err(Error::Domain(
                "output stride must be at least 1".to_string(),
            ));
        }
        Ok(Self {
            dt,
            t_final,
            output_stride,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn output_stride(&self) -> usize {
        self.output_stride
    }

    /// Number of RK4 steps actually taken.
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// dt times the fastest generator rate; accuracy degrades and the
    /// fixed-step scheme eventually destabilizes as this grows past
    /// [`STABILITY_LIMIT`].
    pub fn stability_margin(&self, g: &GeneratorSpec) -> f64 {
        self.dt * g.rate_scale()
    }
}

/// A sampled trajectory: `times[i]` is the time of `states[i]`; the first
/// entry is the initial state and the last is the final step.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ReducedState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn final_state(&self) -> &ReducedState {
        self.states.last().expect("trajectory is never empty")
    }
}

/// One classical RK4 step of the coupled (r^α, α) system.
fn rk4_step(
    c: &Array2<Complex64>,
    a: &Array1<Complex64>,
    g: &GeneratorSpec,
    dt: f64,
) -> (Array2<Complex64>, Array1<Complex64>) {
    let half = 0.5 * dt;
    let k1c = correlation_rhs_raw(c, a, g);
    let k1a = alpha_rhs_raw(a, g);
    let c2 = c + &k1c.mapv(|z| half * z);
    let a2 = a + &k1a.mapv(|z| half * z);
    let k2c = correlation_rhs_raw(&c2, &a2, g);
    let k2a = alpha_rhs_raw(&a2, g);
    let c3 = c + &k2c.mapv(|z| half * z);
    let a3 = a + &k2a.mapv(|z| half * z);
    let k3c = correlation_rhs_raw(&c3, &a3, g);
    let k3a = alpha_rhs_raw(&a3, g);
    let c4 = c + &k3c.mapv(|z| dt * z);
    let a4 = a + &k3a.mapv(|z| dt * z);
    let k4c = correlation_rhs_raw(&c4, &a4, g);
    let k4a = alpha_rhs_raw(&a4, g);
    let sixth = dt / 6.0;
    let next_c = c
        + &k1c.mapv(|z| sixth * z)
        + &k2c.mapv(|z| 2.0 * sixth * z)
        + &k3c.mapv(|z| 2.0 * sixth * z)
        + &k4c.mapv(|z| sixth * z);
    let next_a = a
        + &k1a.mapv(|z| sixth * z)
        + &k2a.mapv(|z| 2.0 * sixth * z)
        + &k3a.mapv(|z| 2.0 * sixth * z)
        + &k4a.mapv(|z| sixth * z);
    (next_c, next_a)
}

fn sample(
    c: &Array2<Complex64>,
    a: &Array1<Complex64>,
    t: f64,
) -> Result<ReducedState> {
    let herm = hermitize(c);
    let correlation = CorrelationMatrix::new(herm).map_err(|e| match e {
        Error::NegativeEigenvalue {
            min_eigenvalue, ..
        } => Error::Integration {
            t,
            min_eigenvalue,
        },
        other => other,
    })?;
    ReducedState::from_correlation(&correlation, a.clone())
}

/// Integrate the moment equations from `initial` and record a sample at
/// t = 0, every `output_stride` steps, and at the final step.
pub fn evolve(
    initial: &ReducedState,
    g: &GeneratorSpec,
    cfg: &SimulationConfig,
) -> Result<Trajectory> {
    if initial.n_modes() != g.n_modes() {
        return Err(Error::DimensionMismatch {
            context: "state vs generator",
            expected: g.n_modes(),
            found: initial.n_modes(),
        });
    }
    let n_steps = cfg.n_steps();
    let mut c = initial.correlation_matrix()?.into_matrix().into_raw();
    let mut a = initial.alpha().clone();
    let mut times = Vec::with_capacity(n_steps / cfg.output_stride + 2);
    let mut states = Vec::with_capacity(n_steps / cfg.output_stride + 2);
    times.push(0.0);
    states.push(initial.clone());
    for step in 1..=n_steps {
        let (next_c, next_a) = rk4_step(&c, &a, g, cfg.dt);
        c = hermitize(&next_c).into_raw();
        a = next_a;
        if step % cfg.output_stride == 0 || step == n_steps {
            let t = step as f64 * cfg.dt;
            times.push(t);
            states.push(sample(&c, &a, t)?);
        }
    }
    Ok(Trajectory { times, states })
}

/// Per-mode ingredients of the exactly solvable evolutions: the complex
/// frequency ω̃_k = ω_k − i d_k/2, the correlation decay rate
/// d_k = Γ↓_k − Γ↑_k, and the asymptotic occupation n̄_k = Γ↑_k / d_k.
struct SolvableModes {
    tilde: Vec<Complex64>,
    decay: Vec<f64>,
    nbar: Vec<f64>,
}

impl SolvableModes {
    fn without_bath(g: &GeneratorSpec) -> Self {
        let tilde = g
            .modes()
            .omega()
            .iter()
            .map(|&w| Complex64::new(w, 0.0))
            .collect();
        let n = g.n_modes();
        Self {
            tilde,
            decay: vec![0.0; n],
            nbar: vec![0.0; n],
        }
    }

    fn thermal(g: &GeneratorSpec) -> Result<Self> {
        let Rates::Diagonal { up, gain, .. } = g.rates() else {
            return Err(Error::UnsupportedRegime(
                "exact thermal propagation requires a thermal (mode-diagonal) bath",
            ));
        };
        let omega = g.modes().omega();
        let n = g.n_modes();
        let mut tilde = Vec::with_capacity(n);
        let mut decay = Vec::with_capacity(n);
        let mut nbar = Vec::with_capacity(n);
        for k in 0..n {
            let d = -gain[k];
            tilde.push(Complex64::new(omega[k], -0.5 * d));
            decay.push(d);
            nbar.push(if d > 0.0 { up[k] / d } else { 0.0 });
        }
        Ok(Self { tilde, decay, nbar })
    }
}

fn closed_form_core(
    initial: &ReducedState,
    g: &GeneratorSpec,
    t: f64,
    modes: &SolvableModes,
) -> Result<ReducedState> {
    if initial.n_modes() != g.n_modes() {
        return Err(Error::DimensionMismatch {
            context: "state vs generator",
            expected: g.n_modes(),
            found: initial.n_modes(),
        });
    }
    let n = g.n_modes();
    let zeta = g.zeta();
    let minus_i = Complex64::new(0.0, -1.0);
    let phase: Vec<Complex64> = modes
        .tilde
        .iter()
        .map(|&w| (minus_i * w * t).exp())
        .collect();
    let alpha0 = initial.alpha();
    let alpha = Array1::from_shape_fn(n, |k| {
        phase[k] * alpha0[k] + minus_i * (zeta[k] / modes.tilde[k]) * (1.0 - phase[k])
    });
    let c0 = initial.correlation_matrix()?;
    let c0 = c0.matrix().raw();
    let mut c = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
    for k in 0..n {
        for kp in 0..n {
            // e^{−i(ω̃_k − ω̃_k'^*)t} = e^{−iω̃_k t} · (e^{−iω̃_k' t})^*
            c[(k, kp)] = phase[k] * phase[kp].conj() * c0[(k, kp)];
        }
        c[(k, k)] += modes.nbar[k] * (1.0 - (-modes.decay[k] * t).exp());
    }
    let correlation = CorrelationMatrix::new(hermitize(&c))?;
    ReducedState::from_correlation(&correlation, alpha)
}

/// Exact propagation under free evolution alone. Errors if the generator
/// carries a drive, bath, or scattering.
pub fn closed_form_free(
    initial: &ReducedState,
    g: &GeneratorSpec,
    t: f64,
) -> Result<ReducedState> {
    if g.has_drive() {
        return Err(Error::UnsupportedRegime(
            "free propagation requires a vanishing drive",
        ));
    }
    closed_form_coherent(initial, g, t)
}

/// Exact propagation under free evolution plus a coherent drive. Errors
/// if the generator carries a bath or scattering.
pub fn closed_form_coherent(
    initial: &ReducedState,
    g: &GeneratorSpec,
    t: f64,
) -> Result<ReducedState> {
    if g.has_bath() {
        return Err(Error::UnsupportedRegime(
            "driven propagation without a bath was requested, but a bath is present",
        ));
    }
    if g.has_scattering() {
        return Err(Error::UnsupportedRegime(
            "exact propagation does not support scattering channels",
        ));
    }
    closed_form_core(initial, g, t, &SolvableModes::without_bath(g))
}

/// Exact propagation under free evolution, a coherent drive, and a
/// thermal bath. Errors if the generator carries scattering or a
/// non-thermal bath.
pub fn closed_form_thermal(
    initial: &ReducedState,
    g: &GeneratorSpec,
    t: f64,
) -> Result<ReducedState> {
    if g.has_scattering() {
        return Err(Error::UnsupportedRegime(
            "exact propagation does not support scattering channels",
        ));
    }
    closed_form_core(initial, g, t, &SolvableModes::thermal(g)?)
}

/// The unique steady state of a driven mode set coupled to a thermal bath
/// with strictly positive downward rates: thermal occupation in the
/// correlation and a drive-displaced coherent amplitude.
pub fn steady_state(g: &GeneratorSpec) -> Result<ReducedState> {
    if g.has_scattering() {
        return Err(Error::UnsupportedRegime(
            "steady state is only available without scattering channels",
        ));
    }
    let modes = SolvableModes::thermal(g)?;
    for (k, &d) in modes.decay.iter().enumerate() {
        if d <= 0.0 {
            return Err(Error::NoSteadyState { mode: k });
        }
    }
    let n = g.n_modes();
    let minus_i = Complex64::new(0.0, -1.0);
    let zeta = g.zeta();
    let alpha = Array1::from_shape_fn(n, |k| minus_i * zeta[k] / modes.tilde[k]);
    let correlation = CorrelationMatrix::new(crate::linalg::HermitianMatrix::from_diag_real(
        &modes.nbar,
    ))?;
    ReducedState::from_correlation(&correlation, alpha)
}
