//! Brute-force cross-check on a truncated Fock space.
//!
//! The moment equations integrated by this crate are a closed reduction of
//! a full many-body master equation. This module rebuilds that master
//! equation literally — ladder operators on a truncated multimode Fock
//! space, the Hamiltonian, drive, bath dissipators, and lifted scattering
//! unitaries — integrates the density matrix with the same fixed-step RK4
//! policy, reduces it back to (r, α) moments, and reports the deviation
//! from the moment-level integration. Agreement is limited only by the
//! occupation cutoff, which is monitored: comparisons abort when the
//! top-level population indicates the truncation is no longer faithful.
//!
//! The density matrix evolves under
//!
//! ```text
//! dρ/dt = K ρ + ρ K† + Σ_kk' γ↓_k'k a_k ρ a_k'† + Σ_kk' γ↑_k'k a_k'† ρ a_k
//!          + Σ_j w_j (U_j ρ U_j† − ρ)
//! K = −i Σ_k ω_k a_k†a_k + Σ_k (ζ_k a_k† − ζ_k^* a_k) − ½D − ½E
//! D = Σ_kk' γ↓_k'k a_k'†a_k,   E = Σ_kk' γ↑_k'k a_k a_k'†
//! ```
//!
//! and a mode-space scattering unitary u = e^{ib} lifts to the full space
//! as U = e^{iB} with B = Σ_kk' b_kk' a_k†a_k', which reproduces
//! α ↦ u α and r ↦ u r u† on the reduced moments.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::generator::GeneratorSpec;
use crate::integrate::SimulationConfig;
use crate::linalg::{
    dagger, frobenius, hermitize, unitary_exp_i, unitary_log, HermitianMatrix,
    HERMITICITY_TOL,
};
use crate::state::ReducedState;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Hard ceiling on the truncated-space dimension.
pub const MAX_FOCK_DIM: usize = 4096;

/// Population allowed in the top occupation level before a comparison is
/// declared invalid.
pub const OVERFLOW_TOL: f64 = 1e-6;

/// Density-matrix traces are required to stay this close to one.
pub const TRACE_TOL: f64 = 1e-8;

/// Truncated Fock space: `n_modes` modes, occupations 0..=cutoff each.
#[derive(Clone, Copy, Debug)]
pub struct FockSpec {
    n_modes: usize,
    cutoff: usize,
}

impl FockSpec {
    pub fn new(n_modes: usize, cutoff: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::Domain("need at least one mode".to_string()));
        }
        if cutoff == 0 {
            return Err(Error::Domain(
                "occupation cutoff must be at least 1".to_string(),
            ));
        }
        let mut dim: usize = 1;
        for _ in 0..n_modes {
            dim = dim.saturating_mul(cutoff + 1);
            if dim > MAX_FOCK_DIM {
                return Err(Error::FockTooLarge {
                    dim,
                    max: MAX_FOCK_DIM,
                });
            }
        }
        Ok(Self { n_modes, cutoff })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// (cutoff + 1)^n_modes.
    pub fn dim(&self) -> usize {
        (self.cutoff + 1).pow(self.n_modes as u32)
    }

    /// Occupation of each mode in the flat basis index (mode 0 varies
    /// slowest).
    fn occupations(&self, mut index: usize) -> Vec<usize> {
        let d = self.cutoff + 1;
        let mut out = vec![0; self.n_modes];
        for k in (0..self.n_modes).rev() {
            out[k] = index % d;
            index /= d;
        }
        out
    }
}

/// A density matrix on the truncated space: Hermitian, unit trace.
#[derive(Clone, Debug)]
pub struct FockState {
    rho: Array2<Complex64>,
}

impl FockState {
    pub fn new(rho: Array2<Complex64>) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::NotSquare {
                rows: rho.nrows(),
                cols: rho.ncols(),
            });
        }
        let scale = frobenius(&rho).max(1.0);
        let deviation = frobenius(&(&rho - &dagger(&rho)));
        if deviation > HERMITICITY_TOL * scale {
            return Err(Error::NotHermitian {
                deviation,
                tol: HERMITICITY_TOL * scale,
            });
        }
        let trace: Complex64 = (0..rho.nrows()).map(|i| rho[(i, i)]).sum();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::Domain(format!(
                "density matrix trace must be 1, got {trace}"
            )));
        }
        Ok(Self {
            rho: hermitize(&rho).into_raw(),
        })
    }

    /// |vac⟩⟨vac| on the truncated space.
    pub fn vacuum(spec: &FockSpec) -> Self {
        let dim = spec.dim();
        let mut rho = Array2::from_elem((dim, dim), ZERO);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        Self { rho }
    }

    pub fn rho(&self) -> &Array2<Complex64> {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.rho[(i, i)].re).sum()
    }
}

/// Kronecker product, first factor most significant.
fn kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ra, ca) = (a.nrows(), a.ncols());
    let (rb, cb) = (b.nrows(), b.ncols());
    let mut out = Array2::from_elem((ra * rb, ca * cb), ZERO);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij != ZERO {
                for p in 0..rb {
                    for q in 0..cb {
                        out[(i * rb + p, j * cb + q)] = aij * b[(p, q)];
                    }
                }
            }
        }
    }
    out
}

/// Single-mode lowering operator on occupations 0..=cutoff.
fn lowering(levels: usize) -> Array2<Complex64> {
    let mut a = Array2::from_elem((levels, levels), ZERO);
    for n in 1..levels {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// The lowering and raising operators (a_k, a_k†) for every mode, in the
/// flat basis of `spec`.
pub fn build_ladder_operators(
    spec: &FockSpec,
) -> Vec<(Array2<Complex64>, Array2<Complex64>)> {
    let levels = spec.cutoff + 1;
    let single = lowering(levels);
    let eye = crate::linalg::identity(levels);
    (0..spec.n_modes)
        .map(|k| {
            let mut acc = Array2::from_elem((1, 1), Complex64::new(1.0, 0.0));
            for j in 0..spec.n_modes {
                let factor = if j == k { &single } else { &eye };
                acc = kron(&acc, factor);
            }
            let adag = dagger(&acc);
            (acc, adag)
        })
        .collect()
}

/// One sandwich term coeff · L ρ R of a dissipator.
struct JumpTerm {
    coeff: Complex64,
    left: Array2<Complex64>,
    right: Array2<Complex64>,
}

/// Everything the master-equation right-hand side needs, precomputed for
/// one (generator, truncation) pair.
pub struct MasterOperators {
    spec: FockSpec,
    k_op: Array2<Complex64>,
    k_dag: Array2<Complex64>,
    jumps: Vec<JumpTerm>,
    scatter: Vec<(f64, Array2<Complex64>)>,
    /// M_(k,k') = a_k'† a_k, for moment reduction.
    moment_ops: Vec<Array2<Complex64>>,
    a_ops: Vec<Array2<Complex64>>,
    /// Basis states with any mode at the cutoff occupation.
    top_level: Vec<bool>,
}

impl MasterOperators {
    pub fn new(g: &GeneratorSpec, spec: &FockSpec) -> Result<Self> {
        if g.n_modes() != spec.n_modes {
            return Err(Error::DimensionMismatch {
                context: "generator vs truncated space",
                expected: spec.n_modes,
                found: g.n_modes(),
            });
        }
        let n = spec.n_modes;
        let dim = spec.dim();
        let ladder = build_ladder_operators(spec);
        let omega = g.modes().omega();
        let zeta = g.zeta();

        // K = −i Σ ω a†a + Σ (ζ a† − ζ* a) − ½D − ½E.
        let mut k_op = Array2::from_elem((dim, dim), ZERO);
        for k in 0..n {
            let (a, adag) = &ladder[k];
            let number = adag.dot(a);
            k_op = k_op + number.mapv(|z| Complex64::new(0.0, -omega[k]) * z);
            if zeta[k] != ZERO {
                k_op = k_op + adag.mapv(|z| zeta[k] * z) - a.mapv(|z| zeta[k].conj() * z);
            }
        }
        let mut jumps = Vec::new();
        if let Some((up, down)) = g.resolved_rates() {
            let up = up.raw();
            let down = down.raw();
            let mut d_op = Array2::from_elem((dim, dim), ZERO);
            let mut e_op = Array2::from_elem((dim, dim), ZERO);
            for k in 0..n {
                for kp in 0..n {
                    let g_down = down[(kp, k)];
                    if g_down != ZERO {
                        d_op = d_op + ladder[kp].1.dot(&ladder[k].0).mapv(|z| g_down * z);
                        jumps.push(JumpTerm {
                            coeff: g_down,
                            left: ladder[k].0.clone(),
                            right: ladder[kp].1.clone(),
                        });
                    }
                    let g_up = up[(kp, k)];
                    if g_up != ZERO {
                        e_op = e_op + ladder[k].0.dot(&ladder[kp].1).mapv(|z| g_up * z);
                        jumps.push(JumpTerm {
                            coeff: g_up,
                            left: ladder[kp].1.clone(),
                            right: ladder[k].0.clone(),
                        });
                    }
                }
            }
            k_op = k_op - d_op.mapv(|z| 0.5 * z) - e_op.mapv(|z| 0.5 * z);
        }
        let mut scatter = Vec::new();
        for ch in g.resolved_channels() {
            // u = e^{ib} on mode space lifts to e^{iB}, B = Σ b_kk' a_k†a_k'.
            let b = unitary_log(&ch.u)?;
            let mut big_b = Array2::from_elem((dim, dim), ZERO);
            for k in 0..n {
                for kp in 0..n {
                    let bkk = b.raw()[(k, kp)];
                    if bkk != ZERO {
                        big_b = big_b + ladder[k].1.dot(&ladder[kp].0).mapv(|z| bkk * z);
                    }
                }
            }
            let lifted = unitary_exp_i(&hermitize(&big_b))?;
            scatter.push((ch.weight, lifted));
        }
        let mut moment_ops = Vec::with_capacity(n * n);
        for k in 0..n {
            for kp in 0..n {
                moment_ops.push(ladder[kp].1.dot(&ladder[k].0));
            }
        }
        let top_level = (0..dim)
            .map(|i| spec.occupations(i).contains(&spec.cutoff))
            .collect();
        Ok(Self {
            spec: *spec,
            k_dag: dagger(&k_op),
            k_op,
            jumps,
            scatter,
            moment_ops,
            a_ops: ladder.into_iter().map(|(a, _)| a).collect(),
            top_level,
        })
    }

    /// dρ/dt for a raw density matrix.
    pub fn rhs(&self, rho: &Array2<Complex64>) -> Array2<Complex64> {
        let mut out = self.k_op.dot(rho) + rho.dot(&self.k_dag);
        for term in &self.jumps {
            let sandwich = term.left.dot(rho).dot(&term.right);
            out = out + sandwich.mapv(|z| term.coeff * z);
        }
        for (w, u) in &self.scatter {
            let conj = u.dot(rho).dot(&dagger(u));
            out = out + (conj - rho).mapv(|z| *w * z);
        }
        out
    }

    /// Population in basis states that touch the occupation cutoff.
    pub fn top_level_population(&self, rho: &Array2<Complex64>) -> f64 {
        (0..rho.nrows())
            .filter(|&i| self.top_level[i])
            .map(|i| rho[(i, i)].re)
            .sum()
    }

    /// Reduce a density matrix to its first and second moments.
    pub fn reduce(&self, state: &FockState) -> Result<ReducedState> {
        let n = self.spec.n_modes;
        let rho = &state.rho;
        let mut r = Array2::from_elem((n, n), ZERO);
        for k in 0..n {
            for kp in 0..n {
                r[(k, kp)] = trace_of_product(rho, &self.moment_ops[k * n + kp]);
            }
        }
        let alpha = Array1::from_shape_fn(n, |k| trace_of_product(rho, &self.a_ops[k]));
        ReducedState::new(HermitianMatrix::new(r)?, alpha)
    }
}

/// Tr[ρ M] without forming the product matrix.
fn trace_of_product(rho: &Array2<Complex64>, m: &Array2<Complex64>) -> Complex64 {
    let n = rho.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += rho[(i, j)] * m[(j, i)];
        }
    }
    acc
}

/// dρ/dt from scratch (builds the operator set on each call — use
/// [`MasterOperators`] directly when integrating).
pub fn rhs_master(
    state: &FockState,
    g: &GeneratorSpec,
    spec: &FockSpec,
) -> Result<Array2<Complex64>> {
    let ops = MasterOperators::new(g, spec)?;
    if state.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            context: "density matrix vs truncated space",
            expected: spec.dim(),
            found: state.dim(),
        });
    }
    Ok(ops.rhs(&state.rho))
}

/// Reduce a density matrix to (r, α) moments.
pub fn reduce(state: &FockState, g: &GeneratorSpec, spec: &FockSpec) -> Result<ReducedState> {
    MasterOperators::new(g, spec)?.reduce(state)
}

/// A sampled master-equation trajectory.
#[derive(Debug)]
pub struct FockTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<FockState>,
}

/// Integrate the master equation with the same fixed-step RK4 and
/// sampling policy as the moment-level integrator. Aborts with a
/// cutoff-overflow error when the top occupation level accumulates more
/// than [`OVERFLOW_TOL`] population.
pub fn evolve_master(
    initial: &FockState,
    g: &GeneratorSpec,
    spec: &FockSpec,
    cfg: &SimulationConfig,
) -> Result<FockTrajectory> {
    if initial.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            context: "density matrix vs truncated space",
            expected: spec.dim(),
            found: initial.dim(),
        });
    }
    let ops = MasterOperators::new(g, spec)?;
    let n_steps = cfg.n_steps();
    let stride = cfg.output_stride();
    let dt = cfg.dt();
    let mut rho = initial.rho.clone();
    let mut times = Vec::with_capacity(n_steps / stride + 2);
    let mut states = Vec::with_capacity(n_steps / stride + 2);
    times.push(0.0);
    states.push(initial.clone());
    let check = |rho: &Array2<Complex64>| -> Result<FockState> {
        let population = ops.top_level_population(rho);
        if population > OVERFLOW_TOL {
            return Err(Error::CutoffOverflow {
                population,
                bound: OVERFLOW_TOL,
            });
        }
        FockState::new(rho.clone())
    };
    for step in 1..=n_steps {
        let half = 0.5 * dt;
        let k1 = ops.rhs(&rho);
        let k2 = ops.rhs(&(&rho + &k1.mapv(|z| half * z)));
        let k3 = ops.rhs(&(&rho + &k2.mapv(|z| half * z)));
        let k4 = ops.rhs(&(&rho + &k3.mapv(|z| dt * z)));
        let sixth = dt / 6.0;
        rho = &rho
            + &k1.mapv(|z| sixth * z)
            + &k2.mapv(|z| 2.0 * sixth * z)
            + &k3.mapv(|z| 2.0 * sixth * z)
            + &k4.mapv(|z| sixth * z);
        rho = hermitize(&rho).into_raw();
        if step % stride == 0 || step == n_steps {
            times.push(step as f64 * dt);
            states.push(check(&rho)?);
        }
    }
    Ok(FockTrajectory { times, states })
}

/// Outcome of one moment-level vs master-equation comparison.
#[derive(Clone, Copy, Debug)]
pub struct DeviationReport {
    /// max over samples of ‖r_moments − r_master‖_F.
    pub max_r_deviation: f64,
    /// max over samples of ‖α_moments − α_master‖₂.
    pub max_alpha_deviation: f64,
    /// Sample time where the second-moment deviation peaks.
    pub worst_time: f64,
    /// Number of compared samples (including t = 0).
    pub samples: usize,
    /// Largest top-occupation population seen in the master trajectory.
    pub max_top_population: f64,
}

impl DeviationReport {
    /// The larger of the two deviation maxima.
    pub fn worst(&self) -> f64 {
        self.max_r_deviation.max(self.max_alpha_deviation)
    }
}

/// Run both integrators from the vacuum and report the worst moment
/// deviation along the way. Vacuum is the one state exactly representable
/// on both sides; every other state of interest is reached from it by the
/// generator itself.
pub fn compare_trajectories(
    g: &GeneratorSpec,
    spec: &FockSpec,
    cfg: &SimulationConfig,
) -> Result<DeviationReport> {
    let moment_traj = crate::integrate::evolve(&ReducedState::vacuum(g.n_modes()), g, cfg)?;
    let ops = MasterOperators::new(g, spec)?;
    let master_traj = evolve_master(&FockState::vacuum(spec), g, spec, cfg)?;
    debug_assert_eq!(moment_traj.times, master_traj.times);
    let mut report = DeviationReport {
        max_r_deviation: 0.0,
        max_alpha_deviation: 0.0,
        worst_time: 0.0,
        samples: master_traj.times.len(),
        max_top_population: 0.0,
    };
    for ((t, sm), sf) in master_traj
        .times
        .iter()
        .zip(&moment_traj.states)
        .zip(&master_traj.states)
    {
        let reduced = ops.reduce(sf)?;
        let dr = frobenius(&(sm.r().raw() - reduced.r().raw()));
        let da = (sm.alpha() - reduced.alpha())
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if dr > report.max_r_deviation {
            report.max_r_deviation = dr;
            report.worst_time = *t;
        }
        report.max_alpha_deviation = report.max_alpha_deviation.max(da);
        report.max_top_population = report
            .max_top_population
            .max(ops.top_level_population(&sf.rho));
    }
    Ok(report)
}
