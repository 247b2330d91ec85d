//! Batch and grid evaluation over independent parameter sets.
//!
//! Grid cells and batch trajectories are independent computations over
//! immutable inputs, so they parallelize trivially. With the `parallel`
//! feature (on by default) the maps in this module run on the rayon
//! thread pool; without it they run sequentially. Results are
//! deterministic and identically ordered either way — parallelism is
//! over *independent* work items, and each item's arithmetic is
//! unchanged.

use crate::error::{Error, Result};
use crate::generator::GeneratorSpec;
use crate::integrate::{evolve, SimulationConfig, Trajectory};
use crate::state::{ModeSet, ReducedState, Units};
use crate::thermo::steady_entropy_vs_beta;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fallible map over a slice, parallel when the `parallel` feature is
/// enabled, preserving item order.
fn try_map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Evenly spaced inclusive grid of inverse temperatures.
pub fn beta_grid(beta_min: f64, beta_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(beta_min.is_finite() && beta_min > 0.0) {
        return Err(Error::Domain(format!(
            "beta_min must be positive and finite, got {beta_min}"
        )));
    }
    if !(beta_max.is_finite() && beta_max >= beta_min) {
        return Err(Error::Domain(format!(
            "beta_max must be finite and at least beta_min, got {beta_max}"
        )));
    }
    if steps == 0 || (steps == 1 && beta_max != beta_min) {
        return Err(Error::Domain(format!(
            "need at least two grid points to span [{beta_min}, {beta_max}], got {steps}"
        )));
    }
    if steps == 1 {
        return Ok(vec![beta_min]);
    }
    let span = beta_max - beta_min;
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                beta_max
            } else {
                beta_min + span * i as f64 / (steps - 1) as f64
            }
        })
        .collect())
}

/// Steady-state entropies of single thermal modes on a β × ω grid, one
/// row per inverse temperature, one column per mode frequency.
#[derive(Clone, Debug)]
pub struct EntropyGrid {
    betas: Vec<f64>,
    omegas: Vec<f64>,
    /// Row-major: `values[i * omegas.len() + j]` is S(betas[i], omegas[j]).
    values: Vec<f64>,
}

impl EntropyGrid {
    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    /// S at (betas()[row], omegas()[col]), in units of the Boltzmann
    /// constant.
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.omegas.len() + col]
    }

    /// One row of entropies, ordered like `omegas()`.
    pub fn row(&self, row: usize) -> &[f64] {
        let w = self.omegas.len();
        &self.values[row * w..(row + 1) * w]
    }
}

/// Evaluate the steady-state entropy of a single damped mode for every
/// (β, ω) pair. Each cell is the entropy the mode relaxes to under a
/// bath at inverse temperature β — a closed-form function of βħω.
pub fn steady_entropy_grid(betas: &[f64], omegas: &[f64], units: Units) -> Result<EntropyGrid> {
    if betas.is_empty() || omegas.is_empty() {
        return Err(Error::Domain(
            "entropy grid needs at least one β and one ω".to_string(),
        ));
    }
    let mode_sets = omegas
        .iter()
        .map(|&w| ModeSet::new(vec![w]))
        .collect::<Result<Vec<_>>>()?;
    let rows = try_map(betas, |&beta| {
        mode_sets
            .iter()
            .map(|m| steady_entropy_vs_beta(beta, m, units))
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok(EntropyGrid {
        betas: betas.to_vec(),
        omegas: omegas.to_vec(),
        values: rows.into_iter().flatten().collect(),
    })
}

/// Propagate many initial states under one generator, in input order.
/// Equivalent to calling [`evolve`] on each state; the batch form exists
/// so independent trajectories can share the thread pool.
pub fn evolve_batch(
    initials: &[ReducedState],
    g: &GeneratorSpec,
    cfg: &SimulationConfig,
) -> Result<Vec<Trajectory>> {
    try_map(initials, |s| evolve(s, g, cfg))
}
