//! The four subcommands, as functions returning a process exit code.

use std::io::Write;
use std::path::Path;

use rsf_core::fock::{compare_trajectories, FockSpec};
use rsf_core::integrate::{evolve, steady_state, STABILITY_LIMIT};
use rsf_core::state::Units;
use rsf_core::sweep::{beta_grid, steady_entropy_grid};
use rsf_core::thermo::{
    entropy, equilibrium_free_energy, internal_energy, sample_trajectory,
};

use crate::config::{self, LoadedScenario, Scenario};
use crate::output;
use crate::CliError;

/// Integrate the configured scenario and write the thermodynamic time
/// series.
pub fn run_simulate(config_path: &Path, out: &Path, dump_state: bool) -> Result<i32, CliError> {
    let loaded = config::load(config_path)?;
    warn_if_stiff(&loaded);
    let traj = evolve(&loaded.initial, &loaded.generator, &loaded.sim)?;
    let samples = sample_trajectory(&traj, &loaded.generator)?;
    output::write_simulation_csv(out, &samples, &traj, dump_state, loaded.generator.n_modes())?;
    Ok(0)
}

/// Tabulate the steady-state entropy of a single damped mode over a
/// β × ω grid.
pub fn run_sweep_entropy(
    beta_min: f64,
    beta_max: f64,
    steps: usize,
    mut omegas: Vec<f64>,
    out: &Path,
) -> Result<i32, CliError> {
    if steps < 2 {
        return Err(CliError::Config(format!(
            "--steps must be at least 2, got {steps}"
        )));
    }
    omegas.sort_by(|a, b| a.partial_cmp(b).expect("frequencies must be comparable"));
    let betas = beta_grid(beta_min, beta_max, steps)?;
    let grid = steady_entropy_grid(&betas, &omegas, Units::default())?;
    output::write_sweep_csv(out, &betas, &omegas, |i, j| grid.value(i, j))?;
    Ok(0)
}

/// Print the closed-form steady state of a thermal scenario.
pub fn run_steady(config_path: &Path) -> Result<i32, CliError> {
    let loaded = config::load(config_path)?;
    if loaded.scenario != Scenario::Thermal {
        return Err(CliError::Config(format!(
            "steady requires a thermal scenario, got \"{}\"",
            config::scenario_name(loaded.scenario)
        )));
    }
    let beta = loaded
        .generator
        .thermal_beta()
        .expect("a thermal scenario always carries a bath temperature");
    let steady = steady_state(&loaded.generator)?;
    let correlation = steady.correlation_matrix()?;
    let s = entropy(&correlation)?;
    let modes = loaded.generator.modes();
    let units = loaded.generator.units();
    let u = internal_energy(&steady, modes, units)?;
    let f_eq = equilibrium_free_energy(beta, modes, units)?;

    let mut buf: Vec<u8> = Vec::new();
    output::print_vector(&mut buf, "alpha_steady", steady.alpha()).expect("in-memory write");
    output::print_matrix(&mut buf, "r_steady", steady.r().raw()).expect("in-memory write");
    output::print_matrix(&mut buf, "correlation", correlation.matrix().raw())
        .expect("in-memory write");
    writeln!(buf, "S = {}", output::fmt(s)).expect("in-memory write");
    writeln!(buf, "U = {}", output::fmt(u)).expect("in-memory write");
    writeln!(buf, "F_eq = {}", output::fmt(f_eq)).expect("in-memory write");
    emit(&buf)?;
    Ok(0)
}

/// Integrate the moment equations and the full truncated-basis master
/// equation side by side and report the worst moment deviation. Exit 0
/// when it stays within the configured tolerance, 1 when it does not.
pub fn run_oracle_compare(config_path: &Path) -> Result<i32, CliError> {
    let loaded = config::load(config_path)?;
    let oracle = loaded.oracle.ok_or_else(|| {
        CliError::Config(format!(
            "{}: oracle-compare requires an [oracle] section (cutoff, tolerance)",
            config_path.display()
        ))
    })?;
    if !(oracle.tolerance.is_finite() && oracle.tolerance > 0.0) {
        return Err(CliError::Config(format!(
            "[oracle] tolerance must be positive and finite, got {}",
            oracle.tolerance
        )));
    }
    let n = loaded.generator.n_modes();
    if n > 2 {
        return Err(CliError::Config(format!(
            "oracle-compare supports at most 2 modes, got {n}"
        )));
    }
    let spec = FockSpec::new(n, oracle.cutoff)?;
    warn_if_stiff(&loaded);
    let report = compare_trajectories(&loaded.generator, &spec, &loaded.sim)?;
    let pass = report.worst() <= oracle.tolerance;
    let mut buf: Vec<u8> = Vec::new();
    writeln!(
        buf,
        "modes = {n}, cutoff = {}, dimension = {}",
        oracle.cutoff,
        spec.dim()
    )
    .expect("in-memory write");
    writeln!(buf, "samples compared = {}", report.samples).expect("in-memory write");
    writeln!(
        buf,
        "max second-moment deviation = {} (at t = {})",
        output::fmt(report.max_r_deviation),
        output::fmt(report.worst_time)
    )
    .expect("in-memory write");
    writeln!(
        buf,
        "max coherence deviation = {}",
        output::fmt(report.max_alpha_deviation)
    )
    .expect("in-memory write");
    writeln!(
        buf,
        "max top-level population = {}",
        output::fmt(report.max_top_population)
    )
    .expect("in-memory write");
    writeln!(buf, "tolerance = {}", output::fmt(oracle.tolerance)).expect("in-memory write");
    writeln!(buf, "result: {}", if pass { "PASS" } else { "FAIL" }).expect("in-memory write");
    emit(&buf)?;
    Ok(if pass { 0 } else { 1 })
}

/// Write an assembled report to stdout.
fn emit(buf: &[u8]) -> Result<(), CliError> {
    std::io::stdout()
        .write_all(buf)
        .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}")))
}

/// One stderr line when the step size is large relative to the fastest
/// generator timescale.
fn warn_if_stiff(loaded: &LoadedScenario) {
    let margin = loaded.sim.stability_margin(&loaded.generator);
    if margin > STABILITY_LIMIT {
        eprintln!(
            "warning: dt times the fastest generator rate is {margin:.3} \
             (above {STABILITY_LIMIT}); expect degraded accuracy or an \
             integration failure — reduce dt"
        );
    }
}
