//! Scenario configuration: a TOML file describing the modes, generator,
//! initial state, and integration grid of one run.
//!
//! Complex numbers are written as two-element `[re, im]` arrays; complex
//! matrices are row-major nested lists of such pairs. The `scenario` key
//! declares which generator channels the file is allowed to use, so a
//! config cannot silently drift from the physics its name promises:
//!
//! * `free` — no drive, no bath, no scattering,
//! * `coherent` — drive allowed, no bath, no scattering,
//! * `thermal` — thermal bath required, drive allowed, no scattering,
//! * `custom` — anything the generator supports.

use std::path::Path;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::Deserialize;

use rsf_core::generator::{BathSpec, GeneratorSpec, ScatterChannel, ScatteringSpec};
use rsf_core::integrate::SimulationConfig;
use rsf_core::linalg::HermitianMatrix;
use rsf_core::state::{ModeSet, ReducedState, Units};
use rsf_core::thermo::thermal_state;

use crate::CliError;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    scenario: Scenario,
    modes: ModesSection,
    drive: Option<DriveSection>,
    bath: Option<BathSection>,
    #[serde(default)]
    scattering: Vec<ChannelSection>,
    initial: Option<InitialSection>,
    simulation: SimulationSection,
    oracle: Option<OracleSection>,
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Free,
    Coherent,
    Thermal,
    Custom,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModesSection {
    omega: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DriveSection {
    zeta: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BathSection {
    kind: BathKind,
    beta: Option<f64>,
    gamma_down: Option<Vec<f64>>,
    gamma_up_matrix: Option<Vec<Vec<[f64; 2]>>>,
    gamma_down_matrix: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum BathKind {
    Thermal,
    General,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    weight: f64,
    unitary: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialSection {
    kind: InitialKind,
    beta: Option<f64>,
    r: Option<Vec<Vec<[f64; 2]>>>,
    alpha: Option<Vec<[f64; 2]>>,
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum InitialKind {
    Vacuum,
    Thermal,
    Explicit,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulationSection {
    dt: f64,
    t_final: f64,
    output_stride: usize,
    hbar: Option<f64>,
    kb: Option<f64>,
}

/// Settings for the brute-force cross-check command.
#[derive(Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    /// Per-mode occupation cutoff of the truncated number basis.
    pub cutoff: usize,
    /// Largest acceptable moment deviation for a PASS verdict.
    pub tolerance: f64,
}

/// A fully validated scenario: domain objects ready to run.
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub generator: GeneratorSpec,
    pub initial: ReducedState,
    pub sim: SimulationConfig,
    pub oracle: Option<OracleSection>,
}

fn c64(pair: [f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

fn complex_vector(key: &str, rows: &[[f64; 2]], n: usize) -> Result<Array1<Complex64>, CliError> {
    if rows.len() != n {
        return Err(CliError::Config(format!(
            "{key} must have {n} entries (one per mode), got {}",
            rows.len()
        )));
    }
    Ok(Array1::from_iter(rows.iter().copied().map(c64)))
}

fn complex_matrix(key: &str, rows: &[Vec<[f64; 2]>], n: usize) -> Result<Array2<Complex64>, CliError> {
    if rows.len() != n || rows.iter().any(|row| row.len() != n) {
        return Err(CliError::Config(format!(
            "{key} must be a {n}x{n} row-major complex matrix"
        )));
    }
    Ok(Array2::from_shape_fn((n, n), |(i, j)| c64(rows[i][j])))
}

/// Read, parse, and validate a scenario file.
pub fn load(path: &Path) -> Result<LoadedScenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let file: ScenarioFile = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    build(file).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn build(file: ScenarioFile) -> Result<LoadedScenario, CliError> {
    let n = file.modes.omega.len();
    let modes = ModeSet::new(file.modes.omega.clone()).map_err(config_err("[modes] omega"))?;
    let units = Units::new(
        file.simulation.hbar.unwrap_or(1.0),
        file.simulation.kb.unwrap_or(1.0),
    )
    .map_err(config_err("[simulation] hbar/kb"))?;

    let zeta = match &file.drive {
        Some(d) => complex_vector("[drive] zeta", &d.zeta, n)?,
        None => Array1::from_elem(n, Complex64::new(0.0, 0.0)),
    };
    let has_drive = zeta.iter().any(|z| *z != Complex64::new(0.0, 0.0));

    let bath = match &file.bath {
        None => None,
        Some(b) => Some(build_bath(b, n)?),
    };

    let channels = file
        .scattering
        .iter()
        .enumerate()
        .map(|(j, ch)| {
            Ok(ScatterChannel {
                weight: ch.weight,
                unitary: complex_matrix(&format!("[[scattering]][{j}] unitary"), &ch.unitary, n)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let scattering = ScatteringSpec::new(channels).map_err(config_err("[[scattering]]"))?;

    check_scenario(
        file.scenario,
        has_drive,
        bath.as_ref(),
        !file.scattering.is_empty(),
    )?;

    let generator = GeneratorSpec::new(modes.clone(), zeta, bath, scattering, units)
        .map_err(config_err("generator"))?;

    let initial = build_initial(file.initial.as_ref(), &generator, &modes, units, n)?;

    let sim = SimulationConfig::new(
        file.simulation.dt,
        file.simulation.t_final,
        file.simulation.output_stride,
    )
    .map_err(config_err("[simulation]"))?;

    Ok(LoadedScenario {
        scenario: file.scenario,
        generator,
        initial,
        sim,
        oracle: file.oracle,
    })
}

fn build_bath(b: &BathSection, n: usize) -> Result<BathSpec, CliError> {
    match b.kind {
        BathKind::Thermal => {
            let beta = b.beta.ok_or_else(|| {
                CliError::Config("[bath] kind = \"thermal\" requires beta".to_string())
            })?;
            let gamma_down = b.gamma_down.clone().ok_or_else(|| {
                CliError::Config("[bath] kind = \"thermal\" requires gamma_down".to_string())
            })?;
            if gamma_down.len() != n {
                return Err(CliError::Config(format!(
                    "[bath] gamma_down must have {n} entries (one per mode), got {}",
                    gamma_down.len()
                )));
            }
            if b.gamma_up_matrix.is_some() || b.gamma_down_matrix.is_some() {
                return Err(CliError::Config(
                    "[bath] kind = \"thermal\" does not take rate matrices".to_string(),
                ));
            }
            BathSpec::thermal(beta, gamma_down).map_err(config_err("[bath]"))
        }
        BathKind::General => {
            let up_rows = b.gamma_up_matrix.as_ref().ok_or_else(|| {
                CliError::Config("[bath] kind = \"general\" requires gamma_up_matrix".to_string())
            })?;
            let down_rows = b.gamma_down_matrix.as_ref().ok_or_else(|| {
                CliError::Config("[bath] kind = \"general\" requires gamma_down_matrix".to_string())
            })?;
            if b.beta.is_some() || b.gamma_down.is_some() {
                return Err(CliError::Config(
                    "[bath] kind = \"general\" takes only the two rate matrices".to_string(),
                ));
            }
            let up = HermitianMatrix::new(complex_matrix("[bath] gamma_up_matrix", up_rows, n)?)
                .map_err(config_err("[bath] gamma_up_matrix"))?;
            let down =
                HermitianMatrix::new(complex_matrix("[bath] gamma_down_matrix", down_rows, n)?)
                    .map_err(config_err("[bath] gamma_down_matrix"))?;
            BathSpec::general(up, down).map_err(config_err("[bath]"))
        }
    }
}

fn check_scenario(
    scenario: Scenario,
    has_drive: bool,
    bath: Option<&BathSpec>,
    has_scattering: bool,
) -> Result<(), CliError> {
    let fail = |what: &str| {
        Err(CliError::Config(format!(
            "scenario \"{}\" does not admit {what}",
            scenario_name(scenario)
        )))
    };
    match scenario {
        Scenario::Free => {
            if has_drive {
                return fail("a nonzero [drive]");
            }
            if bath.is_some() {
                return fail("a [bath] section");
            }
            if has_scattering {
                return fail("[[scattering]] channels");
            }
        }
        Scenario::Coherent => {
            if bath.is_some() {
                return fail("a [bath] section");
            }
            if has_scattering {
                return fail("[[scattering]] channels");
            }
        }
        Scenario::Thermal => {
            match bath {
                Some(BathSpec::Thermal { .. }) => {}
                Some(BathSpec::General { .. }) => {
                    return Err(CliError::Config(
                        "scenario \"thermal\" requires [bath] kind = \"thermal\"".to_string(),
                    ))
                }
                None => {
                    return Err(CliError::Config(
                        "scenario \"thermal\" requires a [bath] section".to_string(),
                    ))
                }
            }
            if has_scattering {
                return fail("[[scattering]] channels");
            }
        }
        Scenario::Custom => {}
    }
    Ok(())
}

pub fn scenario_name(s: Scenario) -> &'static str {
    match s {
        Scenario::Free => "free",
        Scenario::Coherent => "coherent",
        Scenario::Thermal => "thermal",
        Scenario::Custom => "custom",
    }
}

fn build_initial(
    initial: Option<&InitialSection>,
    generator: &GeneratorSpec,
    modes: &ModeSet,
    units: Units,
    n: usize,
) -> Result<ReducedState, CliError> {
    let Some(init) = initial else {
        return Ok(ReducedState::vacuum(n));
    };
    match init.kind {
        InitialKind::Vacuum => {
            if init.beta.is_some() || init.r.is_some() || init.alpha.is_some() {
                return Err(CliError::Config(
                    "[initial] kind = \"vacuum\" takes no other keys".to_string(),
                ));
            }
            Ok(ReducedState::vacuum(n))
        }
        InitialKind::Thermal => {
            if init.r.is_some() || init.alpha.is_some() {
                return Err(CliError::Config(
                    "[initial] kind = \"thermal\" takes only an optional beta".to_string(),
                ));
            }
            let beta = init
                .beta
                .or_else(|| generator.thermal_beta())
                .ok_or_else(|| {
                    CliError::Config(
                        "[initial] kind = \"thermal\" needs beta (none given and the bath \
                         has no temperature)"
                            .to_string(),
                    )
                })?;
            thermal_state(beta, modes, units).map_err(config_err("[initial]"))
        }
        InitialKind::Explicit => {
            if init.beta.is_some() {
                return Err(CliError::Config(
                    "[initial] kind = \"explicit\" does not take beta".to_string(),
                ));
            }
            let r_rows = init.r.as_ref().ok_or_else(|| {
                CliError::Config("[initial] kind = \"explicit\" requires r".to_string())
            })?;
            let alpha_rows = init.alpha.as_ref().ok_or_else(|| {
                CliError::Config("[initial] kind = \"explicit\" requires alpha".to_string())
            })?;
            let r = HermitianMatrix::new(complex_matrix("[initial] r", r_rows, n)?)
                .map_err(config_err("[initial] r"))?;
            let alpha = complex_vector("[initial] alpha", alpha_rows, n)?;
            ReducedState::new(r, alpha).map_err(config_err("[initial]"))
        }
    }
}

/// Wrap a library error with the config key it came from. Library errors
/// raised at load time are input problems regardless of their class.
fn config_err(key: &'static str) -> impl Fn(rsf_core::Error) -> CliError {
    move |e| CliError::Config(format!("{key}: {e}"))
}
