//! Deterministic text output: CSV writers and matrix pretty-printing.
//!
//! Every floating-point value is printed with 17 significant digits
//! (`{:.16e}`), enough to round-trip an IEEE double exactly, so repeated
//! runs of the same configuration produce byte-identical files.

use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use rsf_core::integrate::Trajectory;
use rsf_core::thermo::ThermoSample;

use crate::CliError;

/// 17-significant-digit scientific form; `NaN`, `inf`, and `-inf` pass
/// through as those literals.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Config(format!("cannot write {}: {e}", path.display()))
}

/// Thermodynamic time series, one row per sample. With `dump_state`,
/// the flattened second moments (row-major, re/im) and coherence vector
/// follow the fixed columns.
pub fn write_simulation_csv(
    path: &Path,
    samples: &[ThermoSample],
    traj: &Trajectory,
    dump_state: bool,
    n_modes: usize,
) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut header = String::from("t,S,U,heat_rate,entropy_rate,F,F_eq,F_neq,N,alpha_norm2");
    if dump_state {
        for k in 0..n_modes {
            for kp in 0..n_modes {
                header.push_str(&format!(",r_{k}_{kp}_re,r_{k}_{kp}_im"));
            }
        }
        for k in 0..n_modes {
            header.push_str(&format!(",alpha_{k}_re,alpha_{k}_im"));
        }
    }
    writeln!(w, "{header}").map_err(io_err(path))?;
    for (sample, state) in samples.iter().zip(&traj.states) {
        let mut row = vec![
            fmt(sample.t),
            fmt(sample.entropy),
            fmt(sample.internal_energy),
            fmt(sample.heat_rate),
            fmt(sample.entropy_rate),
            fmt(sample.free_energy),
            fmt(sample.free_energy_eq),
            fmt(sample.free_energy_neq),
            fmt(sample.particle_number),
            fmt(sample.alpha_norm_sqr),
        ];
        if dump_state {
            for value in state.r().raw().iter() {
                row.push(fmt(value.re));
                row.push(fmt(value.im));
            }
            for value in state.alpha().iter() {
                row.push(fmt(value.re));
                row.push(fmt(value.im));
            }
        }
        writeln!(w, "{}", row.join(",")).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Entropy sweep: one row per inverse temperature, one column per mode
/// frequency.
pub fn write_sweep_csv(
    path: &Path,
    betas: &[f64],
    omegas: &[f64],
    value: impl Fn(usize, usize) -> f64,
) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut header = String::from("beta");
    for omega in omegas {
        header.push_str(&format!(",S(omega={omega})"));
    }
    writeln!(w, "{header}").map_err(io_err(path))?;
    for (i, &beta) in betas.iter().enumerate() {
        let mut row = vec![fmt(beta)];
        for j in 0..omegas.len() {
            row.push(fmt(value(i, j)));
        }
        writeln!(w, "{}", row.join(",")).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn fmt_complex(z: Complex64) -> String {
    format!("{} {:+.16e}i", fmt(z.re), z.im)
}

/// `name = [entries]`, one line.
pub fn print_vector(out: &mut impl Write, name: &str, v: &Array1<Complex64>) -> std::io::Result<()> {
    writeln!(out, "{name}:")?;
    for (k, z) in v.iter().enumerate() {
        writeln!(out, "  [{k}] {}", fmt_complex(*z))?;
    }
    Ok(())
}

/// `name:` then one line per row.
pub fn print_matrix(out: &mut impl Write, name: &str, m: &Array2<Complex64>) -> std::io::Result<()> {
    writeln!(out, "{name}:")?;
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt_complex(m[(i, j)])).collect();
        writeln!(out, "  [{i}] {}", row.join("  "))?;
    }
    Ok(())
}
