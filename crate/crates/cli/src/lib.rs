//! Batch workflows over the `apcgl-core` solver: simulation, convergence
//! sweeps, the invariant suite and blow-up scans.
//!
//! Every command returns a process exit code: 0 success, 1 failed check or
//! runtime error, 2 invalid configuration or arguments, 3 blow-up, 4 failed
//! reference solve.

mod config;
mod validate;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use apcgl_core::grid::sample;
use apcgl_core::oracle::pseudospectral_evolve;
use apcgl_core::splitting::evolve;
use apcgl_core::{Complex64, SplitSchedule};
use rayon::prelude::*;
use thiserror::Error;

pub use config::{OracleConfig, RunConfig};
pub use validate::{run_checks, CheckOutcome};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_BLOWUP: u8 = 3;
pub const EXIT_REFERENCE: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("reference solve failed: {0}")]
    Reference(apcgl_core::Error),
    #[error(transparent)]
    Core(#[from] apcgl_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Argument(_) => EXIT_CONFIG,
            CliError::Reference(_) => EXIT_REFERENCE,
            CliError::Core(_) | CliError::Io(_) => EXIT_FAILURE,
        }
    }
}

/// Thread pool for sweeps, capped by `APCGL_THREADS` when set.
fn sweep_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("APCGL_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Argument(format!("APCGL_THREADS must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Argument(format!("cannot start worker pool: {e}")))
}

fn output_dir(config: &RunConfig, out: Option<&Path>) -> Result<PathBuf, CliError> {
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Runs the splitting scheme and writes `trajectory.csv` and `summary.csv`.
pub fn cmd_simulate(config: &RunConfig, out: Option<&Path>) -> Result<u8, CliError> {
    let u0 = config.initial_series();
    let record = evolve(&u0, &config.params, &config.schedule)?;
    let dir = output_dir(config, out)?;
    let mut traj = create(&dir, "trajectory.csv")?;
    record.write_trajectory_csv(&mut traj)?;
    traj.flush()?;
    let mut summary = create(&dir, "summary.csv")?;
    record.write_summary_csv(&mut summary)?;
    summary.flush()?;
    match record.blowup_time {
        Some(t) => {
            eprintln!("blow-up detected at t = {t:.16e}");
            Ok(EXIT_BLOWUP)
        }
        None => {
            println!(
                "completed {} steps to t = {:.16e}, final l1 norm {:.16e}",
                config.schedule.steps,
                record.final_time(),
                record.final_state().l1_norm()
            );
            Ok(EXIT_OK)
        }
    }
}

fn default_h_list(config: &RunConfig) -> Vec<f64> {
    let t = config.horizon();
    [8.0, 16.0, 32.0, 64.0, 128.0].iter().map(|d| t / d).collect()
}

/// Number of steps of size `h` covering `horizon`, if `h` divides it.
fn steps_for(h: f64, horizon: f64) -> Option<usize> {
    if !(h > 0.0 && h.is_finite()) {
        return None;
    }
    let steps = (horizon / h).round();
    (steps >= 1.0 && (steps * h - horizon).abs() <= 1e-9 * horizon).then_some(steps as usize)
}

/// Least-squares slope of `log err` against `log h`.
pub fn loglog_slope(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Errors of the splitting scheme against one pseudospectral reference at
/// the schedule horizon; writes `convergence.csv`.
pub fn cmd_converge(config: &RunConfig, h_list: Option<&[f64]>, out: Option<&Path>) -> Result<u8, CliError> {
    let horizon = config.horizon();
    if horizon <= 0.0 {
        return Err(CliError::Argument("schedule covers no time (steps = 0)".into()));
    }
    let hs = h_list.map_or_else(|| default_h_list(config), <[f64]>::to_vec);
    if hs.is_empty() {
        return Err(CliError::Argument("empty h list".into()));
    }
    if hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Argument("h list must be strictly descending".into()));
    }
    let steps: Vec<usize> = hs
        .iter()
        .map(|&h| {
            steps_for(h, horizon)
                .ok_or_else(|| CliError::Argument(format!("h = {h} does not divide T = {horizon}")))
        })
        .collect::<Result<_, _>>()?;

    let u0 = config.initial_series();
    let m = u0.truncation();
    let reference = pseudospectral_evolve(&u0, &config.params, horizon, &config.pseudospectral(), usize::MAX)
        .map_err(CliError::Reference)?
        .pop()
        .expect("evolution yields a final snapshot")
        .field;
    let reference_coeffs = reference.lattice_coefficients(m).map_err(CliError::Reference)?;

    let pool = sweep_pool()?;
    let runs: Vec<_> = pool.install(|| {
        hs.par_iter()
            .zip(&steps)
            .map(|(&h, &n)| {
                let schedule = SplitSchedule::new(h, n, n, m)?;
                evolve(&u0, &config.params, &schedule)
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(hs.len());
    for (&h, run) in hs.iter().zip(runs) {
        let record = run?;
        if let Some(t) = record.blowup_time {
            eprintln!("run with h = {h:.16e} blew up at t = {t:.16e}");
            return Ok(EXIT_BLOWUP);
        }
        let w = record.final_state();
        let l1 = w.l1_distance(&reference_coeffs)?;
        let on_grid = sample(w, reference.len())?;
        let sup = on_grid
            .values()
            .iter()
            .zip(reference.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        rows.push((h, l1, sup));
    }

    let dir = output_dir(config, out)?;
    let mut csv = create(&dir, "convergence.csv")?;
    writeln!(csv, "h,err_l1,err_sup")?;
    for (h, l1, sup) in &rows {
        writeln!(csv, "{h:.16e},{l1:.16e},{sup:.16e}")?;
    }
    csv.flush()?;

    for (h, l1, sup) in &rows {
        println!("h = {h:.6e}  err_l1 = {l1:.6e}  err_sup = {sup:.6e}");
    }
    let floor = 1e-12 * u0.l1_norm().max(1.0);
    let errs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    if config.params.kappa == Complex64::new(0.0, 0.0) || errs.iter().all(|&e| e <= floor) {
        println!("slope: exact");
    } else if rows.len() < 2 {
        println!("slope: n/a (single step size)");
    } else {
        println!("slope: {:.6}", loglog_slope(&hs, &errs));
    }
    Ok(EXIT_OK)
}

/// Runs the invariant suite and prints a pass/fail table.
pub fn cmd_validate(config: &RunConfig) -> Result<u8, CliError> {
    let outcomes = run_checks(config);
    println!("{:<28} {:>12} {:>10}  result", "check", "residual", "tolerance");
    for o in &outcomes {
        println!(
            "{:<28} {:>12.3e} {:>10.1e}  {}",
            o.name,
            o.residual,
            o.tolerance,
            if o.passed { "PASS" } else { "FAIL" }
        );
    }
    let failed: Vec<&CheckOutcome> = outcomes.iter().filter(|o| !o.passed).collect();
    if failed.is_empty() {
        return Ok(EXIT_OK);
    }
    for o in failed {
        eprintln!("failed: {} (residual {:.3e}): {}", o.name, o.residual, o.detail);
    }
    Ok(EXIT_FAILURE)
}

/// Evolves `s u0` for each scale and writes `blowup.csv`.
pub fn cmd_blowup(config: &RunConfig, scales: Option<&[f64]>, out: Option<&Path>) -> Result<u8, CliError> {
    let scales = scales.map_or_else(|| vec![0.5, 1.0, 2.0, 4.0, 8.0], <[f64]>::to_vec);
    if scales.is_empty() || scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(CliError::Argument("scales must be a non-empty list of positive numbers".into()));
    }
    let u0 = config.initial_series();
    let pool = sweep_pool()?;
    let runs: Vec<_> = pool.install(|| {
        scales
            .par_iter()
            .map(|&s| evolve(&u0.scale(Complex64::new(s, 0.0)), &config.params, &config.schedule))
            .collect()
    });
    let mut rows = Vec::with_capacity(scales.len());
    for (&s, run) in scales.iter().zip(runs) {
        rows.push((s, run?.blowup_time));
    }

    let dir = output_dir(config, out)?;
    let mut csv = create(&dir, "blowup.csv")?;
    writeln!(csv, "scale,t_star_estimate")?;
    for (s, t) in &rows {
        match t {
            Some(t) => writeln!(csv, "{s:.16e},{t:.16e}")?,
            None => writeln!(csv, "{s:.16e},none")?,
        }
    }
    csv.flush()?;
    for (s, t) in &rows {
        match t {
            Some(t) => println!("scale {s:.6e}: t* ~ {t:.6e}"),
            None => println!("scale {s:.6e}: none within T = {:.6e}", config.horizon()),
        }
    }
    Ok(EXIT_OK)
}
