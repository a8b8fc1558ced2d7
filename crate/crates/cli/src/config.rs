use std::path::{Path, PathBuf};

use apcgl_core::oracle::{Integrator, PseudospectralSettings};
use apcgl_core::{ApSeries, CglParams, Complex64, SplitSchedule};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
    a: f64,
    b: f64,
    degree: u32,
    kappa: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    h: f64,
    steps: usize,
    record_every: usize,
    truncation: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Pseudospectral grid size.
    pub points: usize,
    pub dt: f64,
    /// Picard iterations.
    pub iters: usize,
    #[serde(default = "default_quad_nodes")]
    pub quad_nodes: usize,
    #[serde(default)]
    pub integrator: Integrator,
}

fn default_quad_nodes() -> usize {
    32
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    params: RawParams,
    lambda: f64,
    initial: Vec<(usize, f64, f64)>,
    schedule: RawSchedule,
    oracle: OracleConfig,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    seed: u64,
}

/// A validated run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: CglParams,
    pub lambda: f64,
    pub initial: Vec<(usize, Complex64)>,
    pub schedule: SplitSchedule,
    pub oracle: OracleConfig,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
}

/// 1-based line of the first occurrence of `"key"` in `text`, or 1.
fn line_of(text: &str, key: &str) -> usize {
    let quoted = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&quoted))
        .map_or(1, |i| i + 1)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            line: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Config {
            line: e.line(),
            message: e.to_string(),
        })?;
        let invalid = |key: &str, message: String| CliError::Config {
            line: line_of(text, key),
            message,
        };

        let rp = &raw.params;
        let kappa = Complex64::new(rp.kappa[0], rp.kappa[1]);
        let params = CglParams::new(rp.alpha, rp.beta, rp.gamma, rp.a, rp.b, rp.degree)
            .and_then(|p| p.with_kappa(kappa))
            .map_err(|e| invalid("params", e.to_string()))?;
        if !(raw.lambda > 0.0 && raw.lambda.is_finite()) {
            return Err(invalid("lambda", format!("lambda must be positive, got {}", raw.lambda)));
        }
        let rs = &raw.schedule;
        let schedule = SplitSchedule::new(rs.h, rs.steps, rs.record_every, rs.truncation)
            .map_err(|e| invalid("schedule", e.to_string()))?;

        let mut initial = Vec::with_capacity(raw.initial.len());
        for &(j, re, im) in &raw.initial {
            if j == 0 || j > schedule.truncation {
                return Err(invalid(
                    "initial",
                    format!("initial index {j} outside 1..={}", schedule.truncation),
                ));
            }
            if initial.iter().any(|&(k, _)| k == j) {
                return Err(invalid("initial", format!("initial index {j} repeated")));
            }
            if !(re.is_finite() && im.is_finite()) {
                return Err(invalid("initial", format!("initial coefficient {j} is not finite")));
            }
            initial.push((j, Complex64::new(re, im)));
        }

        let o = &raw.oracle;
        if !(o.dt > 0.0 && o.dt.is_finite()) {
            return Err(invalid("dt", format!("oracle dt must be positive, got {}", o.dt)));
        }
        if o.points < 4 || !o.points.is_power_of_two() {
            return Err(invalid(
                "points",
                format!("oracle points must be a power of two >= 4, got {}", o.points),
            ));
        }
        if o.quad_nodes == 0 {
            return Err(invalid("quad_nodes", "quad_nodes must be at least 1".into()));
        }

        Ok(Self {
            params,
            lambda: raw.lambda,
            initial,
            schedule,
            oracle: raw.oracle,
            output_dir: raw.output_dir,
            seed: raw.seed,
        })
    }

    pub fn initial_series(&self) -> ApSeries {
        ApSeries::from_modes(self.lambda, self.schedule.truncation, &self.initial)
            .expect("indices checked at load time")
    }

    pub fn horizon(&self) -> f64 {
        self.schedule.total_time()
    }

    pub fn pseudospectral(&self) -> PseudospectralSettings {
        PseudospectralSettings {
            points: self.oracle.points,
            dt: self.oracle.dt,
            integrator: self.oracle.integrator,
        }
    }
}
