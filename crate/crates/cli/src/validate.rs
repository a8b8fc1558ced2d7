use apcgl_core::grid::sample;
use apcgl_core::linprop::{kernel_convolve_mode, linear_step};
use apcgl_core::nonlinear::{coefficient_flow, default_substeps, pointwise_flow};
use apcgl_core::oracle::{picard_iterate, pseudospectral_evolve, spectral_leakage, PseudospectralSettings};
use apcgl_core::splitting::evolve;
use apcgl_core::{ApSeries, Complex64, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::RunConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn measured(name: &'static str, residual: f64, tolerance: f64) -> Self {
        Self {
            name,
            residual,
            tolerance,
            passed: residual <= tolerance,
            detail: format!("{residual:.3e} vs tolerance {tolerance:.1e}"),
        }
    }

    fn from_result(name: &'static str, tolerance: f64, r: Result<f64>) -> Self {
        match r {
            Ok(residual) => Self::measured(name, residual, tolerance),
            Err(e) => Self {
                name,
                residual: f64::INFINITY,
                tolerance,
                passed: false,
                detail: e.to_string(),
            },
        }
    }
}

/// Horizon for the Picard comparison.
const PICARD_HORIZON: f64 = 0.05;

/// Runs every check; never stops at the first failure.
pub fn run_checks(config: &RunConfig) -> Vec<CheckOutcome> {
    vec![
        CheckOutcome::from_result("semigroup law", 1e-12, semigroup(config)),
        CheckOutcome::from_result("gaussian kernel quadrature", 1e-6, kernel_quadrature(config)),
        CheckOutcome::from_result("pointwise vs coefficient flow", 1e-8, flow_forms(config)),
        CheckOutcome::from_result("lattice leakage", 1e-8, leakage(config)),
        CheckOutcome::from_result("picard agreement", 1e-6, picard(config)),
        CheckOutcome::from_result("linear exactness", 1e-12, linear_exactness(config)),
        CheckOutcome::from_result("dealiasing (grid doubling)", 1e-9, dealiasing(config)),
    ]
}

/// Relative l1 gap between `U(t1)U(t2)u` and `U(t1+t2)u` over seeded data.
fn semigroup(config: &RunConfig) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let m = config.schedule.truncation;
    let span = config.horizon().max(config.schedule.h);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let coeffs = (0..m)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let u = ApSeries::new(config.lambda, coeffs)?;
        let t1 = rng.random_range(0.0..span / 2.0);
        let t2 = rng.random_range(0.0..span / 2.0);
        let split = linear_step(&linear_step(&u, &config.params, t2)?, &config.params, t1)?;
        let joint = linear_step(&u, &config.params, t1 + t2)?;
        let norm = joint.l1_norm();
        if norm > 0.0 {
            worst = worst.max(split.l1_distance(&joint)? / norm);
        }
    }
    Ok(worst)
}

/// Diagonal multiplier against kernel quadrature for the lowest modes.
fn kernel_quadrature(config: &RunConfig) -> Result<f64> {
    let p = &config.params;
    let t = config.schedule.h;
    let mut worst: f64 = 0.0;
    for j in 1..=config.schedule.truncation.min(4) {
        let formula = p.multiplier(j, config.lambda, t);
        let quad = kernel_convolve_mode(p, t, j, config.lambda)?;
        worst = worst.max((formula - quad).norm() / formula.norm().max(1.0));
    }
    Ok(worst)
}

/// Coefficient RK4 flow over one macro step against the closed form applied
/// at every grid node.
fn flow_forms(config: &RunConfig) -> Result<f64> {
    let p = &config.params;
    let u0 = config.initial_series();
    let t = config.schedule.h;
    let points = (2 * u0.truncation() + 1).next_power_of_two() * 2;
    let substeps = default_substeps(t, u0.l1_norm(), p.degree, p.kappa).max(64);
    let flowed = coefficient_flow(&u0, p.kappa, p.degree, t, substeps)?;
    let grid = sample(&u0, points)?;
    let mut worst: f64 = 0.0;
    for (k, z0) in grid.values().iter().enumerate() {
        let exact = pointwise_flow(*z0, p.kappa, p.degree, t)?;
        if exact.is_blowup() != flowed.is_blowup() {
            return Ok(f64::INFINITY);
        }
        if !exact.is_blowup() {
            worst = worst.max((exact.state - flowed.state.evaluate(grid.node(k))).norm());
        }
    }
    Ok(worst)
}

/// Largest off-lattice spectral fraction along the reference run.
fn leakage(config: &RunConfig) -> Result<f64> {
    let u0 = config.initial_series();
    let snaps = pseudospectral_evolve(&u0, &config.params, config.horizon(), &config.pseudospectral(), 16)?;
    let mut worst: f64 = 0.0;
    for s in &snaps {
        worst = worst.max(spectral_leakage(&s.field, config.lambda, u0.truncation())?);
    }
    Ok(worst)
}

fn reference_coefficients(config: &RunConfig, horizon: f64, settings: &PseudospectralSettings) -> Result<ApSeries> {
    let u0 = config.initial_series();
    let snaps = pseudospectral_evolve(&u0, &config.params, horizon, settings, usize::MAX)?;
    snaps
        .last()
        .expect("evolution yields a final snapshot")
        .field
        .lattice_coefficients(u0.truncation())
}

/// Picard iterate of the mild form against the pseudospectral solve.
fn picard(config: &RunConfig) -> Result<f64> {
    let t = config.horizon().min(PICARD_HORIZON);
    let u0 = config.initial_series();
    let mild = picard_iterate(&u0, &config.params, t, config.oracle.iters, config.oracle.quad_nodes)?;
    let reference = reference_coefficients(config, t, &config.pseudospectral())?;
    mild.l1_distance(&reference)
}

/// With the nonlinearity switched off the scheme must reproduce `U(T) u0`.
fn linear_exactness(config: &RunConfig) -> Result<f64> {
    let p = config.params.with_kappa(Complex64::new(0.0, 0.0))?;
    let u0 = config.initial_series();
    let record = evolve(&u0, &p, &config.schedule)?;
    let exact = linear_step(&u0, &p, config.horizon())?;
    Ok(record.final_state().l1_distance(&exact)? / exact.l1_norm().max(f64::MIN_POSITIVE))
}

/// Reference coefficients on `N` and `2N` points.
fn dealiasing(config: &RunConfig) -> Result<f64> {
    let t = config.horizon();
    let coarse = config.pseudospectral();
    let fine = PseudospectralSettings {
        points: 2 * coarse.points,
        ..coarse
    };
    let a = reference_coefficients(config, t, &coarse)?;
    let b = reference_coefficients(config, t, &fine)?;
    a.l1_distance(&b)
}
