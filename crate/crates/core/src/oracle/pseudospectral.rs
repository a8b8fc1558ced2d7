use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::apseries::ApSeries;
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::linprop::CglParams;

/// Time integrator for the stiff-linear / polynomial-nonlinear split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// First-order exponential Euler.
    ExponentialEuler,
    /// Fourth-order Cox-Matthews exponential time differencing.
    #[default]
    EtdRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudospectralSettings {
    /// Grid size `N` (power of two).
    pub points: usize,
    /// Requested time step; shortened so that it divides the horizon.
    pub dt: f64,
    #[serde(default)]
    pub integrator: Integrator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub field: GridField,
}

/// `[phi_1(z), phi_2(z), phi_3(z)]` with `phi_k(z) = sum_m z^m / (m + k)!`.
///
/// Taylor series for `|z| < 1`, the recurrence
/// `phi_{k+1} = (phi_k - 1/k!) / z` otherwise.
pub fn phi_functions(z: Complex64) -> [Complex64; 3] {
    if z.norm() < 1.0 {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            // 1/(k+1)!, then successive terms z^m/(m+k+1)!
            let mut term = Complex64::new(1.0 / factorial(k + 1), 0.0);
            let mut sum = term;
            for m in 1..40 {
                term = term * z / (m + k + 1) as f64;
                sum += term;
                if term.norm() < 1e-18 * sum.norm() {
                    break;
                }
            }
            *slot = sum;
        }
        out
    } else {
        let e = z.exp();
        let p1 = (e - 1.0) / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        [p1, p2, p3]
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Exponential-integrator coefficients for every grid bin.
struct StepCoefficients {
    full: Vec<Complex64>,
    half: Vec<Complex64>,
    // exponential Euler: dt phi_1(c); ETD-RK4: dt/2 phi_1(c/2)
    stage: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

struct Solver {
    params: CglParams,
    points: usize,
    padded: usize,
    dt: f64,
    steps: usize,
    integrator: Integrator,
    coefficients: StepCoefficients,
    inverse: Arc<dyn Fft<f64>>,
    padded_forward: Arc<dyn Fft<f64>>,
    padded_inverse: Arc<dyn Fft<f64>>,
}

/// Signed wavenumber index of DFT bin `k` on an `n`-point grid.
fn signed_bin(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

impl Solver {
    fn new(p: &CglParams, lambda: f64, horizon: f64, settings: &PseudospectralSettings) -> Result<Self> {
        let n = settings.points;
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "pseudospectral grid must be a power of two >= 4, got {n}"
            )));
        }
        if !(settings.dt > 0.0 && settings.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive, got {}",
                settings.dt
            )));
        }
        let steps = ((horizon / settings.dt) - 1e-9).ceil().max(1.0) as usize;
        let dt = horizon / steps as f64;
        // products of n band-limited factors alias nothing back into |k| < N/2
        let padded = ((p.degree as usize + 1) * n / 2).next_power_of_two();

        let mut full = Vec::with_capacity(n);
        let mut half = Vec::with_capacity(n);
        let mut stage = Vec::with_capacity(n);
        let (mut f1, mut f2, mut f3) = (Vec::new(), Vec::new(), Vec::new());
        for k in 0..n {
            let rate = p.wavenumber_rate(signed_bin(k, n) as f64 * lambda);
            let c = rate * dt;
            full.push(c.exp());
            half.push((0.5 * c).exp());
            match settings.integrator {
                Integrator::ExponentialEuler => {
                    stage.push(dt * phi_functions(c)[0]);
                }
                Integrator::EtdRk4 => {
                    stage.push(0.5 * dt * phi_functions(0.5 * c)[0]);
                    let [p1, p2, p3] = phi_functions(c);
                    f1.push(dt * (p1 - 3.0 * p2 + 4.0 * p3));
                    f2.push(dt * (p2 - 2.0 * p3));
                    f3.push(dt * (4.0 * p3 - p2));
                }
            }
        }

        let mut planner = FftPlanner::new();
        Ok(Self {
            params: *p,
            points: n,
            padded,
            dt,
            steps,
            integrator: settings.integrator,
            coefficients: StepCoefficients {
                full,
                half,
                stage,
                f1,
                f2,
                f3,
            },
            inverse: planner.plan_fft_inverse(n),
            padded_forward: planner.plan_fft_forward(padded),
            padded_inverse: planner.plan_fft_inverse(padded),
        })
    }

    /// Spectrum of `kappa u^n`, evaluated on the padded grid.
    fn nonlinear(&self, spec: &[Complex64], out: &mut [Complex64], work: &mut Vec<Complex64>) {
        let (n, pn) = (self.points, self.padded);
        work.clear();
        work.resize(pn, Complex64::new(0.0, 0.0));
        for (k, c) in spec.iter().enumerate() {
            let idx = if k < n / 2 { k } else { pn - (n - k) };
            work[idx] = *c;
        }
        self.padded_inverse.process(work);
        let kappa = self.params.kappa;
        let degree = self.params.degree;
        for v in work.iter_mut() {
            *v = kappa * v.powu(degree);
        }
        self.padded_forward.process(work);
        let scale = 1.0 / pn as f64;
        for (k, o) in out.iter_mut().enumerate() {
            let idx = if k < n / 2 { k } else { pn - (n - k) };
            *o = work[idx] * scale;
        }
    }

    fn step(&self, spec: &mut [Complex64], scratch: &mut Scratch) {
        let co = &self.coefficients;
        match self.integrator {
            Integrator::ExponentialEuler => {
                self.nonlinear(spec, &mut scratch.nu, &mut scratch.work);
                for k in 0..spec.len() {
                    spec[k] = co.full[k] * spec[k] + co.stage[k] * scratch.nu[k];
                }
            }
            Integrator::EtdRk4 => {
                let Scratch {
                    nu,
                    na,
                    nb,
                    nc,
                    a,
                    b,
                    c,
                    work,
                } = scratch;
                self.nonlinear(spec, nu, work);
                for k in 0..spec.len() {
                    a[k] = co.half[k] * spec[k] + co.stage[k] * nu[k];
                }
                self.nonlinear(a, na, work);
                for k in 0..spec.len() {
                    b[k] = co.half[k] * spec[k] + co.stage[k] * na[k];
                }
                self.nonlinear(b, nb, work);
                for k in 0..spec.len() {
                    c[k] = co.half[k] * a[k] + co.stage[k] * (2.0 * nb[k] - nu[k]);
                }
                self.nonlinear(c, nc, work);
                for k in 0..spec.len() {
                    spec[k] = co.full[k] * spec[k]
                        + co.f1[k] * nu[k]
                        + 2.0 * co.f2[k] * (na[k] + nb[k])
                        + co.f3[k] * nc[k];
                }
            }
        }
    }

    fn to_field(&self, spec: &[Complex64], lambda: f64) -> Result<GridField> {
        let mut values = spec.to_vec();
        self.inverse.process(&mut values);
        GridField::new(lambda, values)
    }

    fn spectrum_of(&self, u0: &ApSeries) -> Vec<Complex64> {
        let mut spec = vec![Complex64::new(0.0, 0.0); self.points];
        spec[1..=u0.truncation()].copy_from_slice(u0.coeffs());
        spec
    }
}

struct Scratch {
    nu: Vec<Complex64>,
    na: Vec<Complex64>,
    nb: Vec<Complex64>,
    nc: Vec<Complex64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); n];
        Self {
            nu: z.clone(),
            na: z.clone(),
            nb: z.clone(),
            nc: z.clone(),
            a: z.clone(),
            b: z.clone(),
            c: z,
            work: Vec::new(),
        }
    }
}

fn check_grid(u0: &ApSeries, p: &CglParams, points: usize) -> Result<()> {
    let needed = 2 * (p.degree as usize + 1) * u0.truncation();
    if points < needed {
        return Err(Error::InvalidArgument(format!(
            "grid of {points} points is too coarse for {} modes at degree {} (need at least {needed})",
            u0.truncation(),
            p.degree
        )));
    }
    Ok(())
}

/// Integrates on the Fourier side from `u0` to `horizon`, returning the field
/// at every `snapshot_every`-th step (and at the start and end).
pub fn pseudospectral_evolve(
    u0: &ApSeries,
    p: &CglParams,
    horizon: f64,
    settings: &PseudospectralSettings,
    snapshot_every: usize,
) -> Result<Vec<Snapshot>> {
    p.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    check_grid(u0, p, settings.points)?;
    let lambda = u0.lambda();
    let solver = Solver::new(p, lambda, horizon, settings)?;
    let every = snapshot_every.max(1);
    let mut spec = solver.spectrum_of(u0);
    let mut scratch = Scratch::new(solver.points);
    let mut out = vec![Snapshot {
        time: 0.0,
        field: solver.to_field(&spec, lambda)?,
    }];
    for s in 0..solver.steps {
        solver.step(&mut spec, &mut scratch);
        let done = s + 1;
        if spec.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Blowup {
                last_stable_time: s as f64 * solver.dt,
            });
        }
        if done % every == 0 || done == solver.steps {
            let time = if done == solver.steps {
                horizon
            } else {
                done as f64 * solver.dt
            };
            out.push(Snapshot {
                time,
                field: solver.to_field(&spec, lambda)?,
            });
        }
    }
    Ok(out)
}

/// Field at time `horizon` from a fourth-order exponential integrator on an
/// `points`-point grid with step `dt`.
pub fn pseudospectral_solve(
    u0: &ApSeries,
    p: &CglParams,
    horizon: f64,
    points: usize,
    dt: f64,
) -> Result<GridField> {
    let settings = PseudospectralSettings {
        points,
        dt,
        integrator: Integrator::EtdRk4,
    };
    let mut snaps = pseudospectral_evolve(u0, p, horizon, &settings, usize::MAX)?;
    Ok(snaps.pop().expect("evolution always yields a final snapshot").field)
}
