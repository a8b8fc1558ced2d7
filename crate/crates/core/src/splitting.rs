//! Linear-first Lie-Trotter splitting.
//!
//! With `W_0 = u0` each macro step of length `h` applies the exact linear
//! semigroup and then the nonlinear flow:
//!
//! ```text
//! V_{k+1} = U(h) W_k
//! W_{k+1} = N(h, V_{k+1})
//! ```
//!
//! The nonlinear half is run as the doubled field `2F` over the second half
//! of the period, which is the same map as the flow of `F` over `h`. The
//! toggling function [`alpha`] and its integral [`tau_h`] describe the
//! equivalent non-autonomous problem whose values at `t = kh` are the `W_k`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::apseries::ApSeries;
use crate::error::{Error, Result};
use crate::linprop::{linear_step, CglParams};
use crate::nonlinear::{default_substeps, half_interval_flow, FlowResult, FlowStatus};

/// Period-1 toggle: 2 on `[k, k + 1/2)`, 0 on `[k + 1/2, k + 1)`.
pub fn alpha(t: f64) -> f64 {
    let frac = t - t.floor();
    if frac < 0.5 {
        2.0
    } else {
        0.0
    }
}

/// `int_0^s alpha`, piecewise linear: `floor(s) + 2 min(frac(s), 1/2)`.
fn alpha_primitive(s: f64) -> f64 {
    let whole = s.floor();
    whole + 2.0 * (s - whole).min(0.5)
}

/// `tau_h(t, t') = int_{t'}^{t} alpha(s / h) ds`, evaluated in closed form.
pub fn tau_h(h: f64, t: f64, t_prime: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    if t < t_prime {
        return Err(Error::InvalidArgument(format!(
            "tau_h needs t >= t', got t = {t}, t' = {t_prime}"
        )));
    }
    if t == t_prime {
        return Ok(0.0);
    }
    let value = h * (alpha_primitive(t / h) - alpha_primitive(t_prime / h));
    Ok(value.clamp(0.0, 2.0 * (t - t_prime)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSchedule {
    /// Macro step.
    pub h: f64,
    pub steps: usize,
    pub record_every: usize,
    /// Truncation order `M` of the evolved series.
    pub truncation: usize,
}

impl SplitSchedule {
    pub fn new(h: f64, steps: usize, record_every: usize, truncation: usize) -> Result<Self> {
        let s = Self {
            h,
            steps,
            record_every,
            truncation,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step must be positive and finite, got {}",
                self.h
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be at least 1".into()));
        }
        if self.steps > 0 && self.record_every > self.steps {
            return Err(Error::InvalidArgument(format!(
                "record_every ({}) exceeds steps ({})",
                self.record_every, self.steps
            )));
        }
        if self.truncation == 0 {
            return Err(Error::InvalidArgument("truncation must be at least 1".into()));
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.h * self.steps as f64
    }
}

/// Recorded `W` snapshots of a splitting run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<ApSeries>,
    pub norms: Vec<f64>,
    pub status: FlowStatus,
    pub blowup_time: Option<f64>,
}

impl TrajectoryRecord {
    fn start(u0: &ApSeries) -> Self {
        Self {
            times: vec![0.0],
            states: vec![u0.clone()],
            norms: vec![u0.l1_norm()],
            status: FlowStatus::Completed,
            blowup_time: None,
        }
    }

    fn push(&mut self, t: f64, state: ApSeries) {
        self.norms.push(state.l1_norm());
        self.times.push(t);
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &ApSeries {
        self.states.last().expect("trajectory always holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory always holds the initial time")
    }

    /// Long format: `t,j,re_a_j,im_a_j`, one row per recorded mode.
    pub fn write_trajectory_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,j,re_a_j,im_a_j")?;
        for (t, state) in self.times.iter().zip(&self.states) {
            for (i, a) in state.coeffs().iter().enumerate() {
                writeln!(out, "{t:.16e},{},{:.16e},{:.16e}", i + 1, a.re, a.im)?;
            }
        }
        Ok(())
    }

    /// `t,l1_norm,status`. Every row is `completed` except the final row of a
    /// run that blew up.
    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,l1_norm,status")?;
        let last = self.len() - 1;
        for (i, (t, n)) in self.times.iter().zip(&self.norms).enumerate() {
            let status = if i == last { self.status } else { FlowStatus::Completed };
            writeln!(out, "{t:.16e},{n:.16e},{}", status.as_str())?;
        }
        Ok(())
    }
}

/// One macro step: `U(h)` followed by the nonlinear flow over the period.
///
/// A blow-up time is reported relative to the start of the step on the
/// nonlinear flow's own clock (the flow of `F` over `h`).
pub fn lie_trotter_step(w: &ApSeries, p: &CglParams, h: f64) -> Result<FlowResult<ApSeries>> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let v = linear_step(w, p, h)?;
    let substeps = default_substeps(h, v.l1_norm(), p.degree, p.kappa);
    let mut out = half_interval_flow(&v, p.kappa, p.degree, h, substeps)?;
    out.blowup_time = out.blowup_time.map(|s| 2.0 * s);
    Ok(out)
}

/// Runs `schedule.steps` Lie-Trotter steps from `u0`, recording `W_k` every
/// `record_every` steps and at the final step. Stops early on blow-up.
pub fn evolve(u0: &ApSeries, p: &CglParams, schedule: &SplitSchedule) -> Result<TrajectoryRecord> {
    p.validate()?;
    schedule.validate()?;
    if u0.truncation() != schedule.truncation {
        return Err(Error::ParameterMismatch(format!(
            "initial data has {} modes, schedule expects {}",
            u0.truncation(),
            schedule.truncation
        )));
    }
    let h = schedule.h;
    let mut record = TrajectoryRecord::start(u0);
    let mut w = u0.clone();
    for k in 0..schedule.steps {
        let step = lie_trotter_step(&w, p, h)?;
        if step.is_blowup() {
            let t = k as f64 * h + step.blowup_time.unwrap_or(0.0);
            if t > record.final_time() {
                record.push(t, step.state);
            }
            record.status = FlowStatus::Blowup;
            record.blowup_time = Some(t);
            return Ok(record);
        }
        w = step.state;
        let done = k + 1;
        if done % schedule.record_every == 0 || done == schedule.steps {
            record.push(done as f64 * h, w.clone());
        }
    }
    Ok(record)
}
