//! Uniform samples of a lattice series over one period `[0, 2 pi / lambda)`.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::apseries::ApSeries;
use crate::error::{Error, Result};

/// Complex samples `u(x_k)`, `x_k = 2 pi k / (lambda N)`, `k = 0..N-1`.
///
/// Fields are general complex; there is no conjugate symmetry since the
/// spectrum of a lattice series is one-sided.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    lambda: f64,
    values: Vec<Complex64>,
}

impl GridField {
    /// `values.len()` must be a power of two and at least 2.
    pub fn new(lambda: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lattice generator must be positive and finite, got {lambda}"
            )));
        }
        if values.len() < 2 || !values.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "grid size must be a power of two, got {}",
                values.len()
            )));
        }
        Ok(Self { lambda, values })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Length of the sampled period.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.lambda
    }

    /// Grid node `x_k`.
    pub fn node(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / (self.lambda * self.len() as f64)
    }

    /// Discrete Fourier coefficients `c_k = (1/N) sum_l u(x_l) exp(-2 pi i k l / N)`.
    ///
    /// Bin `k < N/2` is lattice mode `k`; bin `k >= N/2` is mode `k - N`.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let n = self.len();
        let mut buf = self.values.clone();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Modes `1..=m` read off the discrete spectrum.
    pub fn lattice_coefficients(&self, m: usize) -> Result<ApSeries> {
        if m >= self.len() / 2 {
            return Err(Error::UnresolvableFrequency {
                index: m,
                points: self.len(),
            });
        }
        let spec = self.spectrum();
        ApSeries::new(self.lambda, spec[1..=m].to_vec())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// CSV with header `k,x_k,re_u,im_u` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "k,x_k,re_u,im_u")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{k},{:.16e},{:.16e},{:.16e}", self.node(k), v.re, v.im)?;
        }
        Ok(())
    }
}

/// Evaluates `u` on `n` uniform nodes of one period. Requires `n > 2 M`.
pub fn sample(u: &ApSeries, n: usize) -> Result<GridField> {
    if n <= 2 * u.truncation() {
        return Err(Error::InvalidArgument(format!(
            "grid of {n} points cannot resolve {} modes (need more than {})",
            u.truncation(),
            2 * u.truncation()
        )));
    }
    let lambda = u.lambda();
    let values = (0..n)
        .map(|k| u.evaluate(2.0 * PI * k as f64 / (lambda * n as f64)))
        .collect();
    GridField::new(lambda, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_mode_samples() {
        let u = ApSeries::from_modes(1.0, 3, &[(1, Complex64::new(1.0, 0.0))]).unwrap();
        let field = sample(&u, 8).unwrap();
        for (k, v) in field.values().iter().enumerate() {
            let expect = Complex64::cis(2.0 * PI * k as f64 / 8.0);
            assert!((v - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_series_gives_zero_field() {
        let field = sample(&ApSeries::zeros(2.5, 5).unwrap(), 16).unwrap();
        assert!(field.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn too_small_grid_rejected() {
        let u = ApSeries::zeros(1.0, 4).unwrap();
        assert!(sample(&u, 8).is_err());
        assert!(sample(&u, 12).is_err());
        assert!(sample(&u, 16).is_ok());
    }

    #[test]
    fn spectrum_recovers_lattice_modes() {
        let u = ApSeries::new(
            0.7,
            vec![
                Complex64::new(0.1, 0.2),
                Complex64::new(-0.3, 0.0),
                Complex64::new(0.0, 1.5),
            ],
        )
        .unwrap();
        let field = sample(&u, 16).unwrap();
        let back = field.lattice_coefficients(3).unwrap();
        assert!(back.l1_distance(&u).unwrap() < 1e-14);
        let spec = field.spectrum();
        assert!(spec[0].norm() < 1e-15);
        assert!(spec[8..].iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn csv_layout() {
        let field = GridField::new(1.0, vec![Complex64::new(1.0, -1.0); 2]).unwrap();
        let mut buf = Vec::new();
        field.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "k,x_k,re_u,im_u");
        assert_eq!(
            lines[1],
            "0,0.0000000000000000e0,1.0000000000000000e0,-1.0000000000000000e0"
        );
        assert_eq!(lines.len(), 3);
    }
}
