//! Reference solvers that share no stepping code with the splitting path.
//!
//! * [`pseudospectral_solve`]: dealiased Fourier pseudospectral integration on
//!   one period with the linear part treated exactly (exponential integrators).
//! * [`picard_iterate`]: fixed-point iteration of the mild (Duhamel) form.
//! * [`spectral_leakage`]: fraction of spectral mass off the lattice modes.
//!
//! All frequencies are integer multiples of `lambda`, so a grid over one
//! period `2 pi / lambda` represents the almost periodic problem exactly.

mod picard;
mod pseudospectral;

pub use picard::picard_iterate;
pub use pseudospectral::{
    phi_functions, pseudospectral_evolve, pseudospectral_solve, Integrator, PseudospectralSettings,
    Snapshot,
};

use crate::apseries::compensated_sum;
use crate::error::{Error, Result};
use crate::grid::GridField;

/// `(sum of |c_k| over bins outside lattice modes 1..=M) / (sum of all |c_k|)`.
///
/// The off-lattice part includes the mean (`k = 0`) and every negative
/// frequency bin. An all-zero field has leakage 0.
pub fn spectral_leakage(field: &GridField, lambda: f64, m: usize) -> Result<f64> {
    if lambda != field.lambda() {
        return Err(Error::ParameterMismatch(format!(
            "field sampled for lambda = {}, asked about lambda = {lambda}",
            field.lambda()
        )));
    }
    let spec = field.spectrum();
    let half = field.len() / 2;
    let on_lattice = |k: usize| k >= 1 && k <= m && k < half;
    let total = compensated_sum(spec.iter().map(|c| c.norm()));
    if total == 0.0 {
        return Ok(0.0);
    }
    let off = compensated_sum(
        spec.iter()
            .enumerate()
            .filter(|(k, _)| !on_lattice(*k))
            .map(|(_, c)| c.norm()),
    );
    Ok(off / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apseries::ApSeries;
    use crate::grid::sample;
    use num_complex::Complex64;

    #[test]
    fn lattice_samples_do_not_leak() {
        let u = ApSeries::new(
            1.7,
            (1..=10).map(|j| Complex64::new(1.0 / j as f64, -0.3 * j as f64)).collect(),
        )
        .unwrap();
        let field = sample(&u, 64).unwrap();
        assert!(spectral_leakage(&field, 1.7, 10).unwrap() <= 1e-14);
    }

    #[test]
    fn injected_mean_ratio() {
        let u = ApSeries::from_modes(1.0, 4, &[(2, Complex64::new(0.6, 0.8))]).unwrap();
        let field = sample(&u, 16).unwrap();
        let shifted = GridField::new(
            1.0,
            field.values().iter().map(|v| v + Complex64::new(0.1, 0.0)).collect(),
        )
        .unwrap();
        let leak = spectral_leakage(&shifted, 1.0, 4).unwrap();
        assert!((leak - 0.1 / 1.1).abs() < 1e-14, "{leak}");
    }

    #[test]
    fn negative_frequency_counts_as_leakage() {
        let n = 16;
        let values = (0..n)
            .map(|k| Complex64::cis(-2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        let field = GridField::new(1.0, values).unwrap();
        assert!((spectral_leakage(&field, 1.0, 4).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_field_and_mismatch() {
        let field = GridField::new(1.0, vec![Complex64::new(0.0, 0.0); 8]).unwrap();
        assert_eq!(spectral_leakage(&field, 1.0, 3).unwrap(), 0.0);
        assert!(spectral_leakage(&field, 2.0, 3).is_err());
    }
}
