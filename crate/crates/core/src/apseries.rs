//! Truncated coefficient sequences on the lattice `{j lambda : j >= 1}`.
//!
//! An [`ApSeries`] stores `a_1..a_M` of `u(x) = sum_j a_j exp(i j lambda x)`.
//! There is no constant mode. Products only raise indices, so the Cauchy
//! product is lower triangular: mode `m` of `u v` only reads modes `< m` of
//! the factors. Truncating at `M` is therefore exact for every retained mode
//! and no dealiasing is needed in coefficient space.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::GridField;

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Element of the almost periodic class on the lattice `j lambda`, truncated
/// to the modes `1..=M`.
#[derive(Clone, PartialEq)]
pub struct ApSeries {
    lambda: f64,
    // coeffs[j - 1] holds a_j
    coeffs: Vec<Complex64>,
}

impl ApSeries {
    pub fn new(lambda: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lattice generator must be positive and finite, got {lambda}"
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument(
                "truncation order must be at least 1".into(),
            ));
        }
        Ok(Self { lambda, coeffs })
    }

    pub fn zeros(lambda: f64, truncation: usize) -> Result<Self> {
        Self::new(lambda, vec![Complex64::new(0.0, 0.0); truncation])
    }

    /// Builds a series from sparse `(j, a_j)` pairs. Indices must be distinct
    /// and lie in `1..=truncation`.
    pub fn from_modes(
        lambda: f64,
        truncation: usize,
        modes: &[(usize, Complex64)],
    ) -> Result<Self> {
        let mut out = Self::zeros(lambda, truncation)?;
        let mut seen = vec![false; truncation];
        for &(j, a) in modes {
            if j == 0 || j > truncation {
                return Err(Error::InvalidArgument(format!(
                    "mode index {j} outside 1..={truncation}"
                )));
            }
            if seen[j - 1] {
                return Err(Error::InvalidArgument(format!("mode index {j} given twice")));
            }
            seen[j - 1] = true;
            out.coeffs[j - 1] = a;
        }
        Ok(out)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Truncation order `M`.
    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficients `a_1..a_M`, index `j` at position `j - 1`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// `a_j`, or zero when `j` is 0 or beyond the truncation.
    pub fn coeff(&self, j: usize) -> Complex64 {
        if j == 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs.get(j - 1).copied().unwrap_or_default()
    }

    /// `||u|| = sum_j |a_j|`, accumulated with compensated summation.
    pub fn l1_norm(&self) -> f64 {
        compensated_sum(self.coeffs.iter().map(|a| a.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }

    /// `sum_j a_j exp(i j lambda x)`.
    pub fn evaluate(&self, x: f64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a * Complex64::cis((i + 1) as f64 * self.lambda * x))
            .sum()
    }

    /// Same lattice and truncation.
    pub fn check_compatible(&self, other: &ApSeries) -> Result<()> {
        if self.lambda != other.lambda {
            return Err(Error::ParameterMismatch(format!(
                "lattice generators differ: {} vs {}",
                self.lambda, other.lambda
            )));
        }
        if self.truncation() != other.truncation() {
            return Err(Error::ParameterMismatch(format!(
                "truncation orders differ: {} vs {}",
                self.truncation(),
                other.truncation()
            )));
        }
        Ok(())
    }

    /// Cauchy product `w_m = sum_{j + k = m} u_j v_k` for `m = 2..=M`.
    ///
    /// The inner sum for mode `m` always runs `j = 1..m-1` in the same order,
    /// so the result for a retained mode does not depend on `M`.
    pub fn cauchy_product(&self, other: &ApSeries) -> Result<ApSeries> {
        self.check_compatible(other)?;
        let m = self.truncation();
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        cauchy_into(&self.coeffs, &other.coeffs, &mut out);
        Ok(ApSeries {
            lambda: self.lambda,
            coeffs: out,
        })
    }

    /// `u^n` by repeated Cauchy products.
    pub fn power(&self, n: u32) -> Result<ApSeries> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "power degree must be at least 2, got {n}"
            )));
        }
        let mut acc = self.cauchy_product(self)?;
        for _ in 2..n {
            acc = acc.cauchy_product(self)?;
        }
        Ok(acc)
    }

    /// Discards modes above `m` or zero-pads up to `m`.
    pub fn with_truncation(&self, m: usize) -> Result<ApSeries> {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(m, Complex64::new(0.0, 0.0));
        ApSeries::new(self.lambda, coeffs)
    }

    pub fn scale(&self, factor: Complex64) -> ApSeries {
        ApSeries {
            lambda: self.lambda,
            coeffs: self.coeffs.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn sub(&self, other: &ApSeries) -> Result<ApSeries> {
        self.check_compatible(other)?;
        Ok(ApSeries {
            lambda: self.lambda,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `||u - v||` in the lattice norm.
    pub fn l1_distance(&self, other: &ApSeries) -> Result<f64> {
        Ok(self.sub(other)?.l1_norm())
    }
}

/// Lower-triangular convolution of two equally long coefficient slices.
pub(crate) fn cauchy_into(u: &[Complex64], v: &[Complex64], out: &mut [Complex64]) {
    let m = out.len();
    debug_assert!(u.len() >= m && v.len() >= m);
    out[0] = Complex64::new(0.0, 0.0);
    // Mode index m (1-based) lives at slot m - 1; u_j v_k with j + k = m.
    for slot in 1..m {
        let mode = slot + 1;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..mode {
            acc += u[j - 1] * v[mode - j - 1];
        }
        out[slot] = acc;
    }
}

impl fmt::Debug for ApSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ApSeries")
            .field("lambda", &self.lambda)
            .field("truncation", &self.truncation())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct ApSeriesRepr {
    lambda: f64,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for ApSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ApSeriesRepr {
            lambda: self.lambda,
            coeffs: self.coeffs.iter().map(|a| [a.re, a.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ApSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ApSeriesRepr::deserialize(deserializer)?;
        let coeffs = repr
            .coeffs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        ApSeries::new(repr.lambda, coeffs).map_err(serde::de::Error::custom)
    }
}

/// Discrete Bohr mean `(1/N) sum_k u(x_k) exp(-i j lambda x_k)` over one
/// period.
///
/// The pairing against `exp(-i j lambda x)` plays the role of complex
/// conjugation; the mean itself carries no conjugate. Exact for band-limited
/// fields whose highest mode is below `N - j`.
pub fn bohr_coefficient(samples: &GridField, j: usize) -> Result<Complex64> {
    let n = samples.len();
    if j >= n {
        return Err(Error::UnresolvableFrequency {
            index: j,
            points: n,
        });
    }
    let lambda = samples.lambda();
    let sum: Complex64 = samples
        .values()
        .iter()
        .enumerate()
        .map(|(k, u)| u * Complex64::cis(-(j as f64) * lambda * samples.node(k)))
        .sum();
    Ok(sum / n as f64)
}
