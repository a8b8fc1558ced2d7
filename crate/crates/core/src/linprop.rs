//! The linear semigroup `U(t)` of `du/dt = (alpha + i beta) u_xx + gamma u`.
//!
//! On the lattice `j lambda` the semigroup is diagonal: mode `j` is multiplied
//! by `exp((-(j lambda)^2 (alpha + i beta) + gamma) t)`. The kernel routines
//! below compute the same multiplier by direct quadrature of the complex
//! heat kernel and exist to validate the diagonal form independently.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::apseries::ApSeries;
use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;

/// Constants of `du/dt = (alpha + i beta) u_xx + gamma u + kappa u^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CglParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub degree: u32,
    /// Nonlinearity coefficient. The usual choice is `-(a + i b)`.
    pub kappa: Complex64,
}

impl CglParams {
    /// Parameters with `kappa = -(a + i b)`.
    pub fn new(alpha: f64, beta: f64, gamma: f64, a: f64, b: f64, degree: u32) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            gamma,
            a,
            b,
            degree,
            kappa: -Complex64::new(a, b),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_kappa(mut self, kappa: Complex64) -> Result<Self> {
        self.kappa = kappa;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        let finite = [self.alpha, self.beta, self.gamma, self.a, self.b]
            .iter()
            .all(|v| v.is_finite())
            && self.kappa.re.is_finite()
            && self.kappa.im.is_finite();
        if !finite {
            return bad("parameters must be finite");
        }
        if self.alpha <= 0.0 {
            return bad("alpha must be positive");
        }
        if self.beta < 0.0 {
            return bad("beta must be nonnegative");
        }
        if self.gamma < 0.0 {
            return bad("gamma must be nonnegative");
        }
        if self.a <= 0.0 {
            return bad("a must be positive");
        }
        if self.b < 0.0 {
            return bad("b must be nonnegative");
        }
        if self.degree < 2 {
            return bad("nonlinearity degree must be at least 2");
        }
        Ok(())
    }

    /// `alpha + i beta`.
    pub fn diffusion(&self) -> Complex64 {
        Complex64::new(self.alpha, self.beta)
    }

    /// Growth rate of lattice mode `j`: `-(j lambda)^2 (alpha + i beta) + gamma`.
    pub fn mode_rate(&self, j: usize, lambda: f64) -> Complex64 {
        let k = j as f64 * lambda;
        -(k * k) * self.diffusion() + self.gamma
    }

    /// Same rate for a signed wavenumber `k` (used on DFT grids).
    pub fn wavenumber_rate(&self, k: f64) -> Complex64 {
        -(k * k) * self.diffusion() + self.gamma
    }

    /// Multiplier of mode `j` after time `t`.
    pub fn multiplier(&self, j: usize, lambda: f64, t: f64) -> Complex64 {
        (self.mode_rate(j, lambda) * t).exp()
    }
}

/// `U(t) u`: `A_j = a_j exp((-(j lambda)^2 (alpha + i beta) + gamma) t)`.
pub fn linear_step(u: &ApSeries, p: &CglParams, t: f64) -> Result<ApSeries> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(u.clone());
    }
    let lambda = u.lambda();
    let mut out = u.clone();
    for (i, a) in out.coeffs_mut().iter_mut().enumerate() {
        *a *= p.multiplier(i + 1, lambda, t);
    }
    Ok(out)
}

/// `int_R exp(-a x^2 - b x + c) dx = exp(b^2/(4a) + c) sqrt(pi) / sqrt(a)`,
/// principal square root, valid for `Re(a) > 0`.
pub fn gaussian_integral(a: Complex64, b: Complex64, c: Complex64) -> Result<Complex64> {
    if !(a.re > 0.0) {
        return Err(Error::DivergentIntegral(a.re));
    }
    Ok((b * b / (4.0 * a) + c).exp() * PI.sqrt() / a.sqrt())
}

/// Complex heat kernel
/// `G_t(x) = (4 pi t (alpha + i beta))^{-1/2} exp(-x^2 / (4 t (alpha + i beta)) + gamma t)`.
///
/// For `t > 0` the argument of the root lies in the right half-plane, so the
/// principal branch is continuous in `t`.
pub fn kernel_eval(p: &CglParams, t: f64, x: f64) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "kernel needs t > 0, got {t}"
        )));
    }
    Ok(kernel_unchecked(p, t, x))
}

fn kernel_unchecked(p: &CglParams, t: f64, x: f64) -> Complex64 {
    let d = 4.0 * t * p.diffusion();
    (-(x * x) / d + p.gamma * t).exp() / (PI * d).sqrt()
}

/// Half-width of the truncated quadrature domain: ten standard deviations of
/// the kernel modulus `exp(-alpha x^2 / (4 t (alpha^2 + beta^2)))`. The
/// discarded tail carries relative mass below `exp(-50)`.
pub fn kernel_support_radius(p: &CglParams, t: f64) -> f64 {
    10.0 * (2.0 * t * (p.alpha * p.alpha + p.beta * p.beta) / p.alpha).sqrt()
}

/// `int |G_t(y)| dy`, the scale against which quadrature errors are judged.
pub fn kernel_mass(p: &CglParams, t: f64) -> f64 {
    let d = 4.0 * t * p.diffusion();
    let decay = (1.0 / d).re;
    (p.gamma * t).exp() * (PI / decay).sqrt() / (PI * d).sqrt().norm()
}

const KERNEL_QUAD_RELATIVE_TOL: f64 = 1e-11;

/// Multiplier of mode `j` obtained by quadrature of
/// `int G_t(y) exp(-i j lambda y) dy` over `|y| <= kernel_support_radius`.
pub fn kernel_convolve_mode(p: &CglParams, t: f64, j: usize, lambda: f64) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "kernel needs t > 0, got {t}"
        )));
    }
    if j == 0 {
        return Err(Error::InvalidArgument("mode index must be at least 1".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lattice generator must be positive, got {lambda}"
        )));
    }
    let radius = kernel_support_radius(p, t);
    let k = j as f64 * lambda;
    let tolerance = KERNEL_QUAD_RELATIVE_TOL * kernel_mass(p, t);
    integrate_adaptive(-radius, radius, 8, tolerance, 1 << 15, |y| {
        kernel_unchecked(p, t, y) * Complex64::cis(-k * y)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn heat() -> CglParams {
        CglParams::new(1.0, 0.0, 0.0, 1.0, 0.0, 3).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Adaptive Simpson on [lo, hi]; test-side oracle for the Gaussian identity.
    fn simpson<F: Fn(f64) -> Complex64 + Copy>(f: F, lo: f64, hi: f64, tol: f64) -> Complex64 {
        fn step<F: Fn(f64) -> Complex64 + Copy>(
            f: F,
            a: f64,
            b: f64,
            fa: Complex64,
            fm: Complex64,
            fb: Complex64,
            whole: Complex64,
            tol: f64,
            depth: u32,
        ) -> Complex64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.norm() <= 15.0 * tol {
                return left + right + delta / 15.0;
            }
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
        let m = 0.5 * (lo + hi);
        let (fa, fm, fb) = (f(lo), f(m), f(hi));
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        step(f, lo, hi, fa, fm, fb, whole, tol, 50)
    }

    #[test]
    fn params_validation() {
        assert!(CglParams::new(0.0, 1.0, 0.0, 1.0, 1.0, 3).is_err());
        assert!(CglParams::new(1.0, -1.0, 0.0, 1.0, 1.0, 3).is_err());
        assert!(CglParams::new(1.0, 1.0, -0.1, 1.0, 1.0, 3).is_err());
        assert!(CglParams::new(1.0, 1.0, 0.0, 0.0, 1.0, 3).is_err());
        assert!(CglParams::new(1.0, 1.0, 0.0, 1.0, 1.0, 1).is_err());
        let p = CglParams::new(1.0, 0.0, 0.0, 1.0, 0.0, 2).unwrap();
        assert_eq!(p.kappa, c(-1.0, -0.0));
        assert_eq!(p.with_kappa(c(0.0, 0.0)).unwrap().kappa, c(0.0, 0.0));
    }

    #[test]
    fn zero_time_is_identity() {
        let u = ApSeries::new(1.0, vec![c(0.1, 0.2), c(-3.0, 1e-300)]).unwrap();
        let v = linear_step(&u, &heat(), 0.0).unwrap();
        assert_eq!(v, u);
    }

    #[test]
    fn negative_time_rejected() {
        let u = ApSeries::zeros(1.0, 2).unwrap();
        assert_eq!(linear_step(&u, &heat(), -1e-3), Err(Error::NegativeTime(-1e-3)));
    }

    #[test]
    fn heat_multiplier_matches_quadrature() {
        let u = ApSeries::from_modes(1.0, 1, &[(1, c(1.0, 0.0))]).unwrap();
        let v = linear_step(&u, &heat(), 1.0).unwrap();
        assert!((v.coeff(1).norm() - 0.3678794412).abs() < 1e-10);
        let q = kernel_convolve_mode(&heat(), 1.0, 1, 1.0).unwrap();
        assert!((q - v.coeff(1)).norm() < 1e-6);
        assert!((q.re - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn dispersive_multiplier_matches_quadrature() {
        let p = CglParams::new(1.0, 2.0, 0.5, 1.0, 1.0, 3).unwrap();
        let q = kernel_convolve_mode(&p, 0.2, 3, 0.7).unwrap();
        assert!((q - p.multiplier(3, 0.7, 0.2)).norm() < 1e-6);
    }

    #[test]
    fn strong_continuity_at_zero() {
        let p = CglParams::new(1.0, 1.0, 0.5, 1.0, 1.0, 3).unwrap();
        let mut prev = f64::INFINITY;
        for t in [1e-2, 1e-3, 1e-4] {
            let gap = (kernel_convolve_mode(&p, t, 2, 1.0).unwrap() - 1.0).norm();
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn modulus_of_multiplier() {
        let p = CglParams::new(0.7, 1.3, 0.2, 1.0, 1.0, 3).unwrap();
        let u = ApSeries::new(0.9, vec![c(0.5, -0.5), c(2.0, 1.0), c(0.0, -1.0)]).unwrap();
        let t = 0.37;
        let v = linear_step(&u, &p, t).unwrap();
        for j in 1..=3 {
            let k = j as f64 * 0.9;
            let expect = u.coeff(j).norm() * ((0.2 - 0.7 * k * k) * t).exp();
            assert!((v.coeff(j).norm() - expect).abs() < 1e-14 * expect.max(1.0));
        }
    }

    #[test]
    fn gaussian_integral_closed_forms() {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        assert!((gaussian_integral(one, z, z).unwrap().re - 1.7724538509055159).abs() < 1e-15);
        let got = gaussian_integral(one, c(2.0, 0.0), z).unwrap();
        assert!((got - E * PI.sqrt()).norm() < 1e-14);
        assert_eq!(gaussian_integral(c(0.0, 1.0), z, z), Err(Error::DivergentIntegral(0.0)));
        assert!(gaussian_integral(c(-1.0, 0.0), z, z).is_err());
    }

    #[test]
    fn gaussian_integral_matches_simpson() {
        let (a, b, cc) = (c(1.0, -1.0), c(0.0, 1.0), c(0.0, 0.0));
        let oracle = simpson(move |x| (-a * x * x - b * x + cc).exp(), -40.0, 40.0, 1e-12);
        let got = gaussian_integral(a, b, cc).unwrap();
        assert!((got - oracle).norm() < 1e-8, "{got} vs {oracle}");
    }

    #[test]
    fn kernel_heat_mass_is_one() {
        let p = heat();
        let r = kernel_support_radius(&p, 1.0);
        let mass = simpson(move |x| kernel_eval(&p, 1.0, x).unwrap(), -r, r, 1e-12);
        assert!((mass - 1.0).norm() < 1e-9);
        assert!((kernel_mass(&p, 1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_rejects_nonpositive_time() {
        assert!(kernel_eval(&heat(), 0.0, 1.0).is_err());
        assert!(kernel_convolve_mode(&heat(), -1.0, 1, 1.0).is_err());
    }

    fn params() -> impl Strategy<Value = CglParams> {
        (0.1..3.0f64, 0.0..3.0f64, 0.0..1.0f64)
            .prop_map(|(al, be, ga)| CglParams::new(al, be, ga, 1.0, 1.0, 3).unwrap())
    }

    proptest! {
        #[test]
        fn kernel_is_even(p in params(), t in 0.01..2.0f64, x in -5.0..5.0f64) {
            let l = kernel_eval(&p, t, x).unwrap();
            let r = kernel_eval(&p, t, -x).unwrap();
            prop_assert!((l - r).norm() <= 1e-15 * l.norm().max(1e-300));
        }

        #[test]
        fn kernel_modulus_decreases(p in params(), t in 0.01..2.0f64, x in 0.0..5.0f64, dx in 1e-3..1.0f64) {
            let near = kernel_eval(&p, t, x).unwrap().norm();
            let far = kernel_eval(&p, t, x + dx).unwrap().norm();
            prop_assert!(far <= near);
        }

        #[test]
        fn semigroup_law(p in params(), t1 in 0.0..0.5f64, t2 in 0.0..0.5f64,
                         coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..10)) {
            let u = ApSeries::new(0.8, coeffs.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap();
            let two = linear_step(&linear_step(&u, &p, t1).unwrap(), &p, t2).unwrap();
            let one = linear_step(&u, &p, t1 + t2).unwrap();
            for (x, y) in two.coeffs().iter().zip(one.coeffs()) {
                prop_assert!((x - y).norm() <= 1e-13 * x.norm().max(y.norm()));
            }
        }

        #[test]
        fn norm_bound(p in params(), t in 0.0..2.0f64,
                      coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..10)) {
            let u = ApSeries::new(1.1, coeffs.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap();
            let v = linear_step(&u, &p, t).unwrap();
            let bound = ((p.gamma - p.alpha * 1.1 * 1.1) * t).exp() * u.l1_norm();
            prop_assert!(v.l1_norm() <= bound * (1.0 + 1e-14));
        }

        #[test]
        fn linear_continuity_bound(p in params(), t in 0.0..1.0f64,
                                   coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..10)) {
            // |e^{zt} - 1| <= |z| t e^{max(Re z, 0) t}, and Re z <= gamma.
            let u = ApSeries::new(1.0, coeffs.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap();
            let m = u.truncation();
            let big = p.mode_rate(m, 1.0).norm().max(p.gamma);
            let constant = big * p.gamma.exp() * u.l1_norm();
            let v = linear_step(&u, &p, t).unwrap();
            prop_assert!(v.l1_distance(&u).unwrap() <= constant * t * (1.0 + 1e-12) + 1e-15);
        }
    }
}
