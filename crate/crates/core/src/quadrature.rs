//! Gauss-Legendre rules and composite quadrature of complex integrands.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    /// Composite rule with `panels` equal panels on `[a, b]`.
    pub fn integrate_composite<F>(&self, a: f64, b: f64, panels: usize, mut f: F) -> Complex64
    where
        F: FnMut(f64) -> Complex64,
    {
        let width = (b - a) / panels as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let lo = a + p as f64 * width;
            let hi = if p + 1 == panels { b } else { lo + width };
            let mut panel = Complex64::new(0.0, 0.0);
            for (x, w) in self.mapped(lo, hi) {
                panel += f(x) * w;
            }
            total += panel;
        }
        total
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre with panel doubling until two successive
/// estimates agree to `tolerance` (absolute). Returns the finer estimate.
pub fn integrate_adaptive<F>(
    a: f64,
    b: f64,
    initial_panels: usize,
    tolerance: f64,
    max_panels: usize,
    f: F,
) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let rule = GaussLegendre::new(16);
    let mut panels = initial_panels.max(1);
    let mut coarse = rule.integrate_composite(a, b, panels, &f);
    let mut estimate = f64::INFINITY;
    while panels * 2 <= max_panels {
        panels *= 2;
        let fine = rule.integrate_composite(a, b, panels, &f);
        estimate = (fine - coarse).norm();
        if estimate <= tolerance {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::QuadratureNonConvergence {
        estimate,
        tolerance,
    })
}
