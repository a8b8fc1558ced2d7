use num_complex::Complex64;

use crate::apseries::ApSeries;
use crate::error::{Error, Result};
use crate::linprop::{linear_step, CglParams};
use crate::quadrature::GaussLegendre;

const PANEL_ORDER: usize = 8;

/// Composite Gauss-Legendre layout on `[0, horizon]`.
struct TimeMesh {
    rule: GaussLegendre,
    panel_width: f64,
    panels: usize,
    /// Node times, panel-major.
    times: Vec<f64>,
    /// Barycentric weights of the reference nodes.
    bary: Vec<f64>,
}

impl TimeMesh {
    fn new(horizon: f64, nodes: usize) -> Self {
        // 8-point panels when they tile the node budget, otherwise one panel
        let (panels, order) = if nodes >= PANEL_ORDER && nodes % PANEL_ORDER == 0 {
            (nodes / PANEL_ORDER, PANEL_ORDER)
        } else {
            (1, nodes)
        };
        let rule = GaussLegendre::new(order);
        let panel_width = horizon / panels as f64;
        let mut times = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = p as f64 * panel_width;
            times.extend(rule.mapped(lo, lo + panel_width).map(|(t, _)| t));
        }
        let x = rule.nodes();
        let bary = (0..order)
            .map(|i| {
                1.0 / (0..order)
                    .filter(|&k| k != i)
                    .map(|k| x[i] - x[k])
                    .product::<f64>()
            })
            .collect();
        Self {
            rule,
            panel_width,
            panels,
            times,
            bary,
        }
    }

    fn order(&self) -> usize {
        self.rule.len()
    }

    /// Lagrange interpolation within `panel` of node values `values`.
    fn interpolate(&self, panel: usize, values: &[ApSeries], t: f64) -> ApSeries {
        let q = self.order();
        let lo = panel as f64 * self.panel_width;
        let x = 2.0 * (t - lo) / self.panel_width - 1.0;
        let nodes = self.rule.nodes();
        let base = &values[panel * q..(panel + 1) * q];
        if let Some(i) = nodes.iter().position(|&xi| xi == x) {
            return base[i].clone();
        }
        let mut weights: Vec<f64> = (0..q).map(|i| self.bary[i] / (x - nodes[i])).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let mut out = vec![Complex64::new(0.0, 0.0); base[0].truncation()];
        for (w, series) in weights.iter().zip(base) {
            for (o, a) in out.iter_mut().zip(series.coeffs()) {
                *o += *w * a;
            }
        }
        ApSeries::new(base[0].lambda(), out).expect("interpolant keeps the lattice")
    }
}

/// `int_0^target U(target - s) kappa u(s)^n ds`, with `u` known at the mesh
/// nodes and interpolated panel-wise.
fn duhamel_integral(
    mesh: &TimeMesh,
    p: &CglParams,
    values: &[ApSeries],
    target: f64,
) -> Result<ApSeries> {
    let proto = &values[0];
    let lambda = proto.lambda();
    let m = proto.truncation();
    let rates: Vec<Complex64> = (1..=m).map(|j| p.mode_rate(j, lambda)).collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); m];
    for panel in 0..mesh.panels {
        let lo = panel as f64 * mesh.panel_width;
        if lo >= target {
            break;
        }
        let hi = (lo + mesh.panel_width).min(target);
        let whole = hi == lo + mesh.panel_width;
        for (i, (s, w)) in mesh.rule.mapped(lo, hi).enumerate() {
            let u = if whole {
                values[panel * mesh.order() + i].clone()
            } else {
                mesh.interpolate(panel, values, s)
            };
            let f = u.power(p.degree)?;
            for ((a, rate), fj) in acc.iter_mut().zip(&rates).zip(f.coeffs()) {
                *a += w * (rate * (target - s)).exp() * p.kappa * fj;
            }
        }
    }
    ApSeries::new(lambda, acc)
}

/// Fixed-point iteration of the mild form
/// `u(t) = U(t) u0 + int_0^t U(t - s) kappa u(s)^n ds`
/// on `[0, horizon]`.
///
/// Iterates are stored at `quad_nodes` composite Gauss-Legendre nodes
/// (8-point panels when `quad_nodes` is a multiple of 8, a single panel
/// otherwise), starting from `u^(0)(t) = U(t) u0`. Returns `u^(iters)(horizon)`.
/// Fails with [`Error::NonContraction`] once an iterate's norm exceeds ten
/// times that of the data.
pub fn picard_iterate(
    u0: &ApSeries,
    p: &CglParams,
    horizon: f64,
    iters: usize,
    quad_nodes: usize,
) -> Result<ApSeries> {
    p.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if quad_nodes == 0 {
        return Err(Error::InvalidArgument("need at least one quadrature node".into()));
    }
    let mesh = TimeMesh::new(horizon, quad_nodes);
    let free: Vec<ApSeries> = mesh
        .times
        .iter()
        .map(|&t| linear_step(u0, p, t))
        .collect::<Result<_>>()?;
    let free_end = linear_step(u0, p, horizon)?;
    let limit = 10.0 * u0.l1_norm();

    let mut nodes = free.clone();
    let mut end = free_end.clone();
    for iteration in 1..=iters {
        let mut next = Vec::with_capacity(nodes.len());
        for (t, base) in mesh.times.iter().zip(&free) {
            let integral = duhamel_integral(&mesh, p, &nodes, *t)?;
            next.push(add(base, &integral));
        }
        end = add(&free_end, &duhamel_integral(&mesh, p, &nodes, horizon)?);
        let largest = next
            .iter()
            .chain(std::iter::once(&end))
            .map(ApSeries::l1_norm)
            .fold(0.0, f64::max);
        if !largest.is_finite() || largest > limit {
            return Err(Error::NonContraction {
                iteration,
                ratio: largest / u0.l1_norm(),
            });
        }
        nodes = next;
    }
    Ok(end)
}

fn add(a: &ApSeries, b: &ApSeries) -> ApSeries {
    let coeffs = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x + y).collect();
    ApSeries::new(a.lambda(), coeffs).expect("sum keeps the lattice")
}
