//! Coefficient-space solver for the one-dimensional polynomial complex
//! Ginzburg-Landau equation
//!
//! ```text
//! du/dt = (alpha + i beta) u_xx + gamma u + kappa u^n
//! ```
//!
//! restricted to almost periodic data on a single frequency lattice
//! `{j lambda : j >= 1}`. Elements of that class are stored as truncated
//! coefficient sequences ([`ApSeries`]); the linear part acts diagonally, the
//! polynomial part acts by Cauchy products, and the two are combined with a
//! linear-first Lie-Trotter splitting ([`splitting::evolve`]).
//!
//! The [`oracle`] module holds independent reference solvers (a dealiased
//! pseudospectral integrator and a Picard iteration for the mild solution)
//! plus a spectral leakage measure for checking that evolutions never leave
//! the lattice.

pub mod apseries;
pub mod error;
pub mod grid;
pub mod linprop;
pub mod nonlinear;
pub mod oracle;
pub mod quadrature;
pub mod splitting;

pub use apseries::ApSeries;
pub use error::{Error, Result};
pub use grid::GridField;
pub use linprop::CglParams;
pub use nonlinear::{FlowResult, FlowStatus};
pub use splitting::{SplitSchedule, TrajectoryRecord};

pub use num_complex::Complex64;
