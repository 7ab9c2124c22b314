//! Fractional q-calculus on geometric lattices.
//!
//! Functions live on a right-anchored lattice `x_m = b q^m` ([`qgrid`]), where
//! q-derivatives and Jackson integrals are exact finite sums. On top of that:
//!
//! - [`qcore`]: q-numbers, q-Pochhammer symbols, the q-gamma function.
//! - [`qfracops`]: Riemann-Liouville, Caputo and bi-ordinal Hilfer q-operators.
//! - [`qml`]: the two-parameter q-Mittag-Leffler series with a convergence check.
//! - [`solver`]: Picard iteration for the Cauchy-type problem and the closed
//!   form of the linear problem.
//! - [`problems`]: right-hand sides with known exact solutions.
//! - [`verify`]: the seeded identity suite behind `qfrac verify`.
//!
//! Everything is generic over [`Real`]; type parameters default to `f64`.
//!
//! ```
//! use qfrac::qcore::{q_gamma, QParams};
//! let p = QParams::new(0.5).unwrap();
//! assert!((q_gamma(&p, 3.0).unwrap() - 1.5f64).abs() < 1e-14);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod problems;
pub mod qcore;
pub mod qfracops;
pub mod qgrid;
pub mod qml;
pub mod real;
pub mod solver;
mod tail;
pub mod verify;

pub use error::{Error, Result};
pub use real::Real;

/// Single-precision aliases. Keep grids shallow: `b q^m` leaves the `f32`
/// range long before the default depth.
pub mod single {
    pub type QParams = crate::qcore::QParams<f32>;
    pub type LatticeGrid = crate::qgrid::LatticeGrid<f32>;
    pub type GridFunction = crate::qgrid::GridFunction<f32>;
    pub type FracOrders = crate::qfracops::FracOrders<f32>;
}
