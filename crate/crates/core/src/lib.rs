//! Plane wave limits of semi-Riemannian metrics.
//!
//! A metric is given as a matrix of coordinate expressions ([`exprlang`]).
//! [`geometry`] turns it into Christoffel symbols and curvature at a point,
//! [`transport`] integrates geodesics and parallel orthonormal frames along
//! them, and [`limit`] reads off the wave profile `A_ij(t)` and assembles the
//! Lorentzian plane wave
//!
//! ```text
//! 2 dv dt + (Σ A_ij(t) x^i x^j) dt² + Σ (dx^i)²
//! ```
//!
//! [`ppwave`] classifies such metrics by the derivatives of `H`, and
//! [`deviation`] follows Jacobi fields on both sides to locate conjugate
//! points and compare their counts. [`evidence`] runs the forward-direction
//! checks on sampled geodesics of a scenario.

pub mod deviation;
pub mod error;
pub mod evidence;
pub mod exprlang;
pub mod geometry;
pub mod interp;
pub mod limit;
pub mod ode;
pub mod ppwave;
pub mod scenarios;
pub mod transport;

pub use error::{Error, Result};
