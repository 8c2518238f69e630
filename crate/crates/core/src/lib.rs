//! Forward and inverse numerics for multi-species chemotaxis systems with an
//! interior anomaly.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: grids, inclusions, rasterized indicators, truncated corners.
//! * [`reaction`]: centred Taylor-series reaction terms with an interior and an
//!   exterior branch.
//! * [`forward`]: IMEX time stepping and a Jacobian-free Newton–Krylov
//!   stationary solver, plus boundary measurement extraction.
//! * [`cascade`]: first-, second- and third-order linearized systems about a
//!   constant state and their finite-difference consistency check.
//! * [`probe`]: complex geometrical optics probes and their corner asymptotics.
//! * [`inversion`]: discrepancy, shape reconstruction, boundary coefficient
//!   recovery and the apex-vanishing test.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cascade;
mod error;
pub mod expr;
pub mod fit;
pub mod forward;
pub mod geometry;
pub mod inversion;
pub mod linalg;
pub mod probe;
pub mod quadrature;
pub mod reaction;

pub use error::{Error, Result};
