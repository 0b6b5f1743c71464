//! Single-hidden-layer networks over the unit cube, with the machinery to
//! build, rewrite, fit, and certify them.
//!
//! The crate is organized by role:
//!
//! - [`nets`]: the network data model (`relu` or clipped-ramp hidden units,
//!   linear read-out, optional softmax head) and exact evaluation.
//! - [`surgery`]: exact width surgery (ramp-to-relu expansion, block-diagonal
//!   output stacking) and softmax indicator constructions with closed-form
//!   error bounds.
//! - [`approx1d`]: 1-D target registry, step approximation, and certified
//!   step-to-ramp network builders with stage-by-stage error certificates.
//! - [`fitnd`]: random-feature ridge regression in any input dimension.
//! - [`measure`]: exact, adaptive-quadrature, grid, and Monte-Carlo L1
//!   distances between nets, targets, and region indicators.
//!
//! All constructions work on `[0, 1]^d` and report error in the L1 norm.

// `!(x > 0.0)` style guards are used throughout so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx1d;
pub mod error;
pub mod fitnd;
pub mod measure;
pub mod nets;
mod quad;
pub mod surgery;

pub use error::{Error, Result};

/// Hard cap on step/indicator cell counts; builders refuse to go wider.
pub const MAX_CELLS: usize = 1 << 20;
