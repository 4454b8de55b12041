//! Planning and verification toolkit for non-inferiority trials with a
//! competing risk.
//!
//! The crate is split along the workflow:
//!
//! - [`numerics`]: normal quantile, adaptive Gauss–Kronrod quadrature, step functions.
//! - [`design`]: incidence integrals, required events and total sample size.
//! - [`simgen`]: Fine–Gray data generation with staggered entry and dropout.
//! - [`finegray`]: two-group sub-distribution hazard estimation and the
//!   non-inferiority decision.
//! - [`power`]: replicated generate/fit/decide runs over scenario grids.
//!
//! Interchangeable algorithms (incidence methods, risk-set weighting schemes)
//! are trait objects looked up by name in a registry, so the CLI can select
//! them at runtime.

// Negated comparisons reject NaN along with out-of-range values; tabulated
// constants keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod design;
pub mod error;
pub mod finegray;
pub mod numerics;
pub mod power;
pub mod rng;
pub mod simgen;

pub use error::{Error, Result};
