//! Shared numerical primitives.

mod quadrature;
mod quantile;
mod step;

pub use quadrature::{integrate, integrate_with_budget, DEFAULT_ABS_TOL, DEFAULT_MAX_SEGMENTS};
pub use quantile::{normal_cdf, normal_quantile};
pub use step::StepFunction;
