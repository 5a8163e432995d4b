//! Self-contained numerical kernel: integer-order Bessel functions,
//! damped Gauss-Newton curve fitting for the two divergence models, and
//! bracketed scalar root finding.
//!
//! Everything here is a pure function of its inputs and safe to call
//! concurrently.

mod bessel;
mod fit;
mod root;

pub use bessel::{bessel_j, MAX_BESSEL_ARG, MAX_BESSEL_ORDER};
pub use fit::{fit_power_model, fit_rational_model, FitResult};
pub use root::{golden_section_max, solve_scalar};
