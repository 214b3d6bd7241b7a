//! Confidence intervals for a normal mean that use uncertain prior
//! information that the mean is near zero.
//!
//! * [`known_variance`]: acceptance-region families for `X ~ N(θ, 1)` and
//!   their inverted confidence sets.
//! * [`spline`]: the cubic spline `b` parameterizing the unknown-variance
//!   interval.
//! * [`unknown_variance`]: coverage, expected length, and optimization of `b`.
//! * [`mc`]: Monte Carlo estimates used to check the numerical integrals.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these checks

pub mod config;
pub mod error;
pub mod interval;
pub mod known_variance;
pub mod mc;
mod par;
pub mod quadrature;
pub mod roots;
pub mod special;
pub mod spline;
pub mod unknown_variance;

pub use config::ProblemConfig;
pub use error::{Error, Result};
pub use interval::Interval;
