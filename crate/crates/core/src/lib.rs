//! Heat equation on the half-line with a Caputo-type dynamic boundary
//! condition at the origin: survival probabilities of the associated
//! Brownian motion by Monte Carlo, quadrature and Laplace inversion, plus
//! the random times (stable subordinators and their inverses) behind them.

// `!(x > 0.0)` is how NaN inputs are rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bm;
pub mod error;
pub mod fbvp;
pub mod harness;
pub mod laplace;
pub mod par;
pub mod quad;
pub mod randomtimes;
pub mod specfun;

pub use error::{Error, Result};
pub use randomtimes::{Params, RngStream};
