//! Monte Carlo simulation of the limiting likelihood ratio processes that
//! appear in change-point type statistical models.
//!
//! The central object is the exponent of a two-sided compound Poisson process
//!
//! ```text
//! ln Z(x) = sum_{k <= Pi_+(x)}  ln f(e_k + gamma) / f(e_k)     x >= 0
//! ln Z(x) = sum_{k <= Pi_-(-x)} ln f(e_k - gamma) / f(e_k)     x <= 0
//! ```
//!
//! driven by unit-intensity Poisson processes and i.i.d. innovations with
//! density `f`. The crate samples these paths exactly (up to a truncation
//! that is controlled by a Cramér–Lundberg bound), computes the Bayesian
//! limit `zeta` and the maximum-likelihood limits `xi^-`, `xi^+`, `xi^alpha`
//! in closed form from the path structure, and estimates their second
//! moments over parameter sweeps with reproducible parallel streams.
//!
//! Two reference processes are provided: the Brownian limit `Z_0` (small
//! `gamma`, after the time change `y = I gamma^2 x`) and the uniform limit
//! `Z_inf` (large `gamma`), together with their closed-form constants.
//!
//! Module map:
//!
//! - [`densities`]: innovation densities, log-likelihood ratios, Fisher information
//! - [`path`]: one- and two-sided path sampling, evaluation, time rescaling
//! - [`functionals`]: `zeta`, `xi^-`, `xi^+`, `xi^alpha` from a path
//! - [`reference`]: `Z_0`, `Z_inf` samplers and limit constants
//! - [`montecarlo`]: streams, replication engine, second moments, sweeps
//! - [`verify`]: statistical checks of the small-`gamma` lemmas and exact identities
//! - [`stats`]: goodness-of-fit and summary statistics used by the checks
//! - [`cli`]: the `cplr` command-line frontend

pub mod cli;
pub mod densities;
mod error;
pub mod functionals;
pub mod io;
pub mod montecarlo;
pub mod path;
pub mod quadrature;
pub mod reference;
pub mod stats;
pub mod verify;

pub use densities::JumpDensity;
pub use error::{Error, Result};
pub use functionals::EstimatorTriple;
pub use montecarlo::{make_stream, Stream, SweepConfig, SweepRow};
pub use path::{Side, SidePath, TruncationPolicy, TwoSidedPath};
pub use reference::ReferenceConstants;
