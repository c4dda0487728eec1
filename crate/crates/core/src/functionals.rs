//! Estimator limits read off a sampled path.
//!
//! `zeta = ∫ x Z / ∫ Z` is a finite sum because `Z` is piecewise constant:
//!
//! ```text
//!          sum_i ½ e^{S+_i} ((x+_{i+1})² - (x+_i)²) - sum_i ½ e^{S-_i} ((x-_{i+1})² - (x-_i)²)
//! zeta = ------------------------------------------------------------------------------------
//!                   sum_i e^{S+_i} (x+_{i+1} - x+_i) + sum_i e^{S-_i} (x-_{i+1} - x-_i)
//! ```
//!
//! and the argmax set of `Z` is a single interval determined by the per-side
//! argmaxes `k` and `l`; see [`xi_bounds`].

use crate::path::{SidePath, TwoSidedPath};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// One replication's `(zeta, xi^-, xi^+)` and the truncation error estimate on `zeta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorTriple {
    pub zeta: f64,
    pub xi_minus: f64,
    pub xi_plus: f64,
    pub zeta_tail_bound: f64,
}

impl EstimatorTriple {
    pub fn xi_alpha(&self, alpha: f64) -> Result<f64> {
        xi_alpha(self, alpha)
    }

    /// All three variables multiplied by `factor` (a time change).
    pub fn scaled(&self, factor: f64) -> EstimatorTriple {
        EstimatorTriple {
            zeta: self.zeta * factor,
            xi_minus: self.xi_minus * factor,
            xi_plus: self.xi_plus * factor,
            zeta_tail_bound: self.zeta_tail_bound * factor,
        }
    }
}

#[derive(Default)]
struct SideSums {
    mass: f64,
    first_moment: f64,
}

fn side_sums(side: &SidePath, level: f64) -> SideSums {
    let times = side.event_times();
    let sums = side.cum_sums();
    let mut acc = SideSums::default();
    for i in 0..side.truncated_at() {
        let w = (sums[i] - level).exp();
        let (a, b) = (times[i], times[i + 1]);
        acc.mass += w * (b - a);
        acc.first_moment += 0.5 * w * (b * b - a * a);
    }
    acc
}

/// Per-side probability that the discarded tail outweighs the window used by [`zeta`].
pub const TAIL_EXCEEDANCE: f64 = 1e-4;

/// Length, in the path's time units, of the constant-level stretch whose mass
/// stands in for a discarded tail.
///
/// A tail restarted at its terminal level behaves, in time `y = I gamma^2 x`,
/// like `W(y) - y/2`, and `∫ exp(W(y) - y/2) dy` is distributed as `2 / Exp(1)`.
/// At large `gamma` the first holding time `Exp(1)` dominates instead. The
/// window is the larger of the two `1 - TAIL_EXCEEDANCE` quantiles.
pub fn tail_window(path: &TwoSidedPath) -> f64 {
    let brownian = -2.0 / (-TAIL_EXCEEDANCE).ln_1p();
    let holding = -TAIL_EXCEEDANCE.ln() * path.fisher_info * path.gamma * path.gamma;
    brownian.max(holding) / path.information_rate()
}

/// Bayesian limit `zeta` and an error estimate for the discarded tails.
///
/// Weights are taken relative to the global maximum level, which leaves the
/// ratio unchanged. Each discarded tail is replaced by mass `e^{S_N}` spread
/// over [`tail_window`] at distance up to twice the longer horizon; the
/// estimate is the resulting shift of the ratio.
pub fn zeta(path: &TwoSidedPath) -> Result<(f64, f64)> {
    for (name, side) in [("plus", &path.plus), ("minus", &path.minus)] {
        if side.truncated_at() == 0 {
            return Err(Error::DegeneratePath(format!(
                "{name} side has no events, so [0, x_1) is undefined"
            )));
        }
    }
    let level = path.plus.max().max(path.minus.max());
    let plus = side_sums(&path.plus, level);
    let minus = side_sums(&path.minus, level);
    let mass = plus.mass + minus.mass;
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Numerical(format!("total mass of Z is {mass}")));
    }
    let zeta = (plus.first_moment - minus.first_moment) / mass;

    let window = tail_window(path);
    let tail_mass: f64 = [&path.plus, &path.minus]
        .iter()
        .map(|s| (s.cum_sums()[s.truncated_at()] - level).exp() * window)
        .sum();
    let reach = 2.0 * path.plus.horizon().max(path.minus.horizon());
    let tail_bound = tail_mass / mass * (reach + zeta.abs());
    Ok((zeta, tail_bound))
}

/// Endpoints `(xi^-, xi^+)` of the set where `Z` attains its supremum.
///
/// With `k = argmax S+_i` and `l = argmax S-_i` (smallest index on ties):
/// `xi^- = x+_k` if `S+_k > S-_l`, else `-x-_{l+1}`; `xi^+ = x+_{k+1}` if
/// `S+_k >= S-_l`, else `-x-_l`. At equality the set spans the origin.
pub fn xi_bounds(path: &TwoSidedPath) -> Result<(f64, f64)> {
    let (k, l) = (path.plus.argmax(), path.minus.argmax());
    for (name, side, idx) in [("plus", &path.plus, k), ("minus", &path.minus, l)] {
        if idx >= side.truncated_at() {
            return Err(Error::DegeneratePath(format!(
                "{name} side ends at its argmax; the maximizing interval is not closed"
            )));
        }
    }
    let (xp, xm) = (path.plus.event_times(), path.minus.event_times());
    let (top_plus, top_minus) = (path.plus.max(), path.minus.max());
    let lower = if top_plus > top_minus {
        xp[k]
    } else {
        -xm[l + 1]
    };
    let upper = if top_plus >= top_minus {
        xp[k + 1]
    } else {
        -xm[l]
    };
    Ok((lower, upper))
}

/// `alpha xi^- + (1 - alpha) xi^+`.
pub fn xi_alpha(triple: &EstimatorTriple, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    Ok(alpha * triple.xi_minus + (1.0 - alpha) * triple.xi_plus)
}

pub fn estimator_triple(path: &TwoSidedPath) -> Result<EstimatorTriple> {
    let (zeta, zeta_tail_bound) = zeta(path)?;
    let (xi_minus, xi_plus) = xi_bounds(path)?;
    Ok(EstimatorTriple {
        zeta,
        xi_minus,
        xi_plus,
        zeta_tail_bound,
    })
}
