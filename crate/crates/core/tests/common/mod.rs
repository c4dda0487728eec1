//! Independent reimplementations used as oracles by several test targets.

#![allow(dead_code)]

use cplr::path::{sample_two_sided, TruncationPolicy};
use cplr::{make_stream, JumpDensity, TwoSidedPath};

/// Every open interval between consecutive event times of the two-sided
/// path, left to right, as `(left, right)`.
pub fn intervals(path: &TwoSidedPath) -> Vec<(f64, f64)> {
    let mut points: Vec<f64> = path.minus.event_times().iter().map(|x| -x).collect();
    points.extend_from_slice(&path.plus.event_times()[1..]);
    points.sort_by(f64::total_cmp);
    points.windows(2).map(|w| (w[0], w[1])).collect()
}

/// `ln Z` on each interval, read through `evaluate_log` at the midpoint.
fn interval_levels(path: &TwoSidedPath) -> Vec<((f64, f64), f64)> {
    intervals(path)
        .into_iter()
        .map(|(a, b)| {
            (
                (a, b),
                path.evaluate_log(0.5 * (a + b)).expect("inside horizon"),
            )
        })
        .collect()
}

/// `∫ x Z / ∫ Z` over the sampled window by two-point Gauss–Legendre on each
/// interval, exact for the piecewise linear integrand.
pub fn zeta_by_quadrature(path: &TwoSidedPath) -> f64 {
    let node = 0.5 / 3f64.sqrt();
    let levels = interval_levels(path);
    let top = levels.iter().map(|l| l.1).fold(f64::NEG_INFINITY, f64::max);
    let (mut mass, mut moment) = (0.0, 0.0);
    for ((a, b), _) in &levels {
        let (mid, len) = (0.5 * (a + b), b - a);
        for x in [mid - node * len, mid + node * len] {
            let z = (path.evaluate_log(x).unwrap() - top).exp();
            mass += 0.5 * len * z;
            moment += 0.5 * len * x * z;
        }
    }
    moment / mass
}

/// `∫ |x| Z / ∫ Z`, the scale against which errors in `zeta` are relative.
pub fn abs_first_moment(path: &TwoSidedPath) -> f64 {
    let levels = interval_levels(path);
    let top = levels.iter().map(|l| l.1).fold(f64::NEG_INFINITY, f64::max);
    let (mut mass, mut moment) = (0.0, 0.0);
    for ((a, b), level) in &levels {
        let z = (level - top).exp();
        mass += z * (b - a);
        moment += z * if *a >= 0.0 {
            0.5 * (b * b - a * a)
        } else {
            0.5 * (a * a - b * b)
        };
    }
    moment / mass
}

/// Hull of all intervals on which `ln Z` equals its maximum.
pub fn xi_by_enumeration(path: &TwoSidedPath) -> (f64, f64) {
    let levels = interval_levels(path);
    let top = levels.iter().map(|l| l.1).fold(f64::NEG_INFINITY, f64::max);
    let hits: Vec<(f64, f64)> = levels.iter().filter(|l| l.1 == top).map(|l| l.0).collect();
    let lo = hits.iter().map(|h| h.0).fold(f64::INFINITY, f64::min);
    let hi = hits.iter().map(|h| h.1).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

pub fn builtin_densities() -> [JumpDensity; 2] {
    [JumpDensity::Gaussian, JumpDensity::Logistic]
}

/// `n` paths cycling through gamma in {0.25, 1, 4} and both built-in densities.
pub fn mixed_paths(n: usize, seed: u64) -> Vec<TwoSidedPath> {
    let policy = TruncationPolicy::default();
    let gammas = [0.25, 1.0, 4.0];
    (0..n)
        .map(|i| {
            let density = &builtin_densities()[i % 2];
            let gamma = gammas[(i / 2) % 3];
            sample_two_sided(density, gamma, &policy, &mut make_stream(seed, i as u64)).unwrap()
        })
        .collect()
}
