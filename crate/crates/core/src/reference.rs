//! Limit processes and their closed-form constants.
//!
//! As `gamma -> 0`, `Z(y / (I gamma^2))` approaches the Brownian limit
//! `Z_0(y) = exp(W(y) - |y| / 2)`, with `E zeta_0^2 = 16 zeta(3)` and
//! `E xi_0^2 = 26`. As `gamma -> inf`, `Z` approaches the indicator
//! `Z_inf(x) = 1{-eta < x < tau}` with `eta, tau` i.i.d. `Exp(1)`.

use crate::functionals::EstimatorTriple;
use crate::montecarlo::{estimate_second_moment, replicate, RunSettings};
use crate::stats::{ks_one_sample, KsResult};
use crate::{Error, Result};
use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

/// Riemann zeta at 3: 100 direct terms plus an Euler–Maclaurin tail through
/// the `N^-8` term, which leaves an error near `1e-20`.
pub fn zeta3() -> f64 {
    const N: u32 = 100;
    let direct: f64 = (1..=N).rev().map(|n| (n as f64).powi(-3)).sum();
    let n = N as f64;
    let tail =
        0.5 / (n * n) - 0.5 / n.powi(3) + 0.25 / n.powi(4) - n.powi(-6) / 12.0 + n.powi(-8) / 12.0;
    direct + tail
}

/// Closed-form limits of the mean squared errors and efficiencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceConstants {
    /// `E zeta_0^2 = 16 zeta(3)`.
    pub b0: f64,
    /// `E xi_0^2 = 26`.
    pub m0: f64,
    /// `b0 / m0 = 8 zeta(3) / 13`.
    pub e0: f64,
    /// `E zeta_inf^2 = 1/2`.
    pub b_inf: f64,
}

impl ReferenceConstants {
    pub fn new() -> Self {
        let b0 = 16.0 * zeta3();
        let m0 = 26.0;
        Self {
            b0,
            m0,
            e0: b0 / m0,
            b_inf: 0.5,
        }
    }

    /// `E (xi_inf^alpha)^2 = 6 (alpha - 1/2)^2 + 1/2`.
    pub fn m_inf(&self, alpha: f64) -> f64 {
        6.0 * (alpha - 0.5).powi(2) + 0.5
    }

    /// `B_inf / M_inf(alpha) = 1 / (12 (alpha - 1/2)^2 + 1)`.
    pub fn e_inf(&self, alpha: f64) -> f64 {
        1.0 / (12.0 * (alpha - 0.5).powi(2) + 1.0)
    }

    /// JSON form used by `cplr constants`, with the alpha-dependent limits
    /// tabulated at `alphas`.
    pub fn to_json(&self, alphas: &[f64]) -> serde_json::Value {
        let table = |f: &dyn Fn(f64) -> f64| {
            alphas
                .iter()
                .map(|&a| serde_json::json!({ "alpha": a, "value": f(a) }))
                .collect::<Vec<_>>()
        };
        serde_json::json!({
            "zeta3": zeta3(),
            "B0": self.b0,
            "M0": self.m0,
            "E0": self.e0,
            "B_inf": self.b_inf,
            "M_inf": table(&|a| self.m_inf(a)),
            "E_inf": table(&|a| self.e_inf(a)),
        })
    }
}

impl Default for ReferenceConstants {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Z0Config {
    /// Time step of the grid on which `W` is sampled.
    pub grid_step: f64,
    /// Stop a side once it is this far (log units) below its running max.
    pub gap: f64,
    /// Cap on grid steps per side.
    pub max_steps: usize,
}

impl Default for Z0Config {
    fn default() -> Self {
        Self {
            grid_step: 1e-3,
            gap: crate::path::DEFAULT_GAP,
            max_steps: 100_000_000,
        }
    }
}

impl Z0Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.grid_step.is_finite() && self.grid_step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid_step must be positive, got {}",
                self.grid_step
            )));
        }
        if !(self.gap.is_finite() && self.gap > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gap must be positive, got {}",
                self.gap
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidArgument(
                "max_steps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One draw of the Brownian limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Z0Sample {
    /// `zeta_0` by the trapezoid rule on the grid; `xi_minus == xi_plus` is
    /// the grid argmax.
    pub triple: EstimatorTriple,
    /// `sup_{t > 0} (W(t) - t/2)` of each side (plus, minus), continuous in
    /// time: between grid points the maximum of the Brownian bridge is
    /// sampled exactly whenever it can reach the running supremum.
    pub side_sup: [f64; 2],
}

struct Z0Side {
    mass: f64,
    first_moment: f64,
    grid_max: f64,
    argmax_time: f64,
    sup: f64,
    terminal: f64,
    horizon: f64,
}

// A bridge step whose crossing probability of the running sup is below
// e^{-BRIDGE_CUTOFF} is not refined.
const BRIDGE_CUTOFF: f64 = 40.0;

fn sample_z0_side<R: Rng>(config: &Z0Config, rng: &mut R) -> Result<Z0Side> {
    let h = config.grid_step;
    let sd = h.sqrt();
    let drift = -0.5 * h;
    let (mut w, mut grid_max, mut sup) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut argmax_step = 0usize;
    let (mut mass, mut first) = (0.0_f64, 0.0_f64);
    let mut prev_z = 1.0_f64;
    let mut prev_x = 0.0_f64;
    for j in 1..=config.max_steps {
        let z_norm: f64 = rng.sample(StandardNormal);
        let next = w + drift + sd * z_norm;
        if 2.0 * (sup - w) * (sup - next) < BRIDGE_CUTOFF * h || next > sup {
            let u: f64 = rng.sample(Open01);
            let bridge = 0.5 * (w + next + ((next - w).powi(2) - 2.0 * h * u.ln()).sqrt());
            sup = sup.max(bridge);
        }
        let x = j as f64 * h;
        let z = next.exp();
        mass += 0.5 * h * (prev_z + z);
        first += 0.5 * h * (prev_x * prev_z + x * z);
        prev_z = z;
        prev_x = x;
        w = next;
        if w > grid_max {
            grid_max = w;
            argmax_step = j;
        } else if w <= grid_max - config.gap {
            return Ok(Z0Side {
                mass,
                first_moment: first,
                grid_max,
                argmax_time: argmax_step as f64 * h,
                sup,
                terminal: w,
                horizon: x,
            });
        }
    }
    Err(Error::Numerical(format!(
        "Z_0 side did not fall {} below its maximum within {} grid steps",
        config.gap, config.max_steps
    )))
}

/// Samples the plus side, then the minus side, of `ln Z_0` on a uniform grid
/// with exact increments `N(-h/2, h)`.
pub fn sample_z0<R: Rng>(config: &Z0Config, rng: &mut R) -> Result<Z0Sample> {
    config.validate()?;
    let plus = sample_z0_side(config, rng)?;
    let minus = sample_z0_side(config, rng)?;
    let mass = plus.mass + minus.mass;
    let zeta = (plus.first_moment - minus.first_moment) / mass;
    let xi = if plus.grid_max > minus.grid_max {
        plus.argmax_time
    } else if minus.grid_max > plus.grid_max {
        -minus.argmax_time
    } else {
        0.0
    };
    let window = -2.0 / (-crate::functionals::TAIL_EXCEEDANCE).ln_1p();
    let tail_mass = (plus.terminal.exp() + minus.terminal.exp()) * window;
    let reach = 2.0 * plus.horizon.max(minus.horizon);
    Ok(Z0Sample {
        triple: EstimatorTriple {
            zeta,
            xi_minus: xi,
            xi_plus: xi,
            zeta_tail_bound: tail_mass / mass * (reach + zeta.abs()),
        },
        side_sup: [plus.sup, minus.sup],
    })
}

/// `(eta, tau)`: the left and right edges of `Z_inf`, drawn in that order.
pub fn sample_zinf_edges<R: Rng>(rng: &mut R) -> (f64, f64) {
    let eta: f64 = rng.sample(Exp1);
    let tau: f64 = rng.sample(Exp1);
    (eta, tau)
}

/// `(zeta_inf, xi_inf^alpha) = ((tau - eta) / 2, (1 - alpha) tau - alpha eta)`.
pub fn sample_zinf<R: Rng>(alpha: f64, rng: &mut R) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let (eta, tau) = sample_zinf_edges(rng);
    Ok(zinf_from_edges(eta, tau, alpha))
}

pub fn zinf_from_edges(eta: f64, tau: f64, alpha: f64) -> (f64, f64) {
    (0.5 * (tau - eta), (1.0 - alpha) * tau - alpha * eta)
}

/// Monte Carlo second moments of a limit process against their closed forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub process: String,
    /// Absent for `Z_0`, whose argmax is almost surely unique.
    pub alpha: Option<f64>,
    #[serde(rename = "B_hat")]
    pub b_hat: f64,
    #[serde(rename = "B_se")]
    pub b_se: f64,
    #[serde(rename = "M_hat")]
    pub m_hat: f64,
    #[serde(rename = "M_se")]
    pub m_se: f64,
    #[serde(rename = "E_hat")]
    pub e_hat: f64,
    #[serde(rename = "B_ref")]
    pub b_ref: f64,
    #[serde(rename = "M_ref")]
    pub m_ref: f64,
    #[serde(rename = "E_ref")]
    pub e_ref: f64,
    pub reps: usize,
    pub seed: u64,
}

/// Second moments of `zeta_inf` and `xi_inf^alpha`, all alphas from shared draws.
pub fn estimate_zinf(alphas: &[f64], settings: &RunSettings) -> Result<Vec<LimitRow>> {
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in [0, 1], got {a}"
        )));
    }
    let edges = replicate(settings, |_, rng| sample_zinf_edges(rng))?;
    let zetas: Vec<f64> = edges.iter().map(|&(e, t)| 0.5 * (t - e)).collect();
    let (b_hat, b_se) = estimate_second_moment(&zetas)?;
    let constants = ReferenceConstants::new();
    alphas
        .iter()
        .map(|&alpha| {
            let xis: Vec<f64> = edges
                .iter()
                .map(|&(e, t)| zinf_from_edges(e, t, alpha).1)
                .collect();
            let (m_hat, m_se) = estimate_second_moment(&xis)?;
            Ok(LimitRow {
                process: "Z_inf".into(),
                alpha: Some(alpha),
                b_hat,
                b_se,
                m_hat,
                m_se,
                e_hat: b_hat / m_hat,
                b_ref: constants.b_inf,
                m_ref: constants.m_inf(alpha),
                e_ref: constants.e_inf(alpha),
                reps: settings.reps,
                seed: settings.seed,
            })
        })
        .collect()
}

/// Monte Carlo summary of the Brownian limit.
#[derive(Debug, Clone, PartialEq)]
pub struct Z0Summary {
    pub row: LimitRow,
    /// KS test of the pooled per-side suprema against `Exp(1)`.
    pub side_sup_ks: KsResult,
    pub samples: Vec<Z0Sample>,
}

pub fn estimate_z0(config: &Z0Config, settings: &RunSettings) -> Result<Z0Summary> {
    config.validate()?;
    let samples = replicate(settings, |_, rng| sample_z0(config, rng))?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let zetas: Vec<f64> = samples.iter().map(|s| s.triple.zeta).collect();
    let xis: Vec<f64> = samples.iter().map(|s| s.triple.xi_plus).collect();
    let (b_hat, b_se) = estimate_second_moment(&zetas)?;
    let (m_hat, m_se) = estimate_second_moment(&xis)?;
    let sups: Vec<f64> = samples.iter().flat_map(|s| s.side_sup).collect();
    let side_sup_ks = ks_one_sample(&sups, |x| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() })?;
    let constants = ReferenceConstants::new();
    Ok(Z0Summary {
        row: LimitRow {
            process: "Z_0".into(),
            alpha: None,
            b_hat,
            b_se,
            m_hat,
            m_se,
            e_hat: b_hat / m_hat,
            b_ref: constants.b0,
            m_ref: constants.m0,
            e_ref: constants.e0,
            reps: settings.reps,
            seed: settings.seed,
        },
        side_sup_ks,
        samples,
    })
}
