//! Innovation densities `f` driving the jumps of the compound Poisson path.
//!
//! Every density here has mean 0, variance 1 and is strictly positive, so the
//! jump `ln f(e + shift) / f(e)` is finite everywhere. Two densities are built
//! in; anything else can be supplied as a log-density plus a sampler, in which
//! case the Fisher information `I = ∫ f'^2 / f` is computed by quadrature.

use crate::quadrature;
use crate::{Error, Result};
use rand::distr::Open01;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Relative tolerance for Fisher information and affinity quadratures.
pub const QUADRATURE_REL_TOL: f64 = 1e-8;

/// The integration domain is cut where `f` drops below this level.
pub const DENSITY_FLOOR: f64 = 1e-30;

const MAX_SUBINTERVALS: usize = 4000;

/// Scale of the logistic law with unit variance: `s^2 pi^2 / 3 = 1`.
pub const LOGISTIC_SCALE: f64 = 0.551_328_895_421_792_1;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub type LogDensityFn = dyn Fn(f64) -> f64 + Send + Sync;
pub type SamplerFn = dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync;

/// A user-supplied innovation density.
#[derive(Clone)]
pub struct CustomDensity {
    name: String,
    ln_pdf: Arc<LogDensityFn>,
    sampler: Arc<SamplerFn>,
    fisher_info: f64,
}

impl CustomDensity {
    /// Wraps a log-density and a matching sampler. The caller is responsible
    /// for mean 0 and variance 1; the Fisher information is integrated here,
    /// so construction fails if the quadrature does not converge.
    pub fn new<L, S>(name: impl Into<String>, ln_pdf: L, sampler: S) -> Result<Self>
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
        S: Fn(&mut dyn RngCore) -> f64 + Send + Sync + 'static,
    {
        let fisher_info = fisher_information_by_quadrature(&ln_pdf)?;
        Ok(Self {
            name: name.into(),
            ln_pdf: Arc::new(ln_pdf),
            sampler: Arc::new(sampler),
            fisher_info,
        })
    }
}

impl fmt::Debug for CustomDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDensity")
            .field("name", &self.name)
            .field("fisher_info", &self.fisher_info)
            .finish_non_exhaustive()
    }
}

/// Innovation density of the jumps.
#[derive(Debug, Clone)]
pub enum JumpDensity {
    /// Standard normal, `I = 1`.
    Gaussian,
    /// Logistic with scale `sqrt(3) / pi` (unit variance), `I = pi^2 / 9`.
    Logistic,
    Custom(CustomDensity),
}

impl JumpDensity {
    /// Resolves a built-in by its CLI name (`gaussian` or `logistic`).
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "logistic" => Ok(Self::Logistic),
            other => Err(Error::InvalidArgument(format!(
                "unknown density `{other}` (expected `gaussian` or `logistic`)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Logistic => "logistic",
            Self::Custom(c) => &c.name,
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian => -0.5 * x * x - LN_SQRT_2PI,
            Self::Logistic => logistic_ln_pdf(x),
            Self::Custom(c) => (c.ln_pdf)(x),
        }
    }

    /// `ln f(eps + shift) - ln f(eps)`.
    #[inline]
    pub fn log_ratio(&self, eps: f64, shift: f64) -> Result<f64> {
        match self {
            Self::Gaussian => Ok(-shift * eps - 0.5 * shift * shift),
            Self::Logistic => Ok(logistic_ln_pdf(eps + shift) - logistic_ln_pdf(eps)),
            Self::Custom(c) => {
                let shifted = (c.ln_pdf)(eps + shift);
                let base = (c.ln_pdf)(eps);
                for (value, at) in [(shifted, eps + shift), (base, eps)] {
                    if !value.is_finite() {
                        return Err(Error::Domain {
                            density: c.name.clone(),
                            at,
                        });
                    }
                }
                Ok(shifted - base)
            }
        }
    }

    /// Draws one innovation.
    #[inline]
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gaussian => rng.sample(StandardNormal),
            Self::Logistic => {
                let u: f64 = rng.sample(Open01);
                LOGISTIC_SCALE * (u / (1.0 - u)).ln()
            }
            Self::Custom(c) => (c.sampler)(rng),
        }
    }

    pub fn fisher_information(&self) -> f64 {
        match self {
            Self::Gaussian => 1.0,
            Self::Logistic => PI * PI / 9.0,
            Self::Custom(c) => c.fisher_info,
        }
    }

    /// Hellinger affinity `I_gamma = E sqrt(f(e + gamma) / f(e))`, the
    /// per-event factor in `E X^{1/2}`. Closed form for the Gaussian,
    /// quadrature of `sqrt(f(x + gamma) f(x))` otherwise.
    pub fn hellinger_affinity(&self, gamma: f64) -> Result<f64> {
        if !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "affinity shift must be finite, got {gamma}"
            )));
        }
        match self {
            Self::Gaussian => Ok((-gamma * gamma / 8.0).exp()),
            _ => {
                let (lo, hi) = support_window(|x| self.ln_pdf(x))?;
                let r = quadrature::integrate(
                    |x| (0.5 * (self.ln_pdf(x + gamma) + self.ln_pdf(x))).exp(),
                    lo - gamma.abs(),
                    hi + gamma.abs(),
                    QUADRATURE_REL_TOL,
                    MAX_SUBINTERVALS,
                )?;
                Ok(r.value.min(1.0))
            }
        }
    }
}

fn logistic_ln_pdf(x: f64) -> f64 {
    let z = x.abs() / LOGISTIC_SCALE;
    -z - LOGISTIC_SCALE.ln() - 2.0 * (-z).exp().ln_1p()
}

/// Symmetric window `[-L, L]` outside of which `f < DENSITY_FLOOR`.
fn support_window<L: Fn(f64) -> f64>(ln_pdf: L) -> Result<(f64, f64)> {
    let floor = DENSITY_FLOOR.ln();
    let mut half_width = 1.0_f64;
    while ln_pdf(half_width) >= floor || ln_pdf(-half_width) >= floor {
        half_width *= 2.0;
        if half_width > 1e8 {
            return Err(Error::Numerical(
                "density does not fall below the quadrature floor within |x| <= 1e8".into(),
            ));
        }
    }
    Ok((-half_width, half_width))
}

/// `∫ f'^2 / f = ∫ f (d ln f / dx)^2` with a five-point derivative of `ln f`.
pub fn fisher_information_by_quadrature<L: Fn(f64) -> f64>(ln_pdf: L) -> Result<f64> {
    let (lo, hi) = support_window(&ln_pdf)?;
    let score = |x: f64| {
        let h = 1e-3 * x.abs().max(1.0);
        (ln_pdf(x - 2.0 * h) - 8.0 * ln_pdf(x - h) + 8.0 * ln_pdf(x + h) - ln_pdf(x + 2.0 * h))
            / (12.0 * h)
    };
    let integrand = |x: f64| {
        let lf = ln_pdf(x);
        if lf < DENSITY_FLOOR.ln() {
            return 0.0;
        }
        let s = score(x);
        lf.exp() * s * s
    };
    // Split at the origin so that peaked densities see a node there.
    let left = quadrature::integrate(integrand, lo, 0.0, QUADRATURE_REL_TOL, MAX_SUBINTERVALS)?;
    let right = quadrature::integrate(integrand, 0.0, hi, QUADRATURE_REL_TOL, MAX_SUBINTERVALS)?;
    let info = left.value + right.value;
    if !(info.is_finite() && info > 0.0) {
        return Err(Error::Numerical(format!(
            "Fisher information quadrature returned {info} ({} + {} subintervals)",
            left.subintervals, right.subintervals
        )));
    }
    Ok(info)
}
