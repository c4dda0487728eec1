//! Statistical checks tying the sampler to the small-`gamma` theory.
//!
//! All checks work on the rescaled process `X(y) = Z(y / (I gamma^2))`. In the
//! Gaussian case several quantities are known exactly at every `gamma`
//! (`E X^{1/2}(y)`, the characteristic function of `ln X(y)`, the Hölder
//! moment), which gives non-asymptotic regression tests. The remaining
//! checks test the lemma inequalities at concrete `gamma` with slack
//! constants: `C = 0.3 > 1/4`, `c = 0.1 < 1/8`, `b = 1/16 < 1/12`.
//!
//! The modulus-of-continuity lemma is not checked separately: its bound is a
//! Markov inequality on the second moment already checked by
//! [`check_lemma2_holder`].

use crate::densities::JumpDensity;
use crate::montecarlo::{replicate, RunSettings};
use crate::path::{sample_side_to_horizon, sample_two_sided, Side, SidePath, TruncationPolicy};
use crate::stats::Accumulator;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma_id: String,
    pub statistic: f64,
    pub bound_or_target: f64,
    pub n_samples: usize,
    pub pass: bool,
    /// The check's precondition failed, so nothing was tested.
    pub skipped: bool,
    pub details: String,
}

impl LemmaReport {
    fn skipped(lemma_id: &str, details: String) -> Self {
        Self {
            lemma_id: lemma_id.into(),
            statistic: f64::NAN,
            bound_or_target: f64::NAN,
            n_samples: 0,
            pass: false,
            skipped: true,
            details,
        }
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match (self.skipped, self.pass) {
            (true, _) => "SKIP",
            (false, true) => "PASS",
            (false, false) => "FAIL",
        };
        write!(
            f,
            "{status} {:<20} statistic={:.6} bound={:.6} n={} {}",
            self.lemma_id, self.statistic, self.bound_or_target, self.n_samples, self.details
        )
    }
}

/// `E X^{1/2}(y) = exp((|y| / gamma^2)(e^{-gamma^2/8} - 1))`, Gaussian case.
pub fn gaussian_expected_sqrt(gamma: f64, y: f64) -> f64 {
    (y.abs() / (gamma * gamma) * (-gamma * gamma / 8.0).exp_m1()).exp()
}

/// `E |X^{1/2}(y1) - X^{1/2}(y2)|^2 = 2 - 2 E X^{1/2}(|y1 - y2|)`, Gaussian
/// case. Holds for either sign pattern: on one side by independent
/// stationary increments, across the origin by independence of the sides.
pub fn gaussian_holder_moment(gamma: f64, y1: f64, y2: f64) -> f64 {
    2.0 - 2.0 * gaussian_expected_sqrt(gamma, y1 - y2)
}

/// `ln E exp(i t ln X(y)) = (|y| / gamma^2)(exp(-(gamma^2/2)(i t + t^2)) - 1)`, Gaussian case.
pub fn gaussian_log_cf(gamma: f64, y: f64, t: f64) -> Complex64 {
    let g2 = gamma * gamma;
    let u = Complex64::new(t * t, t);
    y.abs() / g2 * ((-0.5 * g2 * u).exp() - 1.0)
}

/// Log characteristic function of `ln Z_0(y) ~ N(-|y|/2, |y|)`.
pub fn limit_log_cf(y: f64, t: f64) -> Complex64 {
    -0.5 * y.abs() * Complex64::new(t * t, t)
}

/// `(I_gamma - 1) / (I gamma^2)`, the exponent rate of `E X^{1/2}(y)` per unit `|y|`.
pub fn affinity_rate(density: &JumpDensity, gamma: f64) -> Result<f64> {
    let affinity = density.hellinger_affinity(gamma)?;
    Ok((affinity - 1.0) / (density.fisher_information() * gamma * gamma))
}

const HORIZON_MAX_EVENTS: usize = 100_000_000;

/// `ln X(y)` at each requested `y` from one replication (plus side sampled
/// first, then the minus side, each only as far as needed).
pub fn sample_log_x<R: Rng>(
    density: &JumpDensity,
    gamma: f64,
    ys: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    let scale = density.fisher_information() * gamma * gamma;
    let reach = |side: Side| {
        ys.iter()
            .filter(|&&y| match side {
                Side::Plus => y > 0.0,
                Side::Minus => y < 0.0,
            })
            .map(|y| y.abs())
            .fold(None, |acc: Option<f64>, y| {
                Some(acc.map_or(y, |a| a.max(y)))
            })
    };
    let mut sample = |side: Side| -> Result<Option<SidePath>> {
        match reach(side) {
            None => Ok(None),
            Some(y) => Ok(Some(
                sample_side_to_horizon(density, gamma, side, y / scale, HORIZON_MAX_EVENTS, rng)?
                    .rescaled(scale),
            )),
        }
    };
    let plus = sample(Side::Plus)?;
    let minus = sample(Side::Minus)?;
    ys.iter()
        .map(|&y| {
            if y == 0.0 {
                Ok(0.0)
            } else if y > 0.0 {
                plus.as_ref().expect("plus side sampled").value_at(y)
            } else {
                minus.as_ref().expect("minus side sampled").value_at(-y)
            }
        })
        .collect()
}

/// Empirical characteristic function of `ln X(y)` on `t_grid`, with the
/// standard errors of its real and imaginary parts.
fn empirical_cf(
    density: &JumpDensity,
    gamma: f64,
    y: f64,
    t_grid: &[f64],
    settings: &RunSettings,
) -> Result<Vec<(Complex64, f64, f64)>> {
    if y == 0.0 {
        return Err(Error::InvalidArgument(
            "characteristic function check needs y != 0".into(),
        ));
    }
    let logs = replicate(settings, |_, rng| {
        sample_log_x(density, gamma, &[y], rng).map(|v| v[0])
    })?
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(t_grid
        .iter()
        .map(|&t| {
            let (mut re, mut im) = (Accumulator::default(), Accumulator::default());
            for &l in &logs {
                let (s, c) = (t * l).sin_cos();
                re.push(c);
                im.push(s);
            }
            (Complex64::new(re.mean(), im.mean()), re.se(), im.se())
        })
        .collect())
}

/// Grid `-3, -2.75, ..., 3`.
pub fn default_t_grid() -> Vec<f64> {
    (-12..=12).map(|k| k as f64 * 0.25).collect()
}

/// Distance of the empirical CF of `ln X(y)` from the `Z_0` limit
/// `exp(-(|y|/2)(i t + t^2))`, maximized over `t_grid`; passes at `<= tolerance`.
pub fn check_lemma1_cf(
    density: &JumpDensity,
    gamma: f64,
    y: f64,
    t_grid: &[f64],
    tolerance: f64,
    settings: &RunSettings,
) -> Result<LemmaReport> {
    let cf = empirical_cf(density, gamma, y, t_grid, settings)?;
    let (worst_t, dist) = t_grid
        .iter()
        .zip(&cf)
        .map(|(&t, (phi, _, _))| (t, (phi - limit_log_cf(y, t).exp()).norm()))
        .fold((0.0, 0.0_f64), |acc, v| if v.1 > acc.1 { v } else { acc });
    Ok(LemmaReport {
        lemma_id: "lemma1_limit_cf".into(),
        statistic: dist,
        bound_or_target: tolerance,
        n_samples: settings.reps,
        pass: dist <= tolerance,
        skipped: false,
        details: format!(
            "density={} gamma={gamma} y={y} worst_t={worst_t}",
            density.name()
        ),
    })
}

/// Gaussian finite-`gamma` characteristic function: real and imaginary parts
/// of the empirical CF within 4 standard errors of the exact value at every `t`.
pub fn check_lemma1_exact_cf(
    gamma: f64,
    y: f64,
    t_grid: &[f64],
    settings: &RunSettings,
) -> Result<LemmaReport> {
    let cf = empirical_cf(&JumpDensity::Gaussian, gamma, y, t_grid, settings)?;
    let mut worst = (0.0_f64, 0.0_f64);
    for (&t, &(phi, se_re, se_im)) in t_grid.iter().zip(&cf) {
        let exact = gaussian_log_cf(gamma, y, t).exp();
        let diff = phi - exact;
        let z = zscore(diff.re, se_re).max(zscore(diff.im, se_im));
        if z > worst.1 {
            worst = (t, z);
        }
    }
    Ok(LemmaReport {
        lemma_id: "lemma1_exact_cf".into(),
        statistic: worst.1,
        bound_or_target: 4.0,
        n_samples: settings.reps,
        pass: worst.1 <= 4.0,
        skipped: false,
        details: format!(
            "gamma={gamma} y={y} worst_t={} (max |z| over Re, Im)",
            worst.0
        ),
    })
}

fn zscore(diff: f64, se: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if se > 0.0 {
        diff.abs() / se
    } else {
        f64::INFINITY
    }
}

/// Hölder moment `E |X^{1/2}(y1) - X^{1/2}(y2)|^2`; passes if at most
/// `0.3 |y1 - y2|` and, for the Gaussian, within 4 se of the exact value.
pub fn check_lemma2_holder(
    density: &JumpDensity,
    gamma: f64,
    y1: f64,
    y2: f64,
    settings: &RunSettings,
) -> Result<LemmaReport> {
    const SLACK_C: f64 = 0.3;
    let values = replicate(settings, |_, rng| {
        let logs = sample_log_x(density, gamma, &[y1, y2], rng)?;
        Ok((0.5 * logs[0]).exp() - (0.5 * logs[1]).exp())
    })?
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let mut acc = Accumulator::default();
    for d in &values {
        acc.push(d * d);
    }
    let (mean, se) = (acc.mean(), if values.len() > 1 { acc.se() } else { 0.0 });
    let bound = SLACK_C * (y1 - y2).abs();
    let mut pass = mean <= bound;
    let mut details = format!(
        "density={} gamma={gamma} y1={y1} y2={y2} se={se:.3e}",
        density.name()
    );
    if matches!(density, JumpDensity::Gaussian) {
        let exact = gaussian_holder_moment(gamma, y1, y2);
        let z = zscore(mean - exact, se);
        pass &= z <= 4.0;
        details.push_str(&format!(" exact={exact:.6} z={z:.2}"));
    }
    Ok(LemmaReport {
        lemma_id: "lemma2_holder".into(),
        statistic: mean,
        bound_or_target: bound,
        n_samples: settings.reps,
        pass,
        skipped: false,
        details,
    })
}

/// Means of `X^{1/2}(y)` over `y_grid` from shared replications.
fn sqrt_means(
    density: &JumpDensity,
    gamma: f64,
    y_grid: &[f64],
    settings: &RunSettings,
) -> Result<Vec<(f64, f64)>> {
    let rows = replicate(settings, |_, rng| sample_log_x(density, gamma, y_grid, rng))?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok((0..y_grid.len())
        .map(|j| {
            let mut acc = Accumulator::default();
            for r in &rows {
                acc.push((0.5 * r[j]).exp());
            }
            let se = if rows.len() > 1 { acc.se() } else { 0.0 };
            (acc.mean(), se)
        })
        .collect())
}

/// Exponential decay `E X^{1/2}(y) <= exp(-c |y|) + 4 se` on `y_grid`.
/// Skipped unless `(1 - I_gamma) / (I gamma^2) >= c`, i.e. unless the
/// exact decay rate at this `gamma` already exceeds `c`.
pub fn check_lemma3_decay(
    density: &JumpDensity,
    gamma: f64,
    y_grid: &[f64],
    c: f64,
    settings: &RunSettings,
) -> Result<LemmaReport> {
    if !(c > 0.0 && c < 0.125) {
        return Err(Error::InvalidArgument(format!(
            "c must lie in (0, 1/8), got {c}"
        )));
    }
    let rate = -affinity_rate(density, gamma)?;
    if rate < c {
        return Ok(LemmaReport::skipped(
            "lemma3_decay",
            format!("decay rate {rate:.6} at gamma={gamma} is below c={c}; gamma not small enough"),
        ));
    }
    let means = sqrt_means(density, gamma, y_grid, settings)?;
    let mut worst = f64::NEG_INFINITY;
    let mut parts = Vec::new();
    for (&y, &(mean, se)) in y_grid.iter().zip(&means) {
        let excess = mean - 4.0 * se - (-c * y.abs()).exp();
        worst = worst.max(excess);
        parts.push(format!("y={y}:{mean:.5}"));
    }
    Ok(LemmaReport {
        lemma_id: "lemma3_decay".into(),
        statistic: worst,
        bound_or_target: 0.0,
        n_samples: settings.reps,
        pass: worst <= 0.0,
        skipped: false,
        details: format!(
            "density={} gamma={gamma} c={c} rate={rate:.6} means[{}] (statistic = max mean - 4se - e^(-c|y|))",
            density.name(),
            parts.join(" ")
        ),
    })
}

/// Gaussian identity `E X^{1/2}(y) = exp((|y|/gamma^2)(e^{-gamma^2/8} - 1))`
/// within 4 se at every `y`.
pub fn check_sqrt_identity(
    gamma: f64,
    y_grid: &[f64],
    settings: &RunSettings,
) -> Result<LemmaReport> {
    let means = sqrt_means(&JumpDensity::Gaussian, gamma, y_grid, settings)?;
    let mut worst = 0.0_f64;
    let mut parts = Vec::new();
    for (&y, &(mean, se)) in y_grid.iter().zip(&means) {
        let exact = gaussian_expected_sqrt(gamma, y);
        let z = zscore(mean - exact, se);
        worst = worst.max(z);
        parts.push(format!("y={y}:{mean:.5}/{exact:.5}"));
    }
    Ok(LemmaReport {
        lemma_id: "sqrt_identity".into(),
        statistic: worst,
        bound_or_target: 4.0,
        n_samples: settings.reps,
        pass: worst <= 4.0,
        skipped: false,
        details: format!("gamma={gamma} mean/exact[{}]", parts.join(" ")),
    })
}

/// Per-replication inputs of the tail check: `sup_{y > A}` and `sup_{y < -A}`
/// of `ln X` for each `A`, and the per-side suprema over all `y`.
struct TailDraw {
    beyond: Vec<f64>,
    side_max: [f64; 2],
}

/// Tail bound `P(sup_{|y| > A} X(y) > e^{-bA}) <= 4 e^{-bA}` (+ 4 binomial se)
/// on `a_grid`, together with `E sup_{y > 0} X^{1/2}(y) <= 2` (+ 4 se) on each side.
/// Statistic is the largest excess over the respective bounds.
pub fn check_lemma5_tail(
    density: &JumpDensity,
    gamma: f64,
    a_grid: &[f64],
    b: f64,
    settings: &RunSettings,
) -> Result<LemmaReport> {
    if !(b > 0.0 && b < 1.0 / 12.0) {
        return Err(Error::InvalidArgument(format!(
            "b must lie in (0, 1/12), got {b}"
        )));
    }
    let policy = TruncationPolicy::default();
    let scale = density.fisher_information() * gamma * gamma;
    let draws = replicate(settings, |_, rng| -> Result<TailDraw> {
        let path = sample_two_sided(density, gamma, &policy, rng)?;
        let (plus, minus) = (path.plus.rescaled(scale), path.minus.rescaled(scale));
        Ok(TailDraw {
            beyond: a_grid
                .iter()
                .map(|&a| plus.sup_beyond(a).max(minus.sup_beyond(a)))
                .collect(),
            side_max: [plus.max(), minus.max()],
        })
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let n = draws.len() as f64;

    let mut worst = f64::NEG_INFINITY;
    let mut parts = Vec::new();
    for (j, &a) in a_grid.iter().enumerate() {
        let hits = draws.iter().filter(|d| d.beyond[j] > -b * a).count() as f64;
        let p = hits / n;
        let se = (p * (1.0 - p) / n).sqrt();
        let bound = 4.0 * (-b * a).exp();
        worst = worst.max(p - bound - 4.0 * se);
        parts.push(format!("A={a}:{p:.5}<={bound:.4}"));
    }
    for (k, side) in ["plus", "minus"].iter().enumerate() {
        let mut acc = Accumulator::default();
        for d in &draws {
            acc.push((0.5 * d.side_max[k]).exp());
        }
        worst = worst.max(acc.mean() - 2.0 - 4.0 * acc.se());
        parts.push(format!("E sup X^1/2 ({side})={:.5}", acc.mean()));
    }
    Ok(LemmaReport {
        lemma_id: "lemma5_tail".into(),
        statistic: worst,
        bound_or_target: 0.0,
        n_samples: settings.reps,
        pass: worst <= 0.0,
        skipped: false,
        details: format!(
            "density={} gamma={gamma} b={b} {}",
            density.name(),
            parts.join(" ")
        ),
    })
}

/// `(I_gamma - 1) / (I gamma^2) -> -1/8`: the rate must move toward `-1/8`
/// as `gamma` decreases along `gammas` and end within `tolerance` of it.
pub fn check_affinity_rate(
    density: &JumpDensity,
    gammas: &[f64],
    tolerance: f64,
) -> Result<LemmaReport> {
    let mut sorted = gammas.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let gaps = sorted
        .iter()
        .map(|&g| affinity_rate(density, g).map(|r| (r + 0.125).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
    let last = *gaps
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty gamma list".into()))?;
    Ok(LemmaReport {
        lemma_id: "lemma3_rate".into(),
        statistic: last,
        bound_or_target: tolerance,
        n_samples: 0,
        pass: monotone && last <= tolerance,
        skipped: false,
        details: format!(
            "density={} gammas={sorted:?} |rate + 1/8|={gaps:?}",
            density.name()
        ),
    })
}

/// Defaults for the full verification suite.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub density: JumpDensity,
    pub seed: u64,
    pub workers: usize,
    /// Multiplies every replication count (use < 1 for a quick pass).
    pub scale: f64,
}

impl SuiteConfig {
    fn settings(&self, reps: usize, salt: u64) -> RunSettings {
        let reps = ((reps as f64 * self.scale).round() as usize).max(2);
        RunSettings::new(reps, self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
            .with_workers(self.workers)
    }
}

/// Every check at its default parameters. Gaussian-only identities are
/// included only for the Gaussian density.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<LemmaReport>> {
    let d = &config.density;
    let t_grid = default_t_grid();
    let gaussian = matches!(d, JumpDensity::Gaussian);
    let mut reports = vec![check_lemma1_cf(
        d,
        0.05,
        1.0,
        &t_grid,
        0.02,
        &config.settings(1_000_000, 1),
    )?];
    if gaussian {
        reports.push(check_lemma1_exact_cf(
            0.5,
            1.0,
            &t_grid,
            &config.settings(1_000_000, 2),
        )?);
    }
    for (k, &(y1, y2)) in [(1.0, 0.0), (2.0, 0.5), (-1.0, 1.0)].iter().enumerate() {
        reports.push(check_lemma2_holder(
            d,
            0.5,
            y1,
            y2,
            &config.settings(100_000, 10 + k as u64),
        )?);
    }
    reports.push(check_lemma3_decay(
        d,
        0.5,
        &[0.0, 1.0, 2.0, 4.0, 8.0],
        0.1,
        &config.settings(100_000, 20),
    )?);
    reports.push(check_affinity_rate(d, &[0.5, 0.25, 0.1], 5e-3)?);
    if gaussian {
        for (k, &gamma) in [0.5, 1.0, 2.0].iter().enumerate() {
            reports.push(check_sqrt_identity(
                gamma,
                &[1.0, 4.0],
                &config.settings(1_000_000, 30 + k as u64),
            )?);
        }
    }
    reports.push(check_lemma5_tail(
        d,
        0.5,
        &[0.0, 2.0, 5.0, 10.0],
        1.0 / 16.0,
        &config.settings(100_000, 40),
    )?);
    Ok(reports)
}
