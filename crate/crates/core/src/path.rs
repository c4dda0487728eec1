//! Sample paths of `ln Z`, the two-sided compound Poisson log-likelihood ratio.
//!
//! Each side is a random walk observed at the events `0 = x_0 < x_1 < ...` of
//! a unit-intensity Poisson process. The path equals `S_i` on `[x_i, x_{i+1})`
//! to the right of the origin and on `(-x_{i+1}, -x_i]` to the left.
//!
//! The walk has negative drift (`E[jump] = -KL(f(. + gamma) | f) < 0`) and
//! `E exp(jump) = 1`, so the Cramér–Lundberg exponent is exactly 1 for every
//! density: once a side has fallen `gap` below its running maximum, the
//! probability of ever climbing back above `max - gap + a` is at most `e^{-a}`.
//! Sampling stops there.

use crate::densities::JumpDensity;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;

pub const DEFAULT_GAP: f64 = 30.0;
pub const DEFAULT_MAX_EVENTS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `x > 0`, jumps `ln f(e + gamma) / f(e)`.
    Plus,
    /// `x < 0`, jumps `ln f(e - gamma) / f(e)`.
    Minus,
}

impl Side {
    pub fn shift(self, gamma: f64) -> f64 {
        match self {
            Side::Plus => gamma,
            Side::Minus => -gamma,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        })
    }
}

/// When to stop extending a side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Stop at the first event whose partial sum is `gap` (natural-log
    /// units) below the running maximum.
    pub gap: f64,
    /// Hard cap on events per side; hitting it is a truncation error.
    pub max_events: usize,
}

impl TruncationPolicy {
    pub fn new(gap: f64, max_events: usize) -> Result<Self> {
        let policy = Self { gap, max_events };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gap.is_finite() && self.gap > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "truncation gap must be positive and finite, got {}",
                self.gap
            )));
        }
        if self.max_events == 0 {
            return Err(Error::InvalidArgument(
                "max_events must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Upper bound on the probability that the discarded tail of a side ever
    /// rises above `running max - gap + a`.
    pub fn rebound_probability(&self, a: f64) -> f64 {
        (-a.max(0.0)).exp()
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            gap: DEFAULT_GAP,
            max_events: DEFAULT_MAX_EVENTS,
        }
    }
}

/// One side of the path: event times and partial sums, both starting at 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SidePath {
    event_times: Vec<f64>,
    cum_sums: Vec<f64>,
    argmax: usize,
}

impl SidePath {
    /// Builds a side from explicit lists. Both must start with 0, have equal
    /// length, and the times must be strictly increasing.
    pub fn from_parts(event_times: Vec<f64>, cum_sums: Vec<f64>) -> Result<Self> {
        if event_times.is_empty() || event_times.len() != cum_sums.len() {
            return Err(Error::DegeneratePath(format!(
                "need equal, non-empty lists (got {} times, {} sums)",
                event_times.len(),
                cum_sums.len()
            )));
        }
        if event_times[0] != 0.0 || cum_sums[0] != 0.0 {
            return Err(Error::DegeneratePath("x_0 and S_0 must both be 0".into()));
        }
        if event_times
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::DegeneratePath(
                "event times must be strictly increasing".into(),
            ));
        }
        if cum_sums.iter().chain(&event_times).any(|v| !v.is_finite()) {
            return Err(Error::DegeneratePath("non-finite entry".into()));
        }
        let argmax = first_argmax(&cum_sums);
        Ok(Self {
            event_times,
            cum_sums,
            argmax,
        })
    }

    pub fn event_times(&self) -> &[f64] {
        &self.event_times
    }

    pub fn cum_sums(&self) -> &[f64] {
        &self.cum_sums
    }

    /// Index `N` of the last sampled event.
    pub fn truncated_at(&self) -> usize {
        self.event_times.len() - 1
    }

    /// Smallest index attaining the maximum partial sum.
    pub fn argmax(&self) -> usize {
        self.argmax
    }

    pub fn max(&self) -> f64 {
        self.cum_sums[self.argmax]
    }

    /// How far below the running maximum the side ended.
    pub fn trunc_gap(&self) -> f64 {
        self.max() - self.cum_sums[self.truncated_at()]
    }

    /// Time of the last sampled event, the edge of the sampled horizon.
    pub fn horizon(&self) -> f64 {
        self.event_times[self.truncated_at()]
    }

    /// Index of the interval containing `t >= 0`: the number of events in `(0, t]`.
    pub fn interval_index(&self, t: f64) -> usize {
        self.event_times.partition_point(|&x| x <= t) - 1
    }

    /// Partial sum at distance `t >= 0` from the origin.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= self.horizon()) {
            return Err(Error::OutOfHorizon {
                x: t,
                lo: 0.0,
                hi: self.horizon(),
            });
        }
        Ok(self.cum_sums[self.interval_index(t)])
    }

    /// Largest partial sum from the interval containing `t` onwards, i.e.
    /// `sup_{u > t}` of this side. Past the horizon the terminal level is used.
    pub fn sup_beyond(&self, t: f64) -> f64 {
        let start = self.interval_index(t.max(0.0));
        self.cum_sums[start..]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Times multiplied by `factor`, sums untouched.
    pub fn rescaled(&self, factor: f64) -> SidePath {
        SidePath {
            event_times: self.event_times.iter().map(|&x| x * factor).collect(),
            cum_sums: self.cum_sums.clone(),
            argmax: self.argmax,
        }
    }

    fn reset(&mut self) {
        self.event_times.clear();
        self.cum_sums.clear();
        self.event_times.push(0.0);
        self.cum_sums.push(0.0);
        self.argmax = 0;
    }
}

fn first_argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "gamma must be positive and finite, got {gamma}"
        )))
    }
}

/// Samples one side until it falls `policy.gap` below its running maximum.
///
/// Per event the stream is consumed as: one `Exp(1)` waiting time, then one
/// innovation from `density`.
pub fn sample_side_path<R: Rng>(
    density: &JumpDensity,
    gamma: f64,
    side: Side,
    policy: &TruncationPolicy,
    rng: &mut R,
) -> Result<SidePath> {
    let mut path = SidePath::default();
    sample_side_path_into(&mut path, density, gamma, side, policy, rng)?;
    Ok(path)
}

/// Like [`sample_side_path`] but reuses the buffers of `path`.
pub fn sample_side_path_into<R: Rng>(
    path: &mut SidePath,
    density: &JumpDensity,
    gamma: f64,
    side: Side,
    policy: &TruncationPolicy,
    rng: &mut R,
) -> Result<()> {
    check_gamma(gamma)?;
    policy.validate()?;
    path.reset();
    let shift = side.shift(gamma);
    let (mut t, mut s, mut max) = (0.0_f64, 0.0_f64, 0.0_f64);
    for n in 1..=policy.max_events {
        t += rng.sample::<f64, _>(Exp1);
        let eps = density.sample(rng);
        s += density.log_ratio(eps, shift)?;
        path.event_times.push(t);
        path.cum_sums.push(s);
        if s > max {
            max = s;
            path.argmax = n;
        } else if s <= max - policy.gap {
            return Ok(());
        }
    }
    Err(Error::Truncation {
        side,
        max_events: policy.max_events,
    })
}

/// Samples one side until its last event lies at or beyond `horizon`, so that
/// [`SidePath::value_at`] is defined on `[0, horizon]`. Same stream recipe as
/// [`sample_side_path`].
pub fn sample_side_to_horizon<R: Rng>(
    density: &JumpDensity,
    gamma: f64,
    side: Side,
    horizon: f64,
    max_events: usize,
    rng: &mut R,
) -> Result<SidePath> {
    check_gamma(gamma)?;
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be finite and non-negative, got {horizon}"
        )));
    }
    let mut path = SidePath::default();
    path.reset();
    let shift = side.shift(gamma);
    let (mut t, mut s) = (0.0_f64, 0.0_f64);
    while t < horizon {
        if path.event_times.len() > max_events {
            return Err(Error::Truncation { side, max_events });
        }
        t += rng.sample::<f64, _>(Exp1);
        let eps = density.sample(rng);
        s += density.log_ratio(eps, shift)?;
        path.event_times.push(t);
        path.cum_sums.push(s);
        if s > path.cum_sums[path.argmax] {
            path.argmax = path.cum_sums.len() - 1;
        }
    }
    Ok(path)
}

/// Both sides of `ln Z` together with the parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedPath {
    pub plus: SidePath,
    pub minus: SidePath,
    pub gamma: f64,
    pub density_name: String,
    /// Fisher information of the density (1 unless set).
    pub fisher_info: f64,
    /// Product of all time rescalings applied so far (1 for a raw path).
    pub time_scale: f64,
}

impl TwoSidedPath {
    pub fn new(
        plus: SidePath,
        minus: SidePath,
        gamma: f64,
        density_name: impl Into<String>,
    ) -> Self {
        Self {
            plus,
            minus,
            gamma,
            density_name: density_name.into(),
            fisher_info: 1.0,
            time_scale: 1.0,
        }
    }

    pub fn with_fisher_info(mut self, fisher_info: f64) -> Self {
        self.fisher_info = fisher_info;
        self
    }

    /// `I gamma^2` expressed in the current time units: the rate at which
    /// `ln Z` drifts down per unit time, to leading order in `gamma`.
    pub fn information_rate(&self) -> f64 {
        self.fisher_info * self.gamma * self.gamma / self.time_scale
    }

    pub fn side(&self, side: Side) -> &SidePath {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    /// `ln Z(x)`; right-continuous at the plus-side events, mirrored on the left.
    pub fn evaluate_log(&self, x: f64) -> Result<f64> {
        let result = if x >= 0.0 {
            self.plus.value_at(x)
        } else {
            self.minus.value_at(-x)
        };
        result.map_err(|_| Error::OutOfHorizon {
            x,
            lo: -self.minus.horizon(),
            hi: self.plus.horizon(),
        })
    }

    /// Multiplies every event time by `factor`.
    pub fn rescaled_by(&self, factor: f64) -> TwoSidedPath {
        TwoSidedPath {
            plus: self.plus.rescaled(factor),
            minus: self.minus.rescaled(factor),
            gamma: self.gamma,
            density_name: self.density_name.clone(),
            fisher_info: self.fisher_info,
            time_scale: self.time_scale * factor,
        }
    }

    /// The path of `X(y) = Z(y / (I gamma^2))`: times multiplied by `I gamma^2`.
    pub fn rescale_time(&self, fisher_info: f64) -> Result<TwoSidedPath> {
        if !(fisher_info.is_finite() && fisher_info > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Fisher information must be positive, got {fisher_info}"
            )));
        }
        check_gamma(self.gamma)?;
        Ok(self.rescaled_by(fisher_info * self.gamma * self.gamma))
    }

    /// Debug dump, one row per event: `side,index,event_time,cum_sum`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["side", "index", "event_time", "cum_sum"])?;
        for side in [Side::Minus, Side::Plus] {
            let p = self.side(side);
            for (i, (x, s)) in p.event_times.iter().zip(&p.cum_sums).enumerate() {
                w.write_record([
                    side.to_string(),
                    i.to_string(),
                    x.to_string(),
                    s.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples the plus side, then the minus side, from the same stream.
pub fn sample_two_sided<R: Rng>(
    density: &JumpDensity,
    gamma: f64,
    policy: &TruncationPolicy,
    rng: &mut R,
) -> Result<TwoSidedPath> {
    let plus = sample_side_path(density, gamma, Side::Plus, policy, rng)?;
    let minus = sample_side_path(density, gamma, Side::Minus, policy, rng)?;
    Ok(TwoSidedPath::new(plus, minus, gamma, density.name())
        .with_fisher_info(density.fisher_information()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::make_stream;

    fn toy_side(times: &[f64], sums: &[f64]) -> SidePath {
        SidePath::from_parts(times.to_vec(), sums.to_vec()).unwrap()
    }

    #[test]
    fn from_parts_validates() {
        assert!(SidePath::from_parts(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(SidePath::from_parts(vec![0.5, 1.0], vec![0.0, 1.0]).is_err());
        assert!(SidePath::from_parts(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]).is_err());
        let p = toy_side(&[0.0, 1.0, 2.5], &[0.0, 0.7, -0.1]);
        assert_eq!(p.argmax(), 1);
        assert!((p.trunc_gap() - 0.8).abs() < 1e-15);
        assert_eq!(p.truncated_at(), 2);
    }

    #[test]
    fn argmax_ties_go_to_the_smallest_index() {
        let p = toy_side(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 1.0, -5.0]);
        assert_eq!(p.argmax(), 1);
        let q = toy_side(&[0.0, 1.0, 2.0], &[0.0, 0.0, -3.0]);
        assert_eq!(q.argmax(), 0);
    }

    #[test]
    fn evaluation_conventions() {
        let path = TwoSidedPath::new(
            toy_side(&[0.0, 1.0, 2.0], &[0.0, 0.5, -31.0]),
            toy_side(&[0.0, 0.5, 3.0], &[0.0, -0.25, -40.0]),
            1.0,
            "gaussian",
        );
        assert_eq!(path.evaluate_log(0.0).unwrap(), 0.0);
        assert_eq!(path.evaluate_log(0.999).unwrap(), 0.0);
        assert_eq!(path.evaluate_log(1.0).unwrap(), 0.5);
        assert_eq!(path.evaluate_log(2.0).unwrap(), -31.0);
        assert_eq!(path.evaluate_log(-0.4).unwrap(), 0.0);
        assert_eq!(path.evaluate_log(-0.5).unwrap(), -0.25);
        assert_eq!(path.evaluate_log(-3.0).unwrap(), -40.0);
        assert!(matches!(
            path.evaluate_log(2.01),
            Err(Error::OutOfHorizon { hi, .. }) if hi == 2.0
        ));
        assert!(path.evaluate_log(-3.5).is_err());
    }

    #[test]
    fn immediate_stop_when_first_jump_clears_the_gap() {
        // At gamma = 8 a Gaussian jump is N(-32, 64); find a stream whose first
        // jump already sits below -gap.
        let policy = TruncationPolicy::default();
        let d = JumpDensity::Gaussian;
        let found = (0..100).find_map(|i| {
            let mut rng = make_stream(11, i);
            let p = sample_side_path(&d, 8.0, Side::Plus, &policy, &mut rng).unwrap();
            (p.cum_sums()[1] <= -policy.gap).then_some(p)
        });
        let p = found.expect("some stream stops at once");
        assert_eq!(p.truncated_at(), 1);
        assert_eq!(p.event_times().len(), 2);
        assert_eq!(p.argmax(), 0);
    }

    #[test]
    fn stopping_rule_holds_on_sampled_paths() {
        let policy = TruncationPolicy::new(5.0, 1_000_000).unwrap();
        for (i, d) in [JumpDensity::Gaussian, JumpDensity::Logistic]
            .iter()
            .enumerate()
        {
            for rep in 0..50 {
                let mut rng = make_stream(3, rep + 100 * i as u64);
                let p = sample_side_path(d, 0.7, Side::Minus, &policy, &mut rng).unwrap();
                let sums = p.cum_sums();
                let n = p.truncated_at();
                assert!(p.trunc_gap() >= policy.gap);
                // no earlier index satisfied the rule
                let mut running = 0.0_f64;
                for &s in &sums[1..n] {
                    running = running.max(s);
                    assert!(s > running - policy.gap);
                }
                assert!(p.event_times().windows(2).all(|w| w[1] > w[0]));
            }
        }
    }

    #[test]
    fn cap_is_reported_as_a_truncation_error() {
        let policy = TruncationPolicy::new(30.0, 3).unwrap();
        let mut rng = make_stream(0, 0);
        let err = sample_side_path(&JumpDensity::Gaussian, 0.1, Side::Plus, &policy, &mut rng)
            .unwrap_err();
        assert!(matches!(
            err,
            Error::Truncation {
                side: Side::Plus,
                max_events: 3
            }
        ));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let mut rng = make_stream(0, 0);
        let d = JumpDensity::Gaussian;
        let p = TruncationPolicy::default();
        assert!(sample_side_path(&d, 0.0, Side::Plus, &p, &mut rng).is_err());
        assert!(sample_side_path(&d, f64::NAN, Side::Plus, &p, &mut rng).is_err());
        assert!(TruncationPolicy::new(0.0, 10).is_err());
        assert!(TruncationPolicy::new(1.0, 0).is_err());
    }

    #[test]
    fn rescaling() {
        let mut rng = make_stream(5, 5);
        let path = sample_two_sided(
            &JumpDensity::Gaussian,
            1.0,
            &TruncationPolicy::default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(path.rescale_time(1.0).unwrap(), {
            let mut same = path.clone();
            same.time_scale = 1.0;
            same
        });
        let toy = TwoSidedPath::new(
            toy_side(&[0.0, 3.0, 4.0], &[0.0, -1.0, -40.0]),
            toy_side(&[0.0, 1.0], &[0.0, -40.0]),
            0.5,
            "gaussian",
        );
        let scaled = toy.rescale_time(1.0).unwrap();
        assert_eq!(scaled.plus.event_times(), &[0.0, 0.75, 1.0]);
        assert_eq!(scaled.plus.cum_sums(), toy.plus.cum_sums());
        assert_eq!(scaled.time_scale, 0.25);
        for y in [0.1, 0.74, 0.75, 0.9, -0.2, -0.25] {
            assert_eq!(
                scaled.evaluate_log(y).unwrap(),
                toy.evaluate_log(y / 0.25).unwrap()
            );
        }
    }

    #[test]
    fn horizon_sampler_covers_the_horizon() {
        let mut rng = make_stream(9, 1);
        let p = sample_side_to_horizon(
            &JumpDensity::Logistic,
            0.3,
            Side::Plus,
            50.0,
            10_000,
            &mut rng,
        )
        .unwrap();
        assert!(p.horizon() >= 50.0);
        assert!(p.event_times()[p.truncated_at() - 1] < 50.0);
        assert!(p.value_at(50.0).is_ok());
        let mut rng = make_stream(9, 1);
        let empty =
            sample_side_to_horizon(&JumpDensity::Gaussian, 0.3, Side::Plus, 0.0, 10, &mut rng)
                .unwrap();
        assert_eq!(empty.truncated_at(), 0);
        assert_eq!(empty.value_at(0.0).unwrap(), 0.0);
    }

    #[test]
    fn sup_beyond_scans_the_tail() {
        let p = toy_side(&[0.0, 1.0, 2.0, 3.0], &[0.0, 2.0, -1.0, -0.5]);
        assert_eq!(p.sup_beyond(0.0), 2.0);
        assert_eq!(p.sup_beyond(1.5), 2.0);
        assert_eq!(p.sup_beyond(2.0), -0.5);
        assert_eq!(p.sup_beyond(10.0), -0.5);
    }

    #[test]
    fn csv_dump_layout() {
        let path = TwoSidedPath::new(
            toy_side(&[0.0, 2.0], &[0.0, -40.0]),
            toy_side(&[0.0, 1.0], &[0.0, -40.0]),
            1.0,
            "gaussian",
        );
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "side,index,event_time,cum_sum\nminus,0,0,0\nminus,1,1,-40\nplus,0,0,0\nplus,1,2,-40\n"
        );
    }
}
