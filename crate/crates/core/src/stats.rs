//! Summary statistics and goodness-of-fit tests used by the checks.

use crate::{Error, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Sample mean and its standard error (`sd / sqrt(n)`, `n - 1` denominator).
pub fn mean_and_se(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples for a standard error, got {n}"
        )));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let se = (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt();
    Ok((mean, se))
}

/// Streaming counterpart of [`mean_and_se`] (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn se(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        (self.m2 / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-18 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// p-value for a KS distance `d` with effective sample size `n_eff`
/// (Stephens' small-sample correction).
pub fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let root = n_eff.sqrt();
    kolmogorov_survival((root + 0.12 + 0.11 / root) * d)
}

/// One-sample KS test of `samples` against a continuous `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("KS test on an empty sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult {
        statistic: d,
        p_value: ks_p_value(d, n),
    })
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("KS test on an empty sample".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsResult {
        statistic: d,
        p_value: ks_p_value(d, na * nb / (na + nb)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of observed counts against expected counts.
/// `fitted` parameters reduce the degrees of freedom.
pub fn chi_square(observed: &[u64], expected: &[f64], fitted: usize) -> Result<ChiSquareResult> {
    if observed.len() != expected.len() || observed.len() < fitted + 2 {
        return Err(Error::InvalidArgument(format!(
            "chi-square needs matching bins and enough of them ({} observed, {} expected)",
            observed.len(),
            expected.len()
        )));
    }
    if expected
        .iter()
        .any(|&e| e.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::InvalidArgument(
            "expected counts must be positive".into(),
        ));
    }
    let statistic: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = observed.len() - 1 - fitted;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

pub fn pearson_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidArgument(
            "correlation needs two equal samples".into(),
        ));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    Ok(sab / (saa * sbb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_se_small_cases() {
        let (m, se) = mean_and_se(&[1.0, 3.0]).unwrap();
        assert_eq!(m, 2.0);
        assert!((se - 1.0).abs() < 1e-15);
        assert!(mean_and_se(&[1.0]).is_err());
        let mut acc = Accumulator::default();
        for v in [1.0, 3.0] {
            acc.push(v);
        }
        assert_eq!(acc.mean(), 2.0);
        assert!((acc.se() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_reference_points() {
        // P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn ks_one_sample_on_a_uniform_grid() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let r = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((r.statistic - 0.5 / n as f64).abs() < 1e-12);
        assert!(r.p_value > 0.99);
        let shifted: Vec<f64> = xs.iter().map(|x| x * 0.8).collect();
        assert!(
            ks_one_sample(&shifted, |x| x.clamp(0.0, 1.0))
                .unwrap()
                .p_value
                < 1e-10
        );
    }

    #[test]
    fn ks_two_sample_identical_and_disjoint() {
        let a: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        let b: Vec<f64> = (1000..1500).map(|i| i as f64).collect();
        let r = ks_two_sample(&a, &b).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value < 1e-12);
    }

    #[test]
    fn chi_square_perfect_fit() {
        let r = chi_square(&[10, 20, 30], &[10.0, 20.0, 30.0], 0).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 2);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert!(chi_square(&[1], &[1.0], 0).is_err());
    }

    #[test]
    fn correlation_extremes() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 4.0, 6.0, 8.0];
        assert!((pearson_correlation(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let c = [8.0, 6.0, 4.0, 2.0];
        assert!((pearson_correlation(&a, &c).unwrap() + 1.0).abs() < 1e-15);
    }
}
