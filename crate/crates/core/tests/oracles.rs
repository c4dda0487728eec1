//! Library output checked against independently computed values.

mod common;

use common::{
    abs_first_moment, builtin_densities, mixed_paths, xi_by_enumeration, zeta_by_quadrature,
};
use cplr::densities::LOGISTIC_SCALE;
use cplr::functionals::{estimator_triple, zeta};
use cplr::montecarlo::{estimate_second_moment, replicate, run_replication, RunSettings};
use cplr::path::{sample_side_path, sample_side_to_horizon, sample_two_sided};
use cplr::stats::{chi_square, pearson_correlation, Accumulator};
use cplr::{make_stream, JumpDensity, Side, SweepConfig, TruncationPolicy, TwoSidedPath};
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use statrs::distribution::{Discrete, Poisson};

fn logistic_ln_pdf_direct(x: f64) -> f64 {
    let s = 3f64.sqrt() / std::f64::consts::PI;
    let e = (-x / s).exp();
    (e / (s * (1.0 + e) * (1.0 + e))).ln()
}

#[test]
fn log_ratio_examples() {
    let g = JumpDensity::Gaussian;
    assert_eq!(g.log_ratio(0.0, 1.0).unwrap(), -0.5);
    assert_eq!(g.log_ratio(2.0, 0.0).unwrap(), 0.0);
    let expected = logistic_ln_pdf_direct(1.0) - logistic_ln_pdf_direct(0.3);
    let got = JumpDensity::Logistic.log_ratio(0.3, 0.7).unwrap();
    assert!((got - expected).abs() < 1e-14, "{got} vs {expected}");
}

#[test]
fn fisher_information_values() {
    assert_eq!(JumpDensity::Gaussian.fisher_information(), 1.0);
    // score of the logistic with scale s is tanh(x / 2s) / s, so I = 1 / (3 s^2)
    let s = 3f64.sqrt() / std::f64::consts::PI;
    assert!((LOGISTIC_SCALE - s).abs() < 1e-16);
    let closed = 1.0 / (3.0 * s * s);
    assert!((JumpDensity::Logistic.fisher_information() - closed).abs() < 1e-14);
    let quad = cplr::densities::fisher_information_by_quadrature(logistic_ln_pdf_direct).unwrap();
    assert!((quad / closed - 1.0).abs() < 1e-8, "{quad}");
}

/// The sampling recipe spelled out against the raw generator.
fn reference_side(
    density: &JumpDensity,
    gamma: f64,
    side: Side,
    gap: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, Vec<f64>) {
    let shift = if side == Side::Plus { gamma } else { -gamma };
    let (mut times, mut sums) = (vec![0.0], vec![0.0]);
    let mut top = 0.0_f64;
    loop {
        let t = times.last().unwrap() + rng.sample::<f64, _>(Exp1);
        let eps = match density {
            JumpDensity::Gaussian => rng.sample::<f64, _>(StandardNormal),
            _ => {
                let u: f64 = rng.sample(Open01);
                LOGISTIC_SCALE * (u / (1.0 - u)).ln()
            }
        };
        let jump = match density {
            JumpDensity::Gaussian => -shift * eps - 0.5 * shift * shift,
            _ => logistic_ln_pdf_direct(eps + shift) - logistic_ln_pdf_direct(eps),
        };
        let s = sums.last().unwrap() + jump;
        times.push(t);
        sums.push(s);
        top = top.max(s);
        if s <= top - gap {
            return (times, sums);
        }
    }
}

#[test]
fn sampling_matches_the_reference_trace() {
    let policy = TruncationPolicy::new(12.0, 1_000_000).unwrap();
    for density in builtin_densities() {
        for (i, gamma) in [0.3, 1.0, 2.5].into_iter().enumerate() {
            let mut raw = ChaCha8Rng::seed_from_u64(7);
            raw.set_stream(i as u64);
            let plus = reference_side(&density, gamma, Side::Plus, 12.0, &mut raw);
            let minus = reference_side(&density, gamma, Side::Minus, 12.0, &mut raw);
            let path =
                sample_two_sided(&density, gamma, &policy, &mut make_stream(7, i as u64)).unwrap();
            assert_eq!(path.plus.event_times(), &plus.0[..]);
            assert_eq!(path.minus.event_times(), &minus.0[..]);
            for (a, b) in path
                .plus
                .cum_sums()
                .iter()
                .zip(&plus.1)
                .chain(path.minus.cum_sums().iter().zip(&minus.1))
            {
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
            }
        }
    }
}

#[test]
fn evaluate_log_matches_linear_search() {
    for path in mixed_paths(30, 3) {
        let brute = |x: f64| {
            let (times, sums) = if x >= 0.0 {
                (path.plus.event_times(), path.plus.cum_sums())
            } else {
                (path.minus.event_times(), path.minus.cum_sums())
            };
            let t = x.abs();
            let i = (0..times.len())
                .rfind(|&i| {
                    if x >= 0.0 {
                        times[i] <= t
                    } else {
                        times[i] < t
                    }
                })
                .unwrap_or(0);
            sums[i]
        };
        let lo = -path.minus.horizon();
        let hi = path.plus.horizon();
        for k in 0..400 {
            let x = lo + (hi - lo) * (k as f64 + 0.37) / 400.0;
            assert_eq!(path.evaluate_log(x).unwrap(), brute(x), "x = {x}");
        }
        for &t in &path.plus.event_times()[..path.plus.truncated_at()] {
            assert_eq!(path.evaluate_log(t).unwrap(), brute(t));
        }
        assert!(path.evaluate_log(hi * 1.01 + 1.0).is_err());
    }
}

#[test]
fn zeta_and_xi_against_oracles() {
    for path in mixed_paths(300, 11) {
        let t = estimator_triple(&path).unwrap();
        let oracle = zeta_by_quadrature(&path);
        let scale = abs_first_moment(&path);
        assert!(
            (t.zeta - oracle).abs() <= 1e-8 * scale,
            "zeta {} vs {oracle}",
            t.zeta
        );
        assert_eq!((t.xi_minus, t.xi_plus), xi_by_enumeration(&path));
        assert!(t.zeta_tail_bound >= 0.0);
    }
}

#[test]
fn grid_argmax_lies_in_the_argmax_interval() {
    for path in mixed_paths(60, 5) {
        let t = estimator_triple(&path).unwrap();
        let (lo, hi) = (-path.minus.horizon(), path.plus.horizon());
        let grid: Vec<f64> = (0..20_000)
            .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / 20_000.0)
            .collect();
        let best = grid
            .iter()
            .map(|&x| (x, path.evaluate_log(x).unwrap()))
            .fold(
                (0.0, f64::NEG_INFINITY),
                |a, v| if v.1 > a.1 { v } else { a },
            );
        if best.1 == path.plus.max().max(path.minus.max()) {
            assert!(t.xi_minus <= best.0 && best.0 <= t.xi_plus);
        }
    }
}

/// One side per stream, so that a larger gap only extends each side.
fn two_sided_with_gap(density: &JumpDensity, gamma: f64, gap: f64, index: u64) -> TwoSidedPath {
    let policy = TruncationPolicy::new(gap, 10_000_000).unwrap();
    let plus = sample_side_path(
        density,
        gamma,
        Side::Plus,
        &policy,
        &mut make_stream(21, 2 * index),
    )
    .unwrap();
    let minus = sample_side_path(
        density,
        gamma,
        Side::Minus,
        &policy,
        &mut make_stream(21, 2 * index + 1),
    )
    .unwrap();
    TwoSidedPath::new(plus, minus, gamma, density.name())
}

#[test]
fn tail_bound_covers_the_truncation_error() {
    for density in builtin_densities() {
        for gamma in [0.25, 1.0, 4.0] {
            for index in 0..200 {
                let short = two_sided_with_gap(&density, gamma, 30.0, index);
                let long = two_sided_with_gap(&density, gamma, 50.0, index);
                assert_eq!(
                    short.plus.event_times(),
                    &long.plus.event_times()[..short.plus.event_times().len()]
                );
                let (z_short, bound) = zeta(&short).unwrap();
                let (z_long, _) = zeta(&long).unwrap();
                let slack = 1e-10 * abs_first_moment(&long);
                assert!(
                    (z_short - z_long).abs() <= bound + slack,
                    "gamma {gamma}: {z_short} vs {z_long}, bound {bound}"
                );
            }
        }
    }
}

#[test]
fn event_counts_are_poisson() {
    let horizon = 5.0;
    let settings = RunSettings::new(100_000, 2024).with_workers(1);
    let counts = replicate(&settings, |_, rng| {
        let side =
            sample_side_to_horizon(&JumpDensity::Gaussian, 1.0, Side::Plus, horizon, 1_000, rng)
                .unwrap();
        side.event_times()[1..]
            .iter()
            .filter(|&&t| t <= horizon)
            .count()
    })
    .unwrap();
    let top = 12;
    let mut observed = vec![0u64; top + 1];
    for c in counts {
        observed[c.min(top)] += 1;
    }
    let law = Poisson::new(horizon).unwrap();
    let mut probs: Vec<f64> = (0..top as u64).map(|k| law.pmf(k)).collect();
    probs.push(1.0 - probs.iter().sum::<f64>());
    let expected: Vec<f64> = probs.iter().map(|p| p * 100_000.0).collect();
    let result = chi_square(&observed, &expected, 0).unwrap();
    assert!(result.p_value > 1e-4, "{result:?}");
}

#[test]
fn change_of_measure_and_negative_drift() {
    for density in builtin_densities() {
        for (k, gamma) in [0.25, 1.0, 4.0].into_iter().enumerate() {
            let mut rng = make_stream(99, k as u64);
            let (mut ratio, mut log) = (Accumulator::default(), Accumulator::default());
            for _ in 0..1_000_000 {
                let eps = density.sample(&mut rng);
                let l = density.log_ratio(eps, gamma).unwrap();
                ratio.push(l.exp());
                log.push(l);
            }
            assert!(
                (ratio.mean() - 1.0).abs() <= 4.0 * ratio.se(),
                "{} gamma {gamma}: {}",
                density.name(),
                ratio.mean()
            );
            assert!(
                log.mean() + 4.0 * log.se() < 0.0,
                "{} gamma {gamma}",
                density.name()
            );
        }
    }
}

#[test]
fn innovation_moments() {
    for (k, density) in builtin_densities().into_iter().enumerate() {
        let mut rng = make_stream(5, k as u64);
        let draws: Vec<f64> = (0..1_000_000).map(|_| density.sample(&mut rng)).collect();
        let n = draws.len() as f64;
        let (mut m1, mut m2) = (Accumulator::default(), Accumulator::default());
        for &e in &draws {
            m1.push(e);
            m2.push(e * e);
        }
        assert!(m1.mean().abs() <= 4.0 * m1.se());
        assert!((m2.mean() - 1.0).abs() <= 4.0 * m2.se());
        if matches!(density, JumpDensity::Logistic) {
            // kurtosis m4 / m2^2 with a delta-method standard error
            let (a, b) = (m2.mean(), draws.iter().map(|e| e.powi(4)).sum::<f64>() / n);
            let kurt = b / (a * a);
            let (ga, gb) = (-2.0 * b / a.powi(3), 1.0 / (a * a));
            let mut var = 0.0;
            for &e in &draws {
                let d = ga * (e * e - a) + gb * (e.powi(4) - b);
                var += d * d;
            }
            let se = (var / (n - 1.0) / n).sqrt();
            assert!((kurt - 4.2).abs() <= 4.0 * se, "kurtosis {kurt} se {se}");
        }
    }
}

#[test]
fn fixed_seed_is_reproducible() {
    let a = JumpDensity::Gaussian.sample(&mut make_stream(1, 0));
    assert_eq!(a, JumpDensity::Gaussian.sample(&mut make_stream(1, 0)));
    let first = |seed| make_stream(seed, 0).random::<u64>();
    assert_ne!(first(0), first(1));
}

#[test]
fn streams_are_uncorrelated() {
    let draw = |index| -> Vec<f64> {
        let mut rng = make_stream(314, index);
        (0..10_000).map(|_| rng.random::<f64>()).collect()
    };
    let base = draw(0);
    for index in [1, 2, 1000, u64::MAX] {
        let r = pearson_correlation(&base, &draw(index)).unwrap();
        assert!(
            r.abs() < 4.0 / (base.len() as f64).sqrt(),
            "index {index}: r = {r}"
        );
    }
}

#[test]
fn second_moment_estimator() {
    assert_eq!(estimate_second_moment(&[1.0, -1.0]).unwrap(), (1.0, 0.0));
    let (m, se) = estimate_second_moment(&[0.0, 2.0]).unwrap();
    assert_eq!(m, 2.0);
    assert!((se - 2.0).abs() < 1e-15);
    assert!(estimate_second_moment(&[1.0]).is_err());
    let mut rng = make_stream(8, 0);
    let draws: Vec<f64> = (0..1_000_000).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let (m, se) = estimate_second_moment(&draws).unwrap();
    assert!((m - 2.0).abs() <= 4.0 * se, "{m} ± {se}");
}

#[test]
fn gaussian_zeta_is_centred() {
    let policy = TruncationPolicy::default();
    let settings = RunSettings::new(1_000_000, 77);
    let zetas: Vec<f64> = replicate(&settings, |_, rng| {
        run_replication(&JumpDensity::Gaussian, 1.0, &policy, rng)
            .unwrap()
            .zeta
    })
    .unwrap();
    let mut acc = Accumulator::default();
    zetas.iter().for_each(|&z| acc.push(z));
    assert!(
        acc.mean().abs() <= 4.0 * acc.se(),
        "{} ± {}",
        acc.mean(),
        acc.se()
    );
}

#[test]
fn replication_is_deterministic_across_layouts() {
    let policy = TruncationPolicy::default();
    let run = |workers| {
        let settings = RunSettings::new(200, 3).with_workers(workers);
        replicate(&settings, |_, rng| {
            run_replication(&JumpDensity::Logistic, 0.7, &policy, rng).unwrap()
        })
        .unwrap()
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn per_side_maximum_obeys_the_exponential_bound() {
    let policy = TruncationPolicy::default();
    let settings = RunSettings::new(50_000, 12);
    let maxima = replicate(&settings, |_, rng| {
        sample_side_path(&JumpDensity::Logistic, 1.0, Side::Plus, &policy, rng)
            .unwrap()
            .max()
    })
    .unwrap();
    let n = maxima.len() as f64;
    for a in [0.5, 1.0, 2.0, 4.0] {
        let p = maxima.iter().filter(|&&m| m > a).count() as f64 / n;
        let se = (p * (1.0 - p) / n).sqrt();
        assert!(p <= (-a).exp() + 4.0 * se, "a = {a}: {p}");
    }
}

#[test]
fn large_gamma_prefers_the_midpoint() {
    let config = SweepConfig {
        gamma_grid: vec![8.0],
        alphas: vec![0.0, 0.25, 0.5],
        reps: 200_000,
        seed: 6,
        density_name: "gaussian".into(),
        trunc: TruncationPolicy::default(),
        workers: 1,
    };
    let rows = cplr::montecarlo::run_sweep(&config).unwrap();
    assert!(rows
        .iter()
        .all(|r| r.b_hat == rows[0].b_hat && r.b_se == rows[0].b_se));
    for w in rows.windows(2) {
        let gap = w[0].m_hat - w[1].m_hat;
        let se = (w[0].m_se.powi(2) + w[1].m_se.powi(2)).sqrt();
        assert!(
            gap > 4.0 * se,
            "alpha {} -> {}: {gap} vs se {se}",
            w[0].alpha,
            w[1].alpha
        );
    }
    for r in &rows {
        assert!((r.e_hat - r.b_hat / r.m_hat).abs() < 1e-15);
        assert_eq!(r.trunc_failures, 0);
    }
}
