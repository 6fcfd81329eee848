use std::f64::consts::PI;

use proptest::prelude::*;
use qlsa_core::quadrature::gl20;
use qlsa_core::sampling::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use TimeDistributionKind::{MeanOptimized, VarianceOptimized};

fn dist(kind: TimeDistributionKind, delta: f64) -> TimeDistribution {
    TimeDistribution::new(kind, delta).unwrap()
}

/// `∫ pdf dt` evaluated in the time domain, with the averaged power-law tail.
fn time_domain_mass(d: &TimeDistribution) -> f64 {
    let cutoff = 30_000.0 / d.delta;
    let body = 2.0 * gl20().integrate_width(0.0, cutoff, PI / d.delta, |t| d.pdf(t));
    let uc = cutoff * d.delta;
    let tail = match d.kind {
        MeanOptimized => {
            let e = 2.0 * BESSEL_ORDER_P;
            2.0 * 2.0 / PI * uc.powf(-e) / e / mean_opt_normalization()
        }
        VarianceOptimized => 2.0 * 2.0 * PI / (3.0 * uc.powi(3)),
    };
    body + tail
}

#[test]
fn var_opt_value_at_origin() {
    assert!((dist(VarianceOptimized, 1.0).pdf(0.0) - 4.0 / PI.powi(3)).abs() < 1e-16);
}

#[test]
fn densities_are_normalized() {
    for kind in TimeDistributionKind::ALL {
        for delta in [1.0, 0.1, 0.01] {
            let m = time_domain_mass(&dist(kind, delta));
            assert!((m - 1.0).abs() < 1e-8, "{kind:?} Δ={delta}: {m}");
        }
    }
}

#[test]
fn normalization_constant_matches_published_digits() {
    let n0 = mean_opt_normalization();
    assert!((n0 - MEAN_OPT_NORMALIZATION).abs() < 5e-8, "{n0}");
}

#[test]
fn mean_optimized_moments_by_quadrature() {
    let q = quadrature_moments(MeanOptimized);
    let p = moments(MeanOptimized);
    let close = |a: f64, b: f64| ((a - b) / b).abs() < 5e-5;
    assert!(close(q.mean_abs_coeff, MEAN_OPT_MEAN_ABS), "{q:?}");
    assert!(close(q.second_moment_coeff, MEAN_OPT_SECOND_MOMENT), "{q:?}");
    assert!(close(q.variance_coeff, MEAN_OPT_VARIANCE), "{q:?}");
    assert!(close(q.mean_abs_coeff, p.mean_abs_coeff));
    assert!(close(q.second_moment_coeff, p.second_moment_coeff));
}

#[test]
fn variance_optimized_moments_by_quadrature() {
    let q = quadrature_moments(VarianceOptimized);
    let close = |a: f64, b: f64| ((a - b) / b).abs() < 5e-5;
    assert!(close(q.mean_abs_coeff, VAR_OPT_MEAN_ABS), "{q:?}");
    assert!(close(q.variance_coeff, VAR_OPT_VARIANCE), "{q:?}");
    assert!((q.second_moment_coeff - PI * PI).abs() < 1e-6, "{q:?}");
    assert!((q.normalization - 4.0 * PI).abs() < 1e-8);
    // The published variance equals π² minus the rounded mean squared.
    assert!((PI * PI - VAR_OPT_MEAN_ABS * VAR_OPT_MEAN_ABS - VAR_OPT_VARIANCE).abs() < 1e-5);
}

#[test]
fn moment_table_scaling() {
    let m = dist(MeanOptimized, 0.1).moments();
    assert!((m.mean_abs(0.1) - 23.2132).abs() < 1e-9);
    assert!((m.variance(0.1) - 936.238).abs() < 1e-9);
    assert!((m.second_moment_coeff - m.variance_coeff - m.mean_abs_coeff.powi(2)).abs() < 1e-12);
}

fn sample_stats(d: &TimeDistribution, n: usize, seed: u64) -> (f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s1, mut s2, mut neg) = (0.0, 0.0, 0usize);
    for _ in 0..n {
        let t = d.sample(&mut rng);
        if t < 0.0 {
            neg += 1;
        }
        s1 += t.abs();
        s2 += t * t;
    }
    let m = s1 / n as f64;
    (m, s2 / n as f64 - m * m, neg as f64 / n as f64)
}

#[test]
fn sample_mean_unit_gap() {
    let (m, _, neg) = sample_stats(&dist(MeanOptimized, 1.0), 1_000_000, 101);
    assert!((m / MEAN_OPT_MEAN_ABS - 1.0).abs() < 0.01, "{m}");
    assert!((neg - 0.5).abs() < 0.003, "{neg}");
}

#[test]
fn sample_mean_scaled_gap() {
    let (m, _, _) = sample_stats(&dist(MeanOptimized, 0.1), 1_000_000, 202);
    assert!((m / 23.2132 - 1.0).abs() < 0.01, "{m}");
}

#[test]
fn variance_optimized_sample_moments() {
    let (m, v, neg) = sample_stats(&dist(VarianceOptimized, 0.5), 1_000_000, 303);
    assert!((m * 0.5 / VAR_OPT_MEAN_ABS - 1.0).abs() < 0.01, "{m}");
    assert!((v * 0.25 / VAR_OPT_VARIANCE - 1.0).abs() < 0.03, "{v}");
    assert!((neg - 0.5).abs() < 0.003);
}

#[test]
fn truncated_second_moment_matches_quadrature() {
    // Heavy-tail safe check of the sampler: moments restricted to |t| < c.
    let d = dist(MeanOptimized, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let n = 1_000_000;
    for cut in [5.0, 20.0, 50.0, 200.0] {
        let q = 2.0 * gl20().integrate_width(0.0, cut, 0.5, |u| u * u * unit_pdf(MeanOptimized, u));
        let mass = 1.0 - unit_abs_cdf(MeanOptimized, cut);
        let (mut s2, mut s4) = (0.0, 0.0);
        let mut over = 0usize;
        for _ in 0..n {
            let t = d.sample(&mut rng).abs();
            if t < cut {
                s2 += t * t;
                s4 += t.powi(4);
            } else {
                over += 1;
            }
        }
        let m2 = s2 / n as f64;
        let se2 = ((s4 / n as f64 - m2 * m2) / n as f64).sqrt();
        assert!((m2 - q).abs() < 4.0 * se2, "cut {cut}: {m2} vs {q} (se {se2})");
        let se = (mass / n as f64).sqrt();
        assert!((over as f64 / n as f64 - mass).abs() < 5.0 * se + 1e-7, "cut {cut}");
    }
}

fn ks_statistic(d: &TimeDistribution, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng).abs()).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut worst = 0.0_f64;
    for i in 1..400 {
        let x = xs[i * n / 400];
        let emp_lo = xs.partition_point(|&v| v < x) as f64 / n as f64;
        let emp_hi = xs.partition_point(|&v| v <= x) as f64 / n as f64;
        let f = d.abs_cdf(x);
        worst = worst.max((emp_lo - f).abs()).max((emp_hi - f).abs());
    }
    worst
}

#[test]
fn kolmogorov_smirnov_agreement() {
    for kind in TimeDistributionKind::ALL {
        let ks = ks_statistic(&dist(kind, 0.3), 100_000, 505);
        assert!(ks <= 0.01, "{kind:?}: {ks}");
    }
}

#[test]
fn characteristic_function_examples() {
    for kind in TimeDistributionKind::ALL {
        for delta in [1.0, 0.1] {
            let d = dist(kind, delta);
            assert!((d.characteristic_fn(0.0) - 1.0).abs() < 1e-8);
            let half = d.characteristic_fn(0.5 * delta);
            assert!(half > 0.0 && half < 1.0);
            assert!(d.characteristic_fn(1.05 * delta).abs() <= 1e-3);
        }
    }
}

#[test]
fn variance_optimized_characteristic_closed_form() {
    // The density is the squared transform of a cosine window, so χ is the
    // autocorrelation (1 − |w|) cos(π w) + sin(π|w|)/π on |w| ≤ 1.
    let d = dist(VarianceOptimized, 1.0);
    for i in 0..=20 {
        let w: f64 = i as f64 / 20.0;
        let exact = (1.0 - w) * (PI * w).cos() + (PI * w).sin() / PI;
        assert!((d.characteristic_fn(w) - exact).abs() < 1e-7, "w={w}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pdf_even(t in -500.0f64..500.0, delta in 0.01f64..=1.0) {
        for kind in TimeDistributionKind::ALL {
            let d = dist(kind, delta);
            prop_assert_eq!(d.pdf(t), d.pdf(-t));
        }
    }

    #[test]
    fn pdf_scale_covariance(t in -300.0f64..300.0, delta in 0.01f64..=1.0) {
        for kind in TimeDistributionKind::ALL {
            let a = dist(kind, delta).pdf(t);
            let b = delta * dist(kind, 1.0).pdf(delta * t);
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn band_limit(x in 1.05f64..10.0, use_small in any::<bool>()) {
        let delta = if use_small { 0.1 } else { 1.0 };
        for kind in TimeDistributionKind::ALL {
            let v = dist(kind, delta).characteristic_fn(x * delta);
            prop_assert!(v.abs() <= 1e-3, "{:?} {} {}", kind, x, v);
        }
    }
}
