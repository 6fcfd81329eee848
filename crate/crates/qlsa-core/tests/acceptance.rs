//! End-to-end acceptance checks, one line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex;
use qlsa_core::cost_model::*;
use qlsa_core::dense_sim::*;
use qlsa_core::linalg::*;
use qlsa_core::polyapprox::*;
use qlsa_core::sampling::{TimeDistribution, TimeDistributionKind};
use qlsa_core::schedule::{gap_lower_bound, num_steps_analytic, num_steps_exact, ProblemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn golden_total() -> Outcome {
    let b = total_query_bound(&ProblemParams::new(1e3, 1e-10, 1.0, 0.61).unwrap(), 1, 4).unwrap();
    let rel = b.q_expected / 750_378.0 - 1.0;
    outcome(rel.abs() <= 0.005, format!("Q = {:.0}, rel {rel:+.4}", b.q_expected))
}

fn improvement_band() -> Outcome {
    let ratios: Vec<f64> = [1e2, 1e3, 1e4, 1e5, 1e6]
        .iter()
        .map(|&k| compare_state_of_art(k, 1e-10).unwrap().ratio_numeric)
        .collect();
    let pass = ratios.iter().all(|r| (4.5..=9.2).contains(r));
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
    outcome(pass, format!("ratios [{}]", shown.join(", ")))
}

fn crossover() -> Outcome {
    match crossover_kappa(1e-10, 1e3, 1e40).unwrap() {
        Some(k) => outcome((1e30..=1e34).contains(&k), format!("κ* = {k:.3e}")),
        None => outcome(false, "no crossing in [1e3, 1e40]"),
    }
}

fn step_count_tightness() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [1e3, 1e4, 1e5, 1e6] {
        let a = num_steps_analytic(k).unwrap();
        let e = num_steps_exact(k, 0.61).unwrap();
        let r = a as f64 / e as f64;
        pass &= (1.0..=1.005).contains(&r);
        parts.push(format!("{a}/{e}={r:.4}"));
    }
    outcome(pass, parts.join(", "))
}

fn distribution_moments() -> Outcome {
    let n = 1_000_000;
    let delta = 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let stats = |kind, rng: &mut ChaCha8Rng| {
        let d = TimeDistribution::new(kind, delta).unwrap();
        let xs: Vec<f64> = (0..n).map(|_| d.sample(rng).abs()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean, var)
    };
    let (m1, v1) = stats(TimeDistributionKind::MeanOptimized, &mut rng);
    let (_, v2) = stats(TimeDistributionKind::VarianceOptimized, &mut rng);
    let r_mean = m1 * delta / 2.32132 - 1.0;
    let r_var = v1 * delta * delta / 9.36238 - 1.0;
    let r_var2 = v2 * delta * delta / 3.96179 - 1.0;
    let pass = r_mean.abs() <= 0.01 && r_var.abs() <= 0.03 && r_var2.abs() <= 0.03;
    outcome(
        pass,
        format!("⟨|t|⟩ {m1:.4} ({r_mean:+.4}), Var {v1:.4} ({r_var:+.4}), Var(var-opt) {v2:.4} ({r_var2:+.4})"),
    )
}

fn band_limit() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for kind in TimeDistributionKind::ALL {
        for delta in [1.0, 0.1, 0.01] {
            let d = TimeDistribution::new(kind, delta).unwrap();
            let grid = (0..=400).map(|i| 1.05 + (10.0 - 1.05) * i as f64 / 400.0);
            let random: Vec<f64> = (0..200).map(|_| rng.random_range(1.05..=10.0)).collect();
            for w in grid.chain(random) {
                worst = worst.max(d.characteristic_fn(w * delta).abs());
            }
        }
    }
    outcome(worst <= 1e-3, format!("max |φ(ω)| = {worst:.2e}"))
}

fn jacobi_anger_certification() -> Outcome {
    let n = 10_000;
    let mut cert = true;
    let mut parts = Vec::new();
    for (tau, delta) in [(1.0, 1e-3), (10.0, 1e-6), (100.0, 1e-10)] {
        let r = truncation_order(tau, delta).unwrap();
        let ja = JacobiAnger::new(tau, r).unwrap();
        let err = (0..n)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                (ja.eval(x) - Complex::from_polar(1.0, -tau * x)).norm()
            })
            .fold(0.0, f64::max);
        cert &= err <= delta;
        parts.push(format!("τ={tau} r={r} err={err:.1e}"));
    }
    let mut worst = 0i64;
    let mut at = (0.0, 0.0);
    for iy in 0..=110 {
        let y = 0.5 + 5.5 * iy as f64 / 110.0;
        for ix in 0..=110 {
            let x = -12.0 + 11.0 * ix as f64 / 110.0;
            let (tau, delta) = (10f64.powf(y), 10f64.powf(x));
            let gap = truncation_order_bound(tau, delta).unwrap() as i64 - truncation_order(tau, delta).unwrap() as i64;
            if gap > worst {
                worst = gap;
                at = (y, x);
            }
        }
    }
    parts.push(format!("max order gap {worst} at y={:.2}, x={:.2}", at.0, at.1));
    outcome(cert && worst <= 2, parts.join("; "))
}

fn oaa_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for delta in [1e-4, 1e-8] {
        for _ in 0..50 {
            let n = rng.random_range(8..=16);
            let tau = rng.random_range(0.5..20.0);
            let h = random_hermitian(n, 1.0, &mut rng);
            let m = oaa_operator(&h, tau, delta).unwrap();
            let exact = HermitianEigen::new(&h).apply(|x| Complex::from_polar(1.0, -tau * x));
            worst = worst.max(spectral_norm(&(m - exact)) / (2.0 * delta));
        }
    }
    outcome(worst <= 1.0, format!("max ‖M − e^(−iτH)‖/(2δ) = {worst:.3}"))
}

fn filter_certification() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (cd, eps) in [(0.1, 1e-3), (0.01, 1e-8)] {
        let spec = FilterSpec::new(cd, eps).unwrap();
        let n = 100_000;
        let worst = (0..=n)
            .map(|i| filter_value(cd + (1.0 - cd) * i as f64 / n as f64, &spec).abs())
            .fold(0.0, f64::max);
        let deg_ok = spec.degree() == filter_query_count(cd, eps).next_multiple_of(2);
        pass &= worst <= eps && filter_value(0.0, &spec) == 1.0 && deg_ok;
        parts.push(format!("Δ={cd} 2l={} max|R|={worst:.2e}", spec.degree()));
    }
    outcome(pass, parts.join("; "))
}

fn end_to_end() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut pass = true;
    let mut parts = Vec::new();
    for i in 0..3 {
        let sys = random_system(4, 10.0, &mut rng).unwrap();
        let cfg = SimulationConfig {
            eps: 0.1,
            gamma: 0.61,
            trials: 2000,
            seed: 1000 + i,
            ..SimulationConfig::default()
        };
        let r = simulate(&sys, &cfg).unwrap();
        let f = r.fidelity_pre_filter;
        let a = r.success_rate;
        let d = r.trace_distance_post;
        pass &= r.embedded_dim == 8;
        pass &= f.mean >= 0.39 - 3.0 * f.stderr;
        pass &= a.mean >= 0.39 - 0.0201 - 3.0 * a.stderr;
        pass &= d.mean <= 0.1;
        parts.push(format!("F={:.3}±{:.3} acc={:.3} dist={:.4}", f.mean, f.stderr, a.mean, d.mean));
    }
    outcome(pass, parts.join("; "))
}

fn structural_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pass = true;
    let (mut coupling, mut norm_excess, mut gap_slack) = (0.0f64, f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..20 {
        let m = rng.random_range(1..=4);
        let kappa = rng.random_range(2.0..20.0);
        let emb = hermitian_embed(&random_system(m, kappa, &mut rng).unwrap()).unwrap();
        let ybar = ybar_state(&emb);
        for j in 0..20 {
            let s = j as f64 / 19.0;
            let h = build_hamiltonian(&emb, s);
            match nullspace_and_gap(&h, None) {
                Ok(ns) => gap_slack = gap_slack.min(ns.gap - gap_lower_bound(s, kappa)),
                Err(_) => pass = false,
            }
            let sp = rng.random::<f64>();
            coupling = coupling.max(ybar.dotc(&(&h * y_state(&emb, sp))).norm());
            norm_excess = norm_excess.max(spectral_norm(&h) - 1.0);
        }
    }
    pass &= coupling <= 1e-12 && norm_excess <= 1e-12 && gap_slack >= -1e-10;
    outcome(
        pass,
        format!("min gap slack {gap_slack:.2e}, max coupling {coupling:.1e}, max ‖H‖−1 {norm_excess:.1e}"),
    )
}

fn lemma_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let report = lemma_property_suite(500, &mut rng);
    let parts: Vec<String> = report
        .checks
        .iter()
        .map(|c| format!("{} {}/{} slack {:.1e}", c.name, c.violations, c.instances, c.worst_slack))
        .collect();
    outcome(report.violations() == 0, parts.join("; "))
}

fn cross_check_identity() -> Outcome {
    let mut pass = true;
    let mut worst = (0.0f64, 0.0, 0.0, 0u64);
    for kappa in [1e2, 1e3, 1e4, 1e5, 1e6] {
        for eps in [0.1, 1e-3, 1e-6, 1e-10] {
            let b = total_query_bound(&ProblemParams::new(kappa, eps, 1.0, 0.61).unwrap(), 1, 4).unwrap();
            let diff = b.q_star - b.assembly_total;
            let ok = diff.abs() <= b.q as f64 + 2.0;
            pass &= ok;
            if diff.abs() > worst.0.abs() {
                worst = (diff, kappa, eps, b.q);
            }
        }
    }
    outcome(
        pass,
        format!("worst Q* − assembly = {:+.0} at κ={:.0e}, ε={:.0e} (q+2 = {})", worst.0, worst.1, worst.2, worst.3 + 2),
    )
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check, Duration); 13] = [
        ("golden total", golden_total, Duration::from_millis(1)),
        ("improvement band", improvement_band, Duration::from_millis(10)),
        ("crossover", crossover, Duration::from_millis(10)),
        ("step-count tightness", step_count_tightness, Duration::from_secs(1)),
        ("distribution moments", distribution_moments, Duration::from_secs(30)),
        ("band limit", band_limit, Duration::from_secs(30)),
        ("Jacobi-Anger certification", jacobi_anger_certification, Duration::from_secs(10)),
        ("OAA contract", oaa_contract, Duration::from_secs(10)),
        ("filter certification", filter_certification, Duration::from_secs(5)),
        ("end-to-end desk run", end_to_end, Duration::from_secs(300)),
        ("structural invariants", structural_invariants, Duration::from_secs(30)),
        ("lemma suite", lemma_suite, Duration::from_secs(30)),
        ("cross-check identity", cross_check_identity, Duration::from_secs(1)),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        let timing = if in_time { String::new() } else { format!(" over time limit {limit:?}") };
        println!(
            "{} {:>2} {name}: {} [{:.3?}{timing}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
