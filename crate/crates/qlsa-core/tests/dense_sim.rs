use qlsa_core::dense_sim::*;
use qlsa_core::linalg::*;
use qlsa_core::polyapprox::FilterSpec;
use qlsa_core::sampling::TimeDistributionKind;
use qlsa_core::schedule::{build_grid, gap_lower_bound, num_steps_analytic, path_length, step_fidelity, ScheduleGrid};
use qlsa_core::cost_model::error_budget;
use qlsa_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn diag_system(vals: &[f64], kappa: f64) -> LinearSystem {
    let m = vals.len();
    let mut a = CMatrix::zeros(m, m);
    for (i, &v) in vals.iter().enumerate() {
        a[(i, i)] = C64::new(v, 0.0);
    }
    let b = CVector::from_element(m, C64::new((m as f64).sqrt().recip(), 0.0));
    LinearSystem::new(a, b, 1.0, kappa).unwrap()
}

fn distance_up_to_phase(a: &CVector, b: &CVector) -> f64 {
    let ov = b.dotc(a);
    (a - b * (ov / ov.norm())).norm()
}

fn embedded_solve(emb: &EmbeddedSystem) -> CVector {
    let x = emb.abar.clone().lu().solve(&emb.bbar).unwrap();
    let lower = emb.solution_block(&x);
    let n = lower.norm();
    lower / C64::new(n, 0.0)
}

#[test]
fn embedding_inverts_to_lower_block() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let m = rng.random_range(1..=8);
        let a = random_ginibre(m, m, &mut rng);
        let b = random_state(m, &mut rng) * C64::new(rng.random_range(0.5..3.0), 0.0);
        let norm = spectral_norm(&a) * rng.random_range(1.0..2.0);
        let sys = LinearSystem::new(a, b, norm, 1e6).unwrap();
        let emb = hermitian_embed(&sys).unwrap();
        assert!(hermiticity_defect(&emb.abar) <= 1e-13);
        assert!(spectral_norm(&emb.abar) <= 1.0 + 1e-12);
        assert_eq!(emb.dim(), (2 * m).next_power_of_two());
        let x = emb.abar.clone().lu().solve(&emb.bbar).unwrap();
        assert!(x.rows(0, m).norm() <= 1e-10 * x.norm());
        let got = embedded_solve(&emb);
        assert!(distance_up_to_phase(&got, &classical_solve(&sys).unwrap()) <= 1e-10);
    }
}

#[test]
fn embedding_of_hermitian_matrix_still_doubles() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_hermitian(4, 0.9, &mut rng) + identity(4) * C64::new(0.05, 0.0);
    let sys = LinearSystem::new(a, random_state(4, &mut rng), 1.0, 1e4).unwrap();
    let emb = hermitian_embed(&sys).unwrap();
    assert_eq!(emb.dim(), 8);
    assert!(distance_up_to_phase(&embedded_solve(&emb), &classical_solve(&sys).unwrap()) <= 1e-10);
}

#[test]
fn embedding_diag_example() {
    let emb = hermitian_embed(&diag_system(&[1.0, 0.2], 5.0)).unwrap();
    let y = embedded_solve(&emb);
    let r = y[1] / y[0];
    assert!((r - C64::new(5.0, 0.0)).norm() < 1e-12);
}

#[test]
fn embedded_singular_values_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in [2, 3, 5] {
        let sys = random_system(m, 10.0, &mut rng).unwrap();
        let emb = hermitian_embed(&sys).unwrap();
        let (lo, hi) = singular_range(&emb.abar);
        assert!(lo >= 0.1 - 1e-12 && hi <= 1.0 + 1e-12);
    }
}

#[test]
fn hamiltonian_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sys = random_system(3, 8.0, &mut rng).unwrap();
    let emb = hermitian_embed(&sys).unwrap();
    for s in [0.0, 0.3, 0.77, 1.0] {
        let h = build_hamiltonian(&emb, s);
        assert_eq!(h.nrows(), 4 * emb.dim());
        assert!(hermiticity_defect(&h) <= 1e-13);
        assert!(spectral_norm(&h) <= 1.0 + 1e-12);
        let y = y_state(&emb, s);
        assert!((&h * &y).norm() <= 1e-12);
        assert!((&h * ybar_state(&emb)).norm() <= 1e-12);
    }
    let h0 = build_hamiltonian(&emb, 0.0);
    assert!((&h0 * initial_state(&emb)).norm() <= 1e-14);
    assert!(distance_up_to_phase(&initial_state(&emb), &y_state(&emb, 0.0)) <= 1e-7);
}

#[test]
fn final_nullspace_holds_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sys = random_system(4, 10.0, &mut rng).unwrap();
    let emb = hermitian_embed(&sys).unwrap();
    let y1 = y_state(&emb, 1.0);
    assert!((&build_hamiltonian(&emb, 1.0) * &y1).norm() <= 1e-12);
    assert!(distance_up_to_phase(&decode_solution(&emb, &y1), &classical_solve(&sys).unwrap()) <= 1e-7);
    let ns = nullspace_and_gap(&build_hamiltonian(&emb, 1.0), None).unwrap();
    let p = ns.projector();
    assert!(((&p * &y1) - &y1).norm() <= 1e-10);
}

#[test]
fn nullspace_is_two_dimensional_and_gap_dominates() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..4 {
        let m = rng.random_range(1..=4);
        let kappa = rng.random_range(2.0..20.0);
        let sys = random_system(m, kappa, &mut rng).unwrap();
        let emb = hermitian_embed(&sys).unwrap();
        for i in 0..50 {
            let s = i as f64 / 49.0;
            let ns = nullspace_and_gap(&build_hamiltonian(&emb, s), None).unwrap();
            assert_eq!(ns.dim(), 2);
            assert!(ns.gap >= gap_lower_bound(s, kappa) - 1e-10, "s={s}: {} < {}", ns.gap, gap_lower_bound(s, kappa));
        }
    }
}

#[test]
fn gap_tight_at_final_point() {
    let kappa = 7.0;
    let emb = hermitian_embed(&diag_system(&[1.0, 0.6, 1.0 / kappa], kappa)).unwrap();
    let ns = nullspace_and_gap(&build_hamiltonian(&emb, 1.0), None).unwrap();
    assert!((ns.gap - 1.0 / kappa).abs() <= 1e-10);
}

#[test]
fn spurious_vector_never_couples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let emb = hermitian_embed(&random_system(3, 6.0, &mut rng).unwrap()).unwrap();
    let ybar = ybar_state(&emb);
    for _ in 0..20 {
        let (s, sp) = (rng.random::<f64>(), rng.random::<f64>());
        let v = ybar.dotc(&(build_hamiltonian(&emb, s) * y_state(&emb, sp)));
        assert!(v.norm() <= 1e-12);
    }
}

#[test]
fn wrong_nullspace_dimension_is_structure_error() {
    let h = real_matrix(3, 3, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    assert!(matches!(nullspace_and_gap(&h, None), Err(Error::Structure { found: 1 })));
}

#[test]
fn classical_solve_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let b = random_state(3, &mut rng) * C64::new(2.0, 0.0);
    let sys = LinearSystem::new(identity(3), b.clone(), 1.0, 1.0).unwrap();
    assert!((classical_solve(&sys).unwrap() - &b / C64::new(2.0, 0.0)).norm() < 1e-15);
    let kappa = 40.0;
    let y = classical_solve(&diag_system(&[1.0, 1.0 / kappa], kappa)).unwrap();
    assert!((y[1] / y[0] - C64::new(kappa, 0.0)).norm() < 1e-12);
    let a = random_ginibre(8, 8, &mut rng);
    let b = random_state(8, &mut rng);
    let sys = LinearSystem::new(a.clone(), b.clone(), spectral_norm(&a), 1e8).unwrap();
    let x = classical_solve(&sys).unwrap();
    let z = &a * &x;
    let scale = b.norm() / z.norm();
    let phase = z.dotc(&b) / z.dotc(&b).norm();
    assert!((z * C64::new(scale, 0.0) * phase - &b).norm() / b.norm() <= 1e-10);
}

#[test]
fn empty_grid_leaves_state_unchanged() {
    let emb = hermitian_embed(&diag_system(&[1.0, 0.5], 2.0)).unwrap();
    let grid = ScheduleGrid {
        kappa: 2.0,
        q: 0,
        v_a: 0.0,
        v_b: 0.0,
        v: vec![0.0],
        s: vec![0.0],
        delta: vec![1.0],
    };
    let plan = ProtocolPlan::new(&emb, &grid);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let st = run_protocol(&plan, TimeDistributionKind::MeanOptimized, ProtocolMode::Ideal, &mut rng).unwrap();
    assert_eq!(st.psi, initial_state(&emb));
    assert_eq!(st.weight, 1.0);
}

#[test]
fn ideal_protocol_fidelity_and_no_leak() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let sys = random_system(2, 10.0, &mut rng).unwrap();
    let cfg = SimulationConfig {
        eps: 0.1,
        trials: 2000,
        seed: 11,
        ..SimulationConfig::default()
    };
    let res = simulate(&sys, &cfg).unwrap();
    let q = num_steps_analytic(10.0).unwrap();
    assert_eq!(res.q, q);
    let bound = step_fidelity(path_length(10.0), q as f64);
    assert!(res.fidelity_pre_filter.mean >= bound - 3.0 * res.fidelity_pre_filter.stderr);
    assert!(res.fidelity_pre_filter.mean >= 0.39);
    assert!(res.max_leak <= 1e-8, "{}", res.max_leak);
    assert!(res.trace_distance_post.mean <= 0.1);
    assert!(res.success_rate.mean >= 0.39 - 0.201 * 0.1 - 3.0 * res.success_rate.stderr);
}

#[test]
fn fidelity_lower_bound_with_few_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let sys = random_system(2, 5.0, &mut rng).unwrap();
    for q in [8, 16] {
        let cfg = SimulationConfig {
            trials: 1000,
            seed: 13,
            q: Some(q),
            ..SimulationConfig::default()
        };
        let res = simulate(&sys, &cfg).unwrap();
        let bound = step_fidelity(path_length(5.0), q as f64);
        assert!(res.fidelity_pre_filter.mean >= bound - 3.0 * res.fidelity_pre_filter.stderr, "q={q}");
    }
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let sys = random_system(2, 5.0, &mut rng).unwrap();
    let cfg = SimulationConfig {
        trials: 64,
        seed: 99,
        ..SimulationConfig::default()
    };
    let a = simulate(&sys, &cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| simulate(&sys, &cfg).unwrap());
    assert_eq!(a.fidelity_pre_filter, b.fidelity_pre_filter);
    assert_eq!(a.success_rate, b.success_rate);
    assert_eq!(a.trace_distance_post, b.trace_distance_post);
}

#[test]
fn emulated_matches_ideal_within_budget() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let kappa = 6.0;
    let sys = random_system(2, kappa, &mut rng).unwrap();
    let emb = hermitian_embed(&sys).unwrap();
    let q = num_steps_analytic(kappa).unwrap();
    let grid = build_grid(kappa, q).unwrap();
    let plan = ProtocolPlan::new(&emb, &grid);
    let budget = error_budget(0.1, 0.61, q).unwrap();
    let d = emulation_trace_distance(&plan, TimeDistributionKind::MeanOptimized, budget.delta_step, 200, 16).unwrap();
    assert!(d <= budget.eps_ad, "{d} > {}", budget.eps_ad);
    let cfg = SimulationConfig {
        mode: SimulationMode::Emulated,
        trials: 200,
        seed: 17,
        ..SimulationConfig::default()
    };
    let res = simulate(&sys, &cfg).unwrap();
    assert!(res.max_leak <= 1e-8);
    assert!(res.success_rate.mean <= 1.0);
}

#[test]
fn emulated_weight_stays_in_unit_interval() {
    let emb = hermitian_embed(&diag_system(&[1.0, 0.25], 4.0)).unwrap();
    let grid = build_grid(4.0, 12).unwrap();
    let plan = ProtocolPlan::new(&emb, &grid);
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..20 {
        let st = run_protocol(&plan, TimeDistributionKind::VarianceOptimized, ProtocolMode::Emulated { delta: 1e-3 }, &mut rng).unwrap();
        assert!(st.weight > 0.0 && st.weight <= 1.0);
        assert!((st.psi.norm() - 1.0).abs() <= 1e-10);
    }
    let bad = run_protocol(&plan, TimeDistributionKind::MeanOptimized, ProtocolMode::Emulated { delta: 0.5 }, &mut rng);
    assert!(bad.is_err());
}

#[test]
fn filter_fixes_both_nullspace_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let kappa = 8.0;
    let emb = hermitian_embed(&random_system(3, kappa, &mut rng).unwrap()).unwrap();
    let spec = FilterSpec::new(1.0 / kappa, 1e-4).unwrap();
    let y1 = AdiabaticState {
        psi: y_state(&emb, 1.0),
        weight: 0.7,
    };
    let out = filter_and_postselect(&y1, &spec, &emb).unwrap();
    assert!((out.acceptance - 0.7).abs() <= 1e-10);
    assert!(out.distance <= 1e-10, "{}", out.distance);
    let yb = AdiabaticState {
        psi: ybar_state(&emb),
        weight: 1.0,
    };
    let out = filter_and_postselect(&yb, &spec, &emb).unwrap();
    assert!((out.acceptance - 1.0).abs() <= 1e-10);
    assert!((out.output.dotc(&yb.psi).norm() - 1.0).abs() <= 1e-10);
    assert!((out.distance - 2.0).abs() <= 1e-6);
}

#[test]
fn lemma_suite_has_no_violations() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let report = lemma_property_suite(500, &mut rng);
    assert_eq!(report.checks.len(), 4);
    for c in &report.checks {
        assert_eq!(c.instances, 500);
        assert_eq!(c.violations, 0, "{}: worst slack {}", c.name, c.worst_slack);
    }
}

#[test]
fn lemma_identity_case_is_tight() {
    let id = identity(3);
    let rho = identity(3) * C64::new(1.0 / 3.0, 0.0);
    assert!((trace_norm(&(&id * &id)) - trace_norm(&id) * spectral_norm(&id)).abs() < 1e-12);
    assert!(trace_norm(&(&id * &rho * &id - &id * &rho * &id)) == 0.0);
    let p = (&rho * id.adjoint() * &id).trace().re;
    assert!((p - 1.0).abs() < 1e-15);
}

#[test]
fn problem_file_errors() {
    let singular = r#"{"matrix": [[1,0],[2,0],[2,0],[4,0]], "b": [[1,0],[1,0]], "norm_bound": 5, "kappa_bound": 10}"#;
    assert!(matches!(LinearSystem::from_json(singular), Err(Error::Singular { .. })));
    let zero_b = r#"{"matrix": [1, 0, 0, 1], "b": [0, 0], "norm_bound": 1, "kappa_bound": 1}"#;
    assert!(LinearSystem::from_json(zero_b).is_err());
    let reals = r#"{"matrix": [[2, 0], [0, 1]], "b": [1, 1], "norm_bound": 2, "kappa_bound": 2}"#;
    let sys = LinearSystem::from_json(reals).unwrap();
    assert_eq!(sys.a_matrix[(0, 0)], C64::new(2.0, 0.0));
    assert_eq!(sys.a_matrix[(1, 1)], C64::new(1.0, 0.0));
}
