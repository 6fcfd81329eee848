//! Closed-form, non-asymptotic query counts and error budgets.
//!
//! All counts are in calls to the block-encoding `U_A` of the coefficient
//! matrix. `Q*` is an upper bound on the expected number of calls.

use std::f64::consts::{E, PI, SQRT_2};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::polyapprox::truncation_constant;
use crate::sampling::{moments, TimeDistribution, TimeDistributionKind};
use crate::schedule::{self, build_grid, path_length, step_prefactor, ProblemParams, KAPPA_MIN};

/// Success-probability intercept `1 − γ` at the default γ.
pub const SUCCESS_INTERCEPT: f64 = 0.39;
/// Slope of the success-probability bound `0.39 − 0.201ε`.
pub const SUCCESS_SLOPE: f64 = 0.201;
/// Slope of the repetition denominator `0.39 − 0.204ε`.
pub const REPETITION_SLOPE: f64 = 0.204;
/// Numerical reference prefactor `2·2305/√(2−√2)`.
pub const REFERENCE_NUMERIC: f64 = 6023.0;
/// Analytic reference prefactor `2·44864/√(2−√2)`.
pub const REFERENCE_ANALYTIC: f64 = 117_235.0;
/// Per-step error split `δ = ε_AD/(4.1 q)`.
pub const STEP_ERROR_SPLIT: f64 = 4.1;

/// `3⌈(e/2) α_H |τ| + log(2c/δ)⌉` queries for a `δ`-accurate `e^{−iHτ}`.
pub fn hamsim_query_cost(alpha_h: f64, tau: f64, delta: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("0 < δ < 1 required, got δ = {delta}")));
    }
    if !(alpha_h > 0.0 && alpha_h.is_finite()) {
        return Err(domain(format!("α_H > 0 required, got α_H = {alpha_h}")));
    }
    let inner = E * alpha_h * tau.abs() / 2.0 + (2.0 * truncation_constant() / delta).ln();
    Ok(3 * inner.ceil() as u64)
}

/// Error allocation between adiabatic evolution, filtering and per-step simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub eps_ad: f64,
    pub eps_p: f64,
    pub delta_step: f64,
    pub gamma: f64,
}

impl ErrorBudget {
    /// Largest admissible `ε_AD = (1−γ)/(31−10γ)`.
    pub fn eps_ad_cap(gamma: f64) -> f64 {
        (1.0 - gamma) / (31.0 - 10.0 * gamma)
    }
}

/// `ε_AD = ε_P = (1−γ)ε/6.2`, `δ = ε_AD/(4.1 q)`.
pub fn error_budget(eps: f64, gamma: f64, q: u64) -> Result<ErrorBudget> {
    if !(eps > 0.0 && eps <= schedule::EPS_MAX) {
        return Err(domain(format!("0 < ε ≤ 0.24 required, got ε = {eps}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain(format!("0 < γ < 1 required, got γ = {gamma}")));
    }
    if q == 0 {
        return Err(domain("q ≥ 1 required"));
    }
    let eps_ad = (1.0 - gamma) * eps / 6.2;
    let cap = ErrorBudget::eps_ad_cap(gamma);
    if eps_ad > cap {
        return Err(domain(format!("ε_AD = {eps_ad} exceeds (1−γ)/(31−10γ) = {cap}")));
    }
    Ok(ErrorBudget {
        eps_ad,
        eps_p: eps_ad,
        delta_step: eps_ad / (STEP_ERROR_SPLIT * q as f64),
        gamma,
    })
}

fn sqrt_k2p1(kappa: f64) -> f64 {
    1.0_f64.hypot(kappa)
}

/// `3q(log(2c·4.1q/ε_AD) + 1)`, the simulation-precision overhead.
fn precision_term(q: f64, eps_ad: f64) -> f64 {
    let c2 = 2.0 * truncation_constant() * STEP_ERROR_SPLIT;
    3.0 * q * ((c2 * q / eps_ad).ln() + 1.0)
}

/// `c' = (3/2)⟨|t|⟩Δ` for the given time distribution.
fn time_prefactor(kind: TimeDistributionKind) -> f64 {
    1.5 * moments(kind).mean_abs_coeff
}

fn main_term(cp: f64, kappa: f64, alpha: f64, ratio: f64, small_alpha: bool) -> f64 {
    let root = sqrt_k2p1(kappa);
    if small_alpha {
        cp * E * root * (alpha * PI / SQRT_2 * ratio + 1.0 + PI / (SQRT_2 * kappa * kappa))
    } else {
        cp * alpha * E * root * (PI / SQRT_2 * ratio + 1.0)
    }
}

/// Expected-cost bound `3.48198 α e √(κ²+1)(π/√2 · q/L + 1) + 3q(log(12.1165q/ε_AD) + 1)` for `α ≥ 1`.
pub fn adiabatic_expected_cost(kappa: f64, alpha: f64, eps_ad: f64, q: u64) -> f64 {
    let cp = time_prefactor(TimeDistributionKind::MeanOptimized);
    let ratio = q as f64 / path_length(kappa);
    main_term(cp, kappa, alpha, ratio, false) + precision_term(q as f64, eps_ad)
}

/// Expected-cost bound for `0 < α < 1`, `3.48198 e √(κ²+1)(α π/√2 · q/L + 1 + π/(√2κ²)) + …`.
pub fn adiabatic_expected_cost_small_alpha(kappa: f64, alpha: f64, eps_ad: f64, q: u64) -> f64 {
    let cp = time_prefactor(TimeDistributionKind::MeanOptimized);
    let ratio = q as f64 / path_length(kappa);
    main_term(cp, kappa, alpha, ratio, true) + precision_term(q as f64, eps_ad)
}

/// Expected-cost bound for either distribution, choosing the α regime; `q` may be fractional.
pub fn adiabatic_expected_cost_with(kind: TimeDistributionKind, kappa: f64, alpha: f64, eps_ad: f64, q: f64) -> f64 {
    let ratio = q / path_length(kappa);
    main_term(time_prefactor(kind), kappa, alpha, ratio, alpha < 1.0) + precision_term(q, eps_ad)
}

/// Exact discrete expectation `Σ_j [c'e α_{s_j}/Δ(s_j) + 3 log(2c/δ) + 3]` on the schedule grid.
pub fn adiabatic_expected_sum(kind: TimeDistributionKind, kappa: f64, alpha: f64, eps_ad: f64, q: u64) -> Result<f64> {
    let grid = build_grid(kappa, q)?;
    let cp = time_prefactor(kind);
    let delta = eps_ad / (STEP_ERROR_SPLIT * q as f64);
    let log_term = 3.0 * (2.0 * truncation_constant() / delta).ln() + 3.0;
    Ok((1..=q as usize)
        .map(|j| {
            let s = grid.s[j];
            cp * E * ((1.0 - s) + alpha * s) / grid.delta[j] + log_term
        })
        .sum())
}

/// One Monte-Carlo draw of the adiabatic query count: per-step QSP costs at sampled times.
pub fn sampled_adiabatic_cost<R: Rng + ?Sized>(
    kind: TimeDistributionKind,
    kappa: f64,
    alpha: f64,
    eps_ad: f64,
    q: u64,
    rng: &mut R,
) -> Result<u64> {
    let grid = build_grid(kappa, q)?;
    let delta = eps_ad / (STEP_ERROR_SPLIT * q as f64);
    let mut total = 0;
    for j in 1..=q as usize {
        let s = grid.s[j];
        let t = TimeDistribution::new(kind, grid.delta[j])?.sample(rng);
        total += hamsim_query_cost((1.0 - s) + alpha * s, t, delta)?;
    }
    Ok(total)
}

/// Standard-deviation bound `ΔQ_A ≤ 4.58971 e α √(a(κ)·2 log(2κ+3)·κ(1+κ) + 1 + κ²)`.
pub fn adiabatic_cost_stddev(kappa: f64, alpha: f64) -> f64 {
    adiabatic_cost_stddev_with(TimeDistributionKind::MeanOptimized, kappa, alpha)
}

/// Standard-deviation bound with prefactor `(3/2)√(Var·Δ²)` of the chosen distribution.
pub fn adiabatic_cost_stddev_with(kind: TimeDistributionKind, kappa: f64, alpha: f64) -> f64 {
    let pref = 1.5 * moments(kind).variance_coeff.sqrt();
    let lg = (2.0 * kappa + 3.0).ln();
    let inner = step_prefactor(kappa) * 2.0 * lg * kappa * (1.0 + kappa) + 1.0 + kappa * kappa;
    pref * E * alpha * inner.sqrt()
}

fn check_filter_args(kappa: f64, alpha: f64, eps_p: f64) -> Result<()> {
    if !(kappa >= KAPPA_MIN && kappa.is_finite()) {
        return Err(domain(format!("κ ≥ √12 required for filtering, got κ = {kappa}")));
    }
    if !(eps_p > 0.0 && eps_p < 1.0) {
        return Err(domain(format!("0 < ε_P < 1 required, got ε_P = {eps_p}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(domain(format!("α > 0 required, got α = {alpha}")));
    }
    Ok(())
}

/// Filtering queries `⌈α κ log(2/ε_P)⌉`.
pub fn filtering_cost(kappa: f64, alpha: f64, eps_p: f64) -> Result<u64> {
    check_filter_args(kappa, alpha, eps_p)?;
    Ok((alpha * kappa * (2.0 / eps_p).ln()).ceil() as u64)
}

/// Closed-form total: the two terms of `Q*`, the derived quantities and an
/// independent component assembly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub kappa: f64,
    pub eps: f64,
    pub alpha: f64,
    /// Analytic step count `⌈a(κ)L²⌉`.
    pub q: u64,
    /// Adiabatic term of `Q*`.
    pub adiabatic_expected: f64,
    pub adiabatic_stddev: f64,
    /// Filtering term `ακ log(32/ε)` of `Q*`.
    pub filtering: f64,
    /// Upper bound on the expected number of `U_A` calls per attempt.
    pub q_star: f64,
    /// `Q*/(0.39 − 0.204ε)`.
    pub q_expected: f64,
    /// Lower bound `0.39 − 0.201ε` on the success probability.
    pub p_success: f64,
    pub b_oracle_calls: f64,
    pub qubits: u64,
    pub budget: ErrorBudget,
    /// Adiabatic bound evaluated at the integer `q` with the same budget.
    pub assembly_adiabatic: f64,
    /// Integer filtering count `⌈ακ log(2/ε_P)⌉`.
    pub assembly_filtering: u64,
    pub assembly_total: f64,
}

/// Adiabatic term of `Q*` with the analytic step count substituted.
pub fn theorem_adiabatic_term(kappa: f64, alpha: f64, eps: f64) -> f64 {
    let lg = (2.0 * kappa + 3.0).ln();
    let a = 133.0 / 125.0 + 4.0 / (25.0 * kappa.cbrt());
    let root = sqrt_k2p1(kappa);
    let c1 = 1741.0 / 500.0;
    let main = if alpha >= 1.0 {
        c1 * alpha * E * root * (a * PI * lg + 1.0)
    } else {
        c1 * E * root * (alpha * a * PI * lg + 1.0 + PI / (SQRT_2 * kappa * kappa))
    };
    main + 351.0 / 50.0 * lg * lg * ((451.0 * lg * lg / eps).ln() + 1.0)
}

/// Filtering term `ακ log(32/ε)` of `Q*`.
pub fn theorem_filtering_term(kappa: f64, alpha: f64, eps: f64) -> f64 {
    alpha * kappa * (32.0 / eps).ln()
}

/// Closed-form upper bound `Q*` on the expected query count.
pub fn theorem_q_star(kappa: f64, alpha: f64, eps: f64) -> f64 {
    theorem_adiabatic_term(kappa, alpha, eps) + theorem_filtering_term(kappa, alpha, eps)
}

/// `Q*/(0.39 − 0.204ε)`.
pub fn expected_total(q_star: f64, eps: f64) -> f64 {
    q_star / (SUCCESS_INTERCEPT - REPETITION_SLOPE * eps)
}

/// Full cost breakdown for block-encoding ancilla count `a` and system dimension `n_dim`.
pub fn total_query_bound(params: &ProblemParams, a: u64, n_dim: u64) -> Result<CostBreakdown> {
    params.validate()?;
    if n_dim == 0 {
        return Err(domain("system dimension N ≥ 1 required"));
    }
    let ProblemParams { kappa, eps, alpha, gamma } = *params;
    let q = schedule::num_steps_analytic(kappa)?;
    let budget = error_budget(eps, gamma, q)?;
    let adiabatic_expected = theorem_adiabatic_term(kappa, alpha, eps);
    let filtering = theorem_filtering_term(kappa, alpha, eps);
    let q_star = adiabatic_expected + filtering;
    let assembly_adiabatic = adiabatic_expected_cost_with(TimeDistributionKind::MeanOptimized, kappa, alpha, budget.eps_ad, q as f64);
    let assembly_filtering = filtering_cost(kappa, alpha, budget.eps_p)?;
    let qubits = a + 6 + (n_dim as f64).log2().ceil() as u64;
    Ok(CostBreakdown {
        kappa,
        eps,
        alpha,
        q,
        adiabatic_expected,
        adiabatic_stddev: adiabatic_cost_stddev(kappa, alpha),
        filtering,
        q_star,
        q_expected: expected_total(q_star, eps),
        p_success: SUCCESS_INTERCEPT - SUCCESS_SLOPE * eps,
        b_oracle_calls: 2.0 * q_star,
        qubits,
        budget,
        assembly_adiabatic,
        assembly_filtering,
        assembly_total: assembly_adiabatic + assembly_filtering as f64,
    })
}

/// Reference-algorithm costs against ours at one `(κ, ε)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub kappa: f64,
    pub eps: f64,
    /// `6023κ + κ log(2/ε)`.
    pub reference_numeric: f64,
    /// `117235κ + κ log(2/ε)`.
    pub reference_analytic: f64,
    /// Our expected total `Q` at α = 1.
    pub ours: f64,
    pub ratio_numeric: f64,
    pub ratio_analytic: f64,
}

/// Numerical reference cost including its filtering stage with `ε_P = ε`.
pub fn reference_numeric_cost(kappa: f64, eps: f64) -> f64 {
    REFERENCE_NUMERIC * kappa + kappa * (2.0 / eps).ln()
}

pub fn reference_analytic_cost(kappa: f64, eps: f64) -> f64 {
    REFERENCE_ANALYTIC * kappa + kappa * (2.0 / eps).ln()
}

fn ours(kappa: f64, eps: f64) -> f64 {
    expected_total(theorem_q_star(kappa, 1.0, eps), eps)
}

pub fn compare_state_of_art(kappa: f64, eps: f64) -> Result<Comparison> {
    ProblemParams::with_defaults(kappa, eps)?;
    let o = ours(kappa, eps);
    let rn = reference_numeric_cost(kappa, eps);
    let ra = reference_analytic_cost(kappa, eps);
    Ok(Comparison {
        kappa,
        eps,
        reference_numeric: rn,
        reference_analytic: ra,
        ours: o,
        ratio_numeric: rn / o,
        ratio_analytic: ra / o,
    })
}

/// κ at which our `Q` overtakes the numerical reference, by bisection on `log κ` in `[lo, hi]`.
/// Returns `None` when the costs do not cross inside the bracket.
pub fn crossover_kappa(eps: f64, lo: f64, hi: f64) -> Result<Option<f64>> {
    if !(lo >= KAPPA_MIN && hi > lo && hi.is_finite()) {
        return Err(domain(format!("invalid bracket [{lo}, {hi}]")));
    }
    ProblemParams::with_defaults(lo, eps)?;
    let gap = |lk: f64| {
        let k = lk.exp();
        (ours(k, eps) / reference_numeric_cost(k, eps)).ln()
    };
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let (ga, gb) = (gap(a), gap(b));
    if ga.signum() == gb.signum() {
        return Ok(None);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if gap(m).signum() == ga.signum() {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    Ok(Some((0.5 * (a + b)).exp()))
}
