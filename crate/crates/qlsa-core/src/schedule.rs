//! Adiabatic trajectory: gap bound, reparametrised schedule `s(v)`, path
//! endpoints and the number of randomisation steps.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Default overlap parameter γ.
pub const DEFAULT_GAMMA: f64 = 0.61;
/// Smallest admissible condition-number bound for the full estimator.
pub const KAPPA_MIN: f64 = 3.464_101_615_137_754_6;
/// Largest admissible target error for the full estimator.
pub const EPS_MAX: f64 = 0.24;

/// Top-level problem parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub kappa: f64,
    pub eps: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl ProblemParams {
    pub fn new(kappa: f64, eps: f64, alpha: f64, gamma: f64) -> Result<Self> {
        let p = Self {
            kappa,
            eps,
            alpha,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_defaults(kappa: f64, eps: f64) -> Result<Self> {
        Self::new(kappa, eps, 1.0, DEFAULT_GAMMA)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.kappa >= KAPPA_MIN) {
            return Err(domain(format!("κ ≥ √12 required, got κ = {}", self.kappa)));
        }
        if !(self.eps > 0.0 && self.eps <= EPS_MAX) {
            return Err(domain(format!("0 < ε ≤ 0.24 required, got ε = {}", self.eps)));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(domain(format!("α > 0 required, got α = {}", self.alpha)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(domain(format!("0 < γ < 1 required, got γ = {}", self.gamma)));
        }
        Ok(())
    }
}

/// Lower bound `Δ(s) = √((1−s)² + (s/κ)²)` on the gap of `H(s)`.
pub fn gap_lower_bound(s: f64, kappa: f64) -> f64 {
    (1.0 - s).hypot(s / kappa)
}

fn rate(kappa: f64) -> f64 {
    1.0_f64.hypot(kappa) / (std::f64::consts::SQRT_2 * kappa)
}

/// Schedule `s(v) = (−κ² e^{−vr} + e^{vr} + 2κ²) / (2(κ²+1))`, `r = √(κ²+1)/(√2 κ)`.
pub fn schedule_s(v: f64, kappa: f64) -> f64 {
    let r = rate(kappa);
    let k2 = kappa * kappa;
    let s = (-k2 * (-v * r).exp() + (v * r).exp() + 2.0 * k2) / (2.0 * (k2 + 1.0));
    s.clamp(0.0, 1.0)
}

/// Path endpoints `(v_a, v_b)` with `s(v_a) = 0`, `s(v_b) = 1`.
///
/// `v_a` is evaluated as `f·log(κ/(√(1+κ²)+κ))`, the conjugate form of
/// `f·log(κ√(1+κ²) − κ²)` that avoids cancellation at large κ.
pub fn path_endpoints(kappa: f64) -> (f64, f64) {
    let root = 1.0_f64.hypot(kappa);
    let f = std::f64::consts::SQRT_2 * kappa / root;
    let v_a = f * (kappa / (root + kappa)).ln();
    let v_b = f * (root + 1.0).ln();
    (v_a, v_b)
}

/// Path length `L = v_b − v_a`.
pub fn path_length(kappa: f64) -> f64 {
    let (a, b) = path_endpoints(kappa);
    b - a
}

/// Left-hand side `(1 − L²/q²)^q` of the step-count condition.
pub fn step_fidelity(length: f64, q: f64) -> f64 {
    if q <= length {
        return 0.0;
    }
    let x = length / q;
    (q * (-x * x).ln_1p()).exp()
}

/// Smallest integer `q` with `(1 − L²/q²)^q ≥ 1 − γ` for a given path length.
pub fn num_steps_for_length(length: f64, gamma: f64) -> Result<u64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain(format!("0 < γ < 1 required, got γ = {gamma}")));
    }
    if !(length.is_finite() && length >= 0.0) {
        return Err(domain(format!("path length must be finite and ≥ 0, got {length}")));
    }
    let target = 1.0 - gamma;
    let mut q = (length.floor() as u64 + 1).max(1);
    let mut prev = 0.0;
    loop {
        let lhs = step_fidelity(length, q as f64);
        debug_assert!(lhs + 1e-15 >= prev, "step condition not monotone at q = {q}");
        if lhs >= target {
            return Ok(q);
        }
        prev = lhs;
        q += 1;
    }
}

/// Minimal step count for the schedule at condition number `kappa`.
pub fn num_steps_exact(kappa: f64, gamma: f64) -> Result<u64> {
    if !(kappa >= 1.0) {
        return Err(domain(format!("κ ≥ 1 required, got κ = {kappa}")));
    }
    num_steps_for_length(path_length(kappa), gamma)
}

/// Interpolated prefactor `a(κ) = 1.064 + 0.16 κ^{−1/3}` (valid for γ = 0.61).
pub fn step_prefactor(kappa: f64) -> f64 {
    1.064 + 0.16 / kappa.cbrt()
}

/// Unrounded analytic step count `a(κ)·L²`.
pub fn num_steps_analytic_real(kappa: f64) -> f64 {
    let l = path_length(kappa);
    step_prefactor(kappa) * l * l
}

/// Analytic step count `⌈a(κ)·L²⌉`.
pub fn num_steps_analytic(kappa: f64) -> Result<u64> {
    if !(kappa >= 2.0) {
        return Err(domain(format!("κ ≥ 2 required for the analytic step count, got κ = {kappa}")));
    }
    Ok(num_steps_analytic_real(kappa).ceil() as u64)
}

/// Uniform grid in `v` and the induced `s` and gap-bound values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleGrid {
    pub kappa: f64,
    pub q: u64,
    pub v_a: f64,
    pub v_b: f64,
    pub v: Vec<f64>,
    pub s: Vec<f64>,
    pub delta: Vec<f64>,
}

impl ScheduleGrid {
    pub fn new(kappa: f64, q: u64) -> Result<Self> {
        build_grid(kappa, q)
    }

    /// Number of adiabatic steps.
    pub fn steps(&self) -> usize {
        self.s.len().saturating_sub(1)
    }
}

/// Builds `v_j = v_a + j(v_b − v_a)/q` and the matching `s_j`, `Δ(s_j)`.
pub fn build_grid(kappa: f64, q: u64) -> Result<ScheduleGrid> {
    if q == 0 {
        return Err(domain("q ≥ 1 required for a schedule grid"));
    }
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(domain(format!("κ ≥ 1 required, got κ = {kappa}")));
    }
    let (v_a, v_b) = path_endpoints(kappa);
    let n = q as usize;
    let h = (v_b - v_a) / q as f64;
    let mut v = Vec::with_capacity(n + 1);
    let mut s = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let vj = if j == n { v_b } else { v_a + h * j as f64 };
        let sj = if j == 0 {
            0.0
        } else if j == n {
            1.0
        } else {
            schedule_s(vj, kappa)
        };
        v.push(vj);
        s.push(sj);
    }
    let delta = s.iter().map(|&x| gap_lower_bound(x, kappa)).collect();
    Ok(ScheduleGrid {
        kappa,
        q,
        v_a,
        v_b,
        v,
        s,
        delta,
    })
}
