//! Polynomial approximations used by the algorithm: the Jacobi-Anger
//! truncation of `e^{−iτx}`, robust oblivious amplitude amplification and the
//! Chebyshev eigenstate filter `R_{2l}(x, Δ)`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::linalg::{CMatrix, HermitianEigen, C64, ONE, ZERO};
use crate::special_fns::{bessel_j_sequence, chebyshev_t_matrix, lambert_w0};

/// Tolerance on `‖H‖ ≤ 1` for matrix arguments.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// `c = 4/(√(2π) e^{1/13})` in the truncation-order formula.
pub fn truncation_constant() -> f64 {
    4.0 / ((2.0 * std::f64::consts::PI).sqrt() * (1.0 / 13.0_f64).exp())
}

fn check_order_args(tau: f64, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("0 < δ < 1 required, got δ = {delta}")));
    }
    if !(tau.is_finite() && tau != 0.0) {
        return Err(domain(format!("τ must be finite and nonzero, got τ = {tau}")));
    }
    Ok(())
}

fn order_floor(tau: f64) -> u64 {
    (tau.abs() + 1.0).ceil() as u64
}

/// Truncation order `r = ⌈(|τ|e/2) exp[W((2/(|τ|e)) log(c/δ))]⌉`, never below `|τ| + 1`.
pub fn truncation_order(tau: f64, delta: f64) -> Result<u64> {
    check_order_args(tau, delta)?;
    let a = tau.abs() * E / 2.0;
    let w = lambert_w0((truncation_constant() / delta).ln() / a)?;
    let r = (a * w.exp()).ceil() as u64;
    Ok(r.max(order_floor(tau)))
}

/// Analytic upper bound `⌈|τ|e/2 + log(c/δ)⌉` on [`truncation_order`].
pub fn truncation_order_bound(tau: f64, delta: f64) -> Result<u64> {
    check_order_args(tau, delta)?;
    let r = (tau.abs() * E / 2.0 + (truncation_constant() / delta).ln()).ceil() as u64;
    Ok(r.max(order_floor(tau)))
}

/// Tail bound `4|τ|^r / (2^r r!)` on the truncation error, evaluated in log space.
pub fn truncation_tail_bound(tau: f64, r: u64) -> f64 {
    let rf = r as f64;
    (4f64.ln() + rf * (0.5 * tau.abs()).ln() - ln_gamma(rf + 1.0)).exp()
}

/// Validated truncation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub tau: f64,
    pub delta: f64,
    pub r: u64,
}

impl TruncationSpec {
    /// Uses the exact order `r = truncation_order(τ, δ)`.
    pub fn new(tau: f64, delta: f64) -> Result<Self> {
        Ok(Self {
            tau,
            delta,
            r: truncation_order(tau, delta)?,
        })
    }

    /// Explicit order, checked against `r ≥ max{|τ|e/2, |τ|+1}`.
    pub fn with_order(tau: f64, delta: f64, r: u64) -> Result<Self> {
        check_order_args(tau, delta)?;
        let min = (tau.abs() * E / 2.0).max(tau.abs() + 1.0);
        if (r as f64) < min {
            return Err(domain(format!("truncation order {r} below max(|τ|e/2, |τ|+1) = {min}")));
        }
        Ok(Self { tau, delta, r })
    }

    pub fn bound(&self) -> u64 {
        truncation_order_bound(self.tau, self.delta).unwrap_or(self.r)
    }

    pub fn series(&self) -> Result<JacobiAnger> {
        JacobiAnger::new(self.tau, self.r)
    }
}

/// Chebyshev coefficients of the truncated Jacobi-Anger expansion
/// `e^{−iτx} ≈ J_0(τ) + 2 Σ_{k=1}^{r−1} (−i)^k J_k(τ) T_k(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiAnger {
    pub tau: f64,
    coeffs: Vec<C64>,
}

impl JacobiAnger {
    /// Series with `r` terms (`T_0` through `T_{r−1}`).
    pub fn new(tau: f64, r: u64) -> Result<Self> {
        if r == 0 {
            return Ok(Self { tau, coeffs: Vec::new() });
        }
        let j = bessel_j_sequence(r as usize - 1, tau)?;
        let mut phase = ONE;
        let minus_i = C64::new(0.0, -1.0);
        let coeffs = j
            .iter()
            .enumerate()
            .map(|(k, &jk)| {
                let c = if k == 0 { C64::new(jk, 0.0) } else { phase * (2.0 * jk) };
                phase *= minus_i;
                c
            })
            .collect();
        Ok(Self { tau, coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coeffs
    }

    /// `C(x) − iS(x)` by the Clenshaw recurrence.
    pub fn eval(&self, x: f64) -> C64 {
        let n = self.coeffs.len();
        if n == 0 {
            return ZERO;
        }
        let (mut b1, mut b2) = (ZERO, ZERO);
        for k in (1..n).rev() {
            let b0 = self.coeffs[k] + b1 * (2.0 * x) - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + b1 * x - b2
    }

    /// Matrix Clenshaw recurrence for `C(H) − iS(H)`.
    pub fn eval_matrix(&self, h: &CMatrix) -> CMatrix {
        let d = h.nrows();
        let id = CMatrix::identity(d, d);
        let n = self.coeffs.len();
        if n == 0 {
            return CMatrix::zeros(d, d);
        }
        let two_h = h * C64::new(2.0, 0.0);
        let (mut b1, mut b2) = (CMatrix::zeros(d, d), CMatrix::zeros(d, d));
        for k in (1..n).rev() {
            let b0 = &id * self.coeffs[k] + &two_h * &b1 - &b2;
            b2 = b1;
            b1 = b0;
        }
        &id * self.coeffs[0] + h * &b1 - b2
    }
}

/// Truncated expansion `C(x) − iS(x)` with `r` terms.
pub fn jacobi_anger_truncation(x: f64, tau: f64, r: u64) -> C64 {
    match JacobiAnger::new(tau, r) {
        Ok(ja) => ja.eval(x),
        Err(_) => C64::new(f64::NAN, f64::NAN),
    }
}

/// How a matrix polynomial is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixMethod {
    #[default]
    Eigen,
    Clenshaw,
}

fn check_norm(eig: &HermitianEigen) -> Result<()> {
    let norm = eig.norm();
    if !(norm <= 1.0 + NORM_TOLERANCE) {
        return Err(Error::Norm {
            norm,
            limit: 1.0 + NORM_TOLERANCE,
        });
    }
    Ok(())
}

fn check_oaa_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.1) {
        return Err(domain(format!("0 < δ < 0.1 required, got δ = {delta}")));
    }
    Ok(())
}

fn series_for(tau: f64, delta: f64) -> Result<JacobiAnger> {
    if tau == 0.0 {
        return JacobiAnger::new(0.0, 1);
    }
    TruncationSpec::new(tau, delta)?.series()
}

/// Scalar form of the amplified propagator, `(3/s)ℓ − (4/s³)|ℓ|²ℓ` with `ℓ = C(x) − iS(x)`.
#[derive(Debug, Clone)]
pub struct OaaPolynomial {
    pub delta: f64,
    series: JacobiAnger,
}

impl OaaPolynomial {
    pub fn new(tau: f64, delta: f64) -> Result<Self> {
        check_oaa_delta(delta)?;
        Ok(Self {
            delta,
            series: series_for(tau, delta)?,
        })
    }

    pub fn series(&self) -> &JacobiAnger {
        &self.series
    }

    pub fn s(&self) -> f64 {
        2.0 * (1.0 + self.delta)
    }

    pub fn eval(&self, x: f64) -> C64 {
        let l = self.series.eval(x.clamp(-1.0, 1.0));
        let s = self.s();
        l * (3.0 / s) - l * (4.0 * l.norm_sqr() / (s * s * s))
    }
}

/// `M = (3/s)L − (4/s³)LL†L` for a matrix `L`, `s = 2(1+δ)`.
pub fn oaa_amplify(l: &CMatrix, delta: f64) -> CMatrix {
    let s = 2.0 * (1.0 + delta);
    let cubic = l * l.adjoint() * l;
    l * C64::new(3.0 / s, 0.0) - cubic * C64::new(4.0 / (s * s * s), 0.0)
}

/// Amplitude-amplified truncated propagator approximating `e^{−iHτ}` within `2δ`.
pub fn oaa_operator(h: &CMatrix, tau: f64, delta: f64) -> Result<CMatrix> {
    oaa_operator_with(h, tau, delta, MatrixMethod::Eigen)
}

pub fn oaa_operator_with(h: &CMatrix, tau: f64, delta: f64, method: MatrixMethod) -> Result<CMatrix> {
    check_oaa_delta(delta)?;
    let eig = HermitianEigen::new(h);
    check_norm(&eig)?;
    let series = series_for(tau, delta)?;
    let l = match method {
        MatrixMethod::Eigen => eig.apply(|x| series.eval(x.clamp(-1.0, 1.0))),
        MatrixMethod::Clenshaw => series.eval_matrix(h),
    };
    Ok(oaa_amplify(&l, delta))
}

/// Filter parameters: half-degree `l`, gap `Δ` and target error `ε_P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub l: u64,
    pub capital_delta: f64,
    pub eps_p: f64,
}

/// Largest admissible filter gap `1/√12`.
pub const FILTER_DELTA_MAX: f64 = 0.288_675_134_594_812_9;

/// Query count `⌈(1/Δ) log(2/ε_P)⌉`.
pub fn filter_query_count(capital_delta: f64, eps_p: f64) -> u64 {
    ((2.0 / eps_p).ln() / capital_delta).ceil() as u64
}

impl FilterSpec {
    /// Smallest even degree `2l` covering the query count.
    pub fn new(capital_delta: f64, eps_p: f64) -> Result<Self> {
        Self::check(capital_delta, eps_p)?;
        let count = filter_query_count(capital_delta, eps_p);
        Ok(Self {
            l: count.div_ceil(2).max(1),
            capital_delta,
            eps_p,
        })
    }

    /// Explicit half-degree, checked against `2l ≥ (1/Δ) log(2/ε_P) − 1`.
    pub fn with_half_degree(l: u64, capital_delta: f64, eps_p: f64) -> Result<Self> {
        Self::check(capital_delta, eps_p)?;
        let need = (2.0 / eps_p).ln() / capital_delta - 1.0;
        if l == 0 || ((2 * l) as f64) < need {
            return Err(domain(format!("filter degree 2l = {} below {need}", 2 * l)));
        }
        Ok(Self { l, capital_delta, eps_p })
    }

    fn check(capital_delta: f64, eps_p: f64) -> Result<()> {
        if !(capital_delta > 0.0 && capital_delta < FILTER_DELTA_MAX) {
            return Err(domain(format!("0 < Δ < 1/√12 required, got Δ = {capital_delta}")));
        }
        if !(eps_p > 0.0 && eps_p < 1.0) {
            return Err(domain(format!("0 < ε_P < 1 required, got ε_P = {eps_p}")));
        }
        Ok(())
    }

    pub fn degree(&self) -> u64 {
        2 * self.l
    }

    /// `acosh(1 + 2Δ²/(1−Δ²))`, the log-growth rate of the denominator.
    fn denominator_rate(&self) -> f64 {
        acosh1p(shifted(self.capital_delta, 0.0))
    }
}

/// `2(Δ² − x²)/(1 − Δ²)`.
fn shifted(capital_delta: f64, x: f64) -> f64 {
    let d2 = capital_delta * capital_delta;
    2.0 * (d2 - x * x) / (1.0 - d2)
}

/// `acosh(1 + d)` for `d ≥ 0`.
fn acosh1p(d: f64) -> f64 {
    (d + (d * (2.0 + d)).sqrt()).ln_1p()
}

/// `R_{2l}(x, Δ) = T_l(−1 + 2(x²−Δ²)/(1−Δ²)) / T_l(−1 − 2Δ²/(1−Δ²))`.
///
/// Both Chebyshev values outside `[−1, 1]` are taken in cosh form and
/// combined as a ratio of exponentials, so no intermediate overflows.
/// Arguments are clamped to `[−1, 1]`.
pub fn filter_value(x: f64, spec: &FilterSpec) -> f64 {
    let x = x.clamp(-1.0, 1.0);
    let lf = spec.l as f64;
    let b = spec.denominator_rate();
    let decay = (-2.0 * lf * b).exp();
    if x.abs() < spec.capital_delta {
        let a = acosh1p(shifted(spec.capital_delta, x));
        (lf * (a - b)).exp() * (1.0 + (-2.0 * lf * a).exp()) / (1.0 + decay)
    } else {
        let y = (-1.0 - shifted(spec.capital_delta, x)).clamp(-1.0, 1.0);
        let num = (lf * y.acos()).cos();
        let sign = if spec.l % 2 == 0 { 1.0 } else { -1.0 };
        sign * num * 2.0 * (-lf * b).exp() / (1.0 + decay)
    }
}

/// Spectral upper bound `1/cosh(l log((1+Δ)/(1−Δ)))` on `|R_{2l}|` over `[Δ, 1]`.
pub fn filter_suppression_bound(spec: &FilterSpec) -> f64 {
    let d = spec.capital_delta;
    1.0 / (spec.l as f64 * ((1.0 + d) / (1.0 - d)).ln()).cosh()
}

/// `R_{2l}(H, Δ)` via eigendecomposition.
pub fn filter_matrix(h: &CMatrix, spec: &FilterSpec) -> Result<CMatrix> {
    filter_matrix_with(h, spec, MatrixMethod::Eigen)
}

/// `R_{2l}(H, Δ)`. The Clenshaw path forms `T_l` of the shifted matrix
/// directly and is meant for moderate `l`.
pub fn filter_matrix_with(h: &CMatrix, spec: &FilterSpec, method: MatrixMethod) -> Result<CMatrix> {
    let eig = HermitianEigen::new(h);
    check_norm(&eig)?;
    match method {
        MatrixMethod::Eigen => Ok(eig.apply(|x| C64::new(filter_value(x, spec), 0.0))),
        MatrixMethod::Clenshaw => {
            let d2 = spec.capital_delta * spec.capital_delta;
            let n = h.nrows();
            let id = CMatrix::identity(n, n);
            let y = (h * h - &id * C64::new(d2, 0.0)) * C64::new(2.0 / (1.0 - d2), 0.0) - &id;
            let lf = spec.l as f64;
            let sign = if spec.l % 2 == 0 { 1.0 } else { -1.0 };
            let denom = sign * (lf * spec.denominator_rate()).cosh();
            Ok(chebyshev_t_matrix(spec.l as usize, &y) * C64::new(1.0 / denom, 0.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_value() {
        assert!((truncation_constant() - 1.477_620_097_106_143_5).abs() < 1e-15);
    }

    #[test]
    fn tau_zero_is_one() {
        for r in 1..6 {
            assert_eq!(jacobi_anger_truncation(0.3, 0.0, r), ONE);
        }
    }

    #[test]
    fn order_errors() {
        assert!(truncation_order(1.0, 1.0).is_err());
        assert!(truncation_order(1.0, 0.0).is_err());
        assert!(truncation_order(0.0, 0.1).is_err());
        assert!(TruncationSpec::with_order(10.0, 1e-3, 5).is_err());
    }

    #[test]
    fn filter_at_origin() {
        let spec = FilterSpec::new(0.1, 1e-3).unwrap();
        assert_eq!(filter_value(0.0, &spec), 1.0);
        assert_eq!(spec.l, 39);
    }

    #[test]
    fn filter_spec_errors() {
        assert!(FilterSpec::new(0.3, 1e-3).is_err());
        assert!(FilterSpec::new(0.1, 1.0).is_err());
        assert!(FilterSpec::with_half_degree(2, 0.1, 1e-3).is_err());
    }

    #[test]
    fn oaa_rejects_large_norm() {
        let h = CMatrix::identity(2, 2) * C64::new(1.01, 0.0);
        assert!(matches!(oaa_operator(&h, 1.0, 1e-3), Err(Error::Norm { .. })));
        assert!(oaa_operator(&CMatrix::identity(2, 2), 1.0, 0.2).is_err());
    }
}
