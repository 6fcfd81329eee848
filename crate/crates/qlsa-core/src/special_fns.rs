//! Special functions: Bessel functions of the first kind, the principal
//! Lambert W branch and Chebyshev polynomials of the first kind.
//!
//! Bessel evaluation switches between three regimes:
//!
//! * power series (compensated) when `x` is small or below the turning point,
//! * Hankel's asymptotic expansion for `x ≥ 25 + ν²`,
//! * Miller's backward recurrence in between, normalised by the Neumann series
//!   `(x/2)^ν = Σ_k (ν+2k) Γ(ν+k)/k! · J_{ν+2k}(x)` (for integer orders the
//!   classical `J_0 + 2 Σ J_{2k} = 1`).

use std::f64::consts::{E, PI};

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{domain, Result};
use crate::linalg::CMatrix;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Validated Bessel order `ν ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return Err(domain(format!("Bessel order must be finite and ≥ 0, got {nu}")));
        }
        Ok(Self(nu))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0.fract() == 0.0
    }

    /// `J_ν(x)`.
    pub fn eval(self, x: f64) -> Result<f64> {
        bessel_j(self.0, x)
    }
}

const SERIES_MAX: f64 = 5.0;
const ASYMPTOTIC_MIN: f64 = 25.0;

/// Bessel function of the first kind `J_ν(x)`.
///
/// Negative `x` is accepted for integer orders via `J_n(−x) = (−1)^n J_n(x)`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    let order = BesselOrder::new(nu)?;
    if !x.is_finite() {
        return Err(domain(format!("Bessel argument must be finite, got {x}")));
    }
    if x < 0.0 {
        if !order.is_integer() {
            return Err(domain(format!(
                "negative argument {x} requires an integer order, got {nu}"
            )));
        }
        let v = bessel_j_nonneg(nu, -x);
        let odd = (nu % 2.0) == 1.0;
        return Ok(if odd { -v } else { v });
    }
    Ok(bessel_j_nonneg(nu, x))
}

/// `J_ν(x) / x^ν`, finite at `x = 0` where it equals `2^{−ν}/Γ(ν+1)`.
pub fn bessel_j_scaled(nu: f64, x: f64) -> Result<f64> {
    BesselOrder::new(nu)?;
    let ax = x.abs();
    if ax <= SERIES_MAX || ax * ax < 4.0 * (nu + 1.0) {
        return Ok(series_scaled(nu, ax));
    }
    Ok(bessel_j_nonneg(nu, ax) / ax.powf(nu))
}

fn bessel_j_nonneg(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_MAX || x * x < 4.0 * (nu + 1.0) {
        return series(nu, x);
    }
    if x >= ASYMPTOTIC_MIN + nu * nu {
        return hankel(nu, x);
    }
    if nu.fract() == 0.0 && nu < 1e6 {
        let n = nu as usize;
        return miller_integer(n, x)[n];
    }
    miller_fractional(nu, x)
}

/// Leading factor `(x/2)^ν / Γ(ν+1)`.
fn series_prefactor(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    if nu < 150.0 {
        let p = half.powf(nu);
        if p.is_normal() {
            return p / gamma(nu + 1.0);
        }
    }
    (nu * half.ln() - ln_gamma(nu + 1.0)).exp()
}

fn series_sum(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut acc = CompensatedSum::default();
    acc.add(term);
    for k in 1..1000 {
        let kf = k as f64;
        term *= q / (kf * (nu + kf));
        acc.add(term);
        if term.abs() < 1e-18 * acc.value().abs() && kf > 0.5 * x {
            break;
        }
    }
    acc.value()
}

fn series(nu: f64, x: f64) -> f64 {
    series_prefactor(nu, x) * series_sum(nu, x)
}

fn series_scaled(nu: f64, x: f64) -> f64 {
    let lead = if nu < 150.0 {
        0.5f64.powf(nu) / gamma(nu + 1.0)
    } else {
        (-nu * 2f64.ln() - ln_gamma(nu + 1.0)).exp()
    };
    lead * series_sum(nu, x)
}

/// Hankel's expansion `J_ν(x) = √(2/(πx)) (P cos χ − Q sin χ)`, `χ = x − (ν/2 + 1/4)π`.
fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = CompensatedSum::default();
    let mut q = CompensatedSum::default();
    p.add(1.0);
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (kf * 8.0 * x);
        if a.abs() > prev || a == 0.0 {
            break;
        }
        prev = a.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p.add(sign * a);
        } else {
            q.add(sign * a);
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let phase = (0.5 * nu + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    (2.0 / (PI * x)).sqrt() * (p.value() * cos_chi - q.value() * sin_chi)
}

/// Starting index for the backward recurrence.
fn miller_start(top: f64) -> usize {
    let m = top + 30.0 + 10.0 * top.cbrt();
    let m = m.ceil() as usize;
    m + (m % 2)
}

const RESCALE: f64 = 1e200;

/// `J_0(x), …, J_{n_max}(x)` for `x > 0` by normalised backward recurrence.
fn miller_integer(n_max: usize, x: f64) -> Vec<f64> {
    let start = miller_start(x.max(n_max as f64));
    let mut out = vec![0.0; n_max + 1];
    let mut f_next = 0.0;
    let mut f = 1e-300_f64;
    let mut norm = CompensatedSum::default();
    for k in (0..=start).rev() {
        if k <= n_max {
            out[k] = f;
        }
        if k == 0 {
            norm.add(f);
        } else if k % 2 == 0 {
            norm.add(2.0 * f);
        }
        if k == 0 {
            break;
        }
        let f_prev = (2.0 * k as f64 / x) * f - f_next;
        f_next = f;
        f = f_prev;
        if f.abs() > RESCALE {
            f /= RESCALE;
            f_next /= RESCALE;
            let s = norm.value() / RESCALE;
            norm = CompensatedSum::default();
            norm.add(s);
            for v in out.iter_mut().skip(k.saturating_sub(1)) {
                *v /= RESCALE;
            }
        }
    }
    let s = norm.value();
    for v in &mut out {
        *v /= s;
    }
    out
}

fn miller_fractional(nu: f64, x: f64) -> f64 {
    let start = miller_start(x.max(nu));
    let half_k = start / 2;
    // c'_k = (ν+2k) Γ(ν+k) / (k! (x/2)^ν); stored from k = 0 upward.
    let mut coeffs = Vec::with_capacity(half_k + 1);
    let c0 = (ln_gamma(nu + 1.0) - nu * (0.5 * x).ln()).exp();
    coeffs.push(c0);
    let mut g = c0;
    for k in 1..=half_k {
        let kf = k as f64;
        if k > 1 {
            g *= (nu + kf - 1.0) / kf;
        }
        coeffs.push((nu + 2.0 * kf) * g);
    }
    let mut f_next = 0.0;
    let mut f = 1e-300_f64;
    let mut norm = CompensatedSum::default();
    let mut f0 = 0.0;
    for k in (0..=start).rev() {
        if k % 2 == 0 {
            norm.add(coeffs[k / 2] * f);
        }
        if k == 0 {
            f0 = f;
            break;
        }
        let order = nu + k as f64;
        let f_prev = (2.0 * order / x) * f - f_next;
        f_next = f;
        f = f_prev;
        if f.abs() > RESCALE {
            f /= RESCALE;
            f_next /= RESCALE;
            let s = norm.value() / RESCALE;
            norm = CompensatedSum::default();
            norm.add(s);
        }
    }
    f0 / norm.value()
}

/// `J_0(x), …, J_{n_max}(x)` for any real `x`.
pub fn bessel_j_sequence(n_max: usize, x: f64) -> Result<Vec<f64>> {
    if !x.is_finite() {
        return Err(domain(format!("Bessel argument must be finite, got {x}")));
    }
    if x == 0.0 {
        let mut v = vec![0.0; n_max + 1];
        v[0] = 1.0;
        return Ok(v);
    }
    let ax = x.abs();
    let mut v = if ax <= SERIES_MAX {
        (0..=n_max).map(|n| series(n as f64, ax)).collect()
    } else {
        miller_integer(n_max, ax)
    };
    if x < 0.0 {
        for (k, val) in v.iter_mut().enumerate() {
            if k % 2 == 1 {
                *val = -*val;
            }
        }
    }
    Ok(v)
}

/// Principal branch `W_0(z)` of the Lambert W function.
pub fn lambert_w0(z: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if !z.is_finite() {
        return Err(domain(format!("Lambert W argument must be finite, got {z}")));
    }
    if z < branch {
        if z > branch - 4.0 * f64::EPSILON {
            return Ok(-1.0);
        }
        return Err(domain(format!("Lambert W0 requires z ≥ −1/e, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == branch {
        return Ok(-1.0);
    }
    let mut w = if z < -0.3 {
        let p = (2.0 * (E * z + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if z < 3.0 {
        let l = z.ln_1p();
        l * (1.0 - (1.0 + l).ln() / (2.0 + l))
    } else {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..100 {
        // t = (w e^w − z) e^{−w}, kept free of overflow.
        let t = w - z * (-w).exp();
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let step = t / (wp1 - (w + 2.0) * t / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-16 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// Chebyshev polynomial `T_k(x)` by the three-term recurrence.
pub fn chebyshev_t(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut t0, mut t1) = (1.0, x);
            for _ in 1..k {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
            t1
        }
    }
}

/// Chebyshev polynomial `T_k(M)` of a square matrix by the three-term recurrence.
pub fn chebyshev_t_matrix(k: usize, m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let id = CMatrix::identity(n, n);
    match k {
        0 => id,
        1 => m.clone(),
        _ => {
            let two_m = m * crate::linalg::C64::new(2.0, 0.0);
            let (mut t0, mut t1) = (id, m.clone());
            for _ in 1..k {
                let t2 = &two_m * &t1 - &t0;
                t0 = t1;
                t1 = t2;
            }
            t1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_at_zero() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1.165, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn j1_at_one() {
        let v = bessel_j(1.0, 1.0).unwrap();
        assert!((v - 0.440_050_585_744_933_5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(bessel_j(-0.5, 1.0).is_err());
        assert!(bessel_j(0.5, -1.0).is_err());
        assert!(bessel_j(f64::NAN, 1.0).is_err());
        assert!(bessel_j(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn negative_argument_integer_order() {
        let a = bessel_j(3.0, 2.5).unwrap();
        let b = bessel_j(3.0, -2.5).unwrap();
        assert!((a + b).abs() < 1e-16);
        let c = bessel_j(2.0, -7.0).unwrap();
        assert!((c - bessel_j(2.0, 7.0).unwrap()).abs() < 1e-16);
    }

    #[test]
    fn scaled_limit_at_zero() {
        let p = 1.165;
        let v = bessel_j_scaled(p, 0.0).unwrap();
        assert!((v - 0.5f64.powf(p) / gamma(p + 1.0)).abs() < 1e-15);
        let x = 3.0;
        let direct = bessel_j(p, x).unwrap() / x.powf(p);
        assert!((bessel_j_scaled(p, x).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn sequence_matches_pointwise() {
        for &x in &[0.3, 4.0, 17.0, 60.0, -9.5] {
            let seq = bessel_j_sequence(40, x).unwrap();
            for (n, &v) in seq.iter().enumerate() {
                let p = bessel_j(n as f64, x).unwrap();
                assert!((v - p).abs() < 1e-13, "n={n} x={x}: {v} vs {p}");
            }
        }
    }

    #[test]
    fn lambert_examples() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert!((lambert_w0(-1.0 / E).unwrap() + 1.0).abs() < 1e-15);
        assert!(lambert_w0(-0.5).is_err());
    }

    #[test]
    fn chebyshev_examples() {
        assert_eq!(chebyshev_t(0, 0.3), 1.0);
        for &x in &[-1.0, 0.0, 0.5] {
            assert!((chebyshev_t(2, x) - (2.0 * x * x - 1.0)).abs() < 1e-15);
        }
        let x: f64 = 0.9;
        assert!((chebyshev_t(7, x) - (7.0 * x.acos()).cos()).abs() < 1e-13);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-15).abs() < 1e-30);
    }
}
