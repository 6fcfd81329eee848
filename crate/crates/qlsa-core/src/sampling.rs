//! Band-limited random evolution-time distributions.
//!
//! Both densities scale with the gap: `pdf_Δ(t) = Δ · f(Δ t)` where `f` is the
//! unit-gap density.
//!
//! * Mean-optimised: `f(u) = (J_p(|u|/2) / |u|^p)² / N₀`, `p = 1.165`.
//! * Variance-optimised: `f(u) = 4π (cos(u/2) / (π² − u²))²`.
//!
//! Both have characteristic functions supported on `[−Δ, Δ]`. The
//! variance-optimised mean is taken as `2.4306/Δ` by the same scaling.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Distribution, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quadrature::{gl20, gl8};
use crate::special_fns::{bessel_j_scaled, CompensatedSum};

/// Bessel order of the mean-optimised density.
pub const BESSEL_ORDER_P: f64 = 1.165;

/// Published constants of the mean-optimised density (`N/Δ`, `⟨|t|⟩Δ`, `⟨t²⟩Δ²`, `Var(|t|)Δ²`).
pub const MEAN_OPT_NORMALIZATION: f64 = 0.237_912_8;
pub const MEAN_OPT_MEAN_ABS: f64 = 2.321_32;
pub const MEAN_OPT_SECOND_MOMENT: f64 = 14.7509;
pub const MEAN_OPT_VARIANCE: f64 = 9.362_38;
/// Published constants of the variance-optimised density.
pub const VAR_OPT_MEAN_ABS: f64 = 2.4306;
pub const VAR_OPT_VARIANCE: f64 = 3.961_79;

/// Lower edge of the tabulated CDF region (unit gap).
pub const TABLE_MIN: f64 = 1e-6;
/// Upper edge `T_cut·Δ` of the tabulated CDF region.
pub const TABLE_CUT: f64 = 200.0;
const TABLE_NODES: usize = 16_000;
const MOMENT_CUTOFF: f64 = 40_000.0;
const CHI_CUTOFF: f64 = 4_000.0;
const CHI_CACHED_FREQ: f64 = 11.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeDistributionKind {
    MeanOptimized,
    VarianceOptimized,
}

impl TimeDistributionKind {
    pub const ALL: [TimeDistributionKind; 2] = [Self::MeanOptimized, Self::VarianceOptimized];

    pub fn label(self) -> &'static str {
        match self {
            Self::MeanOptimized => "mean-opt",
            Self::VarianceOptimized => "var-opt",
        }
    }
}

/// Dimensionless moment coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    /// `⟨|t|⟩·Δ`.
    pub mean_abs_coeff: f64,
    /// `⟨t²⟩·Δ²`.
    pub second_moment_coeff: f64,
    /// `Var(|t|)·Δ²`.
    pub variance_coeff: f64,
    /// `N/Δ` for the mean-optimised kind, the `4π` prefactor otherwise.
    pub normalization: f64,
}

impl MomentTable {
    pub fn mean_abs(&self, delta: f64) -> f64 {
        self.mean_abs_coeff / delta
    }

    pub fn variance(&self, delta: f64) -> f64 {
        self.variance_coeff / (delta * delta)
    }

    pub fn second_moment(&self, delta: f64) -> f64 {
        self.second_moment_coeff / (delta * delta)
    }
}

/// Random-time distribution at a given gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDistribution {
    pub kind: TimeDistributionKind,
    pub delta: f64,
}

impl TimeDistribution {
    pub fn new(kind: TimeDistributionKind, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(domain(format!("gap Δ must lie in (0, 1], got {delta}")));
        }
        Ok(Self { kind, delta })
    }

    pub fn pdf(&self, t: f64) -> f64 {
        self.delta * unit_pdf(self.kind, self.delta * t)
    }

    /// Published moment constants.
    pub fn moments(&self) -> MomentTable {
        moments(self.kind)
    }

    /// One signed draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_unit(self.kind, rng) / self.delta
    }

    /// `∫ e^{iωt} p(t) dt`, real by symmetry.
    pub fn characteristic_fn(&self, omega: f64) -> f64 {
        unit_characteristic_fn(self.kind, omega / self.delta)
    }

    /// `P(|t| ≤ x)` by direct quadrature.
    pub fn abs_cdf(&self, x: f64) -> f64 {
        unit_abs_cdf(self.kind, self.delta * x.abs())
    }
}

/// Published moment constants, with `⟨t²⟩` set to `Var + ⟨|t|⟩²`.
pub fn moments(kind: TimeDistributionKind) -> MomentTable {
    let (mean, var, norm) = match kind {
        TimeDistributionKind::MeanOptimized => {
            (MEAN_OPT_MEAN_ABS, MEAN_OPT_VARIANCE, MEAN_OPT_NORMALIZATION)
        }
        TimeDistributionKind::VarianceOptimized => (VAR_OPT_MEAN_ABS, VAR_OPT_VARIANCE, 4.0 * PI),
    };
    MomentTable {
        mean_abs_coeff: mean,
        second_moment_coeff: var + mean * mean,
        variance_coeff: var,
        normalization: norm,
    }
}

fn mean_opt_kernel(u: f64) -> f64 {
    // J_p(u/2)/u^p = 2^{−p} · J_p(u/2)/(u/2)^p
    let g = 0.5f64.powf(BESSEL_ORDER_P) * bessel_j_scaled(BESSEL_ORDER_P, 0.5 * u).expect("valid order");
    g * g
}

fn var_opt_kernel(u: f64) -> f64 {
    let a = u.abs();
    let h = PI - a;
    // cos(a/2)/(π² − a²) = sin(h/2)/(h(π + a)), regular at a = π.
    let ratio = if h.abs() < 1e-4 {
        (0.5 - h * h / 48.0) / (PI + a)
    } else {
        (0.5 * h).sin() / (h * (PI + a))
    };
    4.0 * PI * ratio * ratio
}

/// `∫ (J_p(|u|/2)/|u|^p)² du` over the real line.
pub fn mean_opt_normalization() -> f64 {
    static N0: OnceLock<f64> = OnceLock::new();
    *N0.get_or_init(|| kernel_moment(TimeDistributionKind::MeanOptimized, 0, MOMENT_CUTOFF, 1.0))
}

/// Unit-gap density `f(u)`.
pub fn unit_pdf(kind: TimeDistributionKind, u: f64) -> f64 {
    match kind {
        TimeDistributionKind::MeanOptimized => mean_opt_kernel(u.abs()) / mean_opt_normalization(),
        TimeDistributionKind::VarianceOptimized => var_opt_kernel(u),
    }
}

/// `2 ∫_0^∞ u^k kernel(u) du / norm`, with a smooth power-law tail beyond `cutoff`.
fn kernel_moment(kind: TimeDistributionKind, k: i32, cutoff: f64, norm: f64) -> f64 {
    let kf = k as f64;
    let body = match kind {
        TimeDistributionKind::MeanOptimized => {
            gl20().integrate_width(0.0, cutoff, PI, |u| u.powi(k) * mean_opt_kernel(u))
        }
        TimeDistributionKind::VarianceOptimized => {
            gl20().integrate_width(0.0, cutoff, PI, |u| u.powi(k) * var_opt_kernel(u))
        }
    };
    let tail = match kind {
        // Phase-averaged J_p(z)² ≈ 1/(πz): kernel ≈ (2/π) u^{−(2p+1)}.
        TimeDistributionKind::MeanOptimized => {
            let e = 2.0 * BESSEL_ORDER_P - kf;
            2.0 / PI * cutoff.powf(-e) / e
        }
        // kernel ≈ 2π u^{−4} (1 + 2π²/u²) once averaged.
        TimeDistributionKind::VarianceOptimized => {
            let e1 = 3.0 - kf;
            let e2 = 5.0 - kf;
            2.0 * PI * (cutoff.powf(-e1) / e1 + 2.0 * PI * PI * cutoff.powf(-e2) / e2)
        }
    };
    2.0 * (body + tail) / norm
}

/// Moment coefficients recomputed by quadrature.
pub fn quadrature_moments(kind: TimeDistributionKind) -> MomentTable {
    let norm = match kind {
        TimeDistributionKind::MeanOptimized => mean_opt_normalization(),
        TimeDistributionKind::VarianceOptimized => kernel_moment(kind, 0, MOMENT_CUTOFF, 1.0),
    };
    let mean = kernel_moment(kind, 1, MOMENT_CUTOFF, norm);
    let second = kernel_moment(kind, 2, MOMENT_CUTOFF, norm);
    MomentTable {
        mean_abs_coeff: mean,
        second_moment_coeff: second,
        variance_coeff: second - mean * mean,
        normalization: match kind {
            TimeDistributionKind::MeanOptimized => norm,
            TimeDistributionKind::VarianceOptimized => 4.0 * PI * norm,
        },
    }
}

/// Total probability `∫ pdf` by quadrature (unit gap).
pub fn total_mass(kind: TimeDistributionKind) -> f64 {
    let norm = match kind {
        TimeDistributionKind::MeanOptimized => mean_opt_normalization(),
        TimeDistributionKind::VarianceOptimized => 1.0,
    };
    kernel_moment(kind, 0, MOMENT_CUTOFF * 0.75, norm)
}

/// `P(|u| ≤ x)` at unit gap by direct quadrature.
pub fn unit_abs_cdf(kind: TimeDistributionKind, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    2.0 * gl20().integrate_width(0.0, x, 0.25 * PI, |u| unit_pdf(kind, u))
}

/// Tabulated CDF of `|u|` with a rejection-sampled power-law tail.
#[derive(Debug)]
struct SamplerTable {
    nodes: Vec<f64>,
    cdf: Vec<f64>,
    slope: Vec<f64>,
    tail_shape: f64,
    tail_const: f64,
    total: f64,
}

fn sampler_table(kind: TimeDistributionKind) -> &'static SamplerTable {
    static MEAN: OnceLock<SamplerTable> = OnceLock::new();
    static VAR: OnceLock<SamplerTable> = OnceLock::new();
    match kind {
        TimeDistributionKind::MeanOptimized => MEAN.get_or_init(|| build_table(kind)),
        TimeDistributionKind::VarianceOptimized => VAR.get_or_init(|| build_table(kind)),
    }
}

fn build_table(kind: TimeDistributionKind) -> SamplerTable {
    let density = |u: f64| 2.0 * unit_pdf(kind, u);
    let ratio = (TABLE_CUT / TABLE_MIN).ln() / (TABLE_NODES - 1) as f64;
    let mut nodes = Vec::with_capacity(TABLE_NODES + 1);
    nodes.push(0.0);
    for i in 0..TABLE_NODES {
        nodes.push(TABLE_MIN * (ratio * i as f64).exp());
    }
    *nodes.last_mut().expect("nonempty") = TABLE_CUT;
    let mut cdf = Vec::with_capacity(nodes.len());
    let mut acc = CompensatedSum::default();
    cdf.push(0.0);
    for w in nodes.windows(2) {
        acc.add(gl8().integrate(w[0], w[1], density));
        cdf.push(acc.value());
    }
    let below = acc.value();
    let tail_mass = 2.0 * gl20().integrate_width(TABLE_CUT, MOMENT_CUTOFF, PI, |u| unit_pdf(kind, u))
        + match kind {
            TimeDistributionKind::MeanOptimized => {
                let e = 2.0 * BESSEL_ORDER_P;
                2.0 * 2.0 / PI * MOMENT_CUTOFF.powf(-e) / e / mean_opt_normalization()
            }
            TimeDistributionKind::VarianceOptimized => {
                2.0 * 2.0 * PI * MOMENT_CUTOFF.powi(-3) / 3.0
            }
        };
    let total = below + tail_mass;
    for c in &mut cdf {
        *c /= total;
    }
    let mut slope: Vec<f64> = nodes.iter().map(|&u| density(u) / total).collect();
    limit_slopes(&nodes, &cdf, &mut slope);
    let (tail_shape, tail_const) = match kind {
        // 2f(u) ≤ 8(1+ε)/(π N₀) u^{−(2p+1)} for u ≥ T_cut, from (πz/2)(J² + Y²) ↓ 1.
        TimeDistributionKind::MeanOptimized => (
            2.0 * BESSEL_ORDER_P,
            8.0 * 1.001 / (PI * mean_opt_normalization()) / total,
        ),
        // 2f(u) ≤ 8π / (u⁴ (1 − π²/T²)²).
        TimeDistributionKind::VarianceOptimized => {
            let c = 1.0 - PI * PI / (TABLE_CUT * TABLE_CUT);
            (3.0, 8.0 * PI / (c * c) / total)
        }
    };
    SamplerTable {
        nodes,
        cdf,
        slope,
        tail_shape,
        tail_const,
        total,
    }
}

/// Fritsch–Carlson limiter keeping each Hermite segment monotone.
fn limit_slopes(x: &[f64], y: &[f64], m: &mut [f64]) {
    for i in 0..x.len() - 1 {
        let secant = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        if secant <= 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / secant;
        let b = m[i + 1] / secant;
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[i] = tau * a * secant;
            m[i + 1] = tau * b * secant;
        }
    }
}

impl SamplerTable {
    fn cut_mass(&self) -> f64 {
        *self.cdf.last().expect("nonempty")
    }

    fn invert(&self, y: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c <= y).clamp(1, self.cdf.len() - 1) - 1;
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let (p0, p1) = (self.cdf[i], self.cdf[i + 1]);
        let h = x1 - x0;
        let (m0, m1) = (self.slope[i] * h, self.slope[i + 1] * h);
        if p1 <= p0 {
            return x0;
        }
        let hermite = |t: f64| {
            let t2 = t * t;
            let t3 = t2 * t;
            (2.0 * t3 - 3.0 * t2 + 1.0) * p0
                + (t3 - 2.0 * t2 + t) * m0
                + (-2.0 * t3 + 3.0 * t2) * p1
                + (t3 - t2) * m1
        };
        let dhermite = |t: f64| {
            let t2 = t * t;
            (6.0 * t2 - 6.0 * t) * (p0 - p1) + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (3.0 * t2 - 2.0 * t) * m1
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut t = ((y - p0) / (p1 - p0)).clamp(0.0, 1.0);
        for _ in 0..60 {
            let f = hermite(t) - y;
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let d = dhermite(t);
            let mut next = if d > 0.0 { t - f / d } else { 0.5 * (lo + hi) };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() < 1e-15 {
                t = next;
                break;
            }
            t = next;
        }
        x0 + t * h
    }

    fn sample_tail<R: Rng + ?Sized>(&self, kind: TimeDistributionKind, rng: &mut R) -> f64 {
        let pareto = Pareto::new(TABLE_CUT, self.tail_shape).expect("valid Pareto parameters");
        loop {
            let u: f64 = pareto.sample(rng);
            let envelope = self.tail_const * u.powf(-(self.tail_shape + 1.0));
            let target = 2.0 * unit_pdf(kind, u) / self.total;
            let v: f64 = rng.random();
            if v * envelope <= target {
                return u;
            }
        }
    }
}

fn sample_unit<R: Rng + ?Sized>(kind: TimeDistributionKind, rng: &mut R) -> f64 {
    let table = sampler_table(kind);
    let y: f64 = rng.random();
    let magnitude = if y < table.cut_mass() {
        table.invert(y)
    } else {
        table.sample_tail(kind, rng)
    };
    if rng.random::<bool>() {
        magnitude
    } else {
        -magnitude
    }
}

/// Cached `(node, weight·f(node))` pairs on `[0, CHI_CUTOFF]`.
fn chi_nodes(kind: TimeDistributionKind) -> &'static [(f64, f64)] {
    static MEAN: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static VAR: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    let build = || {
        let width = PI / (CHI_CACHED_FREQ + 1.0);
        let panels = (CHI_CUTOFF / width).ceil() as usize;
        let pairs = gl20().pairs();
        let mut out = Vec::with_capacity(panels * pairs.len());
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * width;
            let half = 0.5 * width;
            for &(x, w) in pairs {
                let u = mid + half * x;
                out.push((u, half * w * unit_pdf(kind, u)));
            }
        }
        out
    };
    match kind {
        TimeDistributionKind::MeanOptimized => MEAN.get_or_init(build),
        TimeDistributionKind::VarianceOptimized => VAR.get_or_init(build),
    }
}

/// `χ(w) = 2 ∫_0^∞ cos(w u) f(u) du` at unit gap.
pub fn unit_characteristic_fn(kind: TimeDistributionKind, w: f64) -> f64 {
    let w = w.abs();
    if w <= CHI_CACHED_FREQ {
        let mut acc = CompensatedSum::default();
        for &(u, wf) in chi_nodes(kind) {
            acc.add(wf * (w * u).cos());
        }
        return 2.0 * acc.value();
    }
    let width = PI / (w + 1.0);
    2.0 * gl20().integrate_width(0.0, CHI_CUTOFF, width, |u| (w * u).cos() * unit_pdf(kind, u))
}
