//! Composite Gauss-Legendre quadrature.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

use crate::special_fns::CompensatedSum;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pairs: Vec<(f64, f64)>,
}

impl Rule {
    pub fn new(degree: usize) -> Self {
        let gl = GaussLegendre::new(NonZeroUsize::new(degree.max(1)).expect("nonzero"));
        Self {
            pairs: gl.as_node_weight_pairs().to_vec(),
        }
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn degree(&self) -> usize {
        self.pairs.len()
    }

    /// Integral of `f` over `[a, b]` with a single panel.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = CompensatedSum::default();
        for &(x, w) in &self.pairs {
            acc.add(w * f(mid + half * x));
        }
        acc.value() * half
    }

    /// Integral over `[a, b]` split into `panels` equal panels.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let n = panels.max(1);
        let h = (b - a) / n as f64;
        let mut acc = CompensatedSum::default();
        for k in 0..n {
            let lo = a + h * k as f64;
            let hi = if k + 1 == n { b } else { lo + h };
            acc.add(self.integrate(lo, hi, &mut f));
        }
        acc.value()
    }

    /// Integral over `[a, b]` with panels no wider than `width`.
    pub fn integrate_width<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, width: f64, f: F) -> f64 {
        let panels = ((b - a) / width).ceil().max(1.0) as usize;
        self.integrate_panels(a, b, panels, f)
    }
}

/// Shared 20-point rule.
pub fn gl20() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| Rule::new(20))
}

/// Shared 8-point rule.
pub fn gl8() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| Rule::new(8))
}
