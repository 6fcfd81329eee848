//! Figure data on fixed grids.
//!
//! | figure | columns |
//! |--------|---------|
//! | fig1 | `kappa, q_expected_per_kappa, q_star_per_kappa, reference_per_kappa` |
//! | fig2 | `log10_tau, log10_delta, order_exact, order_bound, order_gap` |
//! | fig3 | `kappa, q_exact, q_analytic, ratio, ratio_unceiled` |
//! | fig4 | `kappa, adiabatic_over_filtering` |
//! | fig5 | `kappa, stddev_over_mean_mean_opt, stddev_over_mean_var_opt` |

use qlsa_core::cost_model::{adiabatic_cost_stddev_with, adiabatic_expected_cost_with, reference_numeric_cost, total_query_bound};
use qlsa_core::polyapprox::{truncation_order, truncation_order_bound};
use qlsa_core::sampling::TimeDistributionKind;
use qlsa_core::schedule::{num_steps_analytic, num_steps_analytic_real, num_steps_exact, ProblemParams, DEFAULT_GAMMA};
use qlsa_core::Result;
use rayon::prelude::*;

use crate::svg::{heatmap, line_chart, Series};
use crate::Figure;

const EPS: f64 = 1e-10;

/// Numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        let j = self.columns.iter().position(|c| c == name).expect("known column");
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(|x| x.to_string())).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }
}

pub fn name(fig: Figure) -> &'static str {
    match fig {
        Figure::Fig1 => "fig1",
        Figure::Fig2 => "fig2",
        Figure::Fig3 => "fig3",
        Figure::Fig4 => "fig4",
        Figure::Fig5 => "fig5",
        Figure::All => "all",
    }
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (points - 1) as f64))
        .collect()
}

fn breakdowns(kappas: &[f64]) -> Result<Vec<qlsa_core::cost_model::CostBreakdown>> {
    kappas
        .par_iter()
        .map(|&k| total_query_bound(&ProblemParams::new(k, EPS, 1.0, DEFAULT_GAMMA)?, 1, 2))
        .collect()
}

fn fig1() -> Result<Table> {
    let kappas = log_grid(2.0, 6.0, 41);
    let mut t = Table::new(&["kappa", "q_expected_per_kappa", "q_star_per_kappa", "reference_per_kappa"]);
    for (k, b) in kappas.iter().zip(breakdowns(&kappas)?) {
        t.push(vec![*k, b.q_expected / k, b.q_star / k, reference_numeric_cost(*k, EPS) / k]);
    }
    Ok(t)
}

fn fig2() -> Result<Table> {
    let cells: Vec<(f64, f64)> = (0..=55)
        .flat_map(|iy| (0..=44).map(move |ix| (0.5 + 0.1 * iy as f64, -12.0 + 0.25 * ix as f64)))
        .collect();
    let rows: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(y, x)| {
            let (tau, delta) = (10f64.powf(y), 10f64.powf(x));
            let e = truncation_order(tau, delta)? as f64;
            let b = truncation_order_bound(tau, delta)? as f64;
            Ok(vec![y, x, e, b, b - e])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["log10_tau", "log10_delta", "order_exact", "order_bound", "order_gap"]);
    t.rows = rows;
    Ok(t)
}

fn fig3() -> Result<Table> {
    let mut t = Table::new(&["kappa", "q_exact", "q_analytic", "ratio", "ratio_unceiled"]);
    for k in log_grid(3.0, 6.0, 31) {
        let e = num_steps_exact(k, DEFAULT_GAMMA)? as f64;
        let a = num_steps_analytic(k)? as f64;
        t.push(vec![k, e, a, a / e, num_steps_analytic_real(k) / e]);
    }
    Ok(t)
}

fn fig4() -> Result<Table> {
    let kappas = log_grid(2.0, 6.0, 41);
    let mut t = Table::new(&["kappa", "adiabatic_over_filtering"]);
    for (k, b) in kappas.iter().zip(breakdowns(&kappas)?) {
        t.push(vec![*k, b.adiabatic_expected / b.filtering]);
    }
    Ok(t)
}

fn fig5() -> Result<Table> {
    let kappas = log_grid(2.0, 6.0, 41);
    let mut t = Table::new(&["kappa", "stddev_over_mean_mean_opt", "stddev_over_mean_var_opt"]);
    for (k, b) in kappas.iter().zip(breakdowns(&kappas)?) {
        let var_kind = TimeDistributionKind::VarianceOptimized;
        let var_mean = adiabatic_expected_cost_with(var_kind, *k, 1.0, b.budget.eps_ad, b.q as f64);
        t.push(vec![
            *k,
            b.adiabatic_stddev / b.adiabatic_expected,
            adiabatic_cost_stddev_with(var_kind, *k, 1.0) / var_mean,
        ]);
    }
    Ok(t)
}

pub fn table(fig: Figure) -> Result<Table> {
    match fig {
        Figure::Fig1 => fig1(),
        Figure::Fig2 => fig2(),
        Figure::Fig3 => fig3(),
        Figure::Fig4 => fig4(),
        Figure::Fig5 => fig5(),
        Figure::All => unreachable!("expanded by the caller"),
    }
}

fn series(t: &Table, label: &str, x: &str, y: &str) -> Series {
    Series {
        label: label.to_string(),
        points: t.column(x).into_iter().zip(t.column(y)).collect(),
    }
}

pub fn svg_for(fig: Figure, t: &Table) -> String {
    match fig {
        Figure::Fig1 => line_chart(
            "Query count in units of κ (ε = 1e-10)",
            "κ",
            "Q / κ",
            true,
            &[
                series(t, "expected Q", "kappa", "q_expected_per_kappa"),
                series(t, "Q*", "kappa", "q_star_per_kappa"),
                series(t, "reference", "kappa", "reference_per_kappa"),
            ],
        ),
        Figure::Fig2 => {
            let ys = t.column("log10_tau");
            let xs = t.column("log10_delta");
            let gap = t.column("order_gap");
            heatmap(
                "Truncation order: bound minus exact",
                "log10 δ",
                "log10 τ",
                &xs.into_iter().zip(ys).zip(gap).map(|((x, y), v)| (x, y, v)).collect::<Vec<_>>(),
            )
        }
        Figure::Fig3 => line_chart(
            "Analytic over exact step count",
            "κ",
            "ratio",
            true,
            &[
                series(t, "ceiled", "kappa", "ratio"),
                series(t, "unceiled", "kappa", "ratio_unceiled"),
            ],
        ),
        Figure::Fig4 => line_chart(
            "Adiabatic over filtering cost",
            "κ",
            "ratio",
            true,
            &[series(t, "adiabatic / filtering", "kappa", "adiabatic_over_filtering")],
        ),
        Figure::Fig5 => line_chart(
            "Standard deviation over expected adiabatic cost",
            "κ",
            "ratio",
            true,
            &[
                series(t, "mean-optimized", "kappa", "stddev_over_mean_mean_opt"),
                series(t, "variance-optimized", "kappa", "stddev_over_mean_var_opt"),
            ],
        ),
        Figure::All => unreachable!("expanded by the caller"),
    }
}
