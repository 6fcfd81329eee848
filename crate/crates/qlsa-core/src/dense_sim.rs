//! Dense simulation of the full protocol on small systems: Hermitian
//! embedding, the interpolating Hamiltonian `H(s)`, randomised adiabatic
//! evolution, eigenstate filtering and post-selection.

use std::path::Path;
use std::time::Instant;

use log::warn;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost_model::error_budget;
use crate::error::{domain, Error, Result};
use crate::linalg::*;
use crate::polyapprox::{filter_matrix, FilterSpec, OaaPolynomial};
use crate::sampling::{TimeDistribution, TimeDistributionKind};
use crate::schedule::{build_grid, num_steps_analytic, path_length, step_fidelity, ScheduleGrid};

/// Largest embedded dimension handled by the simulator.
pub const MAX_EMBEDDED_DIM: usize = 128;
/// Relative eigenvalue threshold for the nullspace.
pub const NULLSPACE_TOL: f64 = 1e-10;
/// Invertibility threshold `σ_min > 1e-12 σ_max`.
pub const SINGULAR_TOL: f64 = 1e-12;

/// `A y = b` with user-supplied bounds `N_A ≥ ‖A‖` and `κ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub a_matrix: CMatrix,
    pub b_vector: CVector,
    pub norm_bound: f64,
    pub kappa_bound: f64,
}

impl LinearSystem {
    pub fn new(a_matrix: CMatrix, b_vector: CVector, norm_bound: f64, kappa_bound: f64) -> Result<Self> {
        let m = a_matrix.nrows();
        if m == 0 || a_matrix.ncols() != m {
            return Err(domain(format!("A must be square and nonempty, got {}×{}", m, a_matrix.ncols())));
        }
        if b_vector.len() != m {
            return Err(domain(format!("b has length {}, expected {m}", b_vector.len())));
        }
        if b_vector.norm() == 0.0 || !b_vector.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(domain("b must be nonzero and finite"));
        }
        if !(kappa_bound.is_finite() && kappa_bound >= 1.0) {
            return Err(domain(format!("κ bound must be ≥ 1, got {kappa_bound}")));
        }
        let (sigma_min, sigma_max) = singular_range(&a_matrix);
        if !(sigma_min > SINGULAR_TOL * sigma_max) {
            return Err(Error::Singular { sigma_min, sigma_max });
        }
        if !(norm_bound.is_finite() && norm_bound >= sigma_max * (1.0 - 1e-12)) {
            return Err(domain(format!("norm bound {norm_bound} below ‖A‖ = {sigma_max}")));
        }
        Ok(Self {
            a_matrix,
            b_vector,
            norm_bound,
            kappa_bound,
        })
    }

    pub fn dim(&self) -> usize {
        self.a_matrix.nrows()
    }

    /// Condition number of `A/N_A`.
    pub fn rescaled_condition(&self) -> f64 {
        let (sigma_min, _) = singular_range(&self.a_matrix);
        self.norm_bound / sigma_min
    }

    /// Fails unless `κ_bound` covers the true condition number of `A/N_A`.
    pub fn check_strict(&self) -> Result<()> {
        let k = self.rescaled_condition();
        if k > self.kappa_bound * (1.0 + 1e-10) {
            return Err(domain(format!("κ bound {} below the condition number {k} of A/N_A", self.kappa_bound)));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_system()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_problem_file(&self) -> ProblemFile {
        let m = self.dim();
        let mut matrix = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                matrix.push(Entry::Pair([self.a_matrix[(i, j)].re, self.a_matrix[(i, j)].im]));
            }
        }
        ProblemFile {
            matrix: MatrixEntries::Flat(matrix),
            b: self.b_vector.iter().map(|z| Entry::Pair([z.re, z.im])).collect(),
            norm_bound: self.norm_bound,
            kappa_bound: self.kappa_bound,
        }
    }
}

/// A complex number as `[re, im]` or a bare real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Pair([re, im]) => C64::new(re, im),
            Entry::Real(re) => C64::new(re, 0.0),
        }
    }
}

/// Matrix given row-major as one flat list or as a list of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntries {
    Flat(Vec<Entry>),
    Rows(Vec<Vec<Entry>>),
}

/// JSON problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub matrix: MatrixEntries,
    pub b: Vec<Entry>,
    pub norm_bound: f64,
    pub kappa_bound: f64,
}

impl ProblemFile {
    pub fn into_system(self) -> Result<LinearSystem> {
        let m = self.b.len();
        if m == 0 {
            return Err(Error::Parse("b must be nonempty".into()));
        }
        let flat: Vec<C64> = match self.matrix {
            // A 2×2 real matrix written as rows reads like two [re, im] pairs.
            MatrixEntries::Flat(v) if v.len() == 2 && m == 2 && v.iter().all(|e| matches!(e, Entry::Pair(_))) => v
                .into_iter()
                .flat_map(|e| match e {
                    Entry::Pair(row) => row.map(|x| C64::new(x, 0.0)),
                    Entry::Real(_) => unreachable!(),
                })
                .collect(),
            MatrixEntries::Flat(v) => v.into_iter().map(Entry::value).collect(),
            MatrixEntries::Rows(rows) => {
                if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                    return Err(Error::Parse(format!("matrix rows must form a {m}×{m} array")));
                }
                rows.into_iter().flatten().map(Entry::value).collect()
            }
        };
        if flat.len() != m * m {
            return Err(Error::Parse(format!("matrix has {} entries, expected {}", flat.len(), m * m)));
        }
        let a = CMatrix::from_row_iterator(m, m, flat);
        let b = CVector::from_iterator(m, self.b.into_iter().map(Entry::value));
        LinearSystem::new(a, b, self.norm_bound, self.kappa_bound)
    }
}

/// Hermitian extension `Ā = (1/N_A)[[0, A], [A†, 0]] ⊕ I`, padded to a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedSystem {
    pub abar: CMatrix,
    /// Normalised `[b; 0]`, zero on the padding.
    pub bbar: CVector,
    pub n_qubits: u32,
    /// Size of the original system.
    pub m: usize,
    pub kappa: f64,
}

impl EmbeddedSystem {
    pub fn dim(&self) -> usize {
        self.abar.nrows()
    }

    /// Lower block `x̄[M..2M]` of an embedded vector.
    pub fn solution_block(&self, xbar: &CVector) -> CVector {
        xbar.rows(self.m, self.m).into_owned()
    }
}

pub fn hermitian_embed(sys: &LinearSystem) -> Result<EmbeddedSystem> {
    let m = sys.dim();
    let dim = (2 * m).next_power_of_two();
    if dim > MAX_EMBEDDED_DIM {
        return Err(Error::ResourceCap {
            dim,
            cap: MAX_EMBEDDED_DIM,
        });
    }
    let scale = C64::new(1.0 / sys.norm_bound, 0.0);
    let mut abar = CMatrix::zeros(dim, dim);
    abar.view_mut((0, m), (m, m)).copy_from(&(&sys.a_matrix * scale));
    abar.view_mut((m, 0), (m, m)).copy_from(&(sys.a_matrix.adjoint() * scale));
    for k in 2 * m..dim {
        abar[(k, k)] = ONE;
    }
    let mut bbar = CVector::zeros(dim);
    let nb = sys.b_vector.norm();
    bbar.rows_mut(0, m).copy_from(&(&sys.b_vector / C64::new(nb, 0.0)));
    Ok(EmbeddedSystem {
        abar,
        bbar,
        n_qubits: dim.trailing_zeros(),
        m,
        kappa: sys.kappa_bound,
    })
}

/// Normalised `A⁻¹b` by a dense LU solve.
pub fn classical_solve(sys: &LinearSystem) -> Result<CVector> {
    let (sigma_min, sigma_max) = singular_range(&sys.a_matrix);
    if !(sigma_min > SINGULAR_TOL * sigma_max) {
        return Err(Error::Singular { sigma_min, sigma_max });
    }
    let x = sys
        .a_matrix
        .clone()
        .lu()
        .solve(&sys.b_vector)
        .ok_or(Error::Singular { sigma_min, sigma_max })?;
    let n = x.norm();
    Ok(x / C64::new(n, 0.0))
}

fn pauli_z() -> CMatrix {
    real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

fn pauli_x() -> CMatrix {
    real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

fn plus() -> CVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)])
}

fn minus() -> CVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_vec(vec![C64::new(h, 0.0), C64::new(-h, 0.0)])
}

fn basis(i: usize) -> CVector {
    let mut v = CVector::zeros(2);
    v[i] = ONE;
    v
}

/// `A(s) = (1−s) Z ⊗ I + s X ⊗ Ā`.
pub fn interpolated_matrix(emb: &EmbeddedSystem, s: f64) -> CMatrix {
    let n = emb.dim();
    kron(&pauli_z(), &identity(n)) * C64::new(1.0 - s, 0.0) + kron(&pauli_x(), &emb.abar) * C64::new(s, 0.0)
}

/// `|b̄⟩ = |+⟩ ⊗ |b⟩` on the doubled space.
pub fn bbar_state(emb: &EmbeddedSystem) -> CVector {
    kron_vec(&plus(), &emb.bbar)
}

/// `H(s) = σ₊ ⊗ A(s)P⊥ + σ₋ ⊗ P⊥A(s)` with `σ₊ = |0⟩⟨1|`.
pub fn build_hamiltonian(emb: &EmbeddedSystem, s: f64) -> CMatrix {
    let a = interpolated_matrix(emb, s);
    let n = a.nrows();
    let b = bbar_state(emb);
    let p_perp = identity(n) - outer(&b, &b);
    let upper = &a * &p_perp;
    let mut h = CMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, n), (n, n)).copy_from(&upper);
    h.view_mut((n, 0), (n, n)).copy_from(&upper.adjoint());
    h
}

/// Adiabatic eigenstate `|y(s)⟩ = |0⟩ ⊗ A(s)⁻¹|b̄⟩/‖·‖`.
pub fn y_state(emb: &EmbeddedSystem, s: f64) -> CVector {
    let b = bbar_state(emb);
    let x = interpolated_matrix(emb, s).lu().solve(&b).expect("A(s) is invertible for s in [0, 1]");
    let n = x.norm();
    kron_vec(&basis(0), &(x / C64::new(n, 0.0)))
}

/// Spurious nullspace vector `|ȳ⟩ = |1⟩ ⊗ |b̄⟩`.
pub fn ybar_state(emb: &EmbeddedSystem) -> CVector {
    kron_vec(&basis(1), &bbar_state(emb))
}

/// Initial state `|0, −, b⟩`.
pub fn initial_state(emb: &EmbeddedSystem) -> CVector {
    kron_vec(&basis(0), &kron_vec(&minus(), &emb.bbar))
}

/// Normalised solution block read off the `|0, +⟩` component of a protocol state.
pub fn decode_solution(emb: &EmbeddedSystem, psi: &CVector) -> CVector {
    let n = emb.dim();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let x = (psi.rows(0, n) + psi.rows(n, n)) * C64::new(h, 0.0);
    let sol = emb.solution_block(&x);
    let nrm = sol.norm();
    if nrm > 0.0 {
        sol / C64::new(nrm, 0.0)
    } else {
        sol
    }
}

/// Numerical nullspace and spectral gap of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Nullspace {
    /// Orthonormal basis as columns.
    pub basis: CMatrix,
    pub gap: f64,
    pub tol: f64,
}

impl Nullspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }
}

/// Eigenvectors with `|λ| < tol` (default `1e-10·‖H‖`) and the smallest nonzero `|λ|`.
pub fn nullspace_and_gap(h: &CMatrix, tol: Option<f64>) -> Result<Nullspace> {
    let eig = HermitianEigen::new(h);
    let tol = tol.unwrap_or(NULLSPACE_TOL * eig.norm().max(f64::MIN_POSITIVE));
    let mut cols = Vec::new();
    let mut gap = f64::INFINITY;
    for (j, &l) in eig.values.iter().enumerate() {
        if l.abs() < tol {
            cols.push(eig.vectors.column(j).into_owned());
        } else {
            gap = gap.min(l.abs());
        }
    }
    if cols.len() != 2 {
        return Err(Error::Structure { found: cols.len() });
    }
    if gap < 10.0 * tol {
        warn!("nonzero eigenvalue {gap:e} within 10× of the nullspace tolerance {tol:e}");
    }
    Ok(Nullspace {
        basis: CMatrix::from_columns(&cols),
        gap,
        tol,
    })
}

/// Hamiltonian-simulation model for each adiabatic step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ProtocolMode {
    /// Exact `e^{−itH}`.
    Ideal,
    /// Amplified truncated propagator with per-step error `delta`.
    Emulated { delta: f64 },
}

/// Protocol state with its accumulated post-selection weight.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticState {
    pub psi: CVector,
    pub weight: f64,
}

/// Precomputed eigendecompositions of `H(s_j)` along a schedule.
#[derive(Debug, Clone)]
pub struct ProtocolPlan {
    pub emb: EmbeddedSystem,
    pub grid: ScheduleGrid,
    steps: Vec<HermitianEigen>,
    final_eig: HermitianEigen,
    pub y0: CVector,
    pub y1: CVector,
    pub ybar: CVector,
}

impl ProtocolPlan {
    pub fn new(emb: &EmbeddedSystem, grid: &ScheduleGrid) -> Self {
        let steps = grid.s.iter().skip(1).map(|&s| HermitianEigen::new(&build_hamiltonian(emb, s))).collect();
        Self {
            emb: emb.clone(),
            grid: grid.clone(),
            steps,
            final_eig: HermitianEigen::new(&build_hamiltonian(emb, 1.0)),
            y0: initial_state(emb),
            y1: y_state(emb, 1.0),
            ybar: ybar_state(emb),
        }
    }

    pub fn steps(&self) -> usize {
        self.steps.len()
    }

    /// Evolution times `t_j`, one per step.
    pub fn sample_times<R: Rng + ?Sized>(&self, kind: TimeDistributionKind, rng: &mut R) -> Result<Vec<f64>> {
        self.grid.delta[1..=self.steps.len()]
            .iter()
            .map(|&d| Ok(TimeDistribution::new(kind, d)?.sample(rng)))
            .collect()
    }

    /// Applies the steps with the given times to `|y(0)⟩`.
    pub fn evolve(&self, times: &[f64], mode: ProtocolMode) -> Result<AdiabaticState> {
        if let ProtocolMode::Emulated { delta } = mode {
            if !(delta > 0.0 && delta <= 0.01) {
                return Err(domain(format!("emulated per-step error must lie in (0, 0.01], got {delta}")));
            }
        }
        let mut psi = self.y0.clone();
        let mut weight = 1.0;
        for (eig, &t) in self.steps.iter().zip(times) {
            let fv: Vec<C64> = match mode {
                ProtocolMode::Ideal => eig.values.iter().map(|&l| C64::from_polar(1.0, -t * l)).collect(),
                ProtocolMode::Emulated { delta } => {
                    let poly = OaaPolynomial::new(t, delta)?;
                    eig.values.iter().map(|&l| poly.eval(l)).collect()
                }
            };
            psi = eig.apply_values_to(&fv, &psi);
            if let ProtocolMode::Emulated { .. } = mode {
                let n2 = psi.norm_squared();
                weight *= n2.min(1.0);
                psi /= C64::new(n2.sqrt(), 0.0);
            }
        }
        Ok(AdiabaticState { psi, weight })
    }

    /// `R_{2l}(H(1), Δ)` applied through the stored eigendecomposition.
    pub fn filter(&self, state: &AdiabaticState, spec: &FilterSpec) -> FilterOutcome {
        let fv: Vec<C64> = self
            .final_eig
            .values
            .iter()
            .map(|&l| C64::new(crate::polyapprox::filter_value(l, spec), 0.0))
            .collect();
        postselect(self.final_eig.apply_values_to(&fv, &state.psi), state.weight, &self.y1)
    }
}

/// One protocol run: sampled times followed by evolution.
pub fn run_protocol<R: Rng + ?Sized>(
    plan: &ProtocolPlan,
    kind: TimeDistributionKind,
    mode: ProtocolMode,
    rng: &mut R,
) -> Result<AdiabaticState> {
    let times = plan.sample_times(kind, rng)?;
    plan.evolve(&times, mode)
}

/// Result of filtering and post-selection.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    /// Acceptance probability `weight·‖Rψ‖²`.
    pub acceptance: f64,
    pub output: CVector,
    /// 1-norm distance `2√(1 − |⟨y(1)|out⟩|²)` to the target.
    pub distance: f64,
}

fn postselect(r_psi: CVector, weight: f64, target: &CVector) -> FilterOutcome {
    let n2 = r_psi.norm_squared();
    let output = if n2 > 0.0 { r_psi / C64::new(n2.sqrt(), 0.0) } else { r_psi };
    let ov = target.dotc(&output);
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
    let d2 = (&output - target * phase).norm_squared();
    let infidelity = (d2 * (1.0 - d2 / 4.0)).clamp(0.0, 1.0);
    FilterOutcome {
        acceptance: weight * n2,
        output,
        distance: 2.0 * infidelity.sqrt(),
    }
}

/// Applies `R = filter_matrix(H(1), spec)` to the state and post-selects.
pub fn filter_and_postselect(state: &AdiabaticState, spec: &FilterSpec, emb: &EmbeddedSystem) -> Result<FilterOutcome> {
    let r = filter_matrix(&build_hamiltonian(emb, 1.0), spec)?;
    Ok(postselect(&r * &state.psi, state.weight, &y_state(emb, 1.0)))
}

/// Trial-averaged density matrix `Σ wᵢ|ψᵢ⟩⟨ψᵢ| / Σ wᵢ`.
pub fn average_density(states: &[AdiabaticState]) -> CMatrix {
    let n = states.first().map_or(0, |s| s.psi.len());
    let mut rho = CMatrix::zeros(n, n);
    let mut total = 0.0;
    for s in states {
        rho += outer(&s.psi, &s.psi) * C64::new(s.weight, 0.0);
        total += s.weight;
    }
    if total > 0.0 {
        rho /= C64::new(total, 0.0);
    }
    rho
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Stats {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self::default();
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
        }
    }

    /// Ratio estimator `Σ wᵢxᵢ / Σ wᵢ` with its linearised standard error.
    pub fn weighted(xs: &[f64], ws: &[f64]) -> Self {
        let wsum: f64 = ws.iter().sum();
        let n = xs.len();
        if n == 0 || wsum <= 0.0 {
            return Self { n, ..Self::default() };
        }
        let mean = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / wsum;
        let ss: f64 = xs.iter().zip(ws).map(|(x, w)| (w * (x - mean)).powi(2)).sum();
        let scale = if n > 1 { n as f64 / (n - 1) as f64 } else { 0.0 };
        Self {
            mean,
            stderr: (scale * ss).sqrt() / wsum,
            n,
        }
    }
}

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub eps: f64,
    pub gamma: f64,
    pub kind: TimeDistributionKind,
    pub mode: SimulationMode,
    pub trials: usize,
    pub seed: u64,
    /// Step count override; the analytic count is used when absent.
    pub q: Option<u64>,
    pub strict: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            eps: 0.1,
            gamma: crate::schedule::DEFAULT_GAMMA,
            kind: TimeDistributionKind::MeanOptimized,
            mode: SimulationMode::Ideal,
            trials: 1000,
            seed: 0,
            q: None,
            strict: false,
        }
    }
}

/// Top-level mode; the emulated per-step error defaults to `ε_AD/(4.1q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulationMode {
    Ideal,
    Emulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub trials: usize,
    pub seed: u64,
    pub q: u64,
    pub kappa_bound: f64,
    pub eps: f64,
    pub gamma: f64,
    pub kind: TimeDistributionKind,
    pub mode: ProtocolMode,
    pub embedded_dim: usize,
    /// `|⟨y(1)|ψ⟩|²` before filtering.
    pub fidelity_pre_filter: Stats,
    /// Ideal-protocol lower bound `(1 − L²/q²)^q`.
    pub fidelity_bound: f64,
    /// Per-attempt acceptance probability.
    pub success_rate: Stats,
    /// 1-norm distance to `|y(1)⟩`, weighted by acceptance.
    pub trace_distance_post: Stats,
    pub max_leak: f64,
    pub eps_ad: f64,
    pub eps_p: f64,
    pub filter_degree: u64,
    pub wall_time_s: f64,
}

impl SimulationResult {
    /// Fraction of successful post-selections.
    pub fn acceptance(&self) -> f64 {
        self.success_rate.mean
    }
}

struct TrialRecord {
    fidelity: f64,
    acceptance: f64,
    distance: f64,
    leak: f64,
}

/// Generator for trial `trial` under master seed `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs `cfg.trials` independent protocol attempts in parallel.
pub fn simulate(sys: &LinearSystem, cfg: &SimulationConfig) -> Result<SimulationResult> {
    let start = Instant::now();
    if cfg.trials == 0 {
        return Err(domain("trials must be ≥ 1"));
    }
    if cfg.strict {
        sys.check_strict()?;
    }
    let kappa = sys.kappa_bound;
    let emb = hermitian_embed(sys)?;
    let q = match cfg.q {
        Some(q) => q,
        None => num_steps_analytic(kappa)?,
    };
    let grid = build_grid(kappa, q)?;
    let budget = error_budget(cfg.eps, cfg.gamma, q)?;
    let spec = FilterSpec::new(1.0 / kappa, budget.eps_p)?;
    let mode = match cfg.mode {
        SimulationMode::Ideal => ProtocolMode::Ideal,
        SimulationMode::Emulated => ProtocolMode::Emulated {
            delta: budget.delta_step,
        },
    };
    let plan = ProtocolPlan::new(&emb, &grid);
    let records: Vec<TrialRecord> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, trial);
            let state = run_protocol(&plan, cfg.kind, mode, &mut rng)?;
            let out = plan.filter(&state, &spec);
            Ok(TrialRecord {
                fidelity: plan.y1.dotc(&state.psi).norm_sqr(),
                acceptance: out.acceptance,
                distance: out.distance,
                leak: plan.ybar.dotc(&state.psi).norm(),
            })
        })
        .collect::<Result<_>>()?;
    let fid: Vec<f64> = records.iter().map(|r| r.fidelity).collect();
    let acc: Vec<f64> = records.iter().map(|r| r.acceptance).collect();
    let dist: Vec<f64> = records.iter().map(|r| r.distance).collect();
    Ok(SimulationResult {
        trials: cfg.trials,
        seed: cfg.seed,
        q,
        kappa_bound: kappa,
        eps: cfg.eps,
        gamma: cfg.gamma,
        kind: cfg.kind,
        mode,
        embedded_dim: emb.dim(),
        fidelity_pre_filter: Stats::from_samples(&fid),
        fidelity_bound: step_fidelity(path_length(kappa), q as f64),
        success_rate: Stats::from_samples(&acc),
        trace_distance_post: Stats::weighted(&dist, &acc),
        max_leak: records.iter().map(|r| r.leak).fold(0.0, f64::max),
        eps_ad: budget.eps_ad,
        eps_p: budget.eps_p,
        filter_degree: spec.degree(),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Trace distance between trial-averaged ideal and emulated final states,
/// using the same sampled times for both.
pub fn emulation_trace_distance(
    plan: &ProtocolPlan,
    kind: TimeDistributionKind,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let pairs: Vec<(AdiabaticState, AdiabaticState)> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let times = plan.sample_times(kind, &mut rng)?;
            Ok((
                plan.evolve(&times, ProtocolMode::Ideal)?,
                plan.evolve(&times, ProtocolMode::Emulated { delta })?,
            ))
        })
        .collect::<Result<_>>()?;
    let (ideal, emulated): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok(trace_norm(&(average_density(&ideal) - average_density(&emulated))))
}

/// Random system of size `m` with singular values in `[1/κ, 1]`, `N_A = 1`.
pub fn random_system<R: Rng + ?Sized>(m: usize, kappa: f64, rng: &mut R) -> Result<LinearSystem> {
    let a = random_with_singular_values(m, 1.0 / kappa, rng);
    let b = random_state(m, rng);
    LinearSystem::new(a, b, 1.0, kappa)
}

/// Outcome of one family of randomised inequality checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub instances: usize,
    pub violations: usize,
    /// Smallest observed `rhs − lhs`.
    pub worst_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }
}

const LEMMA_SLACK: f64 = 1e-12;

struct Tally {
    check: LemmaCheck,
}

impl Tally {
    fn new(name: &str) -> Self {
        Self {
            check: LemmaCheck {
                name: name.to_string(),
                instances: 0,
                violations: 0,
                worst_slack: f64::INFINITY,
            },
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64) {
        let slack = rhs - lhs;
        self.check.worst_slack = self.check.worst_slack.min(slack);
        if slack < -LEMMA_SLACK * (1.0 + rhs.abs()) {
            self.check.violations += 1;
        }
    }
}

fn random_perturbation<R: Rng + ?Sized>(n: usize, delta: f64, rng: &mut R) -> CMatrix {
    let size = delta * rng.random::<f64>();
    if size == 0.0 {
        return CMatrix::zeros(n, n);
    }
    random_with_norm(n, n, size, rng)
}

/// Randomised checks of the trace-norm, perturbation and filter-error inequalities.
pub fn lemma_property_suite<R: Rng + ?Sized>(instances: usize, rng: &mut R) -> LemmaReport {
    let mut holder = Tally::new("holder_1norm_product");
    let mut stability = Tally::new("perturbed_1norm");
    let mut prob = Tally::new("perturbed_probability");
    let mut filt = Tally::new("filter_projection_error");
    for _ in 0..instances {
        let n = rng.random_range(2..=16);

        let a = random_with_norm(n, n, rng.random_range(0.1..3.0), rng);
        let b = random_with_norm(n, n, rng.random_range(0.1..3.0), rng);
        let lhs = trace_norm(&(&a * &b));
        let rhs = (trace_norm(&a) * spectral_norm(&b)).min(spectral_norm(&a) * trace_norm(&b));
        holder.record(lhs, rhs);
        holder.check.instances += 1;

        let delta = 10f64.powf(rng.random_range(-6.0..-0.5));
        let rho = random_density(n, rng.random_range(1..=n), rng);
        let at = &a + random_perturbation(n, delta, rng);
        let bt = &b + random_perturbation(n, delta, rng);
        let lhs = trace_norm(&(&at * &rho * &bt - &a * &rho * &b));
        let rhs = delta * (spectral_norm(&a) + spectral_norm(&b)) + delta * delta;
        stability.record(lhs, rhs);
        stability.check.instances += 1;

        let p = (&rho * a.adjoint() * &a).trace().re;
        let pt = (&rho * at.adjoint() * &at).trace().re;
        let na = spectral_norm(&a);
        prob.record(p - 2.0 * delta * na, pt);
        prob.record(pt, p + 2.0 * delta * na + delta * delta);
        prob.check.instances += 1;

        let capital_delta = rng.random_range(0.02..0.28);
        let eps_p = 10f64.powf(rng.random_range(-10.0..-1.0));
        let spec = FilterSpec::new(capital_delta, eps_p).expect("valid filter parameters");
        let null = rng.random_range(1..n);
        let vals: Vec<f64> = (0..n)
            .map(|k| {
                if k < null {
                    0.0
                } else {
                    let mag = rng.random_range(capital_delta..=1.0);
                    if rng.random::<bool>() {
                        mag
                    } else {
                        -mag
                    }
                }
            })
            .collect();
        let u = random_unitary(n, rng);
        let h = with_spectrum(&u, &vals);
        let r = filter_matrix(&h, &spec).expect("spectrum within [−1, 1]");
        let mut p0 = CMatrix::zeros(n, n);
        for k in 0..null {
            let c = u.column(k).into_owned();
            p0 += outer(&c, &c);
        }
        let xi = random_density(n, rng.random_range(1..=n), rng);
        filt.record(spectral_norm(&(&r - &p0)), eps_p);
        let lhs = trace_norm(&(&r * &xi * r.adjoint() - &p0 * &xi * &p0));
        filt.record(lhs, 2.0 * eps_p + eps_p * eps_p);
        filt.check.instances += 1;
    }
    LemmaReport {
        checks: vec![holder.check, stability.check, prob.check, filt.check],
    }
}

/// Eigenvalues of `H(s)` in ascending order.
pub fn spectrum(h: &CMatrix) -> DVector<f64> {
    let mut v = HermitianEigen::new(h).values;
    v.as_mut_slice().sort_by(|a, b| a.total_cmp(b));
    v
}
