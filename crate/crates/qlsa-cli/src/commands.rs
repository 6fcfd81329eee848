use std::fmt;
use std::fs;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use qlsa_core::cost_model::{compare_state_of_art, crossover_kappa, total_query_bound, CostBreakdown};
use qlsa_core::dense_sim::{classical_solve, simulate as run_simulation, LinearSystem, SimulationConfig, SimulationMode};
use qlsa_core::sampling::{unit_pdf, TimeDistribution, TimeDistributionKind};
use qlsa_core::schedule::{path_endpoints, path_length, ProblemParams};
use qlsa_core::Error;

use crate::figures::{self, Table};
use crate::{CompareArgs, EstimateArgs, Figure, FiguresArgs, Format, Mode, OutputArgs, SampleDistArgs, SimulateArgs, SweepArgs};

/// Version of every JSON document the CLI emits.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Parse(_)) => 3,
            CliError::Core(Error::ResourceCap { .. }) => 4,
            CliError::Core(_) | CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

fn emit(out: &OutputArgs, content: &str) -> Result<(), CliError> {
    match &out.output {
        Some(path) => fs::write(path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn format_or(out: &OutputArgs, default: Format, allowed: &[Format]) -> Result<Format, CliError> {
    let f = out.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Usage(format!("format {f:?} is not available for this command")))
    }
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn document(command: &str, body: impl Serialize) -> Value {
    let mut map = Map::new();
    map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    map.insert("command".into(), json!(command));
    if let Value::Object(fields) = serde_json::to_value(body).expect("serializable body") {
        map.extend(fields);
    }
    Value::Object(map)
}

fn flatten_into(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_into(&key, x, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// CSV with one row per record and dotted column names for nested fields.
fn records_csv(records: &[Value]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (i, r) in records.iter().enumerate() {
        let mut cells = Vec::new();
        flatten_into("", r, &mut cells);
        if i == 0 {
            w.write_record(cells.iter().map(|(k, _)| k.as_str())).expect("in-memory write");
        }
        w.write_record(cells.iter().map(|(_, v)| v.as_str())).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

#[derive(Serialize)]
struct EstimateDoc<'a> {
    params: &'a ProblemParams,
    a_qubits: u64,
    dimension: u64,
    v_a: f64,
    v_b: f64,
    path_length: f64,
    #[serde(flatten)]
    breakdown: &'a CostBreakdown,
}

pub fn estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let p = &args.problem;
    let params = ProblemParams::new(p.kappa, p.eps, p.alpha, p.gamma)?;
    let b = total_query_bound(&params, args.a_qubits, args.dimension)?;
    let (v_a, v_b) = path_endpoints(params.kappa);
    let doc = EstimateDoc {
        params: &params,
        a_qubits: args.a_qubits,
        dimension: args.dimension,
        v_a,
        v_b,
        path_length: path_length(params.kappa),
        breakdown: &b,
    };
    let content = match format_or(&args.out, Format::Json, &[Format::Json, Format::Csv])? {
        Format::Csv => records_csv(&[serde_json::to_value(&doc).expect("serializable")]),
        _ => to_json(&document("estimate", &doc)),
    };
    emit(&args.out, &content)
}

fn kappa_grid(lo: f64, hi: f64, points: usize, linear: bool) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0 && hi >= lo && points >= 1) {
        return Err(CliError::Usage(format!("κ range [{lo}, {hi}] with {points} points is empty")));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let t = |i: usize| i as f64 / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points)
        .map(|i| {
            if linear {
                lo + (hi - lo) * t(i)
            } else {
                10f64.powf(lo.log10() + (hi.log10() - lo.log10()) * t(i))
            }
        })
        .collect();
    grid[0] = lo;
    grid[points - 1] = hi;
    Ok(grid)
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let grid = kappa_grid(args.kappa_min, args.kappa_max, args.points, args.linear)?;
    let rows: Vec<CostBreakdown> = grid
        .par_iter()
        .map(|&k| {
            let params = ProblemParams::new(k, args.eps, args.alpha, args.gamma)?;
            total_query_bound(&params, args.a_qubits, args.dimension)
        })
        .collect::<Result<_, Error>>()?;
    let content = match format_or(&args.out, Format::Csv, &[Format::Json, Format::Csv])? {
        Format::Json => to_json(&document("sweep", json!({ "rows": rows }))),
        _ => {
            let records: Vec<Value> = rows.iter().map(|r| serde_json::to_value(r).expect("serializable")).collect();
            records_csv(&records)
        }
    };
    emit(&args.out, &content)
}

#[derive(Serialize)]
struct SampleSummary {
    kind: TimeDistributionKind,
    delta: f64,
    samples: usize,
    seed: u64,
    mean_abs: f64,
    var_abs: f64,
    second_moment: f64,
    reference_mean_abs: f64,
    reference_var_abs: f64,
    rel_err_mean: f64,
    rel_err_var: f64,
    quantiles_abs: Map<String, Value>,
}

pub fn sample_dist(args: &SampleDistArgs) -> Result<(), CliError> {
    if args.samples < 2 {
        return Err(CliError::Usage("samples must be at least 2".into()));
    }
    let kind: TimeDistributionKind = args.dist.into();
    let dist = TimeDistribution::new(kind, args.delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut xs: Vec<f64> = (0..args.samples).map(|_| dist.sample(&mut rng).abs()).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let second = xs.iter().map(|x| x * x).sum::<f64>() / n;
    let moments = dist.moments();
    let reference_mean = moments.mean_abs(args.delta);
    let reference_var = moments.variance(args.delta);
    let format = format_or(&args.out, Format::Json, &[Format::Json, Format::Csv])?;
    if format == Format::Csv {
        return emit(&args.out, &histogram(&xs, args.delta, args.bins, kind)?.to_csv());
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let mut quantiles = Map::new();
    for (label, p) in [("p50", 0.5), ("p90", 0.9), ("p99", 0.99), ("p999", 0.999)] {
        let idx = ((p * n) as usize).min(xs.len() - 1);
        quantiles.insert(label.into(), json!(xs[idx]));
    }
    let summary = SampleSummary {
        kind,
        delta: args.delta,
        samples: args.samples,
        seed: args.seed,
        mean_abs: mean,
        var_abs: var,
        second_moment: second,
        reference_mean_abs: reference_mean,
        reference_var_abs: reference_var,
        rel_err_mean: mean / reference_mean - 1.0,
        rel_err_var: var / reference_var - 1.0,
        quantiles_abs: quantiles,
    };
    emit(&args.out, &to_json(&document("sample-dist", &summary)))
}

fn histogram(xs: &[f64], delta: f64, bins: usize, kind: TimeDistributionKind) -> Result<Table, CliError> {
    if bins == 0 {
        return Err(CliError::Usage("bins must be at least 1".into()));
    }
    let top = 20.0;
    let width = top / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in xs {
        let u = x * delta;
        if u < top {
            counts[((u / width) as usize).min(bins - 1)] += 1;
        }
    }
    let n = xs.len() as f64;
    let mut table = Table::new(&["u_lo", "u_hi", "empirical_density", "density"]);
    for (i, &c) in counts.iter().enumerate() {
        let lo = i as f64 * width;
        let mid = lo + width / 2.0;
        table.push(vec![lo, lo + width, c as f64 / (n * width), 2.0 * unit_pdf(kind, mid)]);
    }
    Ok(table)
}

#[derive(Serialize)]
struct SimulateDoc<'a> {
    problem: String,
    dimension: usize,
    #[serde(flatten)]
    result: &'a qlsa_core::dense_sim::SimulationResult,
    classical_solution: Vec<[f64; 2]>,
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    format_or(&args.out, Format::Json, &[Format::Json])?;
    let sys = LinearSystem::from_path(&args.problem)?;
    let cfg = SimulationConfig {
        eps: args.eps,
        gamma: args.gamma,
        kind: args.dist.into(),
        mode: match args.mode {
            Mode::Ideal => SimulationMode::Ideal,
            Mode::Emulated => SimulationMode::Emulated,
        },
        trials: args.trials,
        seed: args.seed,
        q: args.steps,
        strict: args.strict,
    };
    let result = run_simulation(&sys, &cfg)?;
    log::info!("simulation finished in {:.3} s", result.wall_time_s);
    let doc = SimulateDoc {
        problem: args.problem.display().to_string(),
        dimension: sys.dim(),
        result: &result,
        classical_solution: classical_solve(&sys)?.iter().map(|z| [z.re, z.im]).collect(),
    };
    emit(&args.out, &to_json(&document("simulate", &doc)))
}

pub fn compare(args: &CompareArgs) -> Result<(), CliError> {
    let kappas = if args.kappa.is_empty() {
        vec![1e2, 1e3, 1e4, 1e5, 1e6]
    } else {
        args.kappa.clone()
    };
    let rows = kappas
        .iter()
        .map(|&k| compare_state_of_art(k, args.eps))
        .collect::<Result<Vec<_>, Error>>()?;
    let cross = if args.crossover {
        crossover_kappa(args.eps, 1e3, 1e40)?
    } else {
        None
    };
    let content = match format_or(&args.out, Format::Json, &[Format::Json, Format::Csv])? {
        Format::Csv => {
            let records: Vec<Value> = rows.iter().map(|r| serde_json::to_value(r).expect("serializable")).collect();
            records_csv(&records)
        }
        _ => to_json(&document(
            "compare",
            json!({ "eps": args.eps, "comparisons": rows, "crossover_kappa": cross }),
        )),
    };
    emit(&args.out, &content)
}

fn render(fig: Figure, table: &Table, format: Format) -> String {
    match format {
        Format::Svg => figures::svg_for(fig, table),
        _ => table.to_csv(),
    }
}

pub fn figures(args: &FiguresArgs) -> Result<(), CliError> {
    let which = match (args.which, args.jacobi_anger) {
        (Some(f), false) => f,
        (None, true) | (Some(Figure::Fig2), true) => Figure::Fig2,
        (Some(_), true) => return Err(CliError::Usage("--jacobi-anger selects fig2 and conflicts with another figure".into())),
        (None, false) => return Err(CliError::Usage("name a figure (fig1..fig5, all) or pass --jacobi-anger".into())),
    };
    let format = format_or(&args.out, Format::Csv, &[Format::Csv, Format::Svg])?;
    let list: Vec<Figure> = match which {
        Figure::All => vec![Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5],
        f => vec![f],
    };
    match &args.output_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            for fig in list {
                let table = figures::table(fig)?;
                let name = figures::name(fig);
                for (ext, fmt) in [("csv", Format::Csv), ("svg", Format::Svg)] {
                    let path = dir.join(format!("{name}.{ext}"));
                    fs::write(&path, render(fig, &table, fmt)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                }
            }
            Ok(())
        }
        None => {
            if list.len() > 1 {
                return Err(CliError::Usage("`all` needs --output-dir".into()));
            }
            let table = figures::table(list[0])?;
            emit(&args.out, &render(list[0], &table, format))
        }
    }
}

