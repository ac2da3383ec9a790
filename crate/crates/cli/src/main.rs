mod output;

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use qglass::ball::{compare_estimate_to_measurement, estimate_e_d};
use qglass::ea::{mean_state_series, quenched_ln_series, CouplingDistribution};
use qglass::gate::{classical_benchmark, optimize_hold_time, quenched_gate_fidelity, GateProtocol, InputQubit};
use qglass::hopfield::{quenched_nn_ln_series, self_averaging_check};
use qglass::lattice::Geometry;
use qglass::lro::{detect_collapse_revival, lro_ln_series, LroCut, Threshold, COLLAPSE_WINDOW};
use qglass::oracle::{certification_suite, CONVENTIONS};
use qglass::sampling::RNG_TRANSFORM;
use qglass::series::{linspace, LnTimeSeries};

use output::Table;

#[derive(Parser)]
#[command(name = "qglass", version, about = "Entanglement dynamics of disordered Ising spin systems")]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true, env = "QGLASS_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Quenched nearest-neighbor LN of the Edwards-Anderson glass.
    Ea(EaArgs),
    /// Sample-averaged pair state and its PPT status.
    EaMean(EaArgs),
    /// Measurement-based Hadamard gate fidelity under coupling disorder.
    Gate(GateArgs),
    /// LN of the ordered infinite-range model.
    Lro(LroArgs),
    /// Quenched pair LN of the Hopfield model.
    Hopfield(HopfieldArgs),
    /// Quenched cosine product against exp(-8 t^2 p / N).
    SelfAvg(SelfAvgArgs),
    /// Separable-ball estimate of the long-time LN.
    Ball(BallArgs),
    /// Closed forms against brute-force evolution.
    OracleCheck(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Data file; a manifest is written next to it. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Serialize)]
struct TimeGrid {
    #[arg(long, default_value_t = 0.0)]
    t_min: f64,
    /// Defaults depend on the subcommand.
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of grid points, both ends included.
    #[arg(long, default_value_t = 101)]
    steps: usize,
}

#[derive(Args, Serialize)]
struct Sampling {
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct EaArgs {
    #[arg(long, default_value = "square")]
    geometry: Geometry,
    #[arg(long, default_value_t = 0.0)]
    j_mean: f64,
    #[arg(long, default_value_t = 1.0)]
    j_var: f64,
    #[command(flatten)]
    grid: TimeGrid,
    #[command(flatten)]
    sampling: Sampling,
    #[command(flatten)]
    #[serde(skip)]
    output: OutputArgs,
}

#[derive(Args, Serialize)]
struct GateArgs {
    #[arg(long, default_value_t = 5.0)]
    j_mean: f64,
    #[arg(long, default_value_t = 1.0)]
    j_var: f64,
    /// Fixed hold time; when absent t* is searched within ±20% of π/J_ref.
    #[arg(long)]
    hold_time: Option<f64>,
    /// Grid points of the hold-time search.
    #[arg(long, default_value_t = 21)]
    search_points: usize,
    #[command(flatten)]
    sampling: Sampling,
    #[command(flatten)]
    #[serde(skip)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CutArg {
    Pair,
    Triple,
}

#[derive(Args, Serialize)]
struct LroArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = CutArg::Pair)]
    cut: CutArg,
    #[command(flatten)]
    grid: TimeGrid,
    /// Collapse threshold in LN units.
    #[arg(long, default_value_t = 1e-4)]
    threshold: f64,
    /// Read the threshold as a fraction of the series maximum.
    #[arg(long)]
    relative: bool,
    #[command(flatten)]
    #[serde(skip)]
    output: OutputArgs,
}

#[derive(Args, Serialize)]
struct HopfieldArgs {
    #[arg(long)]
    p: usize,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    grid: TimeGrid,
    #[command(flatten)]
    sampling: Sampling,
    #[arg(long, default_value_t = 1e-3)]
    threshold: f64,
    /// Read the threshold as an absolute LN level instead of a fraction of the peak.
    #[arg(long)]
    absolute: bool,
    #[command(flatten)]
    #[serde(skip)]
    output: OutputArgs,
}

#[derive(Args, Serialize)]
struct SelfAvgArgs {
    #[arg(long)]
    p: usize,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    grid: TimeGrid,
    #[command(flatten)]
    sampling: Sampling,
    #[command(flatten)]
    #[serde(skip)]
    output: OutputArgs,
}

#[derive(Args, Serialize)]
struct BallArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0.0)]
    radius: f64,
    /// Measured long-time LN to compare with.
    #[arg(long)]
    measured: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    output: OutputArgs,
}

#[derive(Args, Serialize)]
struct OracleArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    output: OutputArgs,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<qglass::Error> for Failure {
    fn from(e: qglass::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

struct Outcome {
    table: Table,
    summary: Value,
    certification_failed: bool,
}

impl Outcome {
    fn new(table: Table, summary: Value) -> Self {
        Self {
            table,
            summary,
            certification_failed: false,
        }
    }
}

impl TimeGrid {
    fn times(&self, default_t_max: f64) -> Result<Vec<f64>, Failure> {
        let t_max = self.t_max.unwrap_or(default_t_max);
        if !self.t_min.is_finite() || !t_max.is_finite() {
            return Err(usage("--t-min and --t-max must be finite"));
        }
        if self.t_min > t_max {
            return Err(usage(format!("--t-min ({}) must not exceed --t-max ({t_max})", self.t_min)));
        }
        if self.steps == 0 {
            return Err(usage("--steps must be at least 1"));
        }
        Ok(linspace(self.t_min, t_max, self.steps))
    }
}

impl Sampling {
    fn check(&self) -> Result<(), Failure> {
        if self.samples == 0 {
            return Err(usage("--samples must be at least 1"));
        }
        Ok(())
    }
}

fn distribution(mean: f64, var: f64) -> Result<CouplingDistribution, Failure> {
    CouplingDistribution::new(mean, var).map_err(|e| usage(format!("--j-mean/--j-var: {e}")))
}

fn series_table(s: &LnTimeSeries) -> Table {
    let mut t = Table::new(&["t", "mean_ln", "std_ln", "sem_ln"]);
    for k in 0..s.times.len() {
        t.push(vec![
            s.times[k].into(),
            s.mean_ln[k].into(),
            s.std_ln[k].into(),
            s.sem_ln[k].into(),
        ]);
    }
    t
}

fn collapse_summary(s: &LnTimeSeries, threshold: Threshold) -> Value {
    match detect_collapse_revival(s, threshold, COLLAPSE_WINDOW) {
        Ok(r) => json!({ "collapse_revival": r }),
        Err(e) => json!({ "collapse_revival": null, "inconclusive": e.to_string() }),
    }
}

fn run_ea(a: &EaArgs) -> Result<Outcome, Failure> {
    let dist = distribution(a.j_mean, a.j_var)?;
    let times = a.grid.times(50.0)?;
    a.sampling.check()?;
    let s = quenched_ln_series(a.geometry, &dist, &times, a.sampling.samples, a.sampling.seed)?;
    Ok(Outcome::new(series_table(&s), json!({ "n_samples": s.n_samples })))
}

fn run_ea_mean(a: &EaArgs) -> Result<Outcome, Failure> {
    let dist = distribution(a.j_mean, a.j_var)?;
    let times = a.grid.times(50.0)?;
    a.sampling.check()?;
    let pts = mean_state_series(a.geometry, &dist, &times, a.sampling.samples, a.sampling.seed)?;
    let mut t = Table::new(&["t", "min_pt_eigenvalue", "ppt"]);
    for p in &pts {
        t.push(vec![p.t.into(), p.min_pt_eigenvalue.into(), p.is_ppt.into()]);
    }
    let worst = pts.iter().map(|p| p.min_pt_eigenvalue).fold(f64::INFINITY, f64::min);
    Ok(Outcome::new(
        t,
        json!({ "min_pt_eigenvalue": worst, "all_ppt": pts.iter().all(|p| p.is_ppt) }),
    ))
}

fn run_gate(a: &GateArgs) -> Result<Outcome, Failure> {
    let dist = distribution(a.j_mean, a.j_var)?;
    a.sampling.check()?;
    let inputs = InputQubit::pauli_eigenstates();
    let j_ref = qglass::gate::reference_coupling(&dist);
    let (protocol, fidelity, scan) = match a.hold_time {
        Some(t) => {
            if !(t > 0.0) {
                return Err(usage("--hold-time must be positive"));
            }
            if j_ref == 0.0 {
                return Err(usage("--j-mean and --j-var cannot both be zero"));
            }
            let protocol = GateProtocol::tuned(j_ref, t);
            let f = quenched_gate_fidelity(&dist, &protocol, &inputs, a.sampling.samples, a.sampling.seed)?;
            (protocol, f, Value::Null)
        }
        None => {
            if a.search_points == 0 {
                return Err(usage("--search-points must be at least 1"));
            }
            let scan = optimize_hold_time(&dist, &inputs, a.search_points, a.sampling.samples, a.sampling.seed)?;
            let grid = serde_json::to_value(&scan.grid).context("serializing scan")?;
            (scan.best, scan.best_fidelity, grid)
        }
    };
    let mut t = Table::new(&[
        "j_mean",
        "j_var",
        "t_star",
        "mean_fidelity",
        "std_fidelity",
        "sem_fidelity",
        "classical_benchmark",
    ]);
    t.push(vec![
        a.j_mean.into(),
        a.j_var.into(),
        protocol.hold_time.into(),
        fidelity.mean.into(),
        fidelity.std.into(),
        fidelity.sem.into(),
        classical_benchmark().into(),
    ]);
    Ok(Outcome::new(
        t,
        json!({
            "protocol": protocol,
            "reference_coupling": j_ref,
            "input_ensemble": "six Pauli eigenstates",
            "hold_time_scan": scan,
            "above_classical": fidelity.mean > classical_benchmark(),
        }),
    ))
}

fn run_lro(a: &LroArgs) -> Result<Outcome, Failure> {
    if a.n < 3 || (a.cut == CutArg::Triple && a.n < 4) {
        return Err(usage("--n must be at least 3 (4 for the triple cut)"));
    }
    let times = a.grid.times(PI * a.n as f64 / 2.0)?;
    let cut = match a.cut {
        CutArg::Pair => LroCut::Pair,
        CutArg::Triple => LroCut::Triple1v23,
    };
    let s = lro_ln_series(a.n, &times, cut)?;
    let mut t = Table::new(&["t", "ln"]);
    for (x, y) in s.times.iter().zip(&s.mean_ln) {
        t.push(vec![(*x).into(), (*y).into()]);
    }
    let threshold = if a.relative {
        Threshold::RelativeToPeak(a.threshold)
    } else {
        Threshold::Absolute(a.threshold)
    };
    Ok(Outcome::new(t, collapse_summary(&s, threshold)))
}

fn run_hopfield(a: &HopfieldArgs) -> Result<Outcome, Failure> {
    if a.p == 0 || a.n < 3 {
        return Err(usage("need --p >= 1 and --n >= 3"));
    }
    let times = a.grid.times(4.0 * (a.n as f64 / a.p as f64).sqrt())?;
    a.sampling.check()?;
    let s = quenched_nn_ln_series(a.p, a.n, &times, a.sampling.samples, a.sampling.seed)?;
    let threshold = if a.absolute {
        Threshold::Absolute(a.threshold)
    } else {
        Threshold::RelativeToPeak(a.threshold)
    };
    Ok(Outcome::new(series_table(&s), collapse_summary(&s, threshold)))
}

fn run_self_avg(a: &SelfAvgArgs) -> Result<Outcome, Failure> {
    if a.p == 0 || a.n < 3 {
        return Err(usage("need --p >= 1 and --n >= 3"));
    }
    let times = a.grid.times((a.n as f64 / a.p as f64).sqrt())?;
    a.sampling.check()?;
    let r = self_averaging_check(a.p, a.n, &times, a.sampling.samples, a.sampling.seed)?;
    if r.regime_warning {
        eprintln!("warning: outside the large-N, small-t/N regime (N >= 100, t/N <= 0.1)");
    }
    let mut t = Table::new(&["t", "empirical_product", "law_value"]);
    for k in 0..r.times.len() {
        t.push(vec![r.times[k].into(), r.empirical_product[k].into(), r.law_value[k].into()]);
    }
    Ok(Outcome::new(
        t,
        json!({ "max_rel_dev": r.max_rel_dev, "regime_warning": r.regime_warning }),
    ))
}

fn run_ball(a: &BallArgs) -> Result<Outcome, Failure> {
    let est = estimate_e_d(a.d, a.radius).map_err(|e| usage(format!("--d/--radius: {e}")))?;
    let mut t = Table::new(&["d", "radius", "v_d", "e_d"]);
    t.push(vec![a.d.into(), a.radius.into(), est.v_d.into(), est.e_d.into()]);
    let comparison = match a.measured {
        Some(m) => serde_json::to_value(compare_estimate_to_measurement(a.d, a.radius, m)?).context("serializing")?,
        None => Value::Null,
    };
    Ok(Outcome::new(t, json!({ "comparison": comparison })))
}

fn run_oracle(a: &OracleArgs) -> Result<Outcome, Failure> {
    let cases = certification_suite(a.seed)?;
    let mut t = Table::new(&["case", "max_deviation", "tolerance", "pass"]);
    for c in &cases {
        t.push(vec![c.name.clone().into(), c.max_deviation.into(), c.tolerance.into(), c.pass.into()]);
    }
    let failed: Vec<&str> = cases.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let mut out = Outcome::new(t, json!({ "cases": cases.len(), "failed": failed }));
    out.certification_failed = !failed.is_empty();
    Ok(out)
}

impl Command {
    fn output(&self) -> &OutputArgs {
        match self {
            Command::Ea(a) | Command::EaMean(a) => &a.output,
            Command::Gate(a) => &a.output,
            Command::Lro(a) => &a.output,
            Command::Hopfield(a) => &a.output,
            Command::SelfAvg(a) => &a.output,
            Command::Ball(a) => &a.output,
            Command::OracleCheck(a) => &a.output,
        }
    }

    fn run(&self) -> Result<Outcome, Failure> {
        match self {
            Command::Ea(a) => run_ea(a),
            Command::EaMean(a) => run_ea_mean(a),
            Command::Gate(a) => run_gate(a),
            Command::Lro(a) => run_lro(a),
            Command::Hopfield(a) => run_hopfield(a),
            Command::SelfAvg(a) => run_self_avg(a),
            Command::Ball(a) => run_ball(a),
            Command::OracleCheck(a) => run_oracle(a),
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn execute(cli: &Cli) -> Result<bool, Failure> {
    let start = Instant::now();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads / QGLASS_THREADS must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let config = serde_json::to_value(&cli.command).context("serializing the configuration")?;
    let canonical = serde_json::to_string(&config).context("serializing the configuration")?;
    let digest = sha256_hex(canonical.as_bytes());

    let outcome = cli.command.run()?;
    let output = cli.command.output();
    let data = match output.format {
        Format::Csv => outcome.table.to_csv(),
        Format::Json => outcome.table.to_json(),
    };
    match &output.out {
        None => print!("{data}"),
        Some(path) => {
            fs::write(path, &data).with_context(|| format!("writing {}", path.display()))?;
            let manifest = json!({
                "tool": "qglass",
                "version": env!("CARGO_PKG_VERSION"),
                "config": config,
                "config_digest": digest,
                "data_file": path.file_name().map(|n| n.to_string_lossy().into_owned()),
                "format": output.format,
                "columns": outcome.table.columns,
                "rows": outcome.table.rows.len(),
                "data_sha256": sha256_hex(data.as_bytes()),
                "rng_transform": RNG_TRANSFORM,
                "conventions": CONVENTIONS,
                "threads": rayon::current_num_threads(),
                "wall_time_s": start.elapsed().as_secs_f64(),
                "summary": outcome.summary,
            });
            let mpath = manifest_path(path);
            let text = serde_json::to_string_pretty(&manifest).context("serializing the manifest")?;
            fs::write(&mpath, text + "\n").with_context(|| format!("writing {}", mpath.display()))?;
        }
    }
    Ok(!outcome.certification_failed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return ExitCode::from(if informational { 0 } else { 1 });
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: certification failed");
            ExitCode::from(3)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
