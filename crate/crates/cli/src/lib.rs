//! `seadet` command-line front end.
//!
//! Every subcommand reads its parameters from kebab-case flags, optionally
//! layered over a flat snake_case JSON file given with `--config`; flags win.
//! Exit codes: 0 success, 1 runtime or convergence failure, 2 usage or
//! parameter error.

mod config;

pub use config::RunConfig;

use clap::{Args, Parser, Subcommand};
use seadet::eval::{self, DetectorReport, RocPoint, SplitSpec};
use seadet::far::{FarError, FarTarget};
use seadet::features::{self, FeatureConfig, FeatureError, FeatureVector};
use seadet::signal::{self, DatasetFormat, Label, Polarization, SignalError, SynthConfig};
use seadet::svm::{KernelConfig, KernelForm, SvmError, SvmModel, TrainConfig};
use serde::Serialize;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn runtime(msg: impl Into<String>) -> CliError {
    CliError::Runtime(msg.into())
}

impl From<SignalError> for CliError {
    fn from(e: SignalError) -> Self {
        match e {
            SignalError::InvalidParameter(_)
            | SignalError::InvalidWindow(_)
            | SignalError::MissingMetadata(_)
            | SignalError::PolarizationMismatch { .. }
            | SignalError::SecondaryCellNotAllowed(_) => usage(e.to_string()),
            _ => runtime(e.to_string()),
        }
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::InvalidParameter(_) => usage(e.to_string()),
            _ => runtime(e.to_string()),
        }
    }
}

impl From<SvmError> for CliError {
    fn from(e: SvmError) -> Self {
        match e {
            SvmError::InvalidParameter(_) | SvmError::SingleClassData => usage(e.to_string()),
            _ => runtime(e.to_string()),
        }
    }
}

impl From<FarError> for CliError {
    fn from(e: FarError) -> Self {
        match e {
            FarError::InvalidTarget(_) | FarError::NoClutterSamples => usage(e.to_string()),
            FarError::Svm(s) => s.into(),
            _ => runtime(e.to_string()),
        }
    }
}

impl From<eval::EvalError> for CliError {
    fn from(e: eval::EvalError) -> Self {
        use eval::EvalError::*;
        match e {
            NoTargets | NoClutter | EmptyTestSet | InvalidParameter(_) => usage(e.to_string()),
            Far(f) => f.into(),
            Feature(f) => f.into(),
            _ => runtime(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "seadet", version, about = "FAR-controllable SVM detector for small targets in sea clutter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a compound-Gaussian clutter dataset with one target cell.
    Generate(GenerateArgs),
    /// Segment a dataset and write its (TIE, THE, FPAR) feature table.
    Extract(ExtractArgs),
    /// Fit the detector so its training false alarm rate meets --pf.
    Train(TrainArgs),
    /// Classify a feature table with a trained model.
    Detect(DetectArgs),
    /// Split, sweep the FAR grid and report detection probabilities.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON file with snake_case keys; explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    scr_db: Option<f64>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    clutter_shape: Option<f64>,
    #[arg(long)]
    polarization: Option<String>,
    /// csv or bin.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[command(flatten)]
    common: Common,
    /// Dataset directory.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    polarization: Option<String>,
    #[arg(long)]
    format: Option<String>,
    /// Segment step d.
    #[arg(long)]
    step: Option<usize>,
    /// Segment length D.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    k_bins: Option<usize>,
    /// Comma-separated R/S scales.
    #[arg(long, value_delimiter = ',')]
    tau_grid: Option<Vec<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long)]
    delta: Option<f64>,
    /// paper or gaussian.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    kkt_tol: Option<f64>,
    #[arg(long)]
    max_passes: Option<usize>,
    #[arg(long)]
    cache_mb: Option<usize>,
    #[arg(long)]
    split_seed: Option<u64>,
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    beta_h: Option<f64>,
    #[arg(long)]
    beta_l: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// Feature CSV written by `extract`.
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    pf: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    /// Decisions CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    /// Feature CSV; repeat for several datasets.
    #[arg(long = "features")]
    features: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pf_grid: Option<Vec<f64>>,
    /// Also evaluate a baseline detector (`hurst`).
    #[arg(long)]
    baseline: Option<String>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    roc: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(summary) => {
            if !summary.is_empty() {
                println!("{summary}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<String, CliError> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Extract(a) => extract(a),
        Command::Train(a) => train(a),
        Command::Detect(a) => detect(a),
        Command::Evaluate(a) => evaluate(a),
    }
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    match &common.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn required(value: Option<PathBuf>, flag: &str) -> Result<PathBuf, CliError> {
    value.ok_or_else(|| usage(format!("missing required --{flag}")))
}

fn existing_file(path: &Path, flag: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("--{flag}: {} does not exist", path.display())))
    }
}

fn parse_format(s: Option<&str>) -> Result<DatasetFormat, CliError> {
    match s.unwrap_or("csv").to_ascii_lowercase().as_str() {
        "csv" => Ok(DatasetFormat::Csv),
        "bin" | "binary" | "f32" => Ok(DatasetFormat::BinaryF32),
        other => Err(usage(format!("--format must be csv or bin, got {other:?}"))),
    }
}

fn parse_polarization(s: Option<&str>) -> Result<Polarization, CliError> {
    s.unwrap_or("HH")
        .parse()
        .map_err(|_| usage(format!("--polarization must be HH, VV, HV or VH, got {:?}", s.unwrap_or(""))))
}

fn parse_kernel(s: Option<&str>) -> Result<KernelForm, CliError> {
    match s.unwrap_or("paper").to_ascii_lowercase().as_str() {
        "paper" => Ok(KernelForm::Paper),
        "gaussian" => Ok(KernelForm::Gaussian),
        other => Err(usage(format!("--kernel must be paper or gaussian, got {other:?}"))),
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn generate(a: GenerateArgs) -> Result<String, CliError> {
    let cfg = load_config(&a.common)?;
    let defaults = SynthConfig::default();
    let synth = SynthConfig {
        seed: a.seed.or(cfg.seed).unwrap_or(defaults.seed),
        scr_db: a.scr_db.or(cfg.scr_db).unwrap_or(defaults.scr_db),
        n_cells: a.cells.or(cfg.cells).unwrap_or(defaults.n_cells),
        n_samples: a.samples.or(cfg.samples).unwrap_or(defaults.n_samples),
        clutter_shape: a.clutter_shape.or(cfg.clutter_shape).unwrap_or(defaults.clutter_shape),
        polarization: parse_polarization(a.polarization.as_deref().or(cfg.polarization.as_deref()))?,
        ..defaults
    };
    if synth.scr_db.is_nan() || synth.scr_db == f64::INFINITY {
        return Err(usage(format!("--scr-db must be a finite number or -inf, got {}", synth.scr_db)));
    }
    if !(synth.clutter_shape > 0.0 && synth.clutter_shape.is_finite()) {
        return Err(usage(format!("--clutter-shape must be positive, got {}", synth.clutter_shape)));
    }
    if synth.n_cells < 2 {
        return Err(usage(format!("--cells must be at least 2, got {}", synth.n_cells)));
    }
    if synth.n_samples < signal::DEFAULT_WINDOW {
        return Err(usage(format!(
            "--samples must be at least {}, got {}",
            signal::DEFAULT_WINDOW,
            synth.n_samples
        )));
    }
    let format = parse_format(a.format.as_deref().or(cfg.format.as_deref()))?;
    let out = required(a.out.or(cfg.out), "out")?;
    let dataset = synth.generate()?;
    signal::save_dataset(&dataset, &out, format)?;
    Ok(format!(
        "wrote {} cells ({} samples each) to {}; primary cell {}, empirical SCR {:.2} dB",
        dataset.cells.len(),
        synth.n_samples,
        out.display(),
        synth.primary_index(),
        dataset.empirical_scr_db().unwrap_or(f64::NEG_INFINITY)
    ))
}

fn extract(a: ExtractArgs) -> Result<String, CliError> {
    let cfg = load_config(&a.common)?;
    let input = required(a.input.or(cfg.input), "input")?;
    if !input.is_dir() {
        return Err(usage(format!("--input: {} is not a directory", input.display())));
    }
    let polarization = parse_polarization(a.polarization.as_deref().or(cfg.polarization.as_deref()))?;
    let format = parse_format(a.format.as_deref().or(cfg.format.as_deref()))?;
    let step = a.step.or(cfg.step).unwrap_or(signal::DEFAULT_STEP);
    let window = a.window.or(cfg.window).unwrap_or(signal::DEFAULT_WINDOW);
    let fcfg = FeatureConfig {
        k_bins: a.k_bins.or(cfg.k_bins).unwrap_or(features::DEFAULT_K_BINS),
        tau_grid: a.tau_grid.or(cfg.tau_grid).unwrap_or_else(|| features::DEFAULT_TAU_GRID.to_vec()),
    };
    fcfg.check(window).map_err(|e| usage(format!("--k-bins/--tau-grid: {e}")))?;
    let out = required(a.out.or(cfg.out), "out")?;

    let dataset = signal::load_dataset(&input, polarization, format)?;
    let segments = signal::segment_dataset(&dataset, step, window)?;
    let vectors = features::extract_all(&segments, &fcfg)?;
    drop(segments);
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    }
    features::write_features(&out, &vectors)?;
    let n_target = vectors.iter().filter(|v| v.label == Label::Target).count();
    Ok(format!(
        "wrote {} feature vectors ({} target, {} clutter) to {}",
        vectors.len(),
        n_target,
        vectors.len() - n_target,
        out.display()
    ))
}

/// Controller, solver, kernel and split settings shared by train and evaluate.
struct Protocol {
    kernel: KernelConfig,
    solver: TrainConfig,
    target: FarTarget,
    split: SplitSpec,
}

fn protocol(s: SolverArgs, cfg: &RunConfig, p_f: f64) -> Result<Protocol, CliError> {
    let kernel = KernelConfig::new(
        s.delta.or(cfg.delta).unwrap_or(1.0),
        parse_kernel(s.kernel.as_deref().or(cfg.kernel.as_deref()))?,
    );
    kernel.validate().map_err(|_| usage(format!("--delta must be positive, got {}", kernel.delta)))?;
    let dt = TrainConfig::default();
    let solver = TrainConfig {
        kkt_tol: s.kkt_tol.or(cfg.kkt_tol).unwrap_or(dt.kkt_tol),
        max_passes: s.max_passes.or(cfg.max_passes).unwrap_or(dt.max_passes),
        cache_mb: s.cache_mb.or(cfg.cache_mb).unwrap_or(dt.cache_mb),
        ..dt
    };
    solver.validate().map_err(|e| usage(format!("--kkt-tol/--max-passes: {e}")))?;
    let df = FarTarget::default();
    let target = FarTarget {
        p_f,
        eta: s.eta.or(cfg.eta).unwrap_or(df.eta),
        beta_h: s.beta_h.or(cfg.beta_h).unwrap_or(df.beta_h),
        beta_l: s.beta_l.or(cfg.beta_l).unwrap_or(df.beta_l),
        beta1: s.beta1.or(cfg.beta1).unwrap_or(df.beta1),
        max_iters: s.max_iters.or(cfg.max_iters).unwrap_or(df.max_iters),
    };
    target
        .validate()
        .map_err(|e| usage(format!("--pf/--eta/--beta-h/--beta-l/--beta1/--max-iters: {e}")))?;
    let split = SplitSpec {
        target_train_fraction: s.train_fraction.or(cfg.train_fraction).unwrap_or(0.5),
        seed: s.split_seed.or(cfg.split_seed).unwrap_or(0),
        ..SplitSpec::default()
    };
    if !(split.target_train_fraction > 0.0 && split.target_train_fraction < 1.0) {
        return Err(usage(format!(
            "--train-fraction must lie in (0, 1), got {}",
            split.target_train_fraction
        )));
    }
    Ok(Protocol {
        kernel,
        solver,
        target,
        split,
    })
}

fn read_feature_file(path: &Path) -> Result<Vec<FeatureVector>, CliError> {
    existing_file(path, "features")?;
    Ok(features::read_features(path)?)
}

fn train(a: TrainArgs) -> Result<String, CliError> {
    let cfg = load_config(&a.common)?;
    let path = required(a.features.or(cfg.features.first().cloned()), "features")?;
    let p_f = a.pf.or(cfg.pf).unwrap_or(FarTarget::default().p_f);
    let proto = protocol(a.solver, &cfg, p_f)?;
    let model_path = required(a.model.or(cfg.model), "model")?;
    let trace_path = a.trace.or(cfg.trace).unwrap_or_else(|| model_path.with_extension("trace.json"));

    let vectors = read_feature_file(&path)?;
    let split = eval::split(&vectors, &proto.split)?;
    let fitted = eval::fit_detector(&split.train, &proto.kernel, &proto.target, &proto.solver)?;
    let model_json = serde_json::to_string_pretty(&fitted.model).map_err(|e| runtime(e.to_string()))? + "\n";
    write_file(&model_path, model_json)?;
    let model_ref = model_path.file_name().and_then(|s| s.to_str());
    let trace_json = fitted.trace.to_json(model_ref)?;
    write_file(&trace_path, trace_json)?;

    let it = fitted.trace.final_iteration();
    let summary = format!(
        "P_F = {:.4}% (target {:.4}%, eta {:.4}%) at beta0 = {:e} after {} fits; {} support vectors",
        100.0 * it.p_f,
        100.0 * p_f,
        100.0 * proto.target.eta,
        it.beta0,
        fitted.trace.iterations.len(),
        fitted.model.alphas.len()
    );
    for w in &fitted.trace.warnings {
        eprintln!("warning: {w:?}");
    }
    if fitted.trace.converged {
        Ok(summary)
    } else {
        Err(runtime(format!(
            "FAR control did not converge; best iterate written. {summary}"
        )))
    }
}

fn detect(a: DetectArgs) -> Result<String, CliError> {
    let cfg = load_config(&a.common)?;
    let model_path = required(a.model.or(cfg.model), "model")?;
    existing_file(&model_path, "model")?;
    let path = required(a.features.or(cfg.features.first().cloned()), "features")?;
    let out = required(a.out.or(cfg.out), "out")?;
    let model = SvmModel::load_json(&model_path)?;
    let vectors = read_feature_file(&path)?;
    let decisions = model.decide_all(&vectors);
    let mut csv = String::from("source_cell,start_index,label,decision,margin\n");
    let mut n_target = 0;
    for (v, d) in vectors.iter().zip(&decisions) {
        n_target += usize::from(d.label == Label::Target);
        let _ = writeln!(
            csv,
            "{},{},{:+},{:+},{}",
            v.source_cell,
            v.start_index,
            v.label.as_i8(),
            d.label.as_i8(),
            d.margin
        );
    }
    write_file(&out, csv)?;
    Ok(format!(
        "{n_target} of {} segments declared target; decisions in {}",
        vectors.len(),
        out.display()
    ))
}

#[derive(Debug, Serialize)]
struct DatasetResult {
    name: String,
    proposed: DetectorReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<DetectorReport>,
    /// Baseline evaluated at each achieved proposed-detector FAR.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    baseline_matched: Vec<RocPoint>,
}

#[derive(Debug, Serialize)]
struct EvaluationReport {
    p_f_grid: Vec<f64>,
    eta: f64,
    kernel: KernelConfig,
    split: SplitSpec,
    datasets: Vec<DatasetResult>,
    /// Per-grid-point averages over datasets.
    mean_roc: Vec<RocPoint>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    mean_roc_baseline: Vec<RocPoint>,
    mean_p_d: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_p_d_baseline: Option<f64>,
}

/// Averages ROC points grid-position by grid-position across datasets.
fn mean_roc(curves: &[&[RocPoint]]) -> Vec<RocPoint> {
    let Some(first) = curves.first() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for (k, p) in first.iter().enumerate() {
        let column: Vec<&RocPoint> = curves
            .iter()
            .filter_map(|c| c.iter().find(|q| q.target_p_f == p.target_p_f).or_else(|| c.get(k)))
            .collect();
        let n = column.len() as f64;
        out.push(RocPoint {
            p_f: column.iter().map(|q| q.p_f).sum::<f64>() / n,
            p_d: column.iter().map(|q| q.p_d).sum::<f64>() / n,
            target_p_f: p.target_p_f,
            converged: column.iter().all(|q| q.converged),
        });
    }
    out
}

fn roc_csv(points: &[RocPoint]) -> String {
    let mut s = String::from("p_f,p_d,converged\n");
    for p in points {
        let _ = writeln!(s, "{},{},{}", p.p_f, p.p_d, p.converged);
    }
    s
}

fn evaluate(a: EvaluateArgs) -> Result<String, CliError> {
    let cfg = load_config(&a.common)?;
    let paths = if a.features.is_empty() { cfg.features.clone() } else { a.features };
    if paths.is_empty() {
        return Err(usage("missing required --features"));
    }
    let grid = a.pf_grid.or(cfg.pf_grid.clone()).unwrap_or_else(|| vec![0.001, 0.01, 0.1]);
    if grid.is_empty() || grid.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(usage(format!("--pf-grid values must lie in (0, 1), got {grid:?}")));
    }
    let baseline = match a.baseline.or(cfg.baseline.clone()).as_deref() {
        None | Some("none") => false,
        Some("hurst") => true,
        Some(other) => return Err(usage(format!("--baseline must be hurst or none, got {other:?}"))),
    };
    let proto = protocol(a.solver, &cfg, grid[0])?;
    let report_path = required(a.report.or(cfg.report.clone()), "report")?;
    let roc_path = a.roc.or(cfg.roc.clone()).unwrap_or_else(|| report_path.with_extension("roc.csv"));
    for p in &paths {
        existing_file(p, "features")?;
    }

    let mut results = Vec::new();
    for path in &paths {
        let name = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        let vectors = read_feature_file(path)?;
        let split = eval::split(&vectors, &proto.split)?;
        let mut proposed = eval::roc_sweep_using(
            &split.train,
            &split.test,
            &proto.kernel,
            &grid,
            &proto.target,
            &proto.solver,
        )?;
        proposed.dataset_name = name.clone();
        let (baseline_report, matched) = if baseline {
            let mut b = eval::hurst_roc(&split.train, &split.test, &grid)?;
            b.dataset_name = name.clone();
            let mut matched = Vec::new();
            for p in &proposed.roc_points {
                let m = eval::hurst_threshold_baseline(&split.train, &split.test, p.p_f)?;
                matched.extend(m.roc_points);
            }
            (Some(b), matched)
        } else {
            (None, Vec::new())
        };
        results.push(DatasetResult {
            name,
            proposed,
            baseline: baseline_report,
            baseline_matched: matched,
        });
    }

    let proposed_curves: Vec<&[RocPoint]> = results.iter().map(|r| r.proposed.roc_points.as_slice()).collect();
    let baseline_curves: Vec<&[RocPoint]> = results
        .iter()
        .filter_map(|r| r.baseline.as_ref().map(|b| b.roc_points.as_slice()))
        .collect();
    let proposed_reports: Vec<DetectorReport> = results.iter().map(|r| r.proposed.clone()).collect();
    let baseline_reports: Vec<DetectorReport> = results.iter().filter_map(|r| r.baseline.clone()).collect();
    let report = EvaluationReport {
        p_f_grid: grid.clone(),
        eta: proto.target.eta,
        kernel: proto.kernel,
        split: proto.split,
        mean_roc: mean_roc(&proposed_curves),
        mean_roc_baseline: mean_roc(&baseline_curves),
        mean_p_d: eval::average_detection_probability(&proposed_reports).unwrap_or(f64::NAN),
        mean_p_d_baseline: eval::average_detection_probability(&baseline_reports),
        datasets: results,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| runtime(e.to_string()))? + "\n";
    write_file(&report_path, json)?;
    write_file(&roc_path, roc_csv(&report.mean_roc))?;
    if baseline {
        write_file(&hurst_roc_path(&roc_path), roc_csv(&report.mean_roc_baseline))?;
    }

    let mut summary = format!(
        "mean P_d over {} dataset(s) at P_f = {}: {:.4}",
        report.datasets.len(),
        grid[0],
        report.mean_p_d
    );
    if let Some(b) = report.mean_p_d_baseline {
        let _ = write!(summary, " (Hurst baseline {b:.4})");
    }
    Ok(summary)
}

/// `roc.csv` → `roc_hurst.csv`.
pub fn hurst_roc_path(roc: &Path) -> PathBuf {
    let stem = roc.file_stem().map_or_else(|| "roc".into(), |s| s.to_string_lossy().into_owned());
    let ext = roc.extension().map_or_else(|| "csv".into(), |s| s.to_string_lossy().into_owned());
    roc.with_file_name(format!("{stem}_hurst.{ext}"))
}
