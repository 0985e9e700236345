//! Command-line front end: `simulate`, `tune`, `train`, `predict`,
//! `evaluate`, and `benchmark`.
//!
//! Machine-readable output (CSV tables, JSON records, progress records)
//! goes to standard output or the requested file; log lines go to
//! standard error. Every run records its fully resolved configuration in
//! the output header (`#config:` comment lines for CSV, a leading
//! `config` record for JSON output). A JSON config file can supply any
//! training flag; explicit command-line flags win over the file.

use crate::belt::extract_linear_basis;
use crate::checkpoint::Checkpoint;
use crate::datagen::{self, Dataset};
use crate::ensemble::{build_gauss_ensemble, EnsembleSpec};
use crate::error::{BennError, Result};
use crate::gsir::{gsir_fit, GsirConfig};
use crate::metrics::{distance_correlation, ensemble_mse, projection_distance, MetricReport};
use crate::network::{BeltMode, StructuralParams};
use crate::rng;
use crate::stats;
use crate::trainer::{fit_with_progress, predict_ensemble, predict_sufficient, Optimizer, TrainConfig};
use crate::tuning::suggest_architecture;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "benn",
    about = "Belted and ensembled neural networks for sufficient dimension reduction",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark dataset as CSV.
    Simulate(SimulateArgs),
    /// Print an architecture suggestion for a sample size.
    Tune(TuneArgs),
    /// Train a model on a CSV dataset and write a checkpoint.
    Train(Box<TrainArgs>),
    /// Write sufficient predictors (and optionally ensemble predictions)
    /// for new data.
    Predict(PredictArgs),
    /// Evaluate a checkpoint against a test CSV.
    Evaluate(EvaluateArgs),
    /// Compare methods over replicated synthetic runs.
    Benchmark(Box<BenchmarkArgs>),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimModel {
    #[value(name = "d-iv")]
    DIv,
    Linear,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: SimModel,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    /// Reduction dimension of the linear generator.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Noise standard deviation of the linear generator.
    #[arg(long, default_value_t = 0.2)]
    noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the true basis of the linear generator as CSV.
    #[arg(long)]
    basis_out: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    d: usize,
    /// Write the suggestion here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    NonlinearCs,
    LinearCs,
    LinearCms,
    NonlinearCms,
    KthMoment,
    Categorical,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Debug)]
#[serde(rename_all = "kebab-case")]
enum EnsembleArg {
    Identity,
    GaussKernel,
    Moments,
    CdfIndicator,
    Fourier,
    CategoricalIndicator,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Debug)]
#[serde(rename_all = "kebab-case")]
enum OptimizerArg {
    Adam,
    Sgd,
}

/// Training flags that may also come from a `--config` JSON file;
/// command-line values take precedence over file values.
#[derive(Args, Serialize, Deserialize, Default, Clone)]
struct TrainOverlay {
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ensemble: Option<EnsembleArg>,
    /// Ensemble size (transformation count).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    /// Frequency-grid length of the sine/cosine ensemble.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    /// Belt width (number of sufficient predictors).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    /// Reducer depth (hidden layers).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    l1: Option<usize>,
    /// Reducer hidden width.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r1: Option<usize>,
    /// Regressor depth (hidden layers).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    l2: Option<usize>,
    /// Regressor hidden width.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r2: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epochs: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    batch_size: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lr: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    optimizer: Option<OptimizerArg>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Clamp bound applied inside the training loss.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truncate: Option<f64>,
    /// Magnitude bound on weights and biases after each step.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight_clip: Option<f64>,
    /// Disable epoch shuffling.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    no_shuffle: Option<bool>,
    /// Partitions for data-parallel gradient evaluation.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    workers: Option<usize>,
}

impl TrainOverlay {
    fn merged_under(self, file: TrainOverlay) -> TrainOverlay {
        TrainOverlay {
            ensemble: self.ensemble.or(file.ensemble),
            m: self.m.or(file.m),
            tau: self.tau.or(file.tau),
            d: self.d.or(file.d),
            l1: self.l1.or(file.l1),
            r1: self.r1.or(file.r1),
            l2: self.l2.or(file.l2),
            r2: self.r2.or(file.r2),
            epochs: self.epochs.or(file.epochs),
            batch_size: self.batch_size.or(file.batch_size),
            lr: self.lr.or(file.lr),
            optimizer: self.optimizer.or(file.optimizer),
            seed: self.seed.or(file.seed),
            truncate: self.truncate.or(file.truncate),
            weight_clip: self.weight_clip.or(file.weight_clip),
            no_shuffle: self.no_shuffle.or(file.no_shuffle),
            workers: self.workers.or(file.workers),
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "nonlinear-cs")]
    mode: ModeArg,
    /// Moment order k of the kth-moment mode.
    #[arg(long)]
    moment_order: Option<usize>,
    /// Derive the architecture from the sample size.
    #[arg(long)]
    auto_tune: bool,
    /// Read the architecture from a `tune` output file.
    #[arg(long)]
    arch_file: Option<PathBuf>,
    /// JSON file supplying default values for the training flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overlay: TrainOverlay,
    #[arg(long)]
    checkpoint_out: PathBuf,
    /// Write the per-epoch loss trace as CSV.
    #[arg(long)]
    loss_out: Option<PathBuf>,
    /// Emit `epoch,loss` records on standard output during training.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Output CSV of sufficient predictors (columns z1..zd).
    #[arg(long)]
    out: PathBuf,
    /// Also write the truncated ensemble predictions (columns g1..gm).
    #[arg(long)]
    ensemble_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Require true-predictor columns (f1..fk) and report their distance
    /// correlation with the fitted sufficient predictors.
    #[arg(long)]
    truth_cols: bool,
    /// CSV file with the true basis; reports the projection distance
    /// (linear modes only).
    #[arg(long)]
    truth_basis: Option<PathBuf>,
    /// Write the metric records here as well as standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Debug)]
enum MethodArg {
    Benn,
    Gsir,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long, value_enum, default_value = "d-iv")]
    model: SimModel,
    #[arg(long, default_value_t = 50)]
    p: usize,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Training sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n_grid: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    replicates: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Benn, MethodArg::Gsir])]
    methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 1000)]
    test_n: usize,
    #[arg(long, value_enum, default_value = "gauss-kernel")]
    ensemble: EnsembleArg,
    #[arg(long, default_value_t = 1000)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    l1: usize,
    #[arg(long, default_value_t = 50)]
    r1: usize,
    #[arg(long, default_value_t = 1)]
    l2: usize,
    #[arg(long, default_value_t = 2000)]
    r2: usize,
    #[arg(long, default_value_t = 150)]
    epochs: usize,
    #[arg(long, default_value_t = 128)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-2)]
    lr: f64,
    /// Master seed; replicate seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses and runs a command line (program name excluded); returns the
/// process exit code.
pub fn run<I>(args: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let argv = std::iter::once("benn".to_string()).chain(args);
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message (also for --help/--version)
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Tune(args) => cmd_tune(args),
        Command::Train(args) => cmd_train(*args),
        Command::Predict(args) => cmd_predict(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Benchmark(args) => cmd_benchmark(*args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let ds = match args.model {
        SimModel::DIv => datagen::gen_model_d(args.n, args.p, args.seed)?,
        SimModel::Linear => datagen::gen_linear(args.n, args.p, args.d, args.noise_sd, args.seed)?,
    };
    datagen::save_csv(&ds, &args.out)?;
    if let Some(basis_path) = &args.basis_out {
        match &ds.truth_basis {
            Some(b) => datagen::save_matrix_csv(b, basis_path)?,
            None => {
                return Err(BennError::Param(
                    "--basis-out applies only to the linear generator".into(),
                ))
            }
        }
    }
    eprintln!(
        "wrote {} rows x {} predictors to {}",
        ds.n(),
        ds.p(),
        args.out.display()
    );
    Ok(())
}

/// The `tune` output document; `train --arch-file` reads it back.
#[derive(Serialize, Deserialize)]
struct TuneRecord {
    n: usize,
    p: usize,
    d: usize,
    exponents: crate::tuning::RateExponents,
    params: StructuralParams,
}

fn cmd_tune(args: TuneArgs) -> Result<()> {
    let params = suggest_architecture(args.n, args.p, args.d)?;
    let record = TuneRecord {
        n: args.n,
        p: args.p,
        d: args.d,
        exponents: crate::tuning::optimal_exponents(args.p, args.d)?,
        params,
    };
    let json = serde_json::to_string_pretty(&record)?;
    match &args.out {
        Some(path) => std::fs::write(path, json)?,
        None => println!("{json}"),
    }
    Ok(())
}

/// Everything `train` resolved before fitting, echoed into output headers.
#[derive(Serialize)]
struct ResolvedTrain {
    data: String,
    mode: String,
    ensemble: EnsembleArg,
    params: StructuralParams,
    train: TrainConfig,
    ensemble_seed: u64,
    auto_tuned: bool,
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    if !path.exists() {
        return Err(BennError::Param(format!(
            "data file not found: {}",
            path.display()
        )));
    }
    datagen::load_csv(path)
}

fn resolve_mode(args_mode: ModeArg, moment_order: Option<usize>, y: &ndarray::Array1<f64>) -> Result<(BeltMode, Option<EnsembleSpec>)> {
    Ok(match args_mode {
        ModeArg::NonlinearCs => (BeltMode::NonlinearCs, None),
        ModeArg::LinearCs => (BeltMode::LinearCs, None),
        ModeArg::LinearCms => (BeltMode::LinearCms, Some(EnsembleSpec::identity())),
        ModeArg::NonlinearCms => (BeltMode::NonlinearCms, Some(EnsembleSpec::identity())),
        ModeArg::KthMoment => {
            let k = moment_order.ok_or_else(|| {
                BennError::Config("--moment-order is required for the kth-moment mode".into())
            })?;
            (
                BeltMode::KthMoment(k),
                Some(EnsembleSpec::moments_standardized(k, y)?),
            )
        }
        ModeArg::Categorical => {
            let spec = EnsembleSpec::categorical(y)?;
            (BeltMode::Categorical(spec.m), Some(spec))
        }
    })
}

fn build_ensemble_from_arg(
    family: EnsembleArg,
    m: usize,
    tau: f64,
    y: &ndarray::Array1<f64>,
    seed: u64,
) -> Result<EnsembleSpec> {
    match family {
        EnsembleArg::Identity => Ok(EnsembleSpec::identity()),
        EnsembleArg::GaussKernel => build_gauss_ensemble(y, m, seed),
        EnsembleArg::Moments => EnsembleSpec::moments_standardized(m, y),
        EnsembleArg::CdfIndicator => EnsembleSpec::cdf_indicator(m, y),
        EnsembleArg::Fourier => EnsembleSpec::fourier(m, tau),
        EnsembleArg::CategoricalIndicator => EnsembleSpec::categorical(y),
    }
}

fn ensemble_arg_of(mode: BeltMode, requested: Option<EnsembleArg>) -> Result<EnsembleArg> {
    // Modes that pin the ensemble family reject a conflicting request.
    let pinned = match mode {
        BeltMode::LinearCms | BeltMode::NonlinearCms => Some(EnsembleArg::Identity),
        BeltMode::KthMoment(_) => Some(EnsembleArg::Moments),
        BeltMode::Categorical(_) => Some(EnsembleArg::CategoricalIndicator),
        BeltMode::LinearCs | BeltMode::NonlinearCs => None,
    };
    match (pinned, requested) {
        (Some(p), Some(r)) if p != r => Err(BennError::Config(format!(
            "mode {mode} pins the ensemble to {p:?}, but {r:?} was requested"
        ))),
        (Some(p), _) => Ok(p),
        (None, Some(r)) => Ok(r),
        (None, None) => Ok(EnsembleArg::GaussKernel),
    }
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let ds = load_dataset(&args.data)?;
    let n = ds.n();
    let p = ds.p();

    let file_overlay: TrainOverlay = match &args.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => TrainOverlay::default(),
    };
    let o = args.overlay.clone().merged_under(file_overlay);

    let (mode, pinned_spec) = resolve_mode(args.mode, args.moment_order.or(o.m), &ds.y)?;
    let ensemble_arg = ensemble_arg_of(mode, o.ensemble)?;

    let seed = o.seed.unwrap_or(0);
    let ensemble_seed = rng::derive_seed(seed, 100);

    // Architecture: --arch-file, then --auto-tune, then explicit flags.
    let mut auto_tuned = false;
    let mut params = if let Some(path) = &args.arch_file {
        let text = std::fs::read_to_string(path)?;
        // a `tune` output document, or a bare architecture document
        match serde_json::from_str::<TuneRecord>(&text) {
            Ok(record) => record.params,
            Err(_) => serde_json::from_str::<StructuralParams>(&text)?,
        }
    } else if args.auto_tune {
        auto_tuned = true;
        let d = o.d.ok_or_else(|| {
            BennError::Config("--d is required with --auto-tune".into())
        })?;
        suggest_architecture(n, p, d)?
    } else {
        let d = o.d.ok_or_else(|| {
            BennError::Config("--d is required (or use --auto-tune / --arch-file)".into())
        })?;
        let (l1, r1) = (o.l1.unwrap_or(2), o.r1.unwrap_or(50));
        let (l2, r2) = (o.l2.unwrap_or(1), o.r2.unwrap_or(100));
        let m = match (&pinned_spec, o.m) {
            (Some(spec), _) => spec.m,
            (None, Some(m)) => m,
            (None, None) => 100,
        };
        StructuralParams::constant_width(p, l1, r1, d, l2, r2, m)?
    };
    if params.p != p {
        return Err(BennError::Shape(format!(
            "architecture expects p = {} but the data has {p} predictors",
            params.p
        )));
    }

    // Ensemble: pinned by the mode, or built from the requested family.
    let spec = match pinned_spec {
        Some(spec) => spec,
        None => build_ensemble_from_arg(
            ensemble_arg,
            params.m,
            o.tau.unwrap_or(1.0),
            &ds.y,
            ensemble_seed,
        )?,
    };
    params.m = spec.m;

    if auto_tuned {
        eprintln!(
            "auto-tune: m={} l1={} r1={} l2={} r2={}",
            params.m,
            params.l1,
            params.k1.first().copied().unwrap_or(0),
            params.l2,
            params.k2.first().copied().unwrap_or(0)
        );
    }

    let cfg = TrainConfig {
        epochs: o.epochs.unwrap_or(150),
        batch_size: o.batch_size.unwrap_or_else(|| n.min(128)).min(n),
        learning_rate: o.lr.unwrap_or(1e-2),
        optimizer: match o.optimizer.unwrap_or(OptimizerArg::Adam) {
            OptimizerArg::Adam => Optimizer::adam(),
            OptimizerArg::Sgd => Optimizer::Sgd,
        },
        seed,
        truncation: o.truncate,
        weight_clip: o.weight_clip,
        shuffle: !o.no_shuffle.unwrap_or(false),
        workers: o.workers.unwrap_or(1),
    };

    let resolved = ResolvedTrain {
        data: args.data.display().to_string(),
        mode: mode.to_string(),
        ensemble: ensemble_arg,
        params: params.clone(),
        train: cfg.clone(),
        ensemble_seed,
        auto_tuned,
    };
    let resolved_json = serde_json::to_string(&resolved)?;
    eprintln!("config: {resolved_json}");

    let started = Instant::now();
    let verbose = args.verbose;
    let result = fit_with_progress(&ds.x, &ds.y, mode, &params, &spec, &cfg, |epoch, loss| {
        if verbose {
            println!("{epoch},{loss}");
        }
    })?;
    let elapsed = started.elapsed().as_secs_f64();

    Checkpoint::from_fit(&result).save(&args.checkpoint_out)?;
    if let Some(loss_path) = &args.loss_out {
        let mut w = std::io::BufWriter::new(std::fs::File::create(loss_path)?);
        writeln!(w, "#config: {resolved_json}")?;
        writeln!(w, "epoch,loss")?;
        for (i, loss) in result.loss_trace.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, loss)?;
        }
    }
    eprintln!(
        "trained {} epochs in {:.1}s; final loss {:.6e}; checkpoint {}",
        cfg.epochs,
        elapsed,
        result.loss_trace.last().copied().unwrap_or(f64::NAN),
        args.checkpoint_out.display()
    );
    Ok(())
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    if !path.exists() {
        return Err(BennError::Param(format!(
            "checkpoint file not found: {}",
            path.display()
        )));
    }
    Checkpoint::load(path)
}

fn write_prediction_csv(path: &Path, prefix: &str, values: &ndarray::Array2<f64>) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header: Vec<String> = (1..=values.ncols()).map(|j| format!("{prefix}{j}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for row in values.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let handle = load_checkpoint(&args.checkpoint)?.to_fit_result()?;
    let ds = load_dataset(&args.data)?;
    if ds.p() != handle.model.params.p {
        return Err(BennError::Shape(format!(
            "checkpoint expects p = {} but the data has {} predictors",
            handle.model.params.p,
            ds.p()
        )));
    }
    let z = predict_sufficient(&handle, &ds.x)?;
    write_prediction_csv(&args.out, "z", &z)?;
    if let Some(out) = &args.ensemble_out {
        let g = predict_ensemble(&handle, &ds.x)?;
        write_prediction_csv(out, "g", &g)?;
    }
    eprintln!("wrote {} sufficient predictors to {}", z.nrows(), args.out.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let checkpoint = load_checkpoint(&args.checkpoint)?;
    let handle = checkpoint.to_fit_result()?;
    let ds = load_dataset(&args.data)?;
    if ds.p() != handle.model.params.p {
        return Err(BennError::Shape(format!(
            "checkpoint expects p = {} but the data has {} predictors",
            handle.model.params.p,
            ds.p()
        )));
    }

    let mut records: Vec<String> = Vec::new();
    records.push(format!(
        "{{\"config\":{{\"checkpoint\":{:?},\"data\":{:?},\"mode\":\"{}\",\"n\":{}}}}}",
        args.checkpoint.display().to_string(),
        args.data.display().to_string(),
        handle.model.mode,
        ds.n()
    ));

    let mut reports: Vec<MetricReport> = Vec::new();
    reports.push(MetricReport {
        name: "ensemble-mse".into(),
        value: ensemble_mse(&handle, &ds.x, &ds.y)?,
        n: ds.n(),
        details: None,
    });

    if args.truth_cols && ds.truth.is_none() {
        return Err(BennError::Param(
            "--truth-cols given but the data has no f1..fk columns".into(),
        ));
    }
    if let Some(truth) = &ds.truth {
        let z = predict_sufficient(&handle, &ds.x)?;
        let dcor = distance_correlation(&z, truth)?;
        reports.push(MetricReport {
            name: "dcor".into(),
            value: dcor.value,
            n: ds.n(),
            details: None,
        });
    }
    if let Some(basis_path) = &args.truth_basis {
        let truth_basis = datagen::load_matrix_csv(basis_path)?;
        let estimated = extract_linear_basis(&handle.model)?;
        reports.push(MetricReport {
            name: "projection-distance".into(),
            value: projection_distance(&estimated, &truth_basis)?,
            n: ds.n(),
            details: None,
        });
    }
    for report in &reports {
        records.push(serde_json::to_string(report)?);
    }

    let text = records.join("\n");
    println!("{text}");
    if let Some(out) = &args.out {
        std::fs::write(out, format!("{text}\n"))?;
    }
    Ok(())
}

struct ReplicateOutcome {
    dcor: f64,
    seconds: f64,
}

fn benchmark_cell(
    method: MethodArg,
    n: usize,
    args: &BenchmarkArgs,
    rep_seed: u64,
) -> Result<ReplicateOutcome> {
    let data_seed = rng::derive_seed(rep_seed, 0);
    let test_seed = rng::derive_seed(rep_seed, 1);
    let ensemble_seed = rng::derive_seed(rep_seed, 2);
    let train_seed = rng::derive_seed(rep_seed, 3);

    let train = match args.model {
        SimModel::DIv => datagen::gen_model_d(n, args.p, data_seed)?,
        SimModel::Linear => datagen::gen_linear(n, args.p, args.d, 0.2, data_seed)?,
    };
    match method {
        MethodArg::Benn => {
            let test = match args.model {
                SimModel::DIv => datagen::gen_model_d(args.test_n, args.p, test_seed)?,
                SimModel::Linear => {
                    datagen::gen_linear_with_basis(
                        args.test_n,
                        train.truth_basis.as_ref().expect("linear truth basis"),
                        0.2,
                        test_seed,
                    )?
                }
            };
            let params = StructuralParams::constant_width(
                args.p, args.l1, args.r1, args.d, args.l2, args.r2, args.m,
            )?;
            let spec =
                build_ensemble_from_arg(args.ensemble, args.m, 1.0, &train.y, ensemble_seed)?;
            let cfg = TrainConfig {
                epochs: args.epochs,
                batch_size: args.batch_size.min(n),
                learning_rate: args.lr,
                seed: train_seed,
                ..TrainConfig::default_for(n, train_seed)
            };
            let started = Instant::now();
            let fitted = crate::trainer::fit(
                &train.x,
                &train.y,
                BeltMode::NonlinearCs,
                &params,
                &spec,
                &cfg,
            )?;
            let seconds = started.elapsed().as_secs_f64();
            let z = predict_sufficient(&fitted, &test.x)?;
            let truth = test.truth.as_ref().expect("generated data carries truth");
            let dcor = distance_correlation(&z, truth)?.value;
            Ok(ReplicateOutcome { dcor, seconds })
        }
        MethodArg::Gsir => {
            // The kernel method produces in-sample predictors, so its
            // accuracy is measured on the training sample.
            let started = Instant::now();
            let fitted = gsir_fit(&train.x, &train.y, &GsirConfig::new(args.d))?;
            let seconds = started.elapsed().as_secs_f64();
            let truth = train.truth.as_ref().expect("generated data carries truth");
            let dcor = distance_correlation(&fitted.predictors, truth)?.value;
            Ok(ReplicateOutcome { dcor, seconds })
        }
    }
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<()> {
    if args.replicates == 0 {
        return Err(BennError::Param("replicates must be >= 1".into()));
    }
    let rep_seeds: Vec<u64> = (0..args.replicates)
        .map(|k| rng::derive_seed(args.seed, k as u64))
        .collect();

    let mut lines: Vec<String> = Vec::new();
    lines.push(format!(
        "#config: {{\"model\":\"{}\",\"p\":{},\"d\":{},\"test_n\":{},\"ensemble\":{},\"m\":{},\"l1\":{},\"r1\":{},\"l2\":{},\"r2\":{},\"epochs\":{},\"batch_size\":{},\"lr\":{},\"master_seed\":{}}}",
        match args.model { SimModel::DIv => "d-iv", SimModel::Linear => "linear" },
        args.p, args.d, args.test_n,
        serde_json::to_string(&args.ensemble)?, args.m,
        args.l1, args.r1, args.l2, args.r2, args.epochs, args.batch_size, args.lr, args.seed
    ));
    lines.push(format!(
        "#replicate-seeds: {}",
        rep_seeds
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    ));
    lines.push("method,n,mean_dcor,sd_dcor,mean_seconds".into());

    for &method in &args.methods {
        for &n in &args.n_grid {
            // Replicates run in parallel; results are collected in
            // replicate order so the table is identical either way.
            let outcomes: Vec<Result<ReplicateOutcome>> = rep_seeds
                .par_iter()
                .map(|&rep_seed| benchmark_cell(method, n, &args, rep_seed))
                .collect();
            let mut dcors = Vec::with_capacity(outcomes.len());
            let mut secs = Vec::with_capacity(outcomes.len());
            for outcome in outcomes {
                let o = outcome?;
                dcors.push(o.dcor);
                secs.push(o.seconds);
            }
            let method_name = match method {
                MethodArg::Benn => "benn",
                MethodArg::Gsir => "gsir",
            };
            lines.push(format!(
                "{method_name},{n},{:.4},{:.4},{:.3}",
                stats::mean(&dcors),
                stats::sample_sd(&dcors),
                stats::mean(&secs)
            ));
            eprintln!("{method_name} n={n} done");
        }
    }

    let table = lines.join("\n");
    match &args.out {
        Some(path) => std::fs::write(path, format!("{table}\n"))?,
        None => println!("{table}"),
    }
    Ok(())
}
