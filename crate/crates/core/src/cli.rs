//! Command-line frontend.
//!
//! Exit codes: 0 success, 1 other failure (including a failed self-check),
//! 2 bad configuration or arguments, 3 dataset missing or unreadable,
//! 4 model file or version mismatch, 5 dimension mismatch.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{load_csv, load_features_csv, standardize};
use crate::error::{Error, Result};
use crate::experiment::{results_csv, results_markdown, run_experiment, ExperimentConfig};
use crate::linalg::DenseMatrix;
use crate::persist::ModelFile;
use crate::pipeline::{EvalPath, Hyperparams, KernelChoice, Method, ModelSpec, OneClassModel};
use crate::reference::DEFAULT_EIGEN_TOL;
use crate::selfcheck::{run_all, SelfCheckOptions};

#[derive(Debug, Parser)]
#[command(name = "refkernel", version, about = "Reference kernels for one-class classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the split × repeat protocol and write results.csv / results.md.
    RunExperiment(RunArgs),
    /// Fit one model on a CSV and write a model file.
    Fit(FitArgs),
    /// Score a CSV with a saved model: one `index,score,is_target` line per row.
    Score(ScoreArgs),
    /// Run the built-in property suite.
    SelfCheck(SelfCheckArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Flat key = value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config entry (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Master seed; falls back to REFKERNEL_SEED, then to the config.
    #[arg(long, env = "REFKERNEL_SEED")]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Training CSV with a header row.
    #[arg(long)]
    pub train: PathBuf,
    /// Label column of the training CSV; requires --target.
    #[arg(long, requires = "target")]
    pub label_column: Option<String>,
    /// Target class; other rows become negatives.
    #[arg(long, requires = "label_column")]
    pub target: Option<String>,
    /// Extra CSV of non-target samples (reference case 5).
    #[arg(long)]
    pub negatives: Option<PathBuf>,
    #[arg(long, default_value = "svdd")]
    pub method: Method,
    /// `base` or a reference case 1..7.
    #[arg(long, default_value = "base")]
    pub case: KernelChoice,
    #[arg(long, default_value = "kernel")]
    pub path: EvalPath,
    /// RBF scale s; σ = √(s·d_aver).
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// C for SVDD, ν for OC-SVM.
    #[arg(long, default_value_t = 0.1)]
    pub trade_off: f64,
    #[arg(long, default_value_t = DEFAULT_EIGEN_TOL)]
    pub eigen_tol: f64,
    #[arg(long, env = "REFKERNEL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output directory; the model is written to <out>/model.json.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Explicit model path (overrides --out).
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Column to drop from the input if present.
    #[arg(long, default_value = "class")]
    pub label_column: String,
}

#[derive(Debug, Args)]
pub struct SelfCheckArgs {
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, hide = true, default_value_t = DEFAULT_EIGEN_TOL)]
    pub eigen_tol: f64,
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::MissingNegatives
        | Error::InfeasibleC { .. }
        | Error::InfeasibleNu { .. }
        | Error::NoFeasibleHyperparams => 2,
        Error::Io(_) | Error::FormatError { .. } => 3,
        Error::ModelFormat(_) => 4,
        Error::InvalidShape(_) => 5,
        _ => 1,
    }
}

fn ensure_exists(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} not found", path.display()),
        )))
    }
}

pub fn run_experiment_cmd(args: &RunArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    for o in &args.overrides {
        cfg.apply_override(o)?;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if cfg.datasets.is_empty() {
        return Err(Error::Config("no datasets configured".into()));
    }
    let progress = |msg: &str| eprintln!("[refkernel] {msg}");
    let records = match args.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| run_experiment(&cfg, &progress))?,
        None => run_experiment(&cfg, &progress)?,
    };
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("results.csv"), results_csv(&records)?)?;
    std::fs::write(args.out.join("results.md"), results_markdown(&records))?;
    let runs = serde_json::to_string_pretty(&records).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(args.out.join("runs.json"), runs)?;
    for r in &records {
        for e in &r.errors {
            eprintln!("[refkernel] {} {} {} {}: failed run ({e})", r.task, r.method, r.path, r.choice);
        }
    }
    eprintln!("[refkernel] wrote {} records to {}", records.len(), args.out.display());
    Ok(())
}

pub fn fit_cmd(args: &FitArgs) -> Result<PathBuf> {
    ensure_exists(&args.train)?;
    let (names, raw_targets, mut raw_neg) = match (&args.label_column, &args.target) {
        (Some(col), Some(target)) => {
            let ds = load_csv(&args.train, col)?;
            let class = ds
                .class_names
                .iter()
                .position(|c| c == target)
                .ok_or_else(|| Error::Config(format!("class '{target}' not in {}", args.train.display())))?;
            let (tgt, neg): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&i| ds.labels[i] == class);
            let names = load_features_csv(&args.train, Some(col))?.0;
            (names, ds.x.select_columns(&tgt), Some(ds.x.select_columns(&neg)))
        }
        _ => {
            let (names, x) = load_features_csv(&args.train, None)?;
            (names, x, None)
        }
    };
    if let Some(path) = &args.negatives {
        ensure_exists(path)?;
        let (_, extra) = load_features_csv(path, args.label_column.as_deref())?;
        raw_neg = Some(match raw_neg {
            Some(n) => n.hstack(&extra)?,
            None => extra,
        });
    }
    let raw_neg = raw_neg.filter(|n| n.cols() > 0);
    let others: Vec<&DenseMatrix> = raw_neg.iter().collect();
    let (x, rest, norm) = standardize(&raw_targets, &others)?;
    let spec = ModelSpec {
        method: args.method,
        path: args.path,
        choice: args.case,
        hyper: Hyperparams {
            scale: args.scale,
            trade_off: args.trade_off,
        },
        eigen_tol: args.eigen_tol,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let model = OneClassModel::fit(spec, &x, rest.first(), &mut rng)?;
    let file = ModelFile::new(names, norm, model);
    let path = match &args.model {
        Some(p) => p.clone(),
        None => {
            std::fs::create_dir_all(&args.out)?;
            args.out.join("model.json")
        }
    };
    file.save(&path)?;
    Ok(path)
}

pub fn score_cmd(args: &ScoreArgs) -> Result<Vec<(f64, bool)>> {
    ensure_exists(&args.model)?;
    let file = ModelFile::load(&args.model)?;
    ensure_exists(&args.input)?;
    let (_, raw) = load_features_csv(&args.input, Some(&args.label_column))?;
    if raw.rows() != file.norm.dim() {
        return Err(Error::InvalidShape(format!(
            "input has {} features, model expects {}",
            raw.rows(),
            file.norm.dim()
        )));
    }
    file.decide_raw(&raw)
}

/// Runs the property suite and prints one line per property. Returns
/// whether everything passed.
pub fn self_check_cmd(args: &SelfCheckArgs) -> bool {
    let mut opts = SelfCheckOptions {
        eigen_tol: args.eigen_tol,
        instances: args.instances.max(1),
        ..SelfCheckOptions::default()
    };
    if let Some(seed) = args.seed {
        opts.seed = seed;
    }
    let start = std::time::Instant::now();
    let results = run_all(&opts);
    let mut ok = true;
    for r in &results {
        println!(
            "{} {:<18} {:>4} instances  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.instances,
            r.detail
        );
        ok &= r.passed;
    }
    println!("self-check {} in {:.1?}", if ok { "passed" } else { "FAILED" }, start.elapsed());
    ok
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::RunExperiment(a) => run_experiment_cmd(a),
        Command::Fit(a) => fit_cmd(a).map(|p| eprintln!("[refkernel] model written to {}", p.display())),
        Command::Score(a) => score_cmd(a).map(|rows| {
            println!("index,score,is_target");
            for (i, (s, t)) in rows.iter().enumerate() {
                println!("{i},{s:.10e},{t}");
            }
        }),
        Command::SelfCheck(a) => return i32::from(!self_check_cmd(a)),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
