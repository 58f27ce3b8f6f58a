//! Grid-search cross-validation and the repeated split protocol.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{gmean, load_csv, make_tasks, split_task, Task, TaskTemplate};
use crate::error::{Error, Result};
use crate::kernel::{sigma_from_scale, BaseKernel};
use crate::linalg::DenseMatrix;
use crate::pipeline::{solve, EvalPath, Hyperparams, KernelChoice, KernelSetup, Method, ModelSpec, OneClassModel};
use crate::reference::DEFAULT_EIGEN_TOL;
use crate::solver::SolverOptions;

/// Where validation negatives come from during cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NegativeStrategy {
    /// Every non-target sample of the training split.
    TrainSplitNegatives,
    /// Uniform draws in the bounding box of the fold's training targets, as
    /// many as there are validation targets.
    PseudoUniform,
}

impl FromStr for NegativeStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "train-split-negatives" => Ok(Self::TrainSplitNegatives),
            "pseudo-uniform" => Ok(Self::PseudoUniform),
            other => Err(Error::Config(format!("unknown cv_negative_strategy '{other}'"))),
        }
    }
}

impl std::fmt::Display for NegativeStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::TrainSplitNegatives => "train-split-negatives",
            Self::PseudoUniform => "pseudo-uniform",
        })
    }
}

/// Hyperparameter grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    pub scale: Vec<f64>,
    pub c: Vec<f64>,
    pub nu: Vec<f64>,
}

impl Default for Grids {
    fn default() -> Self {
        let trade = vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        Self {
            scale: vec![0.1, 1.0, 10.0, 100.0, 1000.0],
            c: trade.clone(),
            nu: trade,
        }
    }
}

impl Grids {
    pub fn trade_off(&self, method: Method) -> &[f64] {
        match method {
            Method::Svdd => &self.c,
            Method::Ocsvm => &self.nu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub datasets: Vec<PathBuf>,
    pub label_column: String,
    /// Task names to keep (`<dataset>-<class>`); empty keeps all.
    pub tasks: Vec<String>,
    pub methods: Vec<Method>,
    pub paths: Vec<EvalPath>,
    pub cases: Vec<KernelChoice>,
    pub grids: Grids,
    pub splits: usize,
    pub repeats: usize,
    pub cv_folds: usize,
    pub train_ratio: f64,
    pub eigen_tol: f64,
    pub master_seed: u64,
    pub cv_negative_strategy: NegativeStrategy,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            label_column: "class".into(),
            tasks: Vec::new(),
            methods: vec![Method::Svdd, Method::Ocsvm],
            paths: vec![EvalPath::Kernel],
            cases: KernelChoice::all(),
            grids: Grids::default(),
            splits: 5,
            repeats: 5,
            cv_folds: 5,
            train_ratio: 0.7,
            eigen_tol: DEFAULT_EIGEN_TOL,
            master_seed: 0,
            cv_negative_strategy: NegativeStrategy::TrainSplitNegatives,
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse()
                .map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{}'", value.trim())))
}

fn parse_enum_list<T: FromStr<Err = Error>>(value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(str::parse)
        .collect()
}

impl ExperimentConfig {
    /// Parses flat `key = value` text. `#` starts a comment; list values are
    /// comma separated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
        self.set(key.trim(), value.trim())?;
        self.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "datasets" => self.datasets = value.split(',').map(str::trim).filter(|v| !v.is_empty()).map(PathBuf::from).collect(),
            "label_column" => self.label_column = value.to_string(),
            "tasks" => self.tasks = value.split(',').map(str::trim).filter(|v| !v.is_empty()).map(String::from).collect(),
            "methods" => self.methods = parse_enum_list(value)?,
            "paths" => self.paths = parse_enum_list(value)?,
            "cases" => self.cases = parse_enum_list(value)?,
            "grid_s" | "grid_scale" => self.grids.scale = parse_list(key, value)?,
            "grid_c" => self.grids.c = parse_list(key, value)?,
            "grid_nu" => self.grids.nu = parse_list(key, value)?,
            "splits" => self.splits = parse_one(key, value)?,
            "repeats" => self.repeats = parse_one(key, value)?,
            "cv_folds" => self.cv_folds = parse_one(key, value)?,
            "train_ratio" => self.train_ratio = parse_one(key, value)?,
            "eigen_tol" => self.eigen_tol = parse_one(key, value)?,
            "master_seed" | "seed" => self.master_seed = parse_one(key, value)?,
            "cv_negative_strategy" => self.cv_negative_strategy = value.parse()?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.splits == 0 || self.repeats == 0 || self.cv_folds == 0 {
            return Err(Error::Config("splits, repeats and cv_folds must be ≥ 1".into()));
        }
        if self.grids.scale.is_empty() || self.grids.c.is_empty() || self.grids.nu.is_empty() {
            return Err(Error::Config("grids must be nonempty".into()));
        }
        if self.grids.scale.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::Config("grid_s values must be positive".into()));
        }
        if self.methods.is_empty() || self.paths.is_empty() || self.cases.is_empty() {
            return Err(Error::Config("methods, paths and cases must be nonempty".into()));
        }
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return Err(Error::Config("train_ratio must be in (0, 1)".into()));
        }
        if self.eigen_tol.is_nan() || self.eigen_tol <= 0.0 {
            return Err(Error::Config("eigen_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Per-run seed from the master seed and a list of labels.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix(master ^ 0x5851_f42d_4c95_7f2d);
    for &p in parts {
        h = splitmix(h ^ splitmix(p));
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit FNV-1a hash of a label.
pub fn label_hash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

fn choice_code(choice: KernelChoice) -> u64 {
    match choice {
        KernelChoice::Base => 0,
        KernelChoice::Reference(c) => u64::from(c.id()),
    }
}

/// What a cross-validation search needs to know about the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpace<'a> {
    pub method: Method,
    pub path: EvalPath,
    pub choice: KernelChoice,
    pub grids: &'a Grids,
    pub folds: usize,
    pub eigen_tol: f64,
    pub negatives: NegativeStrategy,
}

/// Result of a grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub best: Hyperparams,
    pub score: f64,
    /// Mean validation Gmean per grid point, `-inf` when infeasible.
    pub table: Vec<(Hyperparams, f64)>,
}

fn sorted_grid(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn uniform_box<R: Rng + ?Sized>(x: &DenseMatrix, count: usize, rng: &mut R) -> DenseMatrix {
    let d = x.rows();
    let lo: Vec<f64> = (0..d).map(|i| (0..x.cols()).map(|j| x.get(i, j)).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..d).map(|i| (0..x.cols()).map(|j| x.get(i, j)).fold(f64::NEG_INFINITY, f64::max)).collect();
    DenseMatrix::from_fn(d, count, |i, _| {
        if hi[i] > lo[i] {
            rng.random_range(lo[i]..hi[i])
        } else {
            lo[i]
        }
    })
}

/// Grid search by k-fold cross-validation on the target training block.
///
/// Each grid point scores the mean validation Gmean over folds; any
/// infeasible fold makes the point `-inf`. Ties go to the smallest scale,
/// then the smallest trade-off.
pub fn cross_validate<R: Rng + ?Sized>(task: &Task, space: &SearchSpace<'_>, rng: &mut R) -> Result<CvOutcome> {
    let n = task.x_train.cols();
    let k = space.folds;
    if k < 2 {
        return Err(Error::Config("cross-validation needs at least 2 folds".into()));
    }
    if n < k {
        return Err(Error::InsufficientData(format!("{n} target samples for {k} folds")));
    }
    let scales = sorted_grid(&space.grids.scale);
    let trades = sorted_grid(space.grids.trade_off(space.method));
    let mut sums = vec![vec![0.0f64; trades.len()]; scales.len()];

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let opts = SolverOptions {
        check_psd: false,
        ..SolverOptions::default()
    };
    let x_neg = (task.x_neg_train.cols() > 0).then_some(&task.x_neg_train);

    for fold in 0..k {
        let val_idx: Vec<usize> = order.iter().enumerate().filter(|(i, _)| i % k == fold).map(|(_, &j)| j).collect();
        let fit_idx: Vec<usize> = order.iter().enumerate().filter(|(i, _)| i % k != fold).map(|(_, &j)| j).collect();
        let x_fit = task.x_train.select_columns(&fit_idx);
        let val_neg = match space.negatives {
            NegativeStrategy::TrainSplitNegatives => task.x_neg_train.clone(),
            NegativeStrategy::PseudoUniform => uniform_box(&x_fit, val_idx.len(), rng),
        };
        let x_val = task.x_train.select_columns(&val_idx).hstack(&val_neg)?;
        let mut y_val = vec![true; val_idx.len()];
        y_val.extend(std::iter::repeat_n(false, val_neg.cols()));

        let refs = space.choice.references(&x_fit, x_neg, rng)?;
        for (si, &s) in scales.iter().enumerate() {
            let prepared = sigma_from_scale(&x_fit, s)
                .and_then(BaseKernel::rbf)
                .and_then(|base| KernelSetup::new(space.choice, space.path, base, &x_fit, refs.as_ref(), space.eigen_tol))
                .and_then(|setup| {
                    let gram = setup.train_gram()?;
                    let (cross, kzz) = setup.cross(&x_val)?;
                    Ok((gram, cross, kzz))
                });
            let Ok((gram, cross, kzz)) = prepared else {
                sums[si].iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
                continue;
            };
            for (ti, &t) in trades.iter().enumerate() {
                if sums[si][ti] == f64::NEG_INFINITY {
                    continue;
                }
                let score = solve(&gram, space.method, t, &opts)
                    .and_then(|sol| sol.decide(&cross, &kzz))
                    .and_then(|d| gmean(&y_val, &d.iter().map(|&(_, p)| p).collect::<Vec<_>>()));
                match score {
                    Ok(g) => sums[si][ti] += g,
                    Err(Error::UndefinedMetric(m)) => return Err(Error::UndefinedMetric(m)),
                    Err(_) => sums[si][ti] = f64::NEG_INFINITY,
                }
            }
        }
    }

    let mut table = Vec::with_capacity(scales.len() * trades.len());
    let mut best: Option<(Hyperparams, f64)> = None;
    for (si, &scale) in scales.iter().enumerate() {
        for (ti, &trade_off) in trades.iter().enumerate() {
            let hp = Hyperparams { scale, trade_off };
            let mean = sums[si][ti] / k as f64;
            table.push((hp, mean));
            if mean.is_finite() && best.is_none_or(|(_, b)| mean > b) {
                best = Some((hp, mean));
            }
        }
    }
    let (best, score) = best.ok_or(Error::NoFeasibleHyperparams)?;
    Ok(CvOutcome { best, score, table })
}

/// One task × method × path × kernel choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub method: Method,
    pub path: EvalPath,
    pub choice: KernelChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub split: usize,
    pub repeat: usize,
    pub hyper: Hyperparams,
    pub gmean: f64,
    pub rank: usize,
    /// Feature dimension on the mapping path, reference rank on the kernel
    /// path; `None` for the base kernel on the kernel path.
    pub reference_rank: Option<usize>,
}

/// Runs CV, the final fit and test scoring for one split and repeat.
pub fn run_single(task: &Task, cell: Cell, grids: &Grids, cfg: &ExperimentConfig, seed: u64) -> Result<(Hyperparams, OneClassModel, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = SearchSpace {
        method: cell.method,
        path: cell.path,
        choice: cell.choice,
        grids,
        folds: cfg.cv_folds,
        eigen_tol: cfg.eigen_tol,
        negatives: cfg.cv_negative_strategy,
    };
    let cv = cross_validate(task, &space, &mut rng)?;
    let spec = ModelSpec {
        method: cell.method,
        path: cell.path,
        choice: cell.choice,
        hyper: cv.best,
        eigen_tol: cfg.eigen_tol,
    };
    let x_neg = (task.x_neg_train.cols() > 0).then_some(&task.x_neg_train);
    let model = OneClassModel::fit(spec, &task.x_train, x_neg, &mut rng)?;
    let pred = model.predict(&task.x_test)?;
    let g = gmean(&task.y_test, &pred)?;
    Ok((cv.best, model, g))
}

/// Aggregated outcome of all runs of one task and cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub task: String,
    pub method: Method,
    pub path: EvalPath,
    pub choice: KernelChoice,
    pub gmean_mean: f64,
    pub gmean_std: f64,
    pub rank_mean: f64,
    /// Successful runs.
    pub runs: usize,
    pub failures: usize,
    pub hyperparams: Vec<Hyperparams>,
    pub outcomes: Vec<RunOutcome>,
    pub errors: Vec<String>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Loads every configured dataset and builds the task templates, keeping
/// those named in `cfg.tasks` (all when empty).
pub fn load_tasks(cfg: &ExperimentConfig) -> Result<Vec<TaskTemplate>> {
    let mut out = Vec::new();
    for path in &cfg.datasets {
        if !path.exists() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("dataset {} not found", path.display()),
            )));
        }
        let ds = Arc::new(load_csv(path, &cfg.label_column)?);
        out.extend(make_tasks(&ds));
    }
    if !cfg.tasks.is_empty() {
        for wanted in &cfg.tasks {
            if !out.iter().any(|t| &t.name == wanted) {
                return Err(Error::Config(format!("task '{wanted}' not found")));
            }
        }
        out.retain(|t| cfg.tasks.contains(&t.name));
    }
    Ok(out)
}

/// Full protocol over the given task templates.
///
/// Splits depend only on (seed, task, split), so every cell sees the same
/// splits. References and fold assignments depend on (seed, task, kernel
/// choice, split, repeat) and are shared by both methods and both paths.
/// `progress` receives one line per finished task.
pub fn run_protocol(
    cfg: &ExperimentConfig,
    templates: &[TaskTemplate],
    progress: &(dyn Fn(&str) + Sync),
) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let cells: Vec<Cell> = cfg
        .methods
        .iter()
        .flat_map(|&method| {
            cfg.cases.iter().flat_map(move |&choice| {
                cfg.paths.iter().map(move |&path| Cell { method, path, choice })
            })
        })
        .collect();

    let mut records = Vec::new();
    for template in templates {
        let task_key = label_hash(&template.name);
        let tasks: Vec<Task> = (0..cfg.splits)
            .map(|split| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, &[task_key, 0x5911, split as u64]));
                split_task(template, cfg.train_ratio, &mut rng)
            })
            .collect::<Result<_>>()?;

        let jobs: Vec<(usize, usize, usize)> = (0..cells.len())
            .flat_map(|c| (0..cfg.splits).flat_map(move |s| (0..cfg.repeats).map(move |r| (c, s, r))))
            .collect();
        let results: Vec<Result<RunOutcome>> = jobs
            .par_iter()
            .map(|&(c, split, repeat)| {
                let cell = cells[c];
                let seed = derive_seed(
                    cfg.master_seed,
                    &[task_key, choice_code(cell.choice), split as u64, repeat as u64],
                );
                let (hyper, model, g) = run_single(&tasks[split], cell, &cfg.grids, cfg, seed)?;
                Ok(RunOutcome {
                    split,
                    repeat,
                    hyper,
                    gmean: g,
                    rank: model.rank,
                    reference_rank: model.setup.reference_model().map(|m| m.rank()),
                })
            })
            .collect();

        let mut by_cell: BTreeMap<usize, (Vec<RunOutcome>, Vec<String>)> = BTreeMap::new();
        for (&(c, split, repeat), res) in jobs.iter().zip(results) {
            let entry = by_cell.entry(c).or_default();
            match res {
                Ok(o) => entry.0.push(o),
                Err(e) => entry.1.push(format!("split {split} repeat {repeat}: {e}")),
            }
        }
        for (c, (outcomes, errors)) in by_cell {
            let cell = cells[c];
            let gm: Vec<f64> = outcomes.iter().map(|o| o.gmean).collect();
            let rk: Vec<f64> = outcomes.iter().map(|o| o.rank as f64).collect();
            let (gmean_mean, gmean_std) = mean_std(&gm);
            let (rank_mean, _) = mean_std(&rk);
            records.push(ResultRecord {
                task: template.name.clone(),
                method: cell.method,
                path: cell.path,
                choice: cell.choice,
                gmean_mean,
                gmean_std,
                rank_mean,
                runs: outcomes.len(),
                failures: errors.len(),
                hyperparams: outcomes.iter().map(|o| o.hyper).collect(),
                outcomes,
                errors,
            });
        }
        progress(&format!("{} done ({} runs per cell)", template.name, cfg.splits * cfg.repeats));
    }
    Ok(records)
}

/// Loads the configured datasets and runs the protocol.
pub fn run_experiment(cfg: &ExperimentConfig, progress: &(dyn Fn(&str) + Sync)) -> Result<Vec<ResultRecord>> {
    let templates = load_tasks(cfg)?;
    run_protocol(cfg, &templates, progress)
}

/// Results CSV: one row per record.
pub fn results_csv(records: &[ResultRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["task", "method", "path", "case", "gmean_mean", "gmean_std", "rank_mean", "runs", "failures"])
        .map_err(|e| Error::Config(e.to_string()))?;
    for r in records {
        w.write_record([
            r.task.clone(),
            r.method.to_string(),
            r.path.to_string(),
            r.choice.label(),
            format!("{:.4}", r.gmean_mean),
            format!("{:.4}", r.gmean_std),
            format!("{:.4}", r.rank_mean),
            r.runs.to_string(),
            r.failures.to_string(),
        ])
        .map_err(|e| Error::Config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Markdown tables, one per method and path: tasks as rows, kernel choices
/// as columns, cells `mean±std (rank)`, plus an average row.
pub fn results_markdown(records: &[ResultRecord]) -> String {
    let mut groups: BTreeMap<(Method, EvalPath), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.method, r.path)).or_default().push(r);
    }
    let mut out = String::new();
    for ((method, path), recs) in groups {
        let mut choices: Vec<KernelChoice> = recs.iter().map(|r| r.choice).collect();
        choices.sort();
        choices.dedup();
        let mut tasks: Vec<&str> = Vec::new();
        for r in &recs {
            if !tasks.contains(&r.task.as_str()) {
                tasks.push(&r.task);
            }
        }
        let header: Vec<String> = std::iter::once("Task".to_string())
            .chain(choices.iter().map(|c| match c {
                KernelChoice::Base => "Base".to_string(),
                KernelChoice::Reference(rc) => format!("Case {}", rc.id()),
            }))
            .collect();
        let mut rows: Vec<Vec<String>> = Vec::new();
        let mut sums = vec![(0.0, 0usize); choices.len()];
        for task in &tasks {
            let mut row = vec![task.to_string()];
            for (ci, c) in choices.iter().enumerate() {
                let cell = recs.iter().find(|r| r.task == *task && r.choice == *c);
                row.push(match cell {
                    Some(r) if r.runs > 0 => {
                        sums[ci].0 += r.gmean_mean;
                        sums[ci].1 += 1;
                        format!("{:.1}±{:.1} ({:.1})", r.gmean_mean, r.gmean_std, r.rank_mean)
                    }
                    _ => "n/a".to_string(),
                });
            }
            rows.push(row);
        }
        let mut avg = vec!["Aver.".to_string()];
        avg.extend(sums.iter().map(|&(s, n)| {
            if n > 0 {
                format!("{:.1}", s / n as f64)
            } else {
                "n/a".into()
            }
        }));
        rows.push(avg);

        let widths: Vec<usize> = (0..header.len())
            .map(|i| rows.iter().map(|r| r[i].chars().count()).chain([header[i].chars().count()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                .collect();
            format!("| {} |\n", padded.join(" | "))
        };
        let _ = writeln!(out, "### {} ({} path)\n", method.to_string().to_uppercase(), path);
        out.push_str(&line(&header));
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        out.push_str(&line(&rule));
        for r in &rows {
            out.push_str(&line(r));
        }
        out.push('\n');
    }
    out
}
