//! Dataset ingestion, one-class task construction and standardization.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Labeled samples, one column per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub x: DenseMatrix,
    /// Index into `class_names` for every sample.
    pub labels: Vec<usize>,
    /// Sorted class names.
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, x: DenseMatrix, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if labels.len() != x.cols() {
            return Err(Error::InvalidShape(format!(
                "{} labels for {} samples",
                labels.len(),
                x.cols()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidShape(format!("label {bad} has no class name")));
        }
        if x.cols() < 2 {
            return Err(Error::InsufficientData(format!("dataset has {} samples", x.cols())));
        }
        Ok(Self {
            name: name.into(),
            x,
            labels,
            class_names,
        })
    }

    pub fn dim(&self) -> usize {
        self.x.rows()
    }

    pub fn len(&self) -> usize {
        self.x.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.x.cols() == 0
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_size(&self, class: usize) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }
}

fn csv_error(e: &csv::Error) -> Error {
    let line = e.position().map_or(0, csv::Position::line);
    Error::FormatError {
        line,
        message: e.to_string(),
    }
}

/// Parsed numeric CSV with the label column split out (if requested).
struct RawTable {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Vec<String>,
}

fn read_table(path: &Path, label_column: Option<&str>) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("{}: {e}", path.display()),
            )),
            _ => csv_error(&e),
        })?;
    let headers = reader.headers().map_err(|e| csv_error(&e))?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(Error::FormatError {
            line: 1,
            message: "missing header row".into(),
        });
    }
    let label_idx = match label_column {
        Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| Error::FormatError {
            line: 1,
            message: format!("label column '{name}' not found"),
        })?),
        None => None,
    };
    let header: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map_or(0, csv::Position::line);
        let mut row = Vec::with_capacity(header.len());
        for (i, field) in record.iter().enumerate() {
            if Some(i) == label_idx {
                labels.push(field.to_string());
                continue;
            }
            let v: f64 = field.parse().map_err(|_| Error::FormatError {
                line,
                message: format!("non-numeric value '{field}' in column '{}'", &headers[i]),
            })?;
            if !v.is_finite() {
                return Err(Error::FormatError {
                    line,
                    message: format!("non-finite value '{field}'"),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::FormatError {
            line: 1,
            message: "no data rows".into(),
        });
    }
    Ok(RawTable { header, rows, labels })
}

fn rows_to_columns(rows: &[Vec<f64>], dim: usize) -> Result<DenseMatrix> {
    let mut data = Vec::with_capacity(rows.len() * dim);
    for row in rows {
        data.extend_from_slice(row);
    }
    DenseMatrix::new(dim, rows.len(), data)
}

/// Loads a labeled dataset: header row, numeric feature columns and one label
/// column. The dataset is named after the file stem.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let table = read_table(path, Some(label_column))?;
    let dim = table.header.len();
    let class_names: Vec<String> = table
        .labels
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let labels = table
        .labels
        .iter()
        .map(|l| class_names.binary_search(l).expect("label collected above"))
        .collect();
    let name = path
        .file_stem()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    Dataset::new(name, rows_to_columns(&table.rows, dim)?, labels, class_names)
}

/// Loads an unlabeled feature CSV, dropping `ignore_column` if present.
/// Returns the feature names and the D×n sample matrix.
pub fn load_features_csv(path: impl AsRef<Path>, ignore_column: Option<&str>) -> Result<(Vec<String>, DenseMatrix)> {
    let path = path.as_ref();
    let probe = read_header(path)?;
    let drop = ignore_column.filter(|c| probe.iter().any(|h| h == c));
    let table = read_table(path, drop)?;
    let dim = table.header.len();
    let x = rows_to_columns(&table.rows, dim)?;
    Ok((table.header, x))
}

fn read_header(path: &Path) -> Result<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(&e))?;
    Ok(reader
        .headers()
        .map_err(|e| csv_error(&e))?
        .iter()
        .map(str::to_string)
        .collect())
}

/// One class of a dataset treated as the target class.
#[derive(Debug, Clone)]
pub struct TaskTemplate {
    pub name: String,
    pub target: usize,
    pub dataset: Arc<Dataset>,
}

impl TaskTemplate {
    pub fn target_name(&self) -> &str {
        &self.dataset.class_names[self.target]
    }
}

/// One task per class, named `<dataset>-<class>`.
pub fn make_tasks(dataset: &Arc<Dataset>) -> Vec<TaskTemplate> {
    (0..dataset.class_count())
        .map(|target| TaskTemplate {
            name: format!("{}-{}", dataset.name, dataset.class_names[target]),
            target,
            dataset: Arc::clone(dataset),
        })
        .collect()
}

/// Per-feature mean and population standard deviation of the raw target
/// training block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    /// Zero-variance features store 1 so they pass through centered.
    pub std: Vec<f64>,
}

impl NormStats {
    pub fn fit(x: &DenseMatrix) -> Result<Self> {
        let n = x.cols();
        if n < 2 {
            return Err(Error::InsufficientData(format!(
                "standardization needs at least 2 samples, got {n}"
            )));
        }
        let d = x.rows();
        let mut mean = vec![0.0; d];
        for col in x.columns() {
            for (m, v) in mean.iter_mut().zip(col) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; d];
        for col in x.columns() {
            for ((s, v), m) in var.iter_mut().zip(col).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n as f64).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.rows() != self.dim() {
            return Err(Error::InvalidShape(format!(
                "samples have {} features, statistics have {}",
                x.rows(),
                self.dim()
            )));
        }
        Ok(DenseMatrix::from_fn(x.rows(), x.cols(), |i, j| {
            (x.get(i, j) - self.mean[i]) / self.std[i]
        }))
    }
}

/// Standardizes `train_target` and every block in `others` with the
/// statistics of `train_target`.
pub fn standardize(
    train_target: &DenseMatrix,
    others: &[&DenseMatrix],
) -> Result<(DenseMatrix, Vec<DenseMatrix>, NormStats)> {
    let stats = NormStats::fit(train_target)?;
    let train = stats.apply(train_target)?;
    let rest = others.iter().map(|m| stats.apply(m)).collect::<Result<_>>()?;
    Ok((train, rest, stats))
}

/// A standardized one-class problem from one random split.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub name: String,
    pub target: usize,
    /// Target-class training samples (D×N).
    pub x_train: DenseMatrix,
    /// Non-target training samples (D×N_neg).
    pub x_neg_train: DenseMatrix,
    pub x_test: DenseMatrix,
    /// `true` for target-class test samples.
    pub y_test: Vec<bool>,
    pub norm: NormStats,
}

/// Stratified split of the whole dataset; `ratio` of each class goes to
/// training.
///
/// Each class contributes `⌊ratio·n_c⌋` training samples and the remaining
/// `round(ratio·N) − Σ⌊ratio·n_c⌋` slots go to randomly chosen classes with a
/// fractional remainder, so per-class counts can vary by one between splits.
pub fn split_task<R: Rng + ?Sized>(template: &TaskTemplate, ratio: f64, rng: &mut R) -> Result<Task> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("train ratio must be in (0, 1), got {ratio}")));
    }
    let ds = &template.dataset;
    let classes = ds.class_count();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in ds.labels.iter().enumerate() {
        members[l].push(i);
    }
    for (c, m) in members.iter().enumerate() {
        if m.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "class '{}' has {} sample(s); need at least 2",
                ds.class_names[c],
                m.len()
            )));
        }
    }

    let mut train_counts: Vec<usize> = members
        .iter()
        .map(|m| (ratio * m.len() as f64 + 1e-9).floor() as usize)
        .collect();
    let wanted = (ratio * ds.len() as f64).round() as usize;
    let mut extra = wanted.saturating_sub(train_counts.iter().sum());
    let mut candidates: Vec<usize> = (0..classes)
        .filter(|&c| (ratio * members[c].len() as f64) > train_counts[c] as f64 + 1e-9)
        .collect();
    candidates.shuffle(rng);
    for c in candidates {
        if extra == 0 {
            break;
        }
        train_counts[c] += 1;
        extra -= 1;
    }

    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (c, m) in members.iter_mut().enumerate() {
        m.shuffle(rng);
        let k = train_counts[c].clamp(1, m.len() - 1);
        let (tr, te) = m.split_at(k);
        train_idx.extend_from_slice(tr);
        test_idx.extend_from_slice(te);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let target = template.target;
    let (tgt, neg): (Vec<usize>, Vec<usize>) = train_idx.iter().partition(|&&i| ds.labels[i] == target);
    let raw_train = ds.x.select_columns(&tgt);
    let raw_neg = ds.x.select_columns(&neg);
    let raw_test = ds.x.select_columns(&test_idx);
    let (x_train, mut rest, norm) = standardize(&raw_train, &[&raw_neg, &raw_test])?;
    let x_test = rest.pop().expect("two blocks");
    let x_neg_train = rest.pop().expect("two blocks");
    Ok(Task {
        name: template.name.clone(),
        target,
        x_train,
        x_neg_train,
        x_test,
        y_test: test_idx.iter().map(|&i| ds.labels[i] == target).collect(),
        norm,
    })
}

/// Geometric mean of TPR and TNR, in percent. `true` marks the target class.
pub fn gmean(y_true: &[bool], y_pred: &[bool]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::InvalidShape(format!(
            "{} labels vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let (mut tp, mut pos, mut tn, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t {
            pos += 1;
            tp += usize::from(p);
        } else {
            neg += 1;
            tn += usize::from(!p);
        }
    }
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric(
            "Gmean needs both target and outlier samples".into(),
        ));
    }
    let tpr = tp as f64 / pos as f64;
    let tnr = tn as f64 / neg as f64;
    Ok(100.0 * (tpr * tnr).sqrt())
}
