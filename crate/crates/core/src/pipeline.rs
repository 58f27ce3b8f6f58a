//! End-to-end one-class models: kernel choice, evaluation path and solver.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kernel_diagonal, kernel_matrix, sigma_from_scale, BaseKernel};
use crate::linalg::{dot, sym_eig, DenseMatrix};
use crate::reference::{fit_reference, npt_fit, select_references, ReferenceCase, ReferenceModel};
use crate::solver::{
    ocsvm_decide, ocsvm_fit_with, svdd_decide, svdd_fit_with, OcsvmModel, SolverOptions, SvddModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Svdd,
    Ocsvm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Svdd => "svdd",
            Self::Ocsvm => "ocsvm",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "svdd" => Ok(Self::Svdd),
            "ocsvm" | "oc-svm" => Ok(Self::Ocsvm),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// How the kernel is handed to the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalPath {
    /// Precomputed kernel matrix.
    Kernel,
    /// Explicit features with a linear kernel.
    Mapping,
}

impl fmt::Display for EvalPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Kernel => "kernel",
            Self::Mapping => "mapping",
        })
    }
}

impl FromStr for EvalPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kernel" => Ok(Self::Kernel),
            "mapping" | "linear" => Ok(Self::Mapping),
            other => Err(Error::Config(format!("unknown path '{other}'"))),
        }
    }
}

/// Base RBF kernel or one of the seven reference constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KernelChoice {
    Base,
    Reference(ReferenceCase),
}

impl KernelChoice {
    /// `base` followed by cases 1..=7.
    pub fn all() -> Vec<Self> {
        std::iter::once(Self::Base)
            .chain(ReferenceCase::ALL.into_iter().map(Self::Reference))
            .collect()
    }

    pub fn label(self) -> String {
        match self {
            Self::Base => "base".into(),
            Self::Reference(c) => c.id().to_string(),
        }
    }

    /// Draws the reference set for this choice (`None` for the base kernel).
    pub fn references<R: Rng + ?Sized>(
        self,
        x: &DenseMatrix,
        x_neg: Option<&DenseMatrix>,
        rng: &mut R,
    ) -> Result<Option<DenseMatrix>> {
        match self {
            Self::Base => Ok(None),
            Self::Reference(case) => select_references(case, x, x_neg, rng).map(Some),
        }
    }
}

impl fmt::Display for KernelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for KernelChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "base" {
            return Ok(Self::Base);
        }
        let id: u8 = s
            .strip_prefix("case")
            .unwrap_or(&s)
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("unknown kernel choice '{s}'")))?;
        ReferenceCase::from_id(id)
            .map(Self::Reference)
            .map_err(|_| Error::Config(format!("reference case must be 1..=7, got {id}")))
    }
}

/// Scale `s` of the RBF width and the trade-off (`C` for SVDD, `ν` for OC-SVM).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub scale: f64,
    pub trade_off: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Representation {
    BaseKernel {
        train: DenseMatrix,
    },
    ReferenceKernel {
        train: DenseMatrix,
        model: Arc<ReferenceModel>,
    },
    Features {
        model: Arc<ReferenceModel>,
        /// r×N training features.
        features: DenseMatrix,
    },
}

/// Everything needed to produce kernel values between the training block and
/// new samples, for one kernel choice and path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSetup {
    choice: KernelChoice,
    path: EvalPath,
    base: BaseKernel,
    repr: Representation,
}

impl KernelSetup {
    /// Builds the setup from the training block and, for reference choices,
    /// an already selected reference set.
    pub fn new(
        choice: KernelChoice,
        path: EvalPath,
        base: BaseKernel,
        x_train: &DenseMatrix,
        references: Option<&DenseMatrix>,
        tol: f64,
    ) -> Result<Self> {
        if x_train.cols() == 0 {
            return Err(Error::InsufficientData("empty training block".into()));
        }
        let repr = match (choice, path, references) {
            (KernelChoice::Base, EvalPath::Kernel, _) => Representation::BaseKernel {
                train: x_train.clone(),
            },
            (KernelChoice::Base, EvalPath::Mapping, _) => {
                let (block, model) = npt_fit(x_train, base, tol)?;
                Representation::Features {
                    features: block.features().clone(),
                    model,
                }
            }
            (KernelChoice::Reference(_), _, None) => {
                return Err(Error::Config("reference choice needs a reference set".into()))
            }
            (KernelChoice::Reference(_), EvalPath::Kernel, Some(r)) => Representation::ReferenceKernel {
                train: x_train.clone(),
                model: Arc::new(fit_reference(r, base, tol)?),
            },
            (KernelChoice::Reference(_), EvalPath::Mapping, Some(r)) => {
                let model = Arc::new(fit_reference(r, base, tol)?);
                Representation::Features {
                    features: model.map(x_train)?,
                    model,
                }
            }
        };
        Ok(Self {
            choice,
            path,
            base,
            repr,
        })
    }

    /// Selects references with `rng` and builds the setup.
    pub fn prepare<R: Rng + ?Sized>(
        choice: KernelChoice,
        path: EvalPath,
        base: BaseKernel,
        x_train: &DenseMatrix,
        x_neg: Option<&DenseMatrix>,
        tol: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let refs = choice.references(x_train, x_neg, rng)?;
        Self::new(choice, path, base, x_train, refs.as_ref(), tol)
    }

    pub fn choice(&self) -> KernelChoice {
        self.choice
    }

    pub fn path(&self) -> EvalPath {
        self.path
    }

    pub fn base(&self) -> BaseKernel {
        self.base
    }

    pub fn input_dim(&self) -> usize {
        match &self.repr {
            Representation::BaseKernel { train } | Representation::ReferenceKernel { train, .. } => train.rows(),
            Representation::Features { model, .. } => model.input_dim(),
        }
    }

    pub fn train_len(&self) -> usize {
        match &self.repr {
            Representation::BaseKernel { train } | Representation::ReferenceKernel { train, .. } => train.cols(),
            Representation::Features { features, .. } => features.cols(),
        }
    }

    pub fn reference_model(&self) -> Option<&Arc<ReferenceModel>> {
        match &self.repr {
            Representation::BaseKernel { .. } => None,
            Representation::ReferenceKernel { model, .. } | Representation::Features { model, .. } => Some(model),
        }
    }

    /// Training features on the mapping path.
    pub fn features(&self) -> Option<&DenseMatrix> {
        match &self.repr {
            Representation::Features { features, .. } => Some(features),
            _ => None,
        }
    }

    /// Training Gram matrix handed to the solver.
    pub fn train_gram(&self) -> Result<DenseMatrix> {
        let gram = match &self.repr {
            Representation::BaseKernel { train } => kernel_matrix(&self.base, train, train)?,
            Representation::ReferenceKernel { train, model } => {
                let centered = model.centered_cross_kernel(train)?;
                let projected = model.pseudo_inverse().matmul(&centered)?;
                centered.t_matmul(&projected)?
            }
            Representation::Features { features, .. } => features.t_matmul(features)?,
        };
        Ok(symmetrized(gram))
    }

    /// Kernel values between training samples and the columns of `z` (N×n)
    /// plus each column's self-kernel.
    pub fn cross(&self, z: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>)> {
        if z.rows() != self.input_dim() {
            return Err(Error::InvalidShape(format!(
                "samples have {} features, model expects {}",
                z.rows(),
                self.input_dim()
            )));
        }
        match &self.repr {
            Representation::BaseKernel { train } => {
                Ok((kernel_matrix(&self.base, train, z)?, kernel_diagonal(&self.base, z)))
            }
            Representation::ReferenceKernel { train, model } => {
                let kx = model.centered_cross_kernel(train)?;
                let kz = model.centered_cross_kernel(z)?;
                let projected = model.pseudo_inverse().matmul(&kz)?;
                let kzz = (0..z.cols()).map(|j| dot(kz.column(j), projected.column(j))).collect();
                Ok((kx.t_matmul(&projected)?, kzz))
            }
            Representation::Features { model, features } => {
                let fz = model.map(z)?;
                let kzz = fz.columns().map(|c| dot(c, c)).collect();
                Ok((features.t_matmul(&fz)?, kzz))
            }
        }
    }

    /// Reported rank: `r` of the reference model (or NPT feature dimension)
    /// and, for the base kernel, the eigenvalue count ≥ `tol` of the
    /// training Gram matrix.
    pub fn rank(&self, gram: &DenseMatrix, tol: f64) -> Result<usize> {
        match &self.repr {
            Representation::BaseKernel { .. } => Ok(sym_eig(gram)?.rank_at(tol)),
            Representation::ReferenceKernel { model, .. } | Representation::Features { model, .. } => {
                Ok(model.rank())
            }
        }
    }
}

fn symmetrized(m: DenseMatrix) -> DenseMatrix {
    let t = m.transpose();
    DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| 0.5 * (m.get(i, j) + t.get(i, j)))
}

/// Dual solution of either method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Solution {
    Svdd(SvddModel),
    Ocsvm(OcsvmModel),
}

impl Solution {
    pub fn method(&self) -> Method {
        match self {
            Self::Svdd(_) => Method::Svdd,
            Self::Ocsvm(_) => Method::Ocsvm,
        }
    }

    pub fn alpha(&self) -> &[f64] {
        match self {
            Self::Svdd(m) => &m.alpha,
            Self::Ocsvm(m) => &m.alpha,
        }
    }

    /// Scores every column of `cross` (N×n) with self-kernels `kzz`.
    pub fn decide(&self, cross: &DenseMatrix, kzz: &[f64]) -> Result<Vec<(f64, bool)>> {
        if kzz.len() != cross.cols() {
            return Err(Error::InvalidShape("self-kernel count mismatch".into()));
        }
        cross
            .columns()
            .zip(kzz)
            .map(|(col, &k)| match self {
                Self::Svdd(m) => svdd_decide(m, col, k),
                Self::Ocsvm(m) => ocsvm_decide(m, col),
            })
            .collect()
    }
}

/// Solves `method` on a precomputed training Gram matrix.
pub fn solve(gram: &DenseMatrix, method: Method, trade_off: f64, opts: &SolverOptions) -> Result<Solution> {
    match method {
        Method::Svdd => svdd_fit_with(gram, trade_off, opts).map(Solution::Svdd),
        Method::Ocsvm => ocsvm_fit_with(gram, trade_off, opts).map(Solution::Ocsvm),
    }
}

/// Linear-kernel solve on explicit r×N features.
pub fn fit_linear_on_features(features: &DenseMatrix, method: Method, trade_off: f64) -> Result<Solution> {
    if features.cols() == 0 {
        return Err(Error::InsufficientData("empty feature block".into()));
    }
    let gram = symmetrized(features.t_matmul(features)?);
    solve(&gram, method, trade_off, &SolverOptions::default())
}

/// Specification of a one-class model to fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub method: Method,
    pub path: EvalPath,
    pub choice: KernelChoice,
    pub hyper: Hyperparams,
    pub eigen_tol: f64,
}

/// A fitted one-class classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneClassModel {
    pub spec: ModelSpec,
    pub setup: KernelSetup,
    pub solution: Solution,
    pub rank: usize,
}

impl OneClassModel {
    /// Fits on a standardized training block. `σ = √(s·d_aver)` is computed
    /// from `x_train`.
    pub fn fit<R: Rng + ?Sized>(
        spec: ModelSpec,
        x_train: &DenseMatrix,
        x_neg: Option<&DenseMatrix>,
        rng: &mut R,
    ) -> Result<Self> {
        let base = BaseKernel::rbf(sigma_from_scale(x_train, spec.hyper.scale)?)?;
        let setup = KernelSetup::prepare(spec.choice, spec.path, base, x_train, x_neg, spec.eigen_tol, rng)?;
        Self::fit_setup(spec, setup)
    }

    pub fn fit_setup(spec: ModelSpec, setup: KernelSetup) -> Result<Self> {
        let gram = setup.train_gram()?;
        let solution = solve(&gram, spec.method, spec.hyper.trade_off, &SolverOptions::default())?;
        let rank = setup.rank(&gram, spec.eigen_tol)?;
        Ok(Self {
            spec,
            setup,
            solution,
            rank,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.setup.input_dim()
    }

    /// `(score, is_target)` for every column of `z`.
    pub fn decide(&self, z: &DenseMatrix) -> Result<Vec<(f64, bool)>> {
        let (cross, kzz) = self.setup.cross(z)?;
        self.solution.decide(&cross, &kzz)
    }

    pub fn predict(&self, z: &DenseMatrix) -> Result<Vec<bool>> {
        Ok(self.decide(z)?.into_iter().map(|(_, t)| t).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
    }

    #[test]
    fn parse_and_display_round_trip() {
        for c in KernelChoice::all() {
            assert_eq!(c.label().parse::<KernelChoice>().unwrap(), c);
        }
        assert_eq!("case 5".parse::<KernelChoice>().unwrap(), KernelChoice::Reference(ReferenceCase::TrainingWithNegatives));
        assert!("8".parse::<KernelChoice>().is_err());
        assert_eq!("OC-SVM".parse::<Method>().unwrap(), Method::Ocsvm);
        assert_eq!("linear".parse::<EvalPath>().unwrap(), EvalPath::Mapping);
    }

    #[test]
    fn case_one_kernel_matches_linear_features() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random(3, 12, &mut rng);
        let base = BaseKernel::rbf(1.5).unwrap();
        let choice = KernelChoice::Reference(ReferenceCase::Training);
        let refs = choice.references(&x, None, &mut rng).unwrap();
        let k = KernelSetup::new(choice, EvalPath::Kernel, base, &x, refs.as_ref(), 1e-6).unwrap();
        let f = KernelSetup::new(choice, EvalPath::Mapping, base, &x, refs.as_ref(), 1e-6).unwrap();
        let gk = k.train_gram().unwrap();
        let gf = f.train_gram().unwrap();
        assert!(gk.max_abs_diff(&gf) <= 1e-8);
        let sk = solve(&gk, Method::Svdd, 0.3, &SolverOptions::default()).unwrap();
        let sf = fit_linear_on_features(f.features().unwrap(), Method::Svdd, 0.3).unwrap();
        for (a, b) in sk.alpha().iter().zip(sf.alpha()) {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn paths_agree_on_test_decisions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random(2, 15, &mut rng);
        let neg = random(2, 9, &mut rng);
        let z = random(2, 25, &mut rng);
        for choice in KernelChoice::all() {
            for method in [Method::Svdd, Method::Ocsvm] {
                let spec = |path| ModelSpec {
                    method,
                    path,
                    choice,
                    hyper: Hyperparams { scale: 1.0, trade_off: 0.3 },
                    eigen_tol: 1e-6,
                };
                let a = OneClassModel::fit(spec(EvalPath::Kernel), &x, Some(&neg), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
                let b = OneClassModel::fit(spec(EvalPath::Mapping), &x, Some(&neg), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
                let (da, db) = (a.decide(&z).unwrap(), b.decide(&z).unwrap());
                if choice != KernelChoice::Base {
                    assert_eq!(a.rank, b.rank, "{choice} {method}");
                    for ((sa, ta), (sb, tb)) in da.iter().zip(&db) {
                        assert!((sa - sb).abs() <= 1e-6, "{choice} {method}: {sa} vs {sb}");
                        if sa.abs() > 1e-6 {
                            assert_eq!(ta, tb);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random(3, 10, &mut rng);
        let spec = ModelSpec {
            method: Method::Ocsvm,
            path: EvalPath::Kernel,
            choice: KernelChoice::Base,
            hyper: Hyperparams { scale: 1.0, trade_off: 0.2 },
            eigen_tol: 1e-6,
        };
        let m = OneClassModel::fit(spec, &x, None, &mut rng).unwrap();
        assert!(matches!(m.decide(&random(4, 2, &mut rng)), Err(Error::InvalidShape(_))));
    }

    #[test]
    fn case_five_without_negatives_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random(3, 10, &mut rng);
        let spec = ModelSpec {
            method: Method::Svdd,
            path: EvalPath::Kernel,
            choice: KernelChoice::Reference(ReferenceCase::TrainingWithNegatives),
            hyper: Hyperparams { scale: 1.0, trade_off: 0.2 },
            eigen_tol: 1e-6,
        };
        assert!(matches!(OneClassModel::fit(spec, &x, None, &mut rng), Err(Error::MissingNegatives)));
    }

    #[test]
    fn base_rank_counts_kernel_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let col = random(2, 1, &mut rng);
        let x = col.hstack(&col).unwrap().hstack(&random(2, 3, &mut rng)).unwrap();
        let base = BaseKernel::rbf(1.0).unwrap();
        let s = KernelSetup::new(KernelChoice::Base, EvalPath::Kernel, base, &x, None, 1e-6).unwrap();
        let g = s.train_gram().unwrap();
        assert_eq!(s.rank(&g, 1e-6).unwrap(), 4);
    }

    #[test]
    fn model_serializes_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random(3, 10, &mut rng);
        let spec = ModelSpec {
            method: Method::Svdd,
            path: EvalPath::Mapping,
            choice: KernelChoice::Reference(ReferenceCase::RandomSubset),
            hyper: Hyperparams { scale: 10.0, trade_off: 0.2 },
            eigen_tol: 1e-6,
        };
        let m = OneClassModel::fit(spec, &x, None, &mut rng).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: OneClassModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back.decide(&x).unwrap(), m.decide(&x).unwrap());
    }
}
