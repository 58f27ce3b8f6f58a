//! Generalized reference mapping and kernel.
//!
//! A set of reference vectors `R` (D×M) and a base kernel define an explicit
//! feature map `φ(x) = Λ_r^{-1/2} U_rᵀ k_Rx`, where `k_Rx` is the base kernel
//! vector against the references centered on the reference mean, and
//! `(U_r, Λ_r)` are the eigenpairs of the centered reference kernel above the
//! rank tolerance. The matching kernel is `κ(x, y) = k_Rxᵀ 𝒦_RR⁺ k_Ry`.
//!
//! With `R = X` the map reduces to the non-linear projection trick; see
//! [`npt_fit`] and [`npt_map_test`].

use std::fmt;
use std::sync::Arc;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{center_reference_kernel, kernel_matrix, BaseKernel, CenteringContext};
use crate::linalg::{sym_eig, truncate_spectrum, DenseMatrix};

/// Eigenvalues below this are treated as zero.
pub const DEFAULT_EIGEN_TOL: f64 = 1e-6;

/// How the reference vectors are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum ReferenceCase {
    /// `R = X`.
    Training = 1,
    /// `N` standard-normal vectors.
    RandomFull = 2,
    /// `⌊N/2⌋` training samples drawn without replacement.
    TrainingSubset = 3,
    /// `⌊N/2⌋` standard-normal vectors.
    RandomSubset = 4,
    /// `[X, T non-target training samples]`.
    TrainingWithNegatives = 5,
    /// `[X, T standard-normal vectors]`.
    TrainingWithRandom = 6,
    /// `N + T` standard-normal vectors.
    RandomAugmented = 7,
}

impl ReferenceCase {
    pub const ALL: [Self; 7] = [
        Self::Training,
        Self::RandomFull,
        Self::TrainingSubset,
        Self::RandomSubset,
        Self::TrainingWithNegatives,
        Self::TrainingWithRandom,
        Self::RandomAugmented,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Result<Self> {
        Self::ALL
            .get(usize::from(id).wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::Config(format!("reference case must be 1..=7, got {id}")))
    }

    /// Whether the case draws random vectors (and so depends on the seed).
    pub fn is_random(self) -> bool {
        matches!(
            self,
            Self::RandomFull | Self::RandomSubset | Self::TrainingWithRandom | Self::RandomAugmented
        )
    }

    /// Number of reference vectors for `n` target samples and `n_neg`
    /// available non-target samples (`None` when there are none at all).
    pub fn reference_count(self, n: usize, n_neg: Option<usize>) -> usize {
        let t = augment_count(n, n_neg);
        match self {
            Self::Training | Self::RandomFull => n,
            Self::TrainingSubset | Self::RandomSubset => n / 2,
            Self::TrainingWithNegatives | Self::TrainingWithRandom | Self::RandomAugmented => n + t,
        }
    }
}

impl From<ReferenceCase> for u8 {
    fn from(c: ReferenceCase) -> u8 {
        c.id()
    }
}

impl TryFrom<u8> for ReferenceCase {
    type Error = Error;
    fn try_from(id: u8) -> Result<Self> {
        Self::from_id(id)
    }
}

impl fmt::Display for ReferenceCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// `T = min(N, N_neg)`; without negatives the augmentation is `N`.
fn augment_count(n: usize, n_neg: Option<usize>) -> usize {
    n_neg.map_or(n, |k| n.min(k))
}

fn standard_normal_block<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> DenseMatrix {
    DenseMatrix::from_fn(dim, count, |_, _| rng.sample(StandardNormal))
}

/// Chooses the reference vectors for `case` from the standardized target
/// training block `x` (D×N) and optional non-target block `x_neg`.
pub fn select_references<R: Rng + ?Sized>(
    case: ReferenceCase,
    x: &DenseMatrix,
    x_neg: Option<&DenseMatrix>,
    rng: &mut R,
) -> Result<DenseMatrix> {
    let (dim, n) = (x.rows(), x.cols());
    if let Some(neg) = x_neg {
        if neg.rows() != dim && neg.cols() > 0 {
            return Err(Error::InvalidShape(format!(
                "negatives have dimension {}, targets {dim}",
                neg.rows()
            )));
        }
    }
    let n_neg = x_neg.map(DenseMatrix::cols);
    let t = augment_count(n, n_neg);
    match case {
        ReferenceCase::Training => Ok(x.clone()),
        ReferenceCase::RandomFull => Ok(standard_normal_block(dim, n, rng)),
        ReferenceCase::TrainingSubset => {
            if n < 2 {
                return Err(Error::InsufficientData(format!(
                    "subset references need at least 2 training samples, got {n}"
                )));
            }
            let mut idx = index::sample(rng, n, n / 2).into_vec();
            idx.sort_unstable();
            Ok(x.select_columns(&idx))
        }
        ReferenceCase::RandomSubset => Ok(standard_normal_block(dim, n / 2, rng)),
        ReferenceCase::TrainingWithNegatives => {
            let neg = x_neg.filter(|m| m.cols() > 0).ok_or(Error::MissingNegatives)?;
            let mut order: Vec<usize> = (0..neg.cols()).collect();
            order.shuffle(rng);
            order.truncate(t);
            x.hstack(&neg.select_columns(&order))
        }
        ReferenceCase::TrainingWithRandom => x.hstack(&standard_normal_block(dim, t, rng)),
        ReferenceCase::RandomAugmented => Ok(standard_normal_block(dim, n + t, rng)),
    }
}

/// A fitted reference kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceModel {
    references: DenseMatrix,
    base: BaseKernel,
    centering: CenteringContext,
    /// M×r retained eigenvectors of the centered reference kernel.
    eigenvectors: DenseMatrix,
    /// r retained eigenvalues, descending, all ≥ `tol`.
    eigenvalues: Vec<f64>,
    tol: f64,
}

/// Fits the reference model: centers `K_RR`, eigendecomposes it and keeps the
/// eigenpairs with eigenvalue ≥ `tol`.
pub fn fit_reference(references: &DenseMatrix, base: BaseKernel, tol: f64) -> Result<ReferenceModel> {
    if references.cols() == 0 {
        return Err(Error::EmptyReferenceSet);
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Config(format!("eigenvalue tolerance must be > 0, got {tol}")));
    }
    let k_rr = kernel_matrix(&base, references, references)?;
    let (centered, centering) = center_reference_kernel(&k_rr)?;
    let spectrum = truncate_spectrum(&sym_eig(&centered)?, tol);
    if spectrum.eigenvalues.is_empty() {
        return Err(Error::DegenerateReferenceSet { tol });
    }
    Ok(ReferenceModel {
        references: references.clone(),
        base,
        centering,
        eigenvectors: spectrum.eigenvectors,
        eigenvalues: spectrum.eigenvalues,
        tol,
    })
}

impl ReferenceModel {
    pub fn references(&self) -> &DenseMatrix {
        &self.references
    }

    pub fn base(&self) -> BaseKernel {
        self.base
    }

    pub fn centering(&self) -> &CenteringContext {
        &self.centering
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DenseMatrix {
        &self.eigenvectors
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn reference_count(&self) -> usize {
        self.references.cols()
    }

    /// Effective rank `r`, the feature dimension.
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn input_dim(&self) -> usize {
        self.references.rows()
    }

    /// Centered base kernel block `𝒦_RX` (M×n).
    pub fn centered_cross_kernel(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.rows() != self.input_dim() {
            return Err(Error::InvalidShape(format!(
                "samples have dimension {}, references {}",
                x.rows(),
                self.input_dim()
            )));
        }
        let k_rx = kernel_matrix(&self.base, &self.references, x)?;
        self.centering.center_cross(&k_rx)
    }

    /// `Λ_r^{power} U_rᵀ B` for an M×n block `B`.
    fn scaled_projection(&self, block: &DenseMatrix, power: f64) -> Result<DenseMatrix> {
        let mut out = self.eigenvectors.t_matmul(block)?;
        let scale: Vec<f64> = self.eigenvalues.iter().map(|l| l.powf(power)).collect();
        for j in 0..out.cols() {
            for (v, s) in out.column_mut(j).iter_mut().zip(&scale) {
                *v *= s;
            }
        }
        Ok(out)
    }

    /// Mapped features `φ(X)` as an r×n matrix.
    pub fn map(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let centered = self.centered_cross_kernel(x)?;
        self.scaled_projection(&centered, -0.5)
    }

    /// Truncated pseudo-inverse `U_r Λ_r⁻¹ U_rᵀ` of the centered reference
    /// kernel (M×M).
    pub fn pseudo_inverse(&self) -> DenseMatrix {
        let m = self.reference_count();
        let mut out = DenseMatrix::zeros(m, m);
        for (t, &lambda) in self.eigenvalues.iter().enumerate() {
            let u = self.eigenvectors.column(t);
            for j in 0..m {
                let s = u[j] / lambda;
                for (o, ui) in out.column_mut(j).iter_mut().zip(u) {
                    *o += ui * s;
                }
            }
        }
        out
    }

    /// `κ(z, z)` under the reference kernel for every column of `z`.
    pub fn self_kernel(&self, z: &DenseMatrix) -> Result<Vec<f64>> {
        let centered = self.centered_cross_kernel(z)?;
        let pinv = self.pseudo_inverse();
        let projected = pinv.matmul(&centered)?;
        Ok((0..z.cols())
            .map(|j| crate::linalg::dot(centered.column(j), projected.column(j)))
            .collect())
    }
}

/// Samples mapped through a specific [`ReferenceModel`].
#[derive(Debug, Clone)]
pub struct FeatureBlock {
    model: Arc<ReferenceModel>,
    features: DenseMatrix,
}

impl FeatureBlock {
    pub fn model(&self) -> &Arc<ReferenceModel> {
        &self.model
    }

    /// r×n feature matrix, one mapped sample per column.
    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn dim(&self) -> usize {
        self.features.rows()
    }

    pub fn len(&self) -> usize {
        self.features.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.features.cols() == 0
    }

    /// Maps further samples through the same model.
    pub fn map_more(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.model.map(x)
    }
}

/// `φ(X)` for every column of `x`.
pub fn map_samples(model: &Arc<ReferenceModel>, x: &DenseMatrix) -> Result<FeatureBlock> {
    Ok(FeatureBlock {
        model: Arc::clone(model),
        features: model.map(x)?,
    })
}

/// Reference kernel block `𝒦_AR 𝒦_RR⁺ 𝒦_RB` (n_a × n_b).
pub fn ref_kernel_matrix(model: &ReferenceModel, a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let ka = model.centered_cross_kernel(a)?;
    let kb = model.centered_cross_kernel(b)?;
    let right = model.pseudo_inverse().matmul(&kb)?;
    ka.t_matmul(&right)
}

/// Non-linear projection trick on the training block: fits the reference
/// model with `R = X` and returns the training pre-images `Λ_r^{1/2} U_rᵀ`.
pub fn npt_fit(x: &DenseMatrix, base: BaseKernel, tol: f64) -> Result<(FeatureBlock, Arc<ReferenceModel>)> {
    let model = Arc::new(fit_reference(x, base, tol)?);
    let r = model.rank();
    let n = x.cols();
    let features = DenseMatrix::from_fn(r, n, |t, i| {
        model.eigenvalues[t].sqrt() * model.eigenvectors.get(i, t)
    });
    Ok((
        FeatureBlock {
            model: Arc::clone(&model),
            features,
        },
        model,
    ))
}

/// Pre-image of a single test vector under an NPT model.
pub fn npt_map_test(model: &ReferenceModel, x: &[f64]) -> Result<Vec<f64>> {
    let column = DenseMatrix::new(x.len(), 1, x.to_vec())?;
    Ok(model.map(&column)?.column(0).to_vec())
}
