//! Dual solvers for SVDD and the one-class SVM over a precomputed kernel.
//!
//! Both duals are quadratic programs over the capped simplex
//! `{α : 0 ≤ α_i ≤ u, Σα_i = 1}`:
//!
//! * SVDD: maximize `Σ α_i K_ii − αᵀKα` with `u = C`,
//! * OC-SVM: minimize `½ αᵀKα` with `u = 1/(νN)`.
//!
//! They share one SMO solver with maximal-violating-pair working-set
//! selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, sym_eig, DenseMatrix};

/// Stop once the maximal KKT violation falls to this value.
pub const KKT_TOLERANCE: f64 = 1e-7;
pub const MAX_ITERATIONS: usize = 100_000;
/// Smallest eigenvalue accepted by the PSD check, relative to `max(1, max K_ii)`.
pub const PSD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Run the eigenvalue-based PSD check on the kernel before solving.
    pub check_psd: bool,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            check_psd: true,
            tolerance: KKT_TOLERANCE,
            max_iterations: MAX_ITERATIONS,
        }
    }
}

/// Result of the shared SMO loop.
#[derive(Debug, Clone)]
struct SmoSolution {
    alpha: Vec<f64>,
    /// Gradient of the minimized objective at `alpha`.
    gradient: Vec<f64>,
    iterations: usize,
}

/// Minimizes `½ αᵀ(scale·K)α + pᵀα` over the capped simplex with cap `upper`.
fn smo(k: &DenseMatrix, scale: f64, linear: &[f64], upper: f64, opts: &SolverOptions) -> SmoSolution {
    let n = k.rows();
    let mut alpha = vec![0.0; n];
    let mut remaining = 1.0;
    for a in alpha.iter_mut() {
        if remaining <= 0.0 {
            break;
        }
        *a = upper.min(remaining);
        remaining -= *a;
    }

    let mut gradient: Vec<f64> = linear.to_vec();
    for (j, &aj) in alpha.iter().enumerate() {
        if aj != 0.0 {
            for (g, kij) in gradient.iter_mut().zip(k.column(j)) {
                *g += scale * kij * aj;
            }
        }
    }

    let mut iterations = 0;
    while iterations < opts.max_iterations {
        // i: may grow (α_i < u) with smallest gradient; j: may shrink (α_j > 0)
        // with largest gradient.
        let mut i = usize::MAX;
        let mut j = usize::MAX;
        let mut g_min = f64::INFINITY;
        let mut g_max = f64::NEG_INFINITY;
        for t in 0..n {
            if alpha[t] < upper && gradient[t] < g_min {
                g_min = gradient[t];
                i = t;
            }
            if alpha[t] > 0.0 && gradient[t] > g_max {
                g_max = gradient[t];
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || g_max - g_min <= opts.tolerance {
            break;
        }
        iterations += 1;

        let curvature = scale * (k.get(i, i) + k.get(j, j) - 2.0 * k.get(i, j));
        let mut step = (g_max - g_min) / curvature.max(1e-12);
        step = step.min(upper - alpha[i]).min(alpha[j]);
        if step <= 0.0 {
            break;
        }
        alpha[i] += step;
        alpha[j] -= step;
        // Snap to the bounds so interior/bound classification stays exact.
        if upper - alpha[i] <= 1e-15 * upper {
            alpha[i] = upper;
        }
        if alpha[j] <= 1e-15 * upper {
            alpha[j] = 0.0;
        }
        let (ci, cj) = (k.column(i), k.column(j));
        for t in 0..n {
            gradient[t] += scale * step * (ci[t] - cj[t]);
        }
    }
    SmoSolution {
        alpha,
        gradient,
        iterations,
    }
}

fn validate_kernel(k: &DenseMatrix, opts: &SolverOptions) -> Result<()> {
    if !k.is_square() || k.rows() == 0 {
        return Err(Error::InvalidShape(format!(
            "kernel matrix must be square and non-empty, got {}x{}",
            k.rows(),
            k.cols()
        )));
    }
    let asym = k.asymmetry().unwrap_or(f64::INFINITY);
    if asym > crate::linalg::SYMMETRY_TOLERANCE {
        return Err(Error::InvalidMatrix(format!("kernel matrix asymmetry {asym:e}")));
    }
    if opts.check_psd {
        let scale = k.diagonal().into_iter().fold(1.0f64, f64::max);
        let smallest = sym_eig(k)?.eigenvalues.last().copied().unwrap_or(0.0);
        if smallest < -PSD_TOLERANCE * scale {
            return Err(Error::InvalidKernel {
                min_eigenvalue: smallest,
            });
        }
    }
    Ok(())
}

/// Relative slack used to call a coefficient "at a bound".
fn bound_slack(upper: f64) -> f64 {
    1e-10 * upper
}

fn support_indices(alpha: &[f64], upper: f64) -> Vec<usize> {
    let eps = bound_slack(upper);
    alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > eps)
        .map(|(i, _)| i)
        .collect()
}

/// Mean of `values` over interior coefficients, or the midpoint of the
/// interval implied by the bound coefficients when there are none.
///
/// `lower_at_zero` says whether `α_i = 0` bounds the threshold from below.
fn recover_threshold(alpha: &[f64], upper: f64, values: &[f64], lower_at_zero: bool) -> f64 {
    let eps = bound_slack(upper);
    let interior: Vec<f64> = alpha
        .iter()
        .zip(values)
        .filter(|(&a, _)| a > eps && a < upper - eps)
        .map(|(_, &v)| v)
        .collect();
    if !interior.is_empty() {
        return interior.iter().sum::<f64>() / interior.len() as f64;
    }
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (&a, &v) in alpha.iter().zip(values) {
        let at_zero = a <= eps;
        if at_zero == lower_at_zero {
            lo = lo.max(v);
        } else {
            hi = hi.min(v);
        }
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo,
        (false, true) => hi,
        (false, false) => 0.0,
    }
}

/// Fitted SVDD hypersphere in kernel space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvddModel {
    pub alpha: Vec<f64>,
    pub support: Vec<usize>,
    pub c: f64,
    /// Squared radius.
    pub r_squared: f64,
    /// `αᵀKα`, the squared norm of the center.
    pub center_norm_sq: f64,
    pub iterations: usize,
}

impl SvddModel {
    /// Dual objective `Σ α_i K_ii − αᵀKα`.
    pub fn objective(&self, k: &DenseMatrix) -> f64 {
        svdd_objective(k, &self.alpha)
    }

    /// Squared kernel-space distance of each training point to the center.
    pub fn training_distances(&self, k: &DenseMatrix) -> Vec<f64> {
        (0..k.rows())
            .map(|i| k.get(i, i) - 2.0 * dot(k.column(i), &self.alpha) + self.center_norm_sq)
            .collect()
    }
}

pub fn svdd_objective(k: &DenseMatrix, alpha: &[f64]) -> f64 {
    let linear: f64 = alpha.iter().enumerate().map(|(i, a)| a * k.get(i, i)).sum();
    linear - quadratic_form(k, alpha)
}

pub fn ocsvm_objective(k: &DenseMatrix, alpha: &[f64]) -> f64 {
    0.5 * quadratic_form(k, alpha)
}

fn quadratic_form(k: &DenseMatrix, alpha: &[f64]) -> f64 {
    alpha
        .iter()
        .enumerate()
        .map(|(j, &aj)| aj * dot(k.column(j), alpha))
        .sum()
}

/// Solves the SVDD dual for kernel `k` and trade-off `c`.
pub fn svdd_fit(k: &DenseMatrix, c: f64) -> Result<SvddModel> {
    svdd_fit_with(k, c, &SolverOptions::default())
}

pub fn svdd_fit_with(k: &DenseMatrix, c: f64, opts: &SolverOptions) -> Result<SvddModel> {
    validate_kernel(k, opts)?;
    let n = k.rows();
    if !(c.is_finite() && c * n as f64 >= 1.0 - 1e-12) {
        return Err(Error::InfeasibleC { c, n });
    }
    let upper = c.min(1.0);
    let linear: Vec<f64> = k.diagonal().iter().map(|d| -d).collect();
    let sol = smo(k, 2.0, &linear, upper, opts);
    let center_norm_sq = quadratic_form(k, &sol.alpha);
    // gradient_i = 2(Kα)_i − K_ii = αᵀKα − dist²_i
    let dist2: Vec<f64> = sol.gradient.iter().map(|g| center_norm_sq - g).collect();
    let r_squared = recover_threshold(&sol.alpha, upper, &dist2, true).max(0.0);
    Ok(SvddModel {
        support: support_indices(&sol.alpha, upper),
        alpha: sol.alpha,
        c,
        r_squared,
        center_norm_sq,
        iterations: sol.iterations,
    })
}

/// Scores a test point from its kernel values against the training set
/// (`k_xz`) and with itself (`k_zz`). Non-negative scores are targets.
pub fn svdd_decide(model: &SvddModel, k_xz: &[f64], k_zz: f64) -> Result<(f64, bool)> {
    if k_xz.len() != model.alpha.len() {
        return Err(Error::InvalidShape(format!(
            "kernel vector has length {}, model was trained on {}",
            k_xz.len(),
            model.alpha.len()
        )));
    }
    let dist2 = k_zz - 2.0 * dot(&model.alpha, k_xz) + model.center_norm_sq;
    let score = model.r_squared - dist2;
    Ok((score, score >= 0.0))
}

/// Fitted one-class SVM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcsvmModel {
    pub alpha: Vec<f64>,
    pub support: Vec<usize>,
    pub nu: f64,
    pub rho: f64,
    /// `αᵀKα`, the squared norm of the hyperplane normal.
    pub w_norm_sq: f64,
    pub iterations: usize,
}

impl OcsvmModel {
    pub fn upper_bound(&self) -> f64 {
        1.0 / (self.nu * self.alpha.len() as f64)
    }

    pub fn objective(&self, k: &DenseMatrix) -> f64 {
        ocsvm_objective(k, &self.alpha)
    }

    /// The normal vanished: the origin lies in the convex hull of the mapped
    /// training points, every score is 0 up to rounding and decisions carry
    /// no information. Happens with centered kernels whose reference mean
    /// sits among the training samples.
    pub fn is_degenerate(&self) -> bool {
        self.w_norm_sq <= DEGENERATE_NORM
    }
}

/// `αᵀKα` below this marks an OC-SVM solution as degenerate.
pub const DEGENERATE_NORM: f64 = 1e-10;

/// Solves the OC-SVM dual for kernel `k` and `nu`.
pub fn ocsvm_fit(k: &DenseMatrix, nu: f64) -> Result<OcsvmModel> {
    ocsvm_fit_with(k, nu, &SolverOptions::default())
}

pub fn ocsvm_fit_with(k: &DenseMatrix, nu: f64, opts: &SolverOptions) -> Result<OcsvmModel> {
    validate_kernel(k, opts)?;
    let n = k.rows();
    if !(nu > 0.0 && nu <= 1.0 && nu * n as f64 >= 1.0 - 1e-12) {
        return Err(Error::InfeasibleNu { nu, n });
    }
    let upper = (1.0 / (nu * n as f64)).min(1.0);
    let sol = smo(k, 1.0, &vec![0.0; n], upper, opts);
    // gradient_i = (Kα)_i; α_i = 0 ⇒ (Kα)_i ≥ ρ
    let rho = recover_threshold(&sol.alpha, upper, &sol.gradient, false);
    let w_norm_sq = quadratic_form(k, &sol.alpha);
    Ok(OcsvmModel {
        support: support_indices(&sol.alpha, upper),
        alpha: sol.alpha,
        nu,
        rho,
        w_norm_sq,
        iterations: sol.iterations,
    })
}

pub fn ocsvm_decide(model: &OcsvmModel, k_xz: &[f64]) -> Result<(f64, bool)> {
    if k_xz.len() != model.alpha.len() {
        return Err(Error::InvalidShape(format!(
            "kernel vector has length {}, model was trained on {}",
            k_xz.len(),
            model.alpha.len()
        )));
    }
    let score = dot(&model.alpha, k_xz) - model.rho;
    Ok((score, score >= 0.0))
}
