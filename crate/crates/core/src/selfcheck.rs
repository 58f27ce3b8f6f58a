//! Built-in property suite over generated instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::kernel::{center_reference_kernel, kernel_matrix, BaseKernel};
use crate::linalg::{dot, sym_eig, DenseMatrix};
use crate::pipeline::{solve, EvalPath, Hyperparams, KernelChoice, Method, ModelSpec, OneClassModel, Solution};
use crate::reference::{fit_reference, map_samples, npt_fit, ref_kernel_matrix, select_references, ReferenceCase, DEFAULT_EIGEN_TOL};
use crate::solver::{OcsvmModel, SolverOptions, SvddModel};

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    /// Instances checked.
    pub instances: usize,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub detail: String,
}

/// Knobs for the suite. `eigen_tol` is the truncation used when fitting
/// reference models; the checks themselves always use the default bounds.
#[derive(Debug, Clone, Copy)]
pub struct SelfCheckOptions {
    pub eigen_tol: f64,
    pub seed: u64,
    pub instances: usize,
}

impl Default for SelfCheckOptions {
    fn default() -> Self {
        Self {
            eigen_tol: DEFAULT_EIGEN_TOL,
            seed: 20_240_917,
            instances: 100,
        }
    }
}

/// A random reference-kernel problem.
pub struct Instance {
    pub x: DenseMatrix,
    pub x_neg: DenseMatrix,
    pub test: DenseMatrix,
    pub base: BaseKernel,
    pub case: ReferenceCase,
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// D ≤ 5, N ≤ 20, σ around the typical pairwise distance.
pub fn random_instance(case: ReferenceCase, rng: &mut impl Rng) -> Instance {
    let d = rng.random_range(1..=5);
    // N ≥ 4 keeps the half-size cases at two or more references
    let n = rng.random_range(4..=20);
    let n_neg = rng.random_range(1..=20);
    let sigma = rng.random_range(0.5..2.0) * (d as f64).sqrt();
    Instance {
        x: gaussian(d, n, rng),
        x_neg: gaussian(d, n_neg, rng),
        test: gaussian(d, rng.random_range(1..=10), rng),
        base: BaseKernel::rbf(sigma).expect("positive sigma"),
        case,
    }
}

fn check(name: &'static str, instances: usize, worst: f64, bound: f64, failures: Vec<String>) -> PropertyResult {
    let passed = failures.is_empty() && worst <= bound;
    let detail = if passed {
        format!("worst {worst:.3e} <= {bound:.0e}")
    } else if let Some(f) = failures.first() {
        format!("worst {worst:.3e} (bound {bound:.0e}); {f}")
    } else {
        format!("worst {worst:.3e} exceeds {bound:.0e}")
    };
    PropertyResult {
        name,
        passed,
        instances,
        worst,
        detail,
    }
}

fn cases_cycle(i: usize) -> ReferenceCase {
    ReferenceCase::ALL[i % ReferenceCase::ALL.len()]
}

/// `φ(A)ᵀφ(B)` against the reference kernel for every case, and the case-1
/// kernel on training data against the centered base kernel (they differ
/// only by the discarded eigenvalues, each below the default tolerance).
pub fn gram_equivalence(opts: &SelfCheckOptions) -> PropertyResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for i in 0..opts.instances {
        let inst = random_instance(cases_cycle(i), &mut rng);
        let res: Result<f64> = (|| {
            let refs = select_references(inst.case, &inst.x, Some(&inst.x_neg), &mut rng)?;
            let model = fit_reference(&refs, inst.base, opts.eigen_tol)?;
            let fa = model.map(&inst.x)?;
            let fb = model.map(&inst.test)?;
            let mut err = fa.t_matmul(&fb)?.max_abs_diff(&ref_kernel_matrix(&model, &inst.x, &inst.test)?);
            if inst.case == ReferenceCase::Training {
                let k = kernel_matrix(&inst.base, &inst.x, &inst.x)?;
                let (centered, _) = center_reference_kernel(&k)?;
                let kref = ref_kernel_matrix(&model, &inst.x, &inst.x)?;
                // entrywise gap is at most the largest dropped eigenvalue
                let gap = (kref.max_abs_diff(&centered) - DEFAULT_EIGEN_TOL).max(0.0);
                err = err.max(gap);
            }
            Ok(err)
        })();
        match res {
            Ok(e) => worst = worst.max(e),
            Err(e) => failures.push(format!("instance {i}: {e}")),
        }
    }
    check("gram-equivalence", opts.instances, worst, 1e-8, failures)
}

/// Smallest eigenvalue of generated reference kernel matrices.
pub fn psd(opts: &SelfCheckOptions) -> PropertyResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 1);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for i in 0..opts.instances {
        let inst = random_instance(cases_cycle(i), &mut rng);
        let res: Result<f64> = (|| {
            let refs = select_references(inst.case, &inst.x, Some(&inst.x_neg), &mut rng)?;
            let model = fit_reference(&refs, inst.base, opts.eigen_tol)?;
            let all = inst.x.hstack(&inst.test)?;
            let k = ref_kernel_matrix(&model, &all, &all)?;
            let sym = DenseMatrix::from_fn(k.rows(), k.cols(), |a, b| 0.5 * (k.get(a, b) + k.get(b, a)));
            let min = sym_eig(&sym)?.eigenvalues.last().copied().unwrap_or(0.0);
            Ok((-min).max(0.0))
        })();
        match res {
            Ok(e) => worst = worst.max(e),
            Err(e) => failures.push(format!("instance {i}: {e}")),
        }
    }
    check("psd", opts.instances, worst, 1e-8, failures)
}

/// NPT training pre-images against the case-1 mapping of the same samples.
pub fn npt_equivalence(opts: &SelfCheckOptions) -> PropertyResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 2);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let count = opts.instances.div_ceil(2);
    for i in 0..count {
        let inst = random_instance(ReferenceCase::Training, &mut rng);
        let res: Result<f64> = (|| {
            let (block, model) = npt_fit(&inst.x, inst.base, opts.eigen_tol)?;
            let mapped = map_samples(&model, &inst.x)?;
            Ok(block.features().max_abs_diff(mapped.features()))
        })();
        match res {
            Ok(e) => worst = worst.max(e),
            Err(e) => failures.push(format!("instance {i}: {e}")),
        }
    }
    check("npt-equivalence", count, worst, 1e-8, failures)
}

/// Row and column sums of the centered reference kernel and column sums of
/// the centered cross kernel.
pub fn centering(opts: &SelfCheckOptions) -> PropertyResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 3);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let count = opts.instances.div_ceil(2);
    for i in 0..count {
        let inst = random_instance(cases_cycle(i), &mut rng);
        let res: Result<f64> = (|| {
            let refs = select_references(inst.case, &inst.x, Some(&inst.x_neg), &mut rng)?;
            let m = refs.cols() as f64;
            let k = kernel_matrix(&inst.base, &refs, &refs)?;
            let (centered, _) = center_reference_kernel(&k)?;
            let ones = vec![1.0; refs.cols()];
            let mut e = 0.0f64;
            for j in 0..centered.cols() {
                e = e.max(dot(centered.column(j), &ones).abs());
                let row: f64 = (0..centered.cols()).map(|c| centered.get(j, c)).sum();
                e = e.max(row.abs());
            }
            let model = fit_reference(&refs, inst.base, opts.eigen_tol)?;
            let cross = model.centered_cross_kernel(&inst.test)?;
            for col in cross.columns() {
                e = e.max(dot(col, &ones).abs());
            }
            Ok(e / m)
        })();
        match res {
            Ok(e) => worst = worst.max(e),
            Err(e) => failures.push(format!("instance {i}: {e}")),
        }
    }
    check("centering", count, worst, 1e-10, failures)
}

/// Largest KKT violation of an SVDD solution.
pub fn svdd_kkt_residual(k: &DenseMatrix, model: &SvddModel) -> f64 {
    let upper = model.c.min(1.0);
    let dist = model.training_distances(k);
    let mut worst = (model.alpha.iter().sum::<f64>() - 1.0).abs();
    for (a, d) in model.alpha.iter().zip(&dist) {
        worst = worst.max((-a).max(a - upper).max(0.0));
        let gap = d - model.r_squared;
        let v = if *a <= 0.0 {
            gap.max(0.0)
        } else if *a >= upper {
            (-gap).max(0.0)
        } else {
            gap.abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Largest KKT violation of an OC-SVM solution.
pub fn ocsvm_kkt_residual(k: &DenseMatrix, model: &OcsvmModel) -> f64 {
    let upper = model.upper_bound().min(1.0);
    let mut worst = (model.alpha.iter().sum::<f64>() - 1.0).abs();
    for (i, a) in model.alpha.iter().enumerate() {
        worst = worst.max((-a).max(a - upper).max(0.0));
        let gap = dot(k.column(i), &model.alpha) - model.rho;
        let v = if *a <= 0.0 {
            (-gap).max(0.0)
        } else if *a >= upper {
            gap.max(0.0)
        } else {
            gap.abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Box, simplex and complementarity conditions of both solvers on random
/// RBF kernels.
pub fn kkt(opts: &SelfCheckOptions) -> PropertyResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 4);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for i in 0..opts.instances {
        let inst = random_instance(ReferenceCase::Training, &mut rng);
        let n = inst.x.cols();
        let res: Result<f64> = (|| {
            let k = kernel_matrix(&inst.base, &inst.x, &inst.x)?;
            let trade = rng.random_range(1.0 / n as f64..=1.0);
            let svdd = match solve(&k, Method::Svdd, trade, &SolverOptions::default())? {
                Solution::Svdd(m) => m,
                Solution::Ocsvm(_) => unreachable!(),
            };
            let oc = match solve(&k, Method::Ocsvm, trade, &SolverOptions::default())? {
                Solution::Ocsvm(m) => m,
                Solution::Svdd(_) => unreachable!(),
            };
            Ok(svdd_kkt_residual(&k, &svdd).max(ocsvm_kkt_residual(&k, &oc)))
        })();
        match res {
            Ok(e) => worst = worst.max(e),
            Err(e) => failures.push(format!("instance {i}: {e}")),
        }
    }
    check("kkt", opts.instances, worst, 1e-6, failures)
}

/// Kernel-path and mapping-path decisions on test samples. Degenerate
/// OC-SVM solutions (vanishing normal) have no defined decision and are
/// skipped.
pub fn path_equivalence(opts: &SelfCheckOptions) -> PropertyResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 5);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut skipped = 0;
    let count = opts.instances.div_ceil(2);
    for i in 0..count {
        let inst = random_instance(cases_cycle(i), &mut rng);
        let method = if i % 2 == 0 { Method::Svdd } else { Method::Ocsvm };
        let n = inst.x.cols() as f64;
        let spec = |path| ModelSpec {
            method,
            path,
            choice: KernelChoice::Reference(inst.case),
            hyper: Hyperparams {
                scale: 1.0,
                trade_off: (0.3f64).max(1.0 / n),
            },
            eigen_tol: opts.eigen_tol,
        };
        let seed = rng.random::<u64>();
        let fitted = OneClassModel::fit(spec(EvalPath::Kernel), &inst.x, Some(&inst.x_neg), &mut ChaCha8Rng::seed_from_u64(seed))
            .and_then(|a| {
                let b = OneClassModel::fit(spec(EvalPath::Mapping), &inst.x, Some(&inst.x_neg), &mut ChaCha8Rng::seed_from_u64(seed))?;
                Ok((a, b))
            });
        let (a, b) = match fitted {
            Ok(pair) => pair,
            Err(e) => {
                failures.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        if matches!(&a.solution, Solution::Ocsvm(m) if m.is_degenerate()) {
            skipped += 1;
            continue;
        }
        if a.rank != b.rank {
            failures.push(format!("instance {i}: rank {} vs {}", a.rank, b.rank));
        }
        match (a.decide(&inst.test), b.decide(&inst.test)) {
            (Ok(da), Ok(db)) => {
                for ((sa, ta), (sb, tb)) in da.iter().zip(&db) {
                    worst = worst.max((sa - sb).abs());
                    if ta != tb {
                        failures.push(format!("instance {i} ({method}, case {}): labels differ at scores {sa:e} / {sb:e}", inst.case));
                    }
                }
            }
            (Err(e), _) | (_, Err(e)) => failures.push(format!("instance {i}: {e}")),
        }
    }
    let mut r = check("path-equivalence", count - skipped, worst, 1e-6, failures);
    if skipped > 0 {
        r.detail.push_str(&format!(" ({skipped} degenerate OC-SVM instance(s) skipped)"));
    }
    r
}

/// Runs every property.
pub fn run_all(opts: &SelfCheckOptions) -> Vec<PropertyResult> {
    vec![
        gram_equivalence(opts),
        psd(opts),
        npt_equivalence(opts),
        centering(opts),
        kkt(opts),
        path_equivalence(opts),
    ]
}
