//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use refkernel::linalg::{sym_eig, DenseMatrix};

/// Centering matrix `I − 𝟙𝟙ᵀ/m`, materialized.
pub fn centering_matrix(m: usize) -> DenseMatrix {
    DenseMatrix::from_fn(m, m, |i, j| f64::from(u8::from(i == j)) - 1.0 / m as f64)
}

/// Plain triple-loop product.
pub fn product(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.cols(), b.rows());
    DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum())
}

pub fn rbf_matrix(a: &DenseMatrix, b: &DenseMatrix, sigma: f64) -> DenseMatrix {
    DenseMatrix::from_fn(a.cols(), b.cols(), |i, j| {
        let d2: f64 = a.column(i).iter().zip(b.column(j)).map(|(x, y)| (x - y) * (x - y)).sum();
        (-d2 / (2.0 * sigma * sigma)).exp()
    })
}

/// Reference kernel `𝒦_AR 𝒦_RR⁺ 𝒦_RB` built from materialized matrices:
/// `𝒦_RR = C K_RR C` and `𝒦_RX = C (K_RX − K_RR 𝟙_M 𝟙_nᵀ / M)`, with the
/// pseudo-inverse keeping eigenvalues ≥ `tol`.
pub fn reference_kernel_oracle(r: &DenseMatrix, a: &DenseMatrix, b: &DenseMatrix, sigma: f64, tol: f64) -> DenseMatrix {
    let m = r.cols();
    let c = centering_matrix(m);
    let k_rr = rbf_matrix(r, r, sigma);
    let centered_rr = product(&product(&c, &k_rr), &c);
    let cross = |x: &DenseMatrix| {
        let k_rx = rbf_matrix(r, x, sigma);
        let averaging = DenseMatrix::from_fn(m, x.cols(), |_, _| 1.0 / m as f64);
        let shift = product(&k_rr, &averaging);
        let diff = DenseMatrix::from_fn(m, x.cols(), |i, j| k_rx.get(i, j) - shift.get(i, j));
        product(&c, &diff)
    };
    let sym = DenseMatrix::from_fn(m, m, |i, j| 0.5 * (centered_rr.get(i, j) + centered_rr.get(j, i)));
    let e = sym_eig(&sym).expect("symmetric");
    let pinv = DenseMatrix::from_fn(m, m, |i, j| {
        e.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l >= tol)
            .map(|(t, &l)| e.eigenvectors.get(i, t) * e.eigenvectors.get(j, t) / l)
            .sum()
    });
    let ka = cross(a);
    let kb = cross(b);
    product(&product(&ka.transpose(), &pinv), &kb)
}

/// Euclidean projection onto `{0 ≤ α ≤ u, Σα = 1}` by bisection on the shift.
pub fn project_capped_simplex(v: &[f64], upper: f64) -> Vec<f64> {
    let mass = |tau: f64| v.iter().map(|x| (x - tau).clamp(0.0, upper)).sum::<f64>();
    let mut lo = v.iter().cloned().fold(f64::INFINITY, f64::min) - upper - 1.0;
    let mut hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    v.iter().map(|x| (x - tau).clamp(0.0, upper)).collect()
}

/// Accelerated projected gradient for `min ½αᵀQα + pᵀα` over the capped
/// simplex. Returns the minimizer estimate.
pub fn capped_simplex_qp(q: &DenseMatrix, p: &[f64], upper: f64, iterations: usize) -> Vec<f64> {
    let n = p.len();
    let lipschitz = (0..n).map(|i| q.get(i, i)).sum::<f64>().max(1e-12);
    let step = 1.0 / lipschitz;
    let grad = |a: &[f64]| -> Vec<f64> { (0..n).map(|i| (0..n).map(|j| q.get(i, j) * a[j]).sum::<f64>() + p[i]).collect() };
    let mut x = project_capped_simplex(&vec![1.0 / n as f64; n], upper);
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..iterations {
        let g = grad(&y);
        let z: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        let x_next = project_capped_simplex(&z, upper);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = x_next.iter().zip(&x).map(|(a, b)| a + (t - 1.0) / t_next * (a - b)).collect();
        x = x_next;
        t = t_next;
    }
    x
}

pub fn quadratic(q: &DenseMatrix, a: &[f64]) -> f64 {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[i] * q.get(i, j) * a[j]).sum::<f64>()).sum()
}

/// SVDD dual objective (maximized) at the oracle optimum.
pub fn svdd_oracle_objective(k: &DenseMatrix, c: f64) -> f64 {
    let n = k.rows();
    let q = DenseMatrix::from_fn(n, n, |i, j| 2.0 * k.get(i, j));
    let p: Vec<f64> = (0..n).map(|i| -k.get(i, i)).collect();
    let a = capped_simplex_qp(&q, &p, c.min(1.0), 60_000);
    (0..n).map(|i| a[i] * k.get(i, i)).sum::<f64>() - quadratic(k, &a)
}

/// OC-SVM dual objective (minimized) at the oracle optimum.
pub fn ocsvm_oracle_objective(k: &DenseMatrix, nu: f64) -> f64 {
    let n = k.rows();
    let a = capped_simplex_qp(k, &vec![0.0; n], (1.0 / (nu * n as f64)).min(1.0), 60_000);
    0.5 * quadratic(k, &a)
}
