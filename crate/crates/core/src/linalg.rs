//! Dense linear algebra used throughout the crate.
//!
//! Matrices are small (a few hundred rows at most), so everything here is a
//! straightforward column-major implementation with deterministic loop order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute asymmetry accepted by [`sym_eig`] before the input is rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

const MAX_SWEEPS: usize = 100;
const CONVERGENCE_FACTOR: f64 = 1e-12;

/// Column-major real matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos % rows.max(1),
                pos / rows.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix by evaluating `f(row, col)`; panics on non-finite output.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                let v = f(i, j);
                assert!(v.is_finite(), "non-finite entry at ({i}, {j})");
                data.push(v);
            }
        }
        Self { rows, cols, data }
    }

    /// Row-major literal helper, mostly for tests and examples.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        let mut data = Vec::with_capacity(r * c);
        for j in 0..c {
            for row in rows {
                data.push(row[j]);
            }
        }
        Self::new(r, c, data)
    }

    /// Stacks equally long vectors as columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let c = columns.len();
        let r = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|col| col.len() != r) {
            return Err(Error::InvalidMatrix("columns differ in length".into()));
        }
        Self::new(r, c, columns.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub(crate) fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.cols).map(move |j| self.column(j))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Largest |m_ij - m_ji|; `None` for non-square input.
    pub fn asymmetry(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let mut worst = 0.0f64;
        for j in 0..self.cols {
            for i in 0..j {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        Some(worst)
    }

    /// Largest entrywise absolute difference. Shapes must agree.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "max_abs_diff on mismatched shapes"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        matmul(self, other)
    }

    /// `selfᵀ · other` without materializing the transpose.
    pub fn t_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::InvalidShape(format!(
                "({}x{})ᵀ · ({}x{})",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.cols, other.cols);
        for j in 0..other.cols {
            let b = other.column(j);
            for i in 0..self.cols {
                out.data[j * self.cols + i] = dot(self.column(i), b);
            }
        }
        Ok(out)
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.column(j));
        }
        Self {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    /// Horizontal concatenation `[self, other]`.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::InvalidShape(format!(
                "cannot concatenate {} rows with {} rows",
                self.rows, other.rows
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        })
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Standard product `a · b`.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.rows {
        return Err(Error::InvalidShape(format!(
            "({}x{}) · ({}x{})",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = DenseMatrix::zeros(a.rows, b.cols);
    for j in 0..b.cols {
        let dst = out.column_mut(j);
        for k in 0..a.cols {
            let bkj = b.get(k, j);
            if bkj == 0.0 {
                continue;
            }
            for (d, aik) in dst.iter_mut().zip(a.column(k)) {
                *d += aik * bkj;
            }
        }
    }
    Ok(out)
}

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `t` pairs with `eigenvalues[t]`.
    pub eigenvectors: DenseMatrix,
    pub source_dim: usize,
}

impl EigenDecomposition {
    /// Number of eigenvalues at or above `tol`.
    pub fn rank_at(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l >= tol).count()
    }

    /// `U Λ Uᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.source_dim;
        let mut out = DenseMatrix::zeros(n, n);
        for (t, &lambda) in self.eigenvalues.iter().enumerate() {
            let u = self.eigenvectors.column(t);
            for j in 0..n {
                let s = lambda * u[j];
                for (o, ui) in out.column_mut(j).iter_mut().zip(u) {
                    *o += ui * s;
                }
            }
        }
        out
    }
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// The input is symmetrized as `(m + mᵀ)/2` first. Eigenvectors are sign
/// canonicalized so the largest-magnitude component of each is positive.
pub fn sym_eig(m: &DenseMatrix) -> Result<EigenDecomposition> {
    let asym = m.asymmetry().ok_or_else(|| {
        Error::InvalidMatrix(format!("{}x{} matrix is not square", m.rows, m.cols))
    })?;
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::InvalidMatrix(format!(
            "matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    let n = m.rows;
    let mut a = m.clone();
    for j in 0..n {
        for i in 0..j {
            let avg = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, avg);
            a.set(j, i, avg);
        }
    }
    let mut v = DenseMatrix::identity(n);
    let threshold = CONVERGENCE_FACTOR * a.frobenius_norm();

    let mut converged = false;
    for sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q).abs();
                // Entries already below rounding of both diagonals are
                // dropped instead of rotated.
                if sweep > 3 && a.get(p, p).abs() + 100.0 * apq == a.get(p, p).abs() && a.get(q, q).abs() + 100.0 * apq == a.get(q, q).abs() {
                    a.set(p, q, 0.0);
                    a.set(q, p, 0.0);
                } else {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }
    if !converged {
        let off_norm = off_diagonal_norm(&a);
        if off_norm > threshold {
            return Err(Error::ConvergenceFailure {
                sweeps: MAX_SWEEPS,
                off_norm,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps ties in index order, so output is deterministic.
    order.sort_by(|&i, &j| a.get(j, j).total_cmp(&a.get(i, i)));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut eigenvectors = v.select_columns(&order);
    for t in 0..n {
        canonicalize_sign(eigenvectors.column_mut(t));
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        source_dim: n,
    })
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                let x = a.get(i, j);
                s += x * x;
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation zeroing `a[p][q]`; accumulates into `v`.
fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    if apq == 0.0 {
        return;
    }
    let app = a.get(p, p);
    let aqq = a.get(q, q);
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.is_infinite() {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows;

    {
        let (col_p, col_q) = two_columns_mut(a, p, q);
        for (x, y) in col_p.iter_mut().zip(col_q.iter_mut()) {
            let (akp, akq) = (*x, *y);
            *x = c * akp - s * akq;
            *y = s * akp + c * akq;
        }
    }
    // Mirror the updated columns into rows p and q.
    let data = &mut a.data;
    for k in 0..n {
        if k != p && k != q {
            data[p + k * n] = data[k + p * n];
            data[q + k * n] = data[k + q * n];
        }
    }
    a.set(p, p, app - t * apq);
    a.set(q, q, aqq + t * apq);
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);

    let (vp, vq) = two_columns_mut(v, p, q);
    for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
        let (vkp, vkq) = (*x, *y);
        *x = c * vkp - s * vkq;
        *y = s * vkp + c * vkq;
    }
}

fn two_columns_mut(m: &mut DenseMatrix, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let rows = m.rows;
    let (left, right) = m.data.split_at_mut(q * rows);
    (&mut left[p * rows..(p + 1) * rows], &mut right[..rows])
}

fn canonicalize_sign(u: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in u.iter().enumerate() {
        if x.abs() > u[best].abs() {
            best = i;
        }
    }
    if u.get(best).is_some_and(|&x| x < 0.0) {
        for x in u.iter_mut() {
            *x = -*x;
        }
    }
}

/// Keeps the eigenpairs whose eigenvalue is at least `tol`; the count kept is
/// the effective rank.
pub fn truncate_spectrum(e: &EigenDecomposition, tol: f64) -> EigenDecomposition {
    let keep: Vec<usize> = (0..e.eigenvalues.len())
        .filter(|&t| e.eigenvalues[t] >= tol)
        .collect();
    EigenDecomposition {
        eigenvalues: keep.iter().map(|&t| e.eigenvalues[t]).collect(),
        eigenvectors: e.eigenvectors.select_columns(&keep),
        source_dim: e.source_dim,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        DenseMatrix::from_fn(n, n, |i, j| raw.get(i, j) + raw.get(j, i))
    }

    #[test]
    fn new_rejects_bad_length_and_nan() {
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::new(1, 1, vec![f64::INFINITY]).is_err());
        assert!(DenseMatrix::new(0, 3, vec![]).is_ok());
    }

    #[test]
    fn identity_spectrum() {
        let e = sym_eig(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_spectrum_is_axis_aligned() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let e = sym_eig(&m).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0]);
        assert_eq!(e.eigenvectors.column(0), &[0.0, 1.0]);
        assert_eq!(e.eigenvectors.column(1), &[1.0, 0.0]);
    }

    #[test]
    fn random_symmetric_reconstructs() {
        let m = random_symmetric(8, 3);
        let e = sym_eig(&m).unwrap();
        assert!(e.reconstruct().max_abs_diff(&m) <= 1e-7);
        assert!((e.eigenvalues.iter().sum::<f64>() - m.trace()).abs() <= 1e-7 * 8.0);
        let recon_norm = e.eigenvalues.iter().map(|l| l * l).sum::<f64>().sqrt();
        assert!((recon_norm - m.frobenius_norm()).abs() <= 1e-9);
        let gram = e.eigenvectors.t_matmul(&e.eigenvectors).unwrap();
        assert!(gram.max_abs_diff(&DenseMatrix::identity(8)) <= 1e-8);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rejects_non_square_and_asymmetric() {
        let m = DenseMatrix::zeros(2, 3);
        assert!(matches!(sym_eig(&m), Err(Error::InvalidMatrix(_))));
        let m = DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&m), Err(Error::InvalidMatrix(_))));
        // drift below tolerance is absorbed
        let m = DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5 + 1e-12, 1.0]]).unwrap();
        assert!(sym_eig(&m).is_ok());
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let m = random_symmetric(12, 9);
        assert_eq!(sym_eig(&m).unwrap(), sym_eig(&m).unwrap());
    }

    #[test]
    fn truncation_threshold() {
        let e = EigenDecomposition {
            eigenvalues: vec![2.0, 1e-7, 0.0],
            eigenvectors: DenseMatrix::identity(3),
            source_dim: 3,
        };
        let t = truncate_spectrum(&e, 1e-6);
        assert_eq!(t.eigenvalues, vec![2.0]);
        assert_eq!(t.eigenvectors.cols(), 1);

        let full = sym_eig(&random_symmetric(4, 1).matmul(&random_symmetric(4, 1)).unwrap()).unwrap();
        assert!(full.eigenvalues.iter().all(|&l| l >= 1e-6));
        assert_eq!(truncate_spectrum(&full, 1e-6), full);
    }

    #[test]
    fn matmul_hand_and_identity() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(matmul(&a, &b).unwrap().as_slice(), &[2.0, 4.0]);
        assert_eq!(matmul(&DenseMatrix::identity(2), &a).unwrap(), a);
        assert!(matches!(matmul(&b, &b), Err(Error::InvalidShape(_))));
    }

    #[test]
    fn matmul_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DenseMatrix::from_fn(5, 7, |_, _| rng.random_range(-2.0..2.0));
        let b = DenseMatrix::from_fn(7, 3, |_, _| rng.random_range(-2.0..2.0));
        let naive = DenseMatrix::from_fn(5, 3, |i, j| (0..7).map(|k| a.get(i, k) * b.get(k, j)).sum());
        assert!(matmul(&a, &b).unwrap().max_abs_diff(&naive) <= 1e-12);
        let at = a.transpose();
        assert!(at.t_matmul(&b).unwrap().max_abs_diff(&naive) <= 1e-12);
    }
}
