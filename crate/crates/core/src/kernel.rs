//! Base kernels, kernel matrices and feature-space centering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix};

/// The kernel the reference construction is built on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BaseKernel {
    /// `exp(-‖x-y‖² / (2σ²))`
    Rbf { sigma: f64 },
    /// `xᵀy`
    Linear,
}

impl BaseKernel {
    pub fn rbf(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Config(format!("rbf sigma must be finite and > 0, got {sigma}")));
        }
        Ok(Self::Rbf { sigma })
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::InvalidShape(format!(
                "kernel arguments have dimensions {} and {}",
                x.len(),
                y.len()
            )));
        }
        Ok(self.eval_unchecked(x, y))
    }

    #[inline]
    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Self::Rbf { sigma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
            Self::Linear => dot(x, y),
        }
    }
}

/// `κ(x, y)` for a single pair.
pub fn kernel_eval(spec: &BaseKernel, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.eval(x, y)
}

/// `[κ(a_i, b_j)]_ij` for column samples of `a` (D×n) and `b` (D×m).
pub fn kernel_matrix(spec: &BaseKernel, a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows() != b.rows() {
        return Err(Error::InvalidShape(format!(
            "kernel_matrix feature dimensions differ: {} vs {}",
            a.rows(),
            b.rows()
        )));
    }
    Ok(DenseMatrix::from_fn(a.cols(), b.cols(), |i, j| {
        spec.eval_unchecked(a.column(i), b.column(j))
    }))
}

/// `κ(z, z)` for every column of `z`.
pub fn kernel_diagonal(spec: &BaseKernel, z: &DenseMatrix) -> Vec<f64> {
    z.columns().map(|c| spec.eval_unchecked(c, c)).collect()
}

/// Statistics of the uncentered reference kernel needed to center kernel
/// vectors of new samples against the reference mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteringContext {
    pub column_means: Vec<f64>,
    pub grand_mean: f64,
}

impl CenteringContext {
    pub fn reference_count(&self) -> usize {
        self.column_means.len()
    }

    /// Centers an M×n cross kernel block `K_RX` with respect to the mean of
    /// the references: `C_M (K_RX − K_RR C_N)`.
    pub fn center_cross(&self, k_rx: &DenseMatrix) -> Result<DenseMatrix> {
        let m = self.reference_count();
        if k_rx.rows() != m {
            return Err(Error::InvalidShape(format!(
                "cross kernel has {} rows, centering context expects {m}",
                k_rx.rows()
            )));
        }
        let mut out = k_rx.clone();
        for j in 0..out.cols() {
            let col = out.column_mut(j);
            let col_mean = col.iter().sum::<f64>() / m as f64;
            for (v, row_mean) in col.iter_mut().zip(&self.column_means) {
                *v = *v - row_mean - col_mean + self.grand_mean;
            }
        }
        Ok(out)
    }
}

/// Centers the reference kernel in feature space, `C_M K_RR C_M`.
pub fn center_reference_kernel(k_rr: &DenseMatrix) -> Result<(DenseMatrix, CenteringContext)> {
    let m = k_rr.rows();
    if m == 0 {
        return Err(Error::EmptyReferenceSet);
    }
    if !k_rr.is_square() {
        return Err(Error::InvalidShape(format!(
            "reference kernel must be square, got {}x{}",
            k_rr.rows(),
            k_rr.cols()
        )));
    }
    let column_means: Vec<f64> = k_rr
        .columns()
        .map(|c| c.iter().sum::<f64>() / m as f64)
        .collect();
    let grand_mean = column_means.iter().sum::<f64>() / m as f64;
    // Symmetric input: row means equal column means.
    let centered = DenseMatrix::from_fn(m, m, |i, j| {
        k_rr.get(i, j) - column_means[i] - column_means[j] + grand_mean
    });
    Ok((
        centered,
        CenteringContext {
            column_means,
            grand_mean,
        },
    ))
}

/// Centers `K_RX` (M×n) given the context from [`center_reference_kernel`].
///
/// `k_rr` is only used to check that it matches the context.
pub fn center_cross_kernel(
    ctx: &CenteringContext,
    k_rr: &DenseMatrix,
    k_rx: &DenseMatrix,
) -> Result<DenseMatrix> {
    if k_rr.rows() != ctx.reference_count() || !k_rr.is_square() {
        return Err(Error::InvalidShape(format!(
            "reference kernel is {}x{}, context has {} references",
            k_rr.rows(),
            k_rr.cols(),
            ctx.reference_count()
        )));
    }
    ctx.center_cross(k_rx)
}

/// Mean squared Euclidean distance over distinct sample pairs.
pub fn average_squared_distance(x: &DenseMatrix) -> Result<f64> {
    let n = x.cols();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "average squared distance needs at least 2 samples, got {n}"
        )));
    }
    let mut total = 0.0;
    for j in 1..n {
        for i in 0..j {
            total += x
                .column(i)
                .iter()
                .zip(x.column(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
    }
    Ok(total / (n * (n - 1) / 2) as f64)
}

/// `σ = √(s · d_aver)` where `d_aver` is the mean squared pairwise distance
/// of the training samples.
pub fn sigma_from_scale(x_train: &DenseMatrix, s: f64) -> Result<f64> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Config(format!("sigma scale must be > 0, got {s}")));
    }
    let d_aver = average_squared_distance(x_train)?;
    if d_aver <= 0.0 {
        return Err(Error::DegenerateData("all training samples are identical".into()));
    }
    Ok((s * d_aver).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matmul, sym_eig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.5..1.5))
    }

    fn centering_matrix(m: usize) -> DenseMatrix {
        DenseMatrix::from_fn(m, m, |i, j| f64::from(u8::from(i == j)) - 1.0 / m as f64)
    }

    #[test]
    fn rbf_values() {
        let k = BaseKernel::rbf(0.7).unwrap();
        assert_eq!(k.eval(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 1.0);
        // ‖x−y‖² = 2σ²
        let sigma: f64 = 0.7;
        let d = sigma * 2.0f64.sqrt();
        let v = k.eval(&[0.0, 0.0], &[d, 0.0]).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.367879).abs() < 1e-6);
        assert!(BaseKernel::rbf(0.0).is_err());
        assert!(BaseKernel::rbf(f64::NAN).is_err());
    }

    #[test]
    fn linear_value_and_shape_error() {
        let k = BaseKernel::Linear;
        assert_eq!(k.eval(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        assert!(matches!(k.eval(&[1.0], &[1.0, 2.0]), Err(Error::InvalidShape(_))));
    }

    #[test]
    fn kernel_is_exactly_symmetric() {
        let k = BaseKernel::rbf(1.3).unwrap();
        let x = [0.3, -1.2, 2.0];
        let y = [1.1, 0.4, -0.7];
        assert_eq!(k.eval(&x, &y).unwrap(), k.eval(&y, &x).unwrap());
    }

    #[test]
    fn kernel_matrix_matches_loop() {
        let k = BaseKernel::rbf(0.9).unwrap();
        let a = random(4, 6, 1);
        let b = random(4, 3, 2);
        let km = kernel_matrix(&k, &a, &b).unwrap();
        assert_eq!((km.rows(), km.cols()), (6, 3));
        for i in 0..6 {
            for j in 0..3 {
                let want = kernel_eval(&k, a.column(i), b.column(j)).unwrap();
                assert!((km.get(i, j) - want).abs() <= 1e-14);
            }
        }
        let kaa = kernel_matrix(&k, &a, &a).unwrap();
        assert!(kaa.diagonal().iter().all(|&d| d == 1.0));
        assert!(kaa.asymmetry().unwrap() <= 1e-12);
        let one = kernel_matrix(&k, &a.select_columns(&[0]), &b.select_columns(&[0])).unwrap();
        assert_eq!(one.get(0, 0), k.eval(a.column(0), b.column(0)).unwrap());
        assert!(kernel_matrix(&k, &a, &random(3, 2, 0)).is_err());
    }

    #[test]
    fn rbf_gram_is_psd() {
        let k = BaseKernel::rbf(0.5).unwrap();
        let x = random(3, 15, 4);
        let e = sym_eig(&kernel_matrix(&k, &x, &x).unwrap()).unwrap();
        assert!(*e.eigenvalues.last().unwrap() >= -1e-9);
    }

    #[test]
    fn single_reference_centers_to_zero() {
        let (c, ctx) = center_reference_kernel(&DenseMatrix::identity(1)).unwrap();
        assert_eq!(c.as_slice(), &[0.0]);
        assert_eq!(ctx.reference_count(), 1);
        assert!(matches!(
            center_reference_kernel(&DenseMatrix::zeros(0, 0)),
            Err(Error::EmptyReferenceSet)
        ));
    }

    #[test]
    fn constant_kernel_centers_away() {
        let ones = DenseMatrix::from_fn(3, 3, |_, _| 1.0);
        let (c, ctx) = center_reference_kernel(&ones).unwrap();
        assert!(c.as_slice().iter().all(|&v| v.abs() < 1e-15));
        let mean_of_means = ctx.column_means.iter().sum::<f64>() / 3.0;
        assert!((ctx.grand_mean - mean_of_means).abs() <= 1e-12);
    }

    #[test]
    fn centered_reference_matches_materialized_formula() {
        let k = BaseKernel::rbf(1.0).unwrap();
        let r = random(3, 7, 8);
        let krr = kernel_matrix(&k, &r, &r).unwrap();
        let (c, _) = center_reference_kernel(&krr).unwrap();
        let cm = centering_matrix(7);
        let oracle = matmul(&matmul(&cm, &krr).unwrap(), &cm).unwrap();
        assert!(c.max_abs_diff(&oracle) <= 1e-12);
        for j in 0..7 {
            let col: f64 = c.column(j).iter().sum();
            let row: f64 = (0..7).map(|jj| c.get(j, jj)).sum();
            assert!(col.abs() <= 1e-10 * 7.0 && row.abs() <= 1e-10 * 7.0);
        }
    }

    #[test]
    fn cross_centering_matches_loop_oracle() {
        let k = BaseKernel::rbf(1.2).unwrap();
        let (m, n) = (6, 4);
        let r = random(2, m, 10);
        let x = random(2, n, 11);
        let krr = kernel_matrix(&k, &r, &r).unwrap();
        let krx = kernel_matrix(&k, &r, &x).unwrap();
        let (_, ctx) = center_reference_kernel(&krr).unwrap();
        let got = center_cross_kernel(&ctx, &krr, &krx).unwrap();

        // C_M (K_RX − K_RR C_N) with C_N = (1/M) 1_M 1_nᵀ, all by explicit loops.
        let mut inner = vec![vec![0.0; n]; m];
        for (i, row) in inner.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let mut krr_cn = 0.0;
                for l in 0..m {
                    krr_cn += krr.get(i, l) * (1.0 / m as f64);
                }
                *v = krx.get(i, j) - krr_cn;
            }
        }
        for i in 0..m {
            for j in 0..n {
                let mut want = 0.0;
                for (l, inner_row) in inner.iter().enumerate() {
                    let cm = if i == l { 1.0 } else { 0.0 } - 1.0 / m as f64;
                    want += cm * inner_row[j];
                }
                assert!((got.get(i, j) - want).abs() <= 1e-12);
            }
        }
        for j in 0..n {
            assert!(got.column(j).iter().sum::<f64>().abs() <= 1e-10 * m as f64);
        }
    }

    #[test]
    fn cross_centering_of_references_reproduces_reference_centering() {
        let k = BaseKernel::rbf(0.8).unwrap();
        let r = random(3, 5, 12);
        let krr = kernel_matrix(&k, &r, &r).unwrap();
        let (c, ctx) = center_reference_kernel(&krr).unwrap();
        let cross = center_cross_kernel(&ctx, &krr, &krr).unwrap();
        assert!(cross.max_abs_diff(&c) <= 1e-12);
    }

    #[test]
    fn mean_column_centers_to_zero() {
        let k = BaseKernel::rbf(0.8).unwrap();
        let r = random(3, 5, 13);
        let krr = kernel_matrix(&k, &r, &r).unwrap();
        let (_, ctx) = center_reference_kernel(&krr).unwrap();
        let mean_col = DenseMatrix::new(5, 1, ctx.column_means.clone()).unwrap();
        let out = center_cross_kernel(&ctx, &krr, &mean_col).unwrap();
        assert!(out.as_slice().iter().all(|v| v.abs() <= 1e-12));
        assert!(matches!(
            center_cross_kernel(&ctx, &krr, &DenseMatrix::zeros(4, 1)),
            Err(Error::InvalidShape(_))
        ));
    }

    #[test]
    fn centered_rbf_gram_loses_a_dimension() {
        let k = BaseKernel::rbf(1.0).unwrap();
        let x = random(3, 10, 14);
        let (c, _) = center_reference_kernel(&kernel_matrix(&k, &x, &x).unwrap()).unwrap();
        let e = sym_eig(&c).unwrap();
        assert!(e.eigenvalues.last().unwrap().abs() < 1e-6);
        assert!(e.rank_at(1e-6) <= 9);
    }

    #[test]
    fn sigma_rules() {
        let two = DenseMatrix::from_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert!((sigma_from_scale(&two, 1.0).unwrap() - 2.0).abs() < 1e-15);
        let s1 = sigma_from_scale(&two, 1.0).unwrap();
        let s100 = sigma_from_scale(&two, 100.0).unwrap();
        assert!((s100 / s1 - 10.0).abs() < 1e-12);

        let x = random(4, 10, 15);
        let mut total = 0.0;
        let mut pairs = 0.0;
        for i in 0..10 {
            for j in 0..10 {
                if i != j {
                    total += (0..4).map(|d| (x.get(d, i) - x.get(d, j)).powi(2)).sum::<f64>();
                    pairs += 1.0;
                }
            }
        }
        let want = (0.5 * total / pairs).sqrt();
        assert!((sigma_from_scale(&x, 0.5).unwrap() - want).abs() <= 1e-12);

        assert!(matches!(
            sigma_from_scale(&two.select_columns(&[0]), 1.0),
            Err(Error::InsufficientData(_))
        ));
        let same = DenseMatrix::from_fn(2, 3, |_, _| 1.0);
        assert!(matches!(sigma_from_scale(&same, 1.0), Err(Error::DegenerateData(_))));
    }
}
