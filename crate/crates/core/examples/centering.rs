//! Centering of the reference kernel and of cross kernels against the
//! reference mean.

use refkernel::kernel::{center_cross_kernel, center_reference_kernel, kernel_matrix, BaseKernel};
use refkernel::linalg::DenseMatrix;

fn main() -> refkernel::Result<()> {
    let refs = DenseMatrix::from_rows(&[vec![0.0, 1.0, 2.5, -1.0], vec![0.5, -0.2, 1.0, 0.0]])?;
    let x = DenseMatrix::from_rows(&[vec![0.3, 2.0], vec![0.1, -1.5]])?;
    let base = BaseKernel::rbf(1.2)?;

    let k_rr = kernel_matrix(&base, &refs, &refs)?;
    let (centered, ctx) = center_reference_kernel(&k_rr)?;
    let col_sums: Vec<f64> = centered.columns().map(|c| c.iter().sum()).collect();
    println!("column sums of centered K_RR: {col_sums:?}");

    let k_rx = kernel_matrix(&base, &refs, &x)?;
    let cross = center_cross_kernel(&ctx, &k_rr, &k_rx)?;
    let cross_sums: Vec<f64> = cross.columns().map(|c| c.iter().sum()).collect();
    println!("column sums of centered K_RX: {cross_sums:?}");
    Ok(())
}
