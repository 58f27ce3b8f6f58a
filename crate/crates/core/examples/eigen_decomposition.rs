//! Symmetric eigendecomposition and spectrum truncation.

use refkernel::kernel::{center_reference_kernel, kernel_matrix, BaseKernel};
use refkernel::linalg::{sym_eig, truncate_spectrum, DenseMatrix};

fn main() -> refkernel::Result<()> {
    let m = DenseMatrix::from_rows(&[
        vec![4.0, 1.0, 0.0],
        vec![1.0, 3.0, 1.0],
        vec![0.0, 1.0, 2.0],
    ])?;
    let e = sym_eig(&m)?;
    println!("eigenvalues: {:?}", e.eigenvalues);
    println!("trace {} vs sum {}", m.trace(), e.eigenvalues.iter().sum::<f64>());
    println!("reconstruction error: {:e}", e.reconstruct().max_abs_diff(&m));

    // A centered RBF Gram matrix always loses the all-ones direction.
    let x = DenseMatrix::from_fn(2, 10, |i, j| ((i + 1) * j) as f64 * 0.3);
    let k = kernel_matrix(&BaseKernel::rbf(1.0)?, &x, &x)?;
    let (centered, _) = center_reference_kernel(&k)?;
    let full = sym_eig(&centered)?;
    let kept = truncate_spectrum(&full, 1e-6);
    println!("centered Gram: {} eigenvalues, {} kept at 1e-6", full.eigenvalues.len(), kept.eigenvalues.len());
    println!("smallest: {:e}", full.eigenvalues.last().unwrap());
    Ok(())
}
