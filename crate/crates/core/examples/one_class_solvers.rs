//! SVDD and OC-SVM duals on a toy RBF kernel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use refkernel::kernel::{kernel_diagonal, kernel_matrix, BaseKernel};
use refkernel::selfcheck::{gaussian, ocsvm_kkt_residual, svdd_kkt_residual};
use refkernel::solver::{ocsvm_decide, ocsvm_fit, svdd_decide, svdd_fit};

fn main() -> refkernel::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = gaussian(2, 40, &mut rng);
    let base = BaseKernel::rbf(1.0)?;
    let k = kernel_matrix(&base, &x, &x)?;

    let svdd = svdd_fit(&k, 0.1)?;
    println!(
        "SVDD  C=0.1: R² = {:.4}, {} support vectors, KKT residual {:.1e}",
        svdd.r_squared,
        svdd.support.len(),
        svdd_kkt_residual(&k, &svdd)
    );
    let oc = ocsvm_fit(&k, 0.2)?;
    println!(
        "OCSVM ν=0.2: ρ = {:.4}, {} support vectors, KKT residual {:.1e}",
        oc.rho,
        oc.support.len(),
        ocsvm_kkt_residual(&k, &oc)
    );

    let probes = refkernel::linalg::DenseMatrix::from_rows(&[vec![0.0, 4.0], vec![0.0, 4.0]])?;
    let cross = kernel_matrix(&base, &x, &probes)?;
    let diag = kernel_diagonal(&base, &probes);
    for (j, &kzz) in diag.iter().enumerate() {
        let (s1, t1) = svdd_decide(&svdd, cross.column(j), kzz)?;
        let (s2, t2) = ocsvm_decide(&oc, cross.column(j))?;
        println!("probe {j}: svdd {s1:+.4} ({t1}), ocsvm {s2:+.4} ({t2})");
    }
    Ok(())
}
