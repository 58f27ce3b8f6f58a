//! Non-linear projection trick: explicit pre-images whose inner products
//! reproduce the centered kernel, and the same map from reference case 1.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use refkernel::kernel::{center_reference_kernel, kernel_matrix, BaseKernel};
use refkernel::reference::{fit_reference, map_samples, npt_fit, npt_map_test};
use refkernel::selfcheck::gaussian;

fn main() -> refkernel::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = gaussian(3, 15, &mut rng);
    let base = BaseKernel::rbf(1.5)?;

    let (block, model) = npt_fit(&x, base, 1e-6)?;
    println!("feature dimension r = {}", block.dim());

    let (centered, _) = center_reference_kernel(&kernel_matrix(&base, &x, &x)?)?;
    let gram = block.features().t_matmul(block.features())?;
    println!("|ΦᵀΦ - centered K|max = {:e}", gram.max_abs_diff(&centered));

    let case1 = map_samples(&Arc::new(fit_reference(&x, base, 1e-6)?), &x)?;
    println!("|NPT - case 1 map|max = {:e}", block.features().max_abs_diff(case1.features()));

    let z = npt_map_test(&model, &[0.1, -0.2, 0.3])?;
    println!("test pre-image (first 3): {:.4?}", &z[..3.min(z.len())]);
    Ok(())
}
