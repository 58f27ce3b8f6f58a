//! The seven reference constructions: reference count M and effective rank r.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use refkernel::kernel::{sigma_from_scale, BaseKernel};
use refkernel::reference::{fit_reference, select_references, ReferenceCase};
use refkernel::selfcheck::gaussian;

fn main() -> refkernel::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = gaussian(4, 30, &mut rng);
    let x_neg = gaussian(4, 12, &mut rng);
    let base = BaseKernel::rbf(sigma_from_scale(&x, 1.0)?)?;

    println!("N = {}, N_neg = {}", x.cols(), x_neg.cols());
    for case in ReferenceCase::ALL {
        let refs = select_references(case, &x, Some(&x_neg), &mut rng)?;
        let model = fit_reference(&refs, base, 1e-6)?;
        println!("case {case}: M = {:>3}  r = {:>3}", model.reference_count(), model.rank());
    }
    Ok(())
}
