//! The same reference kernel used as a precomputed kernel and as explicit
//! linear features gives the same decisions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use refkernel::pipeline::{EvalPath, Hyperparams, KernelChoice, Method, ModelSpec, OneClassModel};
use refkernel::reference::ReferenceCase;
use refkernel::selfcheck::gaussian;

fn main() -> refkernel::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = gaussian(3, 25, &mut rng);
    let x_neg = gaussian(3, 10, &mut rng);
    let test = gaussian(3, 200, &mut rng);

    for case in ReferenceCase::ALL {
        let spec = |path| ModelSpec {
            method: Method::Svdd,
            path,
            choice: KernelChoice::Reference(case),
            hyper: Hyperparams { scale: 1.0, trade_off: 0.2 },
            eigen_tol: 1e-6,
        };
        let kernel = OneClassModel::fit(spec(EvalPath::Kernel), &x, Some(&x_neg), &mut ChaCha8Rng::seed_from_u64(9))?;
        let linear = OneClassModel::fit(spec(EvalPath::Mapping), &x, Some(&x_neg), &mut ChaCha8Rng::seed_from_u64(9))?;
        let same = kernel.predict(&test)? == linear.predict(&test)?;
        println!("case {case}: rank {:>2} / dim {:>2}, identical decisions: {same}", kernel.rank, linear.rank);
    }
    Ok(())
}
