//! Fit a case-5 model on raw data, save it as JSON, reload and score.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use refkernel::data::standardize;
use refkernel::persist::ModelFile;
use refkernel::pipeline::{EvalPath, Hyperparams, KernelChoice, Method, ModelSpec, OneClassModel};
use refkernel::reference::ReferenceCase;
use refkernel::selfcheck::gaussian;

fn main() -> refkernel::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let raw_targets = gaussian(3, 30, &mut rng);
    let raw_neg = gaussian(3, 15, &mut rng);

    let (x, rest, norm) = standardize(&raw_targets, &[&raw_neg])?;
    let spec = ModelSpec {
        method: Method::Ocsvm,
        path: EvalPath::Mapping,
        choice: KernelChoice::Reference(ReferenceCase::TrainingWithNegatives),
        hyper: Hyperparams { scale: 1.0, trade_off: 0.2 },
        eigen_tol: 1e-6,
    };
    let model = OneClassModel::fit(spec, &x, Some(&rest[0]), &mut rng)?;
    let file = ModelFile::new(vec!["a".into(), "b".into(), "c".into()], norm, model);

    let path = std::env::temp_dir().join("refkernel-example-model.json");
    file.save(&path)?;
    let loaded = ModelFile::load(&path)?;
    let before = file.decide_raw(&raw_targets)?;
    let after = loaded.decide_raw(&raw_targets)?;
    println!("saved to {} ({} references)", path.display(), loaded.model.setup.reference_model().unwrap().reference_count());
    println!("decisions identical after reload: {}", before == after);
    let accepted = after.iter().filter(|d| d.1).count();
    println!("training targets accepted: {accepted}/{}", after.len());
    Ok(())
}
