//! Grid search on one Iris task; prints the validation Gmean table.

use std::path::PathBuf;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use refkernel::data::{load_csv, make_tasks, split_task};
use refkernel::experiment::{cross_validate, Grids, NegativeStrategy, SearchSpace};
use refkernel::pipeline::{EvalPath, KernelChoice, Method};

fn main() -> refkernel::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv");
    let dataset = Arc::new(load_csv(path, "class")?);
    let template = &make_tasks(&dataset)[1];
    let task = split_task(template, 0.7, &mut ChaCha8Rng::seed_from_u64(0))?;
    println!("{}: N = {}, N_neg = {}, test = {}", task.name, task.x_train.cols(), task.x_neg_train.cols(), task.x_test.cols());

    let grids = Grids::default();
    let space = SearchSpace {
        method: Method::Svdd,
        path: EvalPath::Kernel,
        choice: KernelChoice::Base,
        grids: &grids,
        folds: 5,
        eigen_tol: 1e-6,
        negatives: NegativeStrategy::TrainSplitNegatives,
    };
    let cv = cross_validate(&task, &space, &mut ChaCha8Rng::seed_from_u64(1))?;
    for (hp, score) in &cv.table {
        println!("s = {:>6}  C = {:.1}  Gmean = {score:.1}", hp.scale, hp.trade_off);
    }
    println!("selected s = {}, C = {} ({:.1})", cv.best.scale, cv.best.trade_off, cv.score);
    Ok(())
}
