//! A reduced run of the split × repeat protocol on Iris.
//!
//!     cargo run --release --example uci_experiment

use std::path::PathBuf;

use refkernel::experiment::{results_markdown, run_experiment, ExperimentConfig};

fn main() -> refkernel::Result<()> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv");
    let mut cfg = ExperimentConfig::parse(
        "methods = svdd, ocsvm\n\
         cases = base, 2, 5\n\
         paths = kernel\n\
         splits = 2\n\
         repeats = 2\n",
    )?;
    cfg.datasets = vec![data];
    let records = run_experiment(&cfg, &|msg| eprintln!("{msg}"))?;
    print!("{}", results_markdown(&records));
    Ok(())
}
