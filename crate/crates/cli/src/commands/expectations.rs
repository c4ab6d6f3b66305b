use std::path::{Path, PathBuf};

use anyhow::Result;
use qwgan::ansatz::random_angles;
use qwgan::observables::ObservableSet;
use qwgan::rng::{self, stream};

use crate::config::ExpectationsConfig;

/// Simulates the configured circuit and writes its expectation vector.
pub fn run(cfg: &ExpectationsConfig, config_path: Option<&Path>) -> Result<PathBuf> {
    let spec = cfg.spec()?;
    let set = ObservableSet::enumerate(cfg.n, cfg.k)?;
    let params = match &cfg.params {
        Some(p) => p.clone(),
        None => random_angles(spec.n_params(), &mut rng::seeded(cfg.seed, stream::TARGET_PARAMS)),
    };
    let state = spec.circuit()?.run_from_zero(&params)?;
    let values = set.expectation_vector(&state)?;

    let mut run = super::open_run(&cfg.out, "expectations", cfg.seed, config_path)?;
    run.write_with("expectations.csv", |b| values.write_csv(&set, b))?;
    run.write("params.json", &serde_json::to_vec_pretty(&params)?)?;
    println!("{} expectations of {} observables", spec.family(), set.len());
    run.finish(cfg)
}
