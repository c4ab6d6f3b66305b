use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use qwgan::ansatz::random_angles;
use qwgan::discriminator::estimate_w1_scaled;
use qwgan::observables::ObservableSet;
use qwgan::rng::{self, stream};
use qwgan::trainer::{Checkpoint, MixtureGenerator, Trainer};

use crate::config::LearnConfig;
use crate::svg::{line_chart, Series};

/// Trains a generator against a known circuit's expectations.
pub fn run(cfg: &LearnConfig, config_path: Option<&Path>, resume: Option<&Path>) -> Result<PathBuf> {
    let target_spec = cfg.target_spec()?;
    let gen_spec = cfg.generator_spec()?;
    let checkpoint = match resume {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading checkpoint {}", p.display()))?;
            let ckpt = Checkpoint::from_json(&text).with_context(|| format!("parsing checkpoint {}", p.display()))?;
            ensure!(ckpt.ansatz_spec()? == gen_spec, "checkpoint generator differs from the configured ansatz");
            Some(ckpt)
        }
        None => None,
    };

    let set = ObservableSet::enumerate(cfg.n, cfg.k)?;
    let target_params = match &cfg.target.params {
        Some(p) => p.clone(),
        None => random_angles(target_spec.n_params(), &mut rng::seeded(cfg.seed, stream::TARGET_PARAMS)),
    };
    let target_state = target_spec.circuit()?.run_from_zero(&target_params)?;
    let target = set.expectation_vector(&target_state)?;
    let tcfg = cfg.training_config();

    let mut trainer = match &checkpoint {
        Some(ckpt) => Trainer::resume(&set, &target, Some(&target_state), tcfg.clone(), ckpt)?,
        None => {
            let gen0 = MixtureGenerator::random(gen_spec, cfg.rank, &mut rng::seeded(cfg.seed, stream::GENERATOR_INIT))?;
            Trainer::new(&set, &target, Some(&target_state), tcfg.clone(), gen0)?
        }
    };
    let reason = trainer.run()?;
    let checkpoint_out = trainer.checkpoint()?;
    let generated = set.expectation_vector(&trainer.generator().state()?)?;
    let witness = estimate_w1_scaled(&target, &generated, &set, tcfg.lipschitz_divisor)?;

    let mut run = super::open_run(&cfg.out, "learn", cfg.seed, config_path)?;
    if let Some(p) = resume {
        run.add_input(p)?;
    }
    let history = trainer.history();
    run.write_with("history.csv", |b| history.write_csv(b))?;
    run.write_with("target.csv", |b| target.write_csv(&set, b))?;
    run.write_with("witness.csv", |b| witness.write_csv(&set, b))?;
    run.write("checkpoint.json", checkpoint_out.to_json()?.as_bytes())?;
    if cfg.svg {
        let w1 = history.records.iter().map(|r| (r.iter as f64, r.w1)).collect();
        let fid = history.records.iter().filter_map(|r| r.fidelity.map(|f| (r.iter as f64, f))).collect();
        let chart = line_chart(
            "Training",
            "iteration",
            "value",
            &[Series { name: "W1", points: w1, markers: false }, Series { name: "fidelity", points: fid, markers: false }],
        );
        run.write("history.svg", chart.as_bytes())?;
    }
    let last = history.last().expect("training records at least one iteration");
    println!(
        "stopped ({reason:?}) at iteration {}: W1 {:.6}, fidelity {:.6}",
        last.iter,
        last.w1,
        last.fidelity.unwrap_or(f64::NAN)
    );
    run.finish(cfg)
}
