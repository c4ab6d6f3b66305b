use std::path::{Path, PathBuf};

use anyhow::Result;
use qwgan::ansatz::random_angles;
use qwgan::observables::{write_vector_rows, ExpectationVector, ObservableSet};
use qwgan::rng::{self, stream};
use qwgan::trainer::{train, MixtureGenerator, TrainingHistory};
use qwgan::wgan::{sample_targets, train_wgan, MlpFile, WganOutcome};
use serde::Serialize;

use crate::config::WganCommandConfig;
use crate::svg::{line_chart, Series};

#[derive(Serialize)]
struct ModelFile {
    generator: MlpFile,
    critic: MlpFile,
}

/// Per-target outcome of the quantum training.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetRun {
    pub initial_w1: f64,
    pub final_w1: f64,
    pub min_w1: f64,
    pub first_below_one: Option<usize>,
    pub history: TrainingHistory,
}

pub struct WganRun {
    pub set: ObservableSet,
    pub training_set: Vec<ExpectationVector>,
    pub outcome: WganOutcome,
    pub targets: Vec<ExpectationVector>,
    pub runs: Vec<TargetRun>,
}

/// Random circuit instances → WGAN-GP → sampled targets → quantum training.
pub fn pipeline(cfg: &WganCommandConfig) -> Result<WganRun> {
    let spec = cfg.spec()?;
    let circuit = spec.circuit()?;
    let set = ObservableSet::enumerate(cfg.n, cfg.k)?;
    let mut data_rng = rng::seeded(cfg.seed, stream::TRAINING_SET);
    let training_set = (0..cfg.training_set_size)
        .map(|_| {
            let params = random_angles(circuit.n_params(), &mut data_rng);
            Ok(set.expectation_vector(&circuit.run_from_zero(&params)?)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let outcome = train_wgan(&training_set, &cfg.wgan.config(cfg.seed))?;
    let targets = sample_targets(&outcome.generator, &set, cfg.targets, &mut rng::seeded(cfg.seed, stream::WGAN_SAMPLES))?;

    let tcfg = cfg.training.training_config(cfg.k, cfg.rank, cfg.seed);
    let mut init = rng::seeded(cfg.seed, stream::GENERATOR_INIT);
    let mut runs = Vec::with_capacity(targets.len());
    for target in &targets {
        let gen0 = MixtureGenerator::random(spec, cfg.rank, &mut init)?;
        let (_, history) = train(target, &tcfg, gen0, &set, None)?;
        let w1 = |i: usize| history.records[i].w1;
        runs.push(TargetRun {
            initial_w1: w1(0),
            final_w1: history.final_w1().unwrap_or(f64::NAN),
            min_w1: history.records.iter().map(|r| r.w1).fold(f64::INFINITY, f64::min),
            first_below_one: history.records.iter().find(|r| r.w1 < 1.0).map(|r| r.iter),
            history,
        });
    }
    Ok(WganRun { set, training_set, outcome, targets, runs })
}

pub fn run(cfg: &WganCommandConfig, config_path: Option<&Path>) -> Result<PathBuf> {
    let res = pipeline(cfg)?;
    let mut run = super::open_run(&cfg.out, "wgan", cfg.seed, config_path)?;
    run.write_with("training_set.csv", |b| write_vector_rows(&res.set, &res.training_set, b))?;
    run.write_with("wgan_history.csv", |b| res.outcome.write_history_csv(b))?;
    let model = ModelFile { generator: (&res.outcome.generator).into(), critic: (&res.outcome.critic).into() };
    run.write("wgan_model.json", &serde_json::to_vec(&model)?)?;
    run.write_with("targets.csv", |b| write_vector_rows(&res.set, &res.targets, b))?;
    let mut summary = String::from("target,initial_w1,final_w1,min_w1,first_iter_below_1,iterations\n");
    for (i, r) in res.runs.iter().enumerate() {
        run.write_with(&format!("histories/quantum_history_{i}.csv"), |b| r.history.write_csv(b))?;
        let below = r.first_below_one.map(|v| v.to_string()).unwrap_or_default();
        let iters = r.history.last().map(|l| l.iter).unwrap_or(0);
        summary.push_str(&format!("{i},{},{},{},{below},{iters}\n", r.initial_w1, r.final_w1, r.min_w1));
    }
    run.write("summary.csv", summary.as_bytes())?;
    let series: Vec<Series> = res
        .runs
        .iter()
        .enumerate()
        .map(|(i, r)| Series {
            name: ["target 0", "target 1", "target 2", "target 3", "target 4", "target 5+"][i.min(5)],
            points: r.history.records.iter().map(|h| (h.iter as f64, h.w1)).collect(),
            markers: false,
        })
        .collect();
    run.write("quantum_w1.svg", line_chart("W1 against sampled targets", "iteration", "W1", &series).as_bytes())?;
    for (i, r) in res.runs.iter().enumerate() {
        println!(
            "target {i}: W1 {:.4} -> {:.4} (min {:.4}, below 1 at {:?})",
            r.initial_w1, r.final_w1, r.min_w1, r.first_below_one
        );
    }
    run.finish(cfg)
}
