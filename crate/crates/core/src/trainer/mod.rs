//! The adversarial training loop.
//!
//! Each iteration evaluates the generator's expectation vector, solves the
//! discriminator LP against the fixed target vector, and takes one Adam step
//! on the branch parameters and mixture logits that lowers
//! `L = Σ wᵢ (targetᵢ − ⟨Hᵢ⟩_G)`.

mod generator;

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adam::{AdamHyper, AdamState};
use crate::ansatz::{AnsatzFamily, AnsatzSpec};
use crate::discriminator::estimate_w1_scaled;
use crate::error::{invalid, Error, Result};
use crate::observables::{ExpectationVector, ObservableSet};
use crate::sim::{fidelity_pure_vs_mixture, StateVector};

pub use generator::{loss_and_grads, softmax, GeneratorGradients, MixtureGenerator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    /// Maximum Pauli weight of the discriminator's observables.
    pub k: usize,
    pub max_iters: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Stop once `w1 < stop_tolerance`, or once the best `w1` has not improved
    /// by at least `stop_tolerance` for `stop_patience` iterations.
    pub stop_tolerance: f64,
    pub stop_patience: usize,
    pub rank: usize,
    /// 1 or 2; see [`crate::discriminator::estimate_w1_scaled`].
    pub lipschitz_divisor: f64,
    /// Fill the `wall_ms` history column. Off by default because timings make
    /// otherwise identical runs differ.
    pub record_timing: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        let adam = AdamHyper::default();
        Self {
            k: 2,
            max_iters: 1000,
            learning_rate: adam.learning_rate,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
            seed: 0,
            stop_tolerance: 1e-4,
            stop_patience: 50,
            rank: 1,
            lipschitz_divisor: 1.0,
            record_timing: false,
        }
    }
}

impl TrainingConfig {
    pub fn adam(&self) -> AdamHyper {
        AdamHyper { learning_rate: self.learning_rate, beta1: self.beta1, beta2: self.beta2, epsilon: self.epsilon }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        if self.k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        if self.rank == 0 {
            return Err(invalid("rank must be at least 1"));
        }
        if !(self.stop_tolerance >= 0.0) {
            return Err(invalid("stop_tolerance must be non-negative"));
        }
        if self.stop_patience == 0 {
            return Err(invalid("stop_patience must be at least 1"));
        }
        if self.lipschitz_divisor != 1.0 && self.lipschitz_divisor != 2.0 {
            return Err(invalid("lipschitz_divisor must be 1 or 2"));
        }
        self.adam().validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRecord {
    pub iter: usize,
    pub w1: f64,
    pub fidelity: Option<f64>,
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    Plateau,
    MaxIters,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingHistory {
    pub records: Vec<HistoryRecord>,
}

impl TrainingHistory {
    pub fn last(&self) -> Option<&HistoryRecord> {
        self.records.last()
    }

    pub fn final_w1(&self) -> Option<f64> {
        self.last().map(|r| r.w1)
    }

    pub fn final_fidelity(&self) -> Option<f64> {
        self.last().and_then(|r| r.fidelity)
    }

    /// `iter,w1,fidelity,wall_ms`; absent values are left empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iter,w1,fidelity,wall_ms")?;
        for r in &self.records {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{}", r.iter, r.w1, opt(r.fidelity), opt(r.wall_ms))?;
        }
        Ok(())
    }
}

/// Resumable training state.
#[derive(Debug, Clone)]
pub struct Trainer<'a> {
    set: &'a ObservableSet,
    target: &'a ExpectationVector,
    reference: Option<&'a StateVector>,
    cfg: TrainingConfig,
    gen: MixtureGenerator,
    theta_opt: Vec<AdamState>,
    logit_opt: AdamState,
    iteration: usize,
    best_w1: Option<f64>,
    last_improvement: usize,
    history: TrainingHistory,
    stopped: Option<StopReason>,
}

impl<'a> Trainer<'a> {
    /// `reference`, when known, is the exact target state used for the
    /// fidelity column.
    pub fn new(
        set: &'a ObservableSet,
        target: &'a ExpectationVector,
        reference: Option<&'a StateVector>,
        cfg: TrainingConfig,
        gen: MixtureGenerator,
    ) -> Result<Self> {
        cfg.validate()?;
        if set.max_weight() != cfg.k {
            return Err(invalid(format!("observable set has k={}, config k={}", set.max_weight(), cfg.k)));
        }
        target.check_set(set)?;
        if gen.n_qubits() != set.n_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "generator on {} qubits, targets on {}",
                gen.n_qubits(),
                set.n_qubits()
            )));
        }
        if let Some(r) = reference {
            if r.n_qubits() != set.n_qubits() {
                return Err(Error::DimensionMismatch("reference state qubit count".into()));
            }
        }
        let n_params = gen.circuit().n_params();
        let theta_opt = (0..gen.rank()).map(|_| AdamState::new(n_params)).collect();
        let logit_opt = AdamState::new(gen.rank());
        Ok(Self {
            set,
            target,
            reference,
            cfg,
            gen,
            theta_opt,
            logit_opt,
            iteration: 0,
            best_w1: None,
            last_improvement: 0,
            history: TrainingHistory::default(),
            stopped: None,
        })
    }

    /// Restores optimiser and stopping state from a checkpoint.
    pub fn resume(
        set: &'a ObservableSet,
        target: &'a ExpectationVector,
        reference: Option<&'a StateVector>,
        cfg: TrainingConfig,
        ckpt: &Checkpoint,
    ) -> Result<Self> {
        if ckpt.k != cfg.k || ckpt.seed != cfg.seed || ckpt.rank != cfg.rank {
            return Err(invalid("checkpoint does not match the training configuration (k, seed, rank)"));
        }
        let mut t = Self::new(set, target, reference, cfg, ckpt.generator()?)?;
        if ckpt.theta_adam.len() != t.gen.rank()
            || ckpt.theta_adam.iter().any(|s| s.m.len() != t.gen.circuit().n_params())
            || ckpt.logit_adam.m.len() != t.gen.rank()
        {
            return Err(invalid("checkpoint optimiser state has the wrong shape"));
        }
        t.theta_opt = ckpt.theta_adam.clone();
        t.logit_opt = ckpt.logit_adam.clone();
        t.iteration = ckpt.iteration;
        t.best_w1 = ckpt.best_w1;
        t.last_improvement = ckpt.last_improvement;
        Ok(t)
    }

    pub fn generator(&self) -> &MixtureGenerator {
        &self.gen
    }

    pub fn history(&self) -> &TrainingHistory {
        &self.history
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn stopped(&self) -> Option<StopReason> {
        self.stopped
    }

    /// Runs until a stopping rule fires. The record at `iter = max_iters`
    /// only evaluates the final generator.
    pub fn run(&mut self) -> Result<StopReason> {
        let start = Instant::now();
        while self.stopped.is_none() {
            self.step(&start)?;
        }
        Ok(self.stopped.unwrap())
    }

    fn step(&mut self, start: &Instant) -> Result<()> {
        let mix = self.gen.state()?;
        let generated = self.set.expectation_vector(&mix)?;
        let witness = estimate_w1_scaled(self.target, &generated, self.set, self.cfg.lipschitz_divisor)?;
        let fidelity = self.reference.map(|r| fidelity_pure_vs_mixture(r, &mix)).transpose()?;
        let wall_ms = self.cfg.record_timing.then(|| start.elapsed().as_secs_f64() * 1e3);
        let iter = self.iteration;
        self.history.records.push(HistoryRecord { iter, w1: witness.value, fidelity, wall_ms });

        if witness.value < self.cfg.stop_tolerance {
            self.stopped = Some(StopReason::Converged);
            return Ok(());
        }
        match self.best_w1 {
            Some(best) if witness.value > best - self.cfg.stop_tolerance => {
                if iter - self.last_improvement >= self.cfg.stop_patience {
                    self.stopped = Some(StopReason::Plateau);
                    return Ok(());
                }
            }
            _ => {
                self.best_w1 = Some(witness.value);
                self.last_improvement = iter;
            }
        }
        if iter >= self.cfg.max_iters {
            self.stopped = Some(StopReason::MaxIters);
            return Ok(());
        }

        let grads = loss_and_grads(&self.gen, &witness, self.target, self.set)?;
        let hyper = self.cfg.adam();
        let (thetas, logits) = self.gen.params_mut();
        for ((theta, opt), g) in thetas.iter_mut().zip(&mut self.theta_opt).zip(&grads.d_thetas) {
            opt.step(&hyper, theta, g);
        }
        // A single branch has a fixed probability of 1.
        if logits.len() > 1 {
            self.logit_opt.step(&hyper, logits, &grads.d_logits);
        }
        self.iteration += 1;
        Ok(())
    }

    /// Snapshot of everything needed to continue bit-identically.
    pub fn checkpoint(&self) -> Result<Checkpoint> {
        let ansatz = self
            .gen
            .ansatz()
            .ok_or_else(|| invalid("only ansatz-based generators can be checkpointed"))?;
        let (g, layers) = match *ansatz {
            AnsatzSpec::PhaseTransition { g, .. } => (Some(g), None),
            AnsatzSpec::Generic { layers, .. } => (None, Some(layers)),
            AnsatzSpec::Butterfly { .. } => (None, None),
        };
        Ok(Checkpoint {
            ansatz: ansatz.family().name().to_string(),
            n: ansatz.n_qubits(),
            layers,
            g,
            rank: self.gen.rank(),
            thetas: self.gen.thetas().to_vec(),
            logits: self.gen.logits().to_vec(),
            seed: self.cfg.seed,
            iteration: self.iteration,
            k: self.cfg.k,
            theta_adam: self.theta_opt.clone(),
            logit_adam: self.logit_opt.clone(),
            best_w1: self.best_w1,
            last_improvement: self.last_improvement,
        })
    }

    pub fn into_parts(self) -> (MixtureGenerator, TrainingHistory) {
        (self.gen, self.history)
    }
}

/// Trains `gen0` toward `target` and returns the final generator and history.
pub fn train(
    target: &ExpectationVector,
    cfg: &TrainingConfig,
    gen0: MixtureGenerator,
    set: &ObservableSet,
    reference: Option<&StateVector>,
) -> Result<(MixtureGenerator, TrainingHistory)> {
    let mut t = Trainer::new(set, target, reference, cfg.clone(), gen0)?;
    t.run()?;
    Ok(t.into_parts())
}

/// JSON checkpoint of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub ansatz: String,
    pub n: usize,
    pub layers: Option<usize>,
    pub g: Option<f64>,
    pub rank: usize,
    pub thetas: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
    pub seed: u64,
    pub iteration: usize,
    pub k: usize,
    pub theta_adam: Vec<AdamState>,
    pub logit_adam: AdamState,
    pub best_w1: Option<f64>,
    pub last_improvement: usize,
}

impl Checkpoint {
    pub fn ansatz_spec(&self) -> Result<AnsatzSpec> {
        let family: AnsatzFamily = self.ansatz.parse()?;
        Ok(match family {
            AnsatzFamily::Generic => AnsatzSpec::Generic {
                n_qubits: self.n,
                layers: self.layers.ok_or_else(|| invalid("generic checkpoint without layers"))?,
            },
            AnsatzFamily::PhaseTransition => AnsatzSpec::PhaseTransition {
                n_qubits: self.n,
                g: self.g.ok_or_else(|| invalid("phase checkpoint without g"))?,
            },
            AnsatzFamily::Butterfly => AnsatzSpec::Butterfly { n_qubits: self.n },
        })
    }

    pub fn generator(&self) -> Result<MixtureGenerator> {
        if self.thetas.len() != self.rank {
            return Err(invalid("checkpoint rank disagrees with stored parameters"));
        }
        MixtureGenerator::new(self.ansatz_spec()?, self.thetas.clone(), self.logits.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
