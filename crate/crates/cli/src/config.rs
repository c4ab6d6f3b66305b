//! Run configurations: JSON files with command-line overrides.
//!
//! Every key has a default, so an empty object `{}` is a valid config. Unknown
//! keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::Args;
use qwgan::adam::AdamHyper;
use qwgan::ansatz::{AnsatzFamily, AnsatzSpec};
use qwgan::trainer::TrainingConfig;
use qwgan::wgan::WganConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Flags shared by all subcommands. Each command rejects the ones it does
/// not use.
#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// JSON config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output root; results go to <out>/<command>-<seed>/
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Maximum Pauli weight of the observables
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of qubits
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of mixture branches
    #[arg(long)]
    pub rank: Option<usize>,
    /// generic, phase or butterfly
    #[arg(long)]
    pub ansatz: Option<String>,
    /// Phase label; repeatable
    #[arg(long, allow_negative_numbers = true)]
    pub g: Vec<f64>,
}

/// Reads a config file over the command's defaults. Nested objects merge key
/// by key, so a partial `training` block keeps the command's other settings.
pub fn load<T: Serialize + DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(p) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
    let file: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?;
    ensure!(file.is_object(), "config {} must be a JSON object", p.display());
    let mut merged = serde_json::to_value(T::default())?;
    merge(&mut merged, file);
    serde_json::from_value(merged).with_context(|| format!("invalid config {}", p.display()))
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn reject(args: &CommonArgs, command: &str, flags: &[&str]) -> Result<()> {
    for &flag in flags {
        let set = match flag {
            "k" => args.k.is_some(),
            "n" => args.n.is_some(),
            "rank" => args.rank.is_some(),
            "ansatz" => args.ansatz.is_some(),
            "g" => !args.g.is_empty(),
            _ => false,
        };
        if set {
            bail!("--{flag} does not apply to `{command}`");
        }
    }
    Ok(())
}

fn set<T: Clone>(slot: &mut T, value: &Option<T>) {
    if let Some(v) = value {
        *slot = v.clone();
    }
}

fn family(name: &str) -> Result<AnsatzFamily> {
    name.parse().map_err(|e: qwgan::Error| anyhow::anyhow!(e))
}

fn check_g(g: f64) -> Result<()> {
    ensure!((-1.0..=1.0).contains(&g), "phase label {g} outside [-1, 1]");
    Ok(())
}

fn default_out() -> PathBuf {
    PathBuf::from("runs")
}

/// Builds an ansatz from a family name plus the fields the family needs.
pub fn ansatz_spec(name: &str, n: usize, layers: usize, g: f64) -> Result<AnsatzSpec> {
    let spec = match family(name)? {
        AnsatzFamily::Generic => AnsatzSpec::Generic { n_qubits: n, layers },
        AnsatzFamily::PhaseTransition => {
            check_g(g)?;
            AnsatzSpec::PhaseTransition { n_qubits: n, g }
        }
        AnsatzFamily::Butterfly => AnsatzSpec::Butterfly { n_qubits: n },
    };
    spec.circuit()?;
    Ok(spec)
}

/// Optimiser and stopping settings shared by the training commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSettings {
    pub max_iters: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub stop_tolerance: f64,
    pub stop_patience: usize,
    pub lipschitz_divisor: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let t = TrainingConfig::default();
        Self {
            max_iters: t.max_iters,
            learning_rate: t.learning_rate,
            beta1: t.beta1,
            beta2: t.beta2,
            epsilon: t.epsilon,
            stop_tolerance: t.stop_tolerance,
            stop_patience: t.stop_patience,
            lipschitz_divisor: t.lipschitz_divisor,
        }
    }
}

impl TrainSettings {
    pub fn with(max_iters: usize, learning_rate: f64, stop_patience: usize) -> Self {
        Self { max_iters, learning_rate, stop_patience, ..Default::default() }
    }

    pub fn training_config(&self, k: usize, rank: usize, seed: u64) -> TrainingConfig {
        TrainingConfig {
            k,
            max_iters: self.max_iters,
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            seed,
            stop_tolerance: self.stop_tolerance,
            stop_patience: self.stop_patience,
            rank,
            lipschitz_divisor: self.lipschitz_divisor,
            record_timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExpectationsConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub ansatz: String,
    pub n: usize,
    pub k: usize,
    pub layers: usize,
    pub g: f64,
    /// Circuit parameters; drawn uniformly from the seed when absent.
    pub params: Option<Vec<f64>>,
}

impl Default for ExpectationsConfig {
    fn default() -> Self {
        Self { seed: 0, out: default_out(), ansatz: "phase".into(), n: 5, k: 1, layers: 1, g: 0.0, params: None }
    }
}

impl ExpectationsConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        reject(args, "expectations", &["rank"])?;
        let mut c: Self = load(args.config.as_deref())?;
        set(&mut c.seed, &args.seed);
        set(&mut c.out, &args.out);
        set(&mut c.k, &args.k);
        set(&mut c.n, &args.n);
        set(&mut c.ansatz, &args.ansatz);
        match args.g.as_slice() {
            [] => {}
            [g] => c.g = *g,
            _ => bail!("`expectations` takes a single --g"),
        }
        c.validate()?;
        Ok(c)
    }

    pub fn spec(&self) -> Result<AnsatzSpec> {
        ansatz_spec(&self.ansatz, self.n, self.layers, self.g)
    }

    pub fn validate(&self) -> Result<()> {
        let spec = self.spec()?;
        ensure!(self.k >= 1 && self.k <= self.n, "k must be in 1..=n");
        if let Some(p) = &self.params {
            ensure!(p.len() == spec.n_params(), "{} params given, ansatz takes {}", p.len(), spec.n_params());
            ensure!(p.iter().all(|v| v.is_finite()), "non-finite circuit parameter");
        }
        Ok(())
    }
}

/// The circuit whose expectations are learned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetConfig {
    pub ansatz: String,
    pub layers: usize,
    pub g: f64,
    pub params: Option<Vec<f64>>,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self { ansatz: "generic".into(), layers: 2, g: 0.0, params: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearnConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub n: usize,
    pub k: usize,
    pub rank: usize,
    /// Generator ansatz.
    pub ansatz: String,
    pub layers: usize,
    pub target: TargetConfig,
    pub training: TrainSettings,
    pub svg: bool,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: default_out(),
            n: 3,
            k: 2,
            rank: 1,
            ansatz: "generic".into(),
            layers: 20,
            target: TargetConfig::default(),
            training: TrainSettings::with(1000, AdamHyper::default().learning_rate, 200),
            svg: true,
        }
    }
}

impl LearnConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let mut c: Self = load(args.config.as_deref())?;
        set(&mut c.seed, &args.seed);
        set(&mut c.out, &args.out);
        set(&mut c.k, &args.k);
        set(&mut c.n, &args.n);
        set(&mut c.rank, &args.rank);
        set(&mut c.ansatz, &args.ansatz);
        match args.g.as_slice() {
            [] => {}
            [g] => c.target.g = *g,
            _ => bail!("`learn` takes a single --g (the target label)"),
        }
        c.validate()?;
        Ok(c)
    }

    pub fn generator_spec(&self) -> Result<AnsatzSpec> {
        ansatz_spec(&self.ansatz, self.n, self.layers, self.target.g)
    }

    pub fn target_spec(&self) -> Result<AnsatzSpec> {
        ansatz_spec(&self.target.ansatz, self.n, self.target.layers, self.target.g)
    }

    pub fn training_config(&self) -> TrainingConfig {
        self.training.training_config(self.k, self.rank, self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        let target = self.target_spec()?;
        self.generator_spec()?;
        ensure!(self.k >= 1 && self.k <= self.n, "k must be in 1..=n");
        if let Some(p) = &self.target.params {
            ensure!(p.len() == target.n_params(), "{} target params given, ansatz takes {}", p.len(), target.n_params());
            ensure!(p.iter().all(|v| v.is_finite()), "non-finite target parameter");
        }
        self.training_config().validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseScanConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub n: usize,
    pub k: usize,
    /// Number of evenly spaced training labels.
    pub m: usize,
    /// Labels to generate states for.
    pub g: Vec<f64>,
    pub rank: usize,
    /// Generic-ansatz generator depth.
    pub layers: usize,
    pub training: TrainSettings,
    pub svg: bool,
}

impl Default for PhaseScanConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: default_out(),
            n: 5,
            k: 3,
            m: 11,
            g: vec![-0.9, -0.7, -0.5, -0.3, -0.1, 0.1, 0.3, 0.5, 0.7, 0.9],
            rank: 1,
            layers: 6,
            training: TrainSettings::with(3000, 0.005, 200),
            svg: true,
        }
    }
}

impl PhaseScanConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        reject(args, "phase-scan", &["ansatz"])?;
        let mut c: Self = load(args.config.as_deref())?;
        set(&mut c.seed, &args.seed);
        set(&mut c.out, &args.out);
        set(&mut c.k, &args.k);
        set(&mut c.n, &args.n);
        set(&mut c.rank, &args.rank);
        if !args.g.is_empty() {
            c.g = args.g.clone();
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.n >= 5, "string order parameters need n >= 5");
        ensure!(self.k >= 1 && self.k <= self.n, "k must be in 1..=n");
        ensure!(self.m >= 2, "m must be at least 2");
        ensure!(!self.g.is_empty(), "no labels to scan");
        for &g in &self.g {
            check_g(g)?;
        }
        ansatz_spec("generic", self.n, self.layers, 0.0)?;
        self.training.training_config(self.k, self.rank, self.seed).validate()?;
        Ok(())
    }
}

/// WGAN settings without the seed, which comes from the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WganSettings {
    pub latent_dim: usize,
    pub hidden: Vec<usize>,
    pub gp_lambda: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub critic_steps: usize,
    pub generator_steps: usize,
}

impl Default for WganSettings {
    fn default() -> Self {
        let w = WganConfig::default();
        Self {
            latent_dim: w.latent_dim,
            hidden: w.hidden,
            gp_lambda: w.gp_lambda,
            learning_rate: w.learning_rate,
            beta1: w.beta1,
            beta2: w.beta2,
            epsilon: w.epsilon,
            batch_size: w.batch_size,
            critic_steps: w.critic_steps,
            generator_steps: w.generator_steps,
        }
    }
}

impl WganSettings {
    pub fn config(&self, seed: u64) -> WganConfig {
        WganConfig {
            latent_dim: self.latent_dim,
            hidden: self.hidden.clone(),
            gp_lambda: self.gp_lambda,
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            batch_size: self.batch_size,
            critic_steps: self.critic_steps,
            generator_steps: self.generator_steps,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WganCommandConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub n: usize,
    pub k: usize,
    /// Circuit generating the training set and used as the quantum generator.
    pub ansatz: String,
    pub layers: usize,
    pub training_set_size: usize,
    /// Number of sampled targets trained against.
    pub targets: usize,
    pub rank: usize,
    pub wgan: WganSettings,
    pub training: TrainSettings,
}

impl Default for WganCommandConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: default_out(),
            n: 6,
            k: 4,
            ansatz: "butterfly".into(),
            layers: 2,
            training_set_size: 256,
            targets: 5,
            rank: 1,
            wgan: WganSettings::default(),
            training: TrainSettings::with(1000, 0.01, 200),
        }
    }
}

impl WganCommandConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        reject(args, "wgan", &["g"])?;
        let mut c: Self = load(args.config.as_deref())?;
        set(&mut c.seed, &args.seed);
        set(&mut c.out, &args.out);
        set(&mut c.k, &args.k);
        set(&mut c.n, &args.n);
        set(&mut c.rank, &args.rank);
        set(&mut c.ansatz, &args.ansatz);
        c.validate()?;
        Ok(c)
    }

    pub fn spec(&self) -> Result<AnsatzSpec> {
        let spec = ansatz_spec(&self.ansatz, self.n, self.layers, 0.0)?;
        ensure!(spec.n_params() > 0, "the `{}` ansatz has no trainable parameters", self.ansatz);
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        ensure!(self.k >= 1 && self.k <= self.n, "k must be in 1..=n");
        ensure!(
            self.training_set_size >= self.wgan.batch_size,
            "training_set_size {} is smaller than the batch size {}",
            self.training_set_size,
            self.wgan.batch_size
        );
        self.wgan.config(self.seed).validate()?;
        self.training.training_config(self.k, self.rank, self.seed).validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StringOrderConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub n: usize,
    pub g: Vec<f64>,
    /// Learn checkpoint whose generator is measured as well.
    pub checkpoint: Option<PathBuf>,
    pub svg: bool,
}

impl Default for StringOrderConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: default_out(),
            n: 7,
            g: (0..=20).map(|i| (i as f64 - 10.0) / 10.0).collect(),
            checkpoint: None,
            svg: true,
        }
    }
}

impl StringOrderConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        reject(args, "string-order", &["k", "rank", "ansatz"])?;
        let mut c: Self = load(args.config.as_deref())?;
        set(&mut c.seed, &args.seed);
        set(&mut c.out, &args.out);
        set(&mut c.n, &args.n);
        if !args.g.is_empty() {
            c.g = args.g.clone();
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.n >= 5, "string order parameters need n >= 5");
        ensure!(!self.g.is_empty(), "no labels given");
        for &g in &self.g {
            check_g(g)?;
        }
        if let Some(p) = &self.checkpoint {
            ensure!(p.is_file(), "checkpoint {} not found", p.display());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, text: &str) -> PathBuf {
        let p = dir.join("cfg.json");
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn defaults_are_valid() {
        ExpectationsConfig::default().validate().unwrap();
        LearnConfig::default().validate().unwrap();
        PhaseScanConfig::default().validate().unwrap();
        WganCommandConfig::default().validate().unwrap();
        StringOrderConfig::default().validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let args = CommonArgs { config: Some(write(dir.path(), r#"{"n": 3, "colour": 1}"#)), ..Default::default() };
        assert!(LearnConfig::resolve(&args).is_err());
        let args = CommonArgs { config: Some(write(dir.path(), r#"{"training": {"lr": 1}}"#)), ..Default::default() };
        assert!(LearnConfig::resolve(&args).is_err());
    }

    #[test]
    fn partial_blocks_keep_command_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let args = CommonArgs { config: Some(write(dir.path(), r#"{"training": {"max_iters": 7}}"#)), ..Default::default() };
        let c = PhaseScanConfig::resolve(&args).unwrap();
        assert_eq!(c.training, TrainSettings { max_iters: 7, ..PhaseScanConfig::default().training });
        let args = CommonArgs { config: Some(write(dir.path(), "[1]")), ..Default::default() };
        assert!(PhaseScanConfig::resolve(&args).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let args = CommonArgs {
            config: Some(write(dir.path(), r#"{"n": 4, "k": 1, "seed": 3}"#)),
            seed: Some(9),
            k: Some(2),
            ..Default::default()
        };
        let c = LearnConfig::resolve(&args).unwrap();
        assert_eq!((c.n, c.k, c.seed), (4, 2, 9));
    }

    #[test]
    fn inapplicable_flags_and_bad_values() {
        let args = CommonArgs { rank: Some(2), ..Default::default() };
        assert!(ExpectationsConfig::resolve(&args).is_err());
        let args = CommonArgs { g: vec![0.1, 0.2], ..Default::default() };
        assert!(ExpectationsConfig::resolve(&args).is_err());
        let args = CommonArgs { g: vec![1.5], ..Default::default() };
        assert!(PhaseScanConfig::resolve(&args).is_err());
        let args = CommonArgs { ansatz: Some("ring".into()), ..Default::default() };
        assert!(LearnConfig::resolve(&args).is_err());
        let args = CommonArgs { k: Some(7), ..Default::default() };
        assert!(WganCommandConfig::resolve(&args).is_err());
    }
}
