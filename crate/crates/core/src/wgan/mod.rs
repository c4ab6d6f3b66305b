//! WGAN-GP over expectation vectors.
//!
//! The generator maps a standard-normal latent vector to a vector in
//! `(−1, 1)^{|H|}`; the critic scores such vectors. The gradient penalty is
//! differentiated exactly by a second backward pass through the critic's
//! input-gradient computation, which is piecewise linear in the input.

mod mlp;

use std::io::Write;

use ndarray::{Array1, Array2, Axis, Zip};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::adam::{AdamHyper, AdamState};
use crate::error::{invalid, Error, Result};
use crate::observables::{ExpectationVector, ObservableSet};
use crate::rng::{self, stream};

pub use mlp::{ForwardCache, Mlp, MlpFile, MlpGrads, OutputActivation, LEAKY_SLOPE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WganConfig {
    pub latent_dim: usize,
    pub hidden: Vec<usize>,
    pub gp_lambda: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    /// Critic updates per generator update.
    pub critic_steps: usize,
    pub generator_steps: usize,
    pub seed: u64,
}

impl Default for WganConfig {
    fn default() -> Self {
        let adam = AdamHyper::default();
        Self {
            latent_dim: 16,
            hidden: vec![64, 128],
            gp_lambda: 10.0,
            learning_rate: adam.learning_rate,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
            batch_size: 64,
            critic_steps: 5,
            generator_steps: 3000,
            seed: 0,
        }
    }
}

impl WganConfig {
    pub fn adam(&self) -> AdamHyper {
        AdamHyper { learning_rate: self.learning_rate, beta1: self.beta1, beta2: self.beta2, epsilon: self.epsilon }
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 || self.hidden.contains(&0) {
            return Err(invalid("layer widths must be positive"));
        }
        if !(self.gp_lambda >= 0.0) || !self.gp_lambda.is_finite() {
            return Err(invalid("gp_lambda must be a non-negative number"));
        }
        if self.batch_size == 0 || self.critic_steps == 0 {
            return Err(invalid("batch_size and critic_steps must be at least 1"));
        }
        self.adam().validate()
    }

    fn sizes(&self, first: usize, last: usize) -> Vec<usize> {
        let mut s = vec![first];
        s.extend(&self.hidden);
        s.push(last);
        s
    }
}

fn check_critic(critic: &Mlp, width: usize) -> Result<()> {
    if critic.output_dim() != 1 {
        return Err(Error::DimensionMismatch(format!("critic has {} outputs, expected 1", critic.output_dim())));
    }
    if critic.input_dim() != width {
        return Err(Error::DimensionMismatch(format!("batch width {width} for critic input {}", critic.input_dim())));
    }
    Ok(())
}

/// `λ · mean_b (‖∇ₓD(x̂_b)‖₂ − 1)²` with `x̂_b = ε_b real_b + (1 − ε_b) fake_b`,
/// and its gradient with respect to the critic parameters.
pub fn gradient_penalty_with(
    critic: &Mlp,
    real: &Array2<f64>,
    fake: &Array2<f64>,
    eps: &[f64],
    lambda: f64,
) -> Result<(f64, MlpGrads)> {
    if real.dim() != fake.dim() || eps.len() != real.nrows() || real.nrows() == 0 {
        return Err(Error::DimensionMismatch("real, fake and interpolation weights disagree".into()));
    }
    check_critic(critic, real.ncols())?;
    let batch = real.nrows() as f64;
    let mut mixed = fake.clone();
    Zip::from(mixed.rows_mut()).and(real.rows()).and(eps).for_each(|mut m, r, &e| {
        m.zip_mut_with(&r, |f, &x| *f = e * x + (1.0 - e) * *f);
    });
    let cache = critic.forward_cached(mixed.view())?;
    let weights = critic.weights();
    let n_layers = weights.len();

    // Input gradient: δ_{L−1} = 1, uₗ = δₗ Wₗ, δ_{l−1} = uₗ ⊙ s_{l−1}.
    let mut deltas = vec![Array2::zeros((0, 0)); n_layers];
    deltas[n_layers - 1] = Array2::ones((real.nrows(), 1));
    for l in (1..n_layers).rev() {
        deltas[l - 1] = deltas[l].dot(&weights[l]) * cache.slopes(l - 1);
    }
    let u0 = deltas[0].dot(&weights[0]);
    let norms: Array1<f64> = u0.map_axis(Axis(1), |r| r.dot(&r).sqrt());
    let penalty = lambda * norms.iter().map(|n| (n - 1.0).powi(2)).sum::<f64>() / batch;

    // Adjoint of the input-gradient pass.
    let scale = norms.mapv(|n| if n > 0.0 { 2.0 * lambda * (n - 1.0) / (n * batch) } else { 0.0 });
    let mut u_bar = u0 * &scale.insert_axis(Axis(1));
    let mut grads = MlpGrads::zeros_like(critic);
    for l in 0..n_layers {
        grads.weights[l] = deltas[l].t().dot(&u_bar);
        if l + 1 < n_layers {
            u_bar = u_bar.dot(&weights[l].t()) * cache.slopes(l);
        }
    }
    Ok((penalty, grads))
}

/// As [`gradient_penalty_with`], drawing `ε ~ U[0, 1)` per row from `rng`.
pub fn gradient_penalty<R: Rng + ?Sized>(
    critic: &Mlp,
    real: &Array2<f64>,
    fake: &Array2<f64>,
    lambda: f64,
    rng: &mut R,
) -> Result<(f64, MlpGrads)> {
    let eps: Vec<f64> = (0..real.nrows()).map(|_| rng.random::<f64>()).collect();
    gradient_penalty_with(critic, real, fake, &eps, lambda)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticLoss {
    /// `mean D(real) − mean D(fake)`.
    pub wasserstein: f64,
    pub penalty: f64,
    /// `−wasserstein + penalty`, the minimised quantity.
    pub total: f64,
}

pub fn critic_loss_and_grads(
    critic: &Mlp,
    real: &Array2<f64>,
    fake: &Array2<f64>,
    eps: &[f64],
    lambda: f64,
) -> Result<(CriticLoss, MlpGrads)> {
    let (penalty, mut grads) = gradient_penalty_with(critic, real, fake, eps, lambda)?;
    let batch = real.nrows() as f64;
    let real_cache = critic.forward_cached(real.view())?;
    let fake_cache = critic.forward_cached(fake.view())?;
    let wasserstein = real_cache.output.mean().unwrap_or(0.0) - fake_cache.output.mean().unwrap_or(0.0);
    let (g_real, _) = critic.backward(&real_cache, &Array2::from_elem((real.nrows(), 1), -1.0 / batch));
    let (g_fake, _) = critic.backward(&fake_cache, &Array2::from_elem((fake.nrows(), 1), 1.0 / batch));
    grads.add_assign(&g_real);
    grads.add_assign(&g_fake);
    Ok((CriticLoss { wasserstein, penalty, total: penalty - wasserstein }, grads))
}

/// `−mean D(G(z))` and its gradient with respect to the generator.
pub fn generator_loss_and_grads(generator: &Mlp, critic: &Mlp, z: &Array2<f64>) -> Result<(f64, MlpGrads)> {
    let g_cache = generator.forward_cached(z.view())?;
    check_critic(critic, g_cache.output.ncols())?;
    let d_cache = critic.forward_cached(g_cache.output.view())?;
    let batch = z.nrows() as f64;
    let loss = -d_cache.output.mean().unwrap_or(0.0);
    let (_, d_input) = critic.backward(&d_cache, &Array2::from_elem((z.nrows(), 1), -1.0 / batch));
    let (grads, _) = generator.backward(&g_cache, &d_input);
    Ok((loss, grads))
}

/// One Adam state per weight matrix and bias vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpOptimizer {
    weights: Vec<AdamState>,
    biases: Vec<AdamState>,
}

impl MlpOptimizer {
    pub fn new(net: &Mlp) -> Self {
        Self {
            weights: net.weights().iter().map(|w| AdamState::new(w.len())).collect(),
            biases: net.biases().iter().map(|b| AdamState::new(b.len())).collect(),
        }
    }

    pub fn step(&mut self, hyper: &AdamHyper, net: &mut Mlp, grads: &MlpGrads) {
        let (ws, bs) = net.params_mut();
        for ((w, g), s) in ws.iter_mut().zip(&grads.weights).zip(&mut self.weights) {
            let (w, g) = (w.as_slice_mut().expect("standard layout"), g.as_slice().expect("standard layout"));
            s.step(hyper, w, g);
        }
        for ((b, g), s) in bs.iter_mut().zip(&grads.biases).zip(&mut self.biases) {
            let (b, g) = (b.as_slice_mut().expect("standard layout"), g.as_slice().expect("standard layout"));
            s.step(hyper, b, g);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WganRecord {
    pub step: usize,
    /// Critic loss of the last critic update before this generator update.
    pub critic: CriticLoss,
    pub generator_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WganOutcome {
    pub generator: Mlp,
    pub critic: Mlp,
    pub history: Vec<WganRecord>,
}

impl WganOutcome {
    /// `step,critic_loss,wasserstein,penalty,generator_loss`.
    pub fn write_history_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "step,critic_loss,wasserstein,penalty,generator_loss")?;
        for r in &self.history {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.step, r.critic.total, r.critic.wasserstein, r.critic.penalty, r.generator_loss
            )?;
        }
        Ok(())
    }
}

fn latent_batch<R: Rng + ?Sized>(rows: usize, dim: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, dim), || rng.sample(StandardNormal))
}

/// Stacks vectors of equal width into a row-major matrix.
pub fn stack_samples(samples: &[ExpectationVector]) -> Result<Array2<f64>> {
    let width = samples.first().map(|s| s.len()).ok_or_else(|| invalid("no training samples"))?;
    if samples.iter().any(|s| s.set_id() != samples[0].set_id()) {
        return Err(Error::DimensionMismatch("training samples use different observable sets".into()));
    }
    let flat: Vec<f64> = samples.iter().flat_map(|s| s.values().iter().copied()).collect();
    Array2::from_shape_vec((samples.len(), width), flat).map_err(|e| Error::Internal(e.to_string()))
}

/// Standard WGAN-GP alternation with Adam on both networks.
pub fn train_wgan(samples: &[ExpectationVector], cfg: &WganConfig) -> Result<WganOutcome> {
    cfg.validate()?;
    if samples.len() < cfg.batch_size {
        return Err(invalid(format!("{} samples for batch size {}", samples.len(), cfg.batch_size)));
    }
    let data = stack_samples(samples)?;
    let width = data.ncols();
    let mut init = rng::seeded(cfg.seed, stream::WGAN_INIT);
    let mut generator = Mlp::random(&cfg.sizes(cfg.latent_dim, width), OutputActivation::Tanh, &mut init)?;
    let mut critic = Mlp::random(&cfg.sizes(width, 1), OutputActivation::Identity, &mut init)?;
    let mut g_opt = MlpOptimizer::new(&generator);
    let mut c_opt = MlpOptimizer::new(&critic);
    let hyper = cfg.adam();
    let mut rng = rng::seeded(cfg.seed, stream::WGAN_TRAIN);
    let b = cfg.batch_size;
    let mut history = Vec::with_capacity(cfg.generator_steps);

    for step in 0..cfg.generator_steps {
        let mut last = None;
        for _ in 0..cfg.critic_steps {
            let idx: Vec<usize> = (0..b).map(|_| rng.random_range(0..data.nrows())).collect();
            let real = data.select(Axis(0), &idx);
            let fake = generator.forward_batch(latent_batch(b, cfg.latent_dim, &mut rng).view())?;
            let eps: Vec<f64> = (0..b).map(|_| rng.random::<f64>()).collect();
            let (loss, grads) = critic_loss_and_grads(&critic, &real, &fake, &eps, cfg.gp_lambda)?;
            c_opt.step(&hyper, &mut critic, &grads);
            last = Some(loss);
        }
        let z = latent_batch(b, cfg.latent_dim, &mut rng);
        let (generator_loss, grads) = generator_loss_and_grads(&generator, &critic, &z)?;
        g_opt.step(&hyper, &mut generator, &grads);
        let critic_loss = last.expect("critic_steps >= 1");
        if !critic_loss.total.is_finite() || !generator_loss.is_finite() {
            return Err(Error::Numerical(format!("WGAN training diverged at step {step}")));
        }
        history.push(WganRecord { step, critic: critic_loss, generator_loss });
    }
    Ok(WganOutcome { generator, critic, history })
}

/// Draws `count` generator outputs as expectation vectors over `set`.
pub fn sample_targets<R: Rng + ?Sized>(
    generator: &Mlp,
    set: &ObservableSet,
    count: usize,
    rng: &mut R,
) -> Result<Vec<ExpectationVector>> {
    if generator.output_dim() != set.len() {
        return Err(Error::DimensionMismatch(format!(
            "generator emits {} values for {} observables",
            generator.output_dim(),
            set.len()
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let out = generator.forward_batch(latent_batch(count, generator.input_dim(), rng).view())?;
    out.rows().into_iter().map(|r| ExpectationVector::new(set, r.to_vec())).collect()
}
