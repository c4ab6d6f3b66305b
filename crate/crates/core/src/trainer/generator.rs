use rand::Rng;

use crate::ansatz::{random_angles, AnsatzSpec};
use crate::discriminator::DualWitness;
use crate::error::{invalid, Error, Result};
use crate::observables::{ExpectationVector, ObservableSet};
use crate::sim::{expectation_and_gradient, Circuit, MixtureState};

/// `G(θ) = Σᵢ pᵢ Ḡ(θᵢ)|0⟩⟨0|Ḡ(θᵢ)†` with `p = softmax(logits)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureGenerator {
    ansatz: Option<AnsatzSpec>,
    circuit: Circuit,
    thetas: Vec<Vec<f64>>,
    logits: Vec<f64>,
}

impl MixtureGenerator {
    pub fn new(ansatz: AnsatzSpec, thetas: Vec<Vec<f64>>, logits: Vec<f64>) -> Result<Self> {
        let mut g = Self::with_circuit(ansatz.circuit()?, thetas, logits)?;
        g.ansatz = Some(ansatz);
        Ok(g)
    }

    /// A generator over an arbitrary parametrised circuit.
    pub fn with_circuit(circuit: Circuit, thetas: Vec<Vec<f64>>, logits: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(invalid("generator rank must be at least 1"));
        }
        if logits.len() != thetas.len() {
            return Err(Error::DimensionMismatch(format!("{} logits for rank {}", logits.len(), thetas.len())));
        }
        for t in &thetas {
            if t.len() != circuit.n_params() {
                return Err(Error::ParamLength { expected: circuit.n_params(), got: t.len() });
            }
        }
        if thetas.iter().flatten().chain(&logits).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite generator parameter".into()));
        }
        Ok(Self { ansatz: None, circuit, thetas, logits })
    }

    /// Parameters uniform on `[−π, π)`, logits zero.
    pub fn random<R: Rng + ?Sized>(ansatz: AnsatzSpec, rank: usize, rng: &mut R) -> Result<Self> {
        let thetas = random_thetas(ansatz.n_params(), rank, rng);
        Self::new(ansatz, thetas, vec![0.0; rank])
    }

    pub fn random_with_circuit<R: Rng + ?Sized>(circuit: Circuit, rank: usize, rng: &mut R) -> Result<Self> {
        let thetas = random_thetas(circuit.n_params(), rank, rng);
        Self::with_circuit(circuit, thetas, vec![0.0; rank])
    }

    /// `None` for generators built from a bare circuit.
    pub fn ansatz(&self) -> Option<&AnsatzSpec> {
        self.ansatz.as_ref()
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn rank(&self) -> usize {
        self.thetas.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits()
    }

    pub fn thetas(&self) -> &[Vec<f64>] {
        &self.thetas
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [Vec<f64>], &mut [f64]) {
        (&mut self.thetas, &mut self.logits)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        softmax(&self.logits)
    }

    pub fn state(&self) -> Result<MixtureState> {
        let probs = self.probabilities();
        let branches = self
            .thetas
            .iter()
            .zip(probs)
            .map(|(t, p)| Ok((p, self.circuit.run_from_zero(t)?)))
            .collect::<Result<Vec<_>>>()?;
        MixtureState::new(branches)
    }
}

fn random_thetas<R: Rng + ?Sized>(n_params: usize, rank: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..rank).map(|_| random_angles(n_params, rng)).collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Loss `L = Σ wᵢ (targetᵢ − ⟨Hᵢ⟩_G)` and its gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorGradients {
    pub loss: f64,
    pub d_thetas: Vec<Vec<f64>>,
    pub d_logits: Vec<f64>,
    /// `⟨Ĥ⟩` of each branch.
    pub branch_values: Vec<f64>,
}

pub fn loss_and_grads(
    gen: &MixtureGenerator,
    witness: &DualWitness,
    target: &ExpectationVector,
    set: &ObservableSet,
) -> Result<GeneratorGradients> {
    target.check_set(set)?;
    if set.n_qubits() != gen.n_qubits() {
        return Err(Error::DimensionMismatch("generator and observable set disagree on qubit count".into()));
    }
    let h = witness.hamiltonian(set)?;
    let probs = gen.probabilities();
    let mut branch_values = Vec::with_capacity(gen.rank());
    let mut d_thetas = Vec::with_capacity(gen.rank());
    for (theta, p) in gen.thetas.iter().zip(&probs) {
        let (value, grad) = expectation_and_gradient(&gen.circuit, theta, &h)?;
        branch_values.push(value);
        d_thetas.push(grad.into_iter().map(|g| -p * g).collect());
    }
    let mean: f64 = probs.iter().zip(&branch_values).map(|(p, e)| p * e).sum();
    let d_logits = probs.iter().zip(&branch_values).map(|(p, e)| -p * (e - mean)).collect();
    let target_term: f64 = witness.weights.iter().map(|(&i, &w)| w * target.values()[i]).sum();
    Ok(GeneratorGradients { loss: target_term - mean, d_thetas, d_logits, branch_values })
}
