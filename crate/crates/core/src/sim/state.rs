use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::pauli::PauliString;

/// Normalisation tolerance applied when accepting external amplitudes.
const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(invalid(format!("basis index {index} outside 0..{dim}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps amplitudes that are already normalised (within 1e-10).
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amps.len() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for {n_qubits} qubits",
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Numerical(format!("state norm² {norm} is not 1")));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(n_qubits: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Numerical("cannot normalise a zero state".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(n_qubits, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same(other.n_qubits)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn pauli_expectation(&self, p: &PauliString) -> Result<f64> {
        self.check_same(p.n_qubits())?;
        Ok(p.expectation(&self.amps))
    }

    pub(crate) fn check_same(&self, n: usize) -> Result<()> {
        if n != self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "operand on {n} qubits, state on {}",
                self.n_qubits
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_qubits(n_qubits: usize) -> Result<()> {
    // 2^30 amplitudes is already 16 GiB; anything beyond is a config error.
    if n_qubits == 0 || n_qubits > 30 {
        return Err(invalid(format!("unsupported qubit count {n_qubits}")));
    }
    Ok(())
}

/// A probabilistic ensemble of pure states, `Σ pᵢ |ψᵢ⟩⟨ψᵢ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureState {
    branches: Vec<(f64, StateVector)>,
}

impl MixtureState {
    pub fn new(branches: Vec<(f64, StateVector)>) -> Result<Self> {
        let first = branches.first().ok_or_else(|| invalid("empty mixture"))?;
        let n = first.1.n_qubits();
        let mut total = 0.0;
        for (p, s) in &branches {
            if !(*p >= 0.0) {
                return Err(invalid(format!("negative or NaN probability {p}")));
            }
            s.check_same(n)?;
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("probabilities sum to {total}")));
        }
        Ok(Self { branches })
    }

    pub fn pure(state: StateVector) -> Self {
        Self { branches: vec![(1.0, state)] }
    }

    pub fn branches(&self) -> &[(f64, StateVector)] {
        &self.branches
    }

    pub fn n_qubits(&self) -> usize {
        self.branches[0].1.n_qubits()
    }

    pub fn mixture_expectation(&self, p: &PauliString) -> Result<f64> {
        let mut acc = 0.0;
        for (prob, s) in &self.branches {
            acc += prob * s.pauli_expectation(p)?;
        }
        Ok(acc)
    }
}

/// Anything Pauli expectations can be read from.
pub trait ExpectationSource {
    fn n_qubits(&self) -> usize;
    fn expectation(&self, p: &PauliString) -> Result<f64>;
}

impl ExpectationSource for StateVector {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn expectation(&self, p: &PauliString) -> Result<f64> {
        self.pauli_expectation(p)
    }
}

impl ExpectationSource for MixtureState {
    fn n_qubits(&self) -> usize {
        MixtureState::n_qubits(self)
    }

    fn expectation(&self, p: &PauliString) -> Result<f64> {
        self.mixture_expectation(p)
    }
}

/// `Σᵢ pᵢ |⟨target|ψᵢ⟩|²`.
pub fn fidelity_pure_vs_mixture(target: &StateVector, mix: &MixtureState) -> Result<f64> {
    let mut f = 0.0;
    for (p, s) in mix.branches() {
        f += p * target.inner(s)?.norm_sqr();
    }
    Ok(f.clamp(0.0, 1.0))
}
