//! Reverse-sweep (adjoint) differentiation of `⟨ψ(θ)|H|ψ(θ)⟩`.
//!
//! One forward run, then a single backward pass that un-applies each gate to
//! both the state and `H|ψ⟩`. Every rotation contributes
//! `2 Re⟨λ| G |ψⱼ⟩` where `dU/dθ = G U`. Parameters shared between gates
//! accumulate.

use super::circuit::{apply_generator, apply_inverse_kernel, Angle, Circuit};
use crate::error::{Error, Result};
use crate::pauli::PauliSum;

/// Value and gradient of `⟨0|U(θ)† H U(θ)|0⟩`.
pub fn expectation_and_gradient(circuit: &Circuit, params: &[f64], observable: &PauliSum) -> Result<(f64, Vec<f64>)> {
    let n = circuit.n_qubits();
    for (w, p) in &observable.terms {
        if !w.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite observable weight {w}")));
        }
        if p.n_qubits() != n {
            return Err(Error::DimensionMismatch(format!("observable on {} qubits, circuit on {n}", p.n_qubits())));
        }
    }
    let angles = circuit.angles(params)?;
    let state = circuit.run_from_zero(params)?;
    let mut grad = vec![0.0; circuit.n_params()];
    if observable.is_empty() {
        return Ok((0.0, grad));
    }

    let mut phi = state.into_amplitudes();
    let mut lambda = observable.apply(&phi);
    let value: f64 = phi.iter().zip(&lambda).map(|(a, b)| (a.conj() * b).re).sum();

    let mut mu = vec![num_complex::Complex64::new(0.0, 0.0); phi.len()];
    for (gate, &theta) in circuit.gates().iter().zip(&angles).rev() {
        if let Angle::Param(k) = gate.angle {
            mu.copy_from_slice(&phi);
            apply_generator(&mut mu, n, gate);
            let overlap: f64 = lambda.iter().zip(&mu).map(|(l, m)| (l.conj() * m).re).sum();
            grad[k] += 2.0 * overlap;
        }
        apply_inverse_kernel(&mut phi, n, gate, theta);
        apply_inverse_kernel(&mut lambda, n, gate, theta);
    }
    Ok((value, grad))
}

/// Gradient only; see [`expectation_and_gradient`].
pub fn expectation_gradient(circuit: &Circuit, params: &[f64], observable: &PauliSum) -> Result<Vec<f64>> {
    expectation_and_gradient(circuit, params, observable).map(|(_, g)| g)
}
