//! Exact statevector simulation.
//!
//! Amplitude index bit `n - q` holds qubit `q` (1-based), so qubit 1 is the
//! most significant bit.

mod circuit;
mod density;
mod gradient;
mod state;

pub use circuit::{apply_gate, Angle, Circuit, GateKind, GateOp};
pub use density::{trace_distance, DensityMatrix, MAX_DENSE_QUBITS};
pub use gradient::{expectation_and_gradient, expectation_gradient};
pub use state::{fidelity_pure_vs_mixture, ExpectationSource, MixtureState, StateVector};
