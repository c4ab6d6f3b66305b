//! Quantum Wasserstein GAN training on an exact statevector simulator.
//!
//! The crate is organised bottom-up:
//!
//! - [`sim`]: statevector simulation, mixtures, dense density-matrix checks and
//!   adjoint gradients of expectation values.
//! - [`pauli`] and [`observables`]: k-local Pauli strings and expectation vectors.
//! - [`ansatz`]: the generic, phase-transition and butterfly circuit families.
//! - [`discriminator`]: the linear program approximating the W1 distance and
//!   its simplex solver.
//! - [`trainer`]: the mixture generator and the adversarial training loop.
//! - [`phase`]: labeled generation by interpolating expectation curves over
//!   the phase label, plus string order parameters.
//! - [`wgan`]: a small WGAN-GP over expectation vectors for unlabeled generation.
//!
//! Qubits are numbered from 1 and qubit 1 is the most significant bit of the
//! amplitude index.

pub mod adam;
pub mod ansatz;
pub mod discriminator;
pub mod error;
pub mod observables;
pub mod pauli;
pub mod phase;
pub mod rng;
pub mod sim;
pub mod trainer;
pub mod wgan;

pub use error::{Error, Result};
