//! Dense density matrices, kept small and used as a reference path.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::state::{MixtureState, StateVector};
use crate::error::{invalid, Error, Result};
use crate::pauli::{Pauli, PauliString};

pub const MAX_DENSE_QUBITS: usize = 8;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(n_qubits: usize, entries: DMatrix<Complex64>) -> Result<Self> {
        check_dense(n_qubits)?;
        let dim = 1usize << n_qubits;
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for {n_qubits} qubits",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let asym = (&entries - entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > HERMITIAN_TOL {
            return Err(Error::Numerical(format!("matrix not Hermitian (deviation {asym:e})")));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > HERMITIAN_TOL || tr.im.abs() > HERMITIAN_TOL {
            return Err(Error::Numerical(format!("trace {tr} is not 1")));
        }
        Ok(Self { n_qubits, entries })
    }

    pub fn from_state(state: &StateVector) -> Result<Self> {
        check_dense(state.n_qubits())?;
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        let rho = &v * v.adjoint();
        Self::new(state.n_qubits(), rho)
    }

    pub fn from_mixture(mix: &MixtureState) -> Result<Self> {
        let n = mix.n_qubits();
        check_dense(n)?;
        let dim = 1usize << n;
        let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
        for (p, s) in mix.branches() {
            let v = nalgebra::DVector::from_column_slice(s.amplitudes());
            rho += (&v * v.adjoint()) * Complex64::new(*p, 0.0);
        }
        Self::new(n, rho)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// `Tr[ρ P]` through the dense Kronecker-product matrix of `P`.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch("Pauli string and density matrix".into()));
        }
        Ok((&self.entries * dense_pauli(p)).trace().re)
    }
}

fn check_dense(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_DENSE_QUBITS {
        return Err(invalid(format!(
            "dense density matrices support 1..={MAX_DENSE_QUBITS} qubits, got {n_qubits}"
        )));
    }
    Ok(())
}

fn pauli_2x2(p: Option<Pauli>) -> DMatrix<Complex64> {
    let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::i());
    let data = match p {
        None => [o, z, z, o],
        Some(Pauli::X) => [z, o, o, z],
        Some(Pauli::Y) => [z, -i, i, z],
        Some(Pauli::Z) => [o, z, z, -o],
    };
    DMatrix::from_row_slice(2, 2, &data)
}

/// Dense `2ⁿ×2ⁿ` matrix of a Pauli string, qubit 1 as the leftmost factor.
pub fn dense_pauli(p: &PauliString) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for q in 1..=p.n_qubits() {
        let letter = p.factors().iter().find(|&&(r, _)| r == q).map(|&(_, l)| l);
        m = m.kronecker(&pauli_2x2(letter));
    }
    m
}

/// `½‖a − b‖₁`, from the eigenvalues of the Hermitian difference.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::DimensionMismatch("density matrices on different qubit counts".into()));
    }
    let diff = &a.entries - &b.entries;
    let eig = SymmetricEigen::new(diff);
    let d = 0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}
