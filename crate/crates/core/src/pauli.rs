//! Sparse Pauli strings.
//!
//! A [`PauliString`] stores only its non-identity factors, sorted by qubit.
//! Its canonical text form concatenates letter and 1-based qubit index in
//! ascending qubit order, e.g. `X1Z3`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn letter(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Single-qubit product `self · other`, as `(phase, result)`; `None`
    /// stands for the identity.
    pub fn mul(self, other: Pauli) -> (Complex64, Option<Pauli>) {
        use Pauli::*;
        let i = Complex64::i();
        match (self, other) {
            (a, b) if a == b => (Complex64::new(1.0, 0.0), None),
            (X, Y) => (i, Some(Z)),
            (Y, X) => (-i, Some(Z)),
            (Y, Z) => (i, Some(X)),
            (Z, Y) => (-i, Some(X)),
            (Z, X) => (i, Some(Y)),
            (X, Z) => (-i, Some(Y)),
            _ => unreachable!(),
        }
    }
}

/// A non-identity tensor product of single-qubit Paulis on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    factors: Vec<(usize, Pauli)>,
    x_mask: usize,
    z_mask: usize,
    n_y: u32,
}

impl PauliString {
    /// Builds a string from `(qubit, letter)` pairs with 1-based qubit indices.
    /// Pairs may come in any order but must not repeat a qubit.
    pub fn new(n_qubits: usize, factors: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let mut factors: Vec<(usize, Pauli)> = factors.into_iter().collect();
        if n_qubits == 0 || n_qubits >= usize::BITS as usize {
            return Err(Error::InvalidArgument(format!("unsupported qubit count {n_qubits}")));
        }
        if factors.is_empty() {
            return Err(Error::InvalidArgument("Pauli string has empty support".into()));
        }
        factors.sort_by_key(|&(q, _)| q);
        for w in factors.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::RepeatedQubit(w[0].0));
            }
        }
        let mut x_mask = 0;
        let mut z_mask = 0;
        let mut n_y = 0;
        for &(q, p) in &factors {
            if q == 0 || q > n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            let bit = 1usize << (n_qubits - q);
            match p {
                Pauli::X => x_mask |= bit,
                Pauli::Z => z_mask |= bit,
                Pauli::Y => {
                    x_mask |= bit;
                    z_mask |= bit;
                    n_y += 1;
                }
            }
        }
        Ok(Self { n_qubits, factors, x_mask, z_mask, n_y })
    }

    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Result<Self> {
        Self::new(n_qubits, [(qubit, p)])
    }

    /// Parses a canonical label such as `X1Y2`. Indices must lie in
    /// `1..=n_qubits` and may not repeat.
    pub fn parse(text: &str, n_qubits: usize) -> Result<Self> {
        let bad = |reason: &str| Error::MalformedLabel { label: text.to_string(), reason: reason.to_string() };
        let mut factors = Vec::new();
        let mut chars = text.chars().peekable();
        if chars.peek().is_none() {
            return Err(bad("empty label"));
        }
        while let Some(c) = chars.next() {
            let p = Pauli::from_letter(c).ok_or_else(|| bad(&format!("unknown letter {c:?}")))?;
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            if digits.is_empty() {
                return Err(bad("letter without qubit index"));
            }
            let q: usize = digits.parse().map_err(|_| bad("qubit index overflow"))?;
            if q == 0 || q > n_qubits {
                return Err(bad(&format!("qubit index {q} outside 1..={n_qubits}")));
            }
            if factors.iter().any(|&(r, _)| r == q) {
                return Err(bad(&format!("repeated qubit index {q}")));
            }
            factors.push((q, p));
        }
        Self::new(n_qubits, factors)
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.factors
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    /// Sorted 1-based support.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.iter().map(|&(q, _)| q)
    }

    pub fn acts_on(&self, qubit: usize) -> bool {
        self.factors.iter().any(|&(q, _)| q == qubit)
    }

    /// Bit mask of the qubits where the string flips the basis state (X or Y).
    pub fn x_mask(&self) -> usize {
        self.x_mask
    }

    /// Bit mask of the qubits that contribute a sign (Z or Y).
    pub fn z_mask(&self) -> usize {
        self.z_mask
    }

    /// `P|b⟩ = phase(b) |b ⊕ x_mask⟩`.
    #[inline]
    pub fn phase(&self, basis: usize) -> Complex64 {
        let sign = if (basis & self.z_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        // i^{n_y}
        let base = match self.n_y % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        base * sign
    }

    /// Accumulates `coeff · P|ψ⟩` into `out`.
    pub fn apply_add(&self, coeff: f64, amps: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(amps.len(), out.len());
        for (b, a) in amps.iter().enumerate() {
            out[b ^ self.x_mask] += self.phase(b) * a * coeff;
        }
    }

    /// `⟨ψ|P|ψ⟩` with the (roundoff-sized) imaginary part discarded.
    pub fn expectation(&self, amps: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in amps.iter().enumerate() {
            acc += amps[b ^ self.x_mask].conj() * self.phase(b) * a;
        }
        acc.re
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(q, p) in &self.factors {
            write!(f, "{}{}", p.letter(), q)?;
        }
        Ok(())
    }
}

/// Result of multiplying Pauli factors together: a phase times either a
/// Pauli string or the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliProduct {
    pub phase: Complex64,
    pub string: Option<PauliString>,
}

/// Multiplies the given `(qubit, letter)` factors left to right, merging
/// factors on the same qubit.
pub fn multiply_factors(n_qubits: usize, factors: &[(usize, Pauli)]) -> Result<PauliProduct> {
    let mut per_qubit: Vec<Option<Pauli>> = vec![None; n_qubits + 1];
    let mut phase = Complex64::new(1.0, 0.0);
    for &(q, p) in factors {
        if q == 0 || q > n_qubits {
            return Err(Error::QubitOutOfRange { index: q, n_qubits });
        }
        per_qubit[q] = match per_qubit[q] {
            None => Some(p),
            Some(prev) => {
                let (ph, r) = prev.mul(p);
                phase *= ph;
                r
            }
        };
    }
    let merged: Vec<(usize, Pauli)> =
        per_qubit.iter().enumerate().filter_map(|(q, p)| p.map(|p| (q, p))).collect();
    let string = if merged.is_empty() { None } else { Some(PauliString::new(n_qubits, merged)?) };
    Ok(PauliProduct { phase, string })
}

/// A real-weighted sum of Pauli strings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PauliSum {
    pub terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn new(terms: Vec<(f64, PauliString)>) -> Self {
        Self { terms }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `H|ψ⟩`.
    pub fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for (w, p) in &self.terms {
            p.apply_add(*w, amps, &mut out);
        }
        out
    }

    pub fn expectation(&self, amps: &[Complex64]) -> f64 {
        self.terms.iter().map(|(w, p)| w * p.expectation(amps)).sum()
    }
}
