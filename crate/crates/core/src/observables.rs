//! The k-local Pauli observable set and expectation vectors over it.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use itertools::Itertools;

use crate::error::{invalid, Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::sim::ExpectationSource;

/// Every non-identity Pauli string of weight `1..=k` on `n` qubits, in
/// canonical order: by weight, then support (lexicographic), then letters
/// (lexicographic, X < Y < Z).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSet {
    n_qubits: usize,
    max_weight: usize,
    strings: Vec<PauliString>,
    index: HashMap<String, usize>,
}

impl ObservableSet {
    pub fn enumerate(n_qubits: usize, max_weight: usize) -> Result<Self> {
        if n_qubits == 0 || max_weight == 0 || max_weight > n_qubits {
            return Err(invalid(format!("need 1 <= k <= n, got n={n_qubits}, k={max_weight}")));
        }
        let mut strings = Vec::with_capacity(set_size(n_qubits, max_weight));
        for weight in 1..=max_weight {
            for support in (1..=n_qubits).combinations(weight) {
                for letters in std::iter::repeat_n(Pauli::ALL, weight).multi_cartesian_product() {
                    strings.push(PauliString::new(n_qubits, support.iter().copied().zip(letters))?);
                }
            }
        }
        let index = strings.iter().enumerate().map(|(i, s)| (s.label(), i)).collect();
        Ok(Self { n_qubits, max_weight, strings, index })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn max_weight(&self) -> usize {
        self.max_weight
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn get(&self, i: usize) -> Option<&PauliString> {
        self.strings.get(i)
    }

    /// `⟨strings[i]⟩` for every string, in order.
    pub fn expectation_vector<S: ExpectationSource + ?Sized>(&self, source: &S) -> Result<ExpectationVector> {
        if source.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "source on {} qubits, observable set on {}",
                source.n_qubits(),
                self.n_qubits
            )));
        }
        let values = self.strings.iter().map(|p| source.expectation(p)).collect::<Result<Vec<_>>>()?;
        ExpectationVector::new(self, values)
    }
}

/// `Σ_{j=1..k} C(n,j)·3ʲ`.
pub fn set_size(n: usize, k: usize) -> usize {
    let mut total = 0;
    let mut binom = 1usize;
    let mut pow3 = 1usize;
    for j in 1..=k.min(n) {
        binom = binom * (n - j + 1) / j;
        pow3 *= 3;
        total += binom * pow3;
    }
    total
}

/// Expectation values aligned with the canonical order of an
/// [`ObservableSet`], identified by its `(n, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationVector {
    n_qubits: usize,
    max_weight: usize,
    values: Vec<f64>,
}

impl ExpectationVector {
    pub fn new(set: &ObservableSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != set.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a set of {} observables",
                values.len(),
                set.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite expectation {bad}")));
        }
        // Roundoff can push an exact expectation marginally past ±1.
        if let Some(bad) = values.iter().find(|v| v.abs() > 1.0 + 1e-9) {
            return Err(Error::Numerical(format!("expectation {bad} outside [-1, 1]")));
        }
        Ok(Self { n_qubits: set.n_qubits(), max_weight: set.max_weight(), values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(n, k)` of the observable set this vector is aligned with.
    pub fn set_id(&self) -> (usize, usize) {
        (self.n_qubits, self.max_weight)
    }

    pub fn check_set(&self, set: &ObservableSet) -> Result<()> {
        if self.set_id() != (set.n_qubits(), set.max_weight()) || self.values.len() != set.len() {
            return Err(Error::DimensionMismatch(format!(
                "expectations for (n={}, k={}) used with set (n={}, k={})",
                self.n_qubits,
                self.max_weight,
                set.n_qubits(),
                set.max_weight()
            )));
        }
        Ok(())
    }

    /// Writes `label,value` rows in canonical order.
    pub fn write_csv<W: Write>(&self, set: &ObservableSet, mut out: W) -> Result<()> {
        self.check_set(set)?;
        writeln!(out, "label,value")?;
        for (p, v) in set.strings().iter().zip(&self.values) {
            writeln!(out, "{p},{v:?}")?;
        }
        Ok(())
    }

    /// Reads a `label,value` file; labels must match `set` in canonical order.
    pub fn read_csv<R: BufRead>(set: &ObservableSet, input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().transpose()?.ok_or_else(|| Error::Parse("empty expectation file".into()))?;
        if header.trim() != "label,value" {
            return Err(Error::Parse(format!("unexpected header {header:?}")));
        }
        let mut values = Vec::with_capacity(set.len());
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (label, value) =
                line.split_once(',').ok_or_else(|| Error::Parse(format!("row {}: missing comma", row + 2)))?;
            let expected = set
                .get(values.len())
                .ok_or_else(|| Error::Parse(format!("row {}: more rows than observables", row + 2)))?;
            let parsed = PauliString::parse(label, set.n_qubits())?;
            if &parsed != expected {
                return Err(Error::Parse(format!("row {}: expected {expected}, found {label}", row + 2)));
            }
            values.push(value.trim().parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {e}", row + 2)))?);
        }
        Self::new(set, values)
    }
}

/// One vector per line under a header of observable labels.
pub fn write_vector_rows<W: Write>(set: &ObservableSet, vectors: &[ExpectationVector], mut out: W) -> Result<()> {
    writeln!(out, "{}", set.strings().iter().join(","))?;
    for v in vectors {
        v.check_set(set)?;
        writeln!(out, "{}", v.values().iter().map(|x| format!("{x:?}")).join(","))?;
    }
    Ok(())
}

/// Inverse of [`write_vector_rows`].
pub fn read_vector_rows<R: BufRead>(set: &ObservableSet, input: R) -> Result<Vec<ExpectationVector>> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?.ok_or_else(|| Error::Parse("empty vector file".into()))?;
    let expected = set.strings().iter().join(",");
    if header.trim() != expected {
        return Err(Error::Parse("header does not list the observable set in canonical order".into()));
    }
    let mut out = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let values = line
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {e}", row + 2))))
            .collect::<Result<Vec<_>>>()?;
        out.push(ExpectationVector::new(set, values)?);
    }
    Ok(out)
}
