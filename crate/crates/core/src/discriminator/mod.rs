//! The W1 discriminator: a linear program over k-local Pauli weights.
//!
//! With `cᵢ = ⟨Hᵢ⟩_target − ⟨Hᵢ⟩_generated`, the discriminator solves
//!
//! ```text
//! max Σ wᵢ cᵢ   s.t.   Σ_{i : j ∈ supp Hᵢ} |wᵢ| ≤ 1   for every qubit j
//! ```
//!
//! by splitting `wᵢ = wᵢ⁺ − wᵢ⁻` into the canonical form
//! `max c′ᵀw′, A w′ ≤ 1, w′ ≥ 0` with `c′ = [c₁, −c₁, …]`. The optimal vertex
//! has at most `n` non-zero weights and defines the witness `Ĥ = Σ wᵢ Hᵢ`.

pub mod simplex;

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::observables::{ExpectationVector, ObservableSet};
use crate::pauli::PauliSum;

/// Weights at or below this magnitude are treated as zero in the witness.
const WEIGHT_EPS: f64 = 1e-14;

/// `cᵢ = target[i] − generated[i]`.
pub fn compute_objective(target: &ExpectationVector, generated: &ExpectationVector) -> Result<Vec<f64>> {
    if target.set_id() != generated.set_id() || target.len() != generated.len() {
        return Err(Error::DimensionMismatch(format!(
            "target set {:?} vs generated set {:?}",
            target.set_id(),
            generated.set_id()
        )));
    }
    Ok(target.values().iter().zip(generated.values()).map(|(t, g)| t - g).collect())
}

/// The canonical-form LP. Column `2i` is `wᵢ⁺`, column `2i + 1` is `wᵢ⁻`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpInstance {
    n_constraints: usize,
    /// 0-based qubit rows touched by each original string.
    supports: Vec<Vec<usize>>,
    objective: Vec<f64>,
}

impl LpInstance {
    pub fn n_constraints(&self) -> usize {
        self.n_constraints
    }

    /// Number of doubled columns, `2N`.
    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rhs(&self) -> Vec<f64> {
        vec![1.0; self.n_constraints]
    }

    /// `A[row, col]` of the doubled constraint matrix.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        if self.supports[col / 2].contains(&row) {
            1.0
        } else {
            0.0
        }
    }

    /// Dense row-major constraint matrix.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n_vars()]; self.n_constraints];
        for (i, support) in self.supports.iter().enumerate() {
            for &row in support {
                a[row][2 * i] = 1.0;
                a[row][2 * i + 1] = 1.0;
            }
        }
        a
    }
}

pub fn build_lp(c: &[f64], set: &ObservableSet) -> Result<LpInstance> {
    if c.len() != set.len() {
        return Err(Error::DimensionMismatch(format!("{} costs for {} observables", c.len(), set.len())));
    }
    let supports = set.strings().iter().map(|p| p.support().map(|q| q - 1).collect()).collect();
    let objective = c.iter().flat_map(|&ci| [ci, -ci]).collect();
    Ok(LpInstance { n_constraints: set.n_qubits(), supports, objective })
}

/// LP optimum: sparse weights over observable indices and the achieved value.
#[derive(Debug, Clone, PartialEq)]
pub struct DualWitness {
    pub weights: BTreeMap<usize, f64>,
    pub value: f64,
    pub iterations: usize,
}

impl DualWitness {
    pub fn zero() -> Self {
        Self { weights: BTreeMap::new(), value: 0.0, iterations: 0 }
    }

    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    /// `Ĥ = Σ wᵢ Hᵢ` over `set`.
    pub fn hamiltonian(&self, set: &ObservableSet) -> Result<PauliSum> {
        let terms = self
            .weights
            .iter()
            .map(|(&i, &w)| {
                set.get(i)
                    .cloned()
                    .map(|p| (w, p))
                    .ok_or_else(|| Error::DimensionMismatch(format!("witness index {i} outside the observable set")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliSum::new(terms))
    }

    /// Largest per-qubit `Σ |wᵢ|` over strings acting on that qubit.
    pub fn max_qubit_load(&self, set: &ObservableSet) -> f64 {
        let mut load = vec![0.0; set.n_qubits() + 1];
        for (&i, &w) in &self.weights {
            for q in set.strings()[i].support() {
                load[q] += w.abs();
            }
        }
        load.into_iter().fold(0.0, f64::max)
    }

    /// `label,weight` rows followed by a `#value,<v>` line.
    pub fn write_csv<W: Write>(&self, set: &ObservableSet, mut out: W) -> Result<()> {
        writeln!(out, "label,weight")?;
        for (&i, &w) in &self.weights {
            let p = set.get(i).ok_or_else(|| invalid(format!("witness index {i} outside set")))?;
            writeln!(out, "{p},{w}")?;
        }
        writeln!(out, "#value,{}", self.value)?;
        Ok(())
    }
}

/// Solves the LP and maps the doubled solution back to signed weights.
pub fn simplex_solve(lp: &LpInstance) -> Result<DualWitness> {
    let sol = simplex::maximize(lp.objective(), &lp.matrix(), &lp.rhs())?;
    let mut weights = BTreeMap::new();
    let mut value = 0.0;
    for (i, pair) in sol.x.chunks_exact(2).enumerate() {
        let w = pair[0] - pair[1];
        if w.abs() > WEIGHT_EPS {
            weights.insert(i, w);
            value += w * lp.objective[2 * i];
        }
    }
    if value < 0.0 {
        // w = 0 is feasible, so a negative optimum means the solve broke down.
        if value < -simplex::OPT_TOL {
            return Err(Error::Numerical(format!("negative LP optimum {value}")));
        }
        value = 0.0;
    }
    Ok(DualWitness { weights, value, iterations: sol.iterations })
}

/// `compute_objective → build_lp → simplex_solve`.
pub fn estimate_w1(target: &ExpectationVector, generated: &ExpectationVector, set: &ObservableSet) -> Result<DualWitness> {
    estimate_w1_scaled(target, generated, set, 1.0)
}

/// As [`estimate_w1`], with weights and value divided by `divisor` (1 keeps
/// the per-qubit budget of 1; 2 caps the Lipschitz bound of `Ĥ` at 1).
pub fn estimate_w1_scaled(
    target: &ExpectationVector,
    generated: &ExpectationVector,
    set: &ObservableSet,
    divisor: f64,
) -> Result<DualWitness> {
    if divisor != 1.0 && divisor != 2.0 {
        return Err(invalid(format!("Lipschitz divisor must be 1 or 2, got {divisor}")));
    }
    target.check_set(set)?;
    generated.check_set(set)?;
    let c = compute_objective(target, generated)?;
    let mut w = simplex_solve(&build_lp(&c, set)?)?;
    if divisor != 1.0 {
        w.weights.values_mut().for_each(|v| *v /= divisor);
        w.value /= divisor;
    }
    Ok(w)
}
