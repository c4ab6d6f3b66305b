//! Labeled generation over the phase label `g`: training sets from the
//! phase-transition circuit, per-observable spline interpolation, and string
//! order parameters.

mod spline;

use std::io::Write;

use crate::ansatz::phase_transition_circuit;
use crate::error::{invalid, Error, Result};
use crate::observables::{ExpectationVector, ObservableSet};
use crate::pauli::{multiply_factors, Pauli, PauliString};
use crate::sim::ExpectationSource;

pub use spline::Spline;

/// Interpolated values may overshoot `[−1, 1]` slightly before clamping.
pub const MAX_EXPECTED_OVERSHOOT: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub g: f64,
    pub expectations: ExpectationVector,
}

/// `m` evenly spaced labels over `[−1, 1]`, endpoints included.
pub fn label_grid(m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(invalid(format!("need at least 2 grid points, got {m}")));
    }
    let d = (m - 1) as f64;
    Ok((0..m).map(|i| (2.0 * i as f64 - d) / d).collect())
}

/// Exact expectation vector of the phase circuit at label `g`.
pub fn exact_expectations(set: &ObservableSet, g: f64) -> Result<ExpectationVector> {
    let state = phase_transition_circuit(set.n_qubits(), g)?.run_from_zero(&[])?;
    set.expectation_vector(&state)
}

/// Samples of the phase circuit on `m` evenly spaced labels.
pub fn build_training_set(set: &ObservableSet, m: usize) -> Result<Vec<LabeledSample>> {
    label_grid(m)?
        .into_iter()
        .map(|g| Ok(LabeledSample { g, expectations: exact_expectations(set, g)? }))
        .collect()
}

/// One spline per observable over a shared label grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    grid: Vec<f64>,
    set_id: (usize, usize),
    splines: Vec<Spline>,
}

impl Interpolant {
    /// Natural cubic splines, or piecewise linear below four samples.
    pub fn fit(samples: &[LabeledSample]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invalid("interpolation needs at least two samples"));
        }
        let set_id = samples[0].expectations.set_id();
        if samples.iter().any(|s| s.expectations.set_id() != set_id) {
            return Err(Error::DimensionMismatch("samples use different observable sets".into()));
        }
        if let Some(s) = samples.iter().find(|s| !(-1.0..=1.0).contains(&s.g)) {
            return Err(invalid(format!("label {} outside [-1, 1]", s.g)));
        }
        let mut order: Vec<&LabeledSample> = samples.iter().collect();
        order.sort_by(|a, b| a.g.total_cmp(&b.g));
        if let Some(w) = order.windows(2).find(|w| w[0].g == w[1].g) {
            return Err(invalid(format!("duplicate label g = {}", w[0].g)));
        }
        let grid: Vec<f64> = order.iter().map(|s| s.g).collect();
        let width = order[0].expectations.len();
        let splines = (0..width)
            .map(|j| {
                let y: Vec<f64> = order.iter().map(|s| s.expectations.values()[j]).collect();
                Spline::fit(&grid, &y)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, set_id, splines })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn splines(&self) -> &[Spline] {
        &self.splines
    }

    fn check_label(&self, g: f64) -> Result<()> {
        let (lo, hi) = (self.grid[0], self.grid[self.grid.len() - 1]);
        if !(-1.0..=1.0).contains(&g) || g < lo || g > hi {
            return Err(invalid(format!("label {g} outside the interpolation range [{lo}, {hi}]")));
        }
        Ok(())
    }

    /// Spline values before clamping.
    pub fn evaluate_raw(&self, g: f64) -> Result<Vec<f64>> {
        self.check_label(g)?;
        Ok(self.splines.iter().map(|s| s.eval(g)).collect())
    }

    /// The interpolated target vector at `g`, clamped to `[−1, 1]`.
    pub fn target_at(&self, set: &ObservableSet, g: f64) -> Result<ExpectationVector> {
        if (set.n_qubits(), set.max_weight()) != self.set_id {
            return Err(Error::DimensionMismatch("observable set differs from the fitted one".into()));
        }
        let values = self.evaluate_raw(g)?.into_iter().map(|v| v.clamp(-1.0, 1.0)).collect();
        ExpectationVector::new(set, values)
    }
}

/// Convenience wrapper around [`Interpolant::target_at`].
pub fn target_at(f: &Interpolant, set: &ObservableSet, g: f64) -> Result<ExpectationVector> {
    f.target_at(set, g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StringOrderKind {
    /// `∏_{i=3}^{N−2} X_i`
    One,
    /// `Z₂ Y₃ (∏_{i=4}^{N−3} X_i) Y_{N−2} Z_{N−1}`
    Zy,
}

impl StringOrderKind {
    pub fn name(self) -> &'static str {
        match self {
            StringOrderKind::One => "S1",
            StringOrderKind::Zy => "SZY",
        }
    }
}

/// The string order operator on `n` qubits as `sign · P`, multiplying
/// coincident factors together.
pub fn string_order_operator(n_qubits: usize, kind: StringOrderKind) -> Result<(f64, PauliString)> {
    if n_qubits < 5 {
        return Err(invalid(format!("string order parameters need N >= 5, got {n_qubits}")));
    }
    let n = n_qubits;
    let factors: Vec<(usize, Pauli)> = match kind {
        StringOrderKind::One => (3..=n - 2).map(|q| (q, Pauli::X)).collect(),
        StringOrderKind::Zy => {
            let mut f = vec![(2, Pauli::Z), (3, Pauli::Y)];
            f.extend((4..=n - 3).map(|q| (q, Pauli::X)));
            f.extend([(n - 2, Pauli::Y), (n - 1, Pauli::Z)]);
            f
        }
    };
    let product = multiply_factors(n, &factors)?;
    if product.phase.im != 0.0 {
        return Err(Error::Internal(format!("{} has a non-real phase", kind.name())));
    }
    let string = product.string.ok_or_else(|| Error::Internal(format!("{} reduced to the identity", kind.name())))?;
    Ok((product.phase.re, string))
}

pub fn string_order<S: ExpectationSource + ?Sized>(state: &S, kind: StringOrderKind) -> Result<f64> {
    let (sign, p) = string_order_operator(state.n_qubits(), kind)?;
    Ok(sign * state.expectation(&p)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StringOrderResult {
    pub g: f64,
    pub s_one: f64,
    pub s_zy: f64,
}

impl StringOrderResult {
    pub fn measure<S: ExpectationSource + ?Sized>(g: f64, state: &S) -> Result<Self> {
        Ok(Self {
            g,
            s_one: string_order(state, StringOrderKind::One)?,
            s_zy: string_order(state, StringOrderKind::Zy)?,
        })
    }
}

/// `g,label,value` rows in grid order.
pub fn write_samples_csv<W: Write>(samples: &[LabeledSample], set: &ObservableSet, mut out: W) -> Result<()> {
    writeln!(out, "g,label,value")?;
    for s in samples {
        s.expectations.check_set(set)?;
        for (p, v) in set.strings().iter().zip(s.expectations.values()) {
            writeln!(out, "{},{p},{v:?}", s.g)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanSource {
    Exact,
    Generated,
}

impl ScanSource {
    pub fn name(self) -> &'static str {
        match self {
            ScanSource::Exact => "exact",
            ScanSource::Generated => "generated",
        }
    }
}

/// `g,S1,SZY,source` rows.
pub fn write_phase_scan_csv<W: Write>(rows: &[(StringOrderResult, ScanSource)], mut out: W) -> Result<()> {
    writeln!(out, "g,S1,SZY,source")?;
    for (r, src) in rows {
        writeln!(out, "{},{},{},{}", r.g, r.s_one, r.s_zy, src.name())?;
    }
    Ok(())
}
