//! Circuit families: the generic layered ansatz, the topological
//! phase-transition (MPS) circuit and the butterfly circuit.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::sim::{Circuit, GateKind, GateOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnsatzFamily {
    Generic,
    PhaseTransition,
    Butterfly,
}

impl AnsatzFamily {
    pub fn name(self) -> &'static str {
        match self {
            AnsatzFamily::Generic => "generic",
            AnsatzFamily::PhaseTransition => "phase",
            AnsatzFamily::Butterfly => "butterfly",
        }
    }
}

impl fmt::Display for AnsatzFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnsatzFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(AnsatzFamily::Generic),
            "phase" => Ok(AnsatzFamily::PhaseTransition),
            "butterfly" => Ok(AnsatzFamily::Butterfly),
            other => Err(invalid(format!("unknown ansatz {other:?} (expected generic, phase or butterfly)"))),
        }
    }
}

/// A fully specified circuit template.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnsatzSpec {
    Generic { n_qubits: usize, layers: usize },
    /// All angles are bound from the phase label `g`; no free parameters.
    PhaseTransition { n_qubits: usize, g: f64 },
    Butterfly { n_qubits: usize },
}

impl AnsatzSpec {
    pub fn family(&self) -> AnsatzFamily {
        match self {
            AnsatzSpec::Generic { .. } => AnsatzFamily::Generic,
            AnsatzSpec::PhaseTransition { .. } => AnsatzFamily::PhaseTransition,
            AnsatzSpec::Butterfly { .. } => AnsatzFamily::Butterfly,
        }
    }

    pub fn n_qubits(&self) -> usize {
        match *self {
            AnsatzSpec::Generic { n_qubits, .. }
            | AnsatzSpec::PhaseTransition { n_qubits, .. }
            | AnsatzSpec::Butterfly { n_qubits } => n_qubits,
        }
    }

    pub fn layers(&self) -> Option<usize> {
        match *self {
            AnsatzSpec::Generic { layers, .. } => Some(layers),
            _ => None,
        }
    }

    pub fn n_params(&self) -> usize {
        match *self {
            AnsatzSpec::Generic { n_qubits, layers } => layers * (3 * n_qubits - 1),
            AnsatzSpec::PhaseTransition { .. } => 0,
            AnsatzSpec::Butterfly { n_qubits } => butterfly_n_params(n_qubits),
        }
    }

    pub fn circuit(&self) -> Result<Circuit> {
        match *self {
            AnsatzSpec::Generic { n_qubits, layers } => generic_ansatz(n_qubits, layers),
            AnsatzSpec::PhaseTransition { n_qubits, g } => phase_transition_circuit(n_qubits, g),
            AnsatzSpec::Butterfly { n_qubits } => butterfly_circuit(n_qubits),
        }
    }
}

/// `n` angles uniform on `[−π, π)`.
pub fn random_angles<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-PI..PI)).collect()
}

/// Layers of RX and RZ on every qubit followed by RZZ on the adjacent pairs
/// (1,2),(3,4),… and then (2,3),(4,5),…. Parameters are layer-major in gate
/// order, `3n − 1` per layer.
pub fn generic_ansatz(n_qubits: usize, layers: usize) -> Result<Circuit> {
    if n_qubits < 2 {
        return Err(invalid(format!("generic ansatz needs at least 2 qubits, got {n_qubits}")));
    }
    if layers == 0 {
        return Err(invalid("generic ansatz needs at least one layer"));
    }
    let mut c = Circuit::new(n_qubits, layers * (3 * n_qubits - 1))?;
    let mut next = 0..;
    for _ in 0..layers {
        for q in 1..=n_qubits {
            c.push(GateOp::param(GateKind::Rx, &[q], next.next().unwrap())?)?;
        }
        for q in 1..=n_qubits {
            c.push(GateOp::param(GateKind::Rz, &[q], next.next().unwrap())?)?;
        }
        for start in [1, 2] {
            for q in (start..n_qubits).step_by(2) {
                c.push(GateOp::param(GateKind::Rzz, &[q, q + 1], next.next().unwrap())?)?;
            }
        }
    }
    Ok(c)
}

/// Rotation angles `(θ_w, θ_v, θ_r)` of the phase-transition circuit at label
/// `g ∈ [−1, 1]`. `sign(0)` is taken as 0.
pub fn phase_angles(g: f64) -> Result<(f64, f64, f64)> {
    if !(-1.0..=1.0).contains(&g) {
        return Err(invalid(format!("phase label {g} outside [-1, 1]")));
    }
    let a = g.abs();
    let sign = if g > 0.0 {
        1.0
    } else if g < 0.0 {
        -1.0
    } else {
        0.0
    };
    let root = (1.0 + a).sqrt();
    let theta_w = (sign * a.sqrt() / root).clamp(-1.0, 1.0).acos();
    let theta_v = (a.sqrt() / root).clamp(-1.0, 1.0).asin();
    let theta_r = 2.0 * (1.0 / root).clamp(-1.0, 1.0).asin();
    debug_assert!((0.0..=PI).contains(&theta_w));
    Ok((theta_w, theta_v, theta_r))
}

/// The MPS-style circuit: `U₁` on qubits (1, 2) followed by a staircase of
/// `U` blocks on (i, i+1) for i = 2..N−1, transcribed gate for gate.
pub fn phase_transition_circuit(n_qubits: usize, g: f64) -> Result<Circuit> {
    if n_qubits < 3 {
        return Err(invalid(format!("phase-transition circuit needs N >= 3, got {n_qubits}")));
    }
    let (theta_w, theta_v, theta_r) = phase_angles(g)?;
    let mut c = Circuit::new(n_qubits, 0)?;
    let fixed = |k, q: &[usize]| GateOp::fixed(k, q);
    let ry = |q, t| GateOp::bound(GateKind::Ry, &[q], t);

    // U₁
    c.push(fixed(GateKind::H, &[1])?)?;
    c.push(fixed(GateKind::Cnot, &[1, 2])?)?;
    c.push(fixed(GateKind::Z, &[2])?)?;
    c.push(ry(2, theta_r)?)?;
    if g > 0.0 {
        c.push(fixed(GateKind::H, &[2])?)?;
        c.push(fixed(GateKind::Cnot, &[1, 2])?)?;
        c.push(fixed(GateKind::H, &[2])?)?;
    }

    // U on (carried, fresh)
    for a in 2..n_qubits {
        let b = a + 1;
        c.push(fixed(GateKind::X, &[a])?)?;
        c.push(ry(b, theta_w)?)?;
        c.push(fixed(GateKind::Cnot, &[a, b])?)?;
        c.push(fixed(GateKind::X, &[a])?)?;
        c.push(fixed(GateKind::X, &[b])?)?;
        c.push(ry(b, theta_w)?)?;
        c.push(fixed(GateKind::X, &[b])?)?;
        c.push(ry(b, theta_v)?)?;
        c.push(fixed(GateKind::Cnot, &[a, b])?)?;
        c.push(fixed(GateKind::X, &[b])?)?;
        c.push(fixed(GateKind::X, &[a])?)?;
        c.push(ry(b, theta_v)?)?;
        c.push(fixed(GateKind::X, &[b])?)?;
    }
    Ok(c)
}

/// CRX `(control, target)` pairs of the butterfly layer at distance `d`.
pub fn butterfly_pairs(n_qubits: usize, d: usize) -> Vec<(usize, usize)> {
    (1..=n_qubits).filter(|&i| ((i - 1) / d) % 2 == 0 && i + d <= n_qubits).map(|i| (i, i + d)).collect()
}

/// Distances `1, 2, 4, …` strictly below `n_qubits`.
pub fn butterfly_distances(n_qubits: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |d| Some(d * 2)).take_while(|&d| d < n_qubits).collect()
}

fn butterfly_n_params(n_qubits: usize) -> usize {
    butterfly_distances(n_qubits).into_iter().map(|d| n_qubits + butterfly_pairs(n_qubits, d).len()).sum()
}

/// For each distance `d = 2ʲ < n`: an RX layer on all qubits, then CRX from
/// `i` to `i + d` for the non-overlapping butterfly pairs.
pub fn butterfly_circuit(n_qubits: usize) -> Result<Circuit> {
    if n_qubits < 2 {
        return Err(invalid(format!("butterfly circuit needs at least 2 qubits, got {n_qubits}")));
    }
    let mut c = Circuit::new(n_qubits, butterfly_n_params(n_qubits))?;
    let mut next = 0..;
    for d in butterfly_distances(n_qubits) {
        for q in 1..=n_qubits {
            c.push(GateOp::param(GateKind::Rx, &[q], next.next().unwrap())?)?;
        }
        for (ctrl, tgt) in butterfly_pairs(n_qubits, d) {
            c.push(GateOp::param(GateKind::Crx, &[ctrl, tgt], next.next().unwrap())?)?;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::StateVector;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn generic_param_counts() {
        assert_eq!(generic_ansatz(3, 1).unwrap().n_params(), 8);
        assert_eq!(generic_ansatz(5, 2).unwrap().n_params(), 28);
        assert!(generic_ansatz(1, 1).is_err());
        assert!(generic_ansatz(3, 0).is_err());
    }

    #[test]
    fn generic_rzz_pair_order() {
        let c = generic_ansatz(5, 1).unwrap();
        let pairs: Vec<Vec<usize>> =
            c.gates().iter().filter(|g| g.kind == GateKind::Rzz).map(|g| g.qubits.clone()).collect();
        assert_eq!(pairs, vec![vec![1, 2], vec![3, 4], vec![2, 3], vec![4, 5]]);
    }

    #[test]
    fn generic_zero_params_is_identity_on_zero() {
        let c = generic_ansatz(4, 3).unwrap();
        let s = c.run_from_zero(&vec![0.0; c.n_params()]).unwrap();
        assert_eq!(s, StateVector::zero(4).unwrap());
    }

    #[test]
    fn phase_angle_values() {
        let close = |a: (f64, f64, f64), b: (f64, f64, f64)| {
            (a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15 && (a.2 - b.2).abs() < 1e-15
        };
        assert!(close(phase_angles(0.0).unwrap(), (FRAC_PI_2, 0.0, PI)));
        assert!(close(phase_angles(1.0).unwrap(), (FRAC_PI_4, FRAC_PI_4, FRAC_PI_2)));
        assert!(close(phase_angles(-1.0).unwrap(), (3.0 * FRAC_PI_4, FRAC_PI_4, FRAC_PI_2)));
        assert!(phase_angles(1.01).is_err());
        assert!(phase_angles(f64::NAN).is_err());
    }

    #[test]
    fn phase_angle_ranges() {
        for i in 0..=200 {
            let g = -1.0 + i as f64 / 100.0;
            let (w, v, r) = phase_angles(g).unwrap();
            assert!((0.0..=PI).contains(&w));
            assert!((-FRAC_PI_2..=FRAC_PI_2).contains(&v));
            assert!((-PI..=PI).contains(&r));
        }
    }

    #[test]
    fn phase_circuit_gate_counts() {
        // U₁ has 4 gates (7 for g > 0); each U block has 13.
        assert_eq!(phase_transition_circuit(5, -0.5).unwrap().len(), 4 + 13 * 3);
        assert_eq!(phase_transition_circuit(5, 0.0).unwrap().len(), 4 + 13 * 3);
        assert_eq!(phase_transition_circuit(5, 0.4).unwrap().len(), 7 + 13 * 3);
        assert!(phase_transition_circuit(2, 0.0).is_err());
        assert!(phase_transition_circuit(5, 1.5).is_err());
    }

    #[test]
    fn phase_circuit_is_normalised() {
        let s = phase_transition_circuit(5, 0.4).unwrap().run_from_zero(&[]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn butterfly_counts() {
        assert_eq!(butterfly_circuit(2).unwrap().n_params(), 3);
        assert_eq!(butterfly_circuit(4).unwrap().n_params(), 12);
        assert_eq!(butterfly_pairs(4, 1), vec![(1, 2), (3, 4)]);
        assert_eq!(butterfly_pairs(4, 2), vec![(1, 3), (2, 4)]);
        assert_eq!(butterfly_circuit(9).unwrap().n_params(), 49);
        assert!(butterfly_circuit(1).is_err());
    }

    #[test]
    fn butterfly_pairs_are_disjoint() {
        for n in 2..=17 {
            for d in butterfly_distances(n) {
                let mut seen = std::collections::HashSet::new();
                for (a, b) in butterfly_pairs(n, d) {
                    assert!(seen.insert(a) && seen.insert(b), "n={n} d={d}");
                }
            }
        }
    }

    #[test]
    fn family_names() {
        for f in [AnsatzFamily::Generic, AnsatzFamily::PhaseTransition, AnsatzFamily::Butterfly] {
            assert_eq!(f.name().parse::<AnsatzFamily>().unwrap(), f);
        }
        assert!("mps".parse::<AnsatzFamily>().is_err());
    }
}
