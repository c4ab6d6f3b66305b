use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use super::state::StateVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    Z,
    Cnot,
    Rx,
    Ry,
    Rz,
    Rzz,
    Crx,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Rzz | GateKind::Crx => 2,
            _ => 1,
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Rzz | GateKind::Crx)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::Cnot => "CNOT",
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Rzz => "RZZ",
            GateKind::Crx => "CRX",
        };
        f.write_str(s)
    }
}

/// Where a rotation gets its angle from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    /// Non-rotation gate.
    None,
    /// Index into the circuit's parameter vector.
    Param(usize),
    /// Bound angle in radians.
    Fixed(f64),
}

/// One gate. Qubits are 1-based; for two-qubit gates the first entry is the
/// control (CNOT, CRX).
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub angle: Angle,
}

impl GateOp {
    pub fn new(kind: GateKind, qubits: &[usize], angle: Angle) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::InvalidGate(format!("{kind} acts on {} qubits, got {:?}", kind.arity(), qubits)));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::RepeatedQubit(qubits[0]));
        }
        match (kind.is_rotation(), angle) {
            (true, Angle::None) => return Err(Error::InvalidGate(format!("{kind} needs an angle"))),
            (false, Angle::Param(_) | Angle::Fixed(_)) => {
                return Err(Error::InvalidGate(format!("{kind} takes no angle")))
            }
            _ => {}
        }
        Ok(Self { kind, qubits: qubits.to_vec(), angle })
    }

    pub fn fixed(kind: GateKind, qubits: &[usize]) -> Result<Self> {
        Self::new(kind, qubits, Angle::None)
    }

    pub fn param(kind: GateKind, qubits: &[usize], index: usize) -> Result<Self> {
        Self::new(kind, qubits, Angle::Param(index))
    }

    pub fn bound(kind: GateKind, qubits: &[usize], theta: f64) -> Result<Self> {
        Self::new(kind, qubits, Angle::Fixed(theta))
    }

    fn check_range(&self, n_qubits: usize) -> Result<()> {
        for &q in &self.qubits {
            if q == 0 || q > n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
        }
        Ok(())
    }

    fn resolve(&self, params: &[f64]) -> Result<f64> {
        match self.angle {
            Angle::None => Ok(0.0),
            Angle::Fixed(t) => Ok(t),
            Angle::Param(i) => params
                .get(i)
                .copied()
                .ok_or_else(|| Error::InvalidGate(format!("parameter {i} unresolved"))),
        }
    }
}

/// An ordered gate sequence over `n_qubits` with `n_params` free parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    n_params: usize,
    gates: Vec<GateOp>,
}

impl Circuit {
    pub fn new(n_qubits: usize, n_params: usize) -> Result<Self> {
        super::state::check_qubits(n_qubits)?;
        Ok(Self { n_qubits, n_params, gates: Vec::new() })
    }

    pub fn push(&mut self, gate: GateOp) -> Result<()> {
        gate.check_range(self.n_qubits)?;
        if let Angle::Param(i) = gate.angle {
            if i >= self.n_params {
                return Err(Error::InvalidGate(format!("parameter index {i} >= {}", self.n_params)));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::ParamLength { expected: self.n_params, got: params.len() });
        }
        Ok(())
    }

    /// Applies every gate in order to `initial`.
    pub fn run(&self, params: &[f64], initial: &StateVector) -> Result<StateVector> {
        self.check_params(params)?;
        initial.check_same(self.n_qubits)?;
        let mut state = initial.clone();
        for gate in &self.gates {
            let theta = gate.resolve(params)?;
            apply_kernel(state.amplitudes_mut(), self.n_qubits, gate, theta);
        }
        Ok(state)
    }

    /// Runs from `|0…0⟩`.
    pub fn run_from_zero(&self, params: &[f64]) -> Result<StateVector> {
        self.run(params, &StateVector::zero(self.n_qubits)?)
    }

    pub(crate) fn angles(&self, params: &[f64]) -> Result<Vec<f64>> {
        self.check_params(params)?;
        self.gates.iter().map(|g| g.resolve(params)).collect()
    }
}

impl StateVector {
    /// Applies `gate` with rotation angle `theta` (ignored for fixed gates).
    pub fn apply(&mut self, gate: &GateOp, theta: f64) -> Result<()> {
        gate.check_range(self.n_qubits())?;
        let n = self.n_qubits();
        apply_kernel(self.amplitudes_mut(), n, gate, theta);
        Ok(())
    }
}

/// Returns `U|ψ⟩` for a single gate without touching `state`.
pub fn apply_gate(state: &StateVector, gate: &GateOp, theta: f64) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate, theta)?;
    Ok(out)
}

#[inline]
fn bit(n_qubits: usize, q: usize) -> usize {
    1usize << (n_qubits - q)
}

fn apply_1q(amps: &mut [Complex64], mask: usize, m: [[Complex64; 2]; 2]) {
    for i in 0..amps.len() {
        if i & mask == 0 {
            let j = i | mask;
            let a0 = amps[i];
            let a1 = amps[j];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

fn rx(theta: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    let mis = Complex64::new(0.0, -s);
    [[Complex64::new(c, 0.0), mis], [mis, Complex64::new(c, 0.0)]]
}

/// Applies the gate's unitary in place. Range checks happen upstream.
pub(crate) fn apply_kernel(amps: &mut [Complex64], n: usize, gate: &GateOp, theta: f64) {
    let q = &gate.qubits;
    match gate.kind {
        GateKind::H => {
            let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
            apply_1q(amps, bit(n, q[0]), [[h, h], [h, -h]]);
        }
        GateKind::X => {
            let m = bit(n, q[0]);
            for i in 0..amps.len() {
                if i & m == 0 {
                    amps.swap(i, i | m);
                }
            }
        }
        GateKind::Z => {
            let m = bit(n, q[0]);
            for (i, a) in amps.iter_mut().enumerate() {
                if i & m != 0 {
                    *a = -*a;
                }
            }
        }
        GateKind::Cnot => {
            let (c, t) = (bit(n, q[0]), bit(n, q[1]));
            for i in 0..amps.len() {
                if i & c != 0 && i & t == 0 {
                    amps.swap(i, i | t);
                }
            }
        }
        GateKind::Rx => apply_1q(amps, bit(n, q[0]), rx(theta)),
        GateKind::Ry => {
            let (s, c) = (theta / 2.0).sin_cos();
            let (c, s) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0));
            apply_1q(amps, bit(n, q[0]), [[c, -s], [s, c]]);
        }
        GateKind::Rz => {
            let m = bit(n, q[0]);
            let lo = Complex64::from_polar(1.0, -theta / 2.0);
            let hi = lo.conj();
            for (i, a) in amps.iter_mut().enumerate() {
                *a *= if i & m == 0 { lo } else { hi };
            }
        }
        GateKind::Rzz => {
            let (m0, m1) = (bit(n, q[0]), bit(n, q[1]));
            let same = Complex64::from_polar(1.0, -theta / 2.0);
            let diff = same.conj();
            for (i, a) in amps.iter_mut().enumerate() {
                let parity = ((i & m0 != 0) as u8) ^ ((i & m1 != 0) as u8);
                *a *= if parity == 0 { same } else { diff };
            }
        }
        GateKind::Crx => {
            let (c, t) = (bit(n, q[0]), bit(n, q[1]));
            let m = rx(theta);
            for i in 0..amps.len() {
                if i & c != 0 && i & t == 0 {
                    let j = i | t;
                    let a0 = amps[i];
                    let a1 = amps[j];
                    amps[i] = m[0][0] * a0 + m[0][1] * a1;
                    amps[j] = m[1][0] * a0 + m[1][1] * a1;
                }
            }
        }
    }
}

/// Applies `U†` in place.
pub(crate) fn apply_inverse_kernel(amps: &mut [Complex64], n: usize, gate: &GateOp, theta: f64) {
    // Fixed gates in the set are self-inverse; rotations invert by negating the angle.
    let theta = if gate.kind.is_rotation() { -theta } else { theta };
    apply_kernel(amps, n, gate, theta);
}

/// Multiplies by the rotation generator `-i/2 · P` (for CRX, `-i/2 · |1⟩⟨1| ⊗ X`),
/// so that `dU/dθ = G U`.
pub(crate) fn apply_generator(amps: &mut [Complex64], n: usize, gate: &GateOp) {
    let q = &gate.qubits;
    let half_i = Complex64::new(0.0, -0.5);
    match gate.kind {
        GateKind::Rx => {
            let m = bit(n, q[0]);
            for i in 0..amps.len() {
                if i & m == 0 {
                    amps.swap(i, i | m);
                }
            }
            amps.iter_mut().for_each(|a| *a *= half_i);
        }
        GateKind::Ry => {
            // Y|0> = i|1>, Y|1> = -i|0>
            let m = bit(n, q[0]);
            let i_unit = Complex64::i();
            for i in 0..amps.len() {
                if i & m == 0 {
                    let j = i | m;
                    let (a0, a1) = (amps[i], amps[j]);
                    amps[i] = -i_unit * a1 * half_i;
                    amps[j] = i_unit * a0 * half_i;
                }
            }
        }
        GateKind::Rz => {
            let m = bit(n, q[0]);
            for (i, a) in amps.iter_mut().enumerate() {
                *a *= if i & m == 0 { half_i } else { -half_i };
            }
        }
        GateKind::Rzz => {
            let (m0, m1) = (bit(n, q[0]), bit(n, q[1]));
            for (i, a) in amps.iter_mut().enumerate() {
                let parity = ((i & m0 != 0) as u8) ^ ((i & m1 != 0) as u8);
                *a *= if parity == 0 { half_i } else { -half_i };
            }
        }
        GateKind::Crx => {
            let (c, t) = (bit(n, q[0]), bit(n, q[1]));
            for i in 0..amps.len() {
                if i & c == 0 {
                    amps[i] = Complex64::new(0.0, 0.0);
                } else if i & t == 0 {
                    let j = i | t;
                    let (a0, a1) = (amps[i], amps[j]);
                    amps[i] = a1 * half_i;
                    amps[j] = a0 * half_i;
                }
            }
        }
        GateKind::H | GateKind::X | GateKind::Z | GateKind::Cnot => {
            unreachable!("fixed gates have no generator")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: &StateVector, b: &[Complex64]) -> bool {
        a.amplitudes().iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn hadamard_on_zero() {
        let s = apply_gate(&StateVector::zero(1).unwrap(), &GateOp::fixed(GateKind::H, &[1]).unwrap(), 0.0)
            .unwrap();
        assert!(close(&s, &[r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)]));
    }

    #[test]
    fn ry_pi_flips() {
        let g = GateOp::param(GateKind::Ry, &[1], 0).unwrap();
        let s = apply_gate(&StateVector::zero(1).unwrap(), &g, PI).unwrap();
        assert!(close(&s, &[r(0.0), r(1.0)]));
    }

    #[test]
    fn cnot_makes_bell() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply(&GateOp::fixed(GateKind::H, &[1]).unwrap(), 0.0).unwrap();
        s.apply(&GateOp::fixed(GateKind::Cnot, &[1, 2]).unwrap(), 0.0).unwrap();
        assert!(close(&s, &[r(FRAC_1_SQRT_2), r(0.0), r(0.0), r(FRAC_1_SQRT_2)]));
    }

    #[test]
    fn qubit_one_is_most_significant() {
        let mut s = StateVector::zero(3).unwrap();
        s.apply(&GateOp::fixed(GateKind::X, &[1]).unwrap(), 0.0).unwrap();
        assert_eq!(s.amplitudes()[0b100], r(1.0));
    }

    #[test]
    fn run_circuit_cases() {
        let empty = Circuit::new(3, 0).unwrap();
        let s = empty.run_from_zero(&[]).unwrap();
        assert_eq!(s, StateVector::zero(3).unwrap());

        let mut c = Circuit::new(1, 1).unwrap();
        c.push(GateOp::param(GateKind::Ry, &[1], 0).unwrap()).unwrap();
        let s = c.run_from_zero(&[PI / 2.0]).unwrap();
        assert!(close(&s, &[r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)]));
        assert!(matches!(c.run_from_zero(&[]), Err(Error::ParamLength { expected: 1, got: 0 })));
    }

    #[test]
    fn gate_validation() {
        assert!(GateOp::fixed(GateKind::Cnot, &[1, 1]).is_err());
        assert!(GateOp::fixed(GateKind::Rx, &[1]).is_err());
        assert!(GateOp::bound(GateKind::H, &[1], 0.3).is_err());
        assert!(GateOp::fixed(GateKind::H, &[1, 2]).is_err());
        let mut c = Circuit::new(2, 1).unwrap();
        assert!(matches!(
            c.push(GateOp::fixed(GateKind::H, &[3]).unwrap()),
            Err(Error::QubitOutOfRange { index: 3, n_qubits: 2 })
        ));
        assert!(c.push(GateOp::param(GateKind::Rx, &[1], 1).unwrap()).is_err());
        let mut s = StateVector::zero(1).unwrap();
        assert!(s.apply(&GateOp::fixed(GateKind::X, &[2]).unwrap(), 0.0).is_err());
    }
}
