//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qwgan::pauli::{Pauli, PauliString};
use qwgan::sim::{Circuit, GateKind, GateOp};
use rand::seq::SliceRandom;
use rand::Rng;

pub const ALL_GATES: [GateKind; 9] = [
    GateKind::H,
    GateKind::X,
    GateKind::Z,
    GateKind::Cnot,
    GateKind::Rx,
    GateKind::Ry,
    GateKind::Rz,
    GateKind::Rzz,
    GateKind::Crx,
];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn m2(a: [[Complex64; 2]; 2]) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]])
}

pub fn pauli_matrix(p: Pauli) -> DMatrix<Complex64> {
    match p {
        Pauli::X => m2([[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]),
        Pauli::Y => m2([[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]]),
        Pauli::Z => m2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]]),
    }
}

fn identity(dim: usize) -> DMatrix<Complex64> {
    DMatrix::identity(dim, dim)
}

/// `exp(−iθP/2) = cos(θ/2) I − i sin(θ/2) P` for an involutory `P`.
fn rotation(p: &DMatrix<Complex64>, theta: f64) -> DMatrix<Complex64> {
    let dim = p.nrows();
    identity(dim) * c((theta / 2.0).cos(), 0.0) - p * c(0.0, (theta / 2.0).sin())
}

/// Tensor product with `ops[q]` on qubit `q + 1` (qubit 1 leftmost) and
/// identity elsewhere.
pub fn embed(n: usize, ops: &[(usize, DMatrix<Complex64>)]) -> DMatrix<Complex64> {
    let mut out = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for q in 1..=n {
        let factor = ops.iter().find(|(k, _)| *k == q).map(|(_, m)| m.clone()).unwrap_or_else(|| identity(2));
        out = out.kronecker(&factor);
    }
    out
}

pub fn pauli_string_matrix(p: &PauliString) -> DMatrix<Complex64> {
    let ops: Vec<_> = p.factors().iter().map(|&(q, f)| (q, pauli_matrix(f))).collect();
    embed(p.n_qubits(), &ops)
}

pub fn gate_matrix(n: usize, kind: GateKind, qubits: &[usize], theta: f64) -> DMatrix<Complex64> {
    let h = m2([[c(1., 0.), c(1., 0.)], [c(1., 0.), c(-1., 0.)]]) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let p0 = m2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 0.)]]);
    let p1 = m2([[c(0., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]]);
    let (x, z) = (pauli_matrix(Pauli::X), pauli_matrix(Pauli::Z));
    let q = qubits[0];
    match kind {
        GateKind::H => embed(n, &[(q, h)]),
        GateKind::X => embed(n, &[(q, x)]),
        GateKind::Z => embed(n, &[(q, z)]),
        GateKind::Rx => embed(n, &[(q, rotation(&x, theta))]),
        GateKind::Ry => embed(n, &[(q, rotation(&pauli_matrix(Pauli::Y), theta))]),
        GateKind::Rz => embed(n, &[(q, rotation(&z, theta))]),
        GateKind::Cnot => embed(n, &[(q, p0)]) + embed(n, &[(q, p1), (qubits[1], x)]),
        GateKind::Crx => embed(n, &[(q, p0)]) + embed(n, &[(q, p1), (qubits[1], rotation(&x, theta))]),
        GateKind::Rzz => rotation(&embed(n, &[(q, z.clone()), (qubits[1], z)]), theta),
    }
}

/// Product of the full `2ⁿ × 2ⁿ` gate matrices, last gate leftmost.
pub fn dense_unitary(circuit: &Circuit, params: &[f64]) -> DMatrix<Complex64> {
    let n = circuit.n_qubits();
    let mut u = identity(1 << n);
    for g in circuit.gates() {
        let theta = match g.angle {
            qwgan::sim::Angle::None => 0.0,
            qwgan::sim::Angle::Fixed(t) => t,
            qwgan::sim::Angle::Param(i) => params[i],
        };
        u = gate_matrix(n, g.kind, &g.qubits, theta) * u;
    }
    u
}

pub fn dense_output(circuit: &Circuit, params: &[f64]) -> DVector<Complex64> {
    dense_unitary(circuit, params).column(0).into_owned()
}

/// Random circuit over every gate kind; about a third of the rotations are
/// bound to fixed angles, the rest read shared parameters.
pub fn random_circuit<R: Rng>(rng: &mut R, n: usize, depth: usize) -> (Circuit, Vec<f64>) {
    let n_params = rng.random_range(1..=8);
    let mut circuit = Circuit::new(n, n_params).unwrap();
    let mut qubits: Vec<usize> = (1..=n).collect();
    for _ in 0..depth {
        let kind = loop {
            let k = ALL_GATES[rng.random_range(0..ALL_GATES.len())];
            if k.arity() <= n {
                break k;
            }
        };
        qubits.shuffle(rng);
        let on = &qubits[..kind.arity()];
        let gate = if !kind.is_rotation() {
            GateOp::fixed(kind, on)
        } else if rng.random_bool(0.3) {
            GateOp::bound(kind, on, rng.random_range(-7.0..7.0))
        } else {
            GateOp::param(kind, on, rng.random_range(0..n_params))
        };
        circuit.push(gate.unwrap()).unwrap();
    }
    let params = (0..n_params).map(|_| rng.random_range(-7.0..7.0)).collect();
    (circuit, params)
}

/// `max cᵀx s.t. Ax ≤ b, x ≥ 0` by enumerating every basis of `[A | I]` and
/// keeping the feasible ones.
pub fn lp_brute_force(cost: &[f64], a: &[Vec<f64>], b: &[f64]) -> f64 {
    let m = a.len();
    let cols = cost.len();
    let width = cols + m;
    let column = |j: usize| -> DVector<f64> {
        DVector::from_iterator(m, (0..m).map(|i| if j < cols { a[i][j] } else if j - cols == i { 1.0 } else { 0.0 }))
    };
    let rhs = DVector::from_column_slice(b);
    let mut best = f64::NEG_INFINITY;
    let mut basis: Vec<usize> = (0..m).collect();
    loop {
        let mut bm = DMatrix::zeros(m, m);
        for (k, &j) in basis.iter().enumerate() {
            bm.set_column(k, &column(j));
        }
        if let Some(x) = bm.clone().lu().solve(&rhs) {
            let consistent = (&bm * &x - &rhs).amax() < 1e-9;
            if consistent && x.iter().all(|&v| v >= -1e-12) {
                let value: f64 = basis.iter().zip(x.iter()).filter(|(&j, _)| j < cols).map(|(&j, &v)| cost[j] * v).sum();
                best = best.max(value);
            }
        }
        // Next m-combination of 0..width in lexicographic order.
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if basis[i] < width - m + i {
                break;
            }
        }
        basis[i] += 1;
        for k in i + 1..m {
            basis[k] = basis[k - 1] + 1;
        }
    }
}

/// `Tr|ρ − σ| / 2` through the eigenvalues of the Hermitian difference.
pub fn trace_distance(rho: &DMatrix<Complex64>, sigma: &DMatrix<Complex64>) -> f64 {
    let d = rho - sigma;
    0.5 * d.symmetric_eigenvalues().iter().map(|v| v.abs()).sum::<f64>()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `‖a − b‖₂ / ‖b‖₂`, with the denominator floored at `1e-8`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / norm.max(1e-8)
}

/// Largest elementwise gap between the simulator and the dense oracle over
/// `count` random circuits (n ≤ 6, depth ≤ 40).
pub fn simulator_vs_oracle<R: Rng>(rng: &mut R, count: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let n = rng.random_range(1..=6);
        let depth = rng.random_range(1..=40);
        let (circuit, params) = random_circuit(rng, n, depth);
        let fast = circuit.run_from_zero(&params).unwrap();
        let dense = dense_output(&circuit, &params);
        for (a, b) in fast.amplitudes().iter().zip(dense.iter()) {
            worst = worst.max((a.re - b.re).abs()).max((a.im - b.im).abs());
        }
    }
    worst
}

fn dense_expectation(state: &DVector<Complex64>, op: &DMatrix<Complex64>) -> f64 {
    (state.adjoint() * op * state)[(0, 0)].re
}

/// Worst relative error of the generator loss gradients (angles and logits)
/// against central differences of a dense-matrix loss, over `count` random
/// mixtures, witnesses and targets.
pub fn generator_gradient_suite<R: Rng>(rng: &mut R, count: usize, h: f64) -> f64 {
    use qwgan::discriminator::DualWitness;
    use qwgan::observables::{ExpectationVector, ObservableSet};
    use qwgan::trainer::{loss_and_grads, softmax, MixtureGenerator};
    use std::collections::BTreeMap;

    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let n = rng.random_range(1..=4);
        let k = rng.random_range(1..=n.min(3));
        let set = ObservableSet::enumerate(n, k).unwrap();
        let depth = rng.random_range(1..=20);
        let (circuit, _) = random_circuit(rng, n, depth);
        let rank = rng.random_range(1..=3);
        let thetas: Vec<Vec<f64>> =
            (0..rank).map(|_| (0..circuit.n_params()).map(|_| rng.random_range(-3.2..3.2)).collect()).collect();
        let logits: Vec<f64> = (0..rank).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut weights = BTreeMap::new();
        for _ in 0..rng.random_range(1..=n) {
            weights.insert(rng.random_range(0..set.len()), rng.random_range(-1.0..1.0));
        }
        let witness = DualWitness { weights, value: 0.0, iterations: 0 };
        let target =
            ExpectationVector::new(&set, (0..set.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();

        let h_op: DMatrix<Complex64> = witness
            .weights
            .iter()
            .map(|(&i, &w)| pauli_string_matrix(&set.strings()[i]) * c(w, 0.0))
            .fold(DMatrix::zeros(1 << n, 1 << n), |acc, m| acc + m);
        let target_term: f64 = witness.weights.iter().map(|(&i, &w)| w * target.values()[i]).sum();
        let loss = |th: &[Vec<f64>], lg: &[f64]| -> f64 {
            let p = softmax(lg);
            target_term
                - th.iter().zip(&p).map(|(t, pb)| pb * dense_expectation(&dense_output(&circuit, t), &h_op)).sum::<f64>()
        };

        let gen = MixtureGenerator::with_circuit(circuit.clone(), thetas.clone(), logits.clone()).unwrap();
        let g = loss_and_grads(&gen, &witness, &target, &set).unwrap();
        assert!((g.loss - loss(&thetas, &logits)).abs() < 1e-10, "loss value disagrees with the dense oracle");

        let mut analytic = Vec::new();
        let mut numeric = Vec::new();
        for b in 0..rank {
            for j in 0..circuit.n_params() {
                let (mut up, mut down) = (thetas.clone(), thetas.clone());
                up[b][j] += h;
                down[b][j] -= h;
                analytic.push(g.d_thetas[b][j]);
                numeric.push((loss(&up, &logits) - loss(&down, &logits)) / (2.0 * h));
            }
            let (mut up, mut down) = (logits.clone(), logits.clone());
            up[b] += h;
            down[b] -= h;
            analytic.push(g.d_logits[b]);
            numeric.push((loss(&thetas, &up) - loss(&thetas, &down)) / (2.0 * h));
        }
        // A witness can be orthogonal to everything the circuit reaches.
        if numeric.iter().any(|v| v.abs() > 1e-6) {
            worst = worst.max(rel_err(&analytic, &numeric));
        }
    }
    worst
}

/// Outcome of the LP comparison.
#[derive(Debug, Default, Clone, Copy)]
pub struct LpReport {
    pub instances: usize,
    /// Largest `|simplex − brute force|`.
    pub value_err: f64,
    /// Largest `nnz − n` (≤ 0 when every witness is sparse enough).
    pub nnz_excess: isize,
    /// Largest per-qubit `Σ|wᵢ|`.
    pub max_load: f64,
}

/// Random LPs with up to 3 qubits and at most 12 observables. Half use a
/// full observable set through `estimate_w1`-style assembly, half a random
/// subset of strings solved by the raw simplex.
pub fn lp_suite<R: Rng>(rng: &mut R, count: usize) -> LpReport {
    use qwgan::discriminator::{build_lp, simplex, simplex_solve};
    use qwgan::observables::ObservableSet;

    let mut report = LpReport { instances: count, nnz_excess: isize::MIN, ..Default::default() };
    for t in 0..count {
        let n = rng.random_range(1..=3);
        if t % 2 == 0 {
            // Full sets with |H| ≤ 12: k = 1 for n ≤ 3.
            let set = ObservableSet::enumerate(n, 1).unwrap();
            let cost: Vec<f64> = (0..set.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let lp = build_lp(&cost, &set).unwrap();
            let w = simplex_solve(&lp).unwrap();
            let brute = lp_brute_force(lp.objective(), &lp.matrix(), &lp.rhs());
            report.value_err = report.value_err.max((w.value - brute).abs());
            report.nnz_excess = report.nnz_excess.max(w.nnz() as isize - n as isize);
            report.max_load = report.max_load.max(w.max_qubit_load(&set));
        } else {
            let full = ObservableSet::enumerate(n, n).unwrap();
            let mut idx: Vec<usize> = (0..full.len()).collect();
            idx.shuffle(rng);
            idx.truncate(rng.random_range(1..=12.min(full.len())));
            let strings: Vec<&PauliString> = idx.iter().map(|&i| &full.strings()[i]).collect();
            let c_orig: Vec<f64> = strings.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
            let cost: Vec<f64> = c_orig.iter().flat_map(|&v| [v, -v]).collect();
            let a: Vec<Vec<f64>> = (1..=n)
                .map(|q| strings.iter().flat_map(|s| if s.acts_on(q) { [1.0, 1.0] } else { [0.0, 0.0] }).collect())
                .collect();
            let b = vec![1.0; n];
            let sol = simplex::maximize(&cost, &a, &b).unwrap();
            let brute = lp_brute_force(&cost, &a, &b);
            report.value_err = report.value_err.max((sol.objective - brute).abs());
            let w: Vec<f64> = sol.x.chunks_exact(2).map(|p| p[0] - p[1]).collect();
            let nnz = w.iter().filter(|v| v.abs() > 1e-12).count();
            report.nnz_excess = report.nnz_excess.max(nnz as isize - n as isize);
            for q in 1..=n {
                let load: f64 = strings.iter().zip(&w).filter(|(s, _)| s.acts_on(q)).map(|(_, v)| v.abs()).sum();
                report.max_load = report.max_load.max(load);
            }
        }
    }
    report
}

/// Outcome of the estimator sanity checks on random state pairs.
#[derive(Debug, Default, Clone, Copy)]
pub struct W1Report {
    /// Largest `|W1(a, b) − W1(b, a)|`.
    pub asymmetry: f64,
    /// Largest `W1 − 2n·trace_distance` (≤ 0 when the bound holds).
    pub bound_excess: f64,
    /// Smallest W1 between distinct states.
    pub min_distinct: f64,
    /// Largest W1 of a state against itself.
    pub max_self: f64,
}

fn random_mixture<R: Rng>(rng: &mut R, circuit: &Circuit) -> (Vec<(f64, Vec<f64>)>, DMatrix<Complex64>) {
    let rank = rng.random_range(1..=2);
    let raw: Vec<f64> = (0..rank).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let dim = 1 << circuit.n_qubits();
    let mut rho = DMatrix::zeros(dim, dim);
    let mut branches = Vec::new();
    for p in raw {
        let params: Vec<f64> = (0..circuit.n_params()).map(|_| rng.random_range(-3.2..3.2)).collect();
        let psi = dense_output(circuit, &params);
        rho += &psi * psi.adjoint() * c(p / total, 0.0);
        branches.push((p / total, params));
    }
    (branches, rho)
}

/// W1 sanity over `count` random pairs of mixtures with `n ≤ 4`, `k = n`.
pub fn w1_suite<R: Rng>(rng: &mut R, count: usize) -> W1Report {
    use qwgan::discriminator::estimate_w1;
    use qwgan::observables::ObservableSet;
    use qwgan::sim::MixtureState;

    let mut report = W1Report { min_distinct: f64::INFINITY, ..Default::default() };
    for _ in 0..count {
        let n = rng.random_range(1..=4);
        let set = ObservableSet::enumerate(n, n).unwrap();
        let depth = rng.random_range(4..=20);
        let (circuit, _) = random_circuit(rng, n, depth);
        let mut vectors = Vec::new();
        let mut rhos = Vec::new();
        for _ in 0..2 {
            let (branches, rho) = random_mixture(rng, &circuit);
            let mix = MixtureState::new(
                branches.iter().map(|(p, th)| (*p, circuit.run_from_zero(th).unwrap())).collect(),
            )
            .unwrap();
            vectors.push(set.expectation_vector(&mix).unwrap());
            rhos.push(rho);
        }
        let ab = estimate_w1(&vectors[0], &vectors[1], &set).unwrap().value;
        let ba = estimate_w1(&vectors[1], &vectors[0], &set).unwrap().value;
        let aa = estimate_w1(&vectors[0], &vectors[0], &set).unwrap().value;
        let td = trace_distance(&rhos[0], &rhos[1]);
        report.asymmetry = report.asymmetry.max((ab - ba).abs());
        report.bound_excess = report.bound_excess.max(ab - 2.0 * n as f64 * td);
        report.max_self = report.max_self.max(aa);
        if td > 1e-6 {
            report.min_distinct = report.min_distinct.min(ab);
        }
    }
    report
}

/// Plain nested-vector copy of a network: `(weights[l][out][in], biases[l][out], tanh output)`.
type Net = (Vec<Vec<Vec<f64>>>, Vec<Vec<f64>>, bool);

fn to_net(m: &qwgan::wgan::Mlp) -> Net {
    let ws = m.weights().iter().map(|w| w.outer_iter().map(|r| r.to_vec()).collect()).collect();
    let bs = m.biases().iter().map(|b| b.to_vec()).collect();
    (ws, bs, m.output_activation() == qwgan::wgan::OutputActivation::Tanh)
}

fn leaky(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.2 * v
    }
}

/// Pre-activations of every layer.
fn net_pre(net: &Net, x: &[f64]) -> Vec<Vec<f64>> {
    let mut pre = Vec::new();
    let mut a = x.to_vec();
    for (l, (w, b)) in net.0.iter().zip(&net.1).enumerate() {
        let z: Vec<f64> = w.iter().zip(b).map(|(row, bi)| row.iter().zip(&a).map(|(p, q)| p * q).sum::<f64>() + bi).collect();
        a = if l + 1 < net.0.len() { z.iter().map(|&v| leaky(v)).collect() } else { z.clone() };
        pre.push(z);
    }
    pre
}

fn net_forward(net: &Net, x: &[f64]) -> Vec<f64> {
    let out = net_pre(net, x).pop().unwrap();
    if net.2 {
        out.into_iter().map(f64::tanh).collect()
    } else {
        out
    }
}

/// `∇ₓ D(x)` of a scalar identity-output critic.
fn critic_input_grad(net: &Net, x: &[f64]) -> Vec<f64> {
    let pre = net_pre(net, x);
    let mut g = vec![1.0];
    for l in (0..net.0.len()).rev() {
        let w = &net.0[l];
        let mut next = vec![0.0; w[0].len()];
        for (row, gi) in w.iter().zip(&g) {
            for (nj, wij) in next.iter_mut().zip(row) {
                *nj += wij * gi;
            }
        }
        if l > 0 {
            for (nj, z) in next.iter_mut().zip(&pre[l - 1]) {
                *nj *= if *z > 0.0 { 1.0 } else { 0.2 };
            }
        }
        g = next;
    }
    g
}

/// Whether any hidden pre-activation of `net` on `xs` lies within `margin`
/// of the kink at zero, where finite differences straddle a jump.
fn near_kink(net: &Net, xs: &[Vec<f64>], margin: f64) -> bool {
    xs.iter().any(|x| {
        let pre = net_pre(net, x);
        pre[..pre.len() - 1].iter().flatten().any(|z| z.abs() < margin)
    })
}

fn rows(a: &ndarray::Array2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

fn oracle_penalty(critic: &Net, real: &[Vec<f64>], fake: &[Vec<f64>], eps: &[f64], lambda: f64) -> f64 {
    let b = real.len() as f64;
    real.iter()
        .zip(fake)
        .zip(eps)
        .map(|((r, f), e)| {
            let xh: Vec<f64> = r.iter().zip(f).map(|(a, c)| e * a + (1.0 - e) * c).collect();
            let norm = critic_input_grad(critic, &xh).iter().map(|v| v * v).sum::<f64>().sqrt();
            lambda * (norm - 1.0).powi(2)
        })
        .sum::<f64>()
        / b
}

fn oracle_critic_total(critic: &Net, real: &[Vec<f64>], fake: &[Vec<f64>], eps: &[f64], lambda: f64) -> f64 {
    let mean = |xs: &[Vec<f64>]| xs.iter().map(|x| net_forward(critic, x)[0]).sum::<f64>() / xs.len() as f64;
    oracle_penalty(critic, real, fake, eps, lambda) - (mean(real) - mean(fake))
}

fn oracle_generator_loss(gen: &Net, critic: &Net, z: &[Vec<f64>]) -> f64 {
    -z.iter().map(|zi| net_forward(critic, &net_forward(gen, zi))[0]).sum::<f64>() / z.len() as f64
}

/// Central differences of `f` over every weight and bias of `net`, flattened
/// in the same order as [`flatten_grads`].
fn fd_over(net: &Net, h: f64, f: impl Fn(&Net) -> f64) -> Vec<f64> {
    let mut out = Vec::new();
    for l in 0..net.0.len() {
        for i in 0..net.0[l].len() {
            for j in 0..net.0[l][i].len() {
                let (mut up, mut down) = (net.clone(), net.clone());
                up.0[l][i][j] += h;
                down.0[l][i][j] -= h;
                out.push((f(&up) - f(&down)) / (2.0 * h));
            }
        }
        for i in 0..net.1[l].len() {
            let (mut up, mut down) = (net.clone(), net.clone());
            up.1[l][i] += h;
            down.1[l][i] -= h;
            out.push((f(&up) - f(&down)) / (2.0 * h));
        }
    }
    out
}

fn flatten_grads(g: &qwgan::wgan::MlpGrads) -> Vec<f64> {
    g.weights.iter().zip(&g.biases).flat_map(|(w, b)| w.iter().chain(b.iter()).copied().collect::<Vec<_>>()).collect()
}

/// Worst relative error of the penalty, critic-loss and generator-loss
/// gradients against central differences of the dense re-implementation, on
/// random toy networks with 4-dimensional data. Also returns the largest gap
/// in the penalty value itself.
pub fn wgan_gradient_suite<R: Rng>(rng: &mut R, count: usize, h: f64) -> (f64, f64) {
    use qwgan::wgan::{critic_loss_and_grads, generator_loss_and_grads, gradient_penalty_with, Mlp, OutputActivation};

    let (mut worst, mut value_gap) = (0.0f64, 0.0f64);
    let mut done = 0;
    while done < count {
        let (dim, latent, batch) = (4, 3, rng.random_range(1..=6));
        let critic = Mlp::random(&[dim, 6, 5, 1], OutputActivation::Identity, rng).unwrap();
        let gen = Mlp::random(&[latent, 5, 6, dim], OutputActivation::Tanh, rng).unwrap();
        let real = ndarray::Array2::from_shape_simple_fn((batch, dim), || rng.random_range(-1.0..1.0));
        let fake = ndarray::Array2::from_shape_simple_fn((batch, dim), || rng.random_range(-1.0..1.0));
        let z = ndarray::Array2::from_shape_simple_fn((batch, latent), || rng.random_range(-1.5..1.5));
        let eps: Vec<f64> = (0..batch).map(|_| rng.random::<f64>()).collect();
        let lambda = 10.0;
        let (cn, gn, rr, ff, zz) = (to_net(&critic), to_net(&gen), rows(&real), rows(&fake), rows(&z));
        let hats: Vec<Vec<f64>> = rr
            .iter()
            .zip(&ff)
            .zip(&eps)
            .map(|((r, f), e)| r.iter().zip(f).map(|(a, b)| e * a + (1.0 - e) * b).collect())
            .collect();
        let gen_out: Vec<Vec<f64>> = zz.iter().map(|zi| net_forward(&gn, zi)).collect();
        let critic_inputs: Vec<Vec<f64>> = [rr.clone(), ff.clone(), hats, gen_out].concat();
        if near_kink(&cn, &critic_inputs, 1e-3) || near_kink(&gn, &zz, 1e-3) {
            continue;
        }
        done += 1;

        let (penalty, pg) = gradient_penalty_with(&critic, &real, &fake, &eps, lambda).unwrap();
        value_gap = value_gap.max((penalty - oracle_penalty(&cn, &rr, &ff, &eps, lambda)).abs());
        let fd = fd_over(&cn, h, |n| oracle_penalty(n, &rr, &ff, &eps, lambda));
        worst = worst.max(rel_err(&flatten_grads(&pg), &fd));

        let (_, cg) = critic_loss_and_grads(&critic, &real, &fake, &eps, lambda).unwrap();
        let fd = fd_over(&cn, h, |n| oracle_critic_total(n, &rr, &ff, &eps, lambda));
        worst = worst.max(rel_err(&flatten_grads(&cg), &fd));

        let (_, gg) = generator_loss_and_grads(&gen, &critic, &z).unwrap();
        let fd = fd_over(&gn, h, |n| oracle_generator_loss(n, &cn, &zz));
        worst = worst.max(rel_err(&flatten_grads(&gg), &fd));
    }
    (worst, value_gap)
}
