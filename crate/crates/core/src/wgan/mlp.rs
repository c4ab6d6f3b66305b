//! Fully connected networks with leaky-rectifier hidden layers.
//!
//! Batches are row-major: one sample per row. Layer `l` maps
//! `a ↦ φ(a Wₗᵀ + bₗ)` with `Wₗ` of shape `out × in`.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Tanh,
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
    output: OutputActivation,
}

/// Per-layer parameter gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl MlpGrads {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            weights: net.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: net.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &MlpGrads) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            *a += b;
        }
    }
}

/// Values kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Layer inputs `a₀ … a_{L−1}`.
    inputs: Vec<Array2<f64>>,
    /// Activation slopes of the hidden layers.
    slopes: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

impl ForwardCache {
    /// Activation slopes of hidden layer `l`.
    pub fn slopes(&self, l: usize) -> &Array2<f64> {
        &self.slopes[l]
    }
}

fn leaky(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        LEAKY_SLOPE * z
    }
}

fn leaky_slope(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else {
        LEAKY_SLOPE
    }
}

impl Mlp {
    pub fn new(weights: Vec<Array2<f64>>, biases: Vec<Array1<f64>>, output: OutputActivation) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(invalid("a network needs matching, non-empty weight and bias lists"));
        }
        for (l, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.nrows() != b.len() || w.nrows() == 0 || w.ncols() == 0 {
                return Err(Error::DimensionMismatch(format!("layer {l}: weight {:?}, bias {}", w.shape(), b.len())));
            }
            if l > 0 && weights[l - 1].nrows() != w.ncols() {
                return Err(Error::DimensionMismatch(format!("layer {l} input does not match layer {}", l - 1)));
            }
        }
        if weights.iter().flatten().chain(biases.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite network parameter".into()));
        }
        Ok(Self { weights, biases, output })
    }

    /// Weights uniform on `±1/√fan_in`, biases zero.
    pub fn random<R: Rng + ?Sized>(sizes: &[usize], output: OutputActivation, rng: &mut R) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(invalid(format!("invalid layer sizes {sizes:?}")));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            weights.push(Array2::from_shape_simple_fn((fan_out, fan_in), || rng.random_range(-bound..bound)));
            biases.push(Array1::zeros(fan_out));
        }
        Self::new(weights, biases, output)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.weights[0].ncols()];
        s.extend(self.weights.iter().map(|w| w.nrows()));
        s
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights[self.weights.len() - 1].nrows()
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [Array2<f64>], &mut [Array1<f64>]) {
        (&mut self.weights, &mut self.biases)
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "batch width {} for network input {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> Result<ForwardCache> {
        self.check_input(&x)?;
        let last = self.weights.len() - 1;
        let mut inputs = Vec::with_capacity(self.weights.len());
        let mut slopes = Vec::with_capacity(last);
        let mut a = x.to_owned();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let z = a.dot(&w.t()) + b;
            inputs.push(a);
            a = if l < last {
                slopes.push(z.mapv(leaky_slope));
                z.mapv(leaky)
            } else {
                match self.output {
                    OutputActivation::Tanh => z.mapv(f64::tanh),
                    OutputActivation::Identity => z,
                }
            };
        }
        Ok(ForwardCache { inputs, slopes, output: a })
    }

    /// Output rows for input rows.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward_cached(x)?.output)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let batch = ArrayView2::from_shape((1, x.len()), x).map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        Ok(self.forward_batch(batch)?.into_raw_vec_and_offset().0)
    }

    /// Backpropagates `grad_out = ∂L/∂output` and returns the parameter
    /// gradients and `∂L/∂input`.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &Array2<f64>) -> (MlpGrads, Array2<f64>) {
        let mut delta = match self.output {
            OutputActivation::Tanh => grad_out * &cache.output.mapv(|y| 1.0 - y * y),
            OutputActivation::Identity => grad_out.clone(),
        };
        let mut grads = MlpGrads::zeros_like(self);
        for l in (0..self.weights.len()).rev() {
            grads.weights[l] = delta.t().dot(&cache.inputs[l]);
            grads.biases[l] = delta.sum_axis(Axis(0));
            let grad_in = delta.dot(&self.weights[l]);
            if l == 0 {
                return (grads, grad_in);
            }
            delta = grad_in * &cache.slopes[l - 1];
        }
        unreachable!("network has at least one layer")
    }
}

/// Serialised form: layer sizes plus row-major weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpFile {
    pub sizes: Vec<usize>,
    pub hidden_activation: String,
    pub hidden_slope: f64,
    pub output_activation: OutputActivation,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl From<&Mlp> for MlpFile {
    fn from(net: &Mlp) -> Self {
        Self {
            sizes: net.sizes(),
            hidden_activation: "leaky_relu".into(),
            hidden_slope: LEAKY_SLOPE,
            output_activation: net.output,
            weights: net.weights.iter().map(|w| w.iter().copied().collect()).collect(),
            biases: net.biases.iter().map(|b| b.to_vec()).collect(),
        }
    }
}

impl TryFrom<MlpFile> for Mlp {
    type Error = Error;

    fn try_from(f: MlpFile) -> Result<Self> {
        if f.hidden_activation != "leaky_relu" || f.hidden_slope != LEAKY_SLOPE {
            return Err(Error::Parse(format!("unsupported hidden activation {} ({})", f.hidden_activation, f.hidden_slope)));
        }
        if f.sizes.len() < 2 || f.weights.len() != f.sizes.len() - 1 || f.biases.len() != f.weights.len() {
            return Err(Error::Parse("layer count does not match sizes".into()));
        }
        let weights = f
            .weights
            .into_iter()
            .zip(f.sizes.windows(2))
            .map(|(w, s)| Array2::from_shape_vec((s[1], s[0]), w).map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let biases = f.biases.into_iter().map(Array1::from_vec).collect();
        Mlp::new(weights, biases, f.output_activation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn toy(seed: u64, output: OutputActivation) -> Mlp {
        let mut net = Mlp::random(&[4, 5, 3, 2], output, &mut crate::rng::seeded(seed, 0)).unwrap();
        let mut r = crate::rng::seeded(seed, 1);
        for b in net.params_mut().1 {
            b.mapv_inplace(|_| r.random_range(-0.3..0.3));
        }
        net
    }

    #[test]
    fn zero_network_outputs_zero() {
        let w = vec![Array2::zeros((3, 2)), Array2::zeros((2, 3))];
        let b = vec![Array1::zeros(3), Array1::zeros(2)];
        let net = Mlp::new(w, b, OutputActivation::Tanh).unwrap();
        assert_eq!(net.forward(&[0.7, -2.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn linear_critic() {
        let net = Mlp::new(vec![array![[1.5]]], vec![array![0.0]], OutputActivation::Identity).unwrap();
        for x in [-2.0, 0.0, 0.25] {
            assert_eq!(net.forward(&[x]).unwrap(), vec![1.5 * x]);
        }
    }

    #[test]
    fn forward_matches_scalar_loops() {
        let net = toy(3, OutputActivation::Tanh);
        let x = [0.3, -0.8, 0.05, 1.2];
        let mut a = x.to_vec();
        for (l, (w, b)) in net.weights().iter().zip(net.biases()).enumerate() {
            let mut z = vec![0.0; w.nrows()];
            for i in 0..w.nrows() {
                z[i] = b[i];
                for j in 0..w.ncols() {
                    z[i] += w[[i, j]] * a[j];
                }
            }
            a = if l + 1 < net.weights().len() { z.into_iter().map(leaky).collect() } else { z.into_iter().map(f64::tanh).collect() };
        }
        for (p, q) in net.forward(&x).unwrap().iter().zip(&a) {
            assert!((p - q).abs() <= 1e-12);
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        for output in [OutputActivation::Tanh, OutputActivation::Identity] {
            let net = toy(5, output);
            let x = array![[0.3, -0.8, 0.05, 1.2], [-0.4, 0.1, 0.9, -0.2]];
            let coeff = array![[0.7, -1.1], [0.2, 0.5]];
            let loss = |n: &Mlp, x: &Array2<f64>| (n.forward_batch(x.view()).unwrap() * &coeff).sum();
            let cache = net.forward_cached(x.view()).unwrap();
            let (grads, gin) = net.backward(&cache, &coeff);
            let h = 1e-6;
            for l in 0..net.weights().len() {
                for idx in [(0, 0), (net.weights()[l].nrows() - 1, 1)] {
                    let mut p = net.clone();
                    p.params_mut().0[l][idx] += h;
                    let mut m = net.clone();
                    m.params_mut().0[l][idx] -= h;
                    let fd = (loss(&p, &x) - loss(&m, &x)) / (2.0 * h);
                    assert!((fd - grads.weights[l][idx]).abs() < 1e-7, "W{l}{idx:?}");
                }
                let mut p = net.clone();
                p.params_mut().1[l][0] += h;
                let mut m = net.clone();
                m.params_mut().1[l][0] -= h;
                let fd = (loss(&p, &x) - loss(&m, &x)) / (2.0 * h);
                assert!((fd - grads.biases[l][0]).abs() < 1e-7, "b{l}");
            }
            let mut xp = x.clone();
            xp[[1, 2]] += h;
            let mut xm = x.clone();
            xm[[1, 2]] -= h;
            let fd = (loss(&net, &xp) - loss(&net, &xm)) / (2.0 * h);
            assert!((fd - gin[[1, 2]]).abs() < 1e-7);
        }
    }

    #[test]
    fn model_file_round_trip() {
        let net = toy(9, OutputActivation::Tanh);
        let json = serde_json::to_string(&MlpFile::from(&net)).unwrap();
        let back = Mlp::try_from(serde_json::from_str::<MlpFile>(&json).unwrap()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn shape_errors() {
        assert!(Mlp::new(vec![Array2::zeros((2, 3))], vec![Array1::zeros(3)], OutputActivation::Identity).is_err());
        assert!(Mlp::new(
            vec![Array2::zeros((2, 3)), Array2::zeros((1, 3))],
            vec![Array1::zeros(2), Array1::zeros(1)],
            OutputActivation::Identity
        )
        .is_err());
        let net = toy(1, OutputActivation::Identity);
        assert!(net.forward(&[1.0, 2.0]).is_err());
    }
}
