//! Small dense multilayer perceptron with tanh hidden units, a linear output
//! layer, manual backpropagation and an Adam optimizer.
//!
//! Weights are stored input-major (`w[k * out + o]`) so the forward pass and
//! the weight gradient are contiguous axpy loops.

use rand::Rng;

use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn new(inputs: usize, outputs: usize, rng: &mut RngStream) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        let weights = (0..inputs * outputs)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        let bias = (0..outputs).map(|_| rng.gen_range(-bound..bound)).collect();
        Self {
            inputs,
            outputs,
            weights,
            bias,
        }
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

/// Activations kept from a batched forward pass, needed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    batch: usize,
    /// `activations[0]` is the input, `activations[l + 1]` the output of layer `l`.
    activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations
            .last()
            .expect("cache holds at least the input")
    }

    pub fn batch(&self) -> usize {
        self.batch
    }
}

/// Gradients with the same layout as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in &self.layers {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4 * 4;
    for (ca, cb) in a[..chunks].chunks_exact(4).zip(b[..chunks].chunks_exact(4)) {
        for l in 0..4 {
            acc[l] += ca[l] * cb[l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in a[chunks..].iter().zip(&b[chunks..]) {
        s += x * y;
    }
    s
}

impl Mlp {
    /// `sizes` = `[inputs, hidden..., outputs]`; uniform fan-in initialization.
    pub fn new(sizes: &[usize], rng: &mut RngStream) -> Self {
        assert!(
            sizes.len() >= 2,
            "an MLP needs at least input and output sizes"
        );
        let layers = sizes
            .windows(2)
            .map(|w| Layer::new(w[0], w[1], rng))
            .collect();
        Self { layers }
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn outputs(&self) -> usize {
        self.layers.last().unwrap().outputs
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count());
        let mut offset = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&params[offset..offset + nw]);
            offset += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&params[offset..offset + nb]);
            offset += nb;
        }
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    /// Forward pass over `batch` row-major inputs, keeping activations.
    pub fn forward_batch(&self, input: &[f64], batch: usize) -> ForwardCache {
        debug_assert_eq!(input.len(), batch * self.inputs());
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.to_vec());
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let x = activations.last().unwrap();
            let mut y = vec![0.0; batch * layer.outputs];
            for b in 0..batch {
                let row = &mut y[b * layer.outputs..(b + 1) * layer.outputs];
                row.copy_from_slice(&layer.bias);
                let xin = &x[b * layer.inputs..(b + 1) * layer.inputs];
                for (k, &xv) in xin.iter().enumerate() {
                    axpy(
                        row,
                        xv,
                        &layer.weights[k * layer.outputs..(k + 1) * layer.outputs],
                    );
                }
                if li != last {
                    for v in row.iter_mut() {
                        *v = v.tanh();
                    }
                }
            }
            activations.push(y);
        }
        ForwardCache { batch, activations }
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        let mut cache = self.forward_batch(input, 1);
        cache.activations.pop().unwrap()
    }

    /// Backpropagates `grad_output` (dL/d output, `batch x outputs`).
    /// Returns parameter gradients and dL/d input.
    pub fn backward(&self, cache: &ForwardCache, grad_output: &[f64]) -> (Gradients, Vec<f64>) {
        let batch = cache.batch;
        let n = self.layers.len();
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> = self
            .layers
            .iter()
            .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
            .collect();
        let mut delta = grad_output.to_vec();
        for li in (0..n).rev() {
            let layer = &self.layers[li];
            let out_act = &cache.activations[li + 1];
            if li != n - 1 {
                // tanh' = 1 - y^2
                for (d, y) in delta.iter_mut().zip(out_act) {
                    *d *= 1.0 - y * y;
                }
            }
            let x = &cache.activations[li];
            let (gw, gb) = &mut grads[li];
            let mut next = vec![0.0; batch * layer.inputs];
            for b in 0..batch {
                let d = &delta[b * layer.outputs..(b + 1) * layer.outputs];
                axpy(gb, 1.0, d);
                let xin = &x[b * layer.inputs..(b + 1) * layer.inputs];
                let dx = &mut next[b * layer.inputs..(b + 1) * layer.inputs];
                for k in 0..layer.inputs {
                    let wrow = &layer.weights[k * layer.outputs..(k + 1) * layer.outputs];
                    axpy(
                        &mut gw[k * layer.outputs..(k + 1) * layer.outputs],
                        xin[k],
                        d,
                    );
                    dx[k] = dot(wrow, d);
                }
            }
            delta = next;
        }
        (Gradients { layers: grads }, delta)
    }

    /// `self <- (1 - rate) * self + rate * other`.
    pub fn soft_update_from(&mut self, other: &Mlp, rate: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weights.iter_mut().zip(&b.weights) {
                *x = (1.0 - rate) * *x + rate * y;
            }
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x = (1.0 - rate) * *x + rate * y;
            }
        }
    }
}

/// Adam with the usual defaults for the moment decay rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(learning_rate: f64, params: usize) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; params],
            v: vec![0.0; params],
        }
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let lr = self.learning_rate;
        let mut offset = 0;
        for (layer, (gw, gb)) in net.layers.iter_mut().zip(&grads.layers) {
            for (p, g) in layer
                .weights
                .iter_mut()
                .zip(gw)
                .chain(layer.bias.iter_mut().zip(gb))
            {
                let m = &mut self.m[offset];
                let v = &mut self.v[offset];
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                let mhat = *m / bc1;
                let vhat = *v / bc2;
                *p -= lr * mhat / (vhat.sqrt() + self.eps);
                offset += 1;
            }
        }
    }
}
