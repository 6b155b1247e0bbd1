//! Dense multi-layer perceptron in f64: tanh hidden layers, optional
//! sigmoid output head, exact reverse-mode gradients.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use morph_core::{MorphError, Result};

/// Output nonlinearity of the last layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    None,
    Sigmoid,
}

/// Weights and biases of a dense network. Hidden layers use tanh.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
    pub output_activation: OutputActivation,
}

/// Per-layer gradients shaped like [`MlpParams`].
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

/// Activations cached by a forward pass, consumed by backward.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Layer inputs: input vector followed by each hidden activation.
    layer_inputs: Vec<DVector<f64>>,
    /// Final output after the output activation.
    output: DVector<f64>,
}

impl ForwardCache {
    pub fn output(&self) -> &DVector<f64> {
        &self.output
    }
}

impl MlpParams {
    /// Zero-initialized network of the given layer sizes.
    pub fn zeros(layer_sizes: &[usize], output_activation: OutputActivation) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(MorphError::Structural(
                "network needs at least input and output sizes".into(),
            ));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(MorphError::Structural("zero-width layer".into()));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in layer_sizes.windows(2) {
            weights.push(DMatrix::zeros(w[1], w[0]));
            biases.push(DVector::zeros(w[1]));
        }
        Ok(MlpParams {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            output_activation,
        })
    }

    /// Seeded scaled-uniform init (Glorot bound times `gain`); the final
    /// layer takes `final_gain` so policy heads can start near zero.
    pub fn init(
        layer_sizes: &[usize],
        output_activation: OutputActivation,
        gain: f64,
        final_gain: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut params = Self::zeros(layer_sizes, output_activation)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = params.weights.len() - 1;
        for (li, w) in params.weights.iter_mut().enumerate() {
            let g = if li == last { final_gain } else { gain };
            let bound = g * (6.0 / (w.nrows() + w.ncols()) as f64).sqrt();
            for v in w.iter_mut() {
                *v = rng.gen_range(-bound..bound);
            }
        }
        Ok(params)
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn zeros_like_grads(&self) -> MlpGrads {
        MlpGrads {
            weights: self.weights.iter().map(|w| DMatrix::zeros(w.nrows(), w.ncols())).collect(),
            biases: self.biases.iter().map(|b| DVector::zeros(b.len())).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    /// Affine + tanh composition; caches layer inputs for backward.
    pub fn forward(&self, input: &DVector<f64>) -> Result<ForwardCache> {
        if input.len() != self.input_dim() {
            return Err(MorphError::Structural(format!(
                "input length {} != first layer size {}",
                input.len(),
                self.input_dim()
            )));
        }
        let n_layers = self.weights.len();
        let mut layer_inputs = Vec::with_capacity(n_layers);
        let mut x = input.clone();
        for (li, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            layer_inputs.push(x.clone());
            let mut z = w * &x + b;
            if li + 1 < n_layers {
                z.apply(|v| *v = v.tanh());
            } else if self.output_activation == OutputActivation::Sigmoid {
                z.apply(|v| *v = 1.0 / (1.0 + (-*v).exp()));
            }
            x = z;
        }
        Ok(ForwardCache {
            layer_inputs,
            output: x,
        })
    }

    /// Convenience forward without keeping the cache.
    pub fn infer(&self, input: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.forward(input)?.output)
    }

    /// Exact reverse-mode gradients of the forward map. `output_grad` is
    /// dL/d(output); accumulates into `grads` and returns dL/d(input).
    pub fn backward(
        &self,
        cache: &ForwardCache,
        output_grad: &DVector<f64>,
        grads: &mut MlpGrads,
    ) -> Result<DVector<f64>> {
        if cache.layer_inputs.len() != self.weights.len() {
            return Err(MorphError::Structural(
                "forward cache does not match this network".into(),
            ));
        }
        if output_grad.len() != self.output_dim() {
            return Err(MorphError::Structural(format!(
                "output grad length {} != output size {}",
                output_grad.len(),
                self.output_dim()
            )));
        }
        let n_layers = self.weights.len();
        // Delta at the last layer's pre-activation.
        let mut delta = match self.output_activation {
            OutputActivation::None => output_grad.clone(),
            OutputActivation::Sigmoid => {
                let y = &cache.output;
                DVector::from_fn(y.len(), |i, _| output_grad[i] * y[i] * (1.0 - y[i]))
            }
        };
        for li in (0..n_layers).rev() {
            let x = &cache.layer_inputs[li];
            // dW = delta * x^T, db = delta.
            grads.weights[li].ger(1.0, &delta, x, 1.0);
            grads.biases[li] += &delta;
            if li == 0 {
                return Ok(self.weights[0].tr_mul(&delta));
            }
            let upstream = self.weights[li].tr_mul(&delta);
            // The input of layer li is tanh(z_{li-1}); tanh' = 1 - tanh².
            delta = DVector::from_fn(upstream.len(), |i, _| upstream[i] * (1.0 - x[i] * x[i]));
        }
        unreachable!("loop returns at li == 0");
    }
}

impl MlpGrads {
    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            *w *= factor;
        }
        for b in &mut self.biases {
            *b *= factor;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    pub fn zero(&mut self) {
        for w in &mut self.weights {
            w.fill(0.0);
        }
        for b in &mut self.biases {
            b.fill(0.0);
        }
    }
}
