//! Bias-corrected Adam over [`MlpParams`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use morph_core::{MorphError, Result};

use crate::mlp::{MlpGrads, MlpParams};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 4e-5,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_lr(learning_rate: f64) -> Self {
        AdamConfig {
            learning_rate,
            ..Default::default()
        }
    }
}

/// First/second moment buffers shaped like the parameters they update.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step_count: u64,
    m_weights: Vec<DMatrix<f64>>,
    v_weights: Vec<DMatrix<f64>>,
    m_biases: Vec<DVector<f64>>,
    v_biases: Vec<DVector<f64>>,
}

impl AdamState {
    pub fn new(params: &MlpParams, config: AdamConfig) -> Self {
        AdamState {
            config,
            step_count: 0,
            m_weights: params
                .weights
                .iter()
                .map(|w| DMatrix::zeros(w.nrows(), w.ncols()))
                .collect(),
            v_weights: params
                .weights
                .iter()
                .map(|w| DMatrix::zeros(w.nrows(), w.ncols()))
                .collect(),
            m_biases: params.biases.iter().map(|b| DVector::zeros(b.len())).collect(),
            v_biases: params.biases.iter().map(|b| DVector::zeros(b.len())).collect(),
        }
    }

    /// One descent step along `grads`. Parameters are untouched when the
    /// gradient is non-finite (the batch is discarded with an error).
    pub fn step(&mut self, params: &mut MlpParams, grads: &MlpGrads) -> Result<()> {
        if !grads.is_finite() {
            return Err(MorphError::Optimization(
                "non-finite gradient; batch discarded".into(),
            ));
        }
        if grads.weights.len() != params.weights.len() {
            return Err(MorphError::Structural(
                "gradient layout does not match parameters".into(),
            ));
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let c = &self.config;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);

        for li in 0..params.weights.len() {
            adam_apply(
                params.weights[li].as_mut_slice(),
                grads.weights[li].as_slice(),
                self.m_weights[li].as_mut_slice(),
                self.v_weights[li].as_mut_slice(),
                c,
                bc1,
                bc2,
            );
            adam_apply(
                params.biases[li].as_mut_slice(),
                grads.biases[li].as_slice(),
                self.m_biases[li].as_mut_slice(),
                self.v_biases[li].as_mut_slice(),
                c,
                bc1,
                bc2,
            );
        }
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn adam_apply(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    c: &AdamConfig,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
        v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::OutputActivation;
    use approx::assert_relative_eq;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut net = MlpParams::init(&[2, 3, 1], OutputActivation::None, 1.0, 1.0, 5).unwrap();
        let snapshot = net.clone();
        let grads = net.zeros_like_grads();
        let mut adam = AdamState::new(&net, AdamConfig::default());
        adam.step(&mut net, &grads).unwrap();
        assert_eq!(net, snapshot);
        assert_eq!(adam.step_count, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // Scalar parameter, constant gradient 1.0, lr 0.1:
        // m̂ = 1, v̂ = 1 after bias correction, so the step is lr/(1+ε) ≈ lr.
        let mut net = MlpParams::zeros(&[1, 1], OutputActivation::None).unwrap();
        net.weights[0][(0, 0)] = 2.0;
        let mut grads = net.zeros_like_grads();
        grads.weights[0][(0, 0)] = 1.0;
        let mut adam = AdamState::new(&net, AdamConfig::with_lr(0.1));
        adam.step(&mut net, &grads).unwrap();
        assert_relative_eq!(net.weights[0][(0, 0)], 1.9, epsilon = 1e-8);
    }

    #[test]
    fn nonfinite_gradient_is_rejected_and_params_survive() {
        let mut net = MlpParams::zeros(&[1, 1], OutputActivation::None).unwrap();
        net.weights[0][(0, 0)] = 2.0;
        let mut grads = net.zeros_like_grads();
        grads.weights[0][(0, 0)] = f64::NAN;
        let mut adam = AdamState::new(&net, AdamConfig::default());
        assert!(matches!(
            adam.step(&mut net, &grads),
            Err(MorphError::Optimization(_))
        ));
        assert_eq!(net.weights[0][(0, 0)], 2.0);
        assert_eq!(adam.step_count, 0);
    }

    #[test]
    fn identical_runs_are_deterministic() {
        let run = || {
            let mut net =
                MlpParams::init(&[3, 4, 2], OutputActivation::None, 1.0, 1.0, 11).unwrap();
            let mut adam = AdamState::new(&net, AdamConfig::with_lr(1e-3));
            for step in 0..50 {
                let mut grads = net.zeros_like_grads();
                for w in &mut grads.weights {
                    w.fill(((step % 7) as f64 - 3.0) * 0.1);
                }
                adam.step(&mut net, &grads).unwrap();
            }
            net
        };
        assert_eq!(run(), run());
    }
}
