use serde::{Deserialize, Serialize};

use super::Layer;
use crate::numcore::{Matrix, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output `y`.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "tanh" => Some(Activation::Tanh),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// Fully connected layer `y = act(W x + b)`.
///
/// Parameters are laid out as the row-major weights followed by the biases.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    weights: Matrix,
    biases: Vec<f64>,
    activation: Activation,
}

impl DenseLayer {
    pub fn zeros(n_in: usize, n_out: usize, activation: Activation) -> Self {
        Self {
            weights: Matrix::zeros(n_out, n_in),
            biases: vec![0.0; n_out],
            activation,
        }
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Weights ~ U(-a, a) with a = gain·√(3/n_in), so Var = gain²/n_in.
    /// Biases are zeroed.
    pub fn init_fan_in(&mut self, rng: &mut Rng, gain: f64) {
        let bound = gain * (3.0 / self.weights.cols() as f64).sqrt();
        for w in self.weights.as_mut_slice() {
            *w = rng.uniform(-bound, bound);
        }
        self.biases.fill(0.0);
    }
}

impl Layer for DenseLayer {
    fn n_in(&self) -> usize {
        self.weights.cols()
    }

    fn n_out(&self) -> usize {
        self.weights.rows()
    }

    fn param_count(&self) -> usize {
        self.weights.rows() * self.weights.cols() + self.biases.len()
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_out())
            .map(|j| {
                let z = crate::numcore::dot(self.weights.row(j), x) + self.biases[j];
                self.activation.apply(z)
            })
            .collect()
    }

    fn backward(&self, x: &[f64], y: &[f64], grad_y: &[f64], grads: &mut [f64]) -> Vec<f64> {
        let (n_out, n_in) = self.weights.shape();
        let (grad_w, grad_b) = grads.split_at_mut(n_out * n_in);
        let mut grad_x = vec![0.0; n_in];
        for j in 0..n_out {
            let gz = grad_y[j] * self.activation.derivative_from_output(y[j]);
            if gz == 0.0 {
                continue;
            }
            grad_b[j] += gz;
            let row = self.weights.row(j);
            let grow = &mut grad_w[j * n_in..(j + 1) * n_in];
            for i in 0..n_in {
                grow[i] += gz * x[i];
                grad_x[i] += gz * row[i];
            }
        }
        grad_x
    }

    fn write_params(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(self.weights.as_slice());
        out.extend_from_slice(&self.biases);
    }

    fn read_params(&mut self, src: &[f64]) {
        let nw = self.weights.rows() * self.weights.cols();
        self.weights.as_mut_slice().copy_from_slice(&src[..nw]);
        self.biases.copy_from_slice(&src[nw..]);
    }
}
