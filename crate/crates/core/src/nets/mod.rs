//! Trainable layers behind a single forward/backward contract.
//!
//! [`KanLayer`] and [`DenseLayer`] both implement [`Layer`]; a [`Network`]
//! chains them and owns the flattened parameter layout that [`GradBuffer`]
//! mirrors.

mod arch;
pub mod checkpoint;
mod dense;
mod kan;

use serde::{Deserialize, Serialize};

pub use arch::{Architecture, ParamCounts, HIDDEN_WIDTH};
pub use dense::{Activation, DenseLayer};
pub use kan::KanLayer;

use crate::error::{Error, Result};
use crate::numcore::Rng;
use crate::spline::SplineConfig;

/// Forward/backward contract shared by every layer type.
pub trait Layer {
    fn n_in(&self) -> usize;
    fn n_out(&self) -> usize;
    fn param_count(&self) -> usize;

    fn forward(&self, x: &[f64]) -> Vec<f64>;

    /// Accumulates `∂L/∂θ` into `grads` (this layer's slice of the network
    /// buffer) and returns `∂L/∂x`. `x` and `y` are the input and output of
    /// the matching forward call.
    fn backward(&self, x: &[f64], y: &[f64], grad_y: &[f64], grads: &mut [f64]) -> Vec<f64>;

    fn write_params(&self, out: &mut Vec<f64>);

    /// `src.len()` must equal [`Layer::param_count`].
    fn read_params(&mut self, src: &[f64]);
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerKind {
    Kan(KanLayer),
    Dense(DenseLayer),
}

impl LayerKind {
    fn as_layer(&self) -> &dyn Layer {
        match self {
            LayerKind::Kan(l) => l,
            LayerKind::Dense(l) => l,
        }
    }

    fn as_layer_mut(&mut self) -> &mut dyn Layer {
        match self {
            LayerKind::Kan(l) => l,
            LayerKind::Dense(l) => l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetKind {
    Kan,
    Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitScheme {
    /// Fan-in gain for hidden dense layers.
    pub hidden_gain: f64,
    /// Fan-in gain for the final dense layer.
    pub output_gain: f64,
    /// Standard deviation of spline coefficients.
    pub kan_sigma: f64,
}

impl InitScheme {
    /// Small output layer so the initial policy mean sits near zero.
    pub fn actor() -> Self {
        Self {
            hidden_gain: 1.0,
            output_gain: 0.01,
            kan_sigma: 0.1,
        }
    }

    pub fn critic() -> Self {
        Self {
            hidden_gain: 1.0,
            output_gain: 1.0,
            kan_sigma: 0.1,
        }
    }
}

impl Default for InitScheme {
    fn default() -> Self {
        Self::critic()
    }
}

/// Per-layer activations recorded by [`Network::forward`].
///
/// `activations[0]` is the network input and `activations[l + 1]` the output
/// of layer `l`.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().map_or(&[], Vec::as_slice)
    }

    pub fn input(&self) -> &[f64] {
        &self.activations[0]
    }
}

/// Gradient accumulator mirroring [`Network::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradBuffer {
    data: Vec<f64>,
}

impl GradBuffer {
    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![0.0; len],
        }
    }

    pub fn zero(&mut self) {
        self.data.fill(0.0);
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<LayerKind>,
    kind: NetKind,
}

impl Network {
    pub fn from_layers(layers: Vec<LayerKind>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            let (a, b) = (pair[0].as_layer(), pair[1].as_layer());
            if a.n_out() != b.n_in() {
                return Err(Error::Shape {
                    op: "Network::from_layers",
                    left: (a.n_in(), a.n_out()),
                    right: (b.n_in(), b.n_out()),
                });
            }
        }
        let kind = if layers.iter().all(|l| matches!(l, LayerKind::Kan(_))) {
            NetKind::Kan
        } else {
            NetKind::Mlp
        };
        Ok(Self { layers, kind })
    }

    /// Dense network with tanh hidden layers and an identity output.
    pub fn mlp(n_in: usize, hidden: &[usize], n_out: usize) -> Self {
        let mut widths = vec![n_in];
        widths.extend_from_slice(hidden);
        widths.push(n_out);
        let last = widths.len() - 2;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(l, w)| {
                let act = if l == last {
                    Activation::Identity
                } else {
                    Activation::Tanh
                };
                LayerKind::Dense(DenseLayer::zeros(w[0], w[1], act))
            })
            .collect();
        Self {
            layers,
            kind: NetKind::Mlp,
        }
    }

    /// Stack of KAN layers with node widths `widths` (at least two entries).
    pub fn kan(widths: &[usize], config: SplineConfig) -> Self {
        assert!(widths.len() >= 2, "KAN needs input and output widths");
        let layers = widths
            .windows(2)
            .map(|w| LayerKind::Kan(KanLayer::zeros(w[0], w[1], config)))
            .collect();
        Self {
            layers,
            kind: NetKind::Kan,
        }
    }

    pub fn kind(&self) -> NetKind {
        self.kind
    }

    pub fn layers(&self) -> &[LayerKind] {
        &self.layers
    }

    pub fn n_in(&self) -> usize {
        self.layers[0].as_layer().n_in()
    }

    pub fn n_out(&self) -> usize {
        self.layers[self.layers.len() - 1].as_layer().n_out()
    }

    /// Trainable parameters: spline coefficients for KAN layers, weights and
    /// biases for dense layers.
    pub fn count_params(&self) -> usize {
        self.layers.iter().map(|l| l.as_layer().param_count()).sum()
    }

    pub fn grad_buffer(&self) -> GradBuffer {
        GradBuffer::zeros(self.count_params())
    }

    pub fn init_params(&mut self, rng: &mut Rng, scheme: &InitScheme) {
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter_mut().enumerate() {
            match layer {
                LayerKind::Kan(k) => k.init_normal(rng, scheme.kan_sigma),
                LayerKind::Dense(d) => {
                    let gain = if l == last {
                        scheme.output_gain
                    } else {
                        scheme.hidden_gain
                    };
                    d.init_fan_in(rng, gain);
                }
            }
        }
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.count_params());
        for l in &self.layers {
            l.as_layer().write_params(&mut out);
        }
        out
    }

    pub fn set_params(&mut self, src: &[f64]) -> Result<()> {
        if src.len() != self.count_params() {
            return Err(Error::length("Network::set_params", self.count_params(), src.len()));
        }
        let mut off = 0;
        for l in &mut self.layers {
            let layer = l.as_layer_mut();
            let n = layer.param_count();
            layer.read_params(&src[off..off + n]);
            off += n;
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_in() {
            return Err(Error::length("Network::forward", self.n_in(), x.len()));
        }
        Ok(())
    }

    /// Output only, without recording activations.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut h = self.layers[0].as_layer().forward(x);
        for l in &self.layers[1..] {
            h = l.as_layer().forward(&h);
        }
        Ok(h)
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        self.check_input(x)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_vec());
        for l in &self.layers {
            let next = l.as_layer().forward(activations.last().expect("non-empty"));
            activations.push(next);
        }
        let y = activations.last().expect("non-empty").clone();
        Ok((y, ForwardCache { activations }))
    }

    /// Accumulates parameter gradients into `grads` and returns `∂L/∂x`.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        grad_y: &[f64],
        grads: &mut GradBuffer,
    ) -> Result<Vec<f64>> {
        if cache.activations.len() != self.layers.len() + 1 || cache.input().len() != self.n_in() {
            return Err(Error::InvalidArgument(
                "forward cache does not belong to this network".into(),
            ));
        }
        if grad_y.len() != self.n_out() {
            return Err(Error::length("Network::backward", self.n_out(), grad_y.len()));
        }
        if grads.len() != self.count_params() {
            return Err(Error::length("Network::backward", self.count_params(), grads.len()));
        }
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut off = 0;
        for l in &self.layers {
            offsets.push(off);
            off += l.as_layer().param_count();
        }
        let mut g = grad_y.to_vec();
        for (idx, l) in self.layers.iter().enumerate().rev() {
            let layer = l.as_layer();
            let slice = &mut grads.data[offsets[idx]..offsets[idx] + layer.param_count()];
            g = layer.backward(
                &cache.activations[idx],
                &cache.activations[idx + 1],
                &g,
                slice,
            );
        }
        Ok(g)
    }
}
