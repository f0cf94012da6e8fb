use super::Layer;
use crate::numcore::Rng;
use crate::spline::{self, EdgeFunction, SplineConfig};

/// Kolmogorov-Arnold layer: `y_j = Σ_i φ_{j,i}(x_i)`.
///
/// Every edge `(j, i)` is a pure B-spline with `grid + order` coefficients;
/// there is no residual base activation and no per-edge scale. Coefficients
/// are stored edge-major: edge `(j, i)` owns the slice starting at
/// `(j·n_in + i)·(grid + order)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KanLayer {
    n_in: usize,
    n_out: usize,
    config: SplineConfig,
    coeffs: Vec<f64>,
}

impl KanLayer {
    pub fn zeros(n_in: usize, n_out: usize, config: SplineConfig) -> Self {
        Self {
            n_in,
            n_out,
            coeffs: vec![0.0; n_in * n_out * config.basis_count()],
            config,
        }
    }

    pub fn config(&self) -> &SplineConfig {
        &self.config
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    fn edge_offset(&self, j: usize, i: usize) -> usize {
        (j * self.n_in + i) * self.config.basis_count()
    }

    /// Coefficients of the edge from input `i` to output `j`.
    pub fn edge_coeffs(&self, j: usize, i: usize) -> &[f64] {
        let off = self.edge_offset(j, i);
        &self.coeffs[off..off + self.config.basis_count()]
    }

    /// Owned copy of edge `(j, i)` as a standalone function.
    pub fn edge(&self, j: usize, i: usize) -> EdgeFunction {
        EdgeFunction::new(self.config, self.edge_coeffs(j, i).to_vec())
            .expect("layer coefficients match the config")
    }

    /// Coefficients ~ N(0, sigma²).
    pub fn init_normal(&mut self, rng: &mut Rng, sigma: f64) {
        for c in &mut self.coeffs {
            *c = if sigma > 0.0 {
                sigma * rng.standard_normal()
            } else {
                0.0
            };
        }
    }
}

impl Layer for KanLayer {
    fn n_in(&self) -> usize {
        self.n_in
    }

    fn n_out(&self) -> usize {
        self.n_out
    }

    fn param_count(&self) -> usize {
        self.coeffs.len()
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let spans: Vec<_> = x
            .iter()
            .map(|&xi| spline::span_unchecked(&self.config, xi))
            .collect();
        (0..self.n_out)
            .map(|j| {
                spans
                    .iter()
                    .enumerate()
                    .map(|(i, span)| span.dot(self.edge_coeffs(j, i)))
                    .sum()
            })
            .collect()
    }

    fn backward(&self, x: &[f64], _y: &[f64], grad_y: &[f64], grads: &mut [f64]) -> Vec<f64> {
        let mut grad_x = vec![0.0; self.n_in];
        for (i, &xi) in x.iter().enumerate() {
            let span = spline::span_unchecked(&self.config, xi);
            let dspan = spline::deriv_span_unchecked(&self.config, xi);
            for (j, &gy) in grad_y.iter().enumerate() {
                if gy == 0.0 {
                    continue;
                }
                let off = self.edge_offset(j, i) + span.start;
                for (g, b) in grads[off..].iter_mut().zip(&span.values) {
                    *g += gy * b;
                }
                grad_x[i] += gy * dspan.dot(self.edge_coeffs(j, i));
            }
        }
        grad_x
    }

    fn write_params(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.coeffs);
    }

    fn read_params(&mut self, src: &[f64]) {
        self.coeffs.copy_from_slice(src);
    }
}
