//! Criterion benchmarks comparing MLP and KAN actors.

use kanppo_core::nets::{InitScheme, Network, HIDDEN_WIDTH};
use kanppo_core::numcore::Rng;
use kanppo_core::spline::SplineConfig;

/// Initialized `(mlp, kan)` actors for the given dimensions.
pub fn actor_pair(obs: usize, act: usize, seed: u64) -> (Network, Network) {
    let mut rng = Rng::new(seed);
    let mut mlp = Network::mlp(obs, &[HIDDEN_WIDTH, HIDDEN_WIDTH], act);
    mlp.init_params(&mut rng, &InitScheme::actor());
    let mut kan = Network::kan(&[obs, act], SplineConfig::default());
    kan.init_params(&mut rng, &InitScheme::actor());
    (mlp, kan)
}

/// Inputs drawn uniformly from `[-1, 1]`.
pub fn inputs(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = Rng::new(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_shapes() {
        let (mlp, kan) = actor_pair(17, 6, 0);
        assert_eq!(mlp.count_params(), 5702);
        assert_eq!(kan.count_params(), 510);
        assert_eq!(inputs(17, 3, 0)[2].len(), 17);
    }
}
