//! Wall-clock timing of actor forward passes.

use std::hint::black_box;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nets::{InitScheme, Network, HIDDEN_WIDTH};
use crate::numcore::Rng;
use crate::spline::SplineConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingMode {
    Forward,
    ForwardBackward,
}

impl TimingMode {
    pub fn name(self) -> &'static str {
        match self {
            TimingMode::Forward => "forward",
            TimingMode::ForwardBackward => "forward_backward",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub network: String,
    pub mode: TimingMode,
    pub params: usize,
    pub steps: usize,
    pub total_s: f64,
    pub per_step_s: f64,
}

/// Times `steps` passes of `net` over a small pool of random inputs.
pub fn time_network(
    label: &str,
    net: &Network,
    steps: usize,
    mode: TimingMode,
    rng: &mut Rng,
) -> Result<TimingRow> {
    if steps == 0 {
        return Err(Error::InvalidArgument("timing needs at least one step".into()));
    }
    let pool: Vec<Vec<f64>> = (0..16)
        .map(|_| (0..net.n_in()).map(|_| rng.uniform(-1.0, 1.0)).collect())
        .collect();
    let grad_y = vec![1.0; net.n_out()];
    let mut grads = net.grad_buffer();
    let start = Instant::now();
    for s in 0..steps {
        let x = &pool[s % pool.len()];
        match mode {
            TimingMode::Forward => {
                black_box(net.predict(black_box(x))?);
            }
            TimingMode::ForwardBackward => {
                let (_, cache) = net.forward(black_box(x))?;
                black_box(net.backward(&cache, &grad_y, &mut grads)?);
            }
        }
    }
    let total_s = start.elapsed().as_secs_f64();
    Ok(TimingRow {
        network: label.to_owned(),
        mode,
        params: net.count_params(),
        steps,
        total_s,
        per_step_s: total_s / steps as f64,
    })
}

/// MLP(64, 64) and single-layer KAN actors at `obs → act`, timed with the
/// same step count.
pub fn time_actor_pair(
    obs: usize,
    act: usize,
    steps: usize,
    spline: SplineConfig,
    mode: TimingMode,
    seed: u64,
) -> Result<Vec<TimingRow>> {
    let mut rng = Rng::new(seed);
    let mut mlp = Network::mlp(obs, &[HIDDEN_WIDTH, HIDDEN_WIDTH], act);
    mlp.init_params(&mut rng, &InitScheme::actor());
    let mut kan = Network::kan(&[obs, act], spline);
    kan.init_params(&mut rng, &InitScheme::actor());
    let kan_label = format!("kan(k={},g={})", spline.order, spline.grid);
    Ok(vec![
        time_network("mlp(64,64)", &mlp, steps, mode, &mut rng)?,
        time_network(&kan_label, &kan, steps, mode, &mut rng)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_have_equal_steps_and_positive_times() {
        for mode in [TimingMode::Forward, TimingMode::ForwardBackward] {
            let rows = time_actor_pair(17, 6, 200, SplineConfig::default(), mode, 0).unwrap();
            assert_eq!(rows.len(), 2);
            assert_eq!(rows[0].steps, rows[1].steps);
            assert!(rows.iter().all(|r| r.total_s > 0.0 && r.per_step_s > 0.0));
            assert_eq!(rows[0].params, 5702);
            assert_eq!(rows[1].params, 510);
        }
    }

    #[test]
    fn zero_steps_rejected() {
        let net = Network::mlp(2, &[4], 1);
        assert!(time_network("x", &net, 0, TimingMode::Forward, &mut Rng::new(0)).is_err());
    }
}
