use kanppo_core::numcore::Rng;
use kanppo_core::ppo::{RolloutBuffer, Transition};

/// Direct sum `A_t = Σ_l (γλ)^l δ_{t+l}`, stopped after the step that ends
/// the episode.
fn brute_force(steps: &[Transition], bootstrap: f64, gamma: f64, lambda: f64) -> Vec<f64> {
    let n = steps.len();
    let delta: Vec<f64> = (0..n)
        .map(|t| {
            let s = &steps[t];
            let next = if s.terminated {
                0.0
            } else if s.truncated {
                s.truncation_value
            } else if t + 1 < n {
                steps[t + 1].value
            } else {
                bootstrap
            };
            s.reward + gamma * next - s.value
        })
        .collect();
    (0..n)
        .map(|t| {
            let mut sum = 0.0;
            let mut w = 1.0;
            for l in t..n {
                sum += w * delta[l];
                if steps[l].terminated || steps[l].truncated {
                    break;
                }
                w *= gamma * lambda;
            }
            sum
        })
        .collect()
}

#[test]
fn recursion_equals_direct_sum() {
    let mut rng = Rng::new(5);
    for _ in 0..1000 {
        let n = 1 + rng.below(64);
        let gamma = rng.uniform(0.8, 1.0);
        let lambda = rng.uniform(0.0, 1.0);
        let mut buf = RolloutBuffer::new(n);
        for _ in 0..n {
            let u = rng.next_f64();
            buf.push(Transition {
                input: vec![],
                action: vec![],
                reward: rng.uniform(-2.0, 2.0),
                value: rng.uniform(-5.0, 5.0),
                log_prob: 0.0,
                terminated: u < 0.1,
                truncated: (0.1..0.2).contains(&u),
                truncation_value: rng.uniform(-5.0, 5.0),
            })
            .unwrap();
        }
        let bootstrap = rng.uniform(-5.0, 5.0);
        buf.set_bootstrap(bootstrap);
        let gae = buf.compute_gae(gamma, lambda).unwrap();
        let oracle = brute_force(buf.steps(), bootstrap, gamma, lambda);
        for (a, b) in gae.advantages.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }
}
