use crate::error::{Error, Result};
use crate::policy::{gaussian_log_prob, ActorCritic};

/// Negated clipped surrogate objective,
/// `−mean(min(r·A, clip(r, 1−ε, 1+ε)·A))`.
///
/// `clip_eps = f64::INFINITY` disables clipping.
pub fn clipped_surrogate(ratios: &[f64], advantages: &[f64], clip_eps: f64) -> Result<f64> {
    if ratios.len() != advantages.len() {
        return Err(Error::length("clipped_surrogate", ratios.len(), advantages.len()));
    }
    if ratios.is_empty() {
        return Err(Error::InvalidArgument("clipped_surrogate on an empty batch".into()));
    }
    if clip_eps.is_nan() || clip_eps < 0.0 {
        return Err(Error::InvalidArgument(format!("clip_eps must be non-negative, got {clip_eps}")));
    }
    let sum: f64 = ratios
        .iter()
        .zip(advantages)
        .map(|(&r, &a)| surrogate_term(r, a, clip_eps).0)
        .sum();
    Ok(-sum / ratios.len() as f64)
}

/// `(min(rA, clip(r)A), whether the unclipped branch is active)`.
fn surrogate_term(r: f64, a: f64, clip_eps: f64) -> (f64, bool) {
    let unclipped = r * a;
    let clipped = r.clamp(1.0 - clip_eps, 1.0 + clip_eps) * a;
    if unclipped <= clipped {
        (unclipped, true)
    } else {
        (clipped, false)
    }
}

/// `policy_loss + c1·value_loss − c2·entropy`, where `policy_loss` is the
/// already negated surrogate.
pub fn combined_loss(policy_loss: f64, value_loss: f64, entropy: f64, c1: f64, c2: f64) -> f64 {
    policy_loss + c1 * value_loss - c2 * entropy
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossCoefs {
    pub clip_eps: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
}

/// Flattened rollout data ready for optimization.
#[derive(Debug, Clone, Default)]
pub struct TrainingBatch {
    pub inputs: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub old_log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl TrainingBatch {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossStats {
    pub total: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    /// Fraction of samples on the clipped branch.
    pub clip_fraction: f64,
    /// Mean of `old_log_prob − log_prob`.
    pub approx_kl: f64,
}

impl LossStats {
    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
            && self.policy_loss.is_finite()
            && self.value_loss.is_finite()
            && self.entropy.is_finite()
    }
}

/// Loss over the samples `idx` of `batch`. When `grads` is given it receives
/// `∂loss/∂θ` in the [`ActorCritic::params`] layout (overwritten, not
/// accumulated).
pub fn ppo_loss(
    ac: &ActorCritic,
    batch: &TrainingBatch,
    idx: &[usize],
    coefs: LossCoefs,
    grads: Option<&mut [f64]>,
) -> Result<LossStats> {
    if idx.is_empty() {
        return Err(Error::InvalidArgument("ppo_loss on an empty minibatch".into()));
    }
    if let Some(g) = grads.as_deref() {
        if g.len() != ac.param_len() {
            return Err(Error::length("ppo_loss grads", ac.param_len(), g.len()));
        }
    }
    let m = idx.len() as f64;
    let act_dim = ac.act_dim();
    let var: Vec<f64> = ac.log_std.iter().map(|l| (2.0 * l).exp()).collect();
    let want_grads = grads.is_some();
    let mut actor_g = ac.actor.grad_buffer();
    let mut critic_g = ac.critic.grad_buffer();
    let mut log_std_g = vec![0.0; act_dim];

    let mut surrogate_sum = 0.0;
    let mut value_sq_sum = 0.0;
    let mut clipped = 0usize;
    let mut kl_sum = 0.0;
    for &i in idx {
        let input = batch
            .inputs
            .get(i)
            .ok_or_else(|| Error::InvalidArgument(format!("minibatch index {i} out of range")))?;
        let action = &batch.actions[i];
        if action.len() != act_dim {
            return Err(Error::length("ppo_loss action", act_dim, action.len()));
        }
        let adv = batch.advantages[i];
        let (mean, actor_cache) = ac.actor.forward(input)?;
        let (v, critic_cache) = ac.critic.forward(input)?;
        let v = v[0];
        let log_prob = gaussian_log_prob(&mean, &ac.log_std, action);
        let ratio = (log_prob - batch.old_log_probs[i]).exp();
        kl_sum += batch.old_log_probs[i] - log_prob;
        let (term, unclipped) = surrogate_term(ratio, adv, coefs.clip_eps);
        surrogate_sum += term;
        if !unclipped {
            clipped += 1;
        }
        let err = v - batch.returns[i];
        value_sq_sum += err * err;

        if want_grads {
            // d(−term/m)/d log_prob; zero on the clipped branch.
            let g_logp = if unclipped { -ratio * adv / m } else { 0.0 };
            if g_logp != 0.0 {
                let mut grad_mean = vec![0.0; act_dim];
                for d in 0..act_dim {
                    let z = action[d] - mean[d];
                    grad_mean[d] = g_logp * z / var[d];
                    log_std_g[d] += g_logp * (z * z / var[d] - 1.0);
                }
                ac.actor.backward(&actor_cache, &grad_mean, &mut actor_g)?;
            }
            let g_v = coefs.value_coef * 2.0 * err / m;
            ac.critic.backward(&critic_cache, &[g_v], &mut critic_g)?;
        }
    }

    let entropy = ac.entropy();
    let policy_loss = -surrogate_sum / m;
    let value_loss = value_sq_sum / m;
    let total = combined_loss(policy_loss, value_loss, entropy, coefs.value_coef, coefs.entropy_coef);

    if let Some(g) = grads {
        // ∂H/∂log_std_d = 1
        log_std_g.iter_mut().for_each(|x| *x -= coefs.entropy_coef);
        let na = actor_g.len();
        let nc = critic_g.len();
        g[..na].copy_from_slice(actor_g.as_slice());
        g[na..na + nc].copy_from_slice(critic_g.as_slice());
        g[na + nc..].copy_from_slice(&log_std_g);
    }

    Ok(LossStats {
        total,
        policy_loss,
        value_loss,
        entropy,
        clip_fraction: clipped as f64 / m,
        approx_kl: kl_sum / m,
    })
}
