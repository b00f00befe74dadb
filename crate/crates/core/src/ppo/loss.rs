//! PPO objective and its analytic gradient.
//!
//! total = −mean(min(r·A, clip(r)·A)) + β·mean(KL(old‖new))
//!         + c_vf·mean(min((V − R)², vf_clip)) − c_ent·mean(H)

use ndarray::Array2;

use crate::ppo::distribution::{head_log_probs, CHOICES_PER_AXIS, NUM_AXES};
use crate::ppo::network::{flatten_grads, ActorCritic};

/// Samples the loss is evaluated on. All vectors share one length.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainBatch {
    pub obs: Array2<f64>,
    pub actions: Vec<[usize; NUM_AXES]>,
    pub old_log_probs: Vec<f64>,
    pub old_logits: Array2<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl TrainBatch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn select(&self, rows: &[usize]) -> TrainBatch {
        TrainBatch {
            obs: self.obs.select(ndarray::Axis(0), rows),
            actions: rows.iter().map(|&i| self.actions[i]).collect(),
            old_log_probs: rows.iter().map(|&i| self.old_log_probs[i]).collect(),
            old_logits: self.old_logits.select(ndarray::Axis(0), rows),
            advantages: rows.iter().map(|&i| self.advantages[i]).collect(),
            returns: rows.iter().map(|&i| self.returns[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossCoeffs {
    pub clip: f64,
    pub use_clip: bool,
    pub kl_coeff: f64,
    pub use_kl: bool,
    pub vf_coeff: f64,
    pub vf_clip: f64,
    pub entropy_coeff: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossStats {
    pub total: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub kl: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
}

impl LossStats {
    pub fn is_finite(&self) -> bool {
        [
            self.total,
            self.policy_loss,
            self.value_loss,
            self.kl,
            self.entropy,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Per-sample clipped value loss.
pub fn clipped_value_loss(value: f64, target: f64, vf_clip: f64) -> f64 {
    let e = value - target;
    (e * e).min(vf_clip)
}

fn evaluate(
    net: &ActorCritic,
    batch: &TrainBatch,
    coeffs: &LossCoeffs,
    want_grad: bool,
) -> (LossStats, Vec<f64>) {
    let n = batch.len();
    let inv_n = 1.0 / n as f64;
    let (logits, policy_cache) = net.policy.forward_cached(&batch.obs);
    let (values, value_cache) = net.value.forward_cached(&batch.obs);
    let mut d_logits = Array2::<f64>::zeros(logits.raw_dim());
    let mut d_values = Array2::<f64>::zeros(values.raw_dim());

    let mut stats = LossStats::default();
    let mut clipped = 0usize;
    for i in 0..n {
        let row = logits.row(i);
        let row = row.as_slice().expect("contiguous logits row");
        let lp = head_log_probs(row);
        let action = batch.actions[i];
        let log_prob: f64 = (0..NUM_AXES).map(|h| lp[h][action[h]]).sum();
        let ratio = (log_prob - batch.old_log_probs[i]).exp();
        let adv = batch.advantages[i];

        let unclipped = ratio * adv;
        let (surrogate, d_log_prob) = if coeffs.use_clip {
            let bounded = ratio.clamp(1.0 - coeffs.clip, 1.0 + coeffs.clip) * adv;
            if unclipped <= bounded {
                (unclipped, -adv * ratio)
            } else {
                clipped += 1;
                (bounded, 0.0)
            }
        } else {
            (unclipped, -adv * ratio)
        };
        stats.policy_loss -= surrogate * inv_n;

        let old_row = batch.old_logits.row(i);
        let old_lp = head_log_probs(old_row.as_slice().expect("contiguous old logits row"));
        let mut kl = 0.0;
        let mut ent = 0.0;
        for h in 0..NUM_AXES {
            let head_ent: f64 = -lp[h].iter().map(|l| l.exp() * l).sum::<f64>();
            ent += head_ent;
            for j in 0..CHOICES_PER_AXIS {
                let p = lp[h][j].exp();
                let q = old_lp[h][j].exp();
                kl += q * (old_lp[h][j] - lp[h][j]);
                if want_grad {
                    let indicator = if j == action[h] { 1.0 } else { 0.0 };
                    let mut g = d_log_prob * (indicator - p);
                    if coeffs.use_kl {
                        g += coeffs.kl_coeff * (p - q);
                    }
                    g += coeffs.entropy_coeff * p * (lp[h][j] + head_ent);
                    d_logits[(i, h * CHOICES_PER_AXIS + j)] = g * inv_n;
                }
            }
        }
        stats.kl += kl * inv_n;
        stats.entropy += ent * inv_n;

        let v = values[(i, 0)];
        let e = v - batch.returns[i];
        let vf = clipped_value_loss(v, batch.returns[i], coeffs.vf_clip);
        stats.value_loss += vf * inv_n;
        if want_grad && e * e < coeffs.vf_clip {
            d_values[(i, 0)] = coeffs.vf_coeff * 2.0 * e * inv_n;
        }
    }
    stats.clip_fraction = clipped as f64 * inv_n;
    let kl_term = if coeffs.use_kl {
        coeffs.kl_coeff * stats.kl
    } else {
        0.0
    };
    stats.total = stats.policy_loss + kl_term + coeffs.vf_coeff * stats.value_loss
        - coeffs.entropy_coeff * stats.entropy;

    if !want_grad {
        return (stats, Vec::new());
    }
    let policy_grads = net.policy.backward(&policy_cache, d_logits);
    let value_grads = net.value.backward(&value_cache, d_values);
    (stats, flatten_grads(&policy_grads, &value_grads))
}

/// Loss statistics and the gradient of `total` w.r.t. `net.flat_params()`.
pub fn loss_and_grad(
    net: &ActorCritic,
    batch: &TrainBatch,
    coeffs: &LossCoeffs,
) -> (LossStats, Vec<f64>) {
    evaluate(net, batch, coeffs, true)
}

pub fn loss(net: &ActorCritic, batch: &TrainBatch, coeffs: &LossCoeffs) -> LossStats {
    evaluate(net, batch, coeffs, false).0
}
