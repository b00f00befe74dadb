use std::borrow::Cow;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::TrainError;
use crate::ppo::adam::Adam;
use crate::ppo::config::{adapt_kl_coeff, PPOConfig};
use crate::ppo::loss::{loss, loss_and_grad, LossCoeffs, TrainBatch};
use crate::ppo::network::ActorCritic;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateStats {
    /// Means over every SGD step of the update.
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    /// KL(old‖new) on the full batch after the last step.
    pub kl: f64,
    /// Coefficient after adaptation.
    pub kl_coeff: f64,
}

pub fn loss_coeffs(config: &PPOConfig, kl_coeff: f64) -> LossCoeffs {
    LossCoeffs {
        clip: config.clip,
        use_clip: config.use_clip,
        kl_coeff,
        use_kl: config.use_kl,
        vf_coeff: config.vf_loss_coeff,
        vf_clip: config.vf_clip,
        entropy_coeff: config.entropy_coeff,
    }
}

/// Runs `sgd_iters` epochs of minibatch Adam steps on the batch, then adapts
/// the KL coefficient. Minibatches are shuffled with `rng` only when they are
/// smaller than the batch.
pub fn ppo_update<R: Rng + ?Sized>(
    net: &mut ActorCritic,
    adam: &mut Adam,
    batch: &TrainBatch,
    config: &PPOConfig,
    kl_coeff: f64,
    rng: &mut R,
) -> Result<UpdateStats, TrainError> {
    let coeffs = loss_coeffs(config, kl_coeff);
    let n = batch.len();
    let mb = config.minibatch.min(n).max(1);
    let mut order: Vec<usize> = (0..n).collect();
    let mut params = net.flat_params();
    let mut stats = UpdateStats::default();
    let mut steps = 0usize;
    for epoch in 0..config.sgd_iters {
        if mb < n {
            order.shuffle(rng);
        }
        for chunk in order.chunks(mb) {
            let sub = if chunk.len() == n {
                Cow::Borrowed(batch)
            } else {
                Cow::Owned(batch.select(chunk))
            };
            let (s, grad) = loss_and_grad(net, &sub, &coeffs);
            if !s.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(TrainError::NonFiniteLoss {
                    iteration: 0,
                    epoch,
                    detail: format!("{s:?}"),
                });
            }
            adam.step(&mut params, &grad);
            net.set_flat_params(&params);
            stats.policy_loss += s.policy_loss;
            stats.value_loss += s.value_loss;
            stats.entropy += s.entropy;
            stats.clip_fraction += s.clip_fraction;
            steps += 1;
        }
    }
    if steps > 0 {
        let k = steps as f64;
        stats.policy_loss /= k;
        stats.value_loss /= k;
        stats.entropy /= k;
        stats.clip_fraction /= k;
    }
    stats.kl = loss(net, batch, &coeffs).kl;
    if !stats.kl.is_finite() {
        return Err(TrainError::NonFiniteLoss {
            iteration: 0,
            epoch: config.sgd_iters,
            detail: format!("post-update KL {}", stats.kl),
        });
    }
    stats.kl_coeff = if config.use_kl {
        adapt_kl_coeff(kl_coeff, stats.kl, config.kl_target)
    } else {
        kl_coeff
    };
    Ok(stats)
}
