//! Multi-discrete action distribution: one 3-way categorical per thrust axis.

use rand::Rng;

use crate::dynamics::ThrustCommand;

pub const NUM_AXES: usize = 3;
pub const CHOICES_PER_AXIS: usize = 3;
pub const ACTION_LOGITS: usize = NUM_AXES * CHOICES_PER_AXIS;

/// log-softmax of one head.
pub fn log_softmax(logits: &[f64]) -> [f64; CHOICES_PER_AXIS] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    [logits[0] - lse, logits[1] - lse, logits[2] - lse]
}

/// Per-head log-probabilities for a row of 9 logits.
pub fn head_log_probs(logits: &[f64]) -> [[f64; CHOICES_PER_AXIS]; NUM_AXES] {
    let mut out = [[0.0; CHOICES_PER_AXIS]; NUM_AXES];
    for (h, head) in out.iter_mut().enumerate() {
        *head = log_softmax(&logits[h * CHOICES_PER_AXIS..(h + 1) * CHOICES_PER_AXIS]);
    }
    out
}

/// Joint log-probability: sum of the per-axis log-probabilities.
pub fn joint_log_prob(logits: &[f64], action: &[usize; NUM_AXES]) -> f64 {
    let lp = head_log_probs(logits);
    lp[0][action[0]] + lp[1][action[1]] + lp[2][action[2]]
}

/// KL(old ‖ new) summed over heads.
pub fn kl_divergence(old_logits: &[f64], new_logits: &[f64]) -> f64 {
    let old = head_log_probs(old_logits);
    let new = head_log_probs(new_logits);
    let mut kl = 0.0;
    for h in 0..NUM_AXES {
        for j in 0..CHOICES_PER_AXIS {
            kl += old[h][j].exp() * (old[h][j] - new[h][j]);
        }
    }
    kl
}

pub fn entropy(logits: &[f64]) -> f64 {
    let lp = head_log_probs(logits);
    -lp.iter().flatten().map(|l| l.exp() * l).sum::<f64>()
}

pub fn sample<R: Rng + ?Sized>(logits: &[f64], rng: &mut R) -> [usize; NUM_AXES] {
    let lp = head_log_probs(logits);
    let mut action = [0; NUM_AXES];
    for (h, a) in action.iter_mut().enumerate() {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        *a = CHOICES_PER_AXIS - 1;
        for (j, l) in lp[h].iter().enumerate() {
            acc += l.exp();
            if u < acc {
                *a = j;
                break;
            }
        }
    }
    action
}

/// Most likely choice per axis; ties go to the lower index.
pub fn mode(logits: &[f64]) -> [usize; NUM_AXES] {
    let mut action = [0; NUM_AXES];
    for (h, a) in action.iter_mut().enumerate() {
        let head = &logits[h * CHOICES_PER_AXIS..(h + 1) * CHOICES_PER_AXIS];
        for j in 1..CHOICES_PER_AXIS {
            if head[j] > head[*a] {
                *a = j;
            }
        }
    }
    action
}

pub fn to_command(action: &[usize; NUM_AXES]) -> ThrustCommand {
    ThrustCommand::from_indices(*action).expect("head indices are always < 3")
}
