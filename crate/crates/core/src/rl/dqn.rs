//! Q-learning update with a frozen target network.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rl::optim::Optimizer;
use crate::rl::qnet::{QNetwork, Sample};
use crate::rl::replay::{ReplayBuffer, Transition};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateParams<T> {
    pub gamma: T,
    pub batch_size: usize,
    /// Target sync period `C`.
    pub sync_period: u64,
}

impl<T: Scalar> UpdateParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= T::zero() && self.gamma < T::one()) {
            return Err(Error::config("train.gamma", "must lie in [0, 1)"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("train.batch_size", "must be positive"));
        }
        if self.sync_period == 0 {
            return Err(Error::config("train.target_sync_period", "must be positive"));
        }
        Ok(())
    }
}

/// `y = r` for terminal transitions, else `r + γ max_a' Q(s', a'; θ⁻)`.
pub fn td_targets<T: Scalar>(batch: &[&Transition<T>], target_net: &QNetwork<T>, gamma: T) -> Result<Vec<T>> {
    if batch.is_empty() {
        return Err(Error::Validation("td_targets needs a nonempty batch".into()));
    }
    batch
        .iter()
        .map(|t| {
            if t.done {
                return Ok(t.reward);
            }
            let q = target_net.forward(&t.next_state)?;
            let best = q.iter().copied().fold(T::neg_infinity(), T::max);
            Ok(t.reward + gamma * best)
        })
        .collect()
}

/// One minibatch gradient step on the squared TD error.
///
/// Returns the loss measured before the update. The target network is
/// overwritten with the updated online network when `step_index % C == 0`.
pub fn train_step<T: Scalar, R: Rng + ?Sized>(
    net: &mut QNetwork<T>,
    target_net: &mut QNetwork<T>,
    buffer: &ReplayBuffer<T>,
    params: &UpdateParams<T>,
    step_index: u64,
    optimizer: &mut dyn Optimizer<T>,
    rng: &mut R,
) -> Result<T> {
    if buffer.len() < params.batch_size {
        return Err(Error::InsufficientBuffer {
            size: buffer.len(),
            needed: params.batch_size,
        });
    }
    let batch = buffer.sample(params.batch_size, rng);
    let targets = td_targets(&batch, target_net, params.gamma)?;
    let samples: Vec<Sample<'_, T>> = batch
        .iter()
        .zip(&targets)
        .map(|(t, &y)| Sample {
            input: &t.state,
            action: t.action,
            target: y,
        })
        .collect();
    let (loss, grad) = net.loss_and_gradient(&samples)?;
    if !loss.is_finite() {
        return Err(Error::Diverged {
            loss: loss.to_f64_lossy(),
            step: step_index,
        });
    }
    optimizer.step(net, &grad);
    if step_index % params.sync_period == 0 {
        target_net.clone_from(net);
    }
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::action::Action;
    use crate::rl::optim::Sgd;
    use crate::rl::qnet::Dense;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(reward: f64, done: bool) -> Transition<f64> {
        Transition {
            state: vec![1.0, 0.5],
            action: Action::Overtaking,
            reward,
            next_state: vec![1.0, 0.0],
            done,
        }
    }

    // Q(s') = (2, 3, 1) for s' = (1, 0).
    fn target() -> QNetwork<f64> {
        QNetwork::from_layers(vec![Dense {
            inputs: 2,
            outputs: 3,
            weights: vec![2.0, 0.0, 3.0, 0.0, 1.0, 0.0],
            bias: vec![0.0; 3],
        }])
        .unwrap()
    }

    #[test]
    fn terminal_target_is_the_reward() {
        let t = transition(-100.0, true);
        assert_eq!(td_targets(&[&t], &target(), 0.9).unwrap(), vec![-100.0]);
    }

    #[test]
    fn zero_discount_target_is_the_reward() {
        let t = transition(1.5, false);
        assert_eq!(td_targets(&[&t], &target(), 0.0).unwrap(), vec![1.5]);
    }

    #[test]
    fn bootstrapped_target() {
        let t = transition(1.0, false);
        let y = td_targets(&[&t], &target(), 0.9).unwrap();
        assert_eq!(y, vec![1.0 + 0.9 * 3.0]);
    }

    #[test]
    fn empty_buffer_is_signalled() {
        let mut net = QNetwork::<f64>::zeros(&[2, 3]).unwrap();
        let mut tgt = net.clone();
        let buf = ReplayBuffer::new(4).unwrap();
        let params = UpdateParams { gamma: 0.9, batch_size: 2, sync_period: 1 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = train_step(&mut net, &mut tgt, &buf, &params, 1, &mut Sgd { learning_rate: 0.1 }, &mut rng);
        assert!(matches!(err, Err(Error::InsufficientBuffer { size: 0, needed: 2 })));
    }
}
