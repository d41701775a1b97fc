use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rl::action::Action;
use crate::rl::qnet::QNetwork;
use crate::scalar::Scalar;

/// Linear decay from `start` to `end` over `decay_steps`, then constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: u64,
}

impl EpsilonSchedule {
    pub fn value(&self, step: u64) -> f64 {
        if self.decay_steps == 0 || step >= self.decay_steps {
            return self.end;
        }
        let frac = step as f64 / self.decay_steps as f64;
        self.start + (self.end - self.start) * frac
    }
}

/// Argmax over action values; ties resolve to the lowest action code.
pub fn greedy_action<T: Scalar>(q: &[T; Action::COUNT]) -> Action {
    let mut best = 0;
    for i in 1..Action::COUNT {
        if q[i] > q[best] {
            best = i;
        }
    }
    Action::ALL[best]
}

/// ε-greedy selection. The random stream is only consulted when `epsilon > 0`.
pub fn select_action<T: Scalar, R: Rng + ?Sized>(
    net: &QNetwork<T>,
    features: &[T],
    epsilon: f64,
    rng: &mut R,
) -> Result<Action> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Validation(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        net.forward(features)?;
        return Ok(Action::ALL[rng.random_range(0..Action::COUNT)]);
    }
    Ok(greedy_action(&net.forward(features)?))
}
