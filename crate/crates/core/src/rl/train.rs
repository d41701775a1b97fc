//! Episodic DQN training loop.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rl::action::Action;
use crate::rl::dqn::{train_step, UpdateParams};
use crate::rl::optim::{build_optimizer, OptimizerKind};
use crate::rl::policy::{select_action, EpsilonSchedule};
use crate::rl::qnet::QNetwork;
use crate::rl::replay::{ReplayBuffer, Transition};
use crate::world::Outcome;

// Independent random streams derived from the training seed.
const STREAM_INIT: u64 = 0;
const STREAM_SCENARIO: u64 = 1;
const STREAM_EXPLORE: u64 = 2;
const STREAM_REPLAY: u64 = 3;

pub(crate) fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub target_sync_period: u64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Share of `iterations` over which ε decays.
    pub epsilon_decay_fraction: f64,
    /// Total decision steps.
    pub iterations: u64,
    pub buffer_capacity: usize,
    /// Transitions collected before the first update.
    pub learning_starts: usize,
    pub hidden_layers: Vec<usize>,
    pub optimizer: OptimizerKind,
    /// Decisions an exploratory action is held for; 1 is plain ε-greedy.
    pub explore_hold: usize,
    /// Store timeouts as non-terminal so their targets bootstrap; elapsed
    /// time is not observed, so the cut-off is not part of the state.
    pub bootstrap_timeouts: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            learning_rate: 1e-3,
            batch_size: 256,
            target_sync_period: 100,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.6,
            iterations: 40_000,
            buffer_capacity: 50_000,
            learning_starts: 64,
            hidden_layers: vec![64, 64],
            optimizer: OptimizerKind::Adam,
            explore_hold: 6,
            bootstrap_timeouts: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.update_params().validate()?;
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("train.learning_rate", "must be positive"));
        }
        for (field, v) in [("train.epsilon_start", self.epsilon_start), ("train.epsilon_end", self.epsilon_end)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(field, "must lie in [0, 1]"));
            }
        }
        if !(0.0..=1.0).contains(&self.epsilon_decay_fraction) {
            return Err(Error::config("train.epsilon_decay_fraction", "must lie in [0, 1]"));
        }
        if self.buffer_capacity < self.batch_size {
            return Err(Error::config("train.buffer_capacity", "must be at least batch_size"));
        }
        if self.explore_hold == 0 {
            return Err(Error::config("train.explore_hold", "must be at least 1"));
        }
        if self.hidden_layers.contains(&0) {
            return Err(Error::config("train.hidden_layers", "layer widths must be positive"));
        }
        Ok(())
    }

    pub fn update_params(&self) -> UpdateParams<f64> {
        UpdateParams {
            gamma: self.gamma,
            batch_size: self.batch_size,
            sync_period: self.target_sync_period,
        }
    }

    pub fn epsilon_schedule(&self) -> EpsilonSchedule {
        EpsilonSchedule {
            start: self.epsilon_start,
            end: self.epsilon_end,
            decay_steps: (self.iterations as f64 * self.epsilon_decay_fraction).round() as u64,
        }
    }

    pub fn layer_dims(&self, input_dim: usize) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden_layers.len() + 2);
        dims.push(input_dim);
        dims.extend(&self.hidden_layers);
        dims.push(Action::COUNT);
        dims
    }
}

/// Result of applying one decision to an environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub reward: f64,
    pub next_features: Vec<f64>,
    pub done: bool,
    /// Set when `done`.
    pub outcome: Option<Outcome>,
}

/// Decision-cadence environment driven by the training loop.
pub trait Environment {
    fn features(&self) -> Vec<f64>;
    fn step(&mut self, action: Action) -> Result<EnvStep>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub episode: usize,
    pub scenario_index: usize,
    pub steps: usize,
    pub total_reward: f64,
    pub discounted_return: f64,
    pub outcome: Outcome,
    pub epsilon: f64,
    pub mean_loss: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LearningCurve {
    pub episodes: Vec<EpisodeLog>,
}

impl LearningCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("episode,scenario_index,steps,total_reward,discounted_return,outcome,epsilon,mean_loss\n");
        for e in &self.episodes {
            let loss = e.mean_loss.map(|l| format!("{l:.9}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{:.9},{:.9},{},{:.6},{}",
                e.episode,
                e.scenario_index,
                e.steps,
                e.total_reward,
                e.discounted_return,
                e.outcome.label(),
                e.epsilon,
                loss
            );
        }
        out
    }

    /// Mean discounted return over the first and last `fraction` of episodes.
    pub fn early_late_means(&self, fraction: f64) -> Option<(f64, f64)> {
        let n = self.episodes.len();
        let k = ((n as f64 * fraction).floor() as usize).max(1);
        if n < 2 * k {
            return None;
        }
        let mean = |xs: &[EpisodeLog]| xs.iter().map(|e| e.discounted_return).sum::<f64>() / xs.len() as f64;
        Some((mean(&self.episodes[..k]), mean(&self.episodes[n - k..])))
    }
}

/// Fresh network for `input_dim` features, drawn from the config seed.
pub fn init_network(input_dim: usize, cfg: &TrainConfig) -> Result<QNetwork<f64>> {
    QNetwork::random(&cfg.layer_dims(input_dim), &mut stream(cfg.seed, STREAM_INIT))
}

/// Runs `cfg.iterations` ε-greedy decision steps over uniformly drawn scenarios.
///
/// The episode cut off by the iteration budget is not logged.
pub fn train<S, E, F>(mut make_env: F, scenarios: &[S], cfg: &TrainConfig) -> Result<(QNetwork<f64>, LearningCurve)>
where
    E: Environment,
    F: FnMut(&S) -> Result<E>,
{
    cfg.validate()?;
    if scenarios.is_empty() {
        return Err(Error::Validation("training needs at least one scenario".into()));
    }
    let mut scenario_rng = stream(cfg.seed, STREAM_SCENARIO);
    let mut explore_rng = stream(cfg.seed, STREAM_EXPLORE);
    let mut replay_rng = stream(cfg.seed, STREAM_REPLAY);

    let mut scenario_index = scenario_rng.random_range(0..scenarios.len());
    let mut env = make_env(&scenarios[scenario_index])?;
    let mut features = env.features();
    let mut net = init_network(features.len(), cfg)?;
    let mut target = net.clone();
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity)?;
    let mut optimizer = build_optimizer::<f64>(cfg.optimizer, cfg.learning_rate);
    let update = cfg.update_params();
    let schedule = cfg.epsilon_schedule();
    let warmup = cfg.learning_starts.max(cfg.batch_size);

    let mut curve = LearningCurve::default();
    let mut updates: u64 = 0;
    let (mut steps, mut total, mut discounted, mut discount) = (0usize, 0.0, 0.0, 1.0);
    let (mut loss_sum, mut loss_count) = (0.0, 0usize);

    let mut held: Option<(Action, usize)> = None;

    for iteration in 0..cfg.iterations {
        let epsilon = schedule.value(iteration);
        let action = match held {
            Some((a, left)) => {
                held = (left > 1).then_some((a, left - 1));
                a
            }
            None if cfg.explore_hold > 1 && epsilon > 0.0 && explore_rng.random::<f64>() < epsilon => {
                let a = Action::ALL[explore_rng.random_range(0..Action::COUNT)];
                held = Some((a, cfg.explore_hold - 1));
                a
            }
            None if cfg.explore_hold > 1 => select_action(&net, &features, 0.0, &mut explore_rng)?,
            None => select_action(&net, &features, epsilon, &mut explore_rng)?,
        };
        let step = env.step(action)?;
        if !step.reward.is_finite() {
            return Err(Error::Validation(format!("environment returned reward {}", step.reward)));
        }
        buffer.push(Transition {
            state: std::mem::take(&mut features),
            action,
            reward: step.reward,
            next_state: step.next_features.clone(),
            done: step.done && !(cfg.bootstrap_timeouts && step.outcome == Some(Outcome::Timeout)),
        });
        steps += 1;
        total += step.reward;
        discounted += discount * step.reward;
        discount *= cfg.gamma;

        if buffer.len() >= warmup {
            updates += 1;
            let loss = train_step(&mut net, &mut target, &buffer, &update, updates, optimizer.as_mut(), &mut replay_rng)?;
            loss_sum += loss;
            loss_count += 1;
        }

        if step.done {
            curve.episodes.push(EpisodeLog {
                episode: curve.episodes.len(),
                scenario_index,
                steps,
                total_reward: total,
                discounted_return: discounted,
                outcome: step.outcome.unwrap_or(Outcome::Timeout),
                epsilon,
                mean_loss: (loss_count > 0).then(|| loss_sum / loss_count as f64),
            });
            (steps, total, discounted, discount) = (0, 0.0, 0.0, 1.0);
            held = None;
            (loss_sum, loss_count) = (0.0, 0);
            scenario_index = scenario_rng.random_range(0..scenarios.len());
            env = make_env(&scenarios[scenario_index])?;
            features = env.features();
        } else {
            features = step.next_features;
        }
    }
    Ok((net, curve))
}
