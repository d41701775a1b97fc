//! Observation encoding, reward, Q-network and DQN training.

pub mod action;
pub mod dqn;
pub mod observation;
pub mod optim;
pub mod policy;
pub mod qnet;
pub mod replay;
pub mod reward;
pub mod train;

pub use action::Action;
pub use dqn::{td_targets, train_step, UpdateParams};
pub use observation::{encode_observation, NpcSlot, Observation, ObservationConfig};
pub use optim::{build_optimizer, Adam, Optimizer, OptimizerKind, Sgd};
pub use policy::{greedy_action, select_action, EpsilonSchedule};
pub use qnet::{Dense, Gradient, QNetwork, Sample};
pub use replay::{ReplayBuffer, Transition};
pub use reward::{reward, RewardConfig};
pub use train::{init_network, train, EnvStep, Environment, EpisodeLog, LearningCurve, TrainConfig};
