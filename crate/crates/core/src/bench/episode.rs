//! Closed-loop episodes: decision, planner, controllers and physics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{rule_based_decide, BaselineConfig, BaselineState};
use crate::bench::scenario::{third_vehicle, ParameterRanges, ScenarioSpec};
use crate::bench::trace::TraceRow;
use crate::error::{Error, Result};
use crate::planner::{
    apply_action, evaluate_rollouts, find_leader, generate_rollouts, longitudinal_control, pure_pursuit, PlannerConfig,
};
use crate::rl::{encode_observation, reward, Action, EnvStep, Environment, ObservationConfig, QNetwork, RewardConfig};
use crate::rl::{greedy_action, Transition};
use crate::world::{step_world, KinematicLimits, Lane, Npc, Outcome, RoadModel, VehicleState, WorldParams, WorldState};

/// Road, vehicle and timing parameters of the simulated world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub road_length: f64,
    pub lane_width: f64,
    pub goal_s: f64,
    pub dt: f64,
    pub t_max: f64,
    /// Physics steps per high-level decision.
    pub decision_steps: usize,
    pub wheelbase: f64,
    pub steering_max: f64,
    pub v_max: f64,
    pub vehicle_length: f64,
    pub vehicle_width: f64,
    pub ego_start_speed: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            road_length: 300.0,
            lane_width: 3.0,
            goal_s: 110.0,
            dt: 0.05,
            t_max: 60.0,
            decision_steps: 20,
            wheelbase: 2.8,
            steering_max: 0.5,
            v_max: 4.2,
            vehicle_length: 4.0,
            vehicle_width: 1.8,
            ego_start_speed: 3.0,
        }
    }
}

impl WorldConfig {
    pub fn road(&self) -> Result<RoadModel<f64>> {
        RoadModel::new(self.road_length, self.lane_width, self.goal_s)
    }

    pub fn world_params(&self) -> Result<WorldParams<f64>> {
        let limits = KinematicLimits {
            wheelbase: self.wheelbase,
            steering_max: self.steering_max,
            v_max: self.v_max,
        };
        limits.validate()?;
        Ok(WorldParams {
            road: self.road()?,
            limits,
            dt: self.dt,
            t_max: self.t_max,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.world_params()?;
        for (field, v) in [
            ("world.dt", self.dt),
            ("world.t_max", self.t_max),
            ("world.vehicle_length", self.vehicle_length),
            ("world.vehicle_width", self.vehicle_width),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(field, "must be positive"));
            }
        }
        if !(self.ego_start_speed >= 0.0 && self.ego_start_speed <= self.v_max) {
            return Err(Error::config("world.ego_start_speed", "must lie in [0, v_max]"));
        }
        if self.decision_steps == 0 {
            return Err(Error::config("world.decision_steps", "must be positive"));
        }
        Ok(())
    }

    /// Decision interval in seconds.
    pub fn decision_dt(&self) -> f64 {
        self.dt * self.decision_steps as f64
    }
}

/// Everything an episode needs besides the scenario and the policy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeConfig {
    pub world: WorldConfig,
    pub planner: PlannerConfig,
    pub observation: ObservationConfig,
    pub reward: RewardConfig,
    pub ranges: ParameterRanges,
    /// Discount used for the reported episode return.
    pub gamma: f64,
    /// Keep every transition in the result.
    pub record_transitions: bool,
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.planner.validate()?;
        self.observation.validate()?;
        self.reward.validate()?;
        self.ranges.validate()?;
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::config("train.gamma", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Initial world for a scenario: ego at the origin, NPC1 ahead in the ego
/// lane, NPC2 and NPC3 oncoming further down the road.
pub fn build_world(spec: &ScenarioSpec, cfg: &EpisodeConfig) -> Result<WorldState<f64>> {
    let w = &cfg.world;
    let road = w.road()?;
    if !(spec.d1_m > 0.0 && spec.d2_m > 0.0) || spec.npc_count > 3 {
        return Err(Error::Validation(format!("scenario {} is invalid", spec.id)));
    }
    let (len, wid) = (w.vehicle_length, w.vehicle_width);
    let ego = VehicleState::new(0.0, road.ego_lane_center_d(), w.ego_start_speed, len, wid);
    let mut npcs = Vec::new();
    if spec.npc_count >= 1 {
        npcs.push(Npc::on_lane(1, &road, Lane::Ego, spec.d1_m, spec.v1_mps, len, wid));
    }
    if spec.npc_count >= 2 {
        let s2 = spec.d1_m + spec.d2_m;
        npcs.push(Npc::on_lane(2, &road, Lane::Opposite, s2, spec.v2_mps, len, wid));
        if spec.npc_count >= 3 {
            let (gap, speed) = third_vehicle(spec, &cfg.ranges);
            npcs.push(Npc::on_lane(3, &road, Lane::Opposite, s2 + gap, speed, len, wid));
        }
    }
    WorldState::new(ego, npcs)
}

/// One scenario run at decision cadence.
#[derive(Debug, Clone)]
pub struct EpisodeEnv<'a> {
    cfg: &'a EpisodeConfig,
    params: WorldParams<f64>,
    scenario_id: u64,
    world: WorldState<f64>,
    trace: Vec<TraceRow>,
    rewards: Vec<f64>,
    transitions: Vec<Transition<f64>>,
    discounted_return: f64,
    discount: f64,
    last: Option<(f64, Action, usize)>,
}

impl<'a> EpisodeEnv<'a> {
    pub fn new(spec: &ScenarioSpec, cfg: &'a EpisodeConfig) -> Result<Self> {
        Self::from_world(spec.id, build_world(spec, cfg)?, cfg)
    }

    pub fn from_world(scenario_id: u64, world: WorldState<f64>, cfg: &'a EpisodeConfig) -> Result<Self> {
        Ok(Self {
            cfg,
            params: cfg.world.world_params()?,
            scenario_id,
            world,
            trace: Vec::new(),
            rewards: Vec::new(),
            transitions: Vec::new(),
            discounted_return: 0.0,
            discount: 1.0,
            last: None,
        })
    }

    pub fn world(&self) -> &WorldState<f64> {
        &self.world
    }

    pub fn road(&self) -> &RoadModel<f64> {
        &self.params.road
    }

    pub fn is_done(&self) -> bool {
        self.world.is_terminated()
    }

    fn row(&self, steering: f64, action: Action, rollout_id: usize) -> TraceRow {
        let ego = &self.world.ego;
        TraceRow {
            t: self.world.time,
            s: ego.s,
            d: ego.d,
            heading: ego.heading,
            steering,
            speed: ego.speed,
            action,
            rollout_id,
        }
    }

    /// Final trace row at the terminal state, then the episode summary.
    pub fn finish(mut self) -> EpisodeResult {
        let outcome = self.world.terminal_event().map(|e| Outcome::from(e.kind));
        if let Some((steering, action, rollout_id)) = self.last {
            if self.trace.last().map(|r| r.t) != Some(self.world.time) {
                let row = self.row(steering, action, rollout_id);
                self.trace.push(row);
            }
        }
        let outcome = outcome.unwrap_or(Outcome::Timeout);
        EpisodeResult {
            scenario_id: self.scenario_id,
            completion_time: outcome.is_success().then_some(self.world.time),
            outcome,
            trace: self.trace,
            rewards: self.rewards,
            transitions: self.transitions,
            discounted_return: self.discounted_return,
            final_world: self.world,
        }
    }
}

impl Environment for EpisodeEnv<'_> {
    fn features(&self) -> Vec<f64> {
        encode_observation(&self.world, &self.params.road, &self.cfg.observation).features(&self.cfg.observation)
    }

    fn step(&mut self, action: Action) -> Result<EnvStep> {
        let state = self.features();
        let prev = self.world.clone();
        let road = self.params.road;
        let planner = &self.cfg.planner;
        let behavior = apply_action(action, planner, &road);
        for k in 0..self.cfg.world.decision_steps {
            let rollouts = generate_rollouts(&self.world.ego, &behavior, planner)?;
            let (_, selected) = evaluate_rollouts(&rollouts, &self.world, &behavior, planner);
            let path = &rollouts[selected];
            self.world.target_lane = road.lane_of(path.target_d);
            let steering = pure_pursuit(&self.world.ego, path, planner.lookahead, &self.params.limits);
            let leader = find_leader(&self.world, path, planner);
            let accel = longitudinal_control(&self.world.ego, leader.as_ref(), &behavior, planner);
            if k == 0 {
                let row = self.row(steering, action, selected);
                self.trace.push(row);
            }
            self.last = Some((steering, action, selected));
            self.world = step_world(&self.world, steering, accel, &self.params)?;
            if self.world.is_terminated() {
                break;
            }
        }
        let r = reward(&prev, &self.world, &road, &self.cfg.reward);
        self.rewards.push(r);
        self.discounted_return += self.discount * r;
        self.discount *= self.cfg.gamma;
        let next_features = self.features();
        let done = self.world.is_terminated();
        if self.cfg.record_transitions {
            self.transitions.push(Transition {
                state,
                action,
                reward: r,
                next_state: next_features.clone(),
                done,
            });
        }
        Ok(EnvStep {
            reward: r,
            next_features,
            done,
            outcome: self.world.terminal_event().map(|e| Outcome::from(e.kind)),
        })
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub scenario_id: u64,
    pub outcome: Outcome,
    /// Set iff the episode succeeded.
    pub completion_time: Option<f64>,
    pub trace: Vec<TraceRow>,
    /// Reward of every decision step.
    pub rewards: Vec<f64>,
    /// Empty unless the config asked for them.
    pub transitions: Vec<Transition<f64>>,
    pub discounted_return: f64,
    pub final_world: WorldState<f64>,
}

/// High-level decision maker driven once per decision step.
pub trait DecisionPolicy {
    fn reset(&mut self) {}
    fn decide(&mut self, world: &WorldState<f64>, features: &[f64]) -> Result<Action>;
}

/// Greedy (ε = 0) action from a trained network.
#[derive(Debug, Clone, Copy)]
pub struct GreedyPolicy<'a> {
    pub net: &'a QNetwork<f64>,
}

impl DecisionPolicy for GreedyPolicy<'_> {
    fn decide(&mut self, _world: &WorldState<f64>, features: &[f64]) -> Result<Action> {
        Ok(greedy_action(&self.net.forward(features)?))
    }
}

#[derive(Debug, Clone, Default)]
pub struct BaselinePolicy {
    pub cfg: BaselineConfig,
    state: BaselineState,
}

impl BaselinePolicy {
    pub fn new(cfg: BaselineConfig) -> Self {
        Self {
            cfg,
            state: BaselineState::default(),
        }
    }
}

impl DecisionPolicy for BaselinePolicy {
    fn reset(&mut self) {
        self.state = BaselineState::default();
    }

    fn decide(&mut self, world: &WorldState<f64>, _features: &[f64]) -> Result<Action> {
        let (action, next) = rule_based_decide(world, &self.state, &self.cfg);
        self.state = next;
        Ok(action)
    }
}

/// Time-indexed action list: each entry holds from its start time until the next.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledPolicy {
    pub schedule: Vec<(f64, Action)>,
}

impl DecisionPolicy for ScheduledPolicy {
    fn decide(&mut self, world: &WorldState<f64>, _features: &[f64]) -> Result<Action> {
        Ok(self
            .schedule
            .iter()
            .take_while(|(t, _)| *t <= world.time + 1e-9)
            .last()
            .map(|&(_, a)| a)
            .unwrap_or(Action::Following))
    }
}

/// Adapter for closures.
pub struct FnPolicy<F>(pub F);

impl<F: FnMut(&WorldState<f64>, &[f64]) -> Action> DecisionPolicy for FnPolicy<F> {
    fn decide(&mut self, world: &WorldState<f64>, features: &[f64]) -> Result<Action> {
        Ok((self.0)(world, features))
    }
}

/// Runs one policy on a prepared environment until a terminal event.
pub fn run_env(mut env: EpisodeEnv<'_>, policy: &mut dyn DecisionPolicy) -> Result<EpisodeResult> {
    policy.reset();
    while !env.is_done() {
        let features = env.features();
        let action = policy.decide(env.world(), &features)?;
        env.step(action)?;
    }
    Ok(env.finish())
}

pub fn run_episode(spec: &ScenarioSpec, policy: &mut dyn DecisionPolicy, cfg: &EpisodeConfig) -> Result<EpisodeResult> {
    run_env(EpisodeEnv::new(spec, cfg)?, policy)
}

/// Runs every scenario with a fresh policy from `make_policy`; results come
/// back in input order regardless of `jobs`.
pub fn run_batch<P, F>(specs: &[ScenarioSpec], make_policy: F, cfg: &EpisodeConfig, jobs: usize) -> Result<Vec<EpisodeResult>>
where
    P: DecisionPolicy,
    F: Fn() -> P + Sync,
{
    let run = |spec: &ScenarioSpec| run_episode(spec, &mut make_policy(), cfg);
    if jobs <= 1 {
        return specs.iter().map(run).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
    pool.install(|| specs.par_iter().map(run).collect())
}
