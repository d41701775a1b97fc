//! Greedy action over a grid of NPC1 / NPC2 positions.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bench::episode::EpisodeConfig;
use crate::error::{Error, Result};
use crate::rl::{encode_observation, greedy_action, Action, QNetwork};
use crate::world::{Lane, Npc, VehicleState, WorldState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapGrid {
    pub npc1_s: [f64; 2],
    pub npc2_s: [f64; 2],
    pub resolution: [usize; 2],
    pub ego_speed: f64,
    /// Ego lateral offset; 3 places the ego in the oncoming lane.
    pub ego_d: f64,
    pub v1: f64,
    pub v2: f64,
}

impl Default for MapGrid {
    fn default() -> Self {
        Self {
            npc1_s: [5.0, 60.0],
            npc2_s: [10.0, 150.0],
            resolution: [50, 50],
            ego_speed: 3.0,
            ego_d: 0.0,
            v1: 2.0,
            v2: 2.0,
        }
    }
}

impl MapGrid {
    pub fn validate(&self) -> Result<()> {
        if self.resolution.iter().any(|&r| r < 2) {
            return Err(Error::config("map.resolution", "needs at least 2 cells per axis"));
        }
        for (field, [lo, hi]) in [("map.npc1_s", self.npc1_s), ("map.npc2_s", self.npc2_s)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::config(field, "needs min < max"));
            }
        }
        Ok(())
    }

    fn axis([lo, hi]: [f64; 2], n: usize) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    pub fn npc1_axis(&self) -> Vec<f64> {
        Self::axis(self.npc1_s, self.resolution[0])
    }

    pub fn npc2_axis(&self) -> Vec<f64> {
        Self::axis(self.npc2_s, self.resolution[1])
    }

    /// World for one grid cell, ego at `s = 0`.
    pub fn world(&self, npc1_s: f64, npc2_s: f64, cfg: &EpisodeConfig) -> Result<WorldState<f64>> {
        let w = &cfg.world;
        let road = w.road()?;
        let (len, wid) = (w.vehicle_length, w.vehicle_width);
        let ego = VehicleState::new(0.0, self.ego_d, self.ego_speed, len, wid);
        WorldState::new(
            ego,
            vec![
                Npc::on_lane(1, &road, Lane::Ego, npc1_s, self.v1, len, wid),
                Npc::on_lane(2, &road, Lane::Opposite, npc2_s, self.v2, len, wid),
            ],
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionMap {
    pub npc1_s: Vec<f64>,
    pub npc2_s: Vec<f64>,
    /// `actions[i][j]` for `npc1_s[i]`, `npc2_s[j]`.
    pub actions: Vec<Vec<Action>>,
}

impl DecisionMap {
    /// Row per NPC1 position; the header row carries the NPC2 positions.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("npc1_s\\npc2_s");
        for s in &self.npc2_s {
            let _ = write!(out, ",{s:.3}");
        }
        out.push('\n');
        for (s1, row) in self.npc1_s.iter().zip(&self.actions) {
            let _ = write!(out, "{s1:.3}");
            for a in row {
                let _ = write!(out, ",{}", a.code());
            }
            out.push('\n');
        }
        out
    }

    pub fn count(&self, action: Action) -> usize {
        self.actions.iter().flatten().filter(|&&a| a == action).count()
    }
}

pub fn decision_map(net: &QNetwork<f64>, grid: &MapGrid, cfg: &EpisodeConfig) -> Result<DecisionMap> {
    grid.validate()?;
    let road = cfg.world.road()?;
    let (xs, ys) = (grid.npc1_axis(), grid.npc2_axis());
    let mut actions = Vec::with_capacity(xs.len());
    for &s1 in &xs {
        let mut row = Vec::with_capacity(ys.len());
        for &s2 in &ys {
            let world = grid.world(s1, s2, cfg)?;
            let features = encode_observation(&world, &road, &cfg.observation).features(&cfg.observation);
            row.push(greedy_action(&net.forward(&features)?));
        }
        actions.push(row);
    }
    Ok(DecisionMap {
        npc1_s: xs,
        npc2_s: ys,
        actions,
    })
}
