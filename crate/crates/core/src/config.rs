//! Single-file run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineConfig;
use crate::bench::{EpisodeConfig, MapGrid, ParameterRanges, WorldConfig};
use crate::error::{Error, Result};
use crate::planner::PlannerConfig;
use crate::rl::{ObservationConfig, RewardConfig, TrainConfig};

/// Every tunable of a run. Missing keys take their defaults; unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed for scenario generation.
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub world: WorldConfig,
    pub planner: PlannerConfig,
    pub observation: ObservationConfig,
    pub reward: RewardConfig,
    pub train: TrainConfig,
    pub baseline: BaselineConfig,
    pub scenarios: ParameterRanges,
    pub map: MapGrid,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.episode_config().validate()?;
        self.train.validate()?;
        self.baseline.validate()?;
        self.map.validate()
    }

    pub fn episode_config(&self) -> EpisodeConfig {
        EpisodeConfig {
            world: self.world.clone(),
            planner: self.planner.clone(),
            observation: self.observation.clone(),
            reward: self.reward.clone(),
            ranges: self.scenarios.clone(),
            gamma: self.train.gamma,
            record_transitions: false,
        }
    }
}
