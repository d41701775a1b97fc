//! Randomized overtaking scenarios and their line-per-record file format.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One scenario: NPC1 ahead in the ego lane, NPC2 (and NPC3) oncoming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub id: u64,
    /// Ego to NPC1 initial distance.
    pub d1_m: f64,
    /// NPC1 to NPC2 initial distance along the road.
    pub d2_m: f64,
    pub v1_mps: f64,
    pub v2_mps: f64,
    pub npc_count: u8,
    /// Seed for anything not listed above, such as the third vehicle.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParameterRanges {
    pub d1_m: [f64; 2],
    pub d2_m: [f64; 2],
    pub v1_mps: [f64; 2],
    pub v2_mps: [f64; 2],
    /// Gap behind NPC2 and speed of the third vehicle.
    pub d3_m: [f64; 2],
    pub v3_mps: [f64; 2],
    pub npc_counts: Vec<u8>,
}

impl Default for ParameterRanges {
    fn default() -> Self {
        Self {
            d1_m: [20.0, 60.0],
            d2_m: [30.0, 120.0],
            v1_mps: [1.0, 3.0],
            v2_mps: [1.0, 3.0],
            d3_m: [30.0, 120.0],
            v3_mps: [1.0, 3.0],
            npc_counts: vec![1, 2, 3],
        }
    }
}

impl ParameterRanges {
    fn intervals(&self) -> [(&'static str, [f64; 2]); 6] {
        [
            ("scenarios.d1_m", self.d1_m),
            ("scenarios.d2_m", self.d2_m),
            ("scenarios.v1_mps", self.v1_mps),
            ("scenarios.v2_mps", self.v2_mps),
            ("scenarios.d3_m", self.d3_m),
            ("scenarios.v3_mps", self.v3_mps),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (field, [lo, hi]) in self.intervals() {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::config(field, format!("invalid range [{lo}, {hi}]")));
            }
            if lo < 0.0 {
                return Err(Error::config(field, "must be non-negative"));
            }
        }
        for (field, [lo, _]) in &self.intervals()[..2] {
            if *lo <= 0.0 {
                return Err(Error::config(*field, "distances must be positive"));
            }
        }
        if self.npc_counts.is_empty() || self.npc_counts.iter().any(|&c| c > 3) {
            return Err(Error::config("scenarios.npc_counts", "must be a nonempty subset of {0, 1, 2, 3}"));
        }
        Ok(())
    }

    /// Checks that `spec` could have been drawn from these ranges.
    pub fn contains(&self, spec: &ScenarioSpec) -> bool {
        let inside = |v: f64, [lo, hi]: [f64; 2]| v >= lo && v <= hi;
        inside(spec.d1_m, self.d1_m)
            && inside(spec.d2_m, self.d2_m)
            && inside(spec.v1_mps, self.v1_mps)
            && inside(spec.v2_mps, self.v2_mps)
            && self.npc_counts.contains(&spec.npc_count)
    }
}

fn uniform<R: Rng>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Random stream owned by scenario `id` under `master_seed`.
///
/// Each scenario draws from its own ChaCha stream, so a scenario's values do
/// not depend on how many others are generated or in which order.
pub fn scenario_stream(master_seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(id);
    rng
}

pub fn generate_scenarios(n: usize, ranges: &ParameterRanges, seed: u64) -> Result<Vec<ScenarioSpec>> {
    ranges.validate()?;
    Ok((0..n as u64)
        .map(|id| {
            let mut rng = scenario_stream(seed, id);
            ScenarioSpec {
                id,
                d1_m: uniform(&mut rng, ranges.d1_m),
                d2_m: uniform(&mut rng, ranges.d2_m),
                v1_mps: uniform(&mut rng, ranges.v1_mps),
                v2_mps: uniform(&mut rng, ranges.v2_mps),
                npc_count: *ranges.npc_counts.choose(&mut rng).expect("validated nonempty"),
                seed: rng.next_u64(),
            }
        })
        .collect())
}

/// Parameters of the third (oncoming) vehicle, derived from the scenario seed.
pub fn third_vehicle(spec: &ScenarioSpec, ranges: &ParameterRanges) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gap = uniform(&mut rng, ranges.d3_m);
    let speed = uniform(&mut rng, ranges.v3_mps);
    (gap, speed)
}

pub fn scenarios_to_string(specs: &[ScenarioSpec]) -> String {
    let mut out = String::new();
    for spec in specs {
        out.push_str(&serde_json::to_string(spec).expect("plain record serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_scenarios(text: &str) -> Result<Vec<ScenarioSpec>> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| Error::ScenarioFormat {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_scenarios(path: impl AsRef<Path>, specs: &[ScenarioSpec]) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(scenarios_to_string(specs).as_bytes())?;
    Ok(())
}

pub fn read_scenarios(path: impl AsRef<Path>) -> Result<Vec<ScenarioSpec>> {
    parse_scenarios(&fs::read_to_string(path)?)
}

/// Ids of records that fall outside `ranges`.
pub fn check_scenarios(specs: &[ScenarioSpec], ranges: &ParameterRanges) -> Vec<u64> {
    specs.iter().filter(|s| !ranges.contains(s)).map(|s| s.id).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_scenarios() {
        assert!(generate_scenarios(0, &ParameterRanges::default(), 1).unwrap().is_empty());
        assert_eq!(scenarios_to_string(&[]), "");
    }

    #[test]
    fn deterministic_and_prefix_stable() {
        let r = ParameterRanges::default();
        let a = generate_scenarios(50, &r, 42).unwrap();
        assert_eq!(a, generate_scenarios(50, &r, 42).unwrap());
        assert_eq!(a[..10], generate_scenarios(10, &r, 42).unwrap()[..]);
        assert_ne!(a, generate_scenarios(50, &r, 43).unwrap());
    }

    #[test]
    fn speeds_within_range_with_centered_mean() {
        let r = ParameterRanges::default();
        let specs = generate_scenarios(3000, &r, 7).unwrap();
        assert!(check_scenarios(&specs, &r).is_empty());
        let mean1 = specs.iter().map(|s| s.v1_mps).sum::<f64>() / 3000.0;
        let mean2 = specs.iter().map(|s| s.v2_mps).sum::<f64>() / 3000.0;
        // Uniform[1, 3] has sd 0.577; the mean of 3000 draws has sd 0.0105.
        assert!((1.9..=2.1).contains(&mean1), "{mean1}");
        assert!((1.9..=2.1).contains(&mean2), "{mean2}");
        for c in 1..=3u8 {
            let k = specs.iter().filter(|s| s.npc_count == c).count();
            assert!((850..=1150).contains(&k), "count {c}: {k}");
        }
    }

    #[test]
    fn file_round_trip_keeps_field_order() {
        let specs = generate_scenarios(3, &ParameterRanges::default(), 5).unwrap();
        let text = scenarios_to_string(&specs);
        assert!(text.lines().all(|l| l.starts_with("{\"id\":") && l.contains("\"d1_m\"")));
        let first = text.lines().next().unwrap();
        let order = ["\"id\"", "\"d1_m\"", "\"d2_m\"", "\"v1_mps\"", "\"v2_mps\"", "\"npc_count\"", "\"seed\""];
        let pos: Vec<usize> = order.iter().map(|k| first.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(parse_scenarios(&text).unwrap(), specs);
    }

    #[test]
    fn bad_lines_report_line_numbers() {
        let err = parse_scenarios("{\"id\":0}\n").unwrap_err();
        assert!(matches!(err, Error::ScenarioFormat { line: 1, .. }));
    }

    #[test]
    fn inverted_range_names_the_field() {
        let r = ParameterRanges {
            v2_mps: [3.0, 1.0],
            ..ParameterRanges::default()
        };
        match generate_scenarios(1, &r, 0) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "scenarios.v2_mps"),
            other => panic!("{other:?}"),
        }
    }
}
