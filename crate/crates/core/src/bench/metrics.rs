//! Success, completion time and crash attribution over a result set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bench::episode::EpisodeResult;
use crate::bench::scenario::ScenarioSpec;
use crate::error::{Error, Result};
use crate::world::Outcome;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub policy: String,
    pub episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Mean over successes; 0 when there are none.
    pub mean_completion_time_s: f64,
    pub crashes: usize,
    /// Share of crashes with the same-lane vehicle, percent.
    pub crash_share_npc1: f64,
    /// Share of crashes with an oncoming vehicle, percent.
    pub crash_share_npc2: f64,
    /// False when there were no crashes and the shares are reported as 0.
    pub crash_shares_defined: bool,
    pub off_road: usize,
    pub timeouts: usize,
    /// Scenarios failed by both compared policies, percent of all scenarios.
    pub crash_overlap_with_other_policy: f64,
    pub mean_v1_in_failures: f64,
    pub mean_v2_in_failures: f64,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn sorted_by_id(results: &[EpisodeResult]) -> Vec<&EpisodeResult> {
    let mut v: Vec<&EpisodeResult> = results.iter().collect();
    v.sort_by_key(|r| r.scenario_id);
    v
}

/// Metrics of a single result set. NPC speeds in failures come from `specs`
/// when given; vehicles absent from a scenario are skipped.
pub fn compute_metrics(policy: &str, results: &[EpisodeResult], specs: Option<&[ScenarioSpec]>) -> MetricsTable {
    let results = sorted_by_id(results);
    let n = results.len();
    let successes = results.iter().filter(|r| r.outcome.is_success()).count();
    let crash_ids: Vec<u32> = results
        .iter()
        .filter_map(|r| match r.outcome {
            Outcome::Crash { npc_id } => Some(npc_id),
            _ => None,
        })
        .collect();
    let npc1 = crash_ids.iter().filter(|&&id| id == 1).count();
    let oncoming = crash_ids.len() - npc1;
    let by_id: BTreeMap<u64, &ScenarioSpec> = specs.unwrap_or(&[]).iter().map(|s| (s.id, s)).collect();
    let failed_specs: Vec<&ScenarioSpec> = results
        .iter()
        .filter(|r| !r.outcome.is_success())
        .filter_map(|r| by_id.get(&r.scenario_id).copied())
        .collect();
    MetricsTable {
        policy: policy.to_string(),
        episodes: n,
        successes,
        success_rate: pct(successes, n),
        mean_completion_time_s: mean(results.iter().filter_map(|r| r.completion_time)),
        crashes: crash_ids.len(),
        crash_share_npc1: pct(npc1, crash_ids.len()),
        crash_share_npc2: pct(oncoming, crash_ids.len()),
        crash_shares_defined: !crash_ids.is_empty(),
        off_road: results.iter().filter(|r| r.outcome == Outcome::OffRoad).count(),
        timeouts: results.iter().filter(|r| r.outcome == Outcome::Timeout).count(),
        crash_overlap_with_other_policy: 0.0,
        mean_v1_in_failures: mean(failed_specs.iter().filter(|s| s.npc_count >= 1).map(|s| s.v1_mps)),
        mean_v2_in_failures: mean(failed_specs.iter().filter(|s| s.npc_count >= 2).map(|s| s.v2_mps)),
    }
}

/// Paired metrics for two policies evaluated on the same scenario ids.
pub fn aggregate_metrics(
    (name_a, results_a): (&str, &[EpisodeResult]),
    (name_b, results_b): (&str, &[EpisodeResult]),
    specs: Option<&[ScenarioSpec]>,
) -> Result<(MetricsTable, MetricsTable)> {
    let ids_a: BTreeSet<u64> = results_a.iter().map(|r| r.scenario_id).collect();
    let ids_b: BTreeSet<u64> = results_b.iter().map(|r| r.scenario_id).collect();
    if ids_a != ids_b || ids_a.len() != results_a.len() || ids_b.len() != results_b.len() {
        return Err(Error::MismatchedScenarios);
    }
    let failed = |rs: &[EpisodeResult]| -> BTreeSet<u64> {
        rs.iter().filter(|r| !r.outcome.is_success()).map(|r| r.scenario_id).collect()
    };
    let both = failed(results_a).intersection(&failed(results_b)).count();
    let overlap = pct(both, ids_a.len());
    let mut a = compute_metrics(name_a, results_a, specs);
    let mut b = compute_metrics(name_b, results_b, specs);
    a.crash_overlap_with_other_policy = overlap;
    b.crash_overlap_with_other_policy = overlap;
    Ok((a, b))
}

/// Aligned text table, one column per policy.
pub fn format_metrics(tables: &[MetricsTable]) -> String {
    let mut rows: Vec<(&str, Vec<String>)> = vec![
        ("policy", tables.iter().map(|t| t.policy.clone()).collect()),
        ("episodes", tables.iter().map(|t| t.episodes.to_string()).collect()),
        ("success rate %", tables.iter().map(|t| format!("{:.1}", t.success_rate)).collect()),
        ("completion time (s)", tables.iter().map(|t| format!("{:.2}", t.mean_completion_time_s)).collect()),
        ("crashes", tables.iter().map(|t| t.crashes.to_string()).collect()),
    ];
    let share = |t: &MetricsTable, v: f64| {
        if t.crash_shares_defined {
            format!("{v:.1}")
        } else {
            "n/a".to_string()
        }
    };
    rows.push(("crash with NPC1 %", tables.iter().map(|t| share(t, t.crash_share_npc1)).collect()));
    rows.push(("crash with NPC2 %", tables.iter().map(|t| share(t, t.crash_share_npc2)).collect()));
    rows.push(("off road", tables.iter().map(|t| t.off_road.to_string()).collect()));
    rows.push(("timeouts", tables.iter().map(|t| t.timeouts.to_string()).collect()));
    if tables.len() > 1 {
        rows.push((
            "failed in same scenarios %",
            tables.iter().map(|t| format!("{:.1}", t.crash_overlap_with_other_policy)).collect(),
        ));
    }
    rows.push(("mean V1 in failures", tables.iter().map(|t| format!("{:.2}", t.mean_v1_in_failures)).collect()));
    rows.push(("mean V2 in failures", tables.iter().map(|t| format!("{:.2}", t.mean_v2_in_failures)).collect()));

    let label_width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (label, cells) in rows {
        let _ = write!(out, "{label:<label_width$}");
        for c in cells {
            let _ = write!(out, "  {c:>12}");
        }
        out.push('\n');
    }
    out
}

pub fn metrics_to_json(tables: &[MetricsTable]) -> String {
    let mut out = String::new();
    for t in tables {
        out.push_str(&serde_json::to_string(t).expect("plain record serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{VehicleState, WorldState};

    fn result(id: u64, outcome: Outcome) -> EpisodeResult {
        EpisodeResult {
            scenario_id: id,
            outcome,
            completion_time: outcome.is_success().then_some(30.0 + id as f64),
            trace: vec![],
            rewards: vec![],
            transitions: vec![],
            discounted_return: 0.0,
            final_world: WorldState::new(VehicleState::new(0.0, 0.0, 0.0, 4.0, 1.8), vec![]).unwrap(),
        }
    }

    fn ten() -> Vec<EpisodeResult> {
        let mut v: Vec<EpisodeResult> = (0..6).map(|i| result(i, Outcome::Success)).collect();
        v.extend((6..9).map(|i| result(i, Outcome::Crash { npc_id: 2 })));
        v.push(result(9, Outcome::Crash { npc_id: 1 }));
        v
    }

    #[test]
    fn hand_counted_table() {
        let m = compute_metrics("a", &ten(), None);
        assert_eq!(m.success_rate, 60.0);
        assert_eq!(m.crash_share_npc1, 25.0);
        assert_eq!(m.crash_share_npc2, 75.0);
        assert_eq!(m.mean_completion_time_s, 32.5);
        assert!(m.crash_shares_defined);
    }

    #[test]
    fn all_successful_flags_undefined_shares() {
        let rs: Vec<EpisodeResult> = (0..4).map(|i| result(i, Outcome::Success)).collect();
        let m = compute_metrics("a", &rs, None);
        assert_eq!(m.success_rate, 100.0);
        assert_eq!((m.crash_share_npc1, m.crash_share_npc2), (0.0, 0.0));
        assert!(!m.crash_shares_defined);
    }

    #[test]
    fn shares_exclude_off_road_and_timeouts() {
        let mut rs = ten();
        rs.push(result(10, Outcome::OffRoad));
        rs.push(result(11, Outcome::Timeout));
        let m = compute_metrics("a", &rs, None);
        assert_eq!(m.crash_share_npc1 + m.crash_share_npc2, 100.0);
        assert_eq!((m.off_road, m.timeouts), (1, 1));
    }

    #[test]
    fn paired_overlap_and_mismatch() {
        let a = ten();
        let mut b: Vec<EpisodeResult> = (0..10).map(|i| result(i, Outcome::Success)).collect();
        b[7] = result(7, Outcome::Timeout);
        b[9] = result(9, Outcome::Crash { npc_id: 2 });
        b[0] = result(0, Outcome::Crash { npc_id: 1 });
        let (ma, mb) = aggregate_metrics(("a", &a), ("b", &b), None).unwrap();
        assert_eq!(ma.crash_overlap_with_other_policy, 20.0);
        assert_eq!(mb.crash_overlap_with_other_policy, 20.0);
        assert!(aggregate_metrics(("a", &a), ("b", &b[..9]), None).is_err());
    }

    #[test]
    fn order_does_not_change_output() {
        let a = ten();
        let mut rev = ten();
        rev.reverse();
        assert_eq!(
            metrics_to_json(&[compute_metrics("a", &a, None)]),
            metrics_to_json(&[compute_metrics("a", &rev, None)])
        );
        assert!(format_metrics(&[compute_metrics("a", &a, None)]).contains("success rate %"));
    }
}
