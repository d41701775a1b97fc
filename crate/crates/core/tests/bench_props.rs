use overtake_core::baseline::{rule_based_decide, BaselineConfig, BaselineState};
use overtake_core::bench::{
    aggregate_metrics, format_metrics, generate_scenarios, metrics_to_json, run_batch, BaselinePolicy, EpisodeConfig,
    FnPolicy, ParameterRanges,
};
use overtake_core::rl::Action;
use overtake_core::world::{Lane, Npc, Outcome, RoadModel, VehicleState, WorldState};
use proptest::prelude::*;

fn cfg() -> EpisodeConfig {
    EpisodeConfig { gamma: 0.95, ..EpisodeConfig::default() }
}

fn follow() -> FnPolicy<impl FnMut(&WorldState<f64>, &[f64]) -> Action + Send> {
    FnPolicy(|_: &WorldState<f64>, _: &[f64]| Action::Following)
}

#[test]
fn outcomes_partition_and_successes_end_at_the_goal() {
    let cfg = cfg();
    let specs = generate_scenarios(24, &cfg.ranges, 77).unwrap();
    let results = run_batch(&specs, BaselinePolicy::default, &cfg, 1).unwrap();
    let road = cfg.world.road().unwrap();
    for r in &results {
        let last = r.trace.last().unwrap();
        assert_eq!(r.completion_time.is_some(), r.outcome.is_success());
        assert!(r.trace.windows(2).all(|w| w[1].t > w[0].t));
        match r.outcome {
            Outcome::Success => {
                assert!(last.s >= road.goal_s());
                assert!(last.d.abs() <= road.lane_width() / 4.0);
            }
            Outcome::Crash { npc_id } => assert!(r.final_world.npc(npc_id).is_some()),
            Outcome::OffRoad | Outcome::Timeout => {}
        }
        assert_eq!(r.final_world.events.len(), 1);
    }
}

#[test]
fn parallel_batches_match_sequential_ones() {
    let cfg = cfg();
    let specs = generate_scenarios(16, &cfg.ranges, 5).unwrap();
    let seq = run_batch(&specs, BaselinePolicy::default, &cfg, 1).unwrap();
    let par = run_batch(&specs, BaselinePolicy::default, &cfg, 4).unwrap();
    let f_seq = run_batch(&specs, follow, &cfg, 1).unwrap();
    let f_par = run_batch(&specs, follow, &cfg, 3).unwrap();
    let (a, b) = aggregate_metrics(("baseline", &seq), ("follow", &f_seq), Some(&specs)).unwrap();
    let (c, d) = aggregate_metrics(("baseline", &par), ("follow", &f_par), Some(&specs)).unwrap();
    assert_eq!(format_metrics(&[a.clone(), b.clone()]), format_metrics(&[c.clone(), d.clone()]));
    assert_eq!(metrics_to_json(&[a, b]), metrics_to_json(&[c, d]));
    for (x, y) in seq.iter().zip(&par) {
        assert_eq!(x.scenario_id, y.scenario_id);
        assert_eq!(x.trace, y.trace);
        assert_eq!(x.discounted_return.to_bits(), y.discounted_return.to_bits());
    }
}

#[test]
fn baseline_always_overtakes_a_lone_slow_leader() {
    let ranges = ParameterRanges { npc_counts: vec![1], ..ParameterRanges::default() };
    let cfg = EpisodeConfig { ranges: ranges.clone(), ..cfg() };
    let specs = generate_scenarios(40, &ranges, 11).unwrap();
    for r in run_batch(&specs, BaselinePolicy::default, &cfg, 1).unwrap() {
        assert_eq!(r.outcome, Outcome::Success, "scenario {}", r.scenario_id);
    }
}

proptest! {
    #[test]
    fn baseline_never_aborts(
        ego_s in 0.0..100.0f64, ego_d in -1.0..4.0f64, ego_v in 0.0..4.2f64,
        npcs in prop::collection::vec((any::<bool>(), -20.0..80.0f64, 0.0..3.0f64), 0..4),
        committed in any::<bool>(), start in 0.0..100.0f64,
    ) {
        let road = RoadModel::new(300.0, 3.0, 110.0).unwrap();
        let npcs = npcs
            .iter()
            .enumerate()
            .map(|(i, &(oncoming, s, v))| {
                let lane = if oncoming { Lane::Opposite } else { Lane::Ego };
                Npc::on_lane(i as u32 + 1, &road, lane, ego_s + s, v, 4.0, 1.8)
            })
            .collect();
        let world = WorldState::new(VehicleState::new(ego_s, ego_d, ego_v, 4.0, 1.8), npcs).unwrap();
        let cfg = BaselineConfig::default();
        let mut state = BaselineState::default();
        if committed {
            state = rule_based_decide(&world, &state, &cfg).1;
            state.overtake_start_s = start;
        }
        let (action, next) = rule_based_decide(&world, &state, &cfg);
        prop_assert_ne!(action, Action::Aborting);
        prop_assert_eq!(rule_based_decide(&world, &state, &cfg), (action, next));
    }
}
