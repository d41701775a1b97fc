//! Scenario generation, closed-loop evaluation, metrics, decision maps and traces.

pub mod decision_map;
pub mod episode;
pub mod metrics;
pub mod scenario;
pub mod trace;

pub use decision_map::{decision_map, DecisionMap, MapGrid};
pub use episode::{
    build_world, run_batch, run_env, run_episode, BaselinePolicy, DecisionPolicy, EpisodeConfig, EpisodeEnv,
    EpisodeResult, FnPolicy, GreedyPolicy, ScheduledPolicy, WorldConfig,
};
pub use metrics::{aggregate_metrics, compute_metrics, format_metrics, metrics_to_json, MetricsTable};
pub use scenario::{
    check_scenarios, generate_scenarios, parse_scenarios, read_scenarios, scenarios_to_string, third_vehicle,
    write_scenarios, ParameterRanges, ScenarioSpec,
};
pub use trace::{excursions, export_trace, parse_trace, trace_to_csv, TraceRow, TRACE_HEADER};
