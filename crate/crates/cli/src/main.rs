use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use overtake_core::bench::{
    self, aggregate_metrics, check_scenarios, compute_metrics, decision_map, export_trace, format_metrics,
    generate_scenarios, metrics_to_json, read_scenarios, run_batch, run_episode, write_scenarios, BaselinePolicy,
    DecisionPolicy, EpisodeResult, GreedyPolicy, ScheduledPolicy,
};
use overtake_core::rl::{init_network, train, Action, QNetwork};
use overtake_core::{Error, RunConfig};

#[derive(Parser)]
#[command(name = "overtake", version, about = "Abortable overtaking: scenarios, DQN training, evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; missing keys take defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random scenarios, or check an existing scenario file
    Gen(GenArgs),
    /// Train the DQN decision maker
    Train(TrainArgs),
    /// Evaluate the trained agent and/or the rule-based baseline
    Eval(EvalArgs),
    /// Greedy-action grid over NPC1/NPC2 positions
    Map(MapArgs),
    /// Run one scenario and export its per-decision trace
    Trace(TraceArgs),
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: Common,
    /// Number of scenarios
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Master seed [default: config `seed`]
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (writes scenarios.jsonl and config.toml)
    #[arg(long, required_unless_present = "check")]
    out: Option<PathBuf>,
    /// Validate an existing scenario file against the configured ranges instead
    #[arg(long, conflicts_with = "out")]
    check: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// Scenario file (one JSON record per line)
    #[arg(long)]
    scenarios: PathBuf,
    /// Output directory (writes model.qnet, learning_curve.csv, config.toml)
    #[arg(long)]
    out: PathBuf,
    /// Decision-step iterations [default: config `train.iterations`]
    #[arg(long)]
    iters: Option<u64>,
    /// Training seed [default: config `train.seed`]
    #[arg(long)]
    seed: Option<u64>,
    /// Write the freshly initialized network without training
    #[arg(long)]
    init_only: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyKind {
    Rl,
    Baseline,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    scenarios: PathBuf,
    /// Output directory (writes metrics.txt, metrics.jsonl, episodes.csv, config.toml)
    #[arg(long)]
    out: PathBuf,
    /// Trained model, required for the rl policy and --compare
    #[arg(long)]
    model: Option<PathBuf>,
    /// Policy to evaluate
    #[arg(long, value_enum, default_value = "rl")]
    policy: PolicyKind,
    /// Evaluate both policies and report paired metrics
    #[arg(long)]
    compare: bool,
    /// Parallel episodes
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Also export one trace CSV per episode under traces/
    #[arg(long)]
    traces: bool,
}

#[derive(Args)]
struct MapArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    model: PathBuf,
    /// Output directory (writes decision_map.csv and config.toml)
    #[arg(long)]
    out: PathBuf,
    /// Cells per axis [default: config `map.resolution`]
    #[arg(long)]
    resolution: Option<usize>,
    /// NPC1 speed [default: config `map.v1`]
    #[arg(long)]
    v1: Option<f64>,
    /// NPC2 speed [default: config `map.v2`]
    #[arg(long)]
    v2: Option<f64>,
    /// Ego lateral offset [default: config `map.ego_d`]
    #[arg(long)]
    ego_d: Option<f64>,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    scenarios: PathBuf,
    /// Scenario id to run
    #[arg(long)]
    id: u64,
    /// Output CSV file
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "rl")]
    policy: PolicyKind,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Hand-specified decisions `t:action,...` (actions F, O, A), overriding --policy
    #[arg(long)]
    schedule: Option<String>,
}

/// Usage and configuration problems exit with 1, everything else with 2.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config { .. }) => 1,
        _ if err.downcast_ref::<Usage>().is_some() => 1,
        _ => 2,
    }
}

#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn load_config(common: &Common) -> anyhow::Result<RunConfig> {
    match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            Ok(RunConfig::from_toml_str(&text)?)
        }
        None => Ok(RunConfig::default()),
    }
}

fn prepare_out(dir: &Path, cfg: &RunConfig) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut echoed = cfg.clone();
    echoed.output_dir = Some(dir.to_path_buf());
    fs::write(dir.join("config.toml"), echoed.to_toml_string())?;
    Ok(())
}

fn load_model(path: &Path, cfg: &RunConfig) -> anyhow::Result<QNetwork<f64>> {
    let net = QNetwork::load(path).with_context(|| format!("loading model {}", path.display()))?;
    let expected = cfg.observation.dim();
    if net.input_dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: net.input_dim(),
        })
        .with_context(|| format!("model {} does not fit the observation encoding", path.display()));
    }
    Ok(net)
}

fn load_scenarios(path: &Path) -> anyhow::Result<Vec<bench::ScenarioSpec>> {
    read_scenarios(path).with_context(|| format!("reading scenarios {}", path.display()))
}

fn cmd_gen(args: GenArgs) -> anyhow::Result<()> {
    let mut cfg = load_config(&args.common)?;
    if let Some(path) = args.check {
        let specs = load_scenarios(&path)?;
        let bad = check_scenarios(&specs, &cfg.scenarios);
        if !bad.is_empty() {
            bail!("{} of {} records outside the configured ranges, first ids {:?}", bad.len(), specs.len(), &bad[..bad.len().min(10)]);
        }
        println!("{}: {} records, all within ranges", path.display(), specs.len());
        return Ok(());
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args.out.expect("required by clap");
    let specs = generate_scenarios(args.n, &cfg.scenarios, cfg.seed)?;
    prepare_out(&out, &cfg)?;
    write_scenarios(out.join("scenarios.jsonl"), &specs)?;
    println!("wrote {} scenarios to {}", specs.len(), out.join("scenarios.jsonl").display());
    Ok(())
}

fn cmd_train(args: TrainArgs) -> anyhow::Result<()> {
    let mut cfg = load_config(&args.common)?;
    if let Some(iters) = args.iters {
        cfg.train.iterations = iters;
    }
    if let Some(seed) = args.seed {
        cfg.train.seed = seed;
    }
    cfg.validate()?;
    let specs = load_scenarios(&args.scenarios)?;
    if specs.is_empty() {
        return Err(usage(format!("{} holds no scenarios", args.scenarios.display())));
    }
    prepare_out(&args.out, &cfg)?;
    let episode_cfg = cfg.episode_config();
    let (net, curve) = if args.init_only {
        (init_network(cfg.observation.dim(), &cfg.train)?, Default::default())
    } else {
        train(|s| bench::EpisodeEnv::new(s, &episode_cfg), &specs, &cfg.train)?
    };
    net.save(args.out.join("model.qnet"))?;
    let curve: overtake_core::rl::LearningCurve = curve;
    fs::write(args.out.join("learning_curve.csv"), curve.to_csv())?;
    if let Some((early, late)) = curve.early_late_means(0.1) {
        println!("{} episodes; mean return first 10% {early:.4}, last 10% {late:.4}", curve.episodes.len());
    }
    println!("wrote {}", args.out.join("model.qnet").display());
    Ok(())
}

fn episodes_csv(results: &[EpisodeResult]) -> String {
    let mut out = String::from("scenario_id,outcome,completion_time_s,discounted_return,decisions\n");
    for r in results {
        let t = r.completion_time.map(|t| format!("{t:.6}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{:.9},{}\n",
            r.scenario_id,
            r.outcome.label(),
            t,
            r.discounted_return,
            r.rewards.len()
        ));
    }
    out
}

fn cmd_eval(args: EvalArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args.common)?;
    if args.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let needs_model = args.compare || args.policy == PolicyKind::Rl;
    let net = match (&args.model, needs_model) {
        (Some(path), _) => Some(load_model(path, &cfg)?),
        (None, true) => return Err(usage("--model is required for the rl policy and --compare")),
        (None, false) => None,
    };
    let specs = load_scenarios(&args.scenarios)?;
    let episode_cfg = cfg.episode_config();
    prepare_out(&args.out, &cfg)?;

    let run_rl = |net: &QNetwork<f64>| run_batch(&specs, || GreedyPolicy { net }, &episode_cfg, args.jobs);
    let run_baseline = || run_batch(&specs, || BaselinePolicy::new(cfg.baseline.clone()), &episode_cfg, args.jobs);

    let mut runs: Vec<(&str, Vec<EpisodeResult>)> = Vec::new();
    if args.compare {
        let net = net.as_ref().expect("checked above");
        runs.push(("rl", run_rl(net)?));
        runs.push(("baseline", run_baseline()?));
    } else if args.policy == PolicyKind::Rl {
        runs.push(("rl", run_rl(net.as_ref().expect("checked above"))?));
    } else {
        runs.push(("baseline", run_baseline()?));
    }

    let tables = if let [(a, ra), (b, rb)] = &runs[..] {
        let (ma, mb) = aggregate_metrics((a, ra), (b, rb), Some(&specs))?;
        vec![ma, mb]
    } else {
        runs.iter().map(|(name, rs)| compute_metrics(name, rs, Some(&specs))).collect()
    };
    let text = format_metrics(&tables);
    print!("{text}");
    fs::write(args.out.join("metrics.txt"), text)?;
    fs::write(args.out.join("metrics.jsonl"), metrics_to_json(&tables))?;
    for (name, results) in &runs {
        fs::write(args.out.join(format!("episodes_{name}.csv")), episodes_csv(results))?;
        if args.traces {
            let dir = args.out.join("traces").join(name);
            fs::create_dir_all(&dir)?;
            for r in results {
                export_trace(&r.trace, dir.join(format!("scenario_{:05}.csv", r.scenario_id)))?;
            }
        }
    }
    Ok(())
}

fn cmd_map(args: MapArgs) -> anyhow::Result<()> {
    let mut cfg = load_config(&args.common)?;
    if let Some(r) = args.resolution {
        cfg.map.resolution = [r, r];
    }
    if let Some(v) = args.v1 {
        cfg.map.v1 = v;
    }
    if let Some(v) = args.v2 {
        cfg.map.v2 = v;
    }
    if let Some(d) = args.ego_d {
        cfg.map.ego_d = d;
    }
    cfg.validate()?;
    let net = load_model(&args.model, &cfg)?;
    prepare_out(&args.out, &cfg)?;
    let map = decision_map(&net, &cfg.map, &cfg.episode_config())?;
    fs::write(args.out.join("decision_map.csv"), map.to_csv())?;
    let counts: Vec<String> = Action::ALL.iter().map(|a| format!("{}={}", a.name(), map.count(*a))).collect();
    println!("decision map {}x{}: {}", map.npc1_s.len(), map.npc2_s.len(), counts.join(" "));
    Ok(())
}

fn parse_schedule(text: &str) -> anyhow::Result<ScheduledPolicy> {
    let mut schedule = Vec::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (t, a) = item.split_once(':').ok_or_else(|| usage(format!("schedule entry `{item}` is not t:action")))?;
        let t: f64 = t.trim().parse().map_err(|_| usage(format!("bad time in `{item}`")))?;
        let action = match a.trim() {
            "F" | "f" | "following" => Action::Following,
            "O" | "o" | "overtaking" => Action::Overtaking,
            "A" | "a" | "aborting" => Action::Aborting,
            other => return Err(usage(format!("unknown action `{other}`"))),
        };
        schedule.push((t, action));
    }
    if schedule.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(usage("schedule times must increase"));
    }
    Ok(ScheduledPolicy { schedule })
}

fn cmd_trace(args: TraceArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args.common)?;
    let specs = load_scenarios(&args.scenarios)?;
    let spec = specs
        .iter()
        .find(|s| s.id == args.id)
        .ok_or_else(|| usage(format!("scenario id {} not in {}", args.id, args.scenarios.display())))?;
    let episode_cfg = cfg.episode_config();
    let net;
    let mut policy: Box<dyn DecisionPolicy> = match (&args.schedule, args.policy) {
        (Some(text), _) => Box::new(parse_schedule(text)?),
        (None, PolicyKind::Baseline) => Box::new(BaselinePolicy::new(cfg.baseline.clone())),
        (None, PolicyKind::Rl) => {
            let path = args.model.as_ref().ok_or_else(|| usage("--model is required for the rl policy"))?;
            net = load_model(path, &cfg)?;
            Box::new(GreedyPolicy { net: &net })
        }
    };
    let result = run_episode(spec, policy.as_mut(), &episode_cfg)?;
    if let Some(dir) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    export_trace(&result.trace, &args.out)?;
    println!("scenario {}: {} after {:.2} s, {} rows", spec.id, result.outcome.label(), result.final_world.time, result.trace.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Map(a) => cmd_map(a),
        Command::Trace(a) => cmd_trace(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
