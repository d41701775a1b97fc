use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_overtake")).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &Path, n: usize, seed: u64, extra: &[&str]) -> std::path::PathBuf {
    let n = n.to_string();
    let seed = seed.to_string();
    let mut args = vec!["gen", "--n", &n, "--seed", &seed, "--out", s(dir)];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    dir.join("scenarios.jsonl")
}

#[test]
fn help_lists_every_subcommand() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["gen", "train", "eval", "map", "trace"] {
        assert!(text.contains(cmd), "{cmd} missing from\n{text}");
    }
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = run(&["gen", "--bogus"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn unknown_config_keys_are_rejected_by_name() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[train]\nlearnig_rate = 0.01\n").unwrap();
    let out = run(&["gen", "--config", s(&cfg), "--n", "2", "--out", s(&tmp.path().join("o"))]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("learnig_rate"), "{}", stderr(&out));
}

#[test]
fn out_of_range_config_values_name_the_field() {
    let tmp = TempDir::new().unwrap();
    let scen = gen(&tmp.path().join("g"), 2, 1, &[]);
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[train]\ngamma = 1.5\n").unwrap();
    let out = run(&["train", "--config", s(&cfg), "--scenarios", s(&scen), "--out", s(&tmp.path().join("t")), "--iters", "0"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("train.gamma"), "{}", stderr(&out));
}

#[test]
fn missing_scenario_file_is_a_runtime_error_naming_the_path() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nowhere.jsonl");
    let out = run(&["eval", "--policy", "baseline", "--scenarios", s(&missing), "--out", s(&tmp.path().join("e"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("nowhere.jsonl"), "{}", stderr(&out));
}

#[test]
fn rl_evaluation_without_a_model_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let scen = gen(&tmp.path().join("g"), 2, 1, &[]);
    let out = run(&["eval", "--scenarios", s(&scen), "--out", s(&tmp.path().join("e"))]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--model"), "{}", stderr(&out));
}

#[test]
fn zero_scenarios_give_an_empty_file() {
    let tmp = TempDir::new().unwrap();
    let scen = gen(tmp.path(), 0, 4, &[]);
    assert_eq!(fs::read_to_string(scen).unwrap(), "");
    assert!(tmp.path().join("config.toml").exists());
}

#[test]
fn generated_files_pass_the_range_check_and_tampered_ones_fail() {
    let tmp = TempDir::new().unwrap();
    let scen = gen(&tmp.path().join("g"), 200, 9, &[]);
    let out = run(&["gen", "--check", s(&scen)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let text = fs::read_to_string(&scen).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    let first = lines[0].clone();
    let start = first.find("\"d1_m\":").unwrap() + "\"d1_m\":".len();
    let end = start + first[start..].find(',').unwrap();
    lines[0] = format!("{}999.0{}", &first[..start], &first[end..]);
    let bad = tmp.path().join("bad.jsonl");
    fs::write(&bad, lines.join("\n") + "\n").unwrap();
    let out = run(&["gen", "--check", s(&bad)]);
    assert_ne!(code(&out), 0);
    assert!(stderr(&out).contains("1 of 200"), "{}", stderr(&out));
}

#[test]
fn training_for_zero_iterations_equals_initialization() {
    let tmp = TempDir::new().unwrap();
    let scen = gen(&tmp.path().join("g"), 3, 2, &[]);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let out = run(&["train", "--scenarios", s(&scen), "--out", s(&a), "--iters", "0", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = run(&["train", "--scenarios", s(&scen), "--out", s(&b), "--init-only", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(fs::read(a.join("model.qnet")).unwrap(), fs::read(b.join("model.qnet")).unwrap());
}

#[test]
fn models_built_for_another_encoding_are_refused() {
    let tmp = TempDir::new().unwrap();
    let scen = gen(&tmp.path().join("g"), 2, 1, &[]);
    let model_dir = tmp.path().join("m");
    let out = run(&["train", "--scenarios", s(&scen), "--out", s(&model_dir), "--init-only"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let cfg = tmp.path().join("slots.toml");
    fs::write(&cfg, "[observation]\nslots = 2\n").unwrap();
    let model = model_dir.join("model.qnet");
    let out = run(&["eval", "--config", s(&cfg), "--scenarios", s(&scen), "--model", s(&model), "--out", s(&tmp.path().join("e"))]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("model.qnet"), "{err}");
}

#[test]
fn baseline_clears_every_single_leader_scenario() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("one.toml");
    fs::write(&cfg, "[scenarios]\nnpc_counts = [1]\n").unwrap();
    let scen = gen(&tmp.path().join("g"), 10, 3, &["--config", s(&cfg)]);
    let out_dir = tmp.path().join("e");
    let out = run(&["eval", "--config", s(&cfg), "--policy", "baseline", "--scenarios", s(&scen), "--out", s(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let json = fs::read_to_string(out_dir.join("metrics.jsonl")).unwrap();
    assert!(json.contains("\"success_rate\":100.0"), "{json}");
    assert!(out_dir.join("episodes_baseline.csv").exists());
}

#[test]
fn comparison_reports_both_policies() {
    let tmp = TempDir::new().unwrap();
    let scen = gen(&tmp.path().join("g"), 4, 5, &[]);
    let model_dir = tmp.path().join("m");
    let out = run(&["train", "--scenarios", s(&scen), "--out", s(&model_dir), "--init-only"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out_dir = tmp.path().join("e");
    let model = model_dir.join("model.qnet");
    let out = run(&["eval", "--compare", "--scenarios", s(&scen), "--model", s(&model), "--out", s(&out_dir), "--jobs", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(out_dir.join("metrics.txt")).unwrap();
    assert!(text.contains("rl") && text.contains("baseline"), "{text}");
    assert!(text.contains("failed in same scenarios"), "{text}");
    assert_eq!(fs::read_to_string(out_dir.join("metrics.jsonl")).unwrap().lines().count(), 2);
}

#[test]
fn decision_map_is_a_square_grid_of_action_indices() {
    let tmp = TempDir::new().unwrap();
    let scen = gen(&tmp.path().join("g"), 2, 1, &[]);
    let model_dir = tmp.path().join("m");
    let out = run(&["train", "--scenarios", s(&scen), "--out", s(&model_dir), "--init-only"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out_dir = tmp.path().join("map");
    let model = model_dir.join("model.qnet");
    let out = run(&["map", "--model", s(&model), "--out", s(&out_dir), "--resolution", "4"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(out_dir.join("decision_map.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 1 + 4, "{csv}");
    assert!(rows.iter().all(|r| r.len() == 1 + 4), "{csv}");
    for row in &rows[1..] {
        assert!(row[1..].iter().all(|c| ["0", "1", "2"].contains(c)), "{csv}");
    }
}

#[test]
fn trace_follows_a_hand_schedule() {
    let tmp = TempDir::new().unwrap();
    let scen = gen(&tmp.path().join("g"), 3, 1, &[]);
    let out_file = tmp.path().join("trace.csv");
    let out = run(&["trace", "--scenarios", s(&scen), "--id", "1", "--schedule", "0:F", "--out", s(&out_file)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(&out_file).unwrap();
    assert!(csv.lines().count() > 2);
    let out = run(&["trace", "--scenarios", s(&scen), "--id", "99", "--schedule", "0:F", "--out", s(&out_file)]);
    assert_ne!(code(&out), 0);
}
