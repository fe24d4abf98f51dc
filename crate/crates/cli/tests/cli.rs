use std::path::{Path, PathBuf};
use std::process::Command;

use infogeo::planner::plan;
use infogeo_cli::artifacts::{PathArtifact, StatsArtifact, TraceArtifact, TreeArtifact};
use infogeo_cli::commands::{cmd_plan, cmd_render, cmd_simulate, cmd_sweep, Format, PlanArgs, RenderArgs, SimulateArgs, SweepArgs};
use infogeo_cli::schema::{read_json, PlannerOverrides, PlannerSpec, Scenario};
use infogeo_cli::CliError;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn plan_args(env: PathBuf, out: &Path, nodes: usize) -> PlanArgs {
    PlanArgs {
        env,
        config: data("planner_loose.json"),
        out: out.to_path_buf(),
        alpha: None,
        seed: Some(4),
        nodes: Some(nodes),
        algorithm: None,
    }
}

fn sim_args(path: PathBuf, out: &Path, runs: usize) -> SimulateArgs {
    SimulateArgs {
        path,
        config: data("sim_double.json"),
        out: out.to_path_buf(),
        runs: Some(runs),
        seed: None,
        speed: None,
        dt: None,
    }
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn tree_artifact_reproduces_the_planned_tree() {
    let dir = tempfile::tempdir().unwrap();
    cmd_plan(&plan_args(data("block_loose.json"), dir.path(), 1500)).unwrap();

    let scenario = Scenario::load(&data("block_loose.json")).unwrap();
    let spec: PlannerSpec = read_json(&data("planner_loose.json")).unwrap();
    let spec = spec.apply(&PlannerOverrides {
        seed: Some(4),
        nodes: Some(1500),
        ..Default::default()
    });
    let (cfg, alg) = spec.build(&scenario, &data("planner_loose.json")).unwrap();
    let tree = plan(&cfg, &scenario.env, alg).unwrap();

    let artifact: TreeArtifact = read_json(&dir.path().join("tree.json")).unwrap();
    let back = artifact.to_tree().unwrap();
    assert_eq!(back.len(), tree.len());
    for i in 0..tree.len() {
        assert_eq!(back.node(i), tree.node(i));
        assert_eq!(back.parent(i), tree.parent(i));
    }
    assert_eq!(artifact.environment, scenario.spec);

    let path: PathArtifact = read_json(&dir.path().join("path.json")).unwrap();
    assert!(path.is_ok());
    let chain = path.to_chain().unwrap();
    assert_eq!(chain.len(), path.beliefs.len());
    assert!(scenario.env.in_goal(chain.last()));
}

#[test]
fn malformed_input_exits_with_validation_code_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let env = dir.path().join("broken.json");
    std::fs::write(&env, "{\n  \"dim\": 2,\n  \"bounds\": [\n").unwrap();
    let out = dir.path().join("out");
    let result = Command::new(env!("CARGO_BIN_EXE_infogeo"))
        .args(["plan", "--env"])
        .arg(&env)
        .arg("--config")
        .arg(data("planner_loose.json"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("broken.json:4:"), "{stderr}");
    assert!(!out.exists() || listing(&out).is_empty());
}

#[test]
fn obstacle_free_plan_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let mut env: Value = read_json(&data("block_loose.json")).unwrap();
    env["obstacles"] = Value::Array(vec![]);
    let file = dir.path().join("open_loose.json");
    std::fs::write(&file, env.to_string()).unwrap();
    let out = dir.path().join("out");
    let report = cmd_plan(&plan_args(file, &out, 1000)).unwrap();
    assert!(report.failure.is_none());
    assert_eq!(listing(&out), ["manifest.json", "path.json", "plan.svg", "tree.json"]);
}

#[test]
fn root_only_tree_renders_one_ellipse() {
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_plan(&plan_args(data("block_loose.json"), dir.path(), 1)).unwrap();
    assert!(matches!(report.failure, Some(CliError::Planning(_))));
    let svg = dir.path().join("root.svg");
    cmd_render(&RenderArgs {
        input: dir.path().join("tree.json"),
        out: svg.clone(),
        no_tree: false,
        format: Format::Svg,
    })
    .unwrap();
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<ellipse").count(), 1);
    assert!(dir.path().join("root.manifest.json").exists());
}

#[test]
fn three_dimensional_render_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let env = serde_json::json!({
        "dim": 3,
        "bounds": { "min": [0.0, 0.0, 0.0], "max": [1.0, 1.0, 1.0] },
        "chi2_confidence": 0.9,
        "start": { "mean": [0.1, 0.1, 0.1], "cov": [[1e-3, 0.0, 0.0], [0.0, 1e-3, 0.0], [0.0, 0.0, 1e-3]] },
        "goal": {
            "box": { "min": [0.8, 0.8, 0.8], "max": [0.95, 0.95, 0.95] },
            "cov": [[5e-4, 0.0, 0.0], [0.0, 5e-4, 0.0], [0.0, 0.0, 5e-4]]
        },
        "process_noise": [[1e-3, 0.0, 0.0], [0.0, 1e-3, 0.0], [0.0, 0.0, 1e-3]]
    });
    let file = dir.path().join("cube.json");
    std::fs::write(&file, env.to_string()).unwrap();
    let out = dir.path().join("out");
    cmd_plan(&plan_args(file, &out, 200)).unwrap();
    assert!(!out.join("plan.svg").exists());
    let err = cmd_render(&RenderArgs {
        input: out.join("tree.json"),
        out: dir.path().join("cube.svg"),
        no_tree: false,
        format: Format::Svg,
    })
    .unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(!dir.path().join("cube.svg").exists());
}

fn sweep_args(seeds: Vec<u64>, out: &Path) -> SweepArgs {
    SweepArgs {
        env: data("block_loose.json"),
        config: data("planner_loose.json"),
        alpha: vec![0.3],
        seed: seeds,
        sim: Some(data("sim_double.json")),
        out: out.to_path_buf(),
        nodes: Some(1500),
        algorithm: None,
        runs: Some(10),
        speed: None,
        dt: None,
        format: Format::Json,
    }
}

#[test]
fn empty_seed_list_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_sweep(&sweep_args(vec![], dir.path())).unwrap_err();
    assert!(matches!(err, CliError::Validation(_)));
}

#[test]
fn sweep_cell_matches_plan_then_simulate() {
    let dir = tempfile::tempdir().unwrap();
    cmd_sweep(&sweep_args(vec![4], &dir.path().join("sweep"))).unwrap();
    let rows: Vec<Value> = read_json(&dir.path().join("sweep").join("sweep.json")).unwrap();
    assert_eq!(rows.len(), 1);
    let row = &rows[0];

    let mut plan = plan_args(data("block_loose.json"), &dir.path().join("plan"), 1500);
    plan.alpha = Some(0.3);
    cmd_plan(&plan).unwrap();
    cmd_simulate(&sim_args(dir.path().join("plan").join("path.json"), &dir.path().join("sim"), 10)).unwrap();
    let path: PathArtifact = read_json(&dir.path().join("plan").join("path.json")).unwrap();
    let stats: StatsArtifact = read_json(&dir.path().join("sim").join("stats.json")).unwrap();

    let cost = path.cost.unwrap();
    assert_eq!(row["status"], "ok");
    assert_eq!(row["total_cost"].as_f64(), Some(cost.total));
    assert_eq!(row["info_cost"].as_f64(), Some(cost.info));
    assert_eq!(row["measurement_mean"].as_f64(), Some(stats.measurement_mean));
    assert_eq!(row["collision_rate"].as_f64(), Some(stats.collision_rate));
}

#[test]
fn single_run_statistics_describe_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    cmd_plan(&plan_args(data("block_loose.json"), &dir.path().join("plan"), 1500)).unwrap();
    cmd_simulate(&sim_args(dir.path().join("plan").join("path.json"), &dir.path().join("sim"), 1)).unwrap();
    let stats: StatsArtifact = read_json(&dir.path().join("sim").join("stats.json")).unwrap();
    let trace: TraceArtifact = read_json(&dir.path().join("sim").join("trace.json")).unwrap();
    assert_eq!(stats.counts, vec![trace.measurement_count]);
    assert_eq!(stats.measurement_mean, trace.measurement_count as f64);
    assert_eq!(stats.measurement_std, 0.0);
    assert_eq!(stats.collision_rate, if trace.collided { 1.0 } else { 0.0 });
    assert_eq!(trace.steps.iter().filter(|s| s.measured).count(), trace.measurement_count);
}

#[test]
fn same_seed_gives_identical_statistics() {
    let dir = tempfile::tempdir().unwrap();
    cmd_plan(&plan_args(data("block_loose.json"), &dir.path().join("plan"), 1500)).unwrap();
    let path = dir.path().join("plan").join("path.json");
    cmd_simulate(&sim_args(path.clone(), &dir.path().join("a"), 25)).unwrap();
    cmd_simulate(&sim_args(path, &dir.path().join("b"), 25)).unwrap();
    let a = std::fs::read(dir.path().join("a").join("stats.json")).unwrap();
    let b = std::fs::read(dir.path().join("b").join("stats.json")).unwrap();
    assert_eq!(a, b);
}
