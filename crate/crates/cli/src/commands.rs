use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use infogeo::planner::{best_goal_node, extract_path, plan, Algorithm};
use infogeo::sim::{discretize_reference, monte_carlo, simulate, MonteCarloStats};
use infogeo::{BeliefChain, BeliefTree, ConvexObstacle, Error as CoreError, PlannerConfig, VehicleModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::artifacts::{PathArtifact, PlannerArtifact, StatsArtifact, TraceArtifact, TreeArtifact};
use crate::error::{CliError, CliResult};
use crate::manifest::{Outputs, RunManifest, MANIFEST_FILE};
use crate::render::{render_svg, Scene};
use crate::schema::{
    chi2_quantile, read_json, sym_matrix, PlannerOverrides, PlannerSpec, Scenario, SimOverrides, SimSpec,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Basic,
    Improved,
    Backward,
}

impl AlgorithmArg {
    fn name(self) -> &'static str {
        match self {
            AlgorithmArg::Basic => "basic",
            AlgorithmArg::Improved => "improved",
            AlgorithmArg::Backward => "backward",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Debug, Args)]
pub struct PlanArgs {
    /// Environment JSON.
    #[arg(long)]
    pub env: PathBuf,
    /// Planner configuration JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, value_enum)]
    pub algorithm: Option<AlgorithmArg>,
}

#[derive(Clone, Debug, Args)]
pub struct SimulateArgs {
    /// A `path.json` written by `plan`.
    #[arg(long)]
    pub path: PathBuf,
    /// Simulation configuration JSON.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub speed: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Clone, Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub env: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
    /// Comma-separated α values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub alpha: Vec<f64>,
    /// Comma-separated planner seeds.
    #[arg(long, value_delimiter = ',', required = true)]
    pub seed: Vec<u64>,
    /// Optional simulation configuration; adds measurement columns.
    #[arg(long)]
    pub sim: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, value_enum)]
    pub algorithm: Option<AlgorithmArg>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub speed: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Clone, Debug, Args)]
pub struct RenderArgs {
    /// A `tree.json` or `path.json`.
    #[arg(long)]
    pub input: PathBuf,
    /// SVG file to write; its manifest goes next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// Omit tree edges.
    #[arg(long)]
    pub no_tree: bool,
    #[arg(long, value_enum, default_value = "svg")]
    pub format: Format,
}

/// What a command produced. `failure` is set when artifacts were written
/// but the run itself did not succeed (for example no path was found).
#[derive(Debug)]
pub struct Report {
    pub manifest: RunManifest,
    pub failure: Option<CliError>,
}

fn planner_overrides(alpha: Option<f64>, seed: Option<u64>, nodes: Option<usize>, alg: Option<AlgorithmArg>) -> PlannerOverrides {
    PlannerOverrides {
        alpha,
        seed,
        nodes,
        algorithm: alg.map(|a| a.name().to_string()),
    }
}

fn run_planner(cfg: &PlannerConfig, scenario: &Scenario, algorithm: Algorithm) -> CliResult<BeliefTree> {
    plan(cfg, &scenario.env, algorithm).map_err(|e| match e {
        CoreError::InvalidArgument(_) | CoreError::DimensionMismatch { .. } => CliError::Validation(e.to_string()),
        _ => CliError::Planning(e.to_string()),
    })
}

fn tree_scene(tree: &BeliefTree, path: Option<&BeliefChain>, draw_tree: bool) -> Scene {
    let xy = |b: &infogeo::Belief| [b.mean()[0], b.mean()[1]];
    let mut scene = Scene::default();
    if draw_tree {
        scene.edges = (1..tree.len())
            .filter_map(|i| tree.parent(i).map(|p| (xy(tree.node(p)), xy(tree.node(i)))))
            .collect();
    }
    match path {
        Some(chain) => {
            scene.path = chain.nodes().iter().map(xy).collect();
            scene.ellipses = chain.nodes().iter().map(crate::schema::belief_spec).collect();
        }
        None => {
            scene.ellipses = vec![crate::schema::belief_spec(tree.node(0))];
        }
    }
    scene
}

pub fn cmd_plan(args: &PlanArgs) -> CliResult<Report> {
    let scenario = Scenario::load(&args.env)?;
    let spec: PlannerSpec = read_json(&args.config)?;
    let spec = spec.apply(&planner_overrides(args.alpha, args.seed, args.nodes, args.algorithm));
    let (cfg, algorithm) = spec.build(&scenario, &args.config)?;
    let chi2 = scenario.env.chi2();
    let tree = run_planner(&cfg, &scenario, algorithm)?;
    let chain = extract_path(&tree, &scenario.env, &cfg);

    let mut out = Outputs::default();
    out.add_json("tree.json", &TreeArtifact::new(&tree, algorithm, &cfg, chi2, &scenario.spec))?;
    let (path_artifact, failure) = match &chain {
        Ok(c) => (PathArtifact::success(c, algorithm, &cfg, chi2, &scenario.spec)?, None),
        Err(e) => (
            PathArtifact::failure(&e.to_string(), algorithm, &cfg, chi2, &scenario.spec),
            Some(CliError::Planning(e.to_string())),
        ),
    };
    out.add_json("path.json", &path_artifact)?;
    // drawings are 2-D only; other dimensions get the JSON artifacts alone
    if scenario.env.dim() == 2 {
        let svg = render_svg(&scenario.spec, chi2, &tree_scene(&tree, chain.as_ref().ok(), true))
            .map_err(CliError::Validation)?;
        out.add("plan.svg", svg.into_bytes());
    }
    let config = json!({ "environment": scenario.spec, "planner": spec });
    let manifest = out.commit(&args.out, MANIFEST_FILE, "plan", &config, Some(cfg.seed()))?;
    Ok(Report { manifest, failure })
}

/// Plan, reference and vehicle ready for Monte Carlo runs.
struct SimSetup {
    reference: infogeo::ReferenceTrajectory,
    model: VehicleModel,
    chi2: f64,
    obstacles: Vec<ConvexObstacle>,
}

fn sim_setup(path: &PathArtifact, path_file: &Path, sim: &SimSpec, sim_file: &Path) -> CliResult<SimSetup> {
    if !path.is_ok() {
        return Err(CliError::invalid(path_file, "status", "path.json holds no planned chain"));
    }
    let scenario = Scenario::from_spec(path.environment.clone(), path_file)?;
    let chain = path.to_chain().map_err(|e| CliError::invalid(path_file, "beliefs", e))?;
    if chain.len() < 2 {
        return Err(CliError::invalid(path_file, "beliefs", "need at least two beliefs"));
    }
    let dim = chain.dim();
    let w_plan = sym_matrix(&path.process_noise, dim)
        .and_then(|m| infogeo::ProcessNoise::new(m).map_err(|e| e.to_string()))
        .map_err(|e| CliError::invalid(path_file, "process_noise", e))?;
    let model = sim.vehicle(dim, sim_file)?;
    let reference = discretize_reference(&chain, sim.speed, sim.dt, &w_plan)
        .map_err(|e| CliError::invalid(sim_file, "reference", e.to_string()))?;
    let chi2 = match sim.chi2_confidence {
        Some(p) => chi2_quantile(dim, p).map_err(|e| CliError::invalid(sim_file, "chi2_confidence", e))?,
        None => path.chi2,
    };
    Ok(SimSetup {
        reference,
        model,
        chi2,
        obstacles: scenario.env.obstacles().to_vec(),
    })
}

fn run_monte_carlo(setup: &SimSetup, runs: usize, seed: u64) -> CliResult<MonteCarloStats> {
    monte_carlo(&setup.reference, &setup.model, runs, setup.chi2, &setup.obstacles, seed)
        .map_err(|e| CliError::Simulation(e.to_string()))
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<Report> {
    let path: PathArtifact = read_json(&args.path)?;
    let spec: SimSpec = read_json(&args.config)?;
    let spec = spec.apply(&SimOverrides {
        runs: args.runs,
        seed: args.seed,
        speed: args.speed,
        dt: args.dt,
    });
    let setup = sim_setup(&path, &args.path, &spec, &args.config)?;
    let stats = run_monte_carlo(&setup, spec.runs, spec.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(0);
    let trace = simulate(&setup.reference, &setup.model, setup.chi2, &setup.obstacles, &mut rng)
        .map_err(|e| CliError::Simulation(e.to_string()))?;

    let mut out = Outputs::default();
    out.add_json("stats.json", &StatsArtifact::new(&stats, spec.seed))?;
    out.add_json("trace.json", &TraceArtifact::new(&trace))?;
    let config = json!({ "path": path, "simulation": spec });
    let manifest = out.commit(&args.out, MANIFEST_FILE, "simulate", &config, Some(spec.seed))?;
    Ok(Report { manifest, failure: None })
}

/// One row of `sweep.csv`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub seed: u64,
    pub travel_cost: Option<f64>,
    pub info_cost: Option<f64>,
    pub total_cost: Option<f64>,
    pub measurement_mean: Option<f64>,
    pub measurement_std: Option<f64>,
    pub collision_rate: Option<f64>,
    pub status: String,
}

fn sweep_cell(
    scenario: &Scenario,
    spec: &PlannerSpec,
    config_file: &Path,
    sim: Option<&(SimSpec, PathBuf)>,
    alpha: f64,
    seed: u64,
) -> SweepRow {
    let mut row = SweepRow {
        alpha,
        seed,
        travel_cost: None,
        info_cost: None,
        total_cost: None,
        measurement_mean: None,
        measurement_std: None,
        collision_rate: None,
        status: "ok".into(),
    };
    let result = (|| -> CliResult<()> {
        let cell = spec.clone().apply(&PlannerOverrides {
            alpha: Some(alpha),
            seed: Some(seed),
            ..Default::default()
        });
        let (cfg, algorithm) = cell.build(scenario, config_file)?;
        let tree = run_planner(&cfg, scenario, algorithm)?;
        let chain = extract_path(&tree, &scenario.env, &cfg).map_err(|e| CliError::Planning(e.to_string()))?;
        let path = PathArtifact::success(&chain, algorithm, &cfg, scenario.env.chi2(), &scenario.spec)?;
        let cost = path.cost.expect("successful path has a cost");
        row.travel_cost = Some(cost.travel);
        row.info_cost = Some(cost.info);
        row.total_cost = Some(cost.total);
        if let Some((sim, sim_file)) = sim {
            let setup = sim_setup(&path, config_file, sim, sim_file)?;
            let stats = run_monte_carlo(&setup, sim.runs, sim.seed)?;
            row.measurement_mean = Some(stats.mean);
            row.measurement_std = Some(stats.std);
            row.collision_rate = Some(stats.collision_rate);
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.status = e.to_string();
    }
    row
}

pub fn sweep_csv(rows: &[SweepRow]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "alpha",
        "seed",
        "travel_cost",
        "info_cost",
        "total_cost",
        "measurement_mean",
        "measurement_std",
        "collision_rate",
        "status",
    ])
    .map_err(|e| CliError::Io(e.to_string()))?;
    let f = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            format!("{:.16e}", r.alpha),
            r.seed.to_string(),
            f(r.travel_cost),
            f(r.info_cost),
            f(r.total_cost),
            f(r.measurement_mean),
            f(r.measurement_std),
            f(r.collision_rate),
            r.status.clone(),
        ])
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<Report> {
    if args.alpha.is_empty() || args.seed.is_empty() {
        return Err(CliError::Validation("sweep needs at least one alpha and one seed".into()));
    }
    if args.format == Format::Svg {
        return Err(CliError::Validation("sweep writes csv or json".into()));
    }
    let scenario = Scenario::load(&args.env)?;
    let spec: PlannerSpec = read_json(&args.config)?;
    let spec = spec.apply(&planner_overrides(None, None, args.nodes, args.algorithm));
    // validate once up front so that a bad file fails before any work
    spec.build(&scenario, &args.config)?;
    for &a in &args.alpha {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(CliError::Validation(format!("alpha must be finite and nonnegative, got {a}")));
        }
    }
    let sim = match &args.sim {
        Some(file) => {
            let s: SimSpec = read_json(file)?;
            let s = s.apply(&SimOverrides {
                runs: args.runs,
                seed: None,
                speed: args.speed,
                dt: args.dt,
            });
            s.vehicle(scenario.env.dim(), file)?;
            Some((s, file.clone()))
        }
        None => None,
    };
    let cells: Vec<(f64, u64)> = args
        .alpha
        .iter()
        .flat_map(|&a| args.seed.iter().map(move |&s| (a, s)))
        .collect();
    let rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(a, s)| sweep_cell(&scenario, &spec, &args.config, sim.as_ref(), a, s))
        .collect();

    let mut out = Outputs::default();
    match args.format {
        Format::Json => out.add_json("sweep.json", &rows)?,
        _ => out.add("sweep.csv", sweep_csv(&rows)?),
    }
    let config = json!({
        "environment": scenario.spec,
        "planner": spec,
        "alphas": args.alpha,
        "seeds": args.seed,
        "simulation": sim.as_ref().map(|(s, _)| s),
    });
    let manifest = out.commit(&args.out, MANIFEST_FILE, "sweep", &config, None)?;
    Ok(Report { manifest, failure: None })
}

pub fn cmd_render(args: &RenderArgs) -> CliResult<Report> {
    if args.format != Format::Svg {
        return Err(CliError::Validation("render writes svg only".into()));
    }
    let artifact = PlannerArtifact::load(&args.input)?;
    let env_spec = artifact.environment().clone();
    if env_spec.dim != 2 {
        return Err(CliError::invalid(
            &args.input,
            "environment.dim",
            format!("rendering is 2-D only; input has dimension {}", env_spec.dim),
        ));
    }
    let scenario = Scenario::from_spec(env_spec, &args.input)?;
    let scene = match &artifact {
        PlannerArtifact::Tree(t) => {
            let tree = t.to_tree().map_err(|e| CliError::invalid(&args.input, "nodes", e))?;
            let path = if tree.orientation() == infogeo::planner::Orientation::Forward {
                best_goal_node(&tree, &scenario.env).map(|g| {
                    let nodes = tree.path_from_root(g).into_iter().map(|i| tree.node(i).clone()).collect();
                    BeliefChain::new(nodes).expect("nonempty path")
                })
            } else {
                None
            };
            tree_scene(&tree, path.as_ref(), !args.no_tree)
        }
        PlannerArtifact::Path(p) => {
            let mut scene = Scene::default();
            if p.is_ok() {
                let chain = p.to_chain().map_err(|e| CliError::invalid(&args.input, "beliefs", e))?;
                scene.path = chain.nodes().iter().map(|b| [b.mean()[0], b.mean()[1]]).collect();
                scene.ellipses = p.beliefs.clone();
            } else {
                scene.ellipses = vec![scenario.spec.start.clone()];
            }
            scene
        }
    };
    let svg = render_svg(&scenario.spec, artifact.chi2(), &scene).map_err(CliError::Validation)?;
    let dir = match args.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = args
        .out
        .file_name()
        .ok_or_else(|| CliError::Validation("--out must name a file".into()))?
        .to_string_lossy()
        .to_string();
    let stem = args.out.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or(name.clone());
    let mut out = Outputs::default();
    out.add(&name, svg.into_bytes());
    let input = std::fs::read(&args.input).map_err(|e| CliError::io(&args.input, e))?;
    let config = json!({ "input_sha256": crate::manifest::sha256_hex(&input), "no_tree": args.no_tree });
    let manifest = out.commit(&dir, &format!("{stem}.manifest.json"), "render", &config, None)?;
    Ok(Report { manifest, failure: None })
}
