//! Output artifacts and their JSON forms.

use std::collections::BTreeMap;
use std::path::Path;

use infogeo::belief::chain_cost;
use infogeo::{BeliefChain, BeliefTree, PlannerConfig, SimulationTrace};
use infogeo::planner::{Algorithm, Orientation};
use infogeo::sim::MonteCarloStats;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::schema::{algorithm_name, belief_from_spec, belief_spec, rows, BeliefSpec, EnvSpec, Rows};

pub const TREE_FORMAT: &str = "infogeo-tree";
pub const PATH_FORMAT: &str = "infogeo-path";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeNode {
    pub mean: Vec<f64>,
    pub cov: Rows,
    pub parent: Option<usize>,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeArtifact {
    pub format: String,
    pub algorithm: String,
    pub orientation: String,
    pub alpha: f64,
    pub seed: u64,
    pub chi2: f64,
    pub environment: EnvSpec,
    pub nodes: Vec<TreeNode>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostRecord {
    pub travel: f64,
    pub info: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathArtifact {
    pub format: String,
    /// `ok` or `failed`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub algorithm: String,
    pub alpha: f64,
    pub seed: u64,
    pub chi2: f64,
    pub process_noise: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostRecord>,
    pub beliefs: Vec<BeliefSpec>,
    pub environment: EnvSpec,
}

impl TreeArtifact {
    pub fn new(tree: &BeliefTree, algorithm: Algorithm, cfg: &PlannerConfig, chi2: f64, env: &EnvSpec) -> Self {
        let nodes = (0..tree.len())
            .map(|i| {
                let s = belief_spec(tree.node(i));
                TreeNode {
                    mean: s.mean,
                    cov: s.cov,
                    parent: tree.parent(i),
                    cost: tree.cost(i),
                }
            })
            .collect();
        Self {
            format: TREE_FORMAT.into(),
            algorithm: algorithm_name(algorithm).into(),
            orientation: match tree.orientation() {
                Orientation::Forward => "forward".into(),
                Orientation::Backward => "backward".into(),
            },
            alpha: cfg.alpha(),
            seed: cfg.seed(),
            chi2,
            environment: env.clone(),
            nodes,
        }
    }

    /// Rebuilds the tree, checking every node and parent link.
    pub fn to_tree(&self) -> Result<BeliefTree, String> {
        let orientation = match self.orientation.as_str() {
            "forward" => Orientation::Forward,
            "backward" => Orientation::Backward,
            o => return Err(format!("unknown orientation {o:?}")),
        };
        let dim = self.environment.dim;
        let belief = |i: usize, n: &TreeNode| {
            belief_from_spec(&BeliefSpec { mean: n.mean.clone(), cov: n.cov.clone() }, dim)
                .map_err(|e| format!("nodes[{i}]: {e}"))
        };
        let first = self.nodes.first().ok_or("tree has no nodes")?;
        if first.parent.is_some() {
            return Err("nodes[0] is the root and cannot have a parent".into());
        }
        let mut tree = BeliefTree::new(belief(0, first)?, orientation);
        tree.set_cost(0, first.cost);
        // rewiring leaves parents at arbitrary indices, so link after pushing
        let count = self.nodes.len();
        for (i, n) in self.nodes.iter().enumerate().skip(1) {
            tree.push(belief(i, n)?, 0, n.cost);
        }
        for (i, n) in self.nodes.iter().enumerate().skip(1) {
            match n.parent {
                Some(p) if p < count && p != i => tree.set_parent(i, p),
                _ => return Err(format!("nodes[{i}]: parent must be another node of the tree")),
            }
        }
        if !tree.is_well_formed() {
            return Err("parent links contain a cycle".into());
        }
        Ok(tree)
    }
}

impl PathArtifact {
    pub fn success(
        chain: &BeliefChain,
        algorithm: Algorithm,
        cfg: &PlannerConfig,
        chi2: f64,
        env: &EnvSpec,
    ) -> CliResult<Self> {
        let c = chain_cost(chain, cfg.alpha(), cfg.process_noise()).map_err(|e| CliError::Planning(e.to_string()))?;
        Ok(Self {
            format: PATH_FORMAT.into(),
            status: "ok".into(),
            reason: None,
            algorithm: algorithm_name(algorithm).into(),
            alpha: cfg.alpha(),
            seed: cfg.seed(),
            chi2,
            process_noise: rows(cfg.process_noise().matrix()),
            cost: Some(CostRecord {
                travel: c.travel,
                info: c.info,
                total: c.total,
            }),
            beliefs: chain.nodes().iter().map(belief_spec).collect(),
            environment: env.clone(),
        })
    }

    pub fn failure(reason: &str, algorithm: Algorithm, cfg: &PlannerConfig, chi2: f64, env: &EnvSpec) -> Self {
        Self {
            format: PATH_FORMAT.into(),
            status: "failed".into(),
            reason: Some(reason.into()),
            algorithm: algorithm_name(algorithm).into(),
            alpha: cfg.alpha(),
            seed: cfg.seed(),
            chi2,
            process_noise: rows(cfg.process_noise().matrix()),
            cost: None,
            beliefs: Vec::new(),
            environment: env.clone(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn to_chain(&self) -> Result<BeliefChain, String> {
        let dim = self.environment.dim;
        let nodes = self
            .beliefs
            .iter()
            .enumerate()
            .map(|(i, b)| belief_from_spec(b, dim).map_err(|e| format!("beliefs[{i}]: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        BeliefChain::new(nodes).map_err(|e| e.to_string())
    }
}

/// `stats.json` written by `simulate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsArtifact {
    pub runs: usize,
    pub seed: u64,
    pub measurement_mean: f64,
    pub measurement_std: f64,
    pub collision_rate: f64,
    /// Measurement count (as a decimal string) → number of runs.
    pub histogram: BTreeMap<String, usize>,
    pub counts: Vec<usize>,
}

impl StatsArtifact {
    pub fn new(stats: &MonteCarloStats, seed: u64) -> Self {
        Self {
            runs: stats.runs,
            seed,
            measurement_mean: stats.mean,
            measurement_std: stats.std,
            collision_rate: stats.collision_rate,
            histogram: stats.histogram.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            counts: stats.counts.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceStep {
    pub truth: Vec<f64>,
    pub estimate_mean: Vec<f64>,
    pub estimate_cov: Rows,
    pub reference_mean: Vec<f64>,
    pub reference_cov: Rows,
    pub measured: bool,
}

/// `trace.json`: every step of the first run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceArtifact {
    pub measurement_count: usize,
    pub collided: bool,
    pub steps: Vec<TraceStep>,
}

impl TraceArtifact {
    pub fn new(trace: &SimulationTrace) -> Self {
        let v = |x: &infogeo::Vector| x.iter().copied().collect::<Vec<f64>>();
        Self {
            measurement_count: trace.measurement_count,
            collided: trace.collided,
            steps: trace
                .steps
                .iter()
                .map(|s| TraceStep {
                    truth: v(&s.truth),
                    estimate_mean: v(&s.estimate_mean),
                    estimate_cov: rows(&s.estimate_cov),
                    reference_mean: v(&s.reference_mean),
                    reference_cov: rows(&s.reference_cov),
                    measured: s.measured,
                })
                .collect(),
        }
    }
}

/// Either planner artifact, told apart by its `format` field.
pub enum PlannerArtifact {
    Tree(TreeArtifact),
    Path(PathArtifact),
}

impl PlannerArtifact {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let probe: serde_json::Value = crate::schema::parse_json(path, &text)?;
        match probe.get("format").and_then(|f| f.as_str()) {
            Some(TREE_FORMAT) => Ok(Self::Tree(crate::schema::parse_json(path, &text)?)),
            Some(PATH_FORMAT) => Ok(Self::Path(crate::schema::parse_json(path, &text)?)),
            _ => Err(CliError::invalid(
                path,
                "format",
                format!("expected {TREE_FORMAT:?} or {PATH_FORMAT:?}"),
            )),
        }
    }

    pub fn environment(&self) -> &EnvSpec {
        match self {
            Self::Tree(t) => &t.environment,
            Self::Path(p) => &p.environment,
        }
    }

    pub fn chi2(&self) -> f64 {
        match self {
            Self::Tree(t) => t.chi2,
            Self::Path(p) => p.chi2,
        }
    }
}
