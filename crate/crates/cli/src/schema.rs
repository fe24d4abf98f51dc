//! Input files: environment, planner configuration and simulation
//! configuration. Matrices are full row-major nested arrays.

use std::path::Path;

use infogeo::{AaBox, ConvexObstacle, CovSampleBounds, Environment, ProcessNoise};
use infogeo::linalg::{asymmetry, Matrix, Vector};
use infogeo::planner::Algorithm;
use infogeo::PlannerConfig;
use infogeo::{SensorMap, SensorModel};
use infogeo::VehicleModel;
use infogeo::Belief;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{CliError, CliResult};

/// Symmetry tolerance for matrices read from files.
pub const SYM_TOL: f64 = 1e-9;

pub type Rows = Vec<Vec<f64>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    pub vertices: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeliefSpec {
    pub mean: Vec<f64>,
    pub cov: Rows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalSpec {
    #[serde(rename = "box")]
    pub region: BoxSpec,
    pub cov: Rows,
}

/// A linear sensor `y = Cx + v`, `v ~ N(0, V)`. `C` defaults to identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Rows>,
    pub v: Rows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    #[serde(rename = "box")]
    pub region: BoxSpec,
    pub sensor: Option<SensorSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorMapSpec {
    #[serde(default)]
    pub regions: Vec<RegionSpec>,
    pub default: Option<SensorSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub dim: usize,
    pub bounds: BoxSpec,
    pub chi2_confidence: f64,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
    pub start: BeliefSpec,
    pub goal: GoalSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensor_map: Option<SensorMapSpec>,
    pub process_noise: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clearance_step: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovBoundsSpec {
    pub rho: f64,
    pub trace_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerSpec {
    pub alpha: f64,
    pub nodes: usize,
    pub algorithm: String,
    pub ed_min: f64,
    pub conn_radius: f64,
    pub cov_bounds: CovBoundsSpec,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bnb_period: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LqSpec {
    pub q: Rows,
    pub r: Rows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    /// `single` or `double`.
    pub model: String,
    pub dt: f64,
    pub speed: f64,
    pub process_noise: Rows,
    pub measurement_noise: Rows,
    pub runs: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lq: Option<LqSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi2_confidence: Option<f64>,
}

/// Reads and parses a JSON file; syntax and type errors carry line and column.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_json(path, &text)
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Validation(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    })
}

pub fn parse_algorithm(name: &str) -> Option<Algorithm> {
    match name {
        "basic" => Some(Algorithm::Basic),
        "improved" => Some(Algorithm::Improved),
        "backward" => Some(Algorithm::Backward),
        _ => None,
    }
}

pub fn algorithm_name(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Basic => "basic",
        Algorithm::Improved => "improved",
        Algorithm::Backward => "backward",
    }
}

/// χ² quantile with `dim` degrees of freedom at probability `confidence`.
pub fn chi2_quantile(dim: usize, confidence: f64) -> Result<f64, String> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(format!("confidence must lie in (0, 1), got {confidence}"));
    }
    let dist = ChiSquared::new(dim as f64).map_err(|e| e.to_string())?;
    Ok(dist.inverse_cdf(confidence))
}

pub fn vector(v: &[f64], dim: usize) -> Result<Vector<f64>, String> {
    if v.len() != dim {
        return Err(format!("expected {dim} entries, got {}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err("entries must be finite".into());
    }
    Ok(Vector::from_column_slice(v))
}

/// A square matrix from rows, checked for shape and finiteness.
pub fn matrix(rows: &Rows, dim: usize) -> Result<Matrix<f64>, String> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(format!("expected a {dim}×{dim} matrix"));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    if flat.iter().any(|x| !x.is_finite()) {
        return Err("entries must be finite".into());
    }
    Ok(Matrix::from_row_slice(dim, dim, &flat))
}

/// A symmetric matrix; asymmetry beyond [`SYM_TOL`] is rejected.
pub fn sym_matrix(rows: &Rows, dim: usize) -> Result<Matrix<f64>, String> {
    let m = matrix(rows, dim)?;
    let asym = asymmetry(&m);
    if asym > SYM_TOL * (1.0 + m.abs().max()) {
        return Err(format!("matrix is not symmetric (asymmetry {asym:e})"));
    }
    Ok(m)
}

pub fn rows(m: &Matrix<f64>) -> Rows {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn belief_spec(b: &Belief) -> BeliefSpec {
    BeliefSpec {
        mean: b.mean().iter().copied().collect(),
        cov: rows(b.cov()),
    }
}

pub fn belief_from_spec(s: &BeliefSpec, dim: usize) -> Result<Belief, String> {
    let mean = vector(&s.mean, dim)?;
    let cov = sym_matrix(&s.cov, dim)?;
    Belief::new(mean, cov).map_err(|e| e.to_string())
}

fn aabox(s: &BoxSpec, dim: usize) -> Result<AaBox, String> {
    AaBox::new(vector(&s.min, dim)?, vector(&s.max, dim)?).map_err(|e| e.to_string())
}

fn sensor(s: &SensorSpec, dim: usize) -> Result<SensorModel, String> {
    let v_dim = s.v.len();
    let v = sym_matrix(&s.v, v_dim)?;
    let c = match &s.c {
        Some(rows) => {
            if rows.len() != v_dim || rows.iter().any(|r| r.len() != dim) {
                return Err(format!("c must be {v_dim}×{dim}"));
            }
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            Matrix::from_row_slice(v_dim, dim, &flat)
        }
        None if v_dim == dim => Matrix::identity(dim, dim),
        None => return Err(format!("v must be {dim}×{dim} when c is omitted")),
    };
    SensorModel::new(c, v).map_err(|e| e.to_string())
}

/// A validated environment together with its source description.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub spec: EnvSpec,
    pub env: Environment,
    pub process_noise: ProcessNoise,
    pub sensor_map: Option<SensorMap>,
}

impl Scenario {
    pub fn load(path: &Path) -> CliResult<Self> {
        let spec: EnvSpec = read_json(path)?;
        Self::from_spec(spec, path)
    }

    pub fn from_spec(spec: EnvSpec, path: &Path) -> CliResult<Self> {
        let bad = |field: &str, e: String| CliError::invalid(path, field, e);
        let d = spec.dim;
        if d == 0 {
            return Err(bad("dim", "must be positive".into()));
        }
        let bounds = aabox(&spec.bounds, d).map_err(|e| bad("bounds", e))?;
        let chi2 = chi2_quantile(d, spec.chi2_confidence).map_err(|e| bad("chi2_confidence", e))?;
        let mut obstacles = Vec::with_capacity(spec.obstacles.len());
        for (i, o) in spec.obstacles.iter().enumerate() {
            let field = format!("obstacles[{i}].vertices");
            let verts = o
                .vertices
                .iter()
                .map(|v| vector(v, d))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| bad(&field, e))?;
            obstacles.push(ConvexObstacle::new(verts).map_err(|e| bad(&field, e.to_string()))?);
        }
        let start = belief_from_spec(&spec.start, d).map_err(|e| bad("start", e))?;
        let goal_box = aabox(&spec.goal.region, d).map_err(|e| bad("goal.box", e))?;
        let goal_cov = sym_matrix(&spec.goal.cov, d).map_err(|e| bad("goal.cov", e))?;
        let w = sym_matrix(&spec.process_noise, d)
            .and_then(|m| ProcessNoise::new(m).map_err(|e| e.to_string()))
            .map_err(|e| bad("process_noise", e))?;
        let mut env = Environment::new(obstacles, bounds, start, goal_box, goal_cov, chi2)
            .map_err(|e| bad("environment", e.to_string()))?;
        if let Some(step) = spec.clearance_step {
            env = env
                .with_clearance_step(step)
                .map_err(|e| bad("clearance_step", e.to_string()))?;
        }
        let sensor_map = match &spec.sensor_map {
            None => None,
            Some(m) => {
                let mut regions = Vec::with_capacity(m.regions.len());
                for (i, r) in m.regions.iter().enumerate() {
                    let b = aabox(&r.region, d).map_err(|e| bad(&format!("sensor_map.regions[{i}].box"), e))?;
                    let s = match &r.sensor {
                        Some(s) => Some(sensor(s, d).map_err(|e| bad(&format!("sensor_map.regions[{i}].sensor"), e))?),
                        None => None,
                    };
                    regions.push((b, s));
                }
                let default = match &m.default {
                    Some(s) => Some(sensor(s, d).map_err(|e| bad("sensor_map.default", e))?),
                    None => None,
                };
                Some(SensorMap::new(regions, default).map_err(|e| bad("sensor_map", e.to_string()))?)
            }
        };
        Ok(Self {
            spec,
            env,
            process_noise: w,
            sensor_map,
        })
    }
}

/// Command-line overrides applied on top of a planner configuration file.
#[derive(Clone, Debug, Default)]
pub struct PlannerOverrides {
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub nodes: Option<usize>,
    pub algorithm: Option<String>,
}

impl PlannerSpec {
    pub fn apply(mut self, o: &PlannerOverrides) -> Self {
        if let Some(a) = o.alpha {
            self.alpha = a;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(n) = o.nodes {
            self.nodes = n;
        }
        if let Some(a) = &o.algorithm {
            self.algorithm = a.clone();
        }
        self
    }

    pub fn build(&self, scenario: &Scenario, path: &Path) -> CliResult<(PlannerConfig, Algorithm)> {
        let bad = |field: &str, e: String| CliError::invalid(path, field, e);
        let algorithm = parse_algorithm(&self.algorithm)
            .ok_or_else(|| bad("algorithm", format!("unknown algorithm {:?}", self.algorithm)))?;
        let bounds = CovSampleBounds::new(self.cov_bounds.rho, self.cov_bounds.trace_max)
            .map_err(|e| bad("cov_bounds", e.to_string()))?;
        let mut cfg = PlannerConfig::new(
            self.alpha,
            scenario.process_noise.clone(),
            self.nodes,
            self.ed_min,
            self.conn_radius,
            bounds,
            self.seed,
        )
        .map_err(|e| bad("planner", e.to_string()))?;
        if let Some(p) = self.bnb_period {
            cfg = cfg.with_bnb_period(p).map_err(|e| bad("bnb_period", e.to_string()))?;
        }
        Ok((cfg.with_sensor_map(scenario.sensor_map.clone()), algorithm))
    }
}

/// Command-line overrides for a simulation configuration file.
#[derive(Clone, Debug, Default)]
pub struct SimOverrides {
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub speed: Option<f64>,
    pub dt: Option<f64>,
}

impl SimSpec {
    pub fn apply(mut self, o: &SimOverrides) -> Self {
        if let Some(r) = o.runs {
            self.runs = r;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(s) = o.speed {
            self.speed = s;
        }
        if let Some(d) = o.dt {
            self.dt = d;
        }
        self
    }

    /// Builds the vehicle for a `dim`-dimensional plan.
    pub fn vehicle(&self, dim: usize, path: &Path) -> CliResult<VehicleModel> {
        let bad = |field: &str, e: String| CliError::invalid(path, field, e);
        if self.runs == 0 {
            return Err(bad("runs", "must be at least 1".into()));
        }
        if !(self.speed > 0.0) || !self.speed.is_finite() {
            return Err(bad("speed", "must be positive".into()));
        }
        let v = sym_matrix(&self.measurement_noise, dim).map_err(|e| bad("measurement_noise", e))?;
        let model = match self.model.as_str() {
            "single" => {
                let w = sym_matrix(&self.process_noise, dim)
                    .and_then(|m| ProcessNoise::new(m).map_err(|e| e.to_string()))
                    .map_err(|e| bad("process_noise", e))?;
                VehicleModel::single_integrator(self.dt, w, v)
            }
            "double" => {
                let w = sym_matrix(&self.process_noise, 2 * dim)
                    .and_then(|m| ProcessNoise::new(m).map_err(|e| e.to_string()))
                    .map_err(|e| bad("process_noise", e))?;
                let m = VehicleModel::double_integrator(self.dt, w, v).map_err(|e| bad("model", e.to_string()))?;
                match &self.lq {
                    Some(lq) => {
                        let q = sym_matrix(&lq.q, 2 * dim).map_err(|e| bad("lq.q", e))?;
                        let r = sym_matrix(&lq.r, dim).map_err(|e| bad("lq.r", e))?;
                        m.with_lq_weights(q, r)
                    }
                    None => Ok(m),
                }
            }
            other => return Err(bad("model", format!("unknown model {other:?}; use single or double"))),
        };
        model.map_err(|e| bad("model", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi2_matches_known_quantiles() {
        assert!((chi2_quantile(2, 0.9).unwrap() - 4.605170185988091).abs() < 1e-9);
        assert!((chi2_quantile(1, 0.95).unwrap() - 3.841458820694124).abs() < 1e-9);
        assert!(chi2_quantile(2, 1.0).is_err());
    }

    #[test]
    fn asymmetric_covariance_is_rejected() {
        let err = sym_matrix(&vec![vec![1.0, 0.2], vec![0.1, 1.0]], 2).unwrap_err();
        assert!(err.contains("not symmetric"));
        assert!(matrix(&vec![vec![1.0]], 2).is_err());
    }
}
