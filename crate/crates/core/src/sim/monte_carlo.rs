use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::ConvexObstacle;
use crate::scalar::Scalar;

use super::reference::ReferenceTrajectory;
use super::vehicle::{run_single, DoublePlan, VehicleKind, VehicleModel};

/// Measurement-count statistics over repeated runs.
#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloStats {
    pub runs: usize,
    /// Measurement count of each run, in run order.
    pub counts: Vec<usize>,
    pub mean: f64,
    /// Sample standard deviation (zero for a single run).
    pub std: f64,
    /// Measurement count → number of runs.
    pub histogram: BTreeMap<usize, usize>,
    pub collision_rate: f64,
}

impl MonteCarloStats {
    fn from_runs(counts: Vec<usize>, collided: &[bool]) -> Self {
        let runs = counts.len();
        let n = runs as f64;
        let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
        let std = if runs > 1 {
            (counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut histogram = BTreeMap::new();
        for &c in &counts {
            *histogram.entry(c).or_insert(0) += 1;
        }
        let collision_rate = collided.iter().filter(|&&c| c).count() as f64 / n;
        Self {
            runs,
            counts,
            mean,
            std,
            histogram,
            collision_rate,
        }
    }
}

/// Runs `runs` independent simulations. Run `i` draws from stream `i` of a
/// ChaCha generator seeded with `seed`, so results do not depend on the
/// thread count.
pub fn monte_carlo<T: Scalar>(
    reference: &ReferenceTrajectory<T>,
    model: &VehicleModel<T>,
    runs: usize,
    chi2: T,
    obstacles: &[ConvexObstacle<T>],
    seed: u64,
) -> Result<MonteCarloStats> {
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be at least 1".into()));
    }
    let double = match model.kind() {
        VehicleKind::DoubleIntegrator { .. } => Some(DoublePlan::new(reference, model)?),
        VehicleKind::SingleIntegrator => None,
    };
    let results: Vec<(usize, bool)> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let trace = match &double {
                Some(plan) => plan.run(reference, model, chi2, obstacles, &mut rng, false)?,
                None => run_single(reference, model, chi2, obstacles, &mut rng, false)?,
            };
            Ok((trace.measurement_count, trace.collided))
        })
        .collect::<Result<_>>()?;
    let (counts, collided): (Vec<usize>, Vec<bool>) = results.into_iter().unzip();
    Ok(MonteCarloStats::from_runs(counts, &collided))
}
