//! Plans around a single block for a few weights α and prints the costs.

use infogeo::belief::chain_cost;
use infogeo::geometry::{AaBox, ConvexObstacle, CovSampleBounds, Environment};
use infogeo::planner::{extract_path, plan, Algorithm};
use infogeo::{Belief, PlannerConfig, ProcessNoise};
use nalgebra::{dmatrix, dvector};

fn main() -> Result<(), infogeo::Error> {
    let block = ConvexObstacle::new(vec![
        dvector![0.4, 0.3],
        dvector![0.6, 0.3],
        dvector![0.6, 0.7],
        dvector![0.4, 0.7],
    ])?;
    let bounds = AaBox::new(dvector![0.0, 0.0], dvector![1.0, 1.0])?;
    let start = Belief::new(dvector![0.1, 0.5], dmatrix![1e-3, 0.0; 0.0, 1e-3])?;
    let goal = AaBox::new(dvector![0.85, 0.45], dvector![0.95, 0.55])?;
    // 90% χ² quantile with two degrees of freedom
    let env = Environment::new(vec![block], bounds, start, goal, dmatrix![3e-4, 0.0; 0.0, 3e-4], 4.605170185988091)?;
    let w = ProcessNoise::isotropic(2, 1e-3)?;

    println!("alpha  travel  info    nodes");
    for alpha in [0.0, 0.3, 1.0] {
        let cfg = PlannerConfig::new(alpha, w.clone(), 3000, 0.1, 1.5, CovSampleBounds::new(1e-5, 2e-3)?, 1)?;
        let tree = plan(&cfg, &env, Algorithm::Improved)?;
        match extract_path(&tree, &env, &cfg) {
            Ok(path) => {
                let cost = chain_cost(&path, alpha, &w)?;
                println!("{alpha:<6} {:<7.4} {:<7.4} {}", cost.travel, cost.info, path.len());
            }
            Err(e) => println!("{alpha:<6} no path: {e}"),
        }
    }
    Ok(())
}
