//! RRT* planners over Gaussian beliefs.

mod bnb;
mod config;
mod metric;
mod rrt;
mod tree;

pub use bnb::{branch_and_bound, extract_path, goal_lower_bound, start_cost_to_go, update_descendants};
pub use config::{PlannerConfig, DEFAULT_BNB_PERIOD};
pub use metric::{connection_radius, dhat, nearest, neighbors, scale, scale_checked};
pub use rrt::{best_goal_node, edge_feasible, plan, plan_backward, plan_basic, plan_improved, Algorithm, Planner};
pub use tree::{BeliefTree, Orientation};
