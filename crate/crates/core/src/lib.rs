//! Shortest paths in Gaussian belief space.
//!
//! A belief is a mean and a covariance. Moving between beliefs costs the
//! Euclidean travel distance plus `α` times the entropy reduction needed to
//! shrink the open-loop prior to the target covariance. This crate provides
//! that cost, chance-constrained collision checks against convex obstacles,
//! three RRT* planners (forward, forward with lossless modification and
//! branch and bound, and backward cost-to-go), sensor synthesis, and a
//! path-following simulator with event-triggered measurements.
//!
//! Every routine is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`.

// NaN inputs must fail the positivity checks, hence `!(x > 0)` comparisons
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod belief;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod planner;
pub mod scalar;
pub mod sensing;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::{Scalar, Tolerances};

pub type Belief = belief::Belief<f64>;
pub type BeliefChain = belief::BeliefChain<f64>;
pub type ProcessNoise = belief::ProcessNoise<f64>;
pub type CostBreakdown = belief::CostBreakdown<f64>;
pub type Environment = geometry::Environment<f64>;
pub type ConvexObstacle = geometry::ConvexObstacle<f64>;
pub type AaBox = geometry::AaBox<f64>;
pub type CovSampleBounds = geometry::CovSampleBounds<f64>;
pub type PlannerConfig = planner::PlannerConfig<f64>;
pub type BeliefTree = planner::BeliefTree<f64>;
pub type SensorModel = sensing::SensorModel<f64>;
pub type SensorMap = sensing::SensorMap<f64>;
pub type ReferenceTrajectory = sim::ReferenceTrajectory<f64>;
pub type VehicleModel = sim::VehicleModel<f64>;
pub type SimulationTrace = sim::SimulationTrace<f64>;
pub type Vector = linalg::Vector<f64>;
pub type Matrix = linalg::Matrix<f64>;
