//! Path following with event-triggered sensing.

mod monte_carlo;
mod reference;
mod vehicle;

pub use monte_carlo::{monte_carlo, MonteCarloStats};
pub use reference::{discretize_reference, ReferenceSample, ReferenceTrajectory};
pub use vehicle::{
    event_trigger, simulate, simulate_double_integrator, simulate_single_integrator, SimStep, SimulationTrace,
    VehicleKind, VehicleModel,
};
