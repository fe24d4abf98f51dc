use crate::belief::ProcessNoise;
use crate::error::{Error, Result};
use crate::geometry::CovSampleBounds;
use crate::scalar::Scalar;
use crate::sensing::SensorMap;

/// Branch-and-bound sweep interval used when none is given.
pub const DEFAULT_BNB_PERIOD: usize = 100;

/// Parameters shared by all three planners.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannerConfig<T: Scalar> {
    alpha: T,
    w: ProcessNoise<T>,
    node_budget: usize,
    ed_min: T,
    conn_radius: T,
    cov_bounds: CovSampleBounds<T>,
    seed: u64,
    bnb_period: usize,
    sensor_map: Option<SensorMap<T>>,
}

impl<T: Scalar> PlannerConfig<T> {
    /// `node_budget` counts the root, so a budget of 0 or 1 yields a root-only tree.
    pub fn new(
        alpha: T,
        w: ProcessNoise<T>,
        node_budget: usize,
        ed_min: T,
        conn_radius: T,
        cov_bounds: CovSampleBounds<T>,
        seed: u64,
    ) -> Result<Self> {
        if !(alpha >= T::zero()) || !alpha.is_finite() {
            return Err(Error::InvalidArgument("alpha must be finite and nonnegative".into()));
        }
        if !(ed_min > T::zero()) || !(conn_radius > T::zero()) {
            return Err(Error::InvalidArgument(
                "ed_min and conn_radius must be positive".into(),
            ));
        }
        cov_bounds.validate_for(w.dim())?;
        Ok(Self {
            alpha,
            w,
            node_budget,
            ed_min,
            conn_radius,
            cov_bounds,
            seed,
            bnb_period: DEFAULT_BNB_PERIOD,
            sensor_map: None,
        })
    }

    pub fn with_bnb_period(mut self, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidArgument("bnb_period must be positive".into()));
        }
        self.bnb_period = period;
        Ok(self)
    }

    pub fn with_sensor_map(mut self, map: Option<SensorMap<T>>) -> Self {
        self.sensor_map = map;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_alpha(mut self, alpha: T) -> Result<Self> {
        if !(alpha >= T::zero()) || !alpha.is_finite() {
            return Err(Error::InvalidArgument("alpha must be finite and nonnegative".into()));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn with_node_budget(mut self, n: usize) -> Self {
        self.node_budget = n;
        self
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn process_noise(&self) -> &ProcessNoise<T> {
        &self.w
    }

    pub fn node_budget(&self) -> usize {
        self.node_budget
    }

    pub fn ed_min(&self) -> T {
        self.ed_min
    }

    pub fn conn_radius(&self) -> T {
        self.conn_radius
    }

    pub fn cov_bounds(&self) -> &CovSampleBounds<T> {
        &self.cov_bounds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bnb_period(&self) -> usize {
        self.bnb_period
    }

    pub fn sensor_map(&self) -> Option<&SensorMap<T>> {
        self.sensor_map.as_ref()
    }
}
