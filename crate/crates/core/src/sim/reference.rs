use crate::belief::{BeliefChain, ProcessNoise};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::scalar::{lit, Scalar};

/// One time-stamped reference belief.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSample<T: Scalar> {
    pub mean: Vector<T>,
    pub cov: Matrix<T>,
    pub time: T,
}

/// A planned belief path resampled at a fixed time step.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceTrajectory<T: Scalar> {
    samples: Vec<ReferenceSample<T>>,
    dt: T,
}

impl<T: Scalar> ReferenceTrajectory<T> {
    /// Validates strictly increasing times and PD covariances.
    pub fn new(samples: Vec<ReferenceSample<T>>, dt: T) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty);
        }
        if !(dt > T::zero()) {
            return Err(Error::InvalidArgument("dt must be positive".into()));
        }
        let d = samples[0].mean.len();
        for (i, s) in samples.iter().enumerate() {
            if s.mean.len() != d || s.cov.nrows() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: s.mean.len(),
                });
            }
            crate::linalg::check_pd(&s.cov, lit(T::TOL))?;
            if i > 0 && !(s.time > samples[i - 1].time) {
                return Err(Error::InvalidArgument("reference times must increase".into()));
            }
        }
        Ok(Self { samples, dt })
    }

    pub fn samples(&self) -> &[ReferenceSample<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.samples[0].mean.len()
    }
}

/// Resamples `chain` at arc-length spacing `speed·dt`.
///
/// Along an edge the covariance is the open-loop prior `P_k + s·W`; it drops
/// to the planned `P_{k+1}` on arrival at each waypoint. The last sample is
/// always the chain's final belief.
pub fn discretize_reference<T: Scalar>(
    chain: &BeliefChain<T>,
    speed: T,
    dt: T,
    w: &ProcessNoise<T>,
) -> Result<ReferenceTrajectory<T>> {
    if chain.len() < 2 {
        return Err(Error::InvalidArgument("reference needs at least two beliefs".into()));
    }
    if !(speed > T::zero()) || !(dt > T::zero()) {
        return Err(Error::InvalidArgument("speed and dt must be positive".into()));
    }
    if w.dim() != chain.dim() {
        return Err(Error::DimensionMismatch {
            expected: chain.dim(),
            got: w.dim(),
        });
    }
    let nodes = chain.nodes();
    let mut arc = Vec::with_capacity(nodes.len());
    let mut total = T::zero();
    arc.push(total);
    for pair in nodes.windows(2) {
        total += (pair[1].mean() - pair[0].mean()).norm();
        arc.push(total);
    }
    let h = speed * dt;
    let slack = h * lit::<T>(1e-9);
    let mut samples = Vec::new();
    let mut edge = 0;
    let mut j = 0usize;
    loop {
        let s = h * lit::<T>(j as f64);
        if s >= total - slack {
            break;
        }
        while edge + 1 < nodes.len() - 1 && arc[edge + 1] <= s {
            edge += 1;
        }
        let from = &nodes[edge];
        let len = arc[edge + 1] - arc[edge];
        let into = s - arc[edge];
        let mean = if len > T::zero() {
            from.mean() + (nodes[edge + 1].mean() - from.mean()) * (into / len)
        } else {
            from.mean().clone()
        };
        let cov = if into > T::zero() {
            from.cov() + w.matrix() * into
        } else {
            from.cov().clone()
        };
        samples.push(ReferenceSample {
            mean,
            cov,
            time: dt * lit::<T>(j as f64),
        });
        j += 1;
    }
    if samples.is_empty() {
        samples.push(ReferenceSample {
            mean: nodes[0].mean().clone(),
            cov: nodes[0].cov().clone(),
            time: T::zero(),
        });
        j = 1;
    }
    let last = chain.last();
    samples.push(ReferenceSample {
        mean: last.mean().clone(),
        cov: last.cov().clone(),
        time: dt * lit::<T>(j as f64),
    });
    ReferenceTrajectory::new(samples, dt)
}
