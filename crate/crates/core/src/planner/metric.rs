//! The sampling metric D̂ and the RRT* primitives built on it.

use crate::belief::Belief;
use crate::error::{Error, Result};
use crate::geometry::{point_collision_free, Environment};
use crate::linalg::check_pd;
use crate::scalar::{lit, Scalar, Tolerances};

use super::config::PlannerConfig;
use super::tree::BeliefTree;

/// `D̂(a, b) = ‖x_a − x_b‖ + ‖P_a − P_b‖_F`, a true metric on beliefs.
pub fn dhat<T: Scalar>(a: &Belief<T>, b: &Belief<T>) -> T {
    let dx = a
        .mean()
        .iter()
        .zip(b.mean().iter())
        .fold(T::zero(), |acc, (x, y)| acc + (*x - *y) * (*x - *y));
    let dp = a
        .cov()
        .iter()
        .zip(b.cov().iter())
        .fold(T::zero(), |acc, (x, y)| acc + (*x - *y) * (*x - *y));
    dx.sqrt() + dp.sqrt()
}

/// Index of the node closest to `b` in D̂; ties go to the lowest index.
pub fn nearest<T: Scalar>(tree: &BeliefTree<T>, b: &Belief<T>) -> Result<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, n) in tree.nodes().iter().enumerate() {
        let d = dhat(n, b);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i).ok_or(Error::Empty)
}

/// All nodes within D̂-distance `radius` of `b`, ascending.
pub fn neighbors<T: Scalar>(tree: &BeliefTree<T>, b: &Belief<T>, radius: T) -> Vec<usize> {
    tree.nodes()
        .iter()
        .enumerate()
        .filter(|(_, n)| dhat(*n, b) <= radius)
        .map(|(i, _)| i)
        .collect()
}

/// Moves `sample` toward `near` until it is at most `dhat_min` away.
///
/// Mean and covariance are interpolated together, so the result stays PD.
pub fn scale<T: Scalar>(near: &Belief<T>, sample: &Belief<T>, dhat_min: T) -> Result<Belief<T>> {
    if near.dim() != sample.dim() {
        return Err(Error::DimensionMismatch {
            expected: near.dim(),
            got: sample.dim(),
        });
    }
    if !(dhat_min > T::zero()) {
        return Err(Error::InvalidArgument("scale step must be positive".into()));
    }
    let d = dhat(sample, near);
    if d <= dhat_min {
        return Ok(sample.clone());
    }
    let t = dhat_min / d;
    let mean = near.mean() + (sample.mean() - near.mean()) * t;
    let cov = near.cov() + (sample.cov() - near.cov()) * t;
    let cov = check_pd(&cov, Tolerances::<T>::default().sym)?;
    Ok(Belief::from_parts(mean, cov))
}

/// [`scale`] followed by the χ²-clearance check on the result.
pub fn scale_checked<T: Scalar>(
    near: &Belief<T>,
    sample: &Belief<T>,
    dhat_min: T,
    env: &Environment<T>,
) -> Result<Belief<T>> {
    let b = scale(near, sample, dhat_min)?;
    if point_collision_free(&b, env) {
        Ok(b)
    } else {
        Err(Error::ScaledCollision)
    }
}

/// `min{ED_min, r (ln n / n)^{1/d}}`, with `d` the workspace dimension. A
/// single-node tree gets `ED_min` so the first connection is possible.
pub fn connection_radius<T: Scalar>(n: usize, cfg: &PlannerConfig<T>) -> T {
    if n <= 1 {
        return cfg.ed_min();
    }
    let nf: T = lit(n as f64);
    let d: T = lit(cfg.process_noise().dim() as f64);
    let shrink = (nf.ln() / nf).powf(T::one() / d);
    cfg.ed_min().min(cfg.conn_radius() * shrink)
}
