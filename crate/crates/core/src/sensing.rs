//! Sensors implied by planned covariance drops, and region-dependent sensing limits.

use crate::belief::{is_lossless, prior_covariance, travel_cost, Belief, ProcessNoise};
use crate::error::{Error, Result};
use crate::geometry::{segment_collision_free, AaBox, Environment};
use crate::linalg::{check_pd, inv_pd, min_eigenvalue, psd_le, spectral_map, sym_eigen, symmetrize, Matrix, Vector};
use crate::scalar::{lit, Scalar, Tolerances};

/// Linear Gaussian measurement `y = Cx + v`, `v ~ N(0, V)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorModel<T: Scalar> {
    c: Matrix<T>,
    v: Matrix<T>,
}

impl<T: Scalar> SensorModel<T> {
    pub fn new(c: Matrix<T>, v: Matrix<T>) -> Result<Self> {
        if c.nrows() != v.nrows() {
            return Err(Error::DimensionMismatch {
                expected: v.nrows(),
                got: c.nrows(),
            });
        }
        let v = check_pd(&v, Tolerances::<T>::default().sym)?;
        Ok(Self { c, v })
    }

    /// Full-state sensor with isotropic noise `σ²·I`.
    pub fn direct(dim: usize, noise_var: T) -> Result<Self> {
        Self::new(
            Matrix::identity(dim, dim),
            Matrix::identity(dim, dim) * noise_var,
        )
    }

    pub fn c(&self) -> &Matrix<T> {
        &self.c
    }

    pub fn v(&self) -> &Matrix<T> {
        &self.v
    }

    /// State dimension the sensor observes.
    pub fn state_dim(&self) -> usize {
        self.c.ncols()
    }

    /// `CᵀV⁻¹C`.
    pub fn information(&self) -> Result<Matrix<T>> {
        let v_inv = inv_pd(&self.v)?;
        Ok(symmetrize(&(self.c.transpose() * v_inv * &self.c)))
    }
}

/// Output of [`synthesize_sensor`]: the required information matrix and one
/// sensor realising it.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesizedSensor<T: Scalar> {
    pub information: Matrix<T>,
    pub model: SensorModel<T>,
}

/// The measurement information needed to shrink `p_prior` to `p_post`:
/// `M = P_post⁻¹ − P_prior⁻¹`, realised as `C = M^{1/2}`, `V = I`.
pub fn synthesize_sensor<T: Scalar>(
    p_prior: &Matrix<T>,
    p_post: &Matrix<T>,
) -> Result<SynthesizedSensor<T>> {
    if p_prior.nrows() != p_post.nrows() {
        return Err(Error::DimensionMismatch {
            expected: p_prior.nrows(),
            got: p_post.nrows(),
        });
    }
    let tol = Tolerances::<T>::default();
    let p_prior = check_pd(p_prior, tol.sym)?;
    let p_post = check_pd(p_post, tol.sym)?;
    if !psd_le(&p_post, &p_prior, tol.psd)? {
        return Err(Error::NotLossless);
    }
    let raw = inv_pd(&p_post)? - inv_pd(&p_prior)?;
    let eig = sym_eigen(&raw)?;
    let information = spectral_map(&eig, |x| x.max(T::zero()));
    let c = spectral_map(&eig, |x| x.max(T::zero()).sqrt());
    let d = p_prior.nrows();
    Ok(SynthesizedSensor {
        information,
        model: SensorModel {
            c,
            v: Matrix::identity(d, d),
        },
    })
}

/// Posterior covariance after one measurement: `(P⁻¹ + CᵀV⁻¹C)⁻¹`.
pub fn constrained_posterior<T: Scalar>(
    p_prior: &Matrix<T>,
    sensor: &SensorModel<T>,
) -> Result<Matrix<T>> {
    if sensor.state_dim() != p_prior.nrows() {
        return Err(Error::DimensionMismatch {
            expected: p_prior.nrows(),
            got: sensor.state_dim(),
        });
    }
    inv_pd(&(inv_pd(p_prior)? + sensor.information()?))
}

/// Sensor availability over the workspace; the first region containing a
/// point wins, otherwise the default applies. `None` means no measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorMap<T: Scalar> {
    regions: Vec<(AaBox<T>, Option<SensorModel<T>>)>,
    default: Option<SensorModel<T>>,
}

impl<T: Scalar> SensorMap<T> {
    pub fn new(
        regions: Vec<(AaBox<T>, Option<SensorModel<T>>)>,
        default: Option<SensorModel<T>>,
    ) -> Result<Self> {
        let dims = regions
            .iter()
            .flat_map(|(b, s)| [Some(b.dim()), s.as_ref().map(SensorModel::state_dim)])
            .chain([default.as_ref().map(SensorModel::state_dim)])
            .flatten()
            .collect::<Vec<_>>();
        if let Some(&first) = dims.first() {
            if let Some(&bad) = dims.iter().find(|&&d| d != first) {
                return Err(Error::DimensionMismatch {
                    expected: first,
                    got: bad,
                });
            }
        }
        Ok(Self { regions, default })
    }

    /// A map that offers the same sensor everywhere.
    pub fn uniform(sensor: SensorModel<T>) -> Self {
        Self {
            regions: Vec::new(),
            default: Some(sensor),
        }
    }

    pub fn regions(&self) -> &[(AaBox<T>, Option<SensorModel<T>>)] {
        &self.regions
    }

    pub fn default_sensor(&self) -> Option<&SensorModel<T>> {
        self.default.as_ref()
    }

    pub fn lookup(&self, x: &Vector<T>) -> Option<&SensorModel<T>> {
        match self.regions.iter().find(|(b, _)| b.contains(x)) {
            Some((_, s)) => s.as_ref(),
            None => self.default.as_ref(),
        }
    }
}

/// The sensing half of [`feas_check2`]: `to.cov` is no tighter than what the
/// sensor available at `to.mean` can deliver from the prior.
pub fn sensor_admits<T: Scalar>(
    from: &Belief<T>,
    to: &Belief<T>,
    map: &SensorMap<T>,
    w: &ProcessNoise<T>,
) -> bool {
    let psd: T = lit(T::TOL);
    let check = || -> Result<bool> {
        let prior = prior_covariance(from.cov(), travel_cost(from, to)?, w)?;
        let floor = match map.lookup(to.mean()) {
            Some(sensor) => constrained_posterior(&prior, sensor)?,
            None => prior,
        };
        Ok(min_eigenvalue(&(to.cov() - floor))? >= -psd)
    };
    check().unwrap_or(false)
}

/// Feasibility of `from → to` under a region-dependent sensor: lossless,
/// obstacle free, and reachable with the sensor at the destination.
pub fn feas_check2<T: Scalar>(
    from: &Belief<T>,
    to: &Belief<T>,
    map: &SensorMap<T>,
    env: &Environment<T>,
    w: &ProcessNoise<T>,
) -> bool {
    is_lossless(from, to, w, lit(T::TOL)).unwrap_or(false)
        && segment_collision_free(from, to.mean(), w, env)
        && sensor_admits(from, to, map, w)
}
