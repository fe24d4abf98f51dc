use rand::Rng;
use rand_distr::StandardNormal;

use crate::belief::{Belief, ProcessNoise};
use crate::error::{Error, Result};
use crate::geometry::{ellipsoid_contained, ConvexObstacle};
use crate::linalg::{check_pd, inv_pd, sqrt_psd, symmetrize, Matrix, Vector};
use crate::scalar::{lit, Scalar, Tolerances};

use super::reference::ReferenceTrajectory;

/// Dynamics used to follow a reference.
#[derive(Clone, Debug, PartialEq)]
pub enum VehicleKind<T: Scalar> {
    /// `x_{k+1} = x_k + u_k + w_k`, dead-beat control.
    SingleIntegrator,
    /// Position/velocity point mass with acceleration input, LQG tracking with
    /// state weight `q` and control weight `r`.
    DoubleIntegrator { q: Matrix<T>, r: Matrix<T> },
}

/// A simulated robot: dynamics, time step, process noise rate and sensor noise.
#[derive(Clone, Debug, PartialEq)]
pub struct VehicleModel<T: Scalar> {
    kind: VehicleKind<T>,
    dt: T,
    w: ProcessNoise<T>,
    v: Matrix<T>,
}

impl<T: Scalar> VehicleModel<T> {
    /// `w` and `v` are `d×d`; each step adds noise with covariance `dt·w`.
    pub fn single_integrator(dt: T, w: ProcessNoise<T>, v: Matrix<T>) -> Result<Self> {
        let d = w.dim();
        Self::checked(VehicleKind::SingleIntegrator, dt, w, v, d)
    }

    /// `w` is `2d×2d` over (position, velocity); `v` is `d×d` on position.
    /// Tracker weights default to `Q = I`, `R = 0.1·I`.
    pub fn double_integrator(dt: T, w: ProcessNoise<T>, v: Matrix<T>) -> Result<Self> {
        let n = w.dim();
        if !n.is_multiple_of(2) || n == 0 {
            return Err(Error::InvalidArgument(
                "double integrator noise must cover position and velocity".into(),
            ));
        }
        let kind = VehicleKind::DoubleIntegrator {
            q: Matrix::identity(n, n),
            r: Matrix::identity(n / 2, n / 2) * lit::<T>(0.1),
        };
        Self::checked(kind, dt, w, v, n / 2)
    }

    fn checked(kind: VehicleKind<T>, dt: T, w: ProcessNoise<T>, v: Matrix<T>, m: usize) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::InvalidArgument("dt must be positive".into()));
        }
        if v.nrows() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: v.nrows(),
            });
        }
        let v = check_pd(&v, Tolerances::<T>::default().sym)?;
        Ok(Self { kind, dt, w, v })
    }

    /// Replaces the tracker weights (double integrator only).
    pub fn with_lq_weights(mut self, q: Matrix<T>, r: Matrix<T>) -> Result<Self> {
        let n = self.w.dim();
        match &mut self.kind {
            VehicleKind::DoubleIntegrator { q: q0, r: r0 } => {
                if q.nrows() != n || r.nrows() != n / 2 {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: q.nrows(),
                    });
                }
                crate::linalg::check_psd(&q, lit(T::TOL), lit(T::TOL))?;
                let r = check_pd(&r, lit(T::TOL))?;
                *q0 = symmetrize(&q);
                *r0 = r;
                Ok(self)
            }
            VehicleKind::SingleIntegrator => Err(Error::InvalidArgument(
                "LQ weights apply to the double integrator only".into(),
            )),
        }
    }

    pub fn kind(&self) -> &VehicleKind<T> {
        &self.kind
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn process_noise(&self) -> &ProcessNoise<T> {
        &self.w
    }

    pub fn measurement_noise(&self) -> &Matrix<T> {
        &self.v
    }

    /// Dimension of the planned (position) space.
    pub fn position_dim(&self) -> usize {
        self.v.nrows()
    }
}

/// State of one simulation step.
#[derive(Clone, Debug, PartialEq)]
pub struct SimStep<T: Scalar> {
    pub truth: Vector<T>,
    pub estimate_mean: Vector<T>,
    pub estimate_cov: Matrix<T>,
    pub reference_mean: Vector<T>,
    pub reference_cov: Matrix<T>,
    pub measured: bool,
}

/// Record of one path-following run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationTrace<T: Scalar> {
    pub steps: Vec<SimStep<T>>,
    pub measurement_count: usize,
    pub collided: bool,
}

/// Measure now iff the estimate's χ² ellipse leaves the planned one.
pub fn event_trigger<T: Scalar>(estimate: &Belief<T>, reference: &Belief<T>, chi2: T) -> bool {
    !ellipsoid_contained(estimate, reference, chi2)
}

fn trigger_raw<T: Scalar>(mean: &Vector<T>, cov: &Matrix<T>, ref_mean: &Vector<T>, ref_cov: &Matrix<T>, chi2: T) -> bool {
    let est = Belief::from_parts(mean.clone(), symmetrize(cov));
    let reference = Belief::from_parts(ref_mean.clone(), ref_cov.clone());
    event_trigger(&est, &reference, chi2)
}

fn gaussian<T: Scalar, R: Rng + ?Sized>(sqrt_cov: &Matrix<T>, rng: &mut R) -> Vector<T> {
    let z = Vector::from_iterator(sqrt_cov.ncols(), (0..sqrt_cov.ncols()).map(|_| lit::<T>(rng.sample(StandardNormal))));
    sqrt_cov * z
}

fn hits<T: Scalar>(position: &Vector<T>, obstacles: &[ConvexObstacle<T>]) -> bool {
    obstacles.iter().any(|o| o.contains(position))
}

/// Joseph-form Kalman update with observation matrix `h`.
fn kf_update<T: Scalar>(
    mean: &mut Vector<T>,
    cov: &mut Matrix<T>,
    h: &Matrix<T>,
    v: &Matrix<T>,
    y: &Vector<T>,
) -> Result<()> {
    let s = h * &*cov * h.transpose() + v;
    let gain = &*cov * h.transpose() * inv_pd(&s)?;
    *mean += &gain * (y - h * &*mean);
    let n = cov.nrows();
    let ikh = Matrix::identity(n, n) - &gain * h;
    *cov = symmetrize(&(&ikh * &*cov * ikh.transpose() + &gain * v * gain.transpose()));
    Ok(())
}

/// Dead-beat path following with event-triggered Kalman updates.
pub fn simulate_single_integrator<T: Scalar, R: Rng + ?Sized>(
    reference: &ReferenceTrajectory<T>,
    model: &VehicleModel<T>,
    chi2: T,
    obstacles: &[ConvexObstacle<T>],
    rng: &mut R,
) -> Result<SimulationTrace<T>> {
    run_single(reference, model, chi2, obstacles, rng, true)
}

pub(crate) fn run_single<T: Scalar, R: Rng + ?Sized>(
    reference: &ReferenceTrajectory<T>,
    model: &VehicleModel<T>,
    chi2: T,
    obstacles: &[ConvexObstacle<T>],
    rng: &mut R,
    record: bool,
) -> Result<SimulationTrace<T>> {
    if model.kind != VehicleKind::SingleIntegrator {
        return Err(Error::InvalidArgument("model is not a single integrator".into()));
    }
    let d = reference.dim();
    if model.w.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: model.w.dim(),
        });
    }
    let samples = reference.samples();
    let step_noise = model.w.matrix() * model.dt;
    let noise_sqrt = sqrt_psd(&step_noise)?;
    let meas_sqrt = sqrt_psd(&model.v)?;
    let h = Matrix::identity(d, d);

    let mut mean = samples[0].mean.clone();
    let mut cov = samples[0].cov.clone();
    let mut truth = &mean + gaussian(&sqrt_psd(&cov)?, rng);
    let mut collided = hits(&truth, obstacles);
    let mut steps = Vec::new();
    let mut count = 0;
    if record {
        steps.push(SimStep {
            truth: truth.clone(),
            estimate_mean: mean.clone(),
            estimate_cov: cov.clone(),
            reference_mean: samples[0].mean.clone(),
            reference_cov: samples[0].cov.clone(),
            measured: false,
        });
    }
    for next in &samples[1..] {
        let u = &next.mean - &mean;
        truth += &u + gaussian(&noise_sqrt, rng);
        mean += &u;
        cov = symmetrize(&(&cov + &step_noise));
        let measured = trigger_raw(&mean, &cov, &next.mean, &next.cov, chi2);
        if measured {
            let y = &truth + gaussian(&meas_sqrt, rng);
            kf_update(&mut mean, &mut cov, &h, &model.v, &y)?;
            count += 1;
        }
        collided |= hits(&truth, obstacles);
        if record {
            steps.push(SimStep {
                truth: truth.clone(),
                estimate_mean: mean.clone(),
                estimate_cov: cov.clone(),
                reference_mean: next.mean.clone(),
                reference_cov: next.cov.clone(),
                measured,
            });
        }
    }
    Ok(SimulationTrace {
        steps,
        measurement_count: count,
        collided,
    })
}

/// Feedback gains and feedforward terms of a finite-horizon LQ tracker.
struct Tracker<T: Scalar> {
    gains: Vec<Matrix<T>>,
    feedforward: Vec<Vector<T>>,
}

/// Backward Riccati pass for `Σ (x_k − r_k)ᵀQ(x_k − r_k) + u_kᵀRu_k`.
fn lq_tracker<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, q: &Matrix<T>, r: &Matrix<T>, targets: &[Vector<T>]) -> Result<Tracker<T>> {
    let horizon = targets.len() - 1;
    let mut p = q.clone();
    let mut s = -(q * &targets[horizon]);
    let mut gains = vec![Matrix::zeros(b.ncols(), a.ncols()); horizon];
    let mut feedforward = vec![Vector::zeros(b.ncols()); horizon];
    for k in (0..horizon).rev() {
        let bt = b.transpose();
        let inv = inv_pd(&(r + &bt * &p * b))?;
        let gain = &inv * &bt * &p * a;
        let kff = -(&inv * &bt * &s);
        let closed = a - b * &gain;
        let p_next = symmetrize(&(q + a.transpose() * &p * &closed));
        s = -(q * &targets[k]) + closed.transpose() * &s;
        p = p_next;
        gains[k] = gain;
        feedforward[k] = kff;
    }
    Ok(Tracker { gains, feedforward })
}

/// LQG path following for a point mass with acceleration input; only position
/// is measured, and the trigger compares the position marginal with the plan.
pub fn simulate_double_integrator<T: Scalar, R: Rng + ?Sized>(
    reference: &ReferenceTrajectory<T>,
    model: &VehicleModel<T>,
    chi2: T,
    obstacles: &[ConvexObstacle<T>],
    rng: &mut R,
) -> Result<SimulationTrace<T>> {
    let plan = DoublePlan::new(reference, model)?;
    plan.run(reference, model, chi2, obstacles, rng, true)
}

/// Everything in a double-integrator run that does not depend on the noise.
pub(crate) struct DoublePlan<T: Scalar> {
    a: Matrix<T>,
    b: Matrix<T>,
    h: Matrix<T>,
    tracker: Tracker<T>,
    initial: Vector<T>,
}

impl<T: Scalar> DoublePlan<T> {
    pub(crate) fn new(reference: &ReferenceTrajectory<T>, model: &VehicleModel<T>) -> Result<Self> {
        let VehicleKind::DoubleIntegrator { q, r } = &model.kind else {
            return Err(Error::InvalidArgument("model is not a double integrator".into()));
        };
        let d = reference.dim();
        if model.position_dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: model.position_dim(),
            });
        }
        let n = 2 * d;
        let dt = model.dt;
        let mut a = Matrix::identity(n, n);
        let mut b = Matrix::zeros(n, d);
        let mut h = Matrix::zeros(d, n);
        for i in 0..d {
            a[(i, d + i)] = dt;
            b[(d + i, i)] = dt;
            h[(i, i)] = T::one();
        }
        let samples = reference.samples();
        let targets: Vec<Vector<T>> = (0..samples.len())
            .map(|k| {
                let vel = if k + 1 < samples.len() {
                    (&samples[k + 1].mean - &samples[k].mean) / dt
                } else {
                    Vector::zeros(d)
                };
                let mut x = Vector::zeros(n);
                x.rows_mut(0, d).copy_from(&samples[k].mean);
                x.rows_mut(d, d).copy_from(&vel);
                x
            })
            .collect();
        let tracker = lq_tracker(&a, &b, q, r, &targets)?;
        Ok(Self {
            a,
            b,
            h,
            tracker,
            initial: targets[0].clone(),
        })
    }

    pub(crate) fn run<R: Rng + ?Sized>(
        &self,
        reference: &ReferenceTrajectory<T>,
        model: &VehicleModel<T>,
        chi2: T,
        obstacles: &[ConvexObstacle<T>],
        rng: &mut R,
        record: bool,
    ) -> Result<SimulationTrace<T>> {
        let samples = reference.samples();
        let d = reference.dim();
        let n = 2 * d;
        let step_noise = model.w.matrix() * model.dt;
        let noise_sqrt = sqrt_psd(&step_noise)?;
        let meas_sqrt = sqrt_psd(&model.v)?;

        let mut mean = self.initial.clone();
        let mut cov = Matrix::zeros(n, n);
        cov.view_mut((0, 0), (d, d)).copy_from(&samples[0].cov);
        let mut truth = &mean + gaussian(&sqrt_psd(&cov)?, rng);
        let mut collided = hits(&truth.rows(0, d).into_owned(), obstacles);
        let mut steps = Vec::new();
        let mut count = 0;
        let record_step = |steps: &mut Vec<SimStep<T>>, truth: &Vector<T>, mean: &Vector<T>, cov: &Matrix<T>, k: usize, measured: bool| {
            steps.push(SimStep {
                truth: truth.clone(),
                estimate_mean: mean.clone(),
                estimate_cov: cov.clone(),
                reference_mean: samples[k].mean.clone(),
                reference_cov: samples[k].cov.clone(),
                measured,
            });
        };
        if record {
            record_step(&mut steps, &truth, &mean, &cov, 0, false);
        }
        for k in 0..samples.len() - 1 {
            let u = &self.tracker.feedforward[k] - &self.tracker.gains[k] * &mean;
            truth = &self.a * &truth + &self.b * &u + gaussian(&noise_sqrt, rng);
            mean = &self.a * &mean + &self.b * &u;
            cov = symmetrize(&(&self.a * &cov * self.a.transpose() + &step_noise));
            let pos = mean.rows(0, d).into_owned();
            let pos_cov = cov.view((0, 0), (d, d)).into_owned();
            let next = &samples[k + 1];
            let measured = trigger_raw(&pos, &pos_cov, &next.mean, &next.cov, chi2);
            if measured {
                let y = truth.rows(0, d).into_owned() + gaussian(&meas_sqrt, rng);
                kf_update(&mut mean, &mut cov, &self.h, &model.v, &y)?;
                count += 1;
            }
            collided |= hits(&truth.rows(0, d).into_owned(), obstacles);
            if record {
                record_step(&mut steps, &truth, &mean, &cov, k + 1, measured);
            }
        }
        Ok(SimulationTrace {
            steps,
            measurement_count: count,
            collided,
        })
    }
}

/// Runs the simulator matching `model`'s kind.
pub fn simulate<T: Scalar, R: Rng + ?Sized>(
    reference: &ReferenceTrajectory<T>,
    model: &VehicleModel<T>,
    chi2: T,
    obstacles: &[ConvexObstacle<T>],
    rng: &mut R,
) -> Result<SimulationTrace<T>> {
    match model.kind {
        VehicleKind::SingleIntegrator => simulate_single_integrator(reference, model, chi2, obstacles, rng),
        VehicleKind::DoubleIntegrator { .. } => simulate_double_integrator(reference, model, chi2, obstacles, rng),
    }
}
