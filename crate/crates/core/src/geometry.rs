//! Obstacles, environments and χ² confidence-region collision predicates.

use nalgebra::Cholesky;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::belief::{prior_covariance, Belief, ProcessNoise};
use crate::error::{Error, Result};
use crate::linalg::{check_pd, eigenvalues, sym_eigen, spectral_map, Matrix, Vector};
use crate::scalar::{lit, Scalar, Tolerances};

/// Attempts made by [`sample_free_belief`] before giving up.
pub const MAX_REJECTIONS: usize = 10_000;

/// Default λ-grid spacing for segment checks, in workspace units.
pub const DEFAULT_CLEARANCE_STEP: f64 = 0.01;

/// Bisection depth used to settle a grid interval the Lipschitz bound cannot.
const MAX_REFINE_DEPTH: u32 = 16;

/// Axis-aligned box.
#[derive(Clone, Debug, PartialEq)]
pub struct AaBox<T: Scalar> {
    min: Vector<T>,
    max: Vector<T>,
}

impl<T: Scalar> AaBox<T> {
    pub fn new(min: Vector<T>, max: Vector<T>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::DimensionMismatch {
                expected: min.len(),
                got: max.len(),
            });
        }
        if min.iter().zip(max.iter()).any(|(a, b)| !(a <= b)) {
            return Err(Error::InvalidArgument("box min must not exceed max".into()));
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> &Vector<T> {
        &self.min
    }

    pub fn max(&self) -> &Vector<T> {
        &self.max
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn center(&self) -> Vector<T> {
        (&self.min + &self.max) * lit::<T>(0.5)
    }

    pub fn contains(&self, x: &Vector<T>) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.min.iter().zip(self.max.iter()))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    pub fn contains_box(&self, other: &AaBox<T>) -> bool {
        self.contains(&other.min) && self.contains(&other.max)
    }

    /// Euclidean projection onto the box.
    pub fn project(&self, x: &Vector<T>) -> Vector<T> {
        Vector::from_iterator(
            x.len(),
            x.iter()
                .zip(self.min.iter().zip(self.max.iter()))
                .map(|(v, (lo, hi))| v.max(*lo).min(*hi)),
        )
    }

    fn intersects(&self, lo: &Vector<T>, hi: &Vector<T>) -> bool {
        (0..self.dim()).all(|i| self.min[i] <= hi[i] && lo[i] <= self.max[i])
    }
}

/// A closed convex polytope given by its vertices.
///
/// In the plane the vertices are stored as a counterclockwise hull; vertices
/// that are not extreme points are dropped at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexObstacle<T: Scalar> {
    vertices: Vec<Vector<T>>,
    aabb: AaBox<T>,
}

impl<T: Scalar> ConvexObstacle<T> {
    pub fn new(vertices: Vec<Vector<T>>) -> Result<Self> {
        let d = vertices.first().ok_or(Error::Empty)?.len();
        if d == 0 {
            return Err(Error::InvalidArgument("zero-dimensional obstacle".into()));
        }
        if let Some(bad) = vertices.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        if vertices.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidArgument("non-finite obstacle vertex".into()));
        }
        let hull = match d {
            1 => {
                let lo = vertices.iter().map(|v| v[0]).fold(vertices[0][0], |a, b| a.min(b));
                let hi = vertices.iter().map(|v| v[0]).fold(vertices[0][0], |a, b| a.max(b));
                if lo < hi {
                    vec![Vector::from_element(1, lo), Vector::from_element(1, hi)]
                } else {
                    vec![Vector::from_element(1, lo)]
                }
            }
            2 => convex_hull_2d(&vertices),
            _ => extreme_points(&vertices),
        };
        if hull.len() < d + 1 {
            return Err(Error::InvalidArgument(format!(
                "obstacle needs at least {} affinely independent vertices, got {}",
                d + 1,
                hull.len()
            )));
        }
        let mut lo = hull[0].clone();
        let mut hi = hull[0].clone();
        for v in &hull[1..] {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        Ok(Self {
            vertices: hull,
            aabb: AaBox { min: lo, max: hi },
        })
    }

    /// Axis-aligned box `[min, max]` as a polytope.
    pub fn from_box(b: &AaBox<T>) -> Result<Self> {
        let d = b.dim();
        let corners = (0..(1usize << d))
            .map(|mask| {
                Vector::from_iterator(
                    d,
                    (0..d).map(|i| if mask & (1 << i) != 0 { b.max[i] } else { b.min[i] }),
                )
            })
            .collect();
        Self::new(corners)
    }

    pub fn vertices(&self) -> &[Vector<T>] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn bounding_box(&self) -> &AaBox<T> {
        &self.aabb
    }

    /// Point membership (closed set).
    pub fn contains(&self, x: &Vector<T>) -> bool {
        let id = Whitener::identity(self.dim());
        polytope_dist_sq(&id, x, self) <= lit(T::TINY)
    }
}

/// The closed half-space `{x : n·x ≥ offset}`; workspace walls are built from these.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace<T: Scalar> {
    normal: Vector<T>,
    offset: T,
}

impl<T: Scalar> HalfSpace<T> {
    pub fn new(normal: Vector<T>, offset: T) -> Self {
        Self { normal, offset }
    }

    pub fn normal(&self) -> &Vector<T> {
        &self.normal
    }

    pub fn offset(&self) -> T {
        self.offset
    }
}

/// Covariance sampling range: eigenvalues at least `rho`, trace at most `trace_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovSampleBounds<T> {
    pub rho: T,
    pub trace_max: T,
}

impl<T: Scalar> CovSampleBounds<T> {
    pub fn new(rho: T, trace_max: T) -> Result<Self> {
        if !(rho > T::zero()) || !(trace_max > T::zero()) {
            return Err(Error::InvalidArgument(
                "covariance bounds must be positive".into(),
            ));
        }
        Ok(Self { rho, trace_max })
    }

    /// Checks `rho·d ≤ trace_max`.
    pub fn validate_for(&self, dim: usize) -> Result<()> {
        if self.rho * lit::<T>(dim as f64) > self.trace_max {
            return Err(Error::InvalidArgument(format!(
                "rho·d = {} exceeds trace_max = {}",
                self.rho * lit::<T>(dim as f64),
                self.trace_max
            )));
        }
        Ok(())
    }

    /// Upper end of the per-eigenvalue sampling range, `trace_max / d`.
    pub fn eig_max(&self, dim: usize) -> T {
        self.trace_max / lit::<T>(dim as f64)
    }
}

/// A planning problem: obstacles, workspace, start belief and goal region.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment<T: Scalar> {
    obstacles: Vec<ConvexObstacle<T>>,
    bounds: AaBox<T>,
    start: Belief<T>,
    goal_box: AaBox<T>,
    goal_cov: Matrix<T>,
    chi2: T,
    clearance_step: T,
    walls: Vec<HalfSpace<T>>,
}

impl<T: Scalar> Environment<T> {
    pub fn new(
        obstacles: Vec<ConvexObstacle<T>>,
        bounds: AaBox<T>,
        start: Belief<T>,
        goal_box: AaBox<T>,
        goal_cov: Matrix<T>,
        chi2: T,
    ) -> Result<Self> {
        let d = bounds.dim();
        for dim in obstacles
            .iter()
            .map(ConvexObstacle::dim)
            .chain([start.dim(), goal_box.dim(), goal_cov.nrows()])
        {
            if dim != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: dim,
                });
            }
        }
        if !bounds.contains(start.mean()) {
            return Err(Error::InvalidArgument("start mean lies outside bounds".into()));
        }
        if !bounds.contains_box(&goal_box) {
            return Err(Error::InvalidArgument("goal box must lie inside bounds".into()));
        }
        if !(chi2 > T::zero()) {
            return Err(Error::InvalidArgument("chi2 must be positive".into()));
        }
        let goal_cov = check_pd(&goal_cov, Tolerances::<T>::default().sym)?;
        let walls = (0..d)
            .flat_map(|i| {
                let mut lo = Vector::zeros(d);
                lo[i] = -T::one();
                let mut hi = Vector::zeros(d);
                hi[i] = T::one();
                [
                    HalfSpace::new(lo, -bounds.min[i]),
                    HalfSpace::new(hi, bounds.max[i]),
                ]
            })
            .collect();
        Ok(Self {
            obstacles,
            bounds,
            start,
            goal_box,
            goal_cov,
            chi2,
            clearance_step: lit(DEFAULT_CLEARANCE_STEP),
            walls,
        })
    }

    /// Sets the λ-grid spacing used by [`segment_collision_free`].
    pub fn with_clearance_step(mut self, step: T) -> Result<Self> {
        if !(step > T::zero()) {
            return Err(Error::InvalidArgument("clearance step must be positive".into()));
        }
        self.clearance_step = step;
        Ok(self)
    }

    /// Replaces the start belief (validated against the bounds).
    pub fn with_start(mut self, start: Belief<T>) -> Result<Self> {
        if start.dim() != self.dim() || !self.bounds.contains(start.mean()) {
            return Err(Error::InvalidArgument("start mean lies outside bounds".into()));
        }
        self.start = start;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn obstacles(&self) -> &[ConvexObstacle<T>] {
        &self.obstacles
    }

    pub fn bounds(&self) -> &AaBox<T> {
        &self.bounds
    }

    pub fn start(&self) -> &Belief<T> {
        &self.start
    }

    pub fn goal_box(&self) -> &AaBox<T> {
        &self.goal_box
    }

    pub fn goal_cov(&self) -> &Matrix<T> {
        &self.goal_cov
    }

    pub fn chi2(&self) -> T {
        self.chi2
    }

    pub fn clearance_step(&self) -> T {
        self.clearance_step
    }

    /// The 2d half-spaces outside the workspace box.
    pub fn walls(&self) -> &[HalfSpace<T>] {
        &self.walls
    }

    /// Goal membership: mean inside the goal box and covariance below the cap.
    pub fn in_goal(&self, b: &Belief<T>) -> bool {
        self.goal_box.contains(b.mean())
            && crate::linalg::psd_le(b.cov(), &self.goal_cov, Tolerances::<T>::default().psd)
                .unwrap_or(false)
    }

    /// The goal belief used as the backward tree root.
    pub fn goal_belief(&self) -> Belief<T> {
        Belief::from_parts(self.goal_box.center(), self.goal_cov.clone())
    }
}

/// Maps displacements into the coordinates where `cov` becomes the identity.
enum Whitener<'a, T: Scalar> {
    Identity,
    Planar { l11: T, l21: T, l22: T, cov: &'a Matrix<T> },
    General { chol: Cholesky<T, nalgebra::Dyn>, cov: &'a Matrix<T> },
}

impl<'a, T: Scalar> Whitener<'a, T> {
    fn identity(_dim: usize) -> Self {
        Whitener::Identity
    }

    fn new(cov: &'a Matrix<T>) -> Option<Self> {
        if cov.nrows() == 2 {
            let a = cov[(0, 0)];
            let b = (cov[(0, 1)] + cov[(1, 0)]) * lit::<T>(0.5);
            let d = cov[(1, 1)];
            if !(a > T::zero()) {
                return None;
            }
            let l11 = a.sqrt();
            let l21 = b / l11;
            let rest = d - l21 * l21;
            if !(rest > T::zero()) {
                return None;
            }
            Some(Whitener::Planar {
                l11,
                l21,
                l22: rest.sqrt(),
                cov,
            })
        } else {
            Cholesky::new(cov.clone()).map(|chol| Whitener::General { chol, cov })
        }
    }

    #[inline]
    fn planar(&self, dx: T, dy: T) -> (T, T) {
        match self {
            Whitener::Planar { l11, l21, l22, .. } => {
                let y1 = dx / *l11;
                (y1, (dy - *l21 * y1) / *l22)
            }
            _ => (dx, dy),
        }
    }

    fn apply(&self, v: &Vector<T>) -> Vector<T> {
        match self {
            Whitener::Identity => v.clone(),
            Whitener::Planar { .. } => {
                let (a, b) = self.planar(v[0], v[1]);
                Vector::from_vec(vec![a, b])
            }
            Whitener::General { chol, .. } => chol
                .l_dirty()
                .solve_lower_triangular(v)
                .expect("cholesky factor is nonsingular"),
        }
    }

    /// `nᵀ P n`, the variance of the projection onto `n`.
    fn quad(&self, n: &Vector<T>) -> T {
        match self {
            Whitener::Identity => n.dot(n),
            Whitener::Planar { cov, .. } | Whitener::General { cov, .. } => (*cov * n).dot(n),
        }
    }
}

/// Squared distance from the origin to the segment `[a, b]` in the plane.
#[inline]
fn seg_dist_sq<T: Scalar>(a: (T, T), b: (T, T)) -> T {
    let ex = b.0 - a.0;
    let ey = b.1 - a.1;
    let len2 = ex * ex + ey * ey;
    let t = if len2 > T::zero() {
        (-(a.0 * ex + a.1 * ey) / len2).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    let px = a.0 + ex * t;
    let py = a.1 + ey * t;
    px * px + py * py
}

/// Squared Mahalanobis distance from `center` to `obstacle` under `wh`.
fn polytope_dist_sq<T: Scalar>(wh: &Whitener<'_, T>, center: &Vector<T>, obstacle: &ConvexObstacle<T>) -> T {
    let verts = obstacle.vertices();
    if center.len() == 2 {
        let map = |v: &Vector<T>| wh.planar(v[0] - center[0], v[1] - center[1]);
        let mut inside = true;
        let mut best = T::max_value().unwrap_or_else(|| lit(f64::MAX));
        let mut prev = map(&verts[verts.len() - 1]);
        for v in verts {
            let cur = map(v);
            // origin must be left of (or on) every counterclockwise edge
            let cross = (cur.0 - prev.0) * (-prev.1) - (cur.1 - prev.1) * (-prev.0);
            if cross < T::zero() {
                inside = false;
            }
            best = best.min(seg_dist_sq(prev, cur));
            prev = cur;
        }
        if inside {
            T::zero()
        } else {
            best
        }
    } else {
        let pts: Vec<Vector<T>> = verts.iter().map(|v| wh.apply(&(v - center))).collect();
        hull_dist_sq(&pts)
    }
}

fn half_space_dist_sq<T: Scalar>(wh: &Whitener<'_, T>, center: &Vector<T>, h: &HalfSpace<T>) -> T {
    let gap = h.offset - h.normal.dot(center);
    if gap <= T::zero() {
        return T::zero();
    }
    gap * gap / wh.quad(&h.normal)
}

/// `min_{x ∈ O} (c − x)ᵀ P⁻¹ (c − x)`; zero iff `c` lies inside `O`.
pub fn min_mahalanobis<T: Scalar>(
    center: &Vector<T>,
    cov: &Matrix<T>,
    obstacle: &ConvexObstacle<T>,
) -> Result<T> {
    if center.len() != obstacle.dim() || cov.nrows() != center.len() {
        return Err(Error::DimensionMismatch {
            expected: obstacle.dim(),
            got: center.len(),
        });
    }
    let cov = check_pd(cov, Tolerances::<T>::default().sym)?;
    let wh = Whitener::new(&cov).ok_or(Error::NotPositiveDefinite(0.0))?;
    Ok(polytope_dist_sq(&wh, center, obstacle))
}

/// Obstacles and walls that an ellipsoid swept over `[lo, hi]` could touch.
struct Relevant<'e, T: Scalar> {
    obstacles: Vec<&'e ConvexObstacle<T>>,
    walls: Vec<&'e HalfSpace<T>>,
}

impl<'e, T: Scalar> Relevant<'e, T> {
    /// `lo`/`hi` bound the centers, `cov_max` dominates every covariance involved.
    fn gather(env: &'e Environment<T>, lo: &Vector<T>, hi: &Vector<T>, cov_max: &Matrix<T>) -> Self {
        let d = env.dim();
        let reach = Vector::from_iterator(
            d,
            (0..d).map(|i| (env.chi2 * cov_max[(i, i)].max(T::zero())).sqrt()),
        );
        let lo = lo - &reach;
        let hi = hi + &reach;
        let obstacles = env
            .obstacles
            .iter()
            .filter(|o| o.aabb.intersects(&lo, &hi))
            .collect();
        let walls = env
            .walls
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let axis = k / 2;
                if k % 2 == 0 {
                    lo[axis] <= env.bounds.min[axis]
                } else {
                    hi[axis] >= env.bounds.max[axis]
                }
            })
            .map(|(_, w)| w)
            .collect();
        Self { obstacles, walls }
    }

    fn is_empty(&self) -> bool {
        self.obstacles.is_empty() && self.walls.is_empty()
    }

    /// Smallest squared Mahalanobis distance to any relevant obstacle; `None`
    /// when `cov` is not positive definite.
    fn clearance_sq(&self, center: &Vector<T>, cov: &Matrix<T>) -> Option<T> {
        let wh = Whitener::new(cov)?;
        let mut best = T::max_value().unwrap_or_else(|| lit(f64::MAX));
        for o in &self.obstacles {
            best = best.min(polytope_dist_sq(&wh, center, o));
        }
        for w in &self.walls {
            best = best.min(half_space_dist_sq(&wh, center, w));
        }
        Some(best)
    }
}

/// True iff the χ² ellipse of `b` keeps clear of every obstacle and wall.
pub fn point_collision_free<T: Scalar>(b: &Belief<T>, env: &Environment<T>) -> bool {
    if b.dim() != env.dim() {
        return false;
    }
    let rel = Relevant::gather(env, b.mean(), b.mean(), b.cov());
    if rel.is_empty() {
        return true;
    }
    rel.clearance_sq(b.mean(), b.cov())
        .is_some_and(|m| m >= env.chi2)
}

/// True iff the χ² ellipse stays clear along the straight move from `from` to
/// `to_mean`, with covariance growing as `P + λ‖Δx‖W`.
///
/// The segment is sampled every `clearance_step` workspace units. Between
/// samples the Mahalanobis distance can drop by at most
/// `step / sqrt(λ_min(P[λ]))`; intervals where that bound is inconclusive are
/// bisected, and anything still unresolved counts as a collision.
pub fn segment_collision_free<T: Scalar>(
    from: &Belief<T>,
    to_mean: &Vector<T>,
    w: &ProcessNoise<T>,
    env: &Environment<T>,
) -> bool {
    if from.dim() != env.dim() || to_mean.len() != env.dim() || w.dim() != env.dim() {
        return false;
    }
    let delta = to_mean - from.mean();
    let len = delta.norm();
    if len <= lit(T::TINY) {
        return point_collision_free(from, env);
    }
    let Ok(cov_end) = prior_covariance(from.cov(), len, w) else {
        return false;
    };
    let rel = Relevant::gather(env, &from.mean().inf(to_mean), &from.mean().sup(to_mean), &cov_end);
    if rel.is_empty() {
        return true;
    }
    let (Ok(eig_p), Ok(eig_w)) = (eigenvalues(from.cov()), eigenvalues(w.matrix())) else {
        return false;
    };
    let lam_p = eig_p.min();
    let lam_w = eig_w.min().max(T::zero());
    if !(lam_p > T::zero()) {
        return false;
    }
    let chi = env.chi2.sqrt();
    let checker = SegmentCheck {
        from,
        delta: &delta,
        len,
        w,
        rel: &rel,
        chi,
        chi2: env.chi2,
        lam_p,
        lam_w,
    };
    match checker.value(T::zero()) {
        Some(m) if m >= env.chi2 => {}
        _ => return false,
    }
    let steps = (len / env.clearance_step).ceil().to_usize().unwrap_or(1).max(1);
    let n: T = lit(steps as f64);
    (1..=steps).all(|i| {
        let a = lit::<T>((i - 1) as f64) / n;
        let b = lit::<T>(i as f64) / n;
        checker.interval_free(a, b, 0)
    })
}

struct SegmentCheck<'a, 'e, T: Scalar> {
    from: &'a Belief<T>,
    delta: &'a Vector<T>,
    len: T,
    w: &'a ProcessNoise<T>,
    rel: &'a Relevant<'e, T>,
    chi: T,
    chi2: T,
    lam_p: T,
    lam_w: T,
}

impl<T: Scalar> SegmentCheck<'_, '_, T> {
    fn value(&self, lambda: T) -> Option<T> {
        let center = self.from.mean() + self.delta * lambda;
        let cov = self.from.cov() + self.w.matrix() * (lambda * self.len);
        self.rel.clearance_sq(&center, &cov)
    }

    /// Certifies `[a, b]` using the value at `b`, where the covariance is largest.
    fn interval_free(&self, a: T, b: T, depth: u32) -> bool {
        let Some(m) = self.value(b) else {
            return false;
        };
        if m < self.chi2 {
            return false;
        }
        let lam_min = self.lam_p + self.lam_w * b * self.len;
        let drift = (b - a) * self.len / lam_min.sqrt();
        if m.sqrt() - drift >= self.chi {
            return true;
        }
        if depth >= MAX_REFINE_DEPTH {
            return false;
        }
        let mid = (a + b) * lit::<T>(0.5);
        self.interval_free(a, mid, depth + 1) && self.interval_free(mid, b, depth + 1)
    }
}

/// Whether the χ² ellipsoid of `inner` lies inside the χ² ellipsoid of `outer`.
///
/// Decided exactly with the S-procedure: after mapping `inner` to the unit
/// ball, containment holds iff some `τ ≥ λ_max(M)` makes
/// `[[τI − M, Me], [eᵀM, 1 − τ − eᵀMe]] ⪰ 0`. In the eigenbasis of `M` this is
/// a concave scalar condition in `τ`, maximised by bisection on its slope.
pub fn ellipsoid_contained<T: Scalar>(inner: &Belief<T>, outer: &Belief<T>, chi2: T) -> bool {
    if inner.dim() != outer.dim() || !(chi2 > T::zero()) {
        return false;
    }
    let (Ok(eig_in), Ok(eig_out)) = (sym_eigen(inner.cov()), sym_eigen(outer.cov())) else {
        return false;
    };
    if eig_in.eigenvalues.min() <= T::zero() || eig_out.eigenvalues.min() <= T::zero() {
        return false;
    }
    let in_sqrt = spectral_map(&eig_in, |x| x.sqrt());
    let in_isqrt = spectral_map(&eig_in, |x| T::one() / x.sqrt());
    let out_inv = spectral_map(&eig_out, |x| T::one() / x);
    let m = &in_sqrt * out_inv * &in_sqrt;
    let e = &in_isqrt * (outer.mean() - inner.mean()) / chi2.sqrt();
    let Ok(eig_m) = sym_eigen(&m) else {
        return false;
    };
    let lam = eig_m.eigenvalues;
    let et = eig_m.eigenvectors.transpose() * e;
    let c0 = T::one()
        - lam
            .iter()
            .zip(et.iter())
            .fold(T::zero(), |acc, (l, x)| acc + *l * *x * *x);
    let weights: Vec<T> = lam
        .iter()
        .zip(et.iter())
        .map(|(l, x)| (*l * *x) * (*l * *x))
        .collect();
    let lam_max = lam.max();
    let tol: T = lit(T::TOL);
    let tiny: T = lit(T::TINY);
    let slope = |tau: T| -> T {
        lam.iter().zip(&weights).fold(-T::one(), |acc, (l, w)| {
            let gap = tau - *l;
            if *w <= tiny * tiny {
                acc
            } else {
                acc + *w / (gap * gap)
            }
        })
    };
    let schur = |tau: T| -> T {
        lam.iter().zip(&weights).fold(c0 - tau, |acc, (l, w)| {
            if *w <= tiny * tiny {
                acc
            } else {
                acc - *w / (tau - *l)
            }
        })
    };
    // τ = λ_max itself is admissible only when no weight sits on the top eigenvalue.
    let top_free = lam
        .iter()
        .zip(&weights)
        .all(|(l, w)| *l < lam_max - tol * lam_max.max(T::one()) || *w <= tiny * tiny);
    if top_free && slope(lam_max) <= T::zero() {
        return schur(lam_max) >= -tol;
    }
    let mut lo = lam_max;
    let mut width = lam_max.max(T::one());
    let mut hi = lam_max + width;
    for _ in 0..200 {
        if slope(hi) <= T::zero() {
            break;
        }
        lo = hi;
        width *= lit::<T>(2.0);
        hi = lam_max + width;
    }
    let bisect_tol: T = lit(1e-10);
    for _ in 0..200 {
        if hi - lo <= bisect_tol * hi.max(T::one()) * lit::<T>(1e-2) {
            break;
        }
        let mid = (lo + hi) * lit::<T>(0.5);
        if slope(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = if lo > lam_max { (lo + hi) * lit::<T>(0.5) } else { hi };
    schur(tau) >= -tol
}

/// Random covariance: eigenvalues i.i.d. uniform on `[rho, trace_max/d]`, and
/// a uniformly random orientation.
pub fn sample_covariance<T: Scalar, R: Rng + ?Sized>(
    dim: usize,
    bounds: &CovSampleBounds<T>,
    rng: &mut R,
) -> Matrix<T> {
    let lo = crate::scalar::to_f64(bounds.rho);
    let hi = crate::scalar::to_f64(bounds.eig_max(dim)).max(lo);
    let eig = Vector::from_iterator(dim, (0..dim).map(|_| lit::<T>(lo + (hi - lo) * rng.random::<f64>())));
    let rot = random_rotation::<T, R>(dim, rng);
    crate::linalg::symmetrize(&(&rot * Matrix::from_diagonal(&eig) * rot.transpose()))
}

fn random_rotation<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix<T> {
    match dim {
        1 => Matrix::identity(1, 1),
        2 => {
            let theta = std::f64::consts::PI * rng.random::<f64>();
            let (s, c) = theta.sin_cos();
            Matrix::from_row_slice(2, 2, &[lit(c), lit(-s), lit(s), lit(c)])
        }
        _ => {
            let g = Matrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
            let qr = g.qr();
            let mut q = qr.q();
            let r = qr.r();
            for j in 0..dim {
                if r[(j, j)] < 0.0 {
                    q.column_mut(j).neg_mut();
                }
            }
            q.map(lit::<T>)
        }
    }
}

/// Draws a belief whose χ² ellipse is obstacle free (rejection sampling).
pub fn sample_free_belief<T: Scalar, R: Rng + ?Sized>(
    env: &Environment<T>,
    bounds: &CovSampleBounds<T>,
    rng: &mut R,
) -> Result<Belief<T>> {
    let d = env.dim();
    for _ in 0..MAX_REJECTIONS {
        let mean = Vector::from_iterator(
            d,
            (0..d).map(|i| {
                let lo = crate::scalar::to_f64(env.bounds.min[i]);
                let hi = crate::scalar::to_f64(env.bounds.max[i]);
                lit::<T>(lo + (hi - lo) * rng.random::<f64>())
            }),
        );
        let cov = sample_covariance(d, bounds, rng);
        let b = Belief::from_parts(mean, cov);
        if point_collision_free(&b, env) {
            return Ok(b);
        }
    }
    Err(Error::RejectionBudgetExhausted(MAX_REJECTIONS))
}

/// Planar convex hull (Andrew's monotone chain), counterclockwise, collinear
/// points dropped.
fn convex_hull_2d<T: Scalar>(points: &[Vector<T>]) -> Vec<Vector<T>> {
    let mut pts: Vec<(T, T)> = points.iter().map(|v| (v[0], v[1])).collect();
    pts.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
    });
    pts.dedup();
    if pts.len() < 3 {
        return pts.into_iter().map(|(x, y)| Vector::from_vec(vec![x, y])).collect();
    }
    let cross = |o: (T, T), a: (T, T), b: (T, T)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(T, T)> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    let floor = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= floor && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull.into_iter().map(|(x, y)| Vector::from_vec(vec![x, y])).collect()
}

/// Drops every vertex lying in the hull of the remaining ones.
fn extreme_points<T: Scalar>(points: &[Vector<T>]) -> Vec<Vector<T>> {
    let mut kept: Vec<Vector<T>> = Vec::new();
    for p in points {
        if !kept.iter().any(|k| (k - p).norm() <= lit(T::TINY)) {
            kept.push(p.clone());
        }
    }
    let mut i = 0;
    while i < kept.len() && kept.len() > 1 {
        let others: Vec<Vector<T>> = kept
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| v - &kept[i])
            .collect();
        if hull_dist_sq(&others) <= lit(T::TOL * T::TOL) {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    kept
}

/// Squared distance from the origin to the convex hull of `points` (GJK with
/// an exhaustive sub-simplex solver, exact for small dimensions).
pub(crate) fn hull_dist_sq<T: Scalar>(points: &[Vector<T>]) -> T {
    let d = points[0].len();
    let start = points
        .iter()
        .min_by(|a, b| a.norm_squared().partial_cmp(&b.norm_squared()).unwrap_or(std::cmp::Ordering::Equal))
        .expect("nonempty")
        .clone();
    let mut simplex = vec![start.clone()];
    let mut v = start;
    let eps: T = lit(T::TINY);
    for _ in 0..64 {
        let vv = v.norm_squared();
        if vv <= eps * eps {
            return T::zero();
        }
        let w = points
            .iter()
            .min_by(|a, b| a.dot(&v).partial_cmp(&b.dot(&v)).unwrap_or(std::cmp::Ordering::Equal))
            .expect("nonempty");
        if vv - v.dot(w) <= lit::<T>(T::TINY) * vv.max(T::one()) {
            return vv;
        }
        if simplex.iter().any(|s| (s - w).norm_squared() <= eps * eps) {
            return vv;
        }
        simplex.push(w.clone());
        let (closest, support) = closest_on_simplex(&simplex);
        simplex = support;
        v = closest;
        if simplex.len() > d {
            return T::zero();
        }
    }
    v.norm_squared()
}

/// Closest point to the origin on the convex hull of at most d+1 points, and
/// the minimal subset supporting it.
fn closest_on_simplex<T: Scalar>(simplex: &[Vector<T>]) -> (Vector<T>, Vec<Vector<T>>) {
    let n = simplex.len();
    let mut best: Option<(T, Vector<T>, Vec<Vector<T>>)> = None;
    for mask in 1usize..(1 << n) {
        let subset: Vec<&Vector<T>> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| &simplex[i]).collect();
        let Some(weights) = affine_projection_weights(&subset) else {
            continue;
        };
        if weights.iter().any(|w| *w < -lit::<T>(T::TINY)) {
            continue;
        }
        let point = subset
            .iter()
            .zip(&weights)
            .fold(Vector::zeros(subset[0].len()), |acc, (p, w)| acc + *p * *w);
        let dist = point.norm_squared();
        let better = match &best {
            None => true,
            Some((bd, _, bs)) => {
                dist < *bd - lit::<T>(T::TINY) * bd.max(T::one()) || (dist <= *bd && subset.len() < bs.len())
            }
        };
        if better {
            best = Some((dist, point, subset.into_iter().cloned().collect()));
        }
    }
    let (_, point, support) = best.expect("singletons are always feasible");
    (point, support)
}

/// Barycentric weights of the origin's projection onto the affine hull of `pts`.
fn affine_projection_weights<T: Scalar>(pts: &[&Vector<T>]) -> Option<Vec<T>> {
    let k = pts.len();
    if k == 1 {
        return Some(vec![T::one()]);
    }
    // minimise ‖p0 + Σ μ_i (p_i − p0)‖² over μ
    let p0 = pts[0];
    let dirs: Vec<Vector<T>> = pts[1..].iter().map(|p| *p - p0).collect();
    let g = Matrix::from_fn(k - 1, k - 1, |i, j| dirs[i].dot(&dirs[j]));
    let rhs = Vector::from_iterator(k - 1, dirs.iter().map(|d| -d.dot(p0)));
    let mu = g.lu().solve(&rhs)?;
    if mu.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let mut w = Vec::with_capacity(k);
    w.push(T::one() - mu.sum());
    w.extend(mu.iter().copied());
    Some(w)
}
