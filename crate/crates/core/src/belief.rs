//! Gaussian beliefs and the information-geometric steering cost between them.
//!
//! The directed cost from `b1 = (x1, P1)` to `b2 = (x2, P2)` is
//!
//! ```text
//! D(b1, b2) = ‖x2 − x1‖ + α · ½ (log det P̂ − log det Q*)
//! ```
//!
//! where `P̂ = P1 + ‖x2 − x1‖·W` is the covariance after sensing-free travel and
//! `Q*` is the largest-volume covariance below both `P̂` and `P2`. `Q*` has a
//! closed form through the eigenvalues of `P2^{-1/2} P̂ P2^{-1/2}`, so no
//! iterative solver runs in the planner's inner loop.

use crate::error::{Error, Result};
use crate::linalg::{
    check_pd, check_psd, min_eigenvalue, spectral_map, spectral_norm_sym, sym_eigen, symmetrize,
    Matrix, Vector,
};
use crate::scalar::{lit, Scalar, Tolerances};

/// A Gaussian belief: mean position and positive definite covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct Belief<T: Scalar> {
    mean: Vector<T>,
    cov: Matrix<T>,
}

impl<T: Scalar> Belief<T> {
    /// Builds a belief after checking dimensions, symmetry and positive definiteness.
    pub fn new(mean: Vector<T>, cov: Matrix<T>) -> Result<Self> {
        if cov.nrows() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                got: cov.nrows(),
            });
        }
        let cov = check_pd(&cov, Tolerances::<T>::default().sym)?;
        Ok(Self { mean, cov })
    }

    /// Builds a belief whose covariance is known to be PD by construction.
    pub(crate) fn from_parts(mean: Vector<T>, cov: Matrix<T>) -> Self {
        debug_assert_eq!(mean.len(), cov.nrows());
        Self {
            mean,
            cov: symmetrize(&cov),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &Vector<T> {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix<T> {
        &self.cov
    }

    pub fn into_parts(self) -> (Vector<T>, Matrix<T>) {
        (self.mean, self.cov)
    }

    /// Same mean, different covariance (validated).
    pub fn with_cov(&self, cov: Matrix<T>) -> Result<Self> {
        Self::new(self.mean.clone(), cov)
    }
}

/// Process noise intensity `W`: covariance added per unit of travel.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessNoise<T: Scalar>(Matrix<T>);

impl<T: Scalar> ProcessNoise<T> {
    pub fn new(w: Matrix<T>) -> Result<Self> {
        let tol = Tolerances::<T>::default();
        Ok(Self(check_psd(&w, tol.sym, tol.psd)?))
    }

    /// `scale · I` in dimension `dim`.
    pub fn isotropic(dim: usize, scale: T) -> Result<Self> {
        Self::new(Matrix::identity(dim, dim) * scale)
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Largest singular value `σ̄(W)`.
    pub fn spectral_norm(&self) -> Result<T> {
        spectral_norm_sym(&self.0)
    }
}

/// An ordered sequence of beliefs sharing one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct BeliefChain<T: Scalar> {
    nodes: Vec<Belief<T>>,
}

impl<T: Scalar> BeliefChain<T> {
    pub fn new(nodes: Vec<Belief<T>>) -> Result<Self> {
        let first = nodes.first().ok_or(Error::Empty)?;
        let d = first.dim();
        if let Some(bad) = nodes.iter().find(|b| b.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.dim(),
            });
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[Belief<T>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.nodes[0].dim()
    }

    pub fn first(&self) -> &Belief<T> {
        &self.nodes[0]
    }

    pub fn last(&self) -> &Belief<T> {
        &self.nodes[self.nodes.len() - 1]
    }

    pub fn into_nodes(self) -> Vec<Belief<T>> {
        self.nodes
    }
}

/// Travel, information and weighted total cost of a transition or chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostBreakdown<T> {
    pub travel: T,
    pub info: T,
    pub total: T,
}

impl<T: Scalar> CostBreakdown<T> {
    pub fn zero() -> Self {
        Self {
            travel: T::zero(),
            info: T::zero(),
            total: T::zero(),
        }
    }
}

impl<T: Scalar> std::ops::Add for CostBreakdown<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            travel: self.travel + rhs.travel,
            info: self.info + rhs.info,
            total: self.total + rhs.total,
        }
    }
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a,
            got: b,
        })
    }
}

/// Euclidean distance between the two means.
pub fn travel_cost<T: Scalar>(from: &Belief<T>, to: &Belief<T>) -> Result<T> {
    same_dim(from.dim(), to.dim())?;
    Ok((to.mean() - from.mean()).norm())
}

/// Covariance after travelling `dist` without sensing: `P + dist·W`.
pub fn prior_covariance<T: Scalar>(
    p_from: &Matrix<T>,
    dist: T,
    w: &ProcessNoise<T>,
) -> Result<Matrix<T>> {
    same_dim(p_from.nrows(), w.dim())?;
    if dist < T::zero() {
        return Err(Error::NegativeDistance(crate::scalar::to_f64(dist)));
    }
    if dist <= lit(T::TINY) {
        return Ok(p_from.clone());
    }
    Ok(symmetrize(&(p_from + w.matrix() * dist)))
}

/// Whitened problem data shared by [`lossless_project`] and [`info_cost`].
struct Whitened<T: Scalar> {
    post_sqrt: Matrix<T>,
    u: Matrix<T>,
    sigma: Vector<T>,
}

fn whiten<T: Scalar>(p_prior: &Matrix<T>, p_post: &Matrix<T>) -> Result<Whitened<T>> {
    same_dim(p_prior.nrows(), p_post.nrows())?;
    let post = sym_eigen(p_post)?;
    let lo = post.eigenvalues.min();
    if lo <= T::zero() {
        return Err(Error::NotPositiveDefinite(crate::scalar::to_f64(lo)));
    }
    let post_sqrt = spectral_map(&post, |x| x.sqrt());
    let post_isqrt = spectral_map(&post, |x| T::one() / x.sqrt());
    let inner = sym_eigen(&(&post_isqrt * p_prior * &post_isqrt))?;
    let lo = inner.eigenvalues.min();
    if lo <= T::zero() {
        return Err(Error::NotPositiveDefinite(crate::scalar::to_f64(lo)));
    }
    Ok(Whitened {
        post_sqrt,
        u: inner.eigenvectors,
        sigma: inner.eigenvalues,
    })
}

/// The max-det covariance `Q*` below both `p_prior` and `p_post`.
///
/// With `U Σ Uᵀ = P_post^{-1/2} P_prior P_post^{-1/2}`, the optimum is
/// `Q* = P_post^{1/2} U diag(min(1, σ_i)) Uᵀ P_post^{1/2}`.
pub fn lossless_project<T: Scalar>(p_prior: &Matrix<T>, p_post: &Matrix<T>) -> Result<Matrix<T>> {
    let wh = whiten(p_prior, p_post)?;
    let capped = wh.sigma.map(|s| s.min(T::one()));
    let core = &wh.u * Matrix::from_diagonal(&capped) * wh.u.transpose();
    Ok(symmetrize(&(&wh.post_sqrt * core * &wh.post_sqrt)))
}

/// Minimum entropy reduction needed to go from `p_prior` to (below) `p_post`:
/// `½ (log det P_prior − log det Q*) = ½ Σ max(0, ln σ_i)`.
pub fn info_cost<T: Scalar>(p_prior: &Matrix<T>, p_post: &Matrix<T>) -> Result<T> {
    if p_prior == p_post {
        same_dim(p_prior.nrows(), p_post.nrows())?;
        return Ok(T::zero());
    }
    let wh = whiten(p_prior, p_post)?;
    let half: T = lit(0.5);
    Ok(wh
        .sigma
        .iter()
        .fold(T::zero(), |acc, &s| acc + s.ln().max(T::zero()))
        * half)
}

/// Total cost `D(from, to) = travel + α·info`.
pub fn steering_cost<T: Scalar>(
    from: &Belief<T>,
    to: &Belief<T>,
    alpha: T,
    w: &ProcessNoise<T>,
) -> Result<CostBreakdown<T>> {
    if alpha < T::zero() {
        return Err(Error::InvalidArgument("alpha must be nonnegative".into()));
    }
    let travel = travel_cost(from, to)?;
    let prior = prior_covariance(from.cov(), travel, w)?;
    let info = info_cost(&prior, to.cov())?;
    Ok(CostBreakdown {
        travel,
        info,
        total: travel + alpha * info,
    })
}

/// Whether `to.cov ⪯ from.cov + ‖Δx‖·W + tol·I`.
pub fn is_lossless<T: Scalar>(
    from: &Belief<T>,
    to: &Belief<T>,
    w: &ProcessNoise<T>,
    tol: T,
) -> Result<bool> {
    let travel = travel_cost(from, to)?;
    let prior = prior_covariance(from.cov(), travel, w)?;
    Ok(min_eigenvalue(&(prior - to.cov()))? >= -tol)
}

/// Replaces `to`'s covariance with the lossless projection from `from`.
pub fn lossless_step<T: Scalar>(
    from: &Belief<T>,
    to: &Belief<T>,
    w: &ProcessNoise<T>,
) -> Result<Belief<T>> {
    let travel = travel_cost(from, to)?;
    let prior = prior_covariance(from.cov(), travel, w)?;
    let q = lossless_project(&prior, to.cov())?;
    Ok(Belief::from_parts(to.mean().clone(), q))
}

/// Sum of [`steering_cost`] over consecutive pairs.
pub fn chain_cost<T: Scalar>(
    chain: &BeliefChain<T>,
    alpha: T,
    w: &ProcessNoise<T>,
) -> Result<CostBreakdown<T>> {
    chain
        .nodes()
        .windows(2)
        .try_fold(CostBreakdown::zero(), |acc, pair| {
            Ok(acc + steering_cost(&pair[0], &pair[1], alpha, w)?)
        })
}

/// Shrinks each covariance in turn so every transition becomes lossless.
///
/// Means are untouched, covariances only decrease, and the chain cost never
/// increases.
pub fn chain_lossless_modify<T: Scalar>(
    chain: &BeliefChain<T>,
    w: &ProcessNoise<T>,
) -> Result<BeliefChain<T>> {
    if chain.len() < 2 {
        return Err(Error::InvalidArgument(
            "lossless modification needs at least two nodes".into(),
        ));
    }
    let mut out = Vec::with_capacity(chain.len());
    out.push(chain.first().clone());
    for node in &chain.nodes()[1..] {
        let prev = out.last().expect("nonempty");
        let next = lossless_step(prev, node, w)?;
        out.push(next);
    }
    BeliefChain::new(out)
}

/// Variation of the difference chain `A − B` on its index partition:
///
/// `‖Δx₀‖σ̄(W) + σ̄(ΔP₀) + Σ_k [‖Δx_{k+1} − Δx_k‖σ̄(W) + σ̄(ΔP_{k+1} − ΔP_k)]`.
pub fn chain_total_variation<T: Scalar>(
    a: &BeliefChain<T>,
    b: &BeliefChain<T>,
    w: &ProcessNoise<T>,
) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    same_dim(a.dim(), b.dim())?;
    same_dim(a.dim(), w.dim())?;
    let w_norm = w.spectral_norm()?;
    let diffs: Vec<(Vector<T>, Matrix<T>)> = a
        .nodes()
        .iter()
        .zip(b.nodes())
        .map(|(p, q)| (p.mean() - q.mean(), p.cov() - q.cov()))
        .collect();
    let (dx0, dp0) = &diffs[0];
    let mut total = dx0.norm() * w_norm + spectral_norm_sym(dp0)?;
    for pair in diffs.windows(2) {
        let step_x = &pair[1].0 - &pair[0].0;
        let step_p = &pair[1].1 - &pair[0].1;
        total += step_x.norm() * w_norm + spectral_norm_sym(&step_p)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn b1(x: f64, p: f64) -> Belief<f64> {
        Belief::new(dvector![x], dmatrix![p]).unwrap()
    }

    fn b2(x: [f64; 2], p: Matrix<f64>) -> Belief<f64> {
        Belief::new(dvector![x[0], x[1]], p).unwrap()
    }

    #[test]
    fn belief_validation() {
        assert!(Belief::new(dvector![0.0, 0.0], dmatrix![1.0]).is_err());
        assert!(Belief::new(dvector![0.0], dmatrix![0.0]).is_err());
        assert!(Belief::new(dvector![0.0, 0.0], dmatrix![1.0, 0.5; 0.4, 1.0]).is_err());
        assert!(ProcessNoise::new(dmatrix![0.0_f64]).is_ok());
        assert!(ProcessNoise::new(dmatrix![-1.0_f64]).is_err());
        assert!(BeliefChain::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn travel_cost_examples() {
        let i = Matrix::<f64>::identity(2, 2);
        assert_eq!(travel_cost(&b2([0.0, 0.0], i.clone()), &b2([0.0, 0.0], i.clone())).unwrap(), 0.0);
        assert_eq!(travel_cost(&b2([0.0, 0.0], i.clone()), &b2([3.0, 4.0], i.clone())).unwrap(), 5.0);
        assert!(travel_cost(&b1(0.0, 1.0), &b2([0.0, 0.0], i)).is_err());
    }

    #[test]
    fn prior_covariance_examples() {
        let w1 = ProcessNoise::new(dmatrix![1.0]).unwrap();
        let i2 = Matrix::<f64>::identity(2, 2);
        let w2 = ProcessNoise::isotropic(2, 1.0).unwrap();
        assert_eq!(prior_covariance(&i2, 0.0, &w2).unwrap(), i2);
        assert_eq!(prior_covariance(&dmatrix![1.0f64], 3.0, &w1).unwrap()[(0, 0)], 4.0);
        let w = ProcessNoise::isotropic(2, 1e-3).unwrap();
        let p = prior_covariance(&dmatrix![1.0f64, 0.0; 0.0, 2.0], 10.0, &w).unwrap();
        assert!((p[(0, 0)] - 1.01).abs() < 1e-12 && (p[(1, 1)] - 2.01).abs() < 1e-12);
        assert!(matches!(
            prior_covariance(&dmatrix![1.0], -1.0, &w1),
            Err(Error::NegativeDistance(_))
        ));
    }

    #[test]
    fn projection_scalar_cases() {
        let q = lossless_project(&dmatrix![1.0f64], &dmatrix![4.0]).unwrap();
        assert!((q[(0, 0)] - 1.0).abs() < 1e-12);
        let q = lossless_project(&dmatrix![4.0f64], &dmatrix![1.0]).unwrap();
        assert!((q[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(lossless_project(&dmatrix![4.0], &dmatrix![-1.0]).is_err());
        assert!(lossless_project(&dmatrix![0.0], &dmatrix![1.0]).is_err());
    }

    #[test]
    fn info_cost_examples() {
        let p = dmatrix![2.0f64, 0.3; 0.3, 1.0];
        assert!(info_cost(&p, &p).unwrap().abs() < 1e-12);
        assert!((info_cost(&dmatrix![4.0], &dmatrix![1.0]).unwrap() - 0.5 * 4f64.ln()).abs() < 1e-12);
        assert_eq!(info_cost(&dmatrix![1.0], &dmatrix![4.0]).unwrap(), 0.0);
    }

    #[test]
    fn steering_cost_examples() {
        let w = ProcessNoise::new(dmatrix![1.0]).unwrap();
        let b = b1(0.7, 0.3);
        assert_eq!(steering_cost(&b, &b, 2.0, &w).unwrap().total, 0.0);
        let c = steering_cost(&b1(0.0, 1.0), &b1(3.0, 1.0), 2.0, &w).unwrap();
        assert!((c.travel - 3.0).abs() < 1e-12);
        assert!((c.info - 0.5 * 4f64.ln()).abs() < 1e-12);
        assert!((c.total - 4.386294361119891).abs() < 1e-9);
        let c = steering_cost(&b1(0.0, 1.0), &b1(1.0, 5.0), 3.0, &w).unwrap();
        assert_eq!(c.total, c.travel);
        assert!(steering_cost(&b, &b, -1.0, &w).is_err());
    }

    #[test]
    fn asymmetry_witness() {
        let w = ProcessNoise::isotropic(2, 1e-3).unwrap();
        let small = b2([1.0, 1.0], dmatrix![1.0, 0.0; 0.0, 1.0]);
        let big = b2([1.0, 1.0], dmatrix![2.0, 0.0; 0.0, 3.0]);
        assert_eq!(steering_cost(&small, &big, 1.0, &w).unwrap().total, 0.0);
        assert!(steering_cost(&big, &small, 1.0, &w).unwrap().total > 0.1);
    }

    #[test]
    fn lossless_examples() {
        let w = ProcessNoise::new(dmatrix![1.0]).unwrap();
        let from = b1(0.0, 1.0);
        assert!(is_lossless(&from, &b1(1.0, 2.0), &w, 1e-9).unwrap());
        assert!(!is_lossless(&from, &b1(1.0, 3.0), &w, 1e-9).unwrap());
        let projected = lossless_step(&from, &b1(1.0, 7.0), &w).unwrap();
        assert!(is_lossless(&from, &projected, &w, 1e-9).unwrap());
    }

    #[test]
    fn chain_cost_examples() {
        let w = ProcessNoise::new(dmatrix![1.0]).unwrap();
        let single = BeliefChain::new(vec![b1(0.0, 1.0)]).unwrap();
        assert_eq!(chain_cost(&single, 1.0, &w).unwrap(), CostBreakdown::zero());
        let pair = BeliefChain::new(vec![b1(0.0, 1.0), b1(2.0, 0.5)]).unwrap();
        assert_eq!(
            chain_cost(&pair, 0.4, &w).unwrap(),
            steering_cost(&pair.nodes()[0], &pair.nodes()[1], 0.4, &w).unwrap()
        );
    }

    #[test]
    fn chain_modify_examples() {
        let w = ProcessNoise::new(dmatrix![1.0]).unwrap();
        let chain = BeliefChain::new(vec![b1(0.0, 1.0), b1(1.0, 5.0)]).unwrap();
        let out = chain_lossless_modify(&chain, &w).unwrap();
        assert!((out.nodes()[1].cov()[(0, 0)] - 2.0).abs() < 1e-12);

        let lossless = BeliefChain::new(vec![b1(0.0, 1.0), b1(1.0, 1.5), b1(1.5, 0.2)]).unwrap();
        let out = chain_lossless_modify(&lossless, &w).unwrap();
        for (a, b) in out.nodes().iter().zip(lossless.nodes()) {
            assert!((a.cov() - b.cov()).amax() < 1e-9);
        }
        let single = BeliefChain::new(vec![b1(0.0, 1.0)]).unwrap();
        assert!(chain_lossless_modify(&single, &w).is_err());
    }

    #[test]
    fn total_variation_examples() {
        let w = ProcessNoise::isotropic(2, 1.0).unwrap();
        let i = Matrix::<f64>::identity(2, 2);
        let a = BeliefChain::new(vec![b2([0.0, 0.0], i.clone()), b2([1.0, 0.0], i.clone())]).unwrap();
        assert_eq!(chain_total_variation(&a, &a, &w).unwrap(), 0.0);
        let p = BeliefChain::new(vec![b2([0.3, 0.4], i.clone())]).unwrap();
        let q = BeliefChain::new(vec![b2([0.0, 0.0], i)]).unwrap();
        assert!((chain_total_variation(&p, &q, &w).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            chain_total_variation(&a, &p, &w),
            Err(Error::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn works_in_single_precision() {
        let w = ProcessNoise::<f32>::new(dmatrix![1.0]).unwrap();
        let from = Belief::<f32>::new(dvector![0.0], dmatrix![1.0]).unwrap();
        let to = Belief::<f32>::new(dvector![3.0], dmatrix![1.0]).unwrap();
        let c = steering_cost(&from, &to, 2.0, &w).unwrap();
        assert!((c.total - 4.386294).abs() < 1e-4);
    }
}
