use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::belief::{is_lossless, lossless_step, steering_cost, Belief};
use crate::error::{Error, Result};
use crate::geometry::{point_collision_free, sample_free_belief, segment_collision_free, Environment};
use crate::scalar::{lit, Scalar};
use crate::sensing::sensor_admits;

use super::bnb::{branch_and_bound, start_cost_to_go, update_descendants};
use super::config::PlannerConfig;
use super::metric::{connection_radius, nearest, neighbors, scale_checked};
use super::tree::{BeliefTree, Orientation};

/// Which RRT* variant to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Lossless-and-collision-free edges only, additive rewiring.
    Basic,
    /// Collision-only edges made lossless by projection, with branch and bound.
    Improved,
    /// Tree rooted at the goal storing cost-to-go.
    Backward,
}

impl Algorithm {
    pub fn orientation(self) -> Orientation {
        match self {
            Algorithm::Backward => Orientation::Backward,
            _ => Orientation::Forward,
        }
    }
}

/// An RRT* run that can be advanced one iteration at a time.
pub struct Planner<'a, T: Scalar> {
    cfg: &'a PlannerConfig<T>,
    env: &'a Environment<T>,
    algorithm: Algorithm,
    tree: BeliefTree<T>,
    rng: ChaCha8Rng,
    iteration: usize,
}

impl<'a, T: Scalar> Planner<'a, T> {
    pub fn new(cfg: &'a PlannerConfig<T>, env: &'a Environment<T>, algorithm: Algorithm) -> Result<Self> {
        if cfg.process_noise().dim() != env.dim() {
            return Err(Error::DimensionMismatch {
                expected: env.dim(),
                got: cfg.process_noise().dim(),
            });
        }
        let root = match algorithm {
            Algorithm::Backward => env.goal_belief(),
            _ => env.start().clone(),
        };
        if !point_collision_free(&root, env) {
            return Err(Error::InvalidArgument(match algorithm {
                Algorithm::Backward => "goal belief is not collision free".into(),
                _ => "start belief is not collision free".into(),
            }));
        }
        Ok(Self {
            cfg,
            env,
            algorithm,
            tree: BeliefTree::new(root, algorithm.orientation()),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed()),
            iteration: 0,
        })
    }

    pub fn tree(&self) -> &BeliefTree<T> {
        &self.tree
    }

    pub fn into_tree(self) -> BeliefTree<T> {
        self.tree
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Whether the node budget has been spent.
    pub fn finished(&self) -> bool {
        self.iteration + 1 >= self.cfg.node_budget()
    }

    /// Best cost found so far: cheapest goal node (forward) or the start's
    /// cost-to-go (backward).
    pub fn best_cost(&self) -> Option<T> {
        match self.algorithm {
            Algorithm::Backward => start_cost_to_go(&self.tree, self.env, self.cfg).map(|(c, _)| c),
            _ => best_goal_node(&self.tree, self.env).map(|i| self.tree.cost(i)),
        }
    }

    /// Runs until the node budget is spent.
    pub fn run(mut self) -> Result<BeliefTree<T>> {
        while !self.finished() {
            self.step()?;
        }
        Ok(self.tree)
    }

    /// One sampling iteration. Returns whether a node was added.
    pub fn step(&mut self) -> Result<bool> {
        self.iteration += 1;
        let added = self.extend()?;
        if self.algorithm == Algorithm::Improved && self.iteration.is_multiple_of(self.cfg.bnb_period()) {
            branch_and_bound(&mut self.tree, self.env, self.cfg.alpha(), self.cfg.process_noise());
        }
        Ok(added)
    }

    fn extend(&mut self) -> Result<bool> {
        let sample = sample_free_belief(self.env, self.cfg.cov_bounds(), &mut self.rng)?;
        let near = nearest(&self.tree, &sample)?;
        let radius = connection_radius(self.tree.len(), self.cfg);
        let new = match scale_checked(self.tree.node(near), &sample, radius, self.env) {
            Ok(b) => b,
            Err(Error::ScaledCollision | Error::NotPositiveDefinite(_) | Error::NotSymmetric(_)) => {
                return Ok(false)
            }
            Err(e) => return Err(e),
        };
        let backward = self.algorithm == Algorithm::Backward;
        let near_ok = if backward {
            self.feasible(&new, self.tree.node(near))
        } else {
            self.feasible(self.tree.node(near), &new)
        };
        if !near_ok {
            return Ok(false);
        }
        let mut nbrs = neighbors(&self.tree, &new, radius);
        if !nbrs.contains(&near) {
            nbrs.push(near);
            nbrs.sort_unstable();
        }

        // parent choice: cheapest feasible neighbour, ties to the lowest index
        let mut candidates: Vec<(T, usize)> = nbrs
            .iter()
            .filter_map(|&j| {
                let d = if backward {
                    self.cost(&new, self.tree.node(j))
                } else {
                    self.cost(self.tree.node(j), &new)
                }?;
                Some((self.tree.cost(j) + d, j))
            })
            .collect();
        candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
        let parent = candidates.iter().find(|&&(_, j)| {
            j == near
                || if backward {
                    self.feasible(&new, self.tree.node(j))
                } else {
                    self.feasible(self.tree.node(j), &new)
                }
        });
        let Some(&(mut new_cost, parent)) = parent else {
            return Ok(false);
        };

        let new = if self.algorithm == Algorithm::Improved {
            let projected = lossless_step(self.tree.node(parent), &new, self.cfg.process_noise())?;
            if let Some(d) = self.cost(self.tree.node(parent), &projected) {
                new_cost = self.tree.cost(parent) + d;
            }
            projected
        } else {
            new
        };
        let idx = self.tree.push(new, parent, new_cost);

        for &j in nbrs.iter().filter(|&&j| j != parent) {
            self.try_rewire(idx, j)?;
        }
        Ok(true)
    }

    fn try_rewire(&mut self, new: usize, j: usize) -> Result<()> {
        if j == self.tree.root() || self.tree.is_ancestor(j, new) {
            return Ok(());
        }
        let backward = self.algorithm == Algorithm::Backward;
        let (from, to) = if backward { (j, new) } else { (new, j) };
        let Some(d) = self.cost(self.tree.node(from), self.tree.node(to)) else {
            return Ok(());
        };
        let through = self.tree.cost(new) + d;
        if !(through < self.tree.cost(j)) || !self.feasible(self.tree.node(from), self.tree.node(to)) {
            return Ok(());
        }
        match self.algorithm {
            Algorithm::Improved => {
                let w = self.cfg.process_noise();
                let projected = lossless_step(self.tree.node(new), self.tree.node(j), w)?;
                let d = self.cost(self.tree.node(new), &projected).unwrap_or(d);
                self.tree.set_node(j, projected);
                self.tree.set_parent(j, new);
                self.tree.set_cost(j, self.tree.cost(new) + d);
                update_descendants(&mut self.tree, j, w, self.cfg.alpha())?;
            }
            Algorithm::Basic | Algorithm::Backward => {
                let delta = through - self.tree.cost(j);
                self.tree.set_parent(j, new);
                self.tree.shift_subtree_cost(j, delta);
            }
        }
        Ok(())
    }

    fn cost(&self, from: &Belief<T>, to: &Belief<T>) -> Option<T> {
        steering_cost(from, to, self.cfg.alpha(), self.cfg.process_noise())
            .ok()
            .map(|c| c.total)
    }

    fn feasible(&self, from: &Belief<T>, to: &Belief<T>) -> bool {
        edge_feasible(from, to, self.cfg, self.env, self.algorithm)
    }
}

/// FeasCheck for the basic and backward planners (with the sensor constraint
/// when a map is configured); collision only for the improved planner.
pub fn edge_feasible<T: Scalar>(
    from: &Belief<T>,
    to: &Belief<T>,
    cfg: &PlannerConfig<T>,
    env: &Environment<T>,
    algorithm: Algorithm,
) -> bool {
    let w = cfg.process_noise();
    if algorithm != Algorithm::Improved {
        if !is_lossless(from, to, w, lit(T::TOL)).unwrap_or(false) {
            return false;
        }
        if let Some(map) = cfg.sensor_map() {
            if !sensor_admits(from, to, map, w) {
                return false;
            }
        }
    }
    segment_collision_free(from, to.mean(), w, env)
}

/// Cheapest node inside the goal region, ties to the lowest index.
pub fn best_goal_node<T: Scalar>(tree: &BeliefTree<T>, env: &Environment<T>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for i in 0..tree.len() {
        if best.is_some_and(|b| tree.cost(i) >= tree.cost(b)) {
            continue;
        }
        if env.in_goal(tree.node(i)) {
            best = Some(i);
        }
    }
    best
}

/// Basic planner: lossless, collision-free RRT*.
pub fn plan_basic<T: Scalar>(cfg: &PlannerConfig<T>, env: &Environment<T>) -> Result<BeliefTree<T>> {
    Planner::new(cfg, env, Algorithm::Basic)?.run()
}

/// RRT* with lossless modification, descendant re-projection and branch and bound.
pub fn plan_improved<T: Scalar>(cfg: &PlannerConfig<T>, env: &Environment<T>) -> Result<BeliefTree<T>> {
    Planner::new(cfg, env, Algorithm::Improved)?.run()
}

/// Goal-rooted RRT* whose node costs are costs-to-go.
pub fn plan_backward<T: Scalar>(cfg: &PlannerConfig<T>, env: &Environment<T>) -> Result<BeliefTree<T>> {
    Planner::new(cfg, env, Algorithm::Backward)?.run()
}

/// Runs the chosen variant.
pub fn plan<T: Scalar>(cfg: &PlannerConfig<T>, env: &Environment<T>, algorithm: Algorithm) -> Result<BeliefTree<T>> {
    Planner::new(cfg, env, algorithm)?.run()
}
