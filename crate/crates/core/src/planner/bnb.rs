use std::collections::VecDeque;

use crate::belief::{lossless_step, steering_cost, Belief, BeliefChain, ProcessNoise};
use crate::error::{Error, Result};
use crate::geometry::Environment;
use crate::scalar::Scalar;

use super::config::PlannerConfig;
use super::rrt::{best_goal_node, edge_feasible, Algorithm};
use super::tree::{BeliefTree, Orientation};

/// Re-projects every descendant of `rewired`, level by level, so each edge is
/// lossless again, and recomputes their costs from the parents.
pub fn update_descendants<T: Scalar>(
    tree: &mut BeliefTree<T>,
    rewired: usize,
    w: &ProcessNoise<T>,
    alpha: T,
) -> Result<()> {
    let mut queue: VecDeque<usize> = tree.children(rewired).iter().copied().collect();
    while let Some(j) = queue.pop_front() {
        let p = tree.parent(j).expect("descendant has a parent");
        let projected = lossless_step(tree.node(p), tree.node(j), w)?;
        let d = steering_cost(tree.node(p), &projected, alpha, w)?.total;
        tree.set_node(j, projected);
        tree.set_cost(j, tree.cost(p) + d);
        queue.extend(tree.children(j).iter().copied());
    }
    Ok(())
}

/// Obstacle-ignoring lower bound on the cost from `b` into the goal region:
/// the cost to the nearest box point carrying the goal covariance cap.
pub fn goal_lower_bound<T: Scalar>(b: &Belief<T>, env: &Environment<T>, alpha: T, w: &ProcessNoise<T>) -> Option<T> {
    let rep = Belief::from_parts(env.goal_box().project(b.mean()), env.goal_cov().clone());
    steering_cost(b, &rep, alpha, w).ok().map(|c| c.total)
}

/// Deletes every node (with its subtree) whose cost plus goal lower bound
/// reaches the best goal cost. The path to the best goal node is kept.
/// Returns the old → new index map.
pub fn branch_and_bound<T: Scalar>(
    tree: &mut BeliefTree<T>,
    env: &Environment<T>,
    alpha: T,
    w: &ProcessNoise<T>,
) -> Vec<Option<usize>> {
    let identity = (0..tree.len()).map(Some).collect();
    let Some(best) = best_goal_node(tree, env) else {
        return identity;
    };
    let best_cost = tree.cost(best);
    let mut protected = vec![false; tree.len()];
    for i in tree.path_from_root(best) {
        protected[i] = true;
    }
    let mut doomed = vec![false; tree.len()];
    for i in tree.subtree(tree.root()) {
        if protected[i] {
            continue;
        }
        let inherited = tree.parent(i).is_some_and(|p| doomed[p]);
        doomed[i] = inherited
            || goal_lower_bound(tree.node(i), env, alpha, w).is_some_and(|lb| tree.cost(i) + lb >= best_cost);
    }
    if !doomed.iter().any(|&d| d) {
        return identity;
    }
    tree.remove(&doomed)
}

/// Cheapest feasible connection from the start into a backward tree:
/// `min D(start, n) + cost(n)`. Returns the cost and the node.
pub fn start_cost_to_go<T: Scalar>(
    tree: &BeliefTree<T>,
    env: &Environment<T>,
    cfg: &PlannerConfig<T>,
) -> Option<(T, usize)> {
    let start = env.start();
    let mut candidates: Vec<(T, usize)> = (0..tree.len())
        .filter_map(|i| {
            steering_cost(start, tree.node(i), cfg.alpha(), cfg.process_noise())
                .ok()
                .map(|c| (c.total + tree.cost(i), i))
        })
        .collect();
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    candidates
        .into_iter()
        .find(|&(_, i)| edge_feasible(start, tree.node(i), cfg, env, Algorithm::Backward))
}

/// The cheapest start-to-goal chain stored in `tree`.
pub fn extract_path<T: Scalar>(
    tree: &BeliefTree<T>,
    env: &Environment<T>,
    cfg: &PlannerConfig<T>,
) -> Result<BeliefChain<T>> {
    match tree.orientation() {
        Orientation::Forward => {
            let goal = best_goal_node(tree, env).ok_or(Error::GoalNotReached)?;
            let nodes = tree
                .path_from_root(goal)
                .into_iter()
                .map(|i| tree.node(i).clone())
                .collect();
            BeliefChain::new(nodes)
        }
        Orientation::Backward => {
            let (_, first) = start_cost_to_go(tree, env, cfg).ok_or(Error::GoalNotReached)?;
            let mut nodes = vec![env.start().clone()];
            let mut cur = Some(first);
            while let Some(i) = cur {
                nodes.push(tree.node(i).clone());
                cur = tree.parent(i);
            }
            BeliefChain::new(nodes)
        }
    }
}
