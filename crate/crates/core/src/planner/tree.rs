use std::collections::VecDeque;

use crate::belief::{steering_cost, Belief, ProcessNoise};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Edge direction of a [`BeliefTree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Edges run parent → child and costs are costs-to-come from the root.
    Forward,
    /// Edges run child → parent and costs are costs-to-go to the root.
    Backward,
}

/// Directed tree of beliefs with cumulative costs. The root is always index 0.
#[derive(Clone, Debug, PartialEq)]
pub struct BeliefTree<T: Scalar> {
    nodes: Vec<Belief<T>>,
    parent: Vec<Option<usize>>,
    cost: Vec<T>,
    children: Vec<Vec<usize>>,
    orientation: Orientation,
}

impl<T: Scalar> BeliefTree<T> {
    pub fn new(root: Belief<T>, orientation: Orientation) -> Self {
        Self {
            nodes: vec![root],
            parent: vec![None],
            cost: vec![T::zero()],
            children: vec![Vec::new()],
            orientation,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Always false: a tree keeps its root.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn node(&self, i: usize) -> &Belief<T> {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[Belief<T>] {
        &self.nodes
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn cost(&self, i: usize) -> T {
        self.cost[i]
    }

    pub fn costs(&self) -> &[T] {
        &self.cost
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// Adds a node under `parent` and returns its index.
    pub fn push(&mut self, b: Belief<T>, parent: usize, cost: T) -> usize {
        let idx = self.nodes.len();
        self.nodes.push(b);
        self.parent.push(Some(parent));
        self.cost.push(cost);
        self.children.push(Vec::new());
        self.children[parent].push(idx);
        idx
    }

    /// Moves `i` under `new_parent`. Panics on the root.
    pub fn set_parent(&mut self, i: usize, new_parent: usize) {
        let old = self.parent[i].expect("root has no parent");
        self.children[old].retain(|&c| c != i);
        self.children[new_parent].push(i);
        self.parent[i] = Some(new_parent);
    }

    pub fn set_cost(&mut self, i: usize, cost: T) {
        self.cost[i] = cost;
    }

    pub fn set_node(&mut self, i: usize, b: Belief<T>) {
        self.nodes[i] = b;
    }

    /// Whether `a` lies on the path from `b` to the root (inclusive of `b`).
    pub fn is_ancestor(&self, a: usize, mut b: usize) -> bool {
        loop {
            if a == b {
                return true;
            }
            match self.parent[b] {
                Some(p) => b = p,
                None => return false,
            }
        }
    }

    /// `i` and all its descendants, breadth first.
    pub fn subtree(&self, i: usize) -> Vec<usize> {
        let mut out = vec![i];
        let mut queue = VecDeque::from([i]);
        while let Some(n) = queue.pop_front() {
            for &c in &self.children[n] {
                out.push(c);
                queue.push_back(c);
            }
        }
        out
    }

    /// Indices from the root down to `i`.
    pub fn path_from_root(&self, i: usize) -> Vec<usize> {
        let mut path = vec![i];
        let mut cur = i;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Adds `delta` to the cost of `i` and every descendant.
    pub fn shift_subtree_cost(&mut self, i: usize, delta: T) {
        for n in self.subtree(i) {
            self.cost[n] += delta;
        }
    }

    /// Drops the flagged nodes, keeping the survivors in their original order.
    /// Every flagged node must have its whole subtree flagged; the root must
    /// survive. Returns the old → new index map.
    pub fn remove(&mut self, doomed: &[bool]) -> Vec<Option<usize>> {
        assert_eq!(doomed.len(), self.len());
        assert!(!doomed[0], "the root cannot be removed");
        let mut map = vec![None; self.len()];
        let mut next = 0;
        for (i, slot) in map.iter_mut().enumerate() {
            if !doomed[i] {
                *slot = Some(next);
                next += 1;
            }
        }
        let keep = |i: &usize| !doomed[*i];
        let nodes = std::mem::take(&mut self.nodes);
        self.nodes = nodes
            .into_iter()
            .enumerate()
            .filter(|(i, _)| keep(i))
            .map(|(_, b)| b)
            .collect();
        let parent = std::mem::take(&mut self.parent);
        self.parent = parent
            .into_iter()
            .enumerate()
            .filter(|(i, _)| keep(i))
            .map(|(_, p)| p.map(|p| map[p].expect("parent of a survivor survives")))
            .collect();
        let cost = std::mem::take(&mut self.cost);
        self.cost = cost
            .into_iter()
            .enumerate()
            .filter(|(i, _)| keep(i))
            .map(|(_, c)| c)
            .collect();
        let children = std::mem::take(&mut self.children);
        self.children = children
            .into_iter()
            .enumerate()
            .filter(|(i, _)| keep(i))
            .map(|(_, cs)| cs.into_iter().filter_map(|c| map[c]).collect())
            .collect();
        map
    }

    /// Cost of the stored edge at non-root node `i`, in the tree's direction.
    pub fn edge_cost(&self, i: usize, alpha: T, w: &ProcessNoise<T>) -> Result<T> {
        let p = self.parent[i].ok_or(Error::InvalidArgument("root has no edge".into()))?;
        let (from, to) = match self.orientation {
            Orientation::Forward => (&self.nodes[p], &self.nodes[i]),
            Orientation::Backward => (&self.nodes[i], &self.nodes[p]),
        };
        Ok(steering_cost(from, to, alpha, w)?.total)
    }

    /// Largest gap between a stored cost and its recomputation from the root.
    pub fn max_cost_error(&self, alpha: T, w: &ProcessNoise<T>) -> Result<T> {
        let mut recomputed = vec![T::zero(); self.len()];
        let mut worst = self.cost[0].abs();
        for i in self.subtree(0).into_iter().skip(1) {
            let p = self.parent[i].expect("non-root");
            recomputed[i] = recomputed[p] + self.edge_cost(i, alpha, w)?;
            worst = worst.max((recomputed[i] - self.cost[i]).abs());
        }
        Ok(worst)
    }

    /// Structural check: one root, consistent parent/child lists, every node
    /// reachable from the root.
    pub fn is_well_formed(&self) -> bool {
        let n = self.len();
        if n == 0 || self.parent[0].is_some() || self.parent.len() != n || self.children.len() != n || self.cost.len() != n {
            return false;
        }
        for i in 1..n {
            match self.parent[i] {
                Some(p) if p < n && self.children[p].contains(&i) => {}
                _ => return false,
            }
        }
        for (p, cs) in self.children.iter().enumerate() {
            if cs.iter().any(|&c| c >= n || self.parent[c] != Some(p)) {
                return false;
            }
        }
        self.subtree(0).len() == n
    }
}
