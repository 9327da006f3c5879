//! Random-forest regression over unit-cube inputs.
//!
//! Trees are CART regressors grown on bootstrap resamples with exhaustive
//! variance-reduction splits. Leaves keep the mean and variance of their
//! targets, so the forest can report a predictive mean and variance and
//! expose each tree as a partition of the unit cube into boxes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::RngState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub min_leaf: usize,
    pub max_depth: usize,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 64,
            min_leaf: 3,
            max_depth: 40,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { mean: f64, var: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<Node>,
}

/// A leaf as an axis-aligned box `[lo, hi)` per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafBox {
    pub bounds: Vec<(f64, f64)>,
    pub value: f64,
}

impl LeafBox {
    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).product()
    }
}

fn mean_var(ys: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = ys.clone().count() as f64;
    let mean = ys.clone().sum::<f64>() / n;
    let var = ys.map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    params: ForestParams,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let (mean, var) = mean_var(idx.iter().map(|&i| self.y[i]));
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { mean, var });
        if depth >= self.params.max_depth || idx.len() < 2 * self.params.min_leaf || var <= 0.0 {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(idx) else {
            return id;
        };
        let mut mid = 0;
        for k in 0..idx.len() {
            if self.x[idx[k]][feature] <= threshold {
                idx.swap(k, mid);
                mid += 1;
            }
        }
        let (l, r) = idx.split_at_mut(mid);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&self, idx: &[usize]) -> Option<(usize, f64)> {
        let n = idx.len();
        let min_leaf = self.params.min_leaf;
        let total: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = idx.to_vec();
        for f in 0..self.x[idx[0]].len() {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left_sum = 0.0;
            for k in 1..n {
                left_sum += self.y[order[k - 1]];
                if k < min_leaf || n - k < min_leaf {
                    continue;
                }
                let (a, b) = (self.x[order[k - 1]][f], self.x[order[k]][f]);
                if a == b {
                    continue;
                }
                // Maximizing this is minimizing the children's summed squared error.
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / k as f64 + right_sum * right_sum / (n - k) as f64;
                if best.is_none_or(|(g, _, _)| gain > g + 1e-12 * g.abs()) {
                    best = Some((gain, f, 0.5 * (a + b)));
                }
            }
        }
        let base = total * total / n as f64;
        best.filter(|(g, _, _)| *g > base + 1e-12 * base.abs())
            .map(|(_, f, t)| (f, t))
    }
}

impl Tree {
    fn fit(x: &[Vec<f64>], y: &[f64], params: ForestParams, rng: &mut RngState) -> Tree {
        let n = y.len();
        let mut idx: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.below(n)).collect()
        } else {
            (0..n).collect()
        };
        let mut b = Builder {
            x,
            y,
            params,
            nodes: Vec::new(),
        };
        b.grow(&mut idx, 0);
        Tree { nodes: b.nodes }
    }

    fn leaf(&self, x: &[f64]) -> (f64, f64) {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { mean, var } => return (mean, var),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.leaf(x).0
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// The tree's partition of `[0, 1]^dim`.
    pub fn leaf_boxes(&self, dim: usize) -> Vec<LeafBox> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, vec![(0.0, 1.0); dim])];
        while let Some((i, bounds)) = stack.pop() {
            match self.nodes[i] {
                Node::Leaf { mean, .. } => out.push(LeafBox { bounds, value: mean }),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let (lo, hi) = bounds[feature];
                    let t = threshold.clamp(lo, hi);
                    let mut lb = bounds.clone();
                    lb[feature].1 = t;
                    let mut rb = bounds;
                    rb[feature].0 = t;
                    stack.push((right, rb));
                    stack.push((left, lb));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Forest {
    trees: Vec<Tree>,
    dim: usize,
}

impl Forest {
    /// Tree `t` draws its bootstrap from `rng.fork(t)`, so the fit does not
    /// depend on `exec`.
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: ForestParams, rng: &RngState, exec: Execution) -> Result<Forest> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::InvalidConfiguration(format!(
                "forest needs matching non-empty inputs, got {} rows and {} targets",
                x.len(),
                y.len()
            )));
        }
        if params.n_trees == 0 || params.min_leaf == 0 {
            return Err(Error::param("forest", "n_trees and min_leaf must be positive"));
        }
        let dim = x[0].len();
        if x.iter().any(|r| r.len() != dim) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfiguration("ragged or non-finite forest inputs".into()));
        }
        let trees = exec.map_range(params.n_trees, |t| {
            let mut r = rng.fork(t as u64);
            Tree::fit(x, y, params, &mut r)
        });
        Ok(Forest { trees, dim })
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Mean and variance of the mixture of per-tree leaf distributions.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let n = self.trees.len() as f64;
        let (mut m1, mut m2) = (0.0, 0.0);
        for t in &self.trees {
            let (mean, var) = t.leaf(x);
            m1 += mean;
            m2 += var + mean * mean;
        }
        let mean = m1 / n;
        (mean, (m2 / n - mean * mean).max(0.0))
    }

    pub fn predict_many(&self, xs: &[Vec<f64>], exec: Execution) -> Vec<(f64, f64)> {
        exec.map(xs, |_, x| self.predict(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn data(n: usize, seed: u64, f: impl Fn(&[f64]) -> f64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut r = rng_from_seed(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![r.uniform(), r.uniform()]).collect();
        let y = x.iter().map(|p| f(p)).collect();
        (x, y)
    }

    #[test]
    fn fits_a_step() {
        let (x, y) = data(200, 1, |p| if p[0] > 0.5 { 1.0 } else { 0.0 });
        let f = Forest::fit(&x, &y, ForestParams::default(), &rng_from_seed(2), Execution::Sequential).unwrap();
        assert!(f.predict(&[0.9, 0.3]).0 > 0.9);
        assert!(f.predict(&[0.1, 0.3]).0 < 0.1);
    }

    #[test]
    fn constant_targets_give_single_leaves() {
        let (x, _) = data(50, 1, |_| 0.0);
        let y = vec![3.0; 50];
        let f = Forest::fit(&x, &y, ForestParams::default(), &rng_from_seed(2), Execution::Sequential).unwrap();
        assert!(f.trees().iter().all(|t| t.n_leaves() == 1));
        assert_eq!(f.predict(&[0.5, 0.5]), (3.0, 0.0));
    }

    #[test]
    fn boxes_partition_the_cube() {
        let (x, y) = data(120, 3, |p| p[0] * p[1]);
        let f = Forest::fit(&x, &y, ForestParams::default(), &rng_from_seed(4), Execution::Sequential).unwrap();
        for t in f.trees() {
            let boxes = t.leaf_boxes(2);
            let vol: f64 = boxes.iter().map(LeafBox::volume).sum();
            assert!((vol - 1.0).abs() < 1e-12);
            for b in &boxes {
                let c: Vec<f64> = b.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
                assert_eq!(t.predict(&c), b.value);
            }
        }
    }

    #[test]
    fn min_leaf_respected() {
        let (x, y) = data(60, 5, |p| p[0]);
        let params = ForestParams {
            n_trees: 4,
            bootstrap: false,
            ..Default::default()
        };
        let f = Forest::fit(&x, &y, params, &rng_from_seed(1), Execution::Sequential).unwrap();
        let t = &f.trees()[0];
        for b in t.leaf_boxes(2) {
            let inside = x
                .iter()
                .filter(|p| {
                    p.iter()
                        .zip(&b.bounds)
                        .all(|(v, (lo, hi))| *v > *lo - 1e-15 && (*v <= *hi))
                })
                .count();
            assert!(inside >= 3, "leaf with {inside} samples");
        }
    }

    #[test]
    fn modes_agree() {
        let (x, y) = data(80, 6, |p| p[0] + p[1]);
        let r = rng_from_seed(7);
        let a = Forest::fit(&x, &y, ForestParams::default(), &r, Execution::Sequential).unwrap();
        let b = Forest::fit(&x, &y, ForestParams::default(), &r, Execution::default()).unwrap();
        for p in &x {
            assert_eq!(a.predict(p), b.predict(p));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let r = rng_from_seed(1);
        assert!(Forest::fit(&[], &[], ForestParams::default(), &r, Execution::Sequential).is_err());
        assert!(Forest::fit(&[vec![0.1]], &[f64::NAN], ForestParams::default(), &r, Execution::Sequential).is_err());
    }
}
