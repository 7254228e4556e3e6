//! CART regression trees and bootstrap-aggregated random forests.
//!
//! Splits maximize the reduction in squared error. For a parent split into
//! `nl` and `nr` members with means `ml` and `mr` the reduction is
//! `nl * nr / (nl + nr) * (ml - mr)^2`, which is algebraically
//! `SSE(parent) - SSE(left) - SSE(right)` and is never negative in floating
//! point. Thresholds are midpoints between adjacent distinct values, samples
//! with `x[v] <= threshold` go left, and equal-gain candidates resolve to the
//! lowest variable index, then the lowest threshold.
//!
//! Tree `i` of a forest seeded with `s` draws from `RngState::new(s ^ i)`,
//! so trees can be grown in parallel and the forest is the same as a serial
//! fit. Bootstrap draws index into the training rows sorted by content,
//! which makes a forest independent of the order its rows were given in.

use rayon::prelude::*;

use crate::error::{ensure, Result};
use crate::numeric::{Matrix, RngState};

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split {
        variable: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        value: f64,
        n_members: usize,
    },
}

impl TreeNode {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Split {
                    variable,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*variable] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Visits every leaf as `(value, n_members)`.
    pub fn leaves(&self) -> Vec<(f64, usize)> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            match n {
                TreeNode::Leaf { value, n_members } => out.push((*value, *n_members)),
                TreeNode::Split { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub variable: usize,
    pub threshold: f64,
    pub gain: f64,
}

pub fn predict_tree(tree: &TreeNode, x: &[f64], n_variables: usize) -> Result<f64> {
    ensure!(
        x.len() == n_variables,
        "sample has {} values, tree expects {n_variables}",
        x.len()
    );
    Ok(tree.predict(x))
}

/// Grows one tree on all rows of `x`.
pub fn fit_tree(
    x: &Matrix,
    y: &[f64],
    mtry: usize,
    min_leaf: usize,
    rng: &mut RngState,
) -> Result<TreeNode> {
    ensure!(x.rows() >= 1, "cannot grow a tree on no samples");
    ensure!(
        x.rows() == y.len(),
        "{} sensor rows but {} property values",
        x.rows(),
        y.len()
    );
    ensure!(
        (1..=x.cols()).contains(&mtry),
        "mtry {mtry} outside 1..={}",
        x.cols()
    );
    ensure!(min_leaf >= 1, "min_leaf must be at least 1");
    let members: Vec<usize> = (0..x.rows()).collect();
    Ok(grow(x, y, members, mtry, min_leaf, rng))
}

fn leaf(y: &[f64], members: &[usize]) -> TreeNode {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &i in members {
        lo = lo.min(y[i]);
        hi = hi.max(y[i]);
        sum += y[i];
    }
    TreeNode::Leaf {
        // clamp absorbs rounding in the sum
        value: (sum / members.len() as f64).clamp(lo, hi),
        n_members: members.len(),
    }
}

fn grow(
    x: &Matrix,
    y: &[f64],
    members: Vec<usize>,
    mtry: usize,
    min_leaf: usize,
    rng: &mut RngState,
) -> TreeNode {
    let n = members.len();
    let first = y[members[0]];
    if n < 2 * min_leaf || members.iter().all(|&i| y[i] == first) {
        return leaf(y, &members);
    }
    let mut vars = rng
        .sample_without_replacement(x.cols(), mtry)
        .expect("mtry checked");
    vars.sort_unstable();

    let Some(best) = best_split(x, y, &members, &vars, min_leaf) else {
        return leaf(y, &members);
    };
    let (left, right): (Vec<usize>, Vec<usize>) = members
        .iter()
        .partition(|&&i| x.get(i, best.variable) <= best.threshold);
    TreeNode::Split {
        variable: best.variable,
        threshold: best.threshold,
        left: Box::new(grow(x, y, left, mtry, min_leaf, rng)),
        right: Box::new(grow(x, y, right, mtry, min_leaf, rng)),
    }
}

/// Best positive-gain split over `vars` (ascending), or `None`.
pub(crate) fn best_split(
    x: &Matrix,
    y: &[f64],
    members: &[usize],
    vars: &[usize],
    min_leaf: usize,
) -> Option<SplitCandidate> {
    let n = members.len();
    let total: f64 = members.iter().map(|&i| y[i]).sum();
    let mut best: Option<SplitCandidate> = None;
    let mut order = members.to_vec();
    for &v in vars {
        order.sort_by(|&a, &b| x.get(a, v).total_cmp(&x.get(b, v)).then(a.cmp(&b)));
        let mut left_sum = 0.0;
        for pos in 0..n - 1 {
            left_sum += y[order[pos]];
            let nl = pos + 1;
            let nr = n - nl;
            let (lo, hi) = (x.get(order[pos], v), x.get(order[pos + 1], v));
            if lo == hi || nl < min_leaf || nr < min_leaf {
                continue;
            }
            let ml = left_sum / nl as f64;
            let mr = (total - left_sum) / nr as f64;
            let gain = (nl * nr) as f64 / n as f64 * (ml - mr) * (ml - mr);
            if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
                let mut threshold = 0.5 * (lo + hi);
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some(SplitCandidate {
                    variable: v,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Variables drawn per split; `None` means `max(1, floor(c / 3))`.
    pub mtry: Option<usize>,
    pub min_leaf: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 1000,
            mtry: None,
            min_leaf: 1,
        }
    }
}

impl ForestConfig {
    pub fn resolved_mtry(&self, n_variables: usize) -> usize {
        self.mtry.unwrap_or((n_variables / 3).max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    trees: Vec<TreeNode>,
    n_variables: usize,
    mtry: usize,
    min_leaf: usize,
    seed: u64,
}

impl Forest {
    pub fn fit(x: &Matrix, y: &[f64], cfg: &ForestConfig, seed: u64) -> Result<Self> {
        ensure!(x.rows() >= 1, "cannot fit a forest on no samples");
        ensure!(
            x.rows() == y.len(),
            "{} sensor rows but {} property values",
            x.rows(),
            y.len()
        );
        ensure!(cfg.n_trees >= 1, "a forest needs at least one tree");
        let mtry = cfg.resolved_mtry(x.cols());
        ensure!(
            (1..=x.cols()).contains(&mtry),
            "mtry {mtry} outside 1..={}",
            x.cols()
        );
        ensure!(cfg.min_leaf >= 1, "min_leaf must be at least 1");

        let canon = canonical_order(x, y);
        let cx = x.select_rows(&canon);
        let cy: Vec<f64> = canon.iter().map(|&i| y[i]).collect();

        let trees = (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = RngState::derived(seed, t as u64);
                let boot = bootstrap(&mut rng, cx.rows());
                let bx = cx.select_rows(&boot);
                let by: Vec<f64> = boot.iter().map(|&i| cy[i]).collect();
                fit_tree(&bx, &by, mtry, cfg.min_leaf, &mut rng).expect("validated")
            })
            .collect();
        Ok(Self {
            trees,
            n_variables: x.cols(),
            mtry,
            min_leaf: cfg.min_leaf,
            seed,
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        ensure!(
            x.len() == self.n_variables,
            "sample has {} values, forest expects {}",
            x.len(),
            self.n_variables
        );
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for t in &self.trees {
            let p = t.predict(x);
            lo = lo.min(p);
            hi = hi.max(p);
            sum += p;
        }
        Ok((sum / self.trees.len() as f64).clamp(lo, hi))
    }

    pub fn trees(&self) -> &[TreeNode] {
        &self.trees
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn mtry(&self) -> usize {
        self.mtry
    }

    pub fn min_leaf(&self) -> usize {
        self.min_leaf
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

pub fn fit_forest(x: &Matrix, y: &[f64], cfg: &ForestConfig, seed: u64) -> Result<Forest> {
    Forest::fit(x, y, cfg, seed)
}

pub fn predict_forest(forest: &Forest, x: &[f64]) -> Result<f64> {
    forest.predict(x)
}

/// `n` draws with replacement from `0..n`.
pub fn bootstrap(rng: &mut RngState, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.index_unchecked(n)).collect()
}

/// Row indices sorted by (sensor values, property value).
pub(crate) fn canonical_order(x: &Matrix, y: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.rows()).collect();
    idx.sort_by(|&a, &b| {
        x.row(a)
            .iter()
            .zip(x.row(b))
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(y[a].total_cmp(&y[b]))
    });
    idx
}
