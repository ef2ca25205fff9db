//! CART-style regression tree with variance-reduction splitting, per-node
//! feature subsampling and stable leaf numbering.
//!
//! The same grower also serves the boosted ensemble: `gbt` swaps in a
//! regularized second-order gain and a shrunken leaf-weight rule, everything
//! else (threshold enumeration, partitioning, leaf numbering) is shared.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Nodes are either internal splits or terminal leaves, stored in one arena
/// with explicit child indices; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        id: u32,
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
    n_leaves: u32,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Number of terminal nodes; leaf ids are 0..n_leaves.
    pub fn n_leaves(&self) -> u32 {
        self.n_leaves
    }

    fn descend(&self, x: &[f64]) -> &Node {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    // ties at the threshold go left
                    idx = if x[*feature] <= *threshold { *left } else { *right };
                }
                leaf => return leaf,
            }
        }
    }

    /// Terminal leaf reached by `x`. Total on finite trees.
    pub fn leaf_of(&self, x: &[f64]) -> u32 {
        match self.descend(x) {
            Node::Leaf { id, .. } => *id,
            Node::Split { .. } => unreachable!("descend stops at leaves"),
        }
    }

    /// Prediction (leaf value) for `x`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self.descend(x) {
            Node::Leaf { value, .. } => *value,
            Node::Split { .. } => unreachable!("descend stops at leaves"),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tree serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Tree> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// Maximum split depth below the root; `None` grows until other limits.
    pub max_depth: Option<usize>,
    /// Both children of a split must contain at least this many rows.
    pub min_node_size: usize,
    /// Candidate features drawn (without replacement) per node.
    pub mtry: usize,
    /// Splits must improve the objective by strictly more than this.
    pub min_split_gain: f64,
}

impl TreeConfig {
    /// Regression-forest defaults: mtry = floor(sqrt(p)), minimum node size
    /// 5, unlimited depth.
    pub fn for_forest(p: usize) -> Self {
        TreeConfig {
            max_depth: None,
            min_node_size: 5,
            mtry: (p as f64).sqrt().floor().max(1.0) as usize,
            min_split_gain: 0.0,
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if p == 0 {
            return Err(Error::NoFeatures);
        }
        if self.mtry == 0 || self.mtry > p {
            return Err(Error::InvalidConfig(format!(
                "mtry must be in 1..={}, got {}",
                p, self.mtry
            )));
        }
        if self.min_node_size == 0 {
            return Err(Error::InvalidConfig("min_node_size must be >= 1".into()));
        }
        if !(self.min_split_gain >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "min_split_gain must be >= 0, got {}",
                self.min_split_gain
            )));
        }
        Ok(())
    }
}

/// Split scoring rule.
#[derive(Debug, Clone, Copy)]
pub(crate) enum SplitObjective {
    /// Maximize the reduction in sum of squared errors; leaves predict the
    /// node mean.
    VarianceReduction,
    /// Maximize 0.5*(G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)) - gamma
    /// with unit hessians; leaves carry the weight -G/(H+lambda).
    RegularizedGain { lambda: f64, gamma: f64 },
}

impl SplitObjective {
    #[inline]
    fn gain(&self, sum_l: f64, n_l: f64, sum_r: f64, n_r: f64) -> f64 {
        match *self {
            SplitObjective::VarianceReduction => {
                let total = sum_l + sum_r;
                sum_l * sum_l / n_l + sum_r * sum_r / n_r - total * total / (n_l + n_r)
            }
            SplitObjective::RegularizedGain { lambda, gamma } => {
                let total = sum_l + sum_r;
                0.5 * (sum_l * sum_l / (n_l + lambda) + sum_r * sum_r / (n_r + lambda)
                    - total * total / (n_l + n_r + lambda))
                    - gamma
            }
        }
    }

    #[inline]
    fn leaf_value(&self, sum: f64, n: f64) -> f64 {
        match *self {
            SplitObjective::VarianceReduction => sum / n,
            SplitObjective::RegularizedGain { lambda, .. } => -sum / (n + lambda),
        }
    }
}

/// Fits a regression tree on the rows named by `sample_indices` (a multiset;
/// bootstrap resamples repeat rows). `target_override`, when present, must
/// assign a value to every row of `data` and replaces `data.y()`; the boosted
/// ensemble uses it to fit residual gradients.
pub fn fit_tree(
    data: &Dataset,
    sample_indices: &[usize],
    config: &TreeConfig,
    target_override: Option<&[f64]>,
    rng: &mut ChaCha8Rng,
) -> Result<Tree> {
    let targets = match target_override {
        Some(t) => {
            if t.len() != data.n() {
                return Err(Error::DimensionMismatch(format!(
                    "target override has length {}, dataset has {} rows",
                    t.len(),
                    data.n()
                )));
            }
            t
        }
        None => data.y(),
    };
    grow_tree(
        data,
        sample_indices,
        targets,
        config,
        SplitObjective::VarianceReduction,
        rng,
    )
}

pub(crate) fn grow_tree(
    data: &Dataset,
    sample_indices: &[usize],
    targets: &[f64],
    config: &TreeConfig,
    objective: SplitObjective,
    rng: &mut ChaCha8Rng,
) -> Result<Tree> {
    if sample_indices.is_empty() {
        return Err(Error::EmptyNode);
    }
    config.validate(data.p())?;
    if let Some(&bad) = sample_indices.iter().find(|&&r| r >= data.n()) {
        return Err(Error::DimensionMismatch(format!(
            "sample index {} out of range for {} rows",
            bad,
            data.n()
        )));
    }

    let mut rows: Vec<u32> = sample_indices.iter().map(|&r| r as u32).collect();
    let mut grower = Grower {
        data,
        targets,
        config,
        objective,
        rng,
        nodes: Vec::new(),
        next_leaf: 0,
        scratch: Vec::new(),
    };
    grower.grow(&mut rows, 0);
    Ok(Tree {
        nodes: grower.nodes,
        n_leaves: grower.next_leaf,
    })
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct Grower<'a> {
    data: &'a Dataset,
    targets: &'a [f64],
    config: &'a TreeConfig,
    objective: SplitObjective,
    rng: &'a mut ChaCha8Rng,
    nodes: Vec<Node>,
    next_leaf: u32,
    scratch: Vec<(f64, u32)>,
}

impl Grower<'_> {
    fn grow(&mut self, rows: &mut [u32], depth: usize) -> usize {
        let best = if self.splittable(rows, depth) {
            self.best_split(rows)
        } else {
            None
        };

        match best {
            Some(split) => {
                let idx = self.nodes.len();
                self.nodes.push(Node::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left: 0,
                    right: 0,
                });
                let mid = partition_in_place(rows, |r| {
                    self.data.x(r as usize, split.feature) <= split.threshold
                });
                debug_assert!(mid > 0 && mid < rows.len());
                let (left_rows, right_rows) = rows.split_at_mut(mid);
                let left = self.grow(left_rows, depth + 1);
                let right = self.grow(right_rows, depth + 1);
                if let Node::Split {
                    left: l, right: r, ..
                } = &mut self.nodes[idx]
                {
                    *l = left;
                    *r = right;
                }
                idx
            }
            None => {
                let (sum, count) = self.sum_count(rows);
                let idx = self.nodes.len();
                self.nodes.push(Node::Leaf {
                    id: self.next_leaf,
                    value: self.objective.leaf_value(sum, count),
                });
                self.next_leaf += 1;
                idx
            }
        }
    }

    fn sum_count(&self, rows: &[u32]) -> (f64, f64) {
        let sum = rows.iter().map(|&r| self.targets[r as usize]).sum();
        (sum, rows.len() as f64)
    }

    fn splittable(&self, rows: &[u32], depth: usize) -> bool {
        if rows.len() < 2 * self.config.min_node_size || rows.len() < 2 {
            return false;
        }
        if let Some(max) = self.config.max_depth {
            if depth >= max {
                return false;
            }
        }
        if let SplitObjective::VarianceReduction = self.objective {
            // pure nodes never split; the tolerance absorbs accumulation
            // rounding on constant targets
            let (sum, count) = self.sum_count(rows);
            let sumsq: f64 = rows
                .iter()
                .map(|&r| {
                    let t = self.targets[r as usize];
                    t * t
                })
                .sum();
            let sse = sumsq - sum * sum / count;
            if sse <= 1e-12 * sumsq.abs() {
                return false;
            }
        }
        true
    }

    fn best_split(&mut self, rows: &[u32]) -> Option<BestSplit> {
        let k = rows.len();
        let min_size = self.config.min_node_size;
        let mut best: Option<BestSplit> = None;

        let candidates = rand::seq::index::sample(self.rng, self.data.p(), self.config.mtry);
        for feature in candidates {
            self.scratch.clear();
            self.scratch
                .extend(rows.iter().map(|&r| (self.data.x(r as usize, feature), r)));
            // total order (value, row) keeps the walk reproducible
            self.scratch
                .sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

            let total: f64 = self
                .scratch
                .iter()
                .map(|&(_, r)| self.targets[r as usize])
                .sum();
            let mut left_sum = 0.0;
            for pos in 1..k {
                left_sum += self.targets[self.scratch[pos - 1].1 as usize];
                let (prev, cur) = (self.scratch[pos - 1].0, self.scratch[pos].0);
                if cur <= prev {
                    continue;
                }
                if pos < min_size || k - pos < min_size {
                    continue;
                }
                let gain =
                    self.objective
                        .gain(left_sum, pos as f64, total - left_sum, (k - pos) as f64);
                if gain <= self.config.min_split_gain {
                    continue;
                }
                if best.as_ref().map_or(true, |b| gain > b.gain) {
                    // midpoint between adjacent distinct values; falls back to
                    // the lower value when the midpoint rounds onto a bound
                    let mut threshold = 0.5 * (prev + cur);
                    if !(threshold > prev && threshold < cur) {
                        threshold = prev;
                    }
                    best = Some(BestSplit {
                        feature,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }
}

fn partition_in_place(rows: &mut [u32], pred: impl Fn(u32) -> bool) -> usize {
    let mut i = 0;
    let mut j = rows.len();
    while i < j {
        if pred(rows[i]) {
            i += 1;
        } else {
            j -= 1;
            rows.swap(i, j);
        }
    }
    i
}
