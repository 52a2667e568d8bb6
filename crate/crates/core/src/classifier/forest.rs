//! Bagged CART trees with Gini splits over sparse non-negative features.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{ClassScores, LoeLabel, NUM_LEVELS};
use crate::textproc::SparseVector;

/// How many candidate features each split examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    #[default]
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, n_features: usize) -> usize {
        let n = match self {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().round() as usize,
            MaxFeatures::All => n_features,
            MaxFeatures::Count(k) => k,
        };
        n.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
    pub min_samples_split: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 200,
            max_depth: None,
            max_features: MaxFeatures::Sqrt,
            min_samples_split: 2,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Node {
    Leaf([f64; NUM_LEVELS]),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    /// Class distribution of the tree's (bootstrap) training sample.
    prior: [f64; NUM_LEVELS],
}

impl DecisionTree {
    pub fn leaf_distribution(&self, x: &SparseVector) -> [f64; NUM_LEVELS] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(p) => return *p,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x.get(*feature) <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn prior(&self) -> [f64; NUM_LEVELS] {
        self.prior
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    fn leaves(&self) -> impl Iterator<Item = &[f64; NUM_LEVELS]> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf(p) => Some(p),
            Node::Split { .. } => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub n_features: usize,
    trees: Vec<DecisionTree>,
}

impl ForestModel {
    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Mean leaf distribution over trees. A vector with no non-zero feature
    /// gets the mean of the trees' root distributions instead.
    pub fn confidences(&self, x: &SparseVector) -> ClassScores {
        let mut sum = [0.0; NUM_LEVELS];
        for tree in &self.trees {
            let p = if x.is_empty() {
                tree.prior
            } else {
                tree.leaf_distribution(x)
            };
            for (s, v) in sum.iter_mut().zip(p) {
                *s += v;
            }
        }
        let n = self.trees.len().max(1) as f64;
        ClassScores(sum.map(|s| s / n))
    }

    pub fn predict(&self, x: &SparseVector) -> LoeLabel {
        self.confidences(x).argmax()
    }

    /// Checks structural consistency after loading from disk.
    pub fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::ModelFormat("forest has no trees".into()));
        }
        for tree in &self.trees {
            for (i, node) in tree.nodes.iter().enumerate() {
                if let Node::Split { left, right, .. } = node {
                    if *left <= i || *right <= i || *left >= tree.nodes.len() || *right >= tree.nodes.len() {
                        return Err(Error::ModelFormat(format!("bad child index at node {i}")));
                    }
                }
            }
            for p in tree.leaves().chain(std::iter::once(&tree.prior)) {
                let total: f64 = p.iter().sum();
                if !p.iter().all(|v| v.is_finite() && *v >= 0.0) || (total - 1.0).abs() > 1e-6 {
                    return Err(Error::ModelFormat("leaf distribution does not sum to 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// Column-major copy of the training matrix; only non-zero cells are stored.
struct Columns {
    cols: Vec<Vec<(u32, f64)>>,
}

impl Columns {
    fn new(rows: &[SparseVector], n_features: usize) -> Self {
        let mut cols = vec![Vec::new(); n_features];
        for (r, row) in rows.iter().enumerate() {
            for &(f, v) in row.entries() {
                if f < n_features {
                    cols[f].push((r as u32, v));
                }
            }
        }
        Columns { cols }
    }
}

struct Builder<'a> {
    rows: &'a [SparseVector],
    labels: &'a [usize],
    columns: &'a Columns,
    params: &'a ForestParams,
    mtry: usize,
    /// Multiplicity of each training row in the node being split.
    weight: Vec<u32>,
    nodes: Vec<Node>,
    features: Vec<usize>,
    scratch: Vec<(f64, usize, u32)>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

fn gini(counts: &[f64; NUM_LEVELS], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

impl Builder<'_> {
    fn class_counts(&self, sample: &[(usize, u32)]) -> [f64; NUM_LEVELS] {
        let mut counts = [0.0; NUM_LEVELS];
        for &(r, w) in sample {
            counts[self.labels[r]] += w as f64;
        }
        counts
    }

    /// Best threshold on one feature by weighted child Gini, or None when the
    /// feature is constant within the node.
    fn best_threshold(
        &mut self,
        feature: usize,
        counts: &[f64; NUM_LEVELS],
        total: f64,
    ) -> Option<(f64, f64)> {
        self.scratch.clear();
        let mut nonzero = [0.0; NUM_LEVELS];
        for &(r, v) in &self.columns.cols[feature] {
            let w = self.weight[r as usize];
            if w > 0 {
                let c = self.labels[r as usize];
                self.scratch.push((v, c, w));
                nonzero[c] += w as f64;
            }
        }
        let nonzero_total: f64 = nonzero.iter().sum();
        let zero_total = total - nonzero_total;
        if zero_total > 0.0 {
            let mut zeros = [0.0; NUM_LEVELS];
            for c in 0..NUM_LEVELS {
                zeros[c] = counts[c] - nonzero[c];
            }
            // Implicit zeros enter the sweep as one group; encode with class
            // index NUM_LEVELS and unpack below.
            self.scratch.push((0.0, NUM_LEVELS, 0));
            self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            return self.sweep(total, Some(zeros));
        }
        self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        self.sweep(total, None)
    }

    fn sweep(&self, total: f64, zeros: Option<[f64; NUM_LEVELS]>) -> Option<(f64, f64)> {
        let s = &self.scratch;
        let mut left = [0.0; NUM_LEVELS];
        let mut left_total = 0.0;
        let mut best: Option<(f64, f64)> = None;
        let mut class_total = [0.0; NUM_LEVELS];
        for &(_, c, w) in s {
            if c < NUM_LEVELS {
                class_total[c] += w as f64;
            }
        }
        if let Some(z) = zeros {
            for c in 0..NUM_LEVELS {
                class_total[c] += z[c];
            }
        }
        for i in 0..s.len() {
            let (v, c, w) = s[i];
            if c == NUM_LEVELS {
                let z = zeros.expect("zero group present");
                for k in 0..NUM_LEVELS {
                    left[k] += z[k];
                    left_total += z[k];
                }
            } else {
                left[c] += w as f64;
                left_total += w as f64;
            }
            if i + 1 == s.len() || s[i + 1].0 <= v {
                continue;
            }
            let right_total = total - left_total;
            let mut right = [0.0; NUM_LEVELS];
            for k in 0..NUM_LEVELS {
                right[k] = class_total[k] - left[k];
            }
            let impurity =
                (left_total * gini(&left, left_total) + right_total * gini(&right, right_total)) / total;
            if best.is_none_or(|(_, b)| impurity < b) {
                let mut threshold = v + (s[i + 1].0 - v) / 2.0;
                if threshold >= s[i + 1].0 {
                    threshold = v;
                }
                best = Some((threshold, impurity));
            }
        }
        best
    }

    fn leaf(&mut self, counts: &[f64; NUM_LEVELS], total: f64) -> usize {
        self.nodes.push(Node::Leaf(counts.map(|c| c / total)));
        self.nodes.len() - 1
    }

    fn build(&mut self, sample: Vec<(usize, u32)>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let counts = self.class_counts(&sample);
        let total: f64 = counts.iter().sum();
        let parent = gini(&counts, total);
        let at_limit = self.params.max_depth.is_some_and(|d| depth >= d);
        if parent <= 0.0 || at_limit || total < self.params.min_samples_split as f64 {
            return self.leaf(&counts, total);
        }

        for &(r, w) in &sample {
            self.weight[r] = w;
        }
        self.features.shuffle(rng);
        let mut best: Option<BestSplit> = None;
        for i in 0..self.features.len() {
            // Past the first mtry candidates, keep looking only until some
            // split actually reduces impurity.
            if i >= self.mtry && best.is_some() {
                break;
            }
            let f = self.features[i];
            if let Some((threshold, impurity)) = self.best_threshold(f, &counts, total) {
                if impurity < parent - 1e-12 && best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        impurity,
                    });
                }
            }
        }
        for &(r, _) in &sample {
            self.weight[r] = 0;
        }

        let Some(split) = best else {
            return self.leaf(&counts, total);
        };
        let (left, right): (Vec<_>, Vec<_>) = sample
            .into_iter()
            .partition(|&(r, _)| self.rows[r].get(split.feature) <= split.threshold);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf([0.0; NUM_LEVELS]));
        let l = self.build(left, depth + 1, rng);
        let r = self.build(right, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
        };
        id
    }
}

fn grow_tree(
    rows: &[SparseVector],
    labels: &[usize],
    columns: &Columns,
    n_features: usize,
    params: &ForestParams,
    tree_index: u64,
) -> DecisionTree {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(tree_index);
    let n = rows.len();
    let mut weight = vec![0u32; n];
    if params.bootstrap {
        for _ in 0..n {
            weight[rng.random_range(0..n)] += 1;
        }
    } else {
        weight.iter_mut().for_each(|w| *w = 1);
    }
    let sample: Vec<(usize, u32)> = weight
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0)
        .map(|(r, w)| (r, *w))
        .collect();
    let mut builder = Builder {
        rows,
        labels,
        columns,
        params,
        mtry: params.max_features.resolve(n_features),
        weight: vec![0; n],
        nodes: Vec::new(),
        features: (0..n_features).collect(),
        scratch: Vec::new(),
    };
    let counts = builder.class_counts(&sample);
    let total: f64 = counts.iter().sum();
    builder.build(sample, 0, &mut rng);
    DecisionTree {
        nodes: builder.nodes,
        prior: counts.map(|c| c / total),
    }
}

/// Trains a forest; each tree draws from its own stream of the seeded
/// generator, so the result does not depend on thread scheduling.
pub fn train_forest(
    rows: &[SparseVector],
    labels: &[LoeLabel],
    n_features: usize,
    params: &ForestParams,
) -> Result<ForestModel> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: rows.len(),
            right: labels.len(),
        });
    }
    if rows.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if params.n_trees == 0 {
        return Err(Error::InvalidArgument("forest needs at least one tree".into()));
    }
    let first = labels[0];
    if labels.iter().all(|l| *l == first) {
        return Err(Error::SingleClass(first.to_string()));
    }
    let classes: Vec<usize> = labels.iter().map(|l| l.ordinal()).collect();
    let columns = Columns::new(rows, n_features);
    let trees = (0..params.n_trees as u64)
        .into_par_iter()
        .map(|t| grow_tree(rows, &classes, &columns, n_features, params, t))
        .collect();
    Ok(ForestModel {
        params: params.clone(),
        n_features,
        trees,
    })
}
