//! Random forest classifier built on entropy-gain decision trees.
//!
//! Trees split on midpoint thresholds between consecutive distinct feature
//! values, choosing the split with the highest information gain in bits.
//! Each tree trains on a bootstrap sample (by default) and a random feature
//! subset of size `floor(log2 k) + 1`; prediction averages the leaf class
//! frequencies across trees. All randomness derives from the config seed
//! through per-tree streams, so fits are reproducible and trees could be
//! grown in parallel without changing the result.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::LabeledDataset;
use crate::math;
use crate::seeding;

#[derive(Debug, Error, PartialEq)]
pub enum ForestError {
    #[error("training needs at least two classes, got {0}")]
    TooFewClasses(usize),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("feature and label counts differ: {features} vs {labels}")]
    RowCountMismatch { features: usize, labels: usize },
    #[error("row {row} has {found} features, expected {expected}")]
    WidthMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row} label {label} out of range for {classes} classes")]
    LabelOutOfRange {
        row: usize,
        label: usize,
        classes: usize,
    },
    #[error("row {row}, feature {feature} is missing or non-finite; impute before fitting")]
    BadCell { row: usize, feature: usize },
    #[error("forest needs at least one tree")]
    ZeroTrees,
    #[error("feature subset size {size} outside 1..={features}")]
    BadSubsetSize { size: usize, features: usize },
    #[error("{names} feature names for {features} features")]
    NameCountMismatch { names: usize, features: usize },
    #[error("probe row has {found} features, expected {expected}")]
    ProbeWidth { expected: usize, found: usize },
    #[error("class probabilities must be in [0,1] and sum to 1")]
    InvalidDistribution,
    #[error("model has no trees")]
    EmptyModel,
}

/// Predicted class probabilities, one entry per portfolio solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassDistribution {
    probs: Vec<f64>,
}

impl ClassDistribution {
    /// Validates that entries lie in [0,1] and sum to 1 within 1e-9.
    pub fn new(probs: Vec<f64>) -> Result<Self, ForestError> {
        if probs.is_empty() {
            return Err(ForestError::InvalidDistribution);
        }
        let mut sum = 0.0;
        for &p in &probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(ForestError::InvalidDistribution);
            }
            sum += p;
        }
        if math::abs(sum - 1.0) > 1e-9 {
            return Err(ForestError::InvalidDistribution);
        }
        Ok(ClassDistribution { probs })
    }

    /// Raw class frequencies `counts / total`.
    pub(crate) fn from_counts(counts: &[usize], total: usize) -> Self {
        let probs = counts
            .iter()
            .map(|&c| c as f64 / total as f64)
            .collect();
        ClassDistribution { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn class_count(&self) -> usize {
        self.probs.len()
    }

    /// Shannon entropy in bits, with `0 log 0 = 0`.
    pub fn entropy_bits(&self) -> f64 {
        let mut h = 0.0;
        for &p in &self.probs {
            if p > 0.0 {
                h -= p * math::log2(p);
            }
        }
        h
    }

    /// Index of the largest probability; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, &p) in self.probs.iter().enumerate().skip(1) {
            if p > self.probs[best] {
                best = j;
            }
        }
        best
    }

    /// The two largest probabilities, in descending order.
    pub fn top_two(&self) -> (f64, f64) {
        let mut first = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        for &p in &self.probs {
            if p > first {
                second = first;
                first = p;
            } else if p > second {
                second = p;
            }
        }
        (first, second)
    }
}

/// A decision tree node: an axis-aligned threshold split or a leaf holding
/// the class frequencies of the training rows that reached it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        distribution: ClassDistribution,
        count: usize,
    },
}

impl TreeNode {
    /// Routes a probe to its leaf: `x[feature] <= threshold` goes left.
    pub fn route<'a>(&'a self, x: &[f64]) -> &'a ClassDistribution {
        match self {
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.route(x)
                } else {
                    right.route(x)
                }
            }
            TreeNode::Leaf { distribution, .. } => distribution,
        }
    }

    fn max_class_index(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => {
                left.max_class_index().max(right.max_class_index())
            }
            TreeNode::Leaf { distribution, .. } => distribution.class_count(),
        }
    }
}

/// Training knobs. `feature_subset_size: None` resolves to
/// `floor(log2 k) + 1` at fit time, where `k` is the feature count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub feature_subset_size: Option<usize>,
    pub bootstrap: bool,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    /// Redraw the candidate feature subset at every node instead of once per
    /// tree. Off by default; kept for comparison runs.
    pub per_node_subsets: bool,
    pub seed: u64,
}

impl ForestConfig {
    pub fn with_seed(seed: u64) -> Self {
        ForestConfig {
            n_trees: 99,
            feature_subset_size: None,
            bootstrap: true,
            min_leaf: 1,
            max_depth: None,
            per_node_subsets: false,
            seed,
        }
    }

    /// The subset size actually used for `n_features` features.
    pub fn resolved_subset_size(&self, n_features: usize) -> usize {
        self.feature_subset_size
            .unwrap_or_else(|| default_feature_subset_size(n_features))
    }
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig::with_seed(0)
    }
}

/// `floor(log2 k) + 1`, the classical random-subspace size.
pub fn default_feature_subset_size(n_features: usize) -> usize {
    debug_assert!(n_features >= 1);
    n_features.ilog2() as usize + 1
}

/// One fitted tree and the features it was allowed to test. In per-node
/// mode every feature is a candidate, so the subset lists all of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedTree {
    pub root: TreeNode,
    pub feature_subset: Vec<usize>,
}

/// A fitted random forest. Immutable after fit; safe to share across
/// threads for prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    trees: Vec<FittedTree>,
    config: ForestConfig,
    class_count: usize,
    n_features: usize,
    feature_names: Vec<String>,
}

/// A winning split candidate: the feature, the midpoint threshold, and the
/// information gain in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub gain_bits: f64,
}

/// Entropy in bits of an integer class-count vector. This exact expression
/// (ascending class order, `h -= p * log2(p)`) is the one the split search
/// uses, so equal-gain candidates compare reproducibly.
pub(crate) fn entropy_of_counts(counts: &[usize], total: usize) -> f64 {
    let mut h = 0.0;
    let n = total as f64;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * math::log2(p);
        }
    }
    h
}

fn class_counts(y: &[usize], rows: &[usize], class_count: usize) -> Vec<usize> {
    let mut counts = vec![0usize; class_count];
    for &r in rows {
        counts[y[r]] += 1;
    }
    counts
}

/// Finds the maximum-gain midpoint split over the given candidate features,
/// considering all rows. Ties break toward the lower feature index, then the
/// lower threshold. Returns `None` for pure nodes or when no candidate has
/// strictly positive gain.
pub fn best_split(
    x: &[Vec<f64>],
    y: &[usize],
    class_count: usize,
    candidate_features: &[usize],
) -> Option<SplitChoice> {
    let rows: Vec<usize> = (0..x.len()).collect();
    let counts = class_counts(y, &rows, class_count);
    best_split_indexed(x, y, &rows, &counts, class_count, candidate_features, 1)
}

fn best_split_indexed(
    x: &[Vec<f64>],
    y: &[usize],
    rows: &[usize],
    counts: &[usize],
    class_count: usize,
    candidate_features: &[usize],
    min_leaf: usize,
) -> Option<SplitChoice> {
    let total = rows.len();
    if total < 2 {
        return None;
    }
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return None; // pure node
    }
    let h_parent = entropy_of_counts(counts, total);
    let n = total as f64;
    let mut best: Option<SplitChoice> = None;
    let mut sorted: Vec<usize> = Vec::with_capacity(total);
    for &feature in candidate_features {
        sorted.clear();
        sorted.extend_from_slice(rows);
        sorted.sort_by(|&a, &b| x[a][feature].partial_cmp(&x[b][feature]).unwrap());
        let mut left_counts = vec![0usize; class_count];
        let mut left_n = 0usize;
        for i in 0..total - 1 {
            let r = sorted[i];
            left_counts[y[r]] += 1;
            left_n += 1;
            let a = x[r][feature];
            let b = x[sorted[i + 1]][feature];
            if a == b {
                continue;
            }
            let threshold = (a + b) / 2.0;
            if threshold >= b {
                // The midpoint rounded up to the next value; this candidate
                // cannot separate the two rows.
                continue;
            }
            let right_n = total - left_n;
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let mut right_counts = vec![0usize; class_count];
            for (rc, (&c, &lc)) in right_counts.iter_mut().zip(counts.iter().zip(&left_counts)) {
                *rc = c - lc;
            }
            let h_left = entropy_of_counts(&left_counts, left_n);
            let h_right = entropy_of_counts(&right_counts, right_n);
            let gain = h_parent
                - (left_n as f64 / n) * h_left
                - (right_n as f64 / n) * h_right;
            let better = match &best {
                None => gain > 0.0,
                Some(b) => gain > b.gain_bits,
            };
            if better {
                best = Some(SplitChoice {
                    feature,
                    threshold,
                    gain_bits: gain,
                });
            }
        }
    }
    best
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    class_count: usize,
    n_features: usize,
    subset_size: usize,
    cfg: &'a ForestConfig,
}

impl TreeBuilder<'_> {
    fn grow(&self, rows: Vec<usize>, subset: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> TreeNode {
        let counts = class_counts(self.y, &rows, self.class_count);
        let total = rows.len();
        let make_leaf = |counts: &[usize]| TreeNode::Leaf {
            distribution: ClassDistribution::from_counts(counts, total),
            count: total,
        };
        if self.cfg.max_depth.is_some_and(|d| depth >= d) {
            return make_leaf(&counts);
        }
        let node_subset: Vec<usize>;
        let candidates: &[usize] = if self.cfg.per_node_subsets {
            node_subset = draw_feature_subset(rng, self.n_features, self.subset_size);
            &node_subset
        } else {
            subset
        };
        let choice = best_split_indexed(
            self.x,
            self.y,
            &rows,
            &counts,
            self.class_count,
            candidates,
            self.cfg.min_leaf,
        );
        match choice {
            None => make_leaf(&counts),
            Some(split) => {
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                    .into_iter()
                    .partition(|&r| self.x[r][split.feature] <= split.threshold);
                TreeNode::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left: Box::new(self.grow(left_rows, subset, depth + 1, rng)),
                    right: Box::new(self.grow(right_rows, subset, depth + 1, rng)),
                }
            }
        }
    }
}

/// Draws `amount` distinct feature indices, returned in ascending order so
/// the split search always scans features low to high.
fn draw_feature_subset(rng: &mut ChaCha8Rng, n_features: usize, amount: usize) -> Vec<usize> {
    let mut subset = rand::seq::index::sample(rng, n_features, amount).into_vec();
    subset.sort_unstable();
    subset
}

/// Trains a forest on complete (imputed) feature rows.
///
/// Tree `t` draws its bootstrap rows and feature subset from the sub-stream
/// `(seed, "tree", t)`, so any tree can be rebuilt in isolation and parallel
/// training would give an identical model.
pub fn fit(
    x: &[Vec<f64>],
    y: &[usize],
    class_count: usize,
    feature_names: &[String],
    cfg: &ForestConfig,
) -> Result<RandomForestModel, ForestError> {
    if class_count < 2 {
        return Err(ForestError::TooFewClasses(class_count));
    }
    if x.is_empty() {
        return Err(ForestError::EmptyTrainingSet);
    }
    if x.len() != y.len() {
        return Err(ForestError::RowCountMismatch {
            features: x.len(),
            labels: y.len(),
        });
    }
    let n_features = x[0].len();
    if n_features == 0 {
        return Err(ForestError::BadSubsetSize {
            size: 0,
            features: 0,
        });
    }
    for (row, r) in x.iter().enumerate() {
        if r.len() != n_features {
            return Err(ForestError::WidthMismatch {
                row,
                expected: n_features,
                found: r.len(),
            });
        }
        for (feature, &v) in r.iter().enumerate() {
            if !v.is_finite() {
                return Err(ForestError::BadCell { row, feature });
            }
        }
    }
    for (row, &label) in y.iter().enumerate() {
        if label >= class_count {
            return Err(ForestError::LabelOutOfRange {
                row,
                label,
                classes: class_count,
            });
        }
    }
    if !feature_names.is_empty() && feature_names.len() != n_features {
        return Err(ForestError::NameCountMismatch {
            names: feature_names.len(),
            features: n_features,
        });
    }
    if cfg.n_trees < 1 {
        return Err(ForestError::ZeroTrees);
    }
    let subset_size = cfg.resolved_subset_size(n_features);
    if subset_size < 1 || subset_size > n_features {
        return Err(ForestError::BadSubsetSize {
            size: subset_size,
            features: n_features,
        });
    }

    let n = x.len();
    let builder = TreeBuilder {
        x,
        y,
        class_count,
        n_features,
        subset_size,
        cfg,
    };
    let mut trees = Vec::with_capacity(cfg.n_trees);
    for t in 0..cfg.n_trees {
        let mut rng = seeding::stream_rng(cfg.seed, "tree", t as u64);
        let rows: Vec<usize> = if cfg.bootstrap {
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let feature_subset = if cfg.per_node_subsets {
            (0..n_features).collect()
        } else {
            draw_feature_subset(&mut rng, n_features, subset_size)
        };
        let root = builder.grow(rows, &feature_subset, 0, &mut rng);
        trees.push(FittedTree {
            root,
            feature_subset,
        });
    }
    Ok(RandomForestModel {
        trees,
        config: cfg.clone(),
        class_count,
        n_features,
        feature_names: feature_names.to_vec(),
    })
}

impl RandomForestModel {
    /// [`fit`] on a dataset's features and labels.
    pub fn fit_dataset(d: &LabeledDataset, cfg: &ForestConfig) -> Result<Self, ForestError> {
        fit(
            &d.features,
            &d.labels,
            d.class_count(),
            &d.feature_names,
            cfg,
        )
    }

    /// Assembles a model from pre-built trees, validating widths and (in
    /// per-tree mode) subset sizes.
    pub fn from_parts(
        trees: Vec<FittedTree>,
        class_count: usize,
        n_features: usize,
        feature_names: Vec<String>,
        config: ForestConfig,
    ) -> Result<Self, ForestError> {
        if trees.is_empty() {
            return Err(ForestError::EmptyModel);
        }
        if class_count < 2 {
            return Err(ForestError::TooFewClasses(class_count));
        }
        if !feature_names.is_empty() && feature_names.len() != n_features {
            return Err(ForestError::NameCountMismatch {
                names: feature_names.len(),
                features: n_features,
            });
        }
        for tree in &trees {
            if tree.root.max_class_index() != class_count {
                return Err(ForestError::InvalidDistribution);
            }
            if tree.feature_subset.iter().any(|&f| f >= n_features) {
                return Err(ForestError::BadSubsetSize {
                    size: tree.feature_subset.len(),
                    features: n_features,
                });
            }
        }
        Ok(RandomForestModel {
            trees,
            config,
            class_count,
            n_features,
            feature_names,
        })
    }

    /// Mean of the leaf class frequencies across all trees.
    pub fn predict_proba(&self, x: &[f64]) -> Result<ClassDistribution, ForestError> {
        if x.len() != self.n_features {
            return Err(ForestError::ProbeWidth {
                expected: self.n_features,
                found: x.len(),
            });
        }
        let mut sums = vec![0.0f64; self.class_count];
        for tree in &self.trees {
            let leaf = tree.root.route(x);
            for (s, &p) in sums.iter_mut().zip(leaf.probs()) {
                *s += p;
            }
        }
        let t = self.trees.len() as f64;
        for s in &mut sums {
            *s /= t;
        }
        Ok(ClassDistribution { probs: sums })
    }

    /// Class with the highest mean probability; ties go to the lowest index.
    pub fn predict(&self, x: &[f64]) -> Result<usize, ForestError> {
        Ok(self.predict_proba(x)?.argmax())
    }

    pub fn trees(&self) -> &[FittedTree] {
        &self.trees
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }
}
