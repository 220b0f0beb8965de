//! Runtime and feature tables, portfolio slicing, and best-solver labels.
//!
//! A [`RuntimeMatrix`] holds per-instance, per-solver runtimes with a
//! censoring cutoff: a cell equal to the cutoff means the solver did not
//! finish. A [`FeatureMatrix`] holds per-instance numeric features where
//! `NaN` marks a missing value. Joining the two yields a [`LabeledDataset`]
//! whose label is the index of the fastest solver for each instance.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("instance id must be non-empty")]
    EmptyInstanceId,
    #[error("duplicate instance id {0:?}")]
    DuplicateInstance(String),
    #[error("duplicate solver name {0:?}")]
    DuplicateSolver(String),
    #[error("duplicate feature name {0:?}")]
    DuplicateFeature(String),
    #[error("matrix has no solvers")]
    NoSolvers,
    #[error("matrix has no instances")]
    NoInstances,
    #[error("cutoff must be positive, got {0}")]
    NonPositiveCutoff(f64),
    #[error("instance {id:?}: expected {expected} values, found {found}")]
    RowWidth {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("instance {id:?}, solver {solver:?}: negative runtime {value}")]
    NegativeRuntime {
        id: String,
        solver: String,
        value: f64,
    },
    #[error("instance {id:?}, solver {solver:?}: runtime is not a number")]
    NonFiniteRuntime { id: String, solver: String },
    #[error("instance {id:?}, feature {feature:?}: value is infinite")]
    InfiniteFeature { id: String, feature: String },
    #[error("portfolio must contain at least one solver")]
    EmptyPortfolio,
    #[error("unknown solvers: {}", .0.join(", "))]
    UnknownSolvers(Vec<String>),
    #[error("feature and runtime tables share no instances")]
    EmptyJoin,
    #[error("dataset fields have mismatched lengths")]
    LengthMismatch,
    #[error("instance {id:?}: label {label} out of range for {solvers} solvers")]
    LabelOutOfRange {
        id: String,
        label: usize,
        solvers: usize,
    },
    #[error("instance {id:?}: label {label} does not achieve the row minimum")]
    LabelNotArgmin { id: String, label: usize },
}

/// Opaque instance identifier; the join key between runtime and feature
/// tables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InstanceId(String);

impl InstanceId {
    pub fn new(id: impl Into<String>) -> Self {
        InstanceId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl core::fmt::Display for InstanceId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for InstanceId {
    fn from(s: &str) -> Self {
        InstanceId(s.to_string())
    }
}

impl From<String> for InstanceId {
    fn from(s: String) -> Self {
        InstanceId(s)
    }
}

/// An ordered, duplicate-free selection of solver names. Order defines label
/// indices and tie-break priority.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Portfolio {
    solver_names: Vec<String>,
}

/// Names accepted by [`Portfolio::from_preset`].
pub const PRESET_NAMES: [&str; 3] = ["preset3", "preset6", "preset10"];

const PRESET10_SOLVERS: [&str; 10] = [
    "Glucose",
    "Minisat",
    "Lingeling",
    "Restartsat",
    "Lrgshr",
    "Mxc09",
    "Rcl",
    "Precosat",
    "MphaseSAT64",
    "Qutersat",
];

impl Portfolio {
    pub fn new(solver_names: Vec<String>) -> Result<Self, DataError> {
        if solver_names.is_empty() {
            return Err(DataError::EmptyPortfolio);
        }
        let mut seen = BTreeSet::new();
        for name in &solver_names {
            if !seen.insert(name.clone()) {
                return Err(DataError::DuplicateSolver(name.clone()));
            }
        }
        Ok(Portfolio { solver_names })
    }

    /// The three-solver portfolio: Glucose, Minisat, Lingeling.
    pub fn preset3() -> Self {
        Self::preset(3)
    }

    /// preset3 plus Restartsat, Lrgshr, Mxc09.
    pub fn preset6() -> Self {
        Self::preset(6)
    }

    /// preset6 plus Rcl, Precosat, MphaseSAT64, Qutersat.
    pub fn preset10() -> Self {
        Self::preset(10)
    }

    fn preset(n: usize) -> Self {
        Portfolio {
            solver_names: PRESET10_SOLVERS[..n].iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Looks up a named preset; `None` for unknown names.
    pub fn from_preset(name: &str) -> Option<Self> {
        match name {
            "preset3" => Some(Self::preset3()),
            "preset6" => Some(Self::preset6()),
            "preset10" => Some(Self::preset10()),
            _ => None,
        }
    }

    pub fn solver_names(&self) -> &[String] {
        &self.solver_names
    }

    pub fn len(&self) -> usize {
        self.solver_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solver_names.is_empty()
    }
}

/// Instances x solvers runtime table with a censoring cutoff.
///
/// Cells are clamped into `[0, cutoff_s]`; a cell equal to `cutoff_s` means
/// the run was censored (unsolved within the cutoff).
#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeMatrix {
    solver_names: Vec<String>,
    ids: Vec<InstanceId>,
    rows: Vec<Vec<f64>>,
    cutoff_s: f64,
    index: BTreeMap<InstanceId, usize>,
}

/// Best-solver labels plus the instances no solver finished.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    pub labels: BTreeMap<InstanceId, usize>,
    pub unsolved: BTreeSet<InstanceId>,
}

/// Per-instance minimum runtimes and their average.
#[derive(Debug, Clone, PartialEq)]
pub struct VbsStats {
    /// Row-order (instance, min runtime) pairs.
    pub per_instance_min: Vec<(InstanceId, f64)>,
    /// Average over instances of the per-instance minimum runtime.
    pub vbs_avg_s: f64,
}

impl RuntimeMatrix {
    /// Builds a matrix from `(id, runtimes)` rows, clamping cells at or above
    /// the cutoff down to exactly `cutoff_s`. Returns the matrix and the
    /// number of clamped cells so callers can warn about penalty values.
    pub fn from_rows(
        solver_names: Vec<String>,
        rows: Vec<(InstanceId, Vec<f64>)>,
        cutoff_s: f64,
    ) -> Result<(Self, usize), DataError> {
        if solver_names.is_empty() {
            return Err(DataError::NoSolvers);
        }
        if !(cutoff_s > 0.0) {
            return Err(DataError::NonPositiveCutoff(cutoff_s));
        }
        let mut seen_solvers = BTreeSet::new();
        for name in &solver_names {
            if !seen_solvers.insert(name.clone()) {
                return Err(DataError::DuplicateSolver(name.clone()));
            }
        }
        let mut ids = Vec::with_capacity(rows.len());
        let mut values = Vec::with_capacity(rows.len());
        let mut index = BTreeMap::new();
        let mut clamped = 0usize;
        for (pos, (id, mut row)) in rows.into_iter().enumerate() {
            if id.as_str().is_empty() {
                return Err(DataError::EmptyInstanceId);
            }
            if row.len() != solver_names.len() {
                return Err(DataError::RowWidth {
                    id: id.as_str().to_string(),
                    expected: solver_names.len(),
                    found: row.len(),
                });
            }
            for (j, cell) in row.iter_mut().enumerate() {
                if cell.is_nan() || cell.is_infinite() && *cell < 0.0 {
                    return Err(DataError::NonFiniteRuntime {
                        id: id.as_str().to_string(),
                        solver: solver_names[j].clone(),
                    });
                }
                if *cell < 0.0 {
                    return Err(DataError::NegativeRuntime {
                        id: id.as_str().to_string(),
                        solver: solver_names[j].clone(),
                        value: *cell,
                    });
                }
                if *cell >= cutoff_s {
                    if *cell > cutoff_s {
                        clamped += 1;
                    }
                    *cell = cutoff_s;
                }
            }
            if index.insert(id.clone(), pos).is_some() {
                return Err(DataError::DuplicateInstance(id.as_str().to_string()));
            }
            ids.push(id);
            values.push(row);
        }
        Ok((
            RuntimeMatrix {
                solver_names,
                ids,
                rows: values,
                cutoff_s,
                index,
            },
            clamped,
        ))
    }

    pub fn solver_names(&self) -> &[String] {
        &self.solver_names
    }

    pub fn ids(&self) -> &[InstanceId] {
        &self.ids
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn cutoff_s(&self) -> f64 {
        self.cutoff_s
    }

    pub fn n_instances(&self) -> usize {
        self.ids.len()
    }

    pub fn row_for(&self, id: &InstanceId) -> Option<&[f64]> {
        self.index.get(id).map(|&i| self.rows[i].as_slice())
    }

    /// Projects the matrix onto the portfolio's columns, preserving row order
    /// and cutoff.
    pub fn slice_portfolio(&self, portfolio: &Portfolio) -> Result<RuntimeMatrix, DataError> {
        let mut columns = Vec::with_capacity(portfolio.len());
        let mut missing = Vec::new();
        for name in portfolio.solver_names() {
            match self.solver_names.iter().position(|s| s == name) {
                Some(j) => columns.push(j),
                None => missing.push(name.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(DataError::UnknownSolvers(missing));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| columns.iter().map(|&j| row[j]).collect())
            .collect();
        Ok(RuntimeMatrix {
            solver_names: portfolio.solver_names().to_vec(),
            ids: self.ids.clone(),
            rows,
            cutoff_s: self.cutoff_s,
            index: self.index.clone(),
        })
    }

    /// Labels every instance with the index of its fastest solver. Ties break
    /// toward the lowest portfolio index. Instances where every runtime equals
    /// the cutoff are reported as unsolved and receive no label.
    pub fn label_best_solver(&self) -> Labeling {
        let mut labels = BTreeMap::new();
        let mut unsolved = BTreeSet::new();
        for (id, row) in self.ids.iter().zip(&self.rows) {
            if row.iter().all(|&t| t == self.cutoff_s) {
                unsolved.insert(id.clone());
            } else {
                labels.insert(id.clone(), argmin(row));
            }
        }
        Labeling { labels, unsolved }
    }

    /// Per-instance minimum runtimes and the virtual-best-solver average
    /// (the sum of per-instance best runtimes divided by the instance count).
    pub fn vbs_stats(&self) -> Result<VbsStats, DataError> {
        if self.ids.is_empty() {
            return Err(DataError::NoInstances);
        }
        let per_instance_min: Vec<(InstanceId, f64)> = self
            .ids
            .iter()
            .zip(&self.rows)
            .map(|(id, row)| (id.clone(), row_min(row)))
            .collect();
        let total: f64 = per_instance_min.iter().map(|(_, m)| m).sum();
        Ok(VbsStats {
            vbs_avg_s: total / per_instance_min.len() as f64,
            per_instance_min,
        })
    }
}

pub(crate) fn row_min(row: &[f64]) -> f64 {
    row.iter().cloned().fold(f64::INFINITY, f64::min)
}

pub(crate) fn argmin(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v < row[best] {
            best = j;
        }
    }
    best
}

/// Instances x named numeric features. `NaN` cells are missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    feature_names: Vec<String>,
    ids: Vec<InstanceId>,
    values: Vec<Vec<f64>>,
    index: BTreeMap<InstanceId, usize>,
}

pub(crate) fn is_missing(x: f64) -> bool {
    x.is_nan()
}

impl FeatureMatrix {
    pub fn from_rows(
        feature_names: Vec<String>,
        rows: Vec<(InstanceId, Vec<f64>)>,
    ) -> Result<Self, DataError> {
        let mut seen = BTreeSet::new();
        for name in &feature_names {
            if !seen.insert(name.clone()) {
                return Err(DataError::DuplicateFeature(name.clone()));
            }
        }
        let mut ids = Vec::with_capacity(rows.len());
        let mut values = Vec::with_capacity(rows.len());
        let mut index = BTreeMap::new();
        for (pos, (id, row)) in rows.into_iter().enumerate() {
            if id.as_str().is_empty() {
                return Err(DataError::EmptyInstanceId);
            }
            if row.len() != feature_names.len() {
                return Err(DataError::RowWidth {
                    id: id.as_str().to_string(),
                    expected: feature_names.len(),
                    found: row.len(),
                });
            }
            for (j, &cell) in row.iter().enumerate() {
                if cell.is_infinite() {
                    return Err(DataError::InfiniteFeature {
                        id: id.as_str().to_string(),
                        feature: feature_names[j].clone(),
                    });
                }
            }
            if index.insert(id.clone(), pos).is_some() {
                return Err(DataError::DuplicateInstance(id.as_str().to_string()));
            }
            ids.push(id);
            values.push(row);
        }
        Ok(FeatureMatrix {
            feature_names,
            ids,
            values,
            index,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn ids(&self) -> &[InstanceId] {
        &self.ids
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn n_instances(&self) -> usize {
        self.ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row_for(&self, id: &InstanceId) -> Option<&[f64]> {
        self.index.get(id).map(|&i| self.values[i].as_slice())
    }

    /// Number of missing (`NaN`) cells.
    pub fn missing_cells(&self) -> usize {
        self.values
            .iter()
            .map(|row| row.iter().filter(|&&x| is_missing(x)).count())
            .sum()
    }

    /// The observed (non-missing) values of feature `j`.
    pub fn observed_column(&self, j: usize) -> Vec<f64> {
        self.values
            .iter()
            .map(|row| row[j])
            .filter(|&x| !is_missing(x))
            .collect()
    }

    pub(crate) fn with_values(&self, values: Vec<Vec<f64>>) -> FeatureMatrix {
        debug_assert_eq!(values.len(), self.values.len());
        FeatureMatrix {
            feature_names: self.feature_names.clone(),
            ids: self.ids.clone(),
            values,
            index: self.index.clone(),
        }
    }

    /// Keeps only the features at `kept` (in the given order).
    pub fn select_features(&self, kept: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            feature_names: kept.iter().map(|&j| self.feature_names[j].clone()).collect(),
            ids: self.ids.clone(),
            values: self
                .values
                .iter()
                .map(|row| kept.iter().map(|&j| row[j]).collect())
                .collect(),
            index: self.index.clone(),
        }
    }

    /// Keeps only the rows at `kept` (in the given order).
    pub fn select_rows(&self, kept: &[usize]) -> FeatureMatrix {
        let ids: Vec<InstanceId> = kept.iter().map(|&i| self.ids[i].clone()).collect();
        let values: Vec<Vec<f64>> = kept.iter().map(|&i| self.values[i].clone()).collect();
        let index = ids
            .iter()
            .enumerate()
            .map(|(pos, id)| (id.clone(), pos))
            .collect();
        FeatureMatrix {
            feature_names: self.feature_names.clone(),
            ids,
            values,
            index,
        }
    }
}

/// Joined features, labels, and retained runtimes for a set of instances.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub instance_ids: Vec<InstanceId>,
    pub feature_names: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub runtimes: Vec<Vec<f64>>,
    pub solver_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(
        instance_ids: Vec<InstanceId>,
        feature_names: Vec<String>,
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        runtimes: Vec<Vec<f64>>,
        solver_names: Vec<String>,
    ) -> Result<Self, DataError> {
        let n = instance_ids.len();
        if features.len() != n || labels.len() != n || runtimes.len() != n {
            return Err(DataError::LengthMismatch);
        }
        for ((id, &label), runtime_row) in instance_ids.iter().zip(&labels).zip(&runtimes) {
            if label >= solver_names.len() {
                return Err(DataError::LabelOutOfRange {
                    id: id.as_str().to_string(),
                    label,
                    solvers: solver_names.len(),
                });
            }
            if runtime_row[label] != row_min(runtime_row) {
                return Err(DataError::LabelNotArgmin {
                    id: id.as_str().to_string(),
                    label,
                });
            }
        }
        Ok(LabeledDataset {
            instance_ids,
            feature_names,
            features,
            labels,
            runtimes,
            solver_names,
        })
    }

    pub fn len(&self) -> usize {
        self.instance_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instance_ids.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.solver_names.len()
    }

    /// The features as a [`FeatureMatrix`] (runtimes and labels dropped).
    pub fn feature_matrix(&self) -> FeatureMatrix {
        FeatureMatrix::from_rows(
            self.feature_names.clone(),
            self.instance_ids
                .iter()
                .cloned()
                .zip(self.features.iter().cloned())
                .collect(),
        )
        .expect("dataset invariants imply a valid feature matrix")
    }

    /// Replaces the feature block, e.g. after preprocessing.
    pub fn with_feature_matrix(&self, f: &FeatureMatrix) -> Result<Self, DataError> {
        if f.n_instances() != self.len() {
            return Err(DataError::LengthMismatch);
        }
        LabeledDataset::new(
            self.instance_ids.clone(),
            f.feature_names().to_vec(),
            f.rows().to_vec(),
            self.labels.clone(),
            self.runtimes.clone(),
            self.solver_names.clone(),
        )
    }

    /// Keeps only the instances at `kept` (in the given order).
    pub fn select_rows(&self, kept: &[usize]) -> LabeledDataset {
        LabeledDataset {
            instance_ids: kept.iter().map(|&i| self.instance_ids[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            features: kept.iter().map(|&i| self.features[i].clone()).collect(),
            labels: kept.iter().map(|&i| self.labels[i]).collect(),
            runtimes: kept.iter().map(|&i| self.runtimes[i].clone()).collect(),
            solver_names: self.solver_names.clone(),
        }
    }

    /// True when no feature cell is missing.
    pub fn features_complete(&self) -> bool {
        self.features
            .iter()
            .all(|row| row.iter().all(|&x| !is_missing(x)))
    }
}

/// Inner join of a feature matrix and a runtime matrix on instance id.
///
/// Row order follows the runtime matrix restricted to the joined ids.
/// Instances missing from either side, or unsolved by every portfolio solver,
/// end up in the dropped set.
pub fn join(
    features: &FeatureMatrix,
    runtimes: &RuntimeMatrix,
) -> Result<(LabeledDataset, BTreeSet<InstanceId>), DataError> {
    let labeling = runtimes.label_best_solver();
    let mut dropped: BTreeSet<InstanceId> = BTreeSet::new();
    let mut ids = Vec::new();
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut t = Vec::new();
    let feature_ids: BTreeSet<&InstanceId> = features.ids().iter().collect();
    for (id, runtime_row) in runtimes.ids().iter().zip(runtimes.rows()) {
        if !feature_ids.contains(id) {
            dropped.insert(id.clone());
            continue;
        }
        match labeling.labels.get(id) {
            Some(&label) => {
                ids.push(id.clone());
                x.push(features.row_for(id).expect("id present").to_vec());
                y.push(label);
                t.push(runtime_row.clone());
            }
            None => {
                dropped.insert(id.clone());
            }
        }
    }
    let runtime_ids: BTreeSet<&InstanceId> = runtimes.ids().iter().collect();
    for id in features.ids() {
        if !runtime_ids.contains(id) {
            dropped.insert(id.clone());
        }
    }
    if ids.is_empty() {
        return Err(DataError::EmptyJoin);
    }
    let dataset = LabeledDataset::new(
        ids,
        features.feature_names().to_vec(),
        x,
        y,
        t,
        runtimes.solver_names().to_vec(),
    )?;
    Ok((dataset, dropped))
}
