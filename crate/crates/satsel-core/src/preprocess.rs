//! Feature cleaning: constant-column removal, trivial-instance removal,
//! standardization, and k-nearest-neighbour imputation.
//!
//! The steps compose in a fixed order (drop features, drop instances,
//! standardize, impute) captured by [`PreprocessPipeline`], which can be
//! fitted on a training set and applied to held-out rows without leaking
//! test statistics into the fit.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{is_missing, DataError, FeatureMatrix, InstanceId, LabeledDataset};
use crate::math;

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("every feature was dropped as uninformative")]
    AllFeaturesDropped,
    #[error("every instance was dropped as trivial")]
    AllInstancesDropped,
    #[error("feature {0:?} is constant; drop uninformative columns before standardizing")]
    ConstantFeature(String),
    #[error("feature {0:?} has fewer than two observed values")]
    TooFewObserved(String),
    #[error("neighbour count must be at least 1, got {0}")]
    InvalidNeighbourCount(usize),
    #[error("input is missing fitted feature {0:?}")]
    MissingFeature(String),
    #[error("matrix has no rows")]
    EmptyMatrix,
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Why an instance was removed during preprocessing or dataset assembly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedInstance {
    pub id: InstanceId,
    pub reason: String,
}

/// Summary of what preprocessing removed and imputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub dropped_features: Vec<String>,
    pub dropped_instances: Vec<DroppedInstance>,
    pub imputed_cells: usize,
    /// `imputed_cells` over the total cell count after both drop steps.
    pub imputed_fraction: f64,
}

/// Per-feature mean and sample standard deviation fitted on a reference set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    feature_names: Vec<String>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }
}

/// Removes every feature whose observed values have standard deviation
/// exactly zero, including columns with fewer than two observed values.
/// Returns the surviving matrix and the dropped feature names.
pub fn drop_constant_features(
    f: &FeatureMatrix,
) -> Result<(FeatureMatrix, Vec<String>), PreprocessError> {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for j in 0..f.n_features() {
        if column_is_informative(f, j) {
            kept.push(j);
        } else {
            dropped.push(f.feature_names()[j].clone());
        }
    }
    if kept.is_empty() {
        return Err(PreprocessError::AllFeaturesDropped);
    }
    Ok((f.select_features(&kept), dropped))
}

fn column_is_informative(f: &FeatureMatrix, j: usize) -> bool {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut observed = 0usize;
    for row in f.rows() {
        let x = row[j];
        if !is_missing(x) {
            observed += 1;
            min = math::fmin(min, x);
            max = math::fmax(max, x);
        }
    }
    observed >= 2 && min < max
}

/// Removes instances whose runtime rows are uniformly negligible: mean and
/// sample standard deviation both below `threshold_s`. Such instances are
/// solved almost instantly by every solver, so no selection matters.
pub fn drop_trivial_instances(
    d: &LabeledDataset,
    threshold_s: f64,
) -> Result<(LabeledDataset, Vec<InstanceId>), PreprocessError> {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (i, runtimes) in d.runtimes.iter().enumerate() {
        let mean = math::mean(runtimes);
        let std = math::sample_std(runtimes);
        if mean < threshold_s && std < threshold_s {
            dropped.push(d.instance_ids[i].clone());
        } else {
            kept.push(i);
        }
    }
    if kept.is_empty() {
        return Err(PreprocessError::AllInstancesDropped);
    }
    Ok((d.select_rows(&kept), dropped))
}

/// Fits per-feature mean and sample standard deviation over observed cells.
/// Fails on any column with fewer than two observed values or zero spread;
/// run [`drop_constant_features`] first.
pub fn fit_standardizer(f: &FeatureMatrix) -> Result<Standardizer, PreprocessError> {
    let mut means = Vec::with_capacity(f.n_features());
    let mut stds = Vec::with_capacity(f.n_features());
    for j in 0..f.n_features() {
        let observed = f.observed_column(j);
        if observed.len() < 2 {
            return Err(PreprocessError::TooFewObserved(f.feature_names()[j].clone()));
        }
        let std = math::sample_std(&observed);
        if std == 0.0 {
            return Err(PreprocessError::ConstantFeature(f.feature_names()[j].clone()));
        }
        means.push(math::mean(&observed));
        stds.push(std);
    }
    Ok(Standardizer {
        feature_names: f.feature_names().to_vec(),
        means,
        stds,
    })
}

/// Maps every observed cell to `(x - mean) / std`; missing cells stay
/// missing. The input must carry exactly the fitted feature names.
pub fn apply_standardizer(
    s: &Standardizer,
    f: &FeatureMatrix,
) -> Result<FeatureMatrix, PreprocessError> {
    if f.feature_names() != s.feature_names.as_slice() {
        let missing = s
            .feature_names
            .iter()
            .find(|name| !f.feature_names().contains(name))
            .cloned()
            .unwrap_or_else(|| "feature set mismatch".to_string());
        return Err(PreprocessError::MissingFeature(missing));
    }
    let values = f
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &x)| {
                    if is_missing(x) {
                        x
                    } else {
                        (x - s.means[j]) / s.stds[j]
                    }
                })
                .collect()
        })
        .collect();
    Ok(f.with_values(values))
}

/// Fills every missing cell from the k nearest neighbours within the same
/// matrix. Distances use only features observed in both rows, scaled by the
/// square root of the shared-feature count; neighbour candidates must have
/// the target feature observed. With no usable candidate the cell falls back
/// to the column's observed mean. Reads come only from the pre-imputation
/// matrix, so cell order never matters.
pub fn knn_impute(
    f: &FeatureMatrix,
    k: usize,
) -> Result<(FeatureMatrix, usize), PreprocessError> {
    if k < 1 {
        return Err(PreprocessError::InvalidNeighbourCount(k));
    }
    let reference = f.rows();
    let column_means = reference_column_means(f);
    let mut imputed = 0usize;
    let values = reference
        .iter()
        .enumerate()
        .map(|(i, row)| {
            impute_row(row, reference, Some(i), k, &column_means, &mut imputed)
        })
        .collect();
    Ok((f.with_values(values), imputed))
}

fn reference_column_means(f: &FeatureMatrix) -> Vec<f64> {
    (0..f.n_features())
        .map(|j| math::mean(&f.observed_column(j)))
        .collect()
}

fn impute_row(
    row: &[f64],
    reference: &[Vec<f64>],
    self_index: Option<usize>,
    k: usize,
    column_means: &[f64],
    imputed: &mut usize,
) -> Vec<f64> {
    row.iter()
        .enumerate()
        .map(|(feat, &x)| {
            if is_missing(x) {
                *imputed += 1;
                impute_cell(row, reference, self_index, feat, k, column_means[feat])
            } else {
                x
            }
        })
        .collect()
}

fn impute_cell(
    row: &[f64],
    reference: &[Vec<f64>],
    self_index: Option<usize>,
    feat: usize,
    k: usize,
    fallback: f64,
) -> f64 {
    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for (j, other) in reference.iter().enumerate() {
        if Some(j) == self_index || is_missing(other[feat]) {
            continue;
        }
        if let Some(d) = shared_feature_distance(row, other) {
            candidates.push((d, j));
        }
    }
    if candidates.is_empty() {
        return fallback;
    }
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let take = k.min(candidates.len());
    let sum: f64 = candidates[..take].iter().map(|&(_, j)| reference[j][feat]).sum();
    sum / take as f64
}

/// Euclidean distance over features observed in both rows, divided by the
/// square root of the shared count; `None` when no feature is shared.
fn shared_feature_distance(a: &[f64], b: &[f64]) -> Option<f64> {
    let mut sum_sq = 0.0;
    let mut shared = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        if !is_missing(x) && !is_missing(y) {
            let d = x - y;
            sum_sq += d * d;
            shared += 1;
        }
    }
    if shared == 0 {
        None
    } else {
        Some(math::sqrt(sum_sq) / math::sqrt(shared as f64))
    }
}

/// A fitted preprocessing transform: kept feature names, standardizer,
/// neighbour reference for imputation, and a final per-column affine that
/// restores exact zero mean and unit sample deviation after imputation.
///
/// The final rescaling makes the pipeline idempotent: rerunning it on its
/// own output refits a standardizer that is the identity up to rounding.
/// It never changes which splits a tree can express, since each column map
/// is increasing and affine.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessPipeline {
    standardizer: Standardizer,
    /// Standardized, un-imputed training rows; the neighbour pool for
    /// transform-time imputation.
    neighbour_matrix: FeatureMatrix,
    final_means: Vec<f64>,
    final_stds: Vec<f64>,
    neighbour_count: usize,
}

impl PreprocessPipeline {
    /// Fits on a feature matrix alone (no runtime-based instance dropping):
    /// drops constant columns, standardizes, imputes, and rescales. Returns
    /// the fitted pipeline, the processed matrix, and a report.
    pub fn fit_features(
        f: &FeatureMatrix,
        neighbour_count: usize,
    ) -> Result<(PreprocessPipeline, FeatureMatrix, PreprocessReport), PreprocessError> {
        if neighbour_count < 1 {
            return Err(PreprocessError::InvalidNeighbourCount(neighbour_count));
        }
        if f.n_instances() == 0 {
            return Err(PreprocessError::EmptyMatrix);
        }
        let (kept, dropped_features) = drop_constant_features(f)?;
        let standardizer = fit_standardizer(&kept)?;
        let standardized = apply_standardizer(&standardizer, &kept)?;
        let (imputed_matrix, imputed_cells) = knn_impute(&standardized, neighbour_count)?;
        let (final_means, final_stds) = full_column_stats(&imputed_matrix);
        let pipeline = PreprocessPipeline {
            standardizer,
            neighbour_matrix: standardized,
            final_means,
            final_stds,
            neighbour_count,
        };
        let out = pipeline.apply_final_affine(&imputed_matrix);
        let total_cells = out.n_instances() * out.n_features();
        let report = PreprocessReport {
            dropped_features,
            dropped_instances: Vec::new(),
            imputed_cells,
            imputed_fraction: imputed_cells as f64 / total_cells as f64,
        };
        Ok((pipeline, out, report))
    }

    /// Fits on a labeled dataset: drops constant columns, drops trivial
    /// instances, then standardizes, imputes, and rescales the survivors.
    /// Columns that become constant once trivial instances are gone are
    /// dropped as well, so standardization cannot hit zero spread.
    pub fn fit(
        d: &LabeledDataset,
        neighbour_count: usize,
        trivial_threshold_s: f64,
    ) -> Result<(PreprocessPipeline, LabeledDataset, PreprocessReport), PreprocessError> {
        let features = d.feature_matrix();
        let (kept_features, mut dropped_features) = drop_constant_features(&features)?;
        let kept_dataset = d.with_feature_matrix(&kept_features)?;
        let (surviving, dropped_ids) =
            drop_trivial_instances(&kept_dataset, trivial_threshold_s)?;
        let (pipeline, processed, mut report) =
            Self::fit_features(&surviving.feature_matrix(), neighbour_count)?;
        dropped_features.extend(report.dropped_features);
        report.dropped_features = dropped_features;
        report.dropped_instances = dropped_ids
            .into_iter()
            .map(|id| DroppedInstance {
                id,
                reason: "trivial-runtimes".to_string(),
            })
            .collect();
        let out = surviving.with_feature_matrix(&processed)?;
        Ok((pipeline, out, report))
    }

    /// Applies the fitted transform to new rows: select the fitted features
    /// by name, standardize, impute against the training neighbour pool, and
    /// apply the final rescaling. No rows are dropped.
    pub fn transform(&self, f: &FeatureMatrix) -> Result<FeatureMatrix, PreprocessError> {
        let mut selected = Vec::with_capacity(self.standardizer.feature_names.len());
        for name in &self.standardizer.feature_names {
            match f.feature_names().iter().position(|n| n == name) {
                Some(j) => selected.push(j),
                None => return Err(PreprocessError::MissingFeature(name.clone())),
            }
        }
        let narrowed = f.select_features(&selected);
        let standardized = apply_standardizer(&self.standardizer, &narrowed)?;
        let column_means = reference_column_means(&self.neighbour_matrix);
        let mut imputed = 0usize;
        let values = standardized
            .rows()
            .iter()
            .map(|row| {
                impute_row(
                    row,
                    self.neighbour_matrix.rows(),
                    None,
                    self.neighbour_count,
                    &column_means,
                    &mut imputed,
                )
            })
            .collect();
        Ok(self.apply_final_affine(&standardized.with_values(values)))
    }

    /// [`PreprocessPipeline::transform`] plus reassembly into a dataset with
    /// the original labels and runtimes.
    pub fn transform_dataset(&self, d: &LabeledDataset) -> Result<LabeledDataset, PreprocessError> {
        let transformed = self.transform(&d.feature_matrix())?;
        Ok(d.with_feature_matrix(&transformed)?)
    }

    pub fn feature_names(&self) -> &[String] {
        self.standardizer.feature_names()
    }

    pub fn neighbour_count(&self) -> usize {
        self.neighbour_count
    }

    fn apply_final_affine(&self, f: &FeatureMatrix) -> FeatureMatrix {
        let values = f
            .rows()
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, &x)| (x - self.final_means[j]) / self.final_stds[j])
                    .collect()
            })
            .collect();
        f.with_values(values)
    }
}

/// Mean and sample standard deviation of every column over all cells
/// (callers guarantee completeness and nonzero spread).
fn full_column_stats(f: &FeatureMatrix) -> (Vec<f64>, Vec<f64>) {
    let mut means = Vec::with_capacity(f.n_features());
    let mut stds = Vec::with_capacity(f.n_features());
    for j in 0..f.n_features() {
        let column: Vec<f64> = f.rows().iter().map(|row| row[j]).collect();
        means.push(math::mean(&column));
        let std = math::sample_std(&column);
        stds.push(if std > 0.0 { std } else { 1.0 });
    }
    (means, stds)
}
