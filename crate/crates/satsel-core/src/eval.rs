//! Selection metrics, cross-validation, learning curves, and a synthetic
//! dataset generator for desk-scale experiments.
//!
//! Accuracy counts a prediction as correct when the chosen solver attains
//! the instance's minimum runtime, so ties with the stored label are never
//! penalized. Runtime regret (`mes`) measures how much slower the chosen
//! solver is than the per-instance best, in seconds and relative to the
//! virtual-best-solver average.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::active::{
    run_active_loop, ActiveConfig, ActiveError, DatasetOracle, QueryStrategy,
};
use crate::data::{row_min, DataError, InstanceId, LabeledDataset};
use crate::forest::{ForestConfig, ForestError, RandomForestModel};
use crate::math;
use crate::preprocess::{PreprocessError, PreprocessPipeline};
use crate::seeding;

/// Runtime threshold below which an instance counts as trivially solved.
pub const DEFAULT_TRIVIAL_THRESHOLD_S: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("evaluation set is empty")]
    EmptySet,
    #[error("prediction and runtime counts differ: {predictions} vs {runtimes}")]
    LengthMismatch { predictions: usize, runtimes: usize },
    #[error("row {row}: predicted solver {pred} out of range for {solvers} solvers")]
    PredictionOutOfRange {
        row: usize,
        pred: usize,
        solvers: usize,
    },
    #[error("virtual best solver average is zero but regret is positive")]
    DegenerateVbs,
    #[error("cross-validation needs at least 2 folds, got {0}")]
    BadFoldCount(usize),
    #[error("{n} instances cannot fill {folds} folds")]
    TooFewInstances { n: usize, folds: usize },
    #[error("test fraction {0} outside (0, 1)")]
    BadTestFraction(f64),
    #[error("holdout split left no {0} instances")]
    DegenerateSplit(&'static str),
    #[error("synthetic dataset: {0}")]
    SyntheticParams(String),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Active(#[from] ActiveError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Selection quality on one evaluation set.
///
/// `acc` is exact best-solver accuracy, `acc5` counts picks within 5 s of
/// the best, `mes_sec` is the mean runtime regret, and `mes_pct` is that
/// regret relative to the virtual-best-solver average `vbs_avg_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub acc: f64,
    pub mes_sec: f64,
    pub mes_pct: f64,
    pub acc5: f64,
    pub vbs_avg_s: f64,
    pub n: usize,
}

/// One evaluated refit of one strategy's run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurvePoint {
    pub strategy: QueryStrategy,
    pub seed: u64,
    pub train_size: usize,
    pub test_size: usize,
    pub acc: f64,
}

/// Tolerance for counting a pick as "as good as the best" in `acc5`.
pub const LENIENT_BAND_S: f64 = 5.0;

/// Scores predicted solver indices against the true runtime rows.
pub fn compute_metrics(
    predictions: &[usize],
    runtimes: &[Vec<f64>],
) -> Result<MetricsReport, EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::EmptySet);
    }
    if predictions.len() != runtimes.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            runtimes: runtimes.len(),
        });
    }
    let n = predictions.len();
    let mut exact = 0usize;
    let mut lenient = 0usize;
    let mut regret_total = 0.0;
    let mut vbs_total = 0.0;
    for (row, (&pred, times)) in predictions.iter().zip(runtimes).enumerate() {
        if pred >= times.len() {
            return Err(EvalError::PredictionOutOfRange {
                row,
                pred,
                solvers: times.len(),
            });
        }
        let best = row_min(times);
        let regret = times[pred] - best;
        if times[pred] == best {
            exact += 1;
        }
        if regret <= LENIENT_BAND_S {
            lenient += 1;
        }
        regret_total += regret;
        vbs_total += best;
    }
    let mes_sec = regret_total / n as f64;
    let vbs_avg_s = vbs_total / n as f64;
    let mes_pct = relative_regret(mes_sec, vbs_avg_s)?;
    Ok(MetricsReport {
        acc: exact as f64 / n as f64,
        mes_sec,
        mes_pct,
        acc5: lenient as f64 / n as f64,
        vbs_avg_s,
        n,
    })
}

fn relative_regret(mes_sec: f64, vbs_avg_s: f64) -> Result<f64, EvalError> {
    if vbs_avg_s > 0.0 {
        Ok(mes_sec / vbs_avg_s)
    } else if mes_sec == 0.0 {
        Ok(0.0)
    } else {
        Err(EvalError::DegenerateVbs)
    }
}

/// Assigns each instance to a fold in `0..folds`.
///
/// The order is shuffled from the seed's `"folds"` stream. When every
/// present class has at least `folds` members the assignment is stratified
/// (each class dealt cyclically across folds); otherwise folds are
/// contiguous chunks of the shuffled order. Fold sizes differ by at most
/// one either way.
pub fn fold_assignments(
    labels: &[usize],
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>, EvalError> {
    if folds < 2 {
        return Err(EvalError::BadFoldCount(folds));
    }
    let n = labels.len();
    if n < folds {
        return Err(EvalError::TooFewInstances { n, folds });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seeding::stream_rng(seed, "folds", 0);
    shuffle(&mut order, &mut rng);

    let class_count = labels.iter().max().map_or(0, |&m| m + 1);
    let mut class_sizes = vec![0usize; class_count];
    for &y in labels {
        class_sizes[y] += 1;
    }
    let stratify = class_sizes.iter().all(|&c| c == 0 || c >= folds);

    let mut assignment = vec![0usize; n];
    if stratify {
        // Deal the shuffled order, grouped by class, cyclically over folds.
        let mut position = 0usize;
        for class in 0..class_count {
            for &i in order.iter().filter(|&&i| labels[i] == class) {
                assignment[i] = position % folds;
                position += 1;
            }
        }
    } else {
        // Contiguous chunks; the first `n % folds` folds take one extra.
        let base = n / folds;
        let extra = n % folds;
        let mut cursor = 0usize;
        for fold in 0..folds {
            let size = base + usize::from(fold < extra);
            for &i in &order[cursor..cursor + size] {
                assignment[i] = fold;
            }
            cursor += size;
        }
    }
    Ok(assignment)
}

/// Fisher-Yates shuffle driven by the given stream.
fn shuffle(xs: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..xs.len()).rev() {
        let j = rng.gen_range(0..=i);
        xs.swap(i, j);
    }
}

/// K-fold cross-validation with per-fold preprocessing.
///
/// For each fold, the cleaning pipeline (constant-column drop, trivial
/// instance drop, standardizer, imputer) is fitted on the training folds
/// only and applied to the test fold, and a forest is trained with a seed
/// derived from the fold index. Metrics are averaged unweighted across
/// folds, with the relative regret recomputed from the averaged absolute
/// regret so the report stays internally consistent.
pub fn kfold_cv(
    d: &LabeledDataset,
    forest_cfg: &ForestConfig,
    folds: usize,
    knn_k: usize,
    seed: u64,
) -> Result<MetricsReport, EvalError> {
    let assignment = fold_assignments(&d.labels, folds, seed)?;
    let mut reports = Vec::with_capacity(folds);
    for fold in 0..folds {
        let train_idx: Vec<usize> = (0..d.len()).filter(|&i| assignment[i] != fold).collect();
        let test_idx: Vec<usize> = (0..d.len()).filter(|&i| assignment[i] == fold).collect();
        let train = d.select_rows(&train_idx);
        let test = d.select_rows(&test_idx);
        let (pipeline, processed_train, _) =
            PreprocessPipeline::fit(&train, knn_k, DEFAULT_TRIVIAL_THRESHOLD_S)?;
        let fold_cfg = ForestConfig {
            seed: seeding::derive_seed(seed, "fold-forest", fold as u64),
            ..forest_cfg.clone()
        };
        let model = RandomForestModel::fit_dataset(&processed_train, &fold_cfg)?;
        let processed_test = pipeline.transform_dataset(&test)?;
        let predictions: Result<Vec<usize>, ForestError> = processed_test
            .features
            .iter()
            .map(|x| model.predict(x))
            .collect();
        reports.push(compute_metrics(&predictions?, &processed_test.runtimes)?);
    }
    aggregate_reports(&reports)
}

fn aggregate_reports(reports: &[MetricsReport]) -> Result<MetricsReport, EvalError> {
    let f = reports.len() as f64;
    let acc = reports.iter().map(|r| r.acc).sum::<f64>() / f;
    let mes_sec = reports.iter().map(|r| r.mes_sec).sum::<f64>() / f;
    let acc5 = reports.iter().map(|r| r.acc5).sum::<f64>() / f;
    let vbs_avg_s = reports.iter().map(|r| r.vbs_avg_s).sum::<f64>() / f;
    Ok(MetricsReport {
        acc,
        mes_sec,
        mes_pct: relative_regret(mes_sec, vbs_avg_s)?,
        acc5,
        vbs_avg_s,
        n: reports.iter().map(|r| r.n).sum(),
    })
}

/// One strategy's complete query history at one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyRun {
    pub strategy: QueryStrategy,
    pub seed: u64,
    pub log: crate::active::QueryLog,
}

/// Active-versus-passive accuracy curves.
///
/// Per seed, a fixed holdout of `test_fraction` is split off, preprocessing
/// is fitted on the remaining query pool (features only; no label use), and
/// every strategy runs the query loop on that same pool with the same seed,
/// so all strategies share the initial batch and the holdout. Each refit
/// contributes one point.
pub fn learning_curve(
    d: &LabeledDataset,
    strategies: &[QueryStrategy],
    base: &ActiveConfig,
    forest_cfg: &ForestConfig,
    test_fraction: f64,
    knn_k: usize,
    seeds: &[u64],
) -> Result<Vec<LearningCurvePoint>, EvalError> {
    learning_curve_with_logs(d, strategies, base, forest_cfg, test_fraction, knn_k, seeds)
        .map(|(points, _)| points)
}

/// [`learning_curve`], additionally returning each run's query log for
/// callers that persist or inspect the selection history.
pub fn learning_curve_with_logs(
    d: &LabeledDataset,
    strategies: &[QueryStrategy],
    base: &ActiveConfig,
    forest_cfg: &ForestConfig,
    test_fraction: f64,
    knn_k: usize,
    seeds: &[u64],
) -> Result<(Vec<LearningCurvePoint>, Vec<StrategyRun>), EvalError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(EvalError::BadTestFraction(test_fraction));
    }
    let mut points = Vec::new();
    let mut runs = Vec::new();
    for &seed in seeds {
        let n = d.len();
        let test_count = (math::round(test_fraction * n as f64) as usize).clamp(1, n - 1);
        let mut remaining: Vec<usize> = (0..n).collect();
        let mut holdout_rng = seeding::stream_rng(seed, "holdout", 0);
        let test_idx =
            crate::active::draw_without_replacement(&mut remaining, test_count, &mut holdout_rng);
        if remaining.is_empty() {
            return Err(EvalError::DegenerateSplit("pool"));
        }
        let pool = d.select_rows(&remaining);
        let test = d.select_rows(&test_idx);
        let (pipeline, processed_pool, _) =
            PreprocessPipeline::fit(&pool, knn_k, DEFAULT_TRIVIAL_THRESHOLD_S)?;
        let processed_test = pipeline.transform_dataset(&test)?;
        for &strategy in strategies {
            let cfg = ActiveConfig {
                strategy,
                seed,
                ..base.clone()
            };
            let mut oracle = DatasetOracle::new(&processed_pool);
            let (_, log) = run_active_loop(
                &processed_pool,
                &mut oracle,
                &cfg,
                forest_cfg,
                Some(&processed_test),
            )?;
            for record in &log.records {
                points.push(LearningCurvePoint {
                    strategy,
                    seed,
                    train_size: record.train_size_after,
                    test_size: processed_test.len(),
                    acc: record.test_acc.expect("eval set was supplied"),
                });
            }
            runs.push(StrategyRun {
                strategy,
                seed,
                log,
            });
        }
    }
    Ok((points, runs))
}

/// One standard normal draw via the Box-Muller transform.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1], keeps the log finite
    let u2: f64 = rng.gen();
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(core::f64::consts::TAU * u2)
}

/// Generates a labeled dataset with known cluster structure.
///
/// Each of the `classes` solvers owns a center placed `separation` along its
/// own coordinate axis (so `k >= classes` is required). An instance picks a
/// center uniformly, adds unit Gaussian noise, and solver `j` runs in
/// `runtime_scale * (1 + distance(instance, center_j))` seconds plus a small
/// positive noise term, so the nearest center's solver is fastest except
/// near ties. Labels are recomputed from the runtimes, never assumed.
///
/// Feature cells are then masked at `missing_rate` from an independent
/// stream: two calls with the same seed and different rates agree on every
/// cell that both leave observed.
pub fn synthetic_dataset(
    n: usize,
    k: usize,
    classes: usize,
    separation: f64,
    missing_rate: f64,
    runtime_scale: f64,
    seed: u64,
) -> Result<LabeledDataset, EvalError> {
    if classes < 2 {
        return Err(EvalError::SyntheticParams(format!(
            "need at least 2 solvers, got {classes}"
        )));
    }
    if n < classes {
        return Err(EvalError::SyntheticParams(format!(
            "{n} instances cannot cover {classes} solvers"
        )));
    }
    if k < classes {
        return Err(EvalError::SyntheticParams(format!(
            "{k} features cannot place {classes} centers on distinct axes"
        )));
    }
    if !(separation >= 0.0) {
        return Err(EvalError::SyntheticParams(format!(
            "separation {separation} must be non-negative"
        )));
    }
    if !(0.0..1.0).contains(&missing_rate) {
        return Err(EvalError::SyntheticParams(format!(
            "missing rate {missing_rate} outside [0, 1)"
        )));
    }
    if !(runtime_scale > 0.0) {
        return Err(EvalError::SyntheticParams(format!(
            "runtime scale {runtime_scale} must be positive"
        )));
    }

    let mut rng = seeding::stream_rng(seed, "synth", 0);
    let mut ids = Vec::with_capacity(n);
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut runtime_rows = Vec::with_capacity(n);
    for i in 0..n {
        let center = rng.gen_range(0..classes);
        let mut x = vec![0.0f64; k];
        for (j, value) in x.iter_mut().enumerate() {
            let mean = if j == center { separation } else { 0.0 };
            *value = mean + standard_normal(&mut rng);
        }
        let mut runtimes = Vec::with_capacity(classes);
        for solver in 0..classes {
            let mut dist_sq = 0.0;
            for (j, &value) in x.iter().enumerate() {
                let center_coord = if j == solver { separation } else { 0.0 };
                let delta = value - center_coord;
                dist_sq += delta * delta;
            }
            let noise: f64 = rng.gen::<f64>() * runtime_scale * 0.01;
            runtimes.push(runtime_scale * (1.0 + math::sqrt(dist_sq)) + noise);
        }
        let label = crate::data::argmin(&runtimes);
        ids.push(InstanceId::from(format!("synth-{i}")));
        features.push(x);
        labels.push(label);
        runtime_rows.push(runtimes);
    }

    if missing_rate > 0.0 {
        let mut mask_rng = seeding::stream_rng(seed, "mask", 0);
        for row in &mut features {
            for cell in row.iter_mut() {
                if mask_rng.gen::<f64>() < missing_rate {
                    *cell = f64::NAN;
                }
            }
        }
    }

    Ok(LabeledDataset::new(
        ids,
        (0..k).map(|j| format!("f{j}")).collect(),
        features,
        labels,
        runtime_rows,
        (0..classes).map(|c| format!("solver{c}")).collect(),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn single_bad_pick_scores_its_full_regret() {
        let report =
            compute_metrics(&[0], &[vec![420.0, 599.0, 187.0]]).unwrap();
        assert_eq!(report.acc, 0.0);
        assert_eq!(report.mes_sec, 233.0);
        assert_eq!(report.acc5, 0.0);
        assert_eq!(report.vbs_avg_s, 187.0);
        assert!((report.mes_pct - 233.0 / 187.0).abs() < 1e-12);
        assert_eq!(report.n, 1);
    }

    #[test]
    fn oracle_predictions_score_perfectly() {
        let runtimes = vec![
            vec![420.0, 599.0, 187.0],
            vec![10.0, 3.0, 8.0],
            vec![5.0, 5.0, 9.0],
        ];
        let preds = vec![2, 1, 0];
        let report = compute_metrics(&preds, &runtimes).unwrap();
        assert_eq!(report.acc, 1.0);
        assert_eq!(report.mes_sec, 0.0);
        assert_eq!(report.acc5, 1.0);
        assert_eq!(report.mes_pct, 0.0);
    }

    #[test]
    fn near_best_picks_count_only_toward_the_lenient_band() {
        let report = compute_metrics(&[1], &[vec![10.0, 13.0, 40.0]]).unwrap();
        assert_eq!(report.acc, 0.0);
        assert_eq!(report.acc5, 1.0);
        assert_eq!(report.mes_sec, 3.0);
    }

    #[test]
    fn tied_best_solvers_are_not_penalized() {
        // Solver 1 ties the minimum; picking it is as correct as solver 0.
        let report = compute_metrics(&[1], &[vec![5.0, 5.0, 9.0]]).unwrap();
        assert_eq!(report.acc, 1.0);
        assert_eq!(report.mes_sec, 0.0);
    }

    #[test]
    fn exactly_five_seconds_is_within_the_band() {
        let report = compute_metrics(&[1], &[vec![10.0, 15.0]]).unwrap();
        assert_eq!(report.acc5, 1.0);
    }

    #[test]
    fn metrics_validation() {
        assert_eq!(compute_metrics(&[], &[]).unwrap_err(), EvalError::EmptySet);
        assert_eq!(
            compute_metrics(&[3], &[vec![1.0, 2.0]]).unwrap_err(),
            EvalError::PredictionOutOfRange {
                row: 0,
                pred: 3,
                solvers: 2
            }
        );
    }

    #[test]
    fn fold_assignment_partitions_and_balances() {
        let labels = vec![0usize; 23];
        let a = fold_assignments(&labels, 10, 7).unwrap();
        assert_eq!(a.len(), 23);
        let mut sizes = vec![0usize; 10];
        for &f in &a {
            assert!(f < 10);
            sizes[f] += 1;
        }
        assert_eq!(sizes.iter().sum::<usize>(), 23);
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn stratified_assignment_spreads_every_class() {
        // 3 classes x 20 members; every fold must see 2 of each class.
        let labels: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let a = fold_assignments(&labels, 10, 42).unwrap();
        for class in 0..3 {
            let mut per_fold = vec![0usize; 10];
            for (i, &f) in a.iter().enumerate() {
                if labels[i] == class {
                    per_fold[f] += 1;
                }
            }
            assert!(per_fold.iter().all(|&c| c == 2), "class {class}: {per_fold:?}");
        }
    }

    #[test]
    fn fold_assignment_is_seeded_and_validated() {
        let labels: Vec<usize> = (0..30).map(|i| i % 2).collect();
        assert_eq!(
            fold_assignments(&labels, 10, 1).unwrap(),
            fold_assignments(&labels, 10, 1).unwrap()
        );
        assert_ne!(
            fold_assignments(&labels, 10, 1).unwrap(),
            fold_assignments(&labels, 10, 2).unwrap()
        );
        assert_eq!(
            fold_assignments(&labels, 1, 0).unwrap_err(),
            EvalError::BadFoldCount(1)
        );
        assert_eq!(
            fold_assignments(&labels[..5], 10, 0).unwrap_err(),
            EvalError::TooFewInstances { n: 5, folds: 10 }
        );
    }

    fn quick_forest(seed: u64) -> ForestConfig {
        ForestConfig {
            n_trees: 15,
            ..ForestConfig::with_seed(seed)
        }
    }

    #[test]
    fn cross_validation_learns_well_separated_clusters() {
        let d = synthetic_dataset(150, 6, 3, 10.0, 0.0, 100.0, 5).unwrap();
        let report = kfold_cv(&d, &quick_forest(0), 10, 3, 9).unwrap();
        assert!(report.acc >= 0.9, "acc {}", report.acc);
        assert!(report.acc5 >= report.acc);
        assert_eq!(report.n, 150);
        assert!((report.mes_pct - report.mes_sec / report.vbs_avg_s).abs() < 1e-12);
    }

    #[test]
    fn cross_validation_is_deterministic() {
        let d = synthetic_dataset(60, 5, 3, 4.0, 0.05, 50.0, 2).unwrap();
        let a = kfold_cv(&d, &quick_forest(1), 5, 3, 3).unwrap();
        let b = kfold_cv(&d, &quick_forest(1), 5, 3, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn leave_one_out_shaped_folds_run() {
        let d = synthetic_dataset(10, 4, 2, 8.0, 0.0, 20.0, 6).unwrap();
        let report = kfold_cv(&d, &quick_forest(2), 10, 3, 4).unwrap();
        assert_eq!(report.n, 10);
    }

    #[test]
    fn no_signal_data_scores_near_chance() {
        let d = synthetic_dataset(300, 5, 3, 0.0, 0.0, 30.0, 8).unwrap();
        let report = kfold_cv(&d, &quick_forest(3), 5, 3, 11).unwrap();
        assert!(
            (report.acc - 1.0 / 3.0).abs() <= 0.1,
            "expected chance-level accuracy, got {}",
            report.acc
        );
    }

    #[test]
    fn synthetic_generator_is_deterministic_and_validated() {
        let a = synthetic_dataset(50, 5, 3, 2.0, 0.1, 10.0, 1).unwrap();
        let b = synthetic_dataset(50, 5, 3, 2.0, 0.1, 10.0, 1).unwrap();
        assert_eq!(a.instance_ids, b.instance_ids);
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.runtimes, b.runtimes);
        for (ra, rb) in a.features.iter().zip(&b.features) {
            for (x, y) in ra.iter().zip(rb) {
                assert!(x == y || (x.is_nan() && y.is_nan()));
            }
        }
        assert!(synthetic_dataset(5, 5, 1, 1.0, 0.0, 1.0, 0).is_err());
        assert!(synthetic_dataset(2, 5, 3, 1.0, 0.0, 1.0, 0).is_err());
        assert!(synthetic_dataset(50, 2, 3, 1.0, 0.0, 1.0, 0).is_err());
        assert!(synthetic_dataset(50, 5, 3, -1.0, 0.0, 1.0, 0).is_err());
        assert!(synthetic_dataset(50, 5, 3, 1.0, 1.0, 1.0, 0).is_err());
        assert!(synthetic_dataset(50, 5, 3, 1.0, 0.0, 0.0, 0).is_err());
    }

    #[test]
    fn masking_rate_is_respected_and_independent_of_values() {
        let masked = synthetic_dataset(500, 10, 3, 5.0, 0.13, 100.0, 21).unwrap();
        let complete = synthetic_dataset(500, 10, 3, 5.0, 0.0, 100.0, 21).unwrap();
        let total = 500 * 10;
        let missing: usize = masked
            .features
            .iter()
            .flat_map(|r| r.iter())
            .filter(|v| v.is_nan())
            .count();
        let rate = missing as f64 / total as f64;
        assert!((rate - 0.13).abs() < 0.02, "rate {rate}");
        // Observed cells agree with the unmasked twin.
        for (rm, rc) in masked.features.iter().zip(&complete.features) {
            for (m, c) in rm.iter().zip(rc) {
                assert!(m.is_nan() || m == c);
            }
        }
        assert_eq!(masked.labels, complete.labels);
    }

    #[test]
    fn synthetic_runtimes_are_positive_and_label_consistent() {
        let d = synthetic_dataset(100, 6, 4, 3.0, 0.0, 50.0, 13).unwrap();
        for (row, &label) in d.runtimes.iter().zip(&d.labels) {
            assert!(row.iter().all(|&t| t > 0.0));
            assert_eq!(row[label], row_min(row));
        }
        let classes: BTreeSet<usize> = d.labels.iter().cloned().collect();
        assert_eq!(classes.len(), 4, "all solvers should win somewhere");
    }

    #[test]
    fn curves_share_the_grid_across_strategies() {
        let d = synthetic_dataset(120, 6, 3, 6.0, 0.0, 40.0, 17).unwrap();
        let base = ActiveConfig {
            b0_fraction: 0.1,
            batch_size: 20,
            label_budget: 60,
            strategy: QueryStrategy::MinMargin,
            seed: 0,
        };
        let points = learning_curve(
            &d,
            &[QueryStrategy::MinMargin, QueryStrategy::RandomPassive],
            &base,
            &quick_forest(4),
            0.25,
            3,
            &[100],
        )
        .unwrap();
        let grid = |s: QueryStrategy| -> Vec<usize> {
            points
                .iter()
                .filter(|p| p.strategy == s)
                .map(|p| p.train_size)
                .collect()
        };
        let margin_grid = grid(QueryStrategy::MinMargin);
        assert_eq!(margin_grid, grid(QueryStrategy::RandomPassive));
        assert!(!margin_grid.is_empty());
        // 90-instance pool: initial batch 9, then 20 at a time up to 60.
        assert_eq!(margin_grid, vec![9, 29, 49, 60]);
        for p in &points {
            assert_eq!(p.test_size, 30);
            assert!((0.0..=1.0).contains(&p.acc));
            assert_eq!(p.seed, 100);
        }
    }

    #[test]
    fn budget_capped_at_initial_batch_gives_one_point_per_strategy() {
        let d = synthetic_dataset(100, 5, 2, 6.0, 0.0, 40.0, 19).unwrap();
        let base = ActiveConfig {
            b0_fraction: 0.1,
            batch_size: 25,
            label_budget: 8, // exactly the initial batch for an 80-row pool
            strategy: QueryStrategy::MinMargin,
            seed: 0,
        };
        let points = learning_curve(
            &d,
            &[QueryStrategy::MinMargin, QueryStrategy::RandomPassive],
            &base,
            &quick_forest(5),
            0.2,
            3,
            &[7],
        )
        .unwrap();
        assert_eq!(points.len(), 2);
        assert!(points.iter().all(|p| p.train_size == 8));
    }

    #[test]
    fn curve_rejects_bad_test_fraction() {
        let d = synthetic_dataset(30, 5, 2, 6.0, 0.0, 40.0, 23).unwrap();
        let base = ActiveConfig::new(QueryStrategy::MinMargin, 10, 0);
        let err = learning_curve(&d, &[QueryStrategy::MinMargin], &base, &quick_forest(6), 1.5, 3, &[0])
            .unwrap_err();
        assert_eq!(err, EvalError::BadTestFraction(1.5));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn regret_is_non_negative_and_oracle_is_perfect(
                rows in proptest::collection::vec(
                    proptest::collection::vec(0.01..100.0f64, 3),
                    1..25,
                ),
                preds in proptest::collection::vec(0usize..3, 25),
            ) {
                let preds = &preds[..rows.len()];
                let report = compute_metrics(preds, &rows).unwrap();
                prop_assert!(report.mes_sec >= 0.0);
                prop_assert!(report.acc <= report.acc5);
                let oracle: Vec<usize> = rows
                    .iter()
                    .map(|r| crate::data::argmin(r))
                    .collect();
                let perfect = compute_metrics(&oracle, &rows).unwrap();
                prop_assert_eq!(perfect.acc, 1.0);
                prop_assert_eq!(perfect.mes_sec, 0.0);
                prop_assert_eq!(perfect.acc5, 1.0);
            }

            #[test]
            fn every_instance_lands_in_exactly_one_fold(
                n in 10usize..60,
                folds in 2usize..8,
                seed in 0u64..500,
            ) {
                prop_assume!(n >= folds);
                let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
                let a = fold_assignments(&labels, folds, seed).unwrap();
                prop_assert_eq!(a.len(), n);
                let mut sizes = vec![0usize; folds];
                for &f in &a {
                    prop_assert!(f < folds);
                    sizes[f] += 1;
                }
                let max = *sizes.iter().max().unwrap();
                let min = *sizes.iter().min().unwrap();
                prop_assert!(max - min <= 1);
            }
        }
    }
}
