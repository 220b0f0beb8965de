//! The project's acceptance gate: nine numbered checks covering oracle
//! metrics, the worked runtime example, single-tree equivalence with a
//! brute-force reference, the selection-score formulas, the
//! active-beats-passive property, the optional competition-dump
//! reproduction, imputer quality, invariances, and a no-signal sanity run.
//! Each check ends by printing one `criterion N PASS` line (visible with
//! `cargo test --test acceptance -- --nocapture`).

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::Rng;
use satsel_core::active::{self, ActiveConfig, QueryStrategy};
use satsel_core::data::{FeatureMatrix, InstanceId, Portfolio, RuntimeMatrix};
use satsel_core::eval::{
    compute_metrics, kfold_cv, learning_curve, synthetic_dataset, DEFAULT_TRIVIAL_THRESHOLD_S,
};
use satsel_core::features::{self, CnfFormula};
use satsel_core::forest::{self, ClassDistribution, ForestConfig, TreeNode};
use satsel_core::preprocess::{
    apply_standardizer, fit_standardizer, knn_impute, PreprocessPipeline,
};
use satsel_core::seeding::stream_rng;
use satsel_core::LabeledDataset;

fn argmin(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate() {
        if v < row[best] {
            best = j;
        }
    }
    best
}

#[test]
fn criterion_1_oracle_predictions_score_perfectly() {
    let start = Instant::now();
    let handmade = vec![
        vec![420.0, 599.0, 187.0],
        vec![1.5, 1.5, 9.0],
        vec![1200.0, 3.0, 88.8],
        vec![0.02, 1199.99, 0.02],
    ];
    let synthetic = synthetic_dataset(200, 8, 4, 3.0, 0.0, 100.0, 17).unwrap();
    let mut rng = stream_rng(99, "acceptance-random", 0);
    let random: Vec<Vec<f64>> = (0..50)
        .map(|_| (0..5).map(|_| rng.gen_range(0.001..1000.0)).collect())
        .collect();
    for runtimes in [handmade, synthetic.runtimes, random] {
        let predictions: Vec<usize> = runtimes.iter().map(|r| argmin(r)).collect();
        let report = compute_metrics(&predictions, &runtimes).unwrap();
        assert_eq!(report.acc, 1.0);
        assert_eq!(report.mes_sec, 0.0);
        assert_eq!(report.acc5, 1.0);
    }
    assert!(start.elapsed().as_secs_f64() < 1.0, "oracle check too slow");
    println!("criterion 1 PASS");
}

#[test]
fn criterion_2_worked_runtime_example() {
    let row = vec![420.0, 599.0, 187.0];
    let names = vec!["s1".to_string(), "s2".to_string(), "s3".to_string()];
    let (matrix, clamped) = RuntimeMatrix::from_rows(
        names,
        vec![(InstanceId::from("inst"), row.clone())],
        1200.0,
    )
    .unwrap();
    assert_eq!(clamped, 0);
    let labeling = matrix.label_best_solver();
    assert_eq!(labeling.labels[&InstanceId::from("inst")], 2, "best solver is the third");

    let report = compute_metrics(&[0], &[row]).unwrap();
    assert_eq!(report.mes_sec, 233.0);
    assert_eq!(report.acc, 0.0);
    assert_eq!(report.acc5, 0.0, "a 233 s regret is far outside the 5 s band");
    assert_eq!(report.vbs_avg_s, 187.0);
    println!("criterion 2 PASS");
}

/// Reference tree for criterion 3, grown by direct exhaustive search.
#[derive(Debug, PartialEq)]
enum ReferenceNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<ReferenceNode>,
        right: Box<ReferenceNode>,
    },
    Leaf {
        probs: Vec<f64>,
        count: usize,
    },
}

fn reference_entropy(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * libm::log2(p);
        }
    }
    h
}

/// Highest-gain midpoint split over all features and cut positions; ties go
/// to the lowest feature, then the lowest threshold. `None` when no split
/// has positive gain.
fn reference_best_split(
    x: &[Vec<f64>],
    y: &[usize],
    rows: &[usize],
    class_count: usize,
) -> Option<(usize, f64)> {
    let total = rows.len();
    if total < 2 {
        return None;
    }
    let mut counts = vec![0usize; class_count];
    for &r in rows {
        counts[y[r]] += 1;
    }
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return None;
    }
    let h_parent = reference_entropy(&counts, total);
    let n = total as f64;
    let mut best: Option<(usize, f64, f64)> = None;
    for feature in 0..x[0].len() {
        let mut sorted = rows.to_vec();
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
                continue;
            }
            let right_n = total - left_n;
            let right_counts: Vec<usize> = counts
                .iter()
                .zip(&left_counts)
                .map(|(&c, &l)| c - l)
                .collect();
            let gain = h_parent
                - (left_n as f64 / n) * reference_entropy(&left_counts, left_n)
                - (right_n as f64 / n) * reference_entropy(&right_counts, right_n);
            let better = match best {
                None => gain > 0.0,
                Some((_, _, g)) => gain > g,
            };
            if better {
                best = Some((feature, threshold, gain));
            }
        }
    }
    best.map(|(feature, threshold, _)| (feature, threshold))
}

fn reference_grow(x: &[Vec<f64>], y: &[usize], rows: Vec<usize>, class_count: usize) -> ReferenceNode {
    let total = rows.len();
    let mut counts = vec![0usize; class_count];
    for &r in &rows {
        counts[y[r]] += 1;
    }
    match reference_best_split(x, y, &rows, class_count) {
        None => ReferenceNode::Leaf {
            probs: counts.iter().map(|&c| c as f64 / total as f64).collect(),
            count: total,
        },
        Some((feature, threshold)) => {
            let (left, right): (Vec<usize>, Vec<usize>) =
                rows.into_iter().partition(|&r| x[r][feature] <= threshold);
            ReferenceNode::Split {
                feature,
                threshold,
                left: Box::new(reference_grow(x, y, left, class_count)),
                right: Box::new(reference_grow(x, y, right, class_count)),
            }
        }
    }
}

fn assert_same_tree(node: &TreeNode, reference: &ReferenceNode, x: &[Vec<f64>], y: &[usize]) {
    match (node, reference) {
        (
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            },
            ReferenceNode::Split {
                feature: rf,
                threshold: rt,
                left: rl,
                right: rr,
            },
        ) => {
            assert_eq!(feature, rf, "split feature differs on x={x:?} y={y:?}");
            assert_eq!(threshold, rt, "split threshold differs on x={x:?} y={y:?}");
            assert_same_tree(left, rl, x, y);
            assert_same_tree(right, rr, x, y);
        }
        (
            TreeNode::Leaf {
                distribution,
                count,
            },
            ReferenceNode::Leaf {
                probs,
                count: rcount,
            },
        ) => {
            assert_eq!(count, rcount, "leaf size differs on x={x:?} y={y:?}");
            assert_eq!(
                distribution.probs(),
                probs.as_slice(),
                "leaf distribution differs on x={x:?} y={y:?}"
            );
        }
        _ => panic!("tree shape differs on x={x:?} y={y:?}"),
    }
}

fn check_single_tree(x: &[Vec<f64>], y: &[usize]) {
    let cfg = ForestConfig {
        n_trees: 1,
        feature_subset_size: Some(x[0].len()),
        bootstrap: false,
        ..ForestConfig::with_seed(0)
    };
    let model = forest::fit(x, y, 2, &[], &cfg).unwrap();
    let reference = reference_grow(x, y, (0..x.len()).collect(), 2);
    assert_same_tree(&model.trees()[0].root, &reference, x, y);
}

#[test]
fn criterion_3_single_tree_matches_brute_force() {
    let start = Instant::now();
    let mut datasets = 0usize;

    // Every one-feature table with values from {0,1,2} and 2..=6 rows, under
    // every two-class labeling.
    for n in 2..=6usize {
        for vi in 0..3usize.pow(n as u32) {
            let mut v = vi;
            let x: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let d = (v % 3) as f64;
                    v /= 3;
                    vec![d]
                })
                .collect();
            for li in 0..2usize.pow(n as u32) {
                let y: Vec<usize> = (0..n).map(|r| (li >> r) & 1).collect();
                check_single_tree(&x, &y);
                datasets += 1;
            }
        }
    }

    // Every two-feature table with values from {0,1,2}^2 and 2..=4 rows.
    for n in 2..=4usize {
        for vi in 0..9usize.pow(n as u32) {
            let mut v = vi;
            let x: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let a = (v % 3) as f64;
                    v /= 3;
                    let b = (v % 3) as f64;
                    v /= 3;
                    vec![a, b]
                })
                .collect();
            for li in 0..2usize.pow(n as u32) {
                let y: Vec<usize> = (0..n).map(|r| (li >> r) & 1).collect();
                check_single_tree(&x, &y);
                datasets += 1;
            }
        }
    }

    assert_eq!(datasets, 55_980 + 111_132);
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "enumeration suite took {elapsed:.1} s");
    println!("criterion 3 PASS");
}

#[test]
fn criterion_4_entropy_and_selection_scores() {
    let even = ClassDistribution::new(vec![0.5, 0.5]).unwrap();
    assert_eq!(even.entropy_bits(), 1.0);

    let p = ClassDistribution::new(vec![0.7, 0.2, 0.1]).unwrap();
    let margin = active::score(QueryStrategy::MinMargin, &p).unwrap();
    let uncertainty = active::score(QueryStrategy::MaxUncertainty, &p).unwrap();
    let entropy = active::score(QueryStrategy::MaxEntropy, &p).unwrap();

    assert!((margin - 0.5).abs() <= 1e-3, "margin score {margin}");
    assert!((uncertainty - 0.3).abs() <= 1e-3, "uncertainty score {uncertainty}");
    assert!((entropy - 1.157).abs() <= 1e-3, "entropy score {entropy}");

    // Direct evaluation of the three formulas, written out independently.
    let direct_margin = 0.7 - 0.2;
    let direct_uncertainty = 1.0 - 0.7;
    let direct_entropy =
        -(0.7 * libm::log2(0.7) + 0.2 * libm::log2(0.2) + 0.1 * libm::log2(0.1));
    assert!((margin - direct_margin).abs() <= 1e-12);
    assert!((uncertainty - direct_uncertainty).abs() <= 1e-12);
    assert!((entropy - direct_entropy).abs() <= 1e-12);
    println!("criterion 4 PASS");
}

#[test]
fn criterion_5_uncertainty_sampling_beats_passive() {
    let start = Instant::now();
    let d = synthetic_dataset(800, 20, 10, 6.0, 0.1, 100.0, 1).unwrap();
    let seeds: Vec<u64> = (0..30).collect();
    let base = ActiveConfig {
        b0_fraction: 0.1,
        batch_size: 25,
        label_budget: 300,
        strategy: QueryStrategy::MinMargin,
        seed: 0,
    };
    let points = learning_curve(
        &d,
        &[QueryStrategy::MinMargin, QueryStrategy::RandomPassive],
        &base,
        &ForestConfig::with_seed(0),
        0.2,
        3,
        &seeds,
    )
    .unwrap();

    let mut by_strategy: BTreeMap<&str, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for p in &points {
        by_strategy
            .entry(p.strategy.name())
            .or_default()
            .entry(p.train_size)
            .or_default()
            .push(p.acc);
    }
    let margin = &by_strategy["margin"];
    let passive = &by_strategy["passive"];
    let grid: Vec<usize> = margin.keys().copied().collect();
    assert_eq!(
        grid,
        passive.keys().copied().collect::<Vec<usize>>(),
        "strategies must share the label grid"
    );

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut strictly_greater = 0usize;
    for &t in &grid {
        assert_eq!(margin[&t].len(), seeds.len());
        assert_eq!(passive[&t].len(), seeds.len());
        let m = mean(&margin[&t]);
        let p = mean(&passive[&t]);
        assert!(
            m >= p - 0.02,
            "margin mean {m:.4} trails passive mean {p:.4} by more than 0.02 at {t} labels"
        );
        if m > p {
            strictly_greater += 1;
        }
    }
    assert!(
        strictly_greater * 10 >= grid.len() * 6,
        "margin strictly ahead at only {strictly_greater} of {} grid points",
        grid.len()
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "curve sweep took {elapsed:.0} s");
    println!("criterion 5 PASS");
}

/// Restricts `full` to the instances that survived preprocessing.
fn retained_subset(full: &LabeledDataset, processed: &LabeledDataset) -> LabeledDataset {
    let keep: BTreeSet<&InstanceId> = processed.instance_ids.iter().collect();
    let idx: Vec<usize> = full
        .instance_ids
        .iter()
        .enumerate()
        .filter(|(_, id)| keep.contains(id))
        .map(|(i, _)| i)
        .collect();
    full.select_rows(&idx)
}

fn preset_dataset(f: &FeatureMatrix, r: &RuntimeMatrix, p: &Portfolio) -> LabeledDataset {
    let sliced = r.slice_portfolio(p).unwrap();
    let (d, _) = satsel_core::data::join(f, &sliced).unwrap();
    d
}

/// Runs only when SATSEL_SATZILLA_DIR points at a directory holding the
/// competition dump as features.csv and runtimes.csv; otherwise the check is
/// vacuous and reports itself as skipped.
#[test]
fn criterion_6_competition_dump_reproduction() {
    let Some(dir) = std::env::var_os("SATSEL_SATZILLA_DIR") else {
        println!("criterion 6 PASS (conditional dataset not supplied; skipped)");
        return;
    };
    let start = Instant::now();
    let dir = std::path::PathBuf::from(dir);
    let features = satsel::io::read_feature_csv(&dir.join("features.csv")).unwrap();
    let (runtimes, _) = satsel::io::read_runtime_csv(&dir.join("runtimes.csv"), 1200.0).unwrap();

    let p3 = preset_dataset(&features, &runtimes, &Portfolio::preset3());
    let (_, processed, _) = PreprocessPipeline::fit(&p3, 3, DEFAULT_TRIVIAL_THRESHOLD_S).unwrap();
    assert_eq!(processed.len(), 897, "three-solver preprocessing retention");
    let vbs = processed
        .runtimes
        .iter()
        .map(|r| r[argmin(r)])
        .sum::<f64>()
        / processed.len() as f64;
    assert!((vbs - 110.8).abs() <= 1.0, "three-solver VBS average {vbs:.1} s");

    let retained3 = retained_subset(&p3, &processed);
    let report3 = kfold_cv(&retained3, &ForestConfig::with_seed(0), 10, 3, 0).unwrap();
    assert!(
        (report3.acc * 100.0 - 73.4).abs() <= 5.0,
        "three-solver accuracy {:.1}%",
        report3.acc * 100.0
    );
    assert!(
        (report3.acc5 * 100.0 - 87.0).abs() <= 5.0,
        "three-solver lenient accuracy {:.1}%",
        report3.acc5 * 100.0
    );

    for (portfolio, expected_acc) in [(Portfolio::preset6(), 64.3), (Portfolio::preset10(), 63.1)] {
        let d = preset_dataset(&features, &runtimes, &portfolio);
        let (_, processed, _) =
            PreprocessPipeline::fit(&d, 3, DEFAULT_TRIVIAL_THRESHOLD_S).unwrap();
        let retained = retained_subset(&d, &processed);
        let report = kfold_cv(&retained, &ForestConfig::with_seed(0), 10, 3, 0).unwrap();
        assert!(
            (report.acc * 100.0 - expected_acc).abs() <= 6.0,
            "{}-solver accuracy {:.1}% vs {expected_acc}%",
            portfolio.len(),
            report.acc * 100.0
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 1800.0, "dump reproduction took {elapsed:.0} s");
    println!("criterion 6 PASS");
}

const LOADINGS: [f64; 8] = [1.0, 0.9, -0.8, 1.1, -1.0, 0.7, 0.95, -1.05];
const NOISE_STD: f64 = 0.3;

fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// One latent factor per row, one noisy loading per column, then a mask with
/// known ground truth.
fn latent_factor_matrix(
    n: usize,
    missing_rate: f64,
    seed: u64,
) -> (FeatureMatrix, FeatureMatrix, Vec<(usize, usize)>) {
    let k = LOADINGS.len();
    let mut rng = stream_rng(seed, "latent", 0);
    let complete: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let t = standard_normal(&mut rng);
            LOADINGS
                .iter()
                .map(|a| a * t + NOISE_STD * standard_normal(&mut rng))
                .collect()
        })
        .collect();

    let mut mask_rng = stream_rng(seed, "mask", 0);
    let mut masked = complete.clone();
    let mut hidden = Vec::new();
    for (i, row) in masked.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if mask_rng.gen::<f64>() < missing_rate {
                *cell = f64::NAN;
                hidden.push((i, j));
            }
        }
    }

    let names: Vec<String> = (0..k).map(|j| format!("f{j}")).collect();
    let ids = |rows: Vec<Vec<f64>>| {
        rows.into_iter()
            .enumerate()
            .map(|(i, r)| (InstanceId::from(format!("r{i}")), r))
            .collect()
    };
    let complete_m = FeatureMatrix::from_rows(names.clone(), ids(complete)).unwrap();
    let masked_m = FeatureMatrix::from_rows(names, ids(masked)).unwrap();
    (complete_m, masked_m, hidden)
}

fn rmse_on(cells: &[(usize, usize)], predicted: &FeatureMatrix, truth: &FeatureMatrix) -> f64 {
    let total: f64 = cells
        .iter()
        .map(|&(i, j)| {
            let err = predicted.rows()[i][j] - truth.rows()[i][j];
            err * err
        })
        .sum();
    (total / cells.len() as f64).sqrt()
}

#[test]
fn criterion_7_imputer_quality() {
    let start = Instant::now();

    // Recovery of 13%-masked cells on a correlated matrix, against the
    // column-mean baseline, across ten seeds.
    let seeds = 10u64;
    let mut knn_wins = 0usize;
    for seed in 0..seeds {
        let (complete, masked, hidden) = latent_factor_matrix(150, 0.13, seed);
        assert!(!hidden.is_empty());

        let standardizer = fit_standardizer(&masked).unwrap();
        let masked_std = apply_standardizer(&standardizer, &masked).unwrap();
        let truth_std = apply_standardizer(&standardizer, &complete).unwrap();

        let (imputed, count) = knn_impute(&masked_std, 3).unwrap();
        assert_eq!(count, hidden.len());
        let knn_rmse = rmse_on(&hidden, &imputed, &truth_std);

        let mut mean_rows = masked_std.rows().to_vec();
        for &(i, j) in &hidden {
            let observed = masked_std.observed_column(j);
            mean_rows[i][j] = observed.iter().sum::<f64>() / observed.len() as f64;
        }
        let mean_filled = FeatureMatrix::from_rows(
            masked_std.feature_names().to_vec(),
            masked_std.ids().iter().cloned().zip(mean_rows).collect(),
        )
        .unwrap();
        let mean_rmse = rmse_on(&hidden, &mean_filled, &truth_std);

        if knn_rmse < mean_rmse {
            knn_wins += 1;
        }
    }
    assert!(
        knn_wins >= 8,
        "neighbour imputation won only {knn_wins}/{seeds} seeds"
    );

    // The pipeline's reported imputed fraction tracks a 13% mask.
    let d = synthetic_dataset(600, 20, 3, 6.0, 0.13, 100.0, 3).unwrap();
    let (_, _, report) = PreprocessPipeline::fit(&d, 3, DEFAULT_TRIVIAL_THRESHOLD_S).unwrap();
    assert!(
        (report.imputed_fraction - 0.13).abs() <= 0.01,
        "imputed fraction {:.4}",
        report.imputed_fraction
    );

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "imputer checks took {elapsed:.1} s");
    println!("criterion 7 PASS");
}

fn random_cnf(num_vars: usize, num_clauses: usize, rng: &mut impl Rng) -> CnfFormula {
    let clauses = (0..num_clauses)
        .map(|_| {
            let len = rng.gen_range(1..=4);
            (0..len)
                .map(|_| {
                    let var = rng.gen_range(1..=num_vars) as i64;
                    if rng.gen::<bool>() {
                        var
                    } else {
                        -var
                    }
                })
                .collect()
        })
        .collect();
    CnfFormula { num_vars, clauses }
}

/// Applies a random variable renaming and a random clause-order shuffle.
fn renamed_shuffled(f: &CnfFormula, rng: &mut impl Rng) -> CnfFormula {
    let mut mapping: Vec<i64> = (1..=f.num_vars as i64).collect();
    for i in (1..mapping.len()).rev() {
        mapping.swap(i, rng.gen_range(0..=i));
    }
    let mut clauses: Vec<Vec<i64>> = f
        .clauses
        .iter()
        .map(|clause| {
            clause
                .iter()
                .map(|&lit| lit.signum() * mapping[(lit.unsigned_abs() as usize) - 1])
                .collect()
        })
        .collect();
    for i in (1..clauses.len()).rev() {
        let j = rng.gen_range(0..=i);
        clauses.swap(i, j);
    }
    CnfFormula {
        num_vars: f.num_vars,
        clauses,
    }
}

#[test]
fn criterion_8_invariance_suite() {
    let start = Instant::now();

    // Feature extraction under 100 random variable renamings and clause
    // permutations: exact equality.
    let mut rng = stream_rng(8, "invariance", 0);
    let base = random_cnf(40, 150, &mut rng);
    let base_features = features::extract_all(&base);
    for _ in 0..100 {
        let permuted = renamed_shuffled(&base, &mut rng);
        let f = features::extract_all(&permuted);
        assert_eq!(f.names(), base_features.names());
        assert_eq!(f.values(), base_features.values());
    }

    // Forest training is deterministic under a fixed seed.
    let d = synthetic_dataset(200, 8, 3, 4.0, 0.0, 50.0, 21).unwrap();
    let cfg = ForestConfig::with_seed(5);
    let first = forest::fit(&d.features, &d.labels, d.class_count(), &d.feature_names, &cfg).unwrap();
    let second = forest::fit(&d.features, &d.labels, d.class_count(), &d.feature_names, &cfg).unwrap();
    assert_eq!(first.trees(), second.trees());
    for row in &d.features {
        assert_eq!(first.predict(row).unwrap(), second.predict(row).unwrap());
    }

    // Predictions on integer-valued features are unchanged when every column
    // is shifted by a constant (midpoints stay exact for integral data).
    let mut shift_rng = stream_rng(8, "shift", 0);
    let n = 120;
    let k = 6;
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..k).map(|_| shift_rng.gen_range(0..20) as f64).collect())
        .collect();
    let y: Vec<usize> = (0..n).map(|_| shift_rng.gen_range(0..3)).collect();
    let probes: Vec<Vec<f64>> = (0..40)
        .map(|_| (0..k).map(|_| shift_rng.gen_range(0..20) as f64).collect())
        .collect();
    let shifts: Vec<f64> = (0..k)
        .map(|_| shift_rng.gen_range(-1000..=1000) as f64)
        .collect();
    let shifted = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| r.iter().zip(&shifts).map(|(v, c)| v + c).collect())
            .collect()
    };
    let cfg = ForestConfig::with_seed(9);
    let plain = forest::fit(&x, &y, 3, &[], &cfg).unwrap();
    let moved = forest::fit(&shifted(&x), &y, 3, &[], &cfg).unwrap();
    for (probe, moved_probe) in probes.iter().zip(&shifted(&probes)) {
        assert_eq!(plain.predict(probe).unwrap(), moved.predict(moved_probe).unwrap());
        assert_eq!(
            plain.predict_proba(probe).unwrap().probs(),
            moved.predict_proba(moved_probe).unwrap().probs()
        );
    }

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "invariance suite took {elapsed:.1} s");
    println!("criterion 8 PASS");
}

#[test]
fn criterion_9_no_signal_sanity() {
    let start = Instant::now();
    let d = synthetic_dataset(600, 20, 3, 0.0, 0.0, 100.0, 13).unwrap();
    let report = kfold_cv(&d, &ForestConfig::with_seed(0), 10, 3, 13).unwrap();
    assert!(
        (report.acc - 1.0 / 3.0).abs() <= 0.1,
        "no-signal accuracy {:.3} strays from chance",
        report.acc
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "no-signal run took {elapsed:.1} s");
    println!("criterion 9 PASS");
}
