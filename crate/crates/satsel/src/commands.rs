//! Command implementations shared by the binary and the test suites.
//!
//! Every command validates its configuration first (usage errors, exit 2),
//! then runs and writes its outputs (any failure there exits 1). Outputs
//! are byte-deterministic for a fixed input set, configuration, and seed;
//! progress and warnings go to the logger, never into output files.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::Serialize;

use satsel_core::active::ActiveConfig;
use satsel_core::eval::{
    self, learning_curve_with_logs, synthetic_dataset, StrategyRun, DEFAULT_TRIVIAL_THRESHOLD_S,
};
use satsel_core::features::{extract_all, parse_dimacs, FeatureVector, FEATURE_SCHEMA_VERSION};
use satsel_core::preprocess::{
    apply_standardizer, drop_constant_features, fit_standardizer, knn_impute, DroppedInstance,
    PreprocessPipeline, PreprocessReport,
};
use satsel_core::{ForestConfig, InstanceId, LabeledDataset};

use crate::config::RunConfig;
use crate::io;
use crate::CliError;

type CmdResult = Result<(), CliError>;

/// Rejects configurations no command could run with.
pub fn validate(cfg: &RunConfig) -> CmdResult {
    let usage = |m: String| Err(CliError::Usage(m));
    if cfg.trees == 0 {
        return usage(String::from("--trees must be at least 1"));
    }
    if cfg.batch_size == 0 {
        return usage(String::from("--batch-size must be at least 1"));
    }
    if cfg.knn == 0 {
        return usage(String::from("--knn must be at least 1"));
    }
    if cfg.folds < 2 {
        return usage(String::from("--folds must be at least 2"));
    }
    if !(cfg.cutoff_s > 0.0) {
        return usage(format!("--cutoff must be positive, got {}", cfg.cutoff_s));
    }
    if !(cfg.b0_fraction > 0.0 && cfg.b0_fraction < 1.0) {
        return usage(format!(
            "--b0-fraction must lie in (0, 1), got {}",
            cfg.b0_fraction
        ));
    }
    if !(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0) {
        return usage(format!(
            "--test-fraction must lie in (0, 1), got {}",
            cfg.test_fraction
        ));
    }
    if cfg.curve_seeds == 0 {
        return usage(String::from("--curve-seeds must be at least 1"));
    }
    cfg.strategy()?;
    cfg.strategies()?;
    cfg.portfolio()?;
    Ok(())
}

fn prepare_out_dir(out: &Path) -> CmdResult {
    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))
        .map_err(CliError::from)
}

fn write_resolved_config(out: &Path, cfg: &RunConfig) -> CmdResult {
    io::write_json(&out.join("resolved_config.json"), cfg).map_err(CliError::from)
}

fn forest_config(cfg: &RunConfig) -> ForestConfig {
    ForestConfig {
        n_trees: cfg.trees,
        ..ForestConfig::with_seed(cfg.seed)
    }
}

/// Reads features and runtimes, applies the portfolio, and joins them
/// into a labeled dataset, logging clamped cells and dropped instances.
pub fn load_dataset(
    features: &Path,
    runtimes: &Path,
    cfg: &RunConfig,
) -> Result<LabeledDataset, CliError> {
    let f = io::read_feature_csv(features)?;
    let (mut r, clamped) = io::read_runtime_csv(runtimes, cfg.cutoff_s)?;
    if clamped > 0 {
        log::warn!("{clamped} runtime cells above the cutoff were clamped to {}", cfg.cutoff_s);
    }
    if let Some(portfolio) = cfg.portfolio()? {
        r = r
            .slice_portfolio(&portfolio)
            .map_err(|e| CliError::Runtime(anyhow!("portfolio selection failed: {e}")))?;
    }
    let (dataset, dropped) = satsel_core::data::join(&f, &r)
        .map_err(|e| CliError::Runtime(anyhow!("joining features and runtimes failed: {e}")))?;
    if !dropped.is_empty() {
        log::info!(
            "dropped {} instances unsolved or missing from one side",
            dropped.len()
        );
    }
    Ok(dataset)
}

/// `preprocess`: clean a dataset and write the cleaned files plus report.
pub fn cmd_preprocess(features: &Path, runtimes: &Path, out: &Path, cfg: &RunConfig) -> CmdResult {
    validate(cfg)?;
    let dataset = load_dataset(features, runtimes, cfg)?;
    let (_, processed, report) =
        PreprocessPipeline::fit(&dataset, cfg.knn, DEFAULT_TRIVIAL_THRESHOLD_S)
            .map_err(|e| CliError::Runtime(anyhow!("preprocessing failed: {e}")))?;
    prepare_out_dir(out)?;
    io::write_feature_csv(
        &out.join("cleaned_features.csv"),
        &processed.feature_matrix(),
        None,
    )?;
    io::write_labels_csv(&out.join("labels.csv"), &processed)?;
    io::write_json(&out.join("preprocess_report.json"), &report)?;
    write_resolved_config(out, cfg)?;
    log::info!(
        "kept {} instances, {} features; imputed {} cells",
        processed.len(),
        processed.feature_names.len(),
        report.imputed_cells
    );
    Ok(())
}

/// `cv`: k-fold cross-validation; writes the metrics as JSON and a
/// one-line table.
pub fn cmd_cv(features: &Path, runtimes: &Path, out: &Path, cfg: &RunConfig) -> CmdResult {
    validate(cfg)?;
    let dataset = load_dataset(features, runtimes, cfg)?;
    if dataset.len() < 2 * cfg.folds {
        log::warn!(
            "only {} instances across {} folds; fold metrics will be noisy",
            dataset.len(),
            cfg.folds
        );
    }
    let report = eval::kfold_cv(&dataset, &forest_config(cfg), cfg.folds, cfg.knn, cfg.seed)
        .map_err(|e| CliError::Runtime(anyhow!("cross-validation failed: {e}")))?;
    prepare_out_dir(out)?;
    io::write_json(&out.join("metrics.json"), &report)?;
    io::write_metrics_table(&out.join("metrics.txt"), &report)?;
    write_resolved_config(out, cfg)?;
    log::info!(
        "cv acc {:.3} acc5 {:.3} mes {:.2}s",
        report.acc,
        report.acc5,
        report.mes_sec
    );
    Ok(())
}

/// `curve`: active-learning curves across strategies and seeds; writes
/// the plot-ready curve CSV and one query log per seed.
pub fn cmd_curve(features: &Path, runtimes: &Path, out: &Path, cfg: &RunConfig) -> CmdResult {
    validate(cfg)?;
    let dataset = load_dataset(features, runtimes, cfg)?;
    let strategies = cfg.strategies()?;
    let base = ActiveConfig {
        b0_fraction: cfg.b0_fraction,
        batch_size: cfg.batch_size,
        label_budget: cfg.label_budget.unwrap_or(usize::MAX),
        strategy: strategies[0],
        seed: cfg.seed,
    };
    let seeds: Vec<u64> = (0..cfg.curve_seeds as u64).map(|i| cfg.seed + i).collect();
    let (points, runs) = learning_curve_with_logs(
        &dataset,
        &strategies,
        &base,
        &forest_config(cfg),
        cfg.test_fraction,
        cfg.knn,
        &seeds,
    )
    .map_err(|e| CliError::Runtime(anyhow!("learning curve failed: {e}")))?;
    prepare_out_dir(out)?;
    io::write_curve_csv(&out.join("curve.csv"), &points)?;
    for &seed in &seeds {
        let seed_runs: Vec<&StrategyRun> = runs.iter().filter(|r| r.seed == seed).collect();
        io::write_query_log_csv(&out.join(format!("query_log_seed{seed}.csv")), &seed_runs)?;
    }
    write_resolved_config(out, cfg)?;
    log::info!("wrote {} curve points over {} runs", points.len(), runs.len());
    Ok(())
}

/// `extract`: parse CNF files and write one feature row per parseable
/// file. Unparseable files are skipped with a warning; only a run where
/// every file fails is an error.
pub fn cmd_extract(inputs: &[PathBuf], out: &Path, cfg: &RunConfig) -> CmdResult {
    validate(cfg)?;
    if inputs.is_empty() {
        return Err(CliError::Usage(String::from("no input CNF files given")));
    }
    let mut rows: Vec<(InstanceId, FeatureVector)> = Vec::new();
    let mut failures = 0usize;
    for path in inputs {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                failures += 1;
                continue;
            }
        };
        match parse_dimacs(&text) {
            Ok((formula, warnings)) => {
                for w in warnings {
                    log::warn!("{}: {w:?}", path.display());
                }
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                rows.push((InstanceId::from(stem), extract_all(&formula)));
            }
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                failures += 1;
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::Runtime(anyhow!(
            "all {failures} input files failed to parse"
        )));
    }
    if failures > 0 {
        log::warn!("skipped {failures} of {} files", inputs.len());
    }
    let names = rows[0].1.names().to_vec();
    let matrix = satsel_core::FeatureMatrix::from_rows(
        names,
        rows.into_iter()
            .map(|(id, v)| (id, v.into_parts().1))
            .collect(),
    )
    .map_err(|e| CliError::Runtime(anyhow!("assembling feature rows failed: {e}")))?;
    prepare_out_dir(out)?;
    io::write_feature_csv(
        &out.join("features.csv"),
        &matrix,
        Some(&format!("schema: {FEATURE_SCHEMA_VERSION}")),
    )?;
    write_resolved_config(out, cfg)?;
    log::info!("extracted {} instances", matrix.n_instances());
    Ok(())
}

/// Generation knobs for `synth`, echoed next to the resolved config.
#[derive(Debug, Clone, Serialize)]
pub struct SynthParams {
    pub n: usize,
    pub k: usize,
    pub classes: usize,
    pub separation: f64,
    pub missing_rate: f64,
    pub runtime_scale: f64,
}

/// `synth`: generate a dataset and write features, runtimes, and the
/// generator's ground-truth labels.
pub fn cmd_synth(params: &SynthParams, out: &Path, cfg: &RunConfig) -> CmdResult {
    validate(cfg)?;
    let dataset = synthetic_dataset(
        params.n,
        params.k,
        params.classes,
        params.separation,
        params.missing_rate,
        params.runtime_scale,
        cfg.seed,
    )
    .map_err(|e| CliError::Usage(format!("bad generator parameters: {e}")))?;
    prepare_out_dir(out)?;
    io::write_feature_csv(&out.join("features.csv"), &dataset.feature_matrix(), None)?;
    io::write_raw_runtime_csv(
        &out.join("runtimes.csv"),
        &dataset.instance_ids,
        &dataset.solver_names,
        &dataset.runtimes,
    )?;
    io::write_labels_csv(&out.join("labels.csv"), &dataset)?;
    io::write_json(&out.join("synth_params.json"), params)?;
    write_resolved_config(out, cfg)?;
    log::info!("generated {} instances over {} solvers", params.n, params.classes);
    Ok(())
}

/// `impute-report`: run the imputation stages on a bare feature matrix
/// and report what was filled in, plus the completed matrix itself.
pub fn cmd_impute_report(features: &Path, out: &Path, cfg: &RunConfig) -> CmdResult {
    validate(cfg)?;
    let raw = io::read_feature_csv(features)?;
    let (kept, dropped_features) = drop_constant_features(&raw)
        .map_err(|e| CliError::Runtime(anyhow!("feature screening failed: {e}")))?;
    let standardizer = fit_standardizer(&kept)
        .map_err(|e| CliError::Runtime(anyhow!("standardization failed: {e}")))?;
    let standardized = apply_standardizer(&standardizer, &kept)
        .map_err(|e| CliError::Runtime(anyhow!("standardization failed: {e}")))?;
    let (imputed_std, imputed_cells) = knn_impute(&standardized, cfg.knn)
        .map_err(|e| CliError::Runtime(anyhow!("imputation failed: {e}")))?;

    // Report the completed matrix in the input's original units.
    let rows: Vec<(InstanceId, Vec<f64>)> = imputed_std
        .ids()
        .iter()
        .zip(imputed_std.rows())
        .map(|(id, row)| {
            let back: Vec<f64> = row
                .iter()
                .enumerate()
                .map(|(j, v)| v * standardizer.stds()[j] + standardizer.means()[j])
                .collect();
            (id.clone(), back)
        })
        .collect();
    let restored =
        satsel_core::FeatureMatrix::from_rows(imputed_std.feature_names().to_vec(), rows)
            .map_err(|e| CliError::Runtime(anyhow!("rescaling imputed matrix failed: {e}")))?;

    let total_cells = kept.n_instances() * kept.n_features();
    let report = PreprocessReport {
        dropped_features,
        dropped_instances: Vec::<DroppedInstance>::new(),
        imputed_cells,
        imputed_fraction: if total_cells == 0 {
            0.0
        } else {
            imputed_cells as f64 / total_cells as f64
        },
    };
    prepare_out_dir(out)?;
    io::write_feature_csv(&out.join("imputed_features.csv"), &restored, None)?;
    io::write_json(&out.join("impute_report.json"), &report)?;
    write_resolved_config(out, cfg)?;
    log::info!(
        "imputed {} of {} cells ({:.1}%)",
        imputed_cells,
        total_cells,
        report.imputed_fraction * 100.0
    );
    Ok(())
}
