//! CSV and JSON readers/writers for the on-disk dataset formats.
//!
//! Runtime CSV: header `instance,<solver>,...`, seconds as decimal
//! numbers. Feature CSV: header `instance,<feature>,...`, with an empty
//! cell or the token `NaN` marking a missing value; lines starting with
//! `#` are treated as comments. All writers emit fully deterministic
//! bytes: no timestamps, keys in struct order, shortest-round-trip float
//! formatting.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use satsel_core::data::{FeatureMatrix, InstanceId, RuntimeMatrix};
use satsel_core::eval::{LearningCurvePoint, StrategyRun};
use satsel_core::LabeledDataset;

/// Strips `#` comment lines so annotated CSV files stay readable by the
/// plain readers.
fn strip_comments(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn read_table(path: &Path, first_column: &str) -> Result<(Vec<String>, Vec<(InstanceId, Vec<String>)>)> {
    let raw = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(Cursor::new(strip_comments(&raw)));
    let headers = reader
        .headers()
        .with_context(|| format!("{}: cannot read header", path.display()))?
        .clone();
    if headers.is_empty() || &headers[0] != first_column {
        bail!(
            "{}: first column must be `{first_column}`, found `{}`",
            path.display(),
            headers.iter().next().unwrap_or("")
        );
    }
    let columns: Vec<String> = headers.iter().skip(1).map(String::from).collect();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: row {}", path.display(), i + 2))?;
        let id = InstanceId::from(record.get(0).unwrap_or(""));
        let cells = record.iter().skip(1).map(String::from).collect();
        rows.push((id, cells));
    }
    Ok((columns, rows))
}

/// Reads a feature CSV; empty cells and `NaN` become missing values.
pub fn read_feature_csv(path: &Path) -> Result<FeatureMatrix> {
    let (names, rows) = read_table(path, "instance")?;
    let mut parsed = Vec::with_capacity(rows.len());
    for (id, cells) in rows {
        let mut values = Vec::with_capacity(cells.len());
        for (j, cell) in cells.iter().enumerate() {
            let trimmed = cell.trim();
            let value = if trimmed.is_empty() || trimmed.eq_ignore_ascii_case("nan") {
                f64::NAN
            } else {
                trimmed.parse::<f64>().map_err(|_| {
                    anyhow!(
                        "{}: instance {} column {}: `{trimmed}` is not a number",
                        path.display(),
                        id,
                        names.get(j).map(String::as_str).unwrap_or("?")
                    )
                })?
            };
            values.push(value);
        }
        parsed.push((id, values));
    }
    FeatureMatrix::from_rows(names, parsed)
        .map_err(|e| anyhow!("{}: {e}", path.display()))
}

/// Reads a runtime CSV and applies the cutoff. Returns the matrix and
/// the number of cells clamped down to the cutoff.
pub fn read_runtime_csv(path: &Path, cutoff_s: f64) -> Result<(RuntimeMatrix, usize)> {
    let (solvers, rows) = read_table(path, "instance")?;
    let mut parsed = Vec::with_capacity(rows.len());
    for (id, cells) in rows {
        let mut values = Vec::with_capacity(cells.len());
        for (j, cell) in cells.iter().enumerate() {
            let trimmed = cell.trim();
            let value: f64 = trimmed.parse().map_err(|_| {
                anyhow!(
                    "{}: instance {} solver {}: `{trimmed}` is not a number",
                    path.display(),
                    id,
                    solvers.get(j).map(String::as_str).unwrap_or("?")
                )
            })?;
            values.push(value);
        }
        parsed.push((id, values));
    }
    RuntimeMatrix::from_rows(solvers, parsed, cutoff_s)
        .map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn format_cell(value: f64) -> String {
    if value.is_nan() {
        String::new()
    } else {
        format!("{value}")
    }
}

/// Writes a feature CSV; an optional comment line goes above the header.
pub fn write_feature_csv(path: &Path, f: &FeatureMatrix, comment: Option<&str>) -> Result<()> {
    let mut out = String::new();
    if let Some(c) = comment {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str("instance");
    for name in f.feature_names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (id, row) in f.ids().iter().zip(f.rows()) {
        out.push_str(id.as_str());
        for &v in row {
            out.push(',');
            out.push_str(&format_cell(v));
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_runtime_csv(path: &Path, m: &RuntimeMatrix) -> Result<()> {
    let mut out = String::from("instance");
    for name in m.solver_names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (id, row) in m.ids().iter().zip(m.rows()) {
        out.push_str(id.as_str());
        for &v in row {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes runtime rows that were never passed through a cutoff, e.g.
/// freshly generated data; the plain writer requires a [`RuntimeMatrix`].
pub fn write_raw_runtime_csv(
    path: &Path,
    ids: &[InstanceId],
    solver_names: &[String],
    rows: &[Vec<f64>],
) -> Result<()> {
    let mut out = String::from("instance");
    for name in solver_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (id, row) in ids.iter().zip(rows) {
        out.push_str(id.as_str());
        for &v in row {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes `instance,label,solver` rows for a labeled dataset.
pub fn write_labels_csv(path: &Path, d: &LabeledDataset) -> Result<()> {
    let mut out = String::from("instance,label,solver\n");
    for (id, &label) in d.instance_ids.iter().zip(&d.labels) {
        out.push_str(&format!("{},{},{}\n", id, label, d.solver_names[label]));
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

/// Curve CSV with columns `strategy,seed,train_size,test_acc`.
pub fn write_curve_csv(path: &Path, points: &[LearningCurvePoint]) -> Result<()> {
    let mut out = String::from("strategy,seed,train_size,test_acc\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.strategy.name(),
            p.seed,
            p.train_size,
            p.acc
        ));
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

/// Query log CSV with columns
/// `iteration,instance,score,strategy,train_size,test_acc`; scoreless
/// queries (initial batch, passive strategy) leave the score empty.
pub fn write_query_log_csv(path: &Path, runs: &[&StrategyRun]) -> Result<()> {
    let mut out = String::from("iteration,instance,score,strategy,train_size,test_acc\n");
    for run in runs {
        for record in &run.log.records {
            let acc = record
                .test_acc
                .map(|a| format!("{a}"))
                .unwrap_or_default();
            for (id, score) in &record.queried {
                let score = score.map(|s| format!("{s}")).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    record.iteration,
                    id,
                    score,
                    run.strategy.name(),
                    record.train_size_after,
                    acc
                ));
            }
        }
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// One-line human-readable metrics row in the style of the selection
/// literature: accuracy, absolute and relative regret, lenient accuracy.
pub fn write_metrics_table(path: &Path, m: &satsel_core::MetricsReport) -> Result<()> {
    let text = format!(
        "acc {:.1}%  mes {:.1}s  mes% {:.1}%  acc5 {:.1}%  (vbs {:.1}s, n={})\n",
        m.acc * 100.0,
        m.mes_sec,
        m.mes_pct * 100.0,
        m.acc5 * 100.0,
        m.vbs_avg_s,
        m.n
    );
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
