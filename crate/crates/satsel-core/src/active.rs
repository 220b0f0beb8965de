//! Pool-based selective sampling.
//!
//! The learner sees every unlabeled instance, scores each one with an
//! uncertainty criterion from the current forest, queries an oracle for the
//! most informative batch, and refits from scratch. A uniformly drawn
//! initial batch seeds the loop; with the same master seed every strategy
//! starts from the same initial batch, so strategy comparisons differ only
//! in what they query afterwards.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{row_min, InstanceId, LabeledDataset, RuntimeMatrix};
use crate::forest::{self, ClassDistribution, ForestConfig, ForestError, RandomForestModel};
use crate::math;
use crate::seeding;

#[derive(Debug, Error, PartialEq)]
pub enum ActiveError {
    #[error("strategy scores need at least two classes")]
    TooFewClasses,
    #[error("the passive baseline has no per-instance score")]
    PassiveHasNoScore,
    #[error("uncertainty selection needs a fitted model")]
    ModelRequired,
    #[error("pool is empty")]
    EmptyPool,
    #[error("pool features contain missing values; run imputation first")]
    IncompletePool,
    #[error("initial batch fraction {0} outside (0, 1)")]
    BadFraction(f64),
    #[error("batch size must be at least 1")]
    BadBatchSize,
    #[error("label budget {budget} is below the initial batch size {b0}")]
    BudgetBelowInitialBatch { budget: usize, b0: usize },
    #[error("initial batch of {b0} cannot cover {classes} classes")]
    InitialBatchTooSmall { b0: usize, classes: usize },
    #[error("oracle returned label {label} for {classes} classes")]
    OracleLabelOutOfRange { label: usize, classes: usize },
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("oracle failed on {id}: {message}; partial query log preserved")]
    OracleAbort {
        id: InstanceId,
        message: String,
        log: QueryLog,
    },
}

/// How the next query batch is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QueryStrategy {
    /// Smallest gap between the two most probable classes, queried first.
    MinMargin,
    /// Largest `1 - max_y p(y)`, queried first.
    MaxUncertainty,
    /// Largest predictive entropy, queried first.
    MaxEntropy,
    /// Uniform random baseline; ignores the model entirely.
    RandomPassive,
}

impl QueryStrategy {
    pub const ALL: [QueryStrategy; 4] = [
        QueryStrategy::MinMargin,
        QueryStrategy::MaxUncertainty,
        QueryStrategy::MaxEntropy,
        QueryStrategy::RandomPassive,
    ];

    /// Short names used in CSV output and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            QueryStrategy::MinMargin => "margin",
            QueryStrategy::MaxUncertainty => "maxunc",
            QueryStrategy::MaxEntropy => "entropy",
            QueryStrategy::RandomPassive => "passive",
        }
    }

    pub fn from_name(name: &str) -> Option<QueryStrategy> {
        match name {
            "margin" => Some(QueryStrategy::MinMargin),
            "maxunc" => Some(QueryStrategy::MaxUncertainty),
            "entropy" => Some(QueryStrategy::MaxEntropy),
            "passive" => Some(QueryStrategy::RandomPassive),
            _ => None,
        }
    }

    /// True when smaller scores are queried first.
    fn prefers_low(&self) -> bool {
        matches!(self, QueryStrategy::MinMargin)
    }
}

/// Active-loop parameters. `b0_fraction` sets the initial uniformly drawn
/// batch as a fraction of the pool (rounded); `label_budget` caps the total
/// number of oracle queries including that initial batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveConfig {
    pub b0_fraction: f64,
    pub batch_size: usize,
    pub label_budget: usize,
    pub strategy: QueryStrategy,
    pub seed: u64,
}

impl ActiveConfig {
    pub fn new(strategy: QueryStrategy, label_budget: usize, seed: u64) -> Self {
        ActiveConfig {
            b0_fraction: 0.1,
            batch_size: 25,
            label_budget,
            strategy,
            seed,
        }
    }
}

/// The initial batch size for a pool: `round(b0_fraction * pool_size)`.
pub fn initial_batch_size(b0_fraction: f64, pool_size: usize) -> usize {
    math::round(b0_fraction * pool_size as f64) as usize
}

/// Answer to a label query: the best-solver label, optionally the full
/// runtime row, and the labeling cost in seconds (the time spent running
/// every portfolio solver on the instance).
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResponse {
    pub label: usize,
    pub runtimes: Option<Vec<f64>>,
    pub cost_s: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("labeling {id} failed: {message}")]
pub struct OracleError {
    pub id: InstanceId,
    pub message: String,
}

/// Source of best-solver labels. Implementations must be deterministic:
/// repeated queries for the same instance return the same answer.
pub trait LabelOracle {
    fn query(&mut self, id: &InstanceId) -> Result<OracleResponse, OracleError>;
}

/// Oracle backed by a labeled dataset; the loop treats the dataset's labels
/// as hidden and reads them only through this interface.
pub struct DatasetOracle<'a> {
    dataset: &'a LabeledDataset,
    index: BTreeMap<&'a InstanceId, usize>,
}

impl<'a> DatasetOracle<'a> {
    pub fn new(dataset: &'a LabeledDataset) -> Self {
        let index = dataset
            .instance_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id, i))
            .collect();
        DatasetOracle { dataset, index }
    }
}

impl LabelOracle for DatasetOracle<'_> {
    fn query(&mut self, id: &InstanceId) -> Result<OracleResponse, OracleError> {
        let &i = self.index.get(id).ok_or_else(|| OracleError {
            id: id.clone(),
            message: String::from("unknown instance"),
        })?;
        let runtimes = self.dataset.runtimes[i].clone();
        Ok(OracleResponse {
            label: self.dataset.labels[i],
            cost_s: runtimes.iter().sum(),
            runtimes: Some(runtimes),
        })
    }
}

/// Oracle backed by a runtime matrix; labeling costs the sum of the row's
/// solver runtimes. Instances no solver finished cannot be labeled.
pub struct RuntimeMatrixOracle<'a> {
    matrix: &'a RuntimeMatrix,
}

impl<'a> RuntimeMatrixOracle<'a> {
    pub fn new(matrix: &'a RuntimeMatrix) -> Self {
        RuntimeMatrixOracle { matrix }
    }
}

impl LabelOracle for RuntimeMatrixOracle<'_> {
    fn query(&mut self, id: &InstanceId) -> Result<OracleResponse, OracleError> {
        let row = self.matrix.row_for(id).ok_or_else(|| OracleError {
            id: id.clone(),
            message: String::from("unknown instance"),
        })?;
        if row.iter().all(|&t| t == self.matrix.cutoff_s()) {
            return Err(OracleError {
                id: id.clone(),
                message: String::from("no solver finished within the cutoff"),
            });
        }
        Ok(OracleResponse {
            label: crate::data::argmin(row),
            cost_s: row.iter().sum(),
            runtimes: Some(row.to_vec()),
        })
    }
}

/// One loop iteration: which instances were queried (with their selection
/// scores; the passive baseline has none), the training-set size afterwards,
/// and held-out accuracy when an evaluation set was supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub iteration: usize,
    pub queried: Vec<(InstanceId, Option<f64>)>,
    pub train_size_after: usize,
    pub test_acc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct QueryLog {
    pub records: Vec<QueryRecord>,
}

impl QueryLog {
    /// All queried instance ids in query order.
    pub fn queried_ids(&self) -> Vec<InstanceId> {
        self.records
            .iter()
            .flat_map(|r| r.queried.iter().map(|(id, _)| id.clone()))
            .collect()
    }

    pub fn final_train_size(&self) -> usize {
        self.records.last().map_or(0, |r| r.train_size_after)
    }
}

/// Uncertainty score of one predictive distribution under a strategy.
/// Lower is more uncertain for [`QueryStrategy::MinMargin`]; higher is more
/// uncertain for the other two. The passive baseline has no score.
pub fn score(strategy: QueryStrategy, p: &ClassDistribution) -> Result<f64, ActiveError> {
    if p.class_count() < 2 {
        return Err(ActiveError::TooFewClasses);
    }
    match strategy {
        QueryStrategy::MinMargin => {
            let (first, second) = p.top_two();
            Ok(first - second)
        }
        QueryStrategy::MaxUncertainty => {
            let (first, _) = p.top_two();
            Ok(1.0 - first)
        }
        QueryStrategy::MaxEntropy => Ok(p.entropy_bits()),
        QueryStrategy::RandomPassive => Err(ActiveError::PassiveHasNoScore),
    }
}

/// Removes `count` uniformly chosen entries from `pool` (order of the
/// remainder preserved) and returns them in draw order. Because removal
/// keeps order and the generator stream continues across calls, drawing
/// `a + b` entries in one call or in two calls of `a` and `b` selects the
/// same entries.
pub(crate) fn draw_without_replacement(
    pool: &mut Vec<usize>,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(count.min(pool.len()));
    for _ in 0..count.min(pool.len()) {
        let i = rng.gen_range(0..pool.len());
        out.push(pool.remove(i));
    }
    out
}

/// Ranks the pool under a strategy and returns the best `b` positions with
/// their scores, best first. Score ties keep pool order. The passive
/// baseline draws uniformly from `rng` instead and yields no scores.
fn select_batch_positions(
    model: Option<&RandomForestModel>,
    rows: &[&[f64]],
    strategy: QueryStrategy,
    b: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, Option<f64>)>, ActiveError> {
    if rows.is_empty() {
        return Err(ActiveError::EmptyPool);
    }
    if b < 1 {
        return Err(ActiveError::BadBatchSize);
    }
    if strategy == QueryStrategy::RandomPassive {
        let mut positions: Vec<usize> = (0..rows.len()).collect();
        let drawn = draw_without_replacement(&mut positions, b, rng);
        return Ok(drawn.into_iter().map(|p| (p, None)).collect());
    }
    let model = model.ok_or(ActiveError::ModelRequired)?;
    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(rows.len());
    for (pos, row) in rows.iter().enumerate() {
        let p = model.predict_proba(row)?;
        scored.push((pos, score(strategy, &p)?));
    }
    if strategy.prefers_low() {
        scored.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    } else {
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    }
    scored.truncate(b);
    Ok(scored.into_iter().map(|(p, s)| (p, Some(s))).collect())
}

/// Public batch selection over `(id, feature row)` pairs; see
/// [`select_batch_positions`] for the ranking rules.
pub fn select_batch(
    model: Option<&RandomForestModel>,
    pool: &[(InstanceId, Vec<f64>)],
    strategy: QueryStrategy,
    b: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(InstanceId, Option<f64>)>, ActiveError> {
    let rows: Vec<&[f64]> = pool.iter().map(|(_, r)| r.as_slice()).collect();
    let picks = select_batch_positions(model, &rows, strategy, b, rng)?;
    Ok(picks
        .into_iter()
        .map(|(pos, s)| (pool[pos].0.clone(), s))
        .collect())
}

/// Fraction of `eval` instances whose predicted solver attains the row's
/// minimum runtime (ties with the stored label count as correct).
pub fn holdout_accuracy(
    model: &RandomForestModel,
    eval: &LabeledDataset,
) -> Result<f64, ForestError> {
    let mut correct = 0usize;
    for (x, runtimes) in eval.features.iter().zip(&eval.runtimes) {
        let pred = model.predict(x)?;
        if runtimes[pred] == row_min(runtimes) {
            correct += 1;
        }
    }
    Ok(correct as f64 / eval.len() as f64)
}

/// Runs the query/refit loop over `pool`, treating its labels as hidden and
/// reading them only through `oracle`.
///
/// The initial batch is drawn uniformly from the `"b0"` seed stream (shared
/// by every strategy under the same seed), then batches of `batch_size` are
/// selected, labeled, and folded into the training set until `label_budget`
/// queries have been spent or the pool is exhausted. Each refit uses a
/// forest seed derived from the iteration index, and accuracy on `eval_set`
/// (if given) is recorded after every refit.
pub fn run_active_loop<O: LabelOracle>(
    pool: &LabeledDataset,
    oracle: &mut O,
    cfg: &ActiveConfig,
    forest_cfg: &ForestConfig,
    eval_set: Option<&LabeledDataset>,
) -> Result<(RandomForestModel, QueryLog), ActiveError> {
    if pool.is_empty() {
        return Err(ActiveError::EmptyPool);
    }
    if !pool.features_complete() {
        return Err(ActiveError::IncompletePool);
    }
    if !(cfg.b0_fraction > 0.0 && cfg.b0_fraction < 1.0) {
        return Err(ActiveError::BadFraction(cfg.b0_fraction));
    }
    if cfg.batch_size < 1 {
        return Err(ActiveError::BadBatchSize);
    }
    let classes = pool.class_count();
    let b0 = initial_batch_size(cfg.b0_fraction, pool.len());
    if b0 < classes {
        return Err(ActiveError::InitialBatchTooSmall { b0, classes });
    }
    if cfg.label_budget < b0 {
        return Err(ActiveError::BudgetBelowInitialBatch {
            budget: cfg.label_budget,
            b0,
        });
    }
    let budget = cfg.label_budget.min(pool.len());

    let mut remaining: Vec<usize> = (0..pool.len()).collect();
    let mut b0_rng = seeding::stream_rng(cfg.seed, "b0", 0);
    let mut passive_rng = seeding::stream_rng(cfg.seed, "passive", 0);

    let mut train_x: Vec<Vec<f64>> = Vec::with_capacity(budget);
    let mut train_y: Vec<usize> = Vec::with_capacity(budget);
    let mut log = QueryLog::default();

    let mut query_all = |picks: &[(usize, Option<f64>)],
                         train_x: &mut Vec<Vec<f64>>,
                         train_y: &mut Vec<usize>,
                         log: &QueryLog|
     -> Result<Vec<(InstanceId, Option<f64>)>, ActiveError> {
        let mut queried = Vec::with_capacity(picks.len());
        for &(pos, s) in picks {
            let id = &pool.instance_ids[pos];
            let answer = oracle.query(id).map_err(|e| ActiveError::OracleAbort {
                id: e.id.clone(),
                message: e.message,
                log: log.clone(),
            })?;
            if answer.label >= classes {
                return Err(ActiveError::OracleLabelOutOfRange {
                    label: answer.label,
                    classes,
                });
            }
            train_x.push(pool.features[pos].clone());
            train_y.push(answer.label);
            queried.push((id.clone(), s));
        }
        Ok(queried)
    };

    let refit = |train_x: &[Vec<f64>], train_y: &[usize], iteration: usize| {
        let cfg_t = ForestConfig {
            seed: seeding::derive_seed(cfg.seed, "refit", iteration as u64),
            ..forest_cfg.clone()
        };
        forest::fit(train_x, train_y, classes, &pool.feature_names, &cfg_t)
    };

    // Initial batch: uniform, oblivious to any model.
    let initial = draw_without_replacement(&mut remaining, b0, &mut b0_rng);
    let picks: Vec<(usize, Option<f64>)> = initial.into_iter().map(|p| (p, None)).collect();
    let queried = query_all(&picks, &mut train_x, &mut train_y, &log)?;
    let mut model = refit(&train_x, &train_y, 0)?;
    let mut record = QueryRecord {
        iteration: 0,
        queried,
        train_size_after: train_y.len(),
        test_acc: None,
    };
    if let Some(eval) = eval_set {
        record.test_acc = Some(holdout_accuracy(&model, eval)?);
    }
    log.records.push(record);

    let mut iteration = 0usize;
    while train_y.len() < budget && !remaining.is_empty() {
        iteration += 1;
        let b = cfg
            .batch_size
            .min(budget - train_y.len())
            .min(remaining.len());
        let rows: Vec<&[f64]> = remaining
            .iter()
            .map(|&pos| pool.features[pos].as_slice())
            .collect();
        let picks =
            select_batch_positions(Some(&model), &rows, cfg.strategy, b, &mut passive_rng)?;
        // Map batch-relative positions back to pool positions and shrink the
        // remaining pool, preserving its order.
        let pool_picks: Vec<(usize, Option<f64>)> = picks
            .iter()
            .map(|&(rel, s)| (remaining[rel], s))
            .collect();
        let taken: BTreeSet<usize> = pool_picks.iter().map(|&(pos, _)| pos).collect();
        remaining.retain(|pos| !taken.contains(pos));
        let queried = query_all(&pool_picks, &mut train_x, &mut train_y, &log)?;
        model = refit(&train_x, &train_y, iteration)?;
        let mut record = QueryRecord {
            iteration,
            queried,
            train_size_after: train_y.len(),
            test_acc: None,
        };
        if let Some(eval) = eval_set {
            record.test_acc = Some(holdout_accuracy(&model, eval)?);
        }
        log.records.push(record);
    }
    Ok((model, log))
}
