//! Core algorithms for per-instance SAT solver selection.
//!
//! The crate covers the full selection pipeline in memory, with no IO:
//!
//! * [`data`] — runtime and feature matrices, portfolio slicing, best-solver
//!   labels, and virtual-best-solver statistics.
//! * [`preprocess`] — constant-feature and trivial-instance removal,
//!   standardization, and k-nearest-neighbour imputation of missing features.
//! * [`forest`] — a random forest classifier built on entropy-gain decision
//!   trees with per-tree feature subsets.
//! * [`active`] — pool-based selective sampling: uncertainty scoring, batch
//!   selection, and the query/refit loop against a labeling oracle.
//! * [`eval`] — accuracy and runtime-regret metrics, k-fold cross-validation,
//!   learning curves, and a synthetic dataset generator.
//! * [`features`] — a DIMACS CNF parser and structural feature extractors
//!   (counts, literal balance, clause arities, Horn statistics, graph degrees).
//!
//! The crate is `no_std` (with `alloc`); file formats and the command line
//! live in the companion `satsel` crate. All randomness is driven by
//! explicitly seeded streams (see [`seeding`]), so every result is
//! reproducible from a single master seed.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod active;
pub mod data;
pub mod eval;
pub mod features;
pub mod forest;
mod math;
pub mod preprocess;
pub mod seeding;

pub use active::{ActiveConfig, QueryLog, QueryStrategy};
pub use data::{FeatureMatrix, InstanceId, LabeledDataset, Portfolio, RuntimeMatrix};
pub use eval::MetricsReport;
pub use forest::{ClassDistribution, ForestConfig, RandomForestModel};
