//! Run configuration with layered resolution.
//!
//! Values resolve in precedence order: command-line flag, then config
//! file, then built-in default. The fully resolved configuration is
//! written into every output directory so a run can be reproduced from
//! its artifacts alone.

use std::path::Path;

use serde::{Deserialize, Serialize};

use satsel_core::active::QueryStrategy;
use satsel_core::data::Portfolio;

use crate::CliError;

/// A fully resolved run configuration; every field has a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Preset name or comma-separated solver list; `None` keeps every
    /// solver column found in the runtime file.
    pub portfolio: Option<String>,
    pub cutoff_s: f64,
    pub strategy: String,
    pub trees: usize,
    pub b0_fraction: f64,
    pub batch_size: usize,
    pub knn: usize,
    pub folds: usize,
    /// `None` lets the query loop spend up to the whole pool.
    pub label_budget: Option<usize>,
    pub test_fraction: f64,
    pub curve_seeds: usize,
    pub strategies: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            portfolio: None,
            cutoff_s: 1200.0,
            strategy: String::from("margin"),
            trees: 99,
            b0_fraction: 0.1,
            batch_size: 25,
            knn: 3,
            folds: 10,
            label_budget: None,
            test_fraction: 0.2,
            curve_seeds: 5,
            strategies: String::from("margin,passive"),
        }
    }
}

/// The same fields with every value optional; used both for config files
/// and for collecting explicitly passed command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverlay {
    pub seed: Option<u64>,
    pub portfolio: Option<String>,
    pub cutoff_s: Option<f64>,
    pub strategy: Option<String>,
    pub trees: Option<usize>,
    pub b0_fraction: Option<f64>,
    pub batch_size: Option<usize>,
    pub knn: Option<usize>,
    pub folds: Option<usize>,
    pub label_budget: Option<usize>,
    pub test_fraction: Option<f64>,
    pub curve_seeds: Option<usize>,
    pub strategies: Option<String>,
}

impl RunConfig {
    /// Applies file-level then flag-level overrides on the defaults.
    pub fn resolve(file: Option<ConfigOverlay>, flags: ConfigOverlay) -> RunConfig {
        let mut cfg = RunConfig::default();
        if let Some(overlay) = file {
            cfg.apply(overlay);
        }
        cfg.apply(flags);
        cfg
    }

    fn apply(&mut self, overlay: ConfigOverlay) {
        let ConfigOverlay {
            seed,
            portfolio,
            cutoff_s,
            strategy,
            trees,
            b0_fraction,
            batch_size,
            knn,
            folds,
            label_budget,
            test_fraction,
            curve_seeds,
            strategies,
        } = overlay;
        if let Some(v) = seed {
            self.seed = v;
        }
        if let Some(v) = portfolio {
            self.portfolio = Some(v);
        }
        if let Some(v) = cutoff_s {
            self.cutoff_s = v;
        }
        if let Some(v) = strategy {
            self.strategy = v;
        }
        if let Some(v) = trees {
            self.trees = v;
        }
        if let Some(v) = b0_fraction {
            self.b0_fraction = v;
        }
        if let Some(v) = batch_size {
            self.batch_size = v;
        }
        if let Some(v) = knn {
            self.knn = v;
        }
        if let Some(v) = folds {
            self.folds = v;
        }
        if let Some(v) = label_budget {
            self.label_budget = Some(v);
        }
        if let Some(v) = test_fraction {
            self.test_fraction = v;
        }
        if let Some(v) = curve_seeds {
            self.curve_seeds = v;
        }
        if let Some(v) = strategies {
            self.strategies = v;
        }
    }

    pub fn strategy(&self) -> Result<QueryStrategy, CliError> {
        parse_strategy(&self.strategy)
    }

    pub fn strategies(&self) -> Result<Vec<QueryStrategy>, CliError> {
        parse_strategies(&self.strategies)
    }

    pub fn portfolio(&self) -> Result<Option<Portfolio>, CliError> {
        match &self.portfolio {
            None => Ok(None),
            Some(spec) => parse_portfolio(spec).map(Some),
        }
    }
}

/// Loads a JSON config file into an overlay.
pub fn load_config_file(path: &Path) -> Result<ConfigOverlay, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

pub fn parse_strategy(name: &str) -> Result<QueryStrategy, CliError> {
    QueryStrategy::from_name(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown strategy `{name}`; expected one of margin, maxunc, entropy, passive"
        ))
    })
}

/// Parses a comma-separated strategy list; `all` expands to every
/// strategy.
pub fn parse_strategies(spec: &str) -> Result<Vec<QueryStrategy>, CliError> {
    if spec == "all" {
        return Ok(QueryStrategy::ALL.to_vec());
    }
    let mut out = Vec::new();
    for name in spec.split(',') {
        let s = parse_strategy(name.trim())?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage(String::from("empty strategy list")));
    }
    Ok(out)
}

/// Resolves a portfolio: a known preset name, or a comma-separated list
/// of solver column names.
pub fn parse_portfolio(spec: &str) -> Result<Portfolio, CliError> {
    if spec.contains(',') {
        let names: Vec<String> = spec
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        return Portfolio::new(names)
            .map_err(|e| CliError::Usage(format!("bad portfolio list: {e}")));
    }
    Portfolio::from_preset(spec).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown portfolio `{spec}`; available presets: {}",
            satsel_core::data::PRESET_NAMES.join(", ")
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_documented_values() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.cutoff_s, 1200.0);
        assert_eq!(cfg.trees, 99);
        assert_eq!(cfg.b0_fraction, 0.1);
        assert_eq!(cfg.batch_size, 25);
        assert_eq!(cfg.knn, 3);
        assert_eq!(cfg.folds, 10);
        assert_eq!(cfg.strategy, "margin");
        assert_eq!(cfg.portfolio, None);
    }

    #[test]
    fn flags_override_file_overrides_defaults() {
        let file = ConfigOverlay {
            trees: Some(50),
            knn: Some(5),
            ..Default::default()
        };
        let flags = ConfigOverlay {
            trees: Some(10),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Some(file), flags);
        assert_eq!(cfg.trees, 10, "flag wins over file");
        assert_eq!(cfg.knn, 5, "file wins over default");
        assert_eq!(cfg.folds, 10, "default survives");
    }

    #[test]
    fn strategy_and_portfolio_parsing() {
        assert_eq!(parse_strategy("margin").unwrap(), QueryStrategy::MinMargin);
        assert!(parse_strategy("gradient").is_err());
        assert_eq!(parse_strategies("all").unwrap().len(), 4);
        assert_eq!(
            parse_strategies("margin, passive").unwrap(),
            vec![QueryStrategy::MinMargin, QueryStrategy::RandomPassive]
        );
        assert_eq!(parse_portfolio("preset3").unwrap().len(), 3);
        assert_eq!(parse_portfolio("A,B,C").unwrap().len(), 3);
        let err = parse_portfolio("preset7").unwrap_err();
        let CliError::Usage(message) = err else {
            panic!("expected usage error");
        };
        assert!(message.contains("preset3"), "{message}");
        assert!(message.contains("preset10"), "{message}");
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let err = serde_json::from_str::<ConfigOverlay>("{\"tres\": 10}");
        assert!(err.is_err());
    }
}
