//! DIMACS CNF parsing and structural feature extraction.
//!
//! The extractor emits a fixed battery of 43 cheap syntactic features per
//! formula: clause and variable counts with their ratios, literal balance,
//! clause arities, Horn statistics, and degree statistics of three derived
//! graphs. Value families are summarized by five statistics {mean,
//! variation coefficient, min, max, entropy}; everything is computable
//! without running a solver.
//!
//! Aggregations sort their inputs first, so renaming variables or
//! reordering clauses reproduces every feature bit for bit.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::forest::entropy_of_counts;
use crate::math;
use crate::seeding;

/// Identifies the column set emitted by [`extract_all`]; bump when the
/// battery changes so downstream CSV files are self-describing.
pub const FEATURE_SCHEMA_VERSION: &str = "structural-v1";

/// Upper bound on clause-pair checks when building the clause graph.
pub const CG_PAIR_CHECK_CAP: u128 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("no `p cnf` header found")]
    MissingHeader,
    #[error("line {line}: malformed header `{text}`")]
    BadHeader { line: usize, text: String },
    #[error("line {line}: second header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: `{token}` is not an integer")]
    NonIntegerToken { line: usize, token: String },
    #[error("line {line}: empty clause")]
    EmptyClause { line: usize },
    #[error("line {line}: variable {var} exceeds the declared {max} variables")]
    VariableOutOfRange { line: usize, var: i64, max: usize },
    #[error("line {line}: literal before the header")]
    LiteralBeforeHeader { line: usize },
}

/// Non-fatal oddities found while parsing; the formula is still usable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseWarning {
    /// Header promised a different number of clauses than the file holds.
    ClauseCountMismatch { declared: usize, found: usize },
    /// Final clause ended at end of input instead of a `0` terminator.
    UnterminatedClause { line: usize },
}

/// A propositional formula in conjunctive normal form.
///
/// Literals are nonzero signed variable indices with every `|literal|`
/// in `1..=num_vars`. Clauses are kept exactly as parsed: duplicate
/// literals and tautologies are not simplified away.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i64>>,
}

impl CnfFormula {
    /// Total number of literal occurrences across all clauses.
    pub fn literal_count(&self) -> usize {
        self.clauses.iter().map(Vec::len).sum()
    }
}

/// Reads a DIMACS CNF file: `c` comment lines, one `p cnf <vars> <clauses>`
/// header, then whitespace-separated literals with `0` ending each clause.
///
/// A clause count differing from the header and a final clause missing its
/// terminator are tolerated and reported as warnings. A literal whose
/// variable exceeds the header, an empty clause, or a non-integer token is
/// an error carrying the offending line number.
pub fn parse_dimacs(text: &str) -> Result<(CnfFormula, Vec<ParseWarning>), ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut last_token_line = 0usize;

    for (index, raw_line) in text.lines().enumerate() {
        let line = index + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::DuplicateHeader { line });
            }
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            let bad = || ParseError::BadHeader {
                line,
                text: trimmed.to_string(),
            };
            if tokens.len() != 4 || tokens[0] != "p" || tokens[1] != "cnf" {
                return Err(bad());
            }
            let vars: usize = tokens[2].parse().map_err(|_| bad())?;
            let declared: usize = tokens[3].parse().map_err(|_| bad())?;
            header = Some((vars, declared));
            continue;
        }
        let (num_vars, _) = header.ok_or(ParseError::LiteralBeforeHeader { line })?;
        for token in trimmed.split_whitespace() {
            let literal: i64 = token.parse().map_err(|_| ParseError::NonIntegerToken {
                line,
                token: token.to_string(),
            })?;
            last_token_line = line;
            if literal == 0 {
                if current.is_empty() {
                    return Err(ParseError::EmptyClause { line });
                }
                clauses.push(core::mem::take(&mut current));
            } else {
                let var = literal.unsigned_abs();
                if var as u128 > num_vars as u128 {
                    return Err(ParseError::VariableOutOfRange {
                        line,
                        var: literal.abs(),
                        max: num_vars,
                    });
                }
                current.push(literal);
            }
        }
    }

    let (num_vars, declared) = header.ok_or(ParseError::MissingHeader)?;
    let mut warnings = Vec::new();
    if !current.is_empty() {
        warnings.push(ParseWarning::UnterminatedClause {
            line: last_token_line,
        });
        clauses.push(current);
    }
    if clauses.len() != declared {
        warnings.push(ParseWarning::ClauseCountMismatch {
            declared,
            found: clauses.len(),
        });
    }
    Ok((CnfFormula { num_vars, clauses }, warnings))
}

/// Writes the formula back out in DIMACS form, one clause per line.
pub fn to_dimacs(f: &CnfFormula) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", f.num_vars, f.clauses.len());
    for clause in &f.clauses {
        for literal in clause {
            let _ = write!(out, "{literal} ");
        }
        let _ = writeln!(out, "0");
    }
    out
}

/// An ordered list of named feature values.
///
/// Order is fixed by construction so extracted rows line up column for
/// column; every stored value is finite.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    names: Vec<String>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new() -> Self {
        FeatureVector::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        debug_assert!(value.is_finite());
        self.names.push(name.into());
        self.values.push(value);
    }

    pub fn extend(&mut self, other: FeatureVector) {
        self.names.extend(other.names);
        self.values.extend(other.values);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.names
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
    }

    pub fn into_parts(self) -> (Vec<String>, Vec<f64>) {
        (self.names, self.values)
    }
}

/// Five-statistic summary of fraction-valued data in `[0, 1]`.
///
/// Entropy comes from a 100-bin equal-width histogram over the unit
/// interval. Values are sorted before aggregation, so any input ordering
/// yields identical floats. Empty input gives all zeros.
fn fraction_battery(prefix: &str, values: &[f64]) -> FeatureVector {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut bins = vec![0usize; 100];
    for &x in &sorted {
        let bin = ((x * 100.0) as usize).min(99);
        bins[bin] += 1;
    }
    battery_from(prefix, &sorted, entropy_of_counts(&bins, sorted.len()))
}

/// Five-statistic summary of non-negative integer counts.
///
/// Entropy comes from the histogram over distinct values, which suits
/// unbounded count data better than fixed-width bins.
fn count_battery(prefix: &str, values: &[usize]) -> FeatureVector {
    let mut sorted: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in values {
        *histogram.entry(v).or_insert(0) += 1;
    }
    let counts: Vec<usize> = histogram.values().copied().collect();
    battery_from(prefix, &sorted, entropy_of_counts(&counts, values.len()))
}

fn battery_from(prefix: &str, sorted: &[f64], entropy: f64) -> FeatureVector {
    let mean = math::mean(sorted);
    let coefvar = if mean == 0.0 {
        0.0
    } else {
        math::population_std(sorted) / mean
    };
    let (min, max) = match sorted {
        [] => (0.0, 0.0),
        [first, .., last] => (*first, *last),
        [only] => (*only, *only),
    };
    let mut out = FeatureVector::new();
    out.push(alloc::format!("{prefix}-mean"), mean);
    out.push(alloc::format!("{prefix}-coefvar"), coefvar);
    out.push(alloc::format!("{prefix}-min"), min);
    out.push(alloc::format!("{prefix}-max"), max);
    out.push(alloc::format!("{prefix}-entropy"), entropy);
    out
}

/// Clause and variable counts with their ratios.
///
/// Emits `nclauses`, `nvars`, both ratio directions, and their squares.
/// Ratios with a zero denominator are defined as 0 so empty formulas
/// extract cleanly.
pub fn basic_counts(f: &CnfFormula) -> FeatureVector {
    let c = f.clauses.len() as f64;
    let v = f.num_vars as f64;
    let cv = if v == 0.0 { 0.0 } else { c / v };
    let vc = if c == 0.0 { 0.0 } else { v / c };
    let mut out = FeatureVector::new();
    out.push("nclauses", c);
    out.push("nvars", v);
    out.push("clauses-per-var", cv);
    out.push("vars-per-clause", vc);
    out.push("clauses-per-var-sq", cv * cv);
    out.push("vars-per-clause-sq", vc * vc);
    out
}

/// Positive-literal balance, per clause and per variable.
///
/// The per-clause family is each clause's fraction of positive literals;
/// the per-variable family is each occurring variable's fraction of
/// positive occurrences. Occurrences are counted as parsed, duplicates
/// included.
pub fn balance_features(f: &CnfFormula) -> FeatureVector {
    let clause_fractions: Vec<f64> = f
        .clauses
        .iter()
        .map(|clause| {
            let positive = clause.iter().filter(|&&l| l > 0).count();
            positive as f64 / clause.len() as f64
        })
        .collect();

    let mut positive = vec![0usize; f.num_vars + 1];
    let mut total = vec![0usize; f.num_vars + 1];
    for clause in &f.clauses {
        for &literal in clause {
            let var = literal.unsigned_abs() as usize;
            total[var] += 1;
            if literal > 0 {
                positive[var] += 1;
            }
        }
    }
    let var_fractions: Vec<f64> = (1..=f.num_vars)
        .filter(|&v| total[v] > 0)
        .map(|v| positive[v] as f64 / total[v] as f64)
        .collect();

    let mut out = fraction_battery("clause-pos-frac", &clause_fractions);
    out.extend(fraction_battery("var-pos-frac", &var_fractions));
    out
}

/// Fractions of clauses with exactly one, two, and three literals.
pub fn arity_features(f: &CnfFormula) -> FeatureVector {
    let c = f.clauses.len();
    let of_len = |len: usize| {
        if c == 0 {
            0.0
        } else {
            f.clauses.iter().filter(|cl| cl.len() == len).count() as f64 / c as f64
        }
    };
    let mut out = FeatureVector::new();
    out.push("unary-frac", of_len(1));
    out.push("binary-frac", of_len(2));
    out.push("ternary-frac", of_len(3));
    out
}

/// Horn clause statistics.
///
/// A clause is Horn when it carries at most one positive literal. Emits
/// the Horn fraction plus the count battery of each variable's occurrences
/// in Horn clauses, taken over all declared variables so unused ones
/// contribute zeros.
pub fn horn_features(f: &CnfFormula) -> FeatureVector {
    let is_horn = |clause: &[i64]| clause.iter().filter(|&&l| l > 0).count() <= 1;
    let horn_count = f.clauses.iter().filter(|cl| is_horn(cl)).count();
    let fraction = if f.clauses.is_empty() {
        0.0
    } else {
        horn_count as f64 / f.clauses.len() as f64
    };

    let mut occurrences = vec![0usize; f.num_vars + 1];
    for clause in &f.clauses {
        if is_horn(clause) {
            for &literal in clause {
                occurrences[literal.unsigned_abs() as usize] += 1;
            }
        }
    }
    let mut out = FeatureVector::new();
    out.push("horn-frac", fraction);
    out.extend(count_battery("horn-var-count", &occurrences[1..]));
    out
}

/// Degree statistics of the variable-clause, variable, and clause graphs.
///
/// The variable-clause graph counts literal occurrences, so its total
/// variable-side degree equals its total clause-side degree equals the
/// number of literals. The variable graph joins variables that share a
/// clause; the clause graph joins clauses that share a variable with
/// opposite sign. Clause-graph construction stops at
/// [`CG_PAIR_CHECK_CAP`] pair checks; past that, degrees are estimated
/// from uniformly sampled pairs (a fixed internal stream, so repeated
/// extraction of the same file agrees) and `cg-capped` is set to 1.
pub fn graph_degree_features(f: &CnfFormula) -> FeatureVector {
    let mut var_degree = vec![0usize; f.num_vars + 1];
    for clause in &f.clauses {
        for &literal in clause {
            var_degree[literal.unsigned_abs() as usize] += 1;
        }
    }
    let clause_degrees: Vec<usize> = f.clauses.iter().map(Vec::len).collect();

    let mut vg_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for clause in &f.clauses {
        let vars: BTreeSet<usize> = clause
            .iter()
            .map(|l| l.unsigned_abs() as usize)
            .collect();
        let vars: Vec<usize> = vars.into_iter().collect();
        for (i, &a) in vars.iter().enumerate() {
            for &b in &vars[i + 1..] {
                vg_edges.insert((a, b));
            }
        }
    }
    let mut vg_degree = vec![0usize; f.num_vars + 1];
    for &(a, b) in &vg_edges {
        vg_degree[a] += 1;
        vg_degree[b] += 1;
    }

    let (cg_mean, cg_coefvar, cg_capped) = clause_graph_stats(f);

    let mut out = count_battery("vcg-var-deg", &var_degree[1..]);
    out.extend(count_battery("vcg-clause-deg", &clause_degrees));
    out.extend(count_battery("vg-deg", &vg_degree[1..]));
    out.push("cg-deg-mean", cg_mean);
    out.push("cg-deg-coefvar", cg_coefvar);
    out.push("cg-capped", cg_capped);
    out
}

fn clause_graph_stats(f: &CnfFormula) -> (f64, f64, f64) {
    let c = f.clauses.len();
    if c < 2 {
        return (0.0, 0.0, 0.0);
    }
    let sets: Vec<BTreeSet<i64>> = f
        .clauses
        .iter()
        .map(|clause| clause.iter().copied().collect())
        .collect();
    let opposed = |a: usize, b: usize| {
        let (small, large) = if sets[a].len() <= sets[b].len() {
            (&sets[a], &sets[b])
        } else {
            (&sets[b], &sets[a])
        };
        small.iter().any(|&l| large.contains(&-l))
    };

    let total_pairs = (c as u128) * (c as u128 - 1) / 2;
    let mut degrees = vec![0usize; c];
    let capped = total_pairs > CG_PAIR_CHECK_CAP;
    if !capped {
        for i in 0..c {
            for j in i + 1..c {
                if opposed(i, j) {
                    degrees[i] += 1;
                    degrees[j] += 1;
                }
            }
        }
    } else {
        let mut rng = seeding::stream_rng(0, "cg-pairs", 0);
        let mut checks: u128 = 0;
        while checks < CG_PAIR_CHECK_CAP {
            let i = rng.gen_range(0..c);
            let j = rng.gen_range(0..c);
            if i == j {
                continue;
            }
            if opposed(i, j) {
                degrees[i] += 1;
                degrees[j] += 1;
            }
            checks += 1;
        }
    }
    let scale = if capped {
        total_pairs as f64 / CG_PAIR_CHECK_CAP as f64
    } else {
        1.0
    };
    let mut scaled: Vec<f64> = degrees.iter().map(|&d| d as f64 * scale).collect();
    scaled.sort_unstable_by(f64::total_cmp);
    let mean = math::mean(&scaled);
    let coefvar = if mean == 0.0 {
        0.0
    } else {
        math::population_std(&scaled) / mean
    };
    (mean, coefvar, if capped { 1.0 } else { 0.0 })
}

/// Runs every extractor family and concatenates the results in the fixed
/// order: counts, balance, arities, Horn, graph degrees. 43 columns.
pub fn extract_all(f: &CnfFormula) -> FeatureVector {
    let mut out = basic_counts(f);
    out.extend(balance_features(f));
    out.extend(arity_features(f));
    out.extend(horn_features(f));
    out.extend(graph_degree_features(f));
    out
}
