//! Clustering metrics, the SyntF baseline, the synthetic corpus generator
//! and report formatting.
//!
//! Clusters are scored per predicate: a role label names a cluster local
//! to its predicate. For predicate `v` with `N_v` arguments,
//!
//! ```text
//! PU_v = (1/N_v) Σ_clusters max_gold |c ∩ g|
//! CO_v = (1/N_v) Σ_gold max_clusters |g ∩ c|
//! ```
//!
//! Corpus scores are micro-averages weighted by `N_v`, and F1 is the
//! harmonic mean of the corpus-level PU and CO.

mod labeled;
mod report;
mod synthetic;
mod syntf;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::corpus::PredicateInstance;

pub use labeled::{append_role_columns, label_sentences, read_predictions, PredictionKey};
pub use report::{format_csv, format_table};
pub use synthetic::{
    generate_synthetic, linked_deprel, SyntheticSpec, CANONICAL_DEPRELS, PASSIVE_AGENT_DEPREL,
};
pub use syntf::{syntf_baseline, SyntfClusters, SYNTF_TOP_RELATIONS};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("argument at sentence {sentence_id}, token {token} has no gold role")]
    MissingGold { sentence_id: usize, token: usize },
    #[error("no prediction for argument at sentence {sentence_id}, predicate token {predicate_token}, token {token}")]
    MissingPrediction {
        sentence_id: usize,
        predicate_token: usize,
        token: usize,
    },
    #[error("{instances} instances but {predictions} prediction rows")]
    LengthMismatch { instances: usize, predictions: usize },
    #[error("nothing to evaluate")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PredicateScore {
    pub purity: f64,
    pub collocation: f64,
    pub arguments: u64,
}

/// Purity, collocation and F1, all in percent.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterEvaluation {
    pub purity: f64,
    pub collocation: f64,
    pub f1: f64,
    pub per_predicate: BTreeMap<String, PredicateScore>,
}

pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

impl ClusterEvaluation {
    /// Corpus-level scores without a per-predicate breakdown.
    pub fn from_scores(purity: f64, collocation: f64) -> Self {
        ClusterEvaluation {
            purity,
            collocation,
            f1: harmonic_mean(purity, collocation),
            per_predicate: BTreeMap::new(),
        }
    }
}

/// Co-occurrence counts of (gold class, cluster) per predicate.
#[derive(Clone, Debug, Default)]
pub struct ClusterTally {
    counts: BTreeMap<String, BTreeMap<(String, String), u64>>,
}

impl ClusterTally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, predicate: &str, gold: &str, cluster: &str) {
        *self
            .counts
            .entry(predicate.to_string())
            .or_default()
            .entry((gold.to_string(), cluster.to_string()))
            .or_default() += 1;
    }

    pub fn evaluate(&self) -> Result<ClusterEvaluation, EvalError> {
        let mut per_predicate = BTreeMap::new();
        let (mut total, mut pu_sum, mut co_sum) = (0u64, 0u64, 0u64);
        for (predicate, table) in &self.counts {
            let mut best_per_cluster: BTreeMap<&str, u64> = BTreeMap::new();
            let mut best_per_gold: BTreeMap<&str, u64> = BTreeMap::new();
            let mut n = 0;
            for ((gold, cluster), &c) in table {
                n += c;
                let b = best_per_cluster.entry(cluster).or_default();
                *b = (*b).max(c);
                let b = best_per_gold.entry(gold).or_default();
                *b = (*b).max(c);
            }
            let pu: u64 = best_per_cluster.values().sum();
            let co: u64 = best_per_gold.values().sum();
            per_predicate.insert(
                predicate.clone(),
                PredicateScore {
                    purity: 100.0 * pu as f64 / n as f64,
                    collocation: 100.0 * co as f64 / n as f64,
                    arguments: n,
                },
            );
            total += n;
            pu_sum += pu;
            co_sum += co;
        }
        if total == 0 {
            return Err(EvalError::Empty);
        }
        let purity = 100.0 * pu_sum as f64 / total as f64;
        let collocation = 100.0 * co_sum as f64 / total as f64;
        Ok(ClusterEvaluation {
            purity,
            collocation,
            f1: harmonic_mean(purity, collocation),
            per_predicate,
        })
    }
}

/// Scores hard role labels (one row per instance, one label per argument)
/// against the instances' gold roles.
pub fn evaluate_clustering(
    instances: &[PredicateInstance],
    predicted: &[Vec<usize>],
) -> Result<ClusterEvaluation, EvalError> {
    if instances.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            instances: instances.len(),
            predictions: predicted.len(),
        });
    }
    let mut tally = ClusterTally::new();
    for (inst, labels) in instances.iter().zip(predicted) {
        if inst.len() != labels.len() {
            return Err(EvalError::LengthMismatch {
                instances: inst.len(),
                predictions: labels.len(),
            });
        }
        for (arg, label) in inst.args.iter().zip(labels) {
            let gold = arg.gold_role.as_deref().ok_or(EvalError::MissingGold {
                sentence_id: inst.sentence_id,
                token: arg.head_token,
            })?;
            tally.add(&inst.predicate, gold, &label.to_string());
        }
    }
    tally.evaluate()
}
