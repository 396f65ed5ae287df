//! Rule-based trajectory filtering: format anomalies, near-duplicate search
//! queries (word-trigram Jaccard), action/observation cycles, and
//! non-termination.

use medsearch_core::{validate_trajectory, ToolAction, Trajectory, Violation};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FilterThresholds {
    /// n-gram size for query overlap (word n-grams).
    pub ngram: usize,
    pub jaccard_threshold: f64,
    /// Drop when an identical (action, observation) pair recurs this many
    /// times.
    pub cycle_limit: usize,
}

impl Default for FilterThresholds {
    fn default() -> Self {
        Self {
            ngram: 3,
            jaccard_threshold: 0.8,
            cycle_limit: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DropReason {
    FormatAnomaly(Vec<Violation>),
    RepeatedQuery {
        first: String,
        second: String,
        jaccard: f64,
    },
    CircularReasoning {
        occurrences: usize,
    },
    NonTermination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FilterDecision {
    Keep,
    Drop(DropReason),
}

/// Word n-gram shingle set; texts shorter than n words collapse to a single
/// whole-text shingle so identical short queries still overlap fully.
fn shingles(text: &str, n: usize) -> BTreeSet<String> {
    let words: Vec<&str> = text.split_whitespace().collect();
    if words.is_empty() {
        return BTreeSet::new();
    }
    if words.len() < n {
        return BTreeSet::from([words.join(" ")]);
    }
    words.windows(n).map(|w| w.join(" ")).collect()
}

/// Jaccard similarity over word n-grams.
pub fn trigram_jaccard(a: &str, b: &str, n: usize) -> f64 {
    let sa = shingles(a, n);
    let sb = shingles(b, n);
    if sa.is_empty() && sb.is_empty() {
        return 1.0;
    }
    if sa.is_empty() || sb.is_empty() {
        return 0.0;
    }
    let intersection = sa.intersection(&sb).count();
    let union = sa.union(&sb).count();
    intersection as f64 / union as f64
}

fn observation_hash(text: &str) -> u64 {
    let mut hasher = DefaultHasher::new();
    text.hash(&mut hasher);
    hasher.finish()
}

/// Apply the rule filters in order: format anomalies, near-duplicate
/// queries, cycles, then termination. Pure per trajectory, so batch
/// filtering is idempotent and order-independent.
pub fn rule_filter(traj: &Trajectory, thresholds: &FilterThresholds) -> FilterDecision {
    let violations = validate_trajectory(traj);
    if !violations.is_empty() {
        return FilterDecision::Drop(DropReason::FormatAnomaly(violations));
    }

    let queries: Vec<&str> = traj
        .history
        .steps
        .iter()
        .filter_map(|s| match &s.action {
            ToolAction::Search { queries } => Some(queries),
            _ => None,
        })
        .flatten()
        .map(String::as_str)
        .collect();
    for i in 0..queries.len() {
        for j in (i + 1)..queries.len() {
            let jaccard = trigram_jaccard(queries[i], queries[j], thresholds.ngram);
            if jaccard >= thresholds.jaccard_threshold {
                return FilterDecision::Drop(DropReason::RepeatedQuery {
                    first: queries[i].to_string(),
                    second: queries[j].to_string(),
                    jaccard,
                });
            }
        }
    }

    let mut pair_counts: BTreeMap<(String, u64), usize> = BTreeMap::new();
    for step in &traj.history.steps {
        if step.action.is_answer() {
            continue;
        }
        let key = (
            serde_json::to_string(&step.action).expect("action serializes"),
            observation_hash(&step.observation),
        );
        let count = pair_counts.entry(key).or_insert(0);
        *count += 1;
        if *count >= thresholds.cycle_limit {
            return FilterDecision::Drop(DropReason::CircularReasoning {
                occurrences: *count,
            });
        }
    }

    if !traj.history.is_terminated() {
        return FilterDecision::Drop(DropReason::NonTermination);
    }

    FilterDecision::Keep
}
