//! Aggregate metrics over question results.

use crate::run::QuestionResult;
use medsearch_runtime::StopReason;
use serde::{Deserialize, Serialize};

/// Fraction of runs that finished with the policy's own answer inside both
/// budgets. Forced answers — even ones later judged correct — do not count:
/// termination is structural, answer quality is Avg@k's business.
pub fn termination_rate(results: &[QuestionResult]) -> f64 {
    let total: usize = results.iter().map(|r| r.runs.len()).sum();
    if total == 0 {
        return 0.0;
    }
    let terminated = results
        .iter()
        .flat_map(|r| &r.runs)
        .filter(|run| run.outcome.stop_reason == StopReason::Answered)
        .count();
    terminated as f64 / total as f64
}

/// Mean tool calls over judged-correct runs only. Undefined without at least
/// one correct run.
pub fn avg_tool_calls_correct(results: &[QuestionResult]) -> Result<f64, crate::run::EvalError> {
    let correct: Vec<u32> = results
        .iter()
        .flat_map(|r| &r.runs)
        .filter(|run| run.judged_correct)
        .map(|run| run.tool_calls)
        .collect();
    if correct.is_empty() {
        return Err(crate::run::EvalError::NoCorrectRuns);
    }
    Ok(correct.iter().map(|&c| f64::from(c)).sum::<f64>() / correct.len() as f64)
}

/// Which questions enter the tool-call distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetainRule {
    /// Keep questions the evaluated agent answered correctly at least once.
    AtLeastOneCorrect,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBucket {
    /// Inclusive lower bound of the bucket, in tool calls.
    pub lo: u32,
    /// Exclusive upper bound.
    pub hi: u32,
    pub count: usize,
}

/// Histogram over the per-question mean tool calls of retained questions,
/// plus the mean of those means for cross-dataset comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCallDistribution {
    pub bucket_width: u32,
    pub buckets: Vec<HistogramBucket>,
    pub mean: f64,
    pub retained_questions: usize,
}

pub fn tool_call_distribution(
    results: &[QuestionResult],
    retain: RetainRule,
    bucket_width: u32,
) -> ToolCallDistribution {
    assert!(bucket_width >= 1);
    let retained: Vec<f64> = results
        .iter()
        .filter(|r| match retain {
            RetainRule::AtLeastOneCorrect => r.runs.iter().any(|run| run.judged_correct),
            RetainRule::All => true,
        })
        .map(|r| {
            let total: u32 = r.runs.iter().map(|run| run.tool_calls).sum();
            f64::from(total) / r.runs.len() as f64
        })
        .collect();

    let mut buckets: Vec<HistogramBucket> = Vec::new();
    for &mean_calls in &retained {
        let lo = (mean_calls as u32 / bucket_width) * bucket_width;
        match buckets.iter_mut().find(|b| b.lo == lo) {
            Some(bucket) => bucket.count += 1,
            None => buckets.push(HistogramBucket {
                lo,
                hi: lo + bucket_width,
                count: 1,
            }),
        }
    }
    buckets.sort_by_key(|b| b.lo);
    let mean = if retained.is_empty() {
        0.0
    } else {
        retained.iter().sum::<f64>() / retained.len() as f64
    };
    ToolCallDistribution {
        bucket_width,
        buckets,
        mean,
        retained_questions: retained.len(),
    }
}
