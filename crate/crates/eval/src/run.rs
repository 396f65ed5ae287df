//! Benchmark execution and the evaluation report.

use crate::judge::AnswerJudge;
use crate::metrics::{
    avg_tool_calls_correct, termination_rate, tool_call_distribution, RetainRule,
    ToolCallDistribution,
};
use medsearch_core::{derive_seed, Query, TokenCounter};
use medsearch_env::{ToolEnvironment, ToolError};
use medsearch_runtime::{run_episode, AgentConfig, EpisodeOutcome, Policy};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::panic::AssertUnwindSafe;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use thiserror::Error;

/// Evaluation configuration. Three samples per question is the default; the
/// budget is the standard 128-call / 128K-token episode config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalConfig {
    pub samples_per_question: usize,
    pub budget: AgentConfig,
    pub histogram_bucket_width: u32,
    pub workers: usize,
    pub global_seed: u64,
    pub formats: BTreeSet<crate::report::ReportFormat>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            samples_per_question: 3,
            budget: AgentConfig::default(),
            histogram_bucket_width: 5,
            workers: 1,
            global_seed: 0,
            formats: BTreeSet::from([
                crate::report::ReportFormat::Json,
                crate::report::ReportFormat::Csv,
                crate::report::ReportFormat::Text,
            ]),
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("benchmark is empty")]
    EmptyBenchmark,
    #[error("no judged-correct runs; the metric is undefined")]
    NoCorrectRuns,
    #[error("samples_per_question must be at least 1")]
    NoSamples,
    #[error("judge failure: {0}")]
    Judge(#[from] ToolError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One evaluated episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub outcome: EpisodeOutcome,
    pub judged_correct: bool,
    pub tool_calls: u32,
}

/// All runs for one question; exactly `samples_per_question` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionResult {
    pub question_id: String,
    pub runs: Vec<RunRecord>,
}

/// Per-question aggregates for the report table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionSummary {
    pub question_id: String,
    pub runs: usize,
    pub correct_runs: usize,
    pub avg_correct: f64,
    pub mean_tool_calls: f64,
}

/// The full evaluation report. `avg_at_k` is the flat mean over every
/// (question, run) pair; the per-question means are also emitted, and the two
/// coincide when every question has the same k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub questions: usize,
    pub samples_per_question: usize,
    pub avg_at_k: f64,
    pub avg_at_k_by_question_mean: f64,
    pub termination_rate: f64,
    pub avg_tool_calls_correct: Option<f64>,
    pub tool_call_distribution: ToolCallDistribution,
    pub per_question: Vec<QuestionSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub results: Vec<QuestionResult>,
}

/// Creates one policy per (question, run) with an independent seed.
pub trait EvalPolicyFactory: Sync {
    fn create(&self, query: &Query, run_index: usize, seed: u64) -> Box<dyn Policy>;
}

impl<F> EvalPolicyFactory for F
where
    F: Fn(&Query, usize, u64) -> Box<dyn Policy> + Sync,
{
    fn create(&self, query: &Query, run_index: usize, seed: u64) -> Box<dyn Policy> {
        self(query, run_index, seed)
    }
}

/// Run the benchmark: `samples_per_question` independent episodes per
/// question with distinct seeds, judged against the gold answers. Episodes
/// that error are recorded as incorrect, non-terminated runs.
pub fn run_benchmark(
    factory: &dyn EvalPolicyFactory,
    env: &dyn ToolEnvironment,
    bench: &[Query],
    config: &EvalConfig,
    judge: &dyn AnswerJudge,
    counter: &dyn TokenCounter,
) -> Result<EvalReport, EvalError> {
    if bench.is_empty() {
        return Err(EvalError::EmptyBenchmark);
    }
    if config.samples_per_question == 0 {
        return Err(EvalError::NoSamples);
    }
    let k = config.samples_per_question;
    let jobs: Vec<(usize, usize)> = (0..bench.len())
        .flat_map(|q| (0..k).map(move |r| (q, r)))
        .collect();
    let outcomes: Mutex<Vec<Option<EpisodeOutcome>>> = Mutex::new(vec![None; jobs.len()]);
    let next = AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..config.workers.max(1).min(jobs.len()) {
            scope.spawn(|| loop {
                let slot = next.fetch_add(1, Ordering::SeqCst);
                if slot >= jobs.len() {
                    break;
                }
                let (q_idx, run_idx) = jobs[slot];
                let query = &bench[q_idx];
                let seed = derive_seed(config.global_seed, &format!("{}#run{run_idx}", query.id));
                let outcome = std::panic::catch_unwind(AssertUnwindSafe(|| {
                    let mut policy = factory.create(query, run_idx, seed);
                    run_episode(policy.as_mut(), env, query, &config.budget, counter)
                }))
                .unwrap_or_else(|_| failed_outcome(query, counter));
                outcomes.lock().expect("slots")[slot] = Some(outcome);
            });
        }
    });
    let outcomes: Vec<EpisodeOutcome> = outcomes
        .into_inner()
        .expect("slots")
        .into_iter()
        .map(|o| o.expect("every job ran"))
        .collect();

    let mut results = Vec::with_capacity(bench.len());
    for (q_idx, query) in bench.iter().enumerate() {
        let mut runs = Vec::with_capacity(k);
        for run_idx in 0..k {
            let outcome = outcomes[q_idx * k + run_idx].clone();
            let judged_correct = match &query.gold_answer {
                Some(gold) if !outcome.trajectory.final_answer.is_empty() => {
                    judge.judge(&outcome.trajectory.final_answer, gold)?
                }
                _ => false,
            };
            runs.push(RunRecord {
                tool_calls: outcome.tool_calls_used,
                judged_correct,
                outcome,
            });
        }
        results.push(QuestionResult {
            question_id: query.id.clone(),
            runs,
        });
    }
    Ok(assemble_report(results, config))
}

fn failed_outcome(query: &Query, counter: &dyn TokenCounter) -> EpisodeOutcome {
    use medsearch_core::{token_length, InteractionHistory, Trajectory};
    let history = InteractionHistory::new(query.clone());
    let tokens = token_length(&history, counter);
    EpisodeOutcome {
        trajectory: Trajectory {
            history,
            final_answer: String::new(),
            terminated_normally: false,
            token_length: tokens,
        },
        stop_reason: medsearch_runtime::StopReason::PolicyError,
        tool_calls_used: 0,
        restarts_used: 0,
    }
}

/// Deterministic reduction of the per-run results into the report.
pub fn assemble_report(results: Vec<QuestionResult>, config: &EvalConfig) -> EvalReport {
    let total_runs: usize = results.iter().map(|r| r.runs.len()).sum();
    let correct_runs: usize = results
        .iter()
        .flat_map(|r| &r.runs)
        .filter(|run| run.judged_correct)
        .count();
    let avg_at_k = correct_runs as f64 / total_runs as f64;

    let per_question: Vec<QuestionSummary> = results
        .iter()
        .map(|r| {
            let correct = r.runs.iter().filter(|run| run.judged_correct).count();
            let tool_sum: u32 = r.runs.iter().map(|run| run.tool_calls).sum();
            QuestionSummary {
                question_id: r.question_id.clone(),
                runs: r.runs.len(),
                correct_runs: correct,
                avg_correct: correct as f64 / r.runs.len() as f64,
                mean_tool_calls: f64::from(tool_sum) / r.runs.len() as f64,
            }
        })
        .collect();
    let avg_by_question =
        per_question.iter().map(|q| q.avg_correct).sum::<f64>() / per_question.len() as f64;

    EvalReport {
        questions: results.len(),
        samples_per_question: config.samples_per_question,
        avg_at_k,
        avg_at_k_by_question_mean: avg_by_question,
        termination_rate: termination_rate(&results),
        avg_tool_calls_correct: avg_tool_calls_correct(&results).ok(),
        tool_call_distribution: tool_call_distribution(
            &results,
            RetainRule::AtLeastOneCorrect,
            config.histogram_bucket_width,
        ),
        per_question,
        results,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::judge::ExactMatchJudge;
    use medsearch_core::{ToolAction, WhitespaceCounter};
    use medsearch_env::SearchResult;
    use medsearch_runtime::FixedAnswerPolicy;

    struct QuietEnv;
    impl ToolEnvironment for QuietEnv {
        fn execute(&self, _a: &ToolAction) -> Result<String, ToolError> {
            Ok("observation text".into())
        }
        fn search(&self, _q: &str, _k: usize) -> Result<Vec<SearchResult>, ToolError> {
            Ok(vec![])
        }
        fn medical_search(&self, _q: &str, _k: usize) -> Result<Vec<SearchResult>, ToolError> {
            Ok(vec![])
        }
        fn visit(&self, _t: &str, _g: &str) -> Result<String, ToolError> {
            Ok("page".into())
        }
    }

    fn bench() -> Vec<Query> {
        vec![
            Query::new("q1", "first question").with_gold("alpha"),
            Query::new("q2", "second question").with_gold("beta"),
        ]
    }

    /// q1 answers correctly on runs 0 and 2; q2 never.
    fn scripted_factory() -> impl EvalPolicyFactory {
        |query: &Query, run_index: usize, _seed: u64| -> Box<dyn Policy> {
            let correct = query.id == "q1" && run_index != 1;
            let answer = if correct { query.gold_answer.clone().unwrap() } else { "wrong".into() };
            Box::new(FixedAnswerPolicy::new(answer, 2))
        }
    }

    #[test]
    fn scripted_pattern_yields_two_sixths() {
        let config = EvalConfig::default();
        let report = run_benchmark(
            &scripted_factory(),
            &QuietEnv,
            &bench(),
            &config,
            &ExactMatchJudge::default(),
            &WhitespaceCounter,
        )
        .unwrap();
        assert!((report.avg_at_k - 2.0 / 6.0).abs() < 1e-12);
        assert!((report.avg_at_k_by_question_mean - 2.0 / 6.0).abs() < 1e-12);
        assert_eq!(report.questions, 2);
        // Every policy answers within budget → all runs terminate normally.
        assert!((report.termination_rate - 1.0).abs() < 1e-12);
        // Correct runs each used 2 tool calls.
        assert_eq!(report.avg_tool_calls_correct, Some(2.0));
    }

    #[test]
    fn k_one_all_correct_is_one() {
        let factory = |query: &Query, _r: usize, _s: u64| -> Box<dyn Policy> {
            Box::new(FixedAnswerPolicy::new(query.gold_answer.clone().unwrap(), 0))
        };
        let config = EvalConfig {
            samples_per_question: 1,
            ..EvalConfig::default()
        };
        let report = run_benchmark(
            &factory,
            &QuietEnv,
            &bench(),
            &config,
            &ExactMatchJudge::default(),
            &WhitespaceCounter,
        )
        .unwrap();
        assert_eq!(report.avg_at_k, 1.0);
        assert_eq!(report.avg_tool_calls_correct, Some(0.0));
    }

    #[test]
    fn empty_benchmark_is_refused() {
        let err = run_benchmark(
            &scripted_factory(),
            &QuietEnv,
            &[],
            &EvalConfig::default(),
            &ExactMatchJudge::default(),
            &WhitespaceCounter,
        )
        .unwrap_err();
        assert!(matches!(err, EvalError::EmptyBenchmark));
    }

    #[test]
    fn rerun_with_same_seed_is_identical() {
        let config = EvalConfig {
            workers: 3,
            ..EvalConfig::default()
        };
        let a = run_benchmark(
            &scripted_factory(),
            &QuietEnv,
            &bench(),
            &config,
            &ExactMatchJudge::default(),
            &WhitespaceCounter,
        )
        .unwrap();
        let b = run_benchmark(
            &scripted_factory(),
            &QuietEnv,
            &bench(),
            &config,
            &ExactMatchJudge::default(),
            &WhitespaceCounter,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    /// A policy returning non-answer in answer-only mode would be a policy
    /// error; eval must record it as incorrect and keep going.
    #[test]
    fn erroring_runs_count_as_incorrect() {
        let factory = |_q: &Query, _r: usize, _s: u64| -> Box<dyn Policy> {
            Box::new(medsearch_runtime::FailingPolicy::new(1))
        };
        let report = run_benchmark(
            &factory,
            &QuietEnv,
            &bench(),
            &EvalConfig::default(),
            &ExactMatchJudge::default(),
            &WhitespaceCounter,
        )
        .unwrap();
        assert_eq!(report.avg_at_k, 0.0);
        assert_eq!(report.termination_rate, 0.0);
        assert_eq!(report.avg_tool_calls_correct, None);
    }
}
