//! Benchmark evaluation harness.
//!
//! Runs every question `k` times with independent seeds against a policy and
//! environment, judges answers with a pluggable judge, and aggregates Avg@k,
//! termination rate, tool-call statistics, and the tool-call distribution of
//! retained questions. One unified prompt template (a versioned asset)
//! applies to every evaluated policy.

pub mod judge;
pub mod metrics;
pub mod prompt;
pub mod report;
pub mod run;

pub use judge::{judge_answer, AnswerJudge, ExactMatchJudge};
pub use metrics::{
    avg_tool_calls_correct, termination_rate, tool_call_distribution, HistogramBucket,
    RetainRule, ToolCallDistribution,
};
pub use prompt::{render_unified_prompt, UNIFIED_PROMPT_TEMPLATE, UNIFIED_PROMPT_VERSION};
pub use report::{emit_report, ReportFormat};
pub use run::{run_benchmark, EvalConfig, EvalError, EvalPolicyFactory, EvalReport, QuestionResult, QuestionSummary, RunRecord};
