//! Report emission: machine-readable JSON, delimited values for plotting,
//! and a human-readable summary. Field order is stable and output is
//! deterministic byte for byte.

use crate::run::{EvalError, EvalReport};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

fn render_csv(report: &EvalReport) -> String {
    let mut out = String::from("question_id,runs,correct_runs,avg_correct,mean_tool_calls\n");
    for q in &report.per_question {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6}\n",
            q.question_id, q.runs, q.correct_runs, q.avg_correct, q.mean_tool_calls
        ));
    }
    out
}

fn render_text(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str("evaluation summary\n");
    out.push_str("==================\n");
    out.push_str(&format!(
        "questions: {}  samples per question: {}\n",
        report.questions, report.samples_per_question
    ));
    out.push_str(&format!("avg@{}: {:.4} (flat over runs)\n", report.samples_per_question, report.avg_at_k));
    out.push_str(&format!(
        "avg@{} (per-question mean): {:.4}\n",
        report.samples_per_question, report.avg_at_k_by_question_mean
    ));
    out.push_str(&format!("termination rate: {:.4}\n", report.termination_rate));
    match report.avg_tool_calls_correct {
        Some(v) => out.push_str(&format!("avg tool calls (correct): {v:.4}\n")),
        None => out.push_str("avg tool calls (correct): n/a (no correct runs)\n"),
    }
    let dist = &report.tool_call_distribution;
    out.push_str(&format!(
        "tool-call distribution over {} retained questions (mean {:.2}):\n",
        dist.retained_questions, dist.mean
    ));
    for bucket in &dist.buckets {
        out.push_str(&format!(
            "  [{:>3}, {:>3}) {}\n",
            bucket.lo,
            bucket.hi,
            "#".repeat(bucket.count)
        ));
    }
    out
}

/// Write the report in the requested formats; returns the paths written.
/// Refuses reports over an empty benchmark.
pub fn emit_report(
    report: &EvalReport,
    formats: &BTreeSet<ReportFormat>,
    dir: &Path,
) -> Result<Vec<PathBuf>, EvalError> {
    if report.questions == 0 {
        return Err(EvalError::EmptyBenchmark);
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for format in formats {
        let (name, payload) = match format {
            ReportFormat::Json => (
                "report.json",
                serde_json::to_string_pretty(report).expect("report serializes") + "\n",
            ),
            ReportFormat::Csv => ("report.csv", render_csv(report)),
            ReportFormat::Text => ("report.txt", render_text(report)),
        };
        let path = dir.join(name);
        let mut file = std::fs::File::create(&path)?;
        file.write_all(payload.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
