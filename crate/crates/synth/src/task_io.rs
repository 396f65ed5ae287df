//! File formats for synthesis artifacts: seed QA sets, verified task sets,
//! and curated benchmark items. Same shape as the trajectory dataset files —
//! a versioned header line, then one JSON record per line.

use crate::pipeline::VerifiedTask;
use crate::seed::SeedQA;
use crate::verify::BenchmarkItem;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::io::{BufRead, Write};
use thiserror::Error;

pub const SEED_FORMAT: &str = "seed-dataset";
pub const CANDIDATE_FORMAT: &str = "candidate-dataset";
pub const TASK_FORMAT: &str = "task-dataset";
pub const BENCH_FORMAT: &str = "bench-dataset";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TaskIoError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("missing or invalid header; expected format {0}")]
    BadHeader(&'static str),
    #[error("malformed line {0}: {1}")]
    MalformedLine(usize, serde_json::Error),
}

#[derive(Serialize, Deserialize)]
struct Header {
    record: String,
    format: String,
    version: u32,
}

fn write_records<T: Serialize>(
    out: &mut dyn Write,
    format: &'static str,
    records: &[T],
) -> Result<(), TaskIoError> {
    let header = Header {
        record: "header".into(),
        format: format.into(),
        version: VERSION,
    };
    writeln!(out, "{}", serde_json::to_string(&header).expect("header serializes"))?;
    for record in records {
        writeln!(out, "{}", serde_json::to_string(record).expect("record serializes"))?;
    }
    Ok(())
}

fn read_records<T: DeserializeOwned>(
    input: &mut dyn BufRead,
    format: &'static str,
) -> Result<Vec<T>, TaskIoError> {
    let mut lines = input.lines();
    let header_line = lines.next().ok_or(TaskIoError::BadHeader(format))??;
    let header: Header =
        serde_json::from_str(&header_line).map_err(|_| TaskIoError::BadHeader(format))?;
    if header.record != "header" || header.format != format {
        return Err(TaskIoError::BadHeader(format));
    }
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| TaskIoError::MalformedLine(idx + 2, e))?,
        );
    }
    Ok(out)
}

pub fn write_seeds(out: &mut dyn Write, seeds: &[SeedQA]) -> Result<(), TaskIoError> {
    write_records(out, SEED_FORMAT, seeds)
}

pub fn read_seeds(input: &mut dyn BufRead) -> Result<Vec<SeedQA>, TaskIoError> {
    read_records(input, SEED_FORMAT)
}

pub fn write_candidates(
    out: &mut dyn Write,
    tasks: &[crate::harden::CandidateTask],
) -> Result<(), TaskIoError> {
    write_records(out, CANDIDATE_FORMAT, tasks)
}

pub fn read_candidates(
    input: &mut dyn BufRead,
) -> Result<Vec<crate::harden::CandidateTask>, TaskIoError> {
    read_records(input, CANDIDATE_FORMAT)
}

pub fn write_verified_tasks(
    out: &mut dyn Write,
    tasks: &[VerifiedTask],
) -> Result<(), TaskIoError> {
    write_records(out, TASK_FORMAT, tasks)
}

pub fn read_verified_tasks(input: &mut dyn BufRead) -> Result<Vec<VerifiedTask>, TaskIoError> {
    read_records(input, TASK_FORMAT)
}

pub fn write_bench(out: &mut dyn Write, items: &[BenchmarkItem]) -> Result<(), TaskIoError> {
    write_records(out, BENCH_FORMAT, items)
}

pub fn read_bench(input: &mut dyn BufRead) -> Result<Vec<BenchmarkItem>, TaskIoError> {
    read_records(input, BENCH_FORMAT)
}
