//! Dataset file IO: versioned header record plus one record per line.

use crate::record::{parse_trajectory, serialize_trajectory, RecordError};
use crate::trajectory::{Query, Trajectory};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use thiserror::Error;

pub const TRAJECTORY_FORMAT: &str = "trajectory-dataset";
pub const QUERY_FORMAT: &str = "query-dataset";
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Record(#[from] RecordError),
    #[error("malformed line {line}: {source}")]
    MalformedLine {
        line: usize,
        source: serde_json::Error,
    },
    #[error("missing or invalid header: expected format {expected}")]
    BadHeader { expected: &'static str },
    #[error("unsupported dataset version {0}")]
    UnsupportedVersion(u32),
    #[error("duplicate query id {0}")]
    DuplicateQueryId(String),
    #[error("query {0} has empty text")]
    EmptyQueryText(String),
}

#[derive(Serialize, Deserialize)]
struct Header {
    record: String,
    format: String,
    version: u32,
}

impl Header {
    fn new(format: &str) -> Self {
        Self {
            record: "header".into(),
            format: format.into(),
            version: DATASET_VERSION,
        }
    }
}

fn write_header(out: &mut dyn Write, format: &str) -> Result<(), DatasetError> {
    let line = serde_json::to_string(&Header::new(format)).expect("header serializes");
    writeln!(out, "{line}")?;
    Ok(())
}

fn check_header(line: &str, expected: &'static str) -> Result<(), DatasetError> {
    let header: Header =
        serde_json::from_str(line).map_err(|_| DatasetError::BadHeader { expected })?;
    if header.record != "header" || header.format != expected {
        return Err(DatasetError::BadHeader { expected });
    }
    if header.version > DATASET_VERSION {
        return Err(DatasetError::UnsupportedVersion(header.version));
    }
    Ok(())
}

/// Write a trajectory dataset: header line, then one trajectory per line.
pub fn write_trajectories<'a>(
    out: &mut dyn Write,
    trajectories: impl IntoIterator<Item = &'a Trajectory>,
) -> Result<(), DatasetError> {
    write_header(out, TRAJECTORY_FORMAT)?;
    for traj in trajectories {
        writeln!(out, "{}", serialize_trajectory(traj))?;
    }
    Ok(())
}

/// Read a trajectory dataset written by [`write_trajectories`].
pub fn read_trajectories(input: &mut dyn BufRead) -> Result<Vec<Trajectory>, DatasetError> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or(DatasetError::BadHeader {
            expected: TRAJECTORY_FORMAT,
        })??;
    check_header(&header, TRAJECTORY_FORMAT)?;
    let mut out = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_trajectory(&line)?);
    }
    Ok(out)
}

/// Write a query dataset: header line, then one query per line.
pub fn write_queries<'a>(
    out: &mut dyn Write,
    queries: impl IntoIterator<Item = &'a Query>,
) -> Result<(), DatasetError> {
    write_header(out, QUERY_FORMAT)?;
    for query in queries {
        let line = serde_json::to_string(query).expect("query serializes");
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Read a query dataset, enforcing id uniqueness and non-empty text.
pub fn read_queries(input: &mut dyn BufRead) -> Result<Vec<Query>, DatasetError> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or(DatasetError::BadHeader {
            expected: QUERY_FORMAT,
        })??;
    check_header(&header, QUERY_FORMAT)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let query: Query = serde_json::from_str(&line)
            .map_err(|source| DatasetError::MalformedLine { line: idx + 2, source })?;
        if query.text.trim().is_empty() {
            return Err(DatasetError::EmptyQueryText(query.id));
        }
        if !seen.insert(query.id.clone()) {
            return Err(DatasetError::DuplicateQueryId(query.id));
        }
        out.push(query);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{extend_history, InteractionHistory, Step, ToolAction};

    #[test]
    fn trajectory_dataset_round_trips() {
        let history = InteractionHistory::new(Query::new("q1", "x?"));
        let history =
            extend_history(&history, Step::new("t", ToolAction::search(["x"]), "obs")).unwrap();
        let traj = Trajectory {
            history,
            final_answer: String::new(),
            terminated_normally: false,
            token_length: 4,
        };
        let mut buf = Vec::new();
        write_trajectories(&mut buf, [&traj]).unwrap();
        let parsed = read_trajectories(&mut buf.as_slice()).unwrap();
        assert_eq!(parsed, vec![traj]);
    }

    #[test]
    fn duplicate_query_ids_rejected() {
        let queries = vec![Query::new("a", "one"), Query::new("a", "two")];
        let mut buf = Vec::new();
        write_queries(&mut buf, &queries).unwrap();
        let err = read_queries(&mut buf.as_slice()).unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateQueryId(id) if id == "a"));
    }

    #[test]
    fn missing_header_rejected() {
        let data = b"{\"id\":\"a\",\"text\":\"x\",\"gold_answer\":null,\"metadata\":{}}\n";
        let err = read_queries(&mut data.as_slice()).unwrap_err();
        assert!(matches!(err, DatasetError::BadHeader { .. }));
    }
}
