//! Line-delimited trajectory records.
//!
//! Each trajectory serializes to one line of structured text with named
//! tagged segments — `think`, `tool_call`, `tool_response`, `answer` — so a
//! dataset file can be streamed record by record. Serialization round-trips:
//! `parse_trajectory(serialize_trajectory(t)) == t`, byte for byte on
//! re-serialization.

use crate::trajectory::{InteractionHistory, Query, Step, ToolAction, Trajectory};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("malformed record: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("missing tool_response segment for step {0}")]
    MissingSegment(usize),
}

#[derive(Serialize, Deserialize)]
struct StepRecord {
    think: String,
    tool_call: ToolAction,
    tool_response: String,
}

#[derive(Serialize, Deserialize)]
struct TrajectoryRecord {
    query: Query,
    steps: Vec<StepRecord>,
    answer: String,
    terminated_normally: bool,
    token_length: u64,
    cumulative_tool_calls: u32,
    restarts: u32,
}

impl From<&Trajectory> for TrajectoryRecord {
    fn from(traj: &Trajectory) -> Self {
        TrajectoryRecord {
            query: traj.history.query.clone(),
            steps: traj
                .history
                .steps
                .iter()
                .map(|s| StepRecord {
                    think: s.thought.clone(),
                    tool_call: s.action.clone(),
                    tool_response: s.observation.clone(),
                })
                .collect(),
            answer: traj.final_answer.clone(),
            terminated_normally: traj.terminated_normally,
            token_length: traj.token_length,
            cumulative_tool_calls: traj.history.cumulative_tool_calls,
            restarts: traj.history.restarts,
        }
    }
}

impl From<TrajectoryRecord> for Trajectory {
    fn from(rec: TrajectoryRecord) -> Self {
        Trajectory {
            history: InteractionHistory {
                query: rec.query,
                steps: rec
                    .steps
                    .into_iter()
                    .map(|s| Step {
                        thought: s.think,
                        action: s.tool_call,
                        observation: s.tool_response,
                    })
                    .collect(),
                cumulative_tool_calls: rec.cumulative_tool_calls,
                restarts: rec.restarts,
            },
            final_answer: rec.answer,
            terminated_normally: rec.terminated_normally,
            token_length: rec.token_length,
        }
    }
}

/// Serialize one trajectory to one line of tagged structured text.
pub fn serialize_trajectory(traj: &Trajectory) -> String {
    serde_json::to_string(&TrajectoryRecord::from(traj)).expect("trajectory record serializes")
}

/// Parse one record line back into a trajectory.
pub fn parse_trajectory(line: &str) -> Result<Trajectory, RecordError> {
    let rec: TrajectoryRecord = serde_json::from_str(line)?;
    Ok(rec.into())
}

/// Byte ranges of the observation segments in a serialized record line.
///
/// Each range covers the full JSON string literal (including quotes) of one
/// `tool_response` value, in step order. Raw `"tool_response":"` bytes cannot
/// occur inside a string value (interior quotes are escaped), so scanning for
/// the field marker is exact.
pub fn observation_spans(line: &str) -> Result<Vec<(usize, usize)>, RecordError> {
    const MARKER: &str = "\"tool_response\":";
    let bytes = line.as_bytes();
    let mut spans = Vec::new();
    let mut cursor = 0;
    let mut step = 0;
    while let Some(found) = line[cursor..].find(MARKER) {
        let value_start = cursor + found + MARKER.len();
        if bytes.get(value_start) != Some(&b'"') {
            return Err(RecordError::MissingSegment(step));
        }
        let mut end = value_start + 1;
        loop {
            match bytes.get(end) {
                Some(b'\\') => end += 2,
                Some(b'"') => break,
                Some(_) => end += 1,
                None => return Err(RecordError::MissingSegment(step)),
            }
        }
        spans.push((value_start, end + 1));
        cursor = end + 1;
        step += 1;
    }
    Ok(spans)
}
