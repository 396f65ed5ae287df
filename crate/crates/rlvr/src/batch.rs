//! Rollout group batch files: one group per line.

use crate::loss::TokenLogProbs;
use crate::RlvrError;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use thiserror::Error;

/// One trajectory's contribution to a group: a reference back to the
/// trajectory record, its final reward, and its per-token log-probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMember {
    pub trajectory_ref: String,
    pub reward: f64,
    pub logprobs: TokenLogProbs,
}

/// All sampled trajectories for one question. Normalization requires at
/// least two members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutGroup {
    pub question_id: String,
    pub members: Vec<GroupMember>,
}

impl RolloutGroup {
    pub fn rewards(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.reward).collect()
    }
}

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Malformed {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: RlvrError },
}

#[derive(Serialize, Deserialize)]
struct WireMember {
    trajectory_ref: String,
    reward: f64,
    logprobs_current: Vec<f64>,
    logprobs_behavior: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct WireGroup {
    question_id: String,
    members: Vec<WireMember>,
}

/// Read a batch file: one JSON group per line, validating array lengths and
/// finiteness on the way in.
pub fn read_groups(input: &mut dyn BufRead) -> Result<Vec<RolloutGroup>, BatchError> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let wire: WireGroup = serde_json::from_str(&line).map_err(|source| BatchError::Malformed {
            line: idx + 1,
            source,
        })?;
        let mut members = Vec::with_capacity(wire.members.len());
        for m in wire.members {
            let logprobs = TokenLogProbs::new(m.logprobs_current, m.logprobs_behavior)
                .map_err(|source| BatchError::Invalid {
                    line: idx + 1,
                    source,
                })?;
            members.push(GroupMember {
                trajectory_ref: m.trajectory_ref,
                reward: m.reward,
                logprobs,
            });
        }
        out.push(RolloutGroup {
            question_id: wire.question_id,
            members,
        });
    }
    Ok(out)
}

pub fn write_groups<'a>(
    out: &mut dyn Write,
    groups: impl IntoIterator<Item = &'a RolloutGroup>,
) -> Result<(), BatchError> {
    for group in groups {
        let wire = WireGroup {
            question_id: group.question_id.clone(),
            members: group
                .members
                .iter()
                .map(|m| WireMember {
                    trajectory_ref: m.trajectory_ref.clone(),
                    reward: m.reward,
                    logprobs_current: m.logprobs.current().to_vec(),
                    logprobs_behavior: m.logprobs.behavior().to_vec(),
                })
                .collect(),
        };
        writeln!(out, "{}", serde_json::to_string(&wire).expect("group serializes"))?;
    }
    Ok(())
}
