//! Pluggable token counting.
//!
//! Context limits and the short/long dataset bands depend on a tokenizer this
//! toolkit does not ship, so counting is a contract: any counter that is
//! additive over text segments keeps [`token_length`] monotone under history
//! extension. The default is whitespace tokens.

use crate::trajectory::{InteractionHistory, Trajectory};

/// Total token count over a piece of text.
pub trait TokenCounter: Send + Sync {
    fn count(&self, text: &str) -> u64;
}

/// Counts whitespace-separated tokens. Default counter.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceCounter;

impl TokenCounter for WhitespaceCounter {
    fn count(&self, text: &str) -> u64 {
        text.split_whitespace().count() as u64
    }
}

/// Counts Unicode scalar values. Useful in tests where exact small counts
/// matter.
#[derive(Debug, Clone, Copy, Default)]
pub struct CharCounter;

impl TokenCounter for CharCounter {
    fn count(&self, text: &str) -> u64 {
        text.chars().count() as u64
    }
}

/// Token count of a history: the query text plus, per step, the thought, the
/// action payload, and the observation. Extending a history never decreases
/// the count.
pub fn token_length(history: &InteractionHistory, counter: &dyn TokenCounter) -> u64 {
    let mut total = counter.count(&history.query.text);
    for step in &history.steps {
        total += counter.count(&step.thought);
        total += counter.count(&step.action.payload_text());
        total += counter.count(&step.observation);
    }
    total
}

/// Token count of a full trajectory: its history plus the final answer.
pub fn trajectory_token_length(traj: &Trajectory, counter: &dyn TokenCounter) -> u64 {
    token_length(&traj.history, counter) + counter.count(&traj.final_answer)
}
