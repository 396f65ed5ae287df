//! Episode budgets and sampling passthrough.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sampling parameters forwarded verbatim to the policy backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub temperature: f64,
    pub top_p: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            temperature: 0.85,
            top_p: 0.95,
        }
    }
}

/// Episode budgets. The discard threshold defaults to 90% of the context
/// limit so a reset fires before the window is actually full, and one restart
/// is allowed per episode by default — each restart rebudgets the same
/// episode, so unbounded restarts could loop forever.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub max_tool_calls: u32,
    pub context_limit: u64,
    pub discard_threshold: u64,
    pub max_restarts: u32,
    pub sampling: SamplingParams,
}

impl Default for AgentConfig {
    fn default() -> Self {
        let context_limit = 128 * 1024;
        Self {
            max_tool_calls: 128,
            context_limit,
            discard_threshold: context_limit * 9 / 10,
            max_restarts: 1,
            sampling: SamplingParams::default(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("max_tool_calls must be at least 1")]
    NoToolBudget,
    #[error("discard_threshold must satisfy 0 < threshold <= context_limit")]
    BadDiscardThreshold,
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_tool_calls < 1 {
            return Err(ConfigError::NoToolBudget);
        }
        if self.discard_threshold == 0 || self.discard_threshold > self.context_limit {
            return Err(ConfigError::BadDiscardThreshold);
        }
        Ok(())
    }
}
