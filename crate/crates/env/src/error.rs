//! Tool failure taxonomy shared by offline tools, online adapters, and every
//! model contract in the pipeline.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToolErrorKind {
    NetworkFailure,
    ParseFailure,
    NotFound,
    RateLimited,
}

/// A tool or model-contract failure. Retryability is fixed per kind:
/// network failures and rate limits are transient, missing documents and
/// malformed payloads are not.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{kind:?}: {detail}")]
pub struct ToolError {
    pub kind: ToolErrorKind,
    pub detail: String,
    pub retryable: bool,
}

impl ToolError {
    pub fn network(detail: impl Into<String>) -> Self {
        Self {
            kind: ToolErrorKind::NetworkFailure,
            detail: detail.into(),
            retryable: true,
        }
    }

    pub fn rate_limited(detail: impl Into<String>) -> Self {
        Self {
            kind: ToolErrorKind::RateLimited,
            detail: detail.into(),
            retryable: true,
        }
    }

    pub fn not_found(detail: impl Into<String>) -> Self {
        Self {
            kind: ToolErrorKind::NotFound,
            detail: detail.into(),
            retryable: false,
        }
    }

    pub fn parse(detail: impl Into<String>) -> Self {
        Self {
            kind: ToolErrorKind::ParseFailure,
            detail: detail.into(),
            retryable: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retryability_is_fixed_per_kind() {
        assert!(ToolError::network("x").retryable);
        assert!(ToolError::rate_limited("x").retryable);
        assert!(!ToolError::not_found("x").retryable);
        assert!(!ToolError::parse("x").retryable);
    }
}
