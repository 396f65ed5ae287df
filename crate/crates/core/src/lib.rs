//! Interaction data model for deep-search agents.
//!
//! An episode is a query followed by (thought, action, observation) steps and a
//! final answer. This crate defines those types, their structural validation,
//! a line-delimited record format for dataset files, pluggable token counting,
//! and the alias-aware answer comparator shared by the synthesis and
//! evaluation stages. No prompting, no model calls, no scoring — structure
//! only. All values are immutable after construction and safe to share across
//! parallel workers.

pub mod answer;
pub mod dataset;
pub mod record;
pub mod seed;
pub mod tokens;
pub mod trajectory;

pub use answer::{normalize_answer, AliasTable};
pub use seed::derive_seed;
pub use dataset::{read_queries, read_trajectories, write_queries, write_trajectories};
pub use record::{observation_spans, parse_trajectory, serialize_trajectory, RecordError};
pub use tokens::{token_length, trajectory_token_length, CharCounter, TokenCounter, WhitespaceCounter};
pub use trajectory::{
    extend_history, validate_trajectory, HistoryError, InteractionHistory, Query, Step,
    ToolAction, Trajectory, Violation, ViolationKind,
};
