//! Episode runtime.
//!
//! Drives a policy contract against a tool environment step by step: the
//! policy proposes (thought, action), the environment executes non-answer
//! actions into observations, and the history grows until the policy answers
//! or a budget stops it. Context overflow triggers one discard-all reset per
//! configured restart; after that, and on tool-call exhaustion, the episode
//! rolls back one turn and forces an answer-only step. The runtime performs
//! no model inference itself — the policy contract is the only model
//! touchpoint.

pub mod config;
pub mod episode;
pub mod parallel;
pub mod scripted;
pub mod seed;

pub use config::{AgentConfig, ConfigError, SamplingParams};
pub use episode::{
    apply_discard_all, count_tool_failures, force_answer, run_episode, EpisodeOutcome,
    ForcedAnswerResult, Policy, PolicyFailure, PolicyStep, RuntimeError, StopReason,
};
pub use parallel::{run_parallel, PolicyFactory};
pub use scripted::{
    FailingPolicy, FixedAnswerPolicy, NeverAnswerPolicy, ScriptedPolicy, SearchVisitAnswerPolicy,
};
pub use seed::derive_seed;
