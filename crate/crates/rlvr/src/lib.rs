//! Verifiable-reward RL math kernel.
//!
//! Pure functions an external trainer consumes: the strictly gated reward,
//! within-group advantage normalization, per-token importance ratios, the
//! token-level clipped policy objective, and difficulty filtering for RL
//! dataset construction. No parameter updates, no optimizer, no model
//! hosting. Everything here is deterministic and trivially parallel across
//! groups.

pub mod advantage;
pub mod batch;
pub mod filter;
pub mod loss;
pub mod reward;

pub use advantage::{group_advantages, DEFAULT_STD_FLOOR};
pub use batch::{read_groups, write_groups, GroupMember, RolloutGroup};
pub use filter::difficulty_filter;
pub use loss::{
    grpo_token_loss, importance_ratios, importance_ratios_clamped, ClipConfig, GrpoLoss,
    TokenLogProbs, TokenTerm,
};
pub use reward::{lenient_reward, strict_reward, LenientWeights, RewardInputs};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RlvrError {
    #[error("group has {0} members; at least 2 are required for normalization")]
    GroupTooSmall(usize),
    #[error("log-probability arrays differ in length: {current} vs {behavior}")]
    LengthMismatch { current: usize, behavior: usize },
    #[error("non-finite log-probability at position {0}")]
    NonFinite(usize),
    #[error("advantages ({advantages}) do not align with group members ({members})")]
    AdvantageMismatch { advantages: usize, members: usize },
}
