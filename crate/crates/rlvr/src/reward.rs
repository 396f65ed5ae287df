//! Reward functions.
//!
//! The strict reward gates everything on correctness: format compliance only
//! modulates the magnitude of an already-correct answer, so there is nothing
//! to gain from format alone. The lenient additive variant is shipped solely
//! to reproduce the reward-hacking contrast experiments.

use serde::{Deserialize, Serialize};

/// Binary scoring inputs. `format_score` is produced upstream by structural
/// validation (an empty violation report); `correct_score` by the answer
/// judge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardInputs {
    pub format_score: bool,
    pub correct_score: bool,
}

impl RewardInputs {
    pub fn new(format_score: bool, correct_score: bool) -> Self {
        Self {
            format_score,
            correct_score,
        }
    }
}

/// Strictly gated reward:
/// 1.0 when format and correctness both hold, 0.8 when the answer is correct
/// but the format is not compliant, 0 otherwise. A reward is granted only
/// when the answer is correct.
pub fn strict_reward(inputs: RewardInputs) -> f64 {
    match (inputs.format_score, inputs.correct_score) {
        (true, true) => 1.0,
        (false, true) => 0.8,
        _ => 0.0,
    }
}

/// Weights for the additive comparison reward.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LenientWeights {
    pub format_weight: f64,
    pub correct_weight: f64,
}

impl Default for LenientWeights {
    fn default() -> Self {
        Self {
            format_weight: 0.2,
            correct_weight: 0.8,
        }
    }
}

/// Additive "correct score + format score" reward: format compliance pays
/// regardless of correctness. This is the exploitable design the strict
/// reward exists to replace; it is provided for contrast experiments only.
pub fn lenient_reward(inputs: RewardInputs, weights: LenientWeights) -> f64 {
    let format = if inputs.format_score { 1.0 } else { 0.0 };
    let correct = if inputs.correct_score { 1.0 } else { 0.0 };
    weights.format_weight * format + weights.correct_weight * correct
}
