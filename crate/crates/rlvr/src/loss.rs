//! Per-token importance ratios and the token-level clipped policy objective.
//!
//! The objective is
//! `J = −(1/Σ|o_i|) Σ_i Σ_t min(r_{i,t}·Â_i, clip(r_{i,t}, 1−ε_low, 1+ε_high)·Â_i)`
//! with each member's advantage broadcast over its tokens. Under strict
//! on-policy training the ratio `r = exp(lp_current − lp_behavior)` is
//! identically 1; precomputed off-policy ratio corrections from an external
//! trainer pass through the same arrays, with an optional clamp hook.

use crate::batch::RolloutGroup;
use crate::RlvrError;
use serde::{Deserialize, Serialize};

/// Per-token log-probabilities under the current and behavior policies.
/// Lengths always match and values are finite; validated at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenLogProbs {
    current: Vec<f64>,
    behavior: Vec<f64>,
    /// True when the behavior side carries externally corrected values
    /// (truncated-importance-sampling style) rather than raw rollout
    /// log-probabilities. Pass-through provenance only.
    pub externally_corrected: bool,
}

impl TokenLogProbs {
    pub fn new(current: Vec<f64>, behavior: Vec<f64>) -> Result<Self, RlvrError> {
        if current.len() != behavior.len() {
            return Err(RlvrError::LengthMismatch {
                current: current.len(),
                behavior: behavior.len(),
            });
        }
        for (i, v) in current.iter().chain(behavior.iter()).enumerate() {
            if !v.is_finite() {
                return Err(RlvrError::NonFinite(i % current.len().max(1)));
            }
        }
        Ok(Self {
            current,
            behavior,
            externally_corrected: false,
        })
    }

    /// Identical arrays: the strict on-policy case where every ratio is 1.
    pub fn on_policy(logprobs: Vec<f64>) -> Result<Self, RlvrError> {
        Self::new(logprobs.clone(), logprobs)
    }

    pub fn len(&self) -> usize {
        self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_empty()
    }

    pub fn current(&self) -> &[f64] {
        &self.current
    }

    pub fn behavior(&self) -> &[f64] {
        &self.behavior
    }
}

/// Asymmetric clip range. `eps_high` may exceed `eps_low` (clip-higher).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClipConfig {
    pub eps_low: f64,
    pub eps_high: f64,
}

impl Default for ClipConfig {
    fn default() -> Self {
        Self {
            eps_low: 0.2,
            eps_high: 0.28,
        }
    }
}

/// Per-token importance ratios `exp(lp_current − lp_behavior)`.
pub fn importance_ratios(lp: &TokenLogProbs) -> Vec<f64> {
    lp.current
        .iter()
        .zip(&lp.behavior)
        .map(|(new, old)| (new - old).exp())
        .collect()
}

/// Ratios with an optional symmetric clamp applied, the hook an external
/// trainer uses for truncated-importance-sampling corrections.
pub fn importance_ratios_clamped(lp: &TokenLogProbs, max_ratio: Option<f64>) -> Vec<f64> {
    let mut ratios = importance_ratios(lp);
    if let Some(cap) = max_ratio {
        for r in &mut ratios {
            *r = r.min(cap);
        }
    }
    ratios
}

/// One token's term in the objective, kept for audit output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenTerm {
    pub ratio: f64,
    pub advantage: f64,
    /// min(r·Â, clip(r)·Â) — the value actually aggregated.
    pub term: f64,
    /// True when the clipped branch was selected over the raw one.
    pub clipped: bool,
}

/// Scalar loss plus the per-member, per-token breakdown.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrpoLoss {
    pub value: f64,
    pub per_token: Vec<Vec<TokenTerm>>,
    pub total_tokens: usize,
}

/// Token-level clipped policy loss over one rollout group.
///
/// `advantages[i]` is broadcast over member i's tokens. Member order does not
/// affect the scalar. Empty groups of tokens are rejected upstream by the
/// batch reader; a group whose members hold zero tokens yields a loss of 0.
pub fn grpo_token_loss(
    group: &RolloutGroup,
    advantages: &[f64],
    clip: ClipConfig,
) -> Result<GrpoLoss, RlvrError> {
    if advantages.len() != group.members.len() {
        return Err(RlvrError::AdvantageMismatch {
            advantages: advantages.len(),
            members: group.members.len(),
        });
    }
    let lo = 1.0 - clip.eps_low;
    let hi = 1.0 + clip.eps_high;
    let mut total_tokens = 0usize;
    let mut sum = 0.0;
    let mut per_token = Vec::with_capacity(group.members.len());
    for (member, &advantage) in group.members.iter().zip(advantages) {
        let ratios = importance_ratios(&member.logprobs);
        let mut terms = Vec::with_capacity(ratios.len());
        for ratio in ratios {
            let raw = ratio * advantage;
            let clipped_ratio = ratio.clamp(lo, hi);
            let clipped_value = clipped_ratio * advantage;
            let term = raw.min(clipped_value);
            sum += term;
            terms.push(TokenTerm {
                ratio,
                advantage,
                term,
                clipped: clipped_value < raw,
            });
            total_tokens += 1;
        }
        per_token.push(terms);
    }
    let value = if total_tokens == 0 {
        0.0
    } else {
        -sum / total_tokens as f64
    };
    Ok(GrpoLoss {
        value,
        per_token,
        total_tokens,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batch::GroupMember;

    fn member(tokens: usize, reward: f64) -> GroupMember {
        GroupMember {
            trajectory_ref: format!("t{tokens}"),
            reward,
            logprobs: TokenLogProbs::on_policy(vec![-0.5; tokens]).unwrap(),
        }
    }

    fn group(members: Vec<GroupMember>) -> RolloutGroup {
        RolloutGroup {
            question_id: "q".into(),
            members,
        }
    }

    #[test]
    fn identical_arrays_yield_unit_ratios() {
        let lp = TokenLogProbs::on_policy(vec![-1.0, -2.5, -0.25]).unwrap();
        assert_eq!(importance_ratios(&lp), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn ln_two_shift_doubles_the_ratio() {
        let lp = TokenLogProbs::new(vec![-1.0 + 2f64.ln()], vec![-1.0]).unwrap();
        let ratios = importance_ratios(&lp);
        assert!((ratios[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ratios_match_elementwise_exp_difference() {
        let current = vec![-0.3, -1.7, -2.2, -0.9];
        let behavior = vec![-0.5, -1.2, -2.2, -1.4];
        let lp = TokenLogProbs::new(current.clone(), behavior.clone()).unwrap();
        for (i, r) in importance_ratios(&lp).iter().enumerate() {
            assert!((r - (current[i] - behavior[i]).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let err = TokenLogProbs::new(vec![-1.0], vec![-1.0, -2.0]).unwrap_err();
        assert_eq!(
            err,
            RlvrError::LengthMismatch {
                current: 1,
                behavior: 2
            }
        );
    }

    #[test]
    fn balanced_unit_ratio_group_cancels() {
        let g = group(vec![member(2, 1.0), member(2, 0.0)]);
        let loss = grpo_token_loss(&g, &[1.0, -1.0], ClipConfig::default()).unwrap();
        assert!(loss.value.abs() < 1e-15);
    }

    #[test]
    fn unbalanced_lengths_match_hand_evaluated_closed_form() {
        // All ratios 1: J = −(3·(+1) + 1·(−1)) / 4 = −0.5.
        let g = group(vec![member(3, 1.0), member(1, 0.0)]);
        let loss = grpo_token_loss(&g, &[1.0, -1.0], ClipConfig::default()).unwrap();
        assert!((loss.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn clip_higher_caps_single_token_term() {
        // r = 1.5, eps_high = 0.28 → effective coefficient min(1.5, 1.28) = 1.28.
        let lp = TokenLogProbs::new(vec![1.5f64.ln()], vec![0.0]).unwrap();
        let g = group(vec![
            GroupMember {
                trajectory_ref: "a".into(),
                reward: 1.0,
                logprobs: lp,
            },
            member(0, 0.0),
        ]);
        let clip = ClipConfig {
            eps_low: 0.2,
            eps_high: 0.28,
        };
        let loss = grpo_token_loss(&g, &[1.0, 0.0], clip).unwrap();
        assert!((loss.value + 1.28).abs() < 1e-12);
        assert!(loss.per_token[0][0].clipped);
    }

    #[test]
    fn loss_invariant_to_member_order() {
        let g1 = group(vec![member(3, 1.0), member(5, 0.0), member(2, 0.5)]);
        let g2 = group(vec![member(2, 0.5), member(3, 1.0), member(5, 0.0)]);
        let l1 = grpo_token_loss(&g1, &[0.9, -1.2, 0.3], ClipConfig::default()).unwrap();
        let l2 = grpo_token_loss(&g2, &[0.3, 0.9, -1.2], ClipConfig::default()).unwrap();
        assert!((l1.value - l2.value).abs() < 1e-12);
    }
}
