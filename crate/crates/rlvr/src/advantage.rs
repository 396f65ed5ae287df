//! Within-group advantage normalization.
//!
//! Each trajectory's final reward is centered and scaled by the group's mean
//! and standard deviation. The std is population (divide by G) — no Bessel
//! correction. Groups whose rewards all tie carry no learning signal: below
//! the std floor every advantage is 0 instead of dividing by zero, which
//! leaves such groups inert.

use crate::RlvrError;

/// Below this population std a group counts as degenerate.
pub const DEFAULT_STD_FLOOR: f64 = 1e-8;

/// Normalize rewards into advantages: `(R_i − mean) / std` with population
/// std, or all zeros for a degenerate group. Requires at least two members.
pub fn group_advantages(rewards: &[f64], std_floor: f64) -> Result<Vec<f64>, RlvrError> {
    if rewards.len() < 2 {
        return Err(RlvrError::GroupTooSmall(rewards.len()));
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let variance = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let std = variance.sqrt();
    if std < std_floor {
        return Ok(vec![0.0; rewards.len()]);
    }
    Ok(rewards.iter().map(|r| (r - mean) / std).collect())
}
