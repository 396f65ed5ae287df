//! Two-stage SFT dataset assembly.
//!
//! Short trajectories (≤ the short band) form stage 1; long ones form
//! stage 2; a seeded fraction of the shorts is additionally retained in
//! stage 2 to prevent regression on short tasks. Retention samples without
//! replacement and retained shorts also stay in stage 1. Every record
//! carries the byte spans of its serialized observation segments, the
//! regions masked from gradient updates.

use medsearch_core::{
    observation_spans, serialize_trajectory, trajectory_token_length, TokenCounter, Trajectory,
};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SftStage {
    Stage1Short,
    Stage2Long,
    Stage2RetainedShort,
}

/// One training record: the trajectory, its stage, and the mask spans (byte
/// ranges of each serialized observation string, quotes included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SftRecord {
    pub trajectory: Trajectory,
    pub stage: SftStage,
    pub mask_spans: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StageLimits {
    pub short_max: u64,
    pub long_max: u64,
}

impl Default for StageLimits {
    fn default() -> Self {
        Self {
            short_max: 32 * 1024,
            long_max: 128 * 1024,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum StageError {
    #[error("trajectory of {tokens} tokens exceeds the {limit}-token long band")]
    OverLongTrajectory { tokens: u64, limit: u64 },
}

/// Per-stage population counts, emitted alongside the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageManifest {
    pub stage1_short: usize,
    pub stage2_long: usize,
    pub stage2_retained_short: usize,
}

fn record(trajectory: &Trajectory, stage: SftStage) -> SftRecord {
    let line = serialize_trajectory(trajectory);
    let mask_spans = observation_spans(&line).expect("serialized record has scannable segments");
    SftRecord {
        trajectory: trajectory.clone(),
        stage,
        mask_spans,
    }
}

/// Assemble the two-stage dataset. The retained-short count is
/// `round(retention · shorts)`, sampled without replacement with the seeded
/// RNG; selection indices are emitted in ascending order so output is
/// reproducible. Trajectories beyond the long band abort assembly.
pub fn assemble_stages(
    trajectories: &[Trajectory],
    counter: &dyn TokenCounter,
    retention: f64,
    seed: u64,
    limits: StageLimits,
) -> Result<Vec<SftRecord>, StageError> {
    assert!((0.0..=1.0).contains(&retention), "retention is a fraction");
    let mut shorts = Vec::new();
    let mut longs = Vec::new();
    for trajectory in trajectories {
        let tokens = trajectory_token_length(trajectory, counter);
        if tokens <= limits.short_max {
            shorts.push(trajectory);
        } else if tokens <= limits.long_max {
            longs.push(trajectory);
        } else {
            return Err(StageError::OverLongTrajectory {
                tokens,
                limit: limits.long_max,
            });
        }
    }

    let mut records = Vec::with_capacity(shorts.len() + longs.len());
    for t in &shorts {
        records.push(record(t, SftStage::Stage1Short));
    }
    for t in &longs {
        records.push(record(t, SftStage::Stage2Long));
    }

    let retained_count = (retention * shorts.len() as f64).round() as usize;
    if retained_count > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = sample(&mut rng, shorts.len(), retained_count).into_vec();
        picked.sort_unstable();
        for idx in picked {
            records.push(record(shorts[idx], SftStage::Stage2RetainedShort));
        }
    }
    Ok(records)
}

impl StageManifest {
    pub fn from_records(records: &[SftRecord]) -> Self {
        let mut manifest = StageManifest {
            stage1_short: 0,
            stage2_long: 0,
            stage2_retained_short: 0,
        };
        for r in records {
            match r.stage {
                SftStage::Stage1Short => manifest.stage1_short += 1,
                SftStage::Stage2Long => manifest.stage2_long += 1,
                SftStage::Stage2RetainedShort => manifest.stage2_retained_short += 1,
            }
        }
        manifest
    }

    /// Total stage-2 population (longs plus retained shorts).
    pub fn stage2_total(&self) -> usize {
        self.stage2_long + self.stage2_retained_short
    }
}

pub fn write_stage_manifest(out: &mut dyn Write, manifest: &StageManifest) -> std::io::Result<()> {
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(manifest).expect("manifest serializes")
    )
}
