//! Trajectory pipeline: rejection-sampled rollout selection, rule- and
//! rubric-based filtering, and two-stage SFT dataset assembly with
//! observation masking.

pub mod filter;
pub mod rollout;
pub mod rubric;
pub mod stages;

pub use filter::{
    rule_filter, trigram_jaccard, DropReason, FilterDecision, FilterThresholds,
};
pub use rollout::{select_shortest_correct, RolloutSet};
pub use rubric::{rubric_score, FactualRigor, RubricAssessment, RubricJudge, RubricScore};
pub use stages::{
    assemble_stages, write_stage_manifest, SftRecord, SftStage, StageError, StageLimits,
    StageManifest,
};
