//! Rubric-based scoring for long-band trajectories.
//!
//! Three 0–5 dimensions — intent planning, tool invocation, information
//! integration — averaged into the total, with factual rigor as a hard gate:
//! any factual error forces the total to 0. Medical items add terminology
//! standardization, source authority, and timeliness sub-criteria to the
//! judge's brief.

use medsearch_core::Trajectory;
use medsearch_env::ToolError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactualRigor {
    Pass,
    Fail,
}

/// Raw judge output before aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RubricAssessment {
    pub intent_planning: u8,
    pub tool_invocation: u8,
    pub information_integration: u8,
    pub factual_rigor: FactualRigor,
}

/// Judgment contract. `medical` asks the judge to additionally weigh
/// terminology standardization, source authority, and timeliness when
/// scoring information integration.
pub trait RubricJudge: Send + Sync {
    fn assess(&self, traj: &Trajectory, medical: bool) -> Result<RubricAssessment, ToolError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RubricScore {
    pub intent_planning: u8,
    pub tool_invocation: u8,
    pub information_integration: u8,
    pub factual_rigor: FactualRigor,
    pub total: f64,
}

/// Score one trajectory. Intended for the long band (the 32K–128K samples);
/// shorter trajectories pass through rule filtering only.
pub fn rubric_score(
    traj: &Trajectory,
    judge: &dyn RubricJudge,
    medical: bool,
) -> Result<RubricScore, ToolError> {
    let assessment = judge.assess(traj, medical)?;
    for (name, score) in [
        ("intent_planning", assessment.intent_planning),
        ("tool_invocation", assessment.tool_invocation),
        ("information_integration", assessment.information_integration),
    ] {
        if score > 5 {
            return Err(ToolError::parse(format!(
                "judge returned {name} = {score}, outside the 0-5 scale"
            )));
        }
    }
    let total = match assessment.factual_rigor {
        FactualRigor::Fail => 0.0,
        FactualRigor::Pass => {
            f64::from(
                u32::from(assessment.intent_planning)
                    + u32::from(assessment.tool_invocation)
                    + u32::from(assessment.information_integration),
            ) / 3.0
        }
    };
    Ok(RubricScore {
        intent_planning: assessment.intent_planning,
        tool_invocation: assessment.tool_invocation,
        information_integration: assessment.information_integration,
        factual_rigor: assessment.factual_rigor,
        total,
    })
}
