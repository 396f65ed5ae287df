//! Queries, tool actions, steps, histories, and trajectories.
//!
//! A [`Trajectory`] is the full record of one episode: the query, the ordered
//! (thought, action, observation) steps, and the final answer. Histories are
//! extended purely — [`extend_history`] returns a new value and never mutates
//! its input — so partially built episodes can be shared freely.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// The information need posed by the user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    /// Opaque identifier, unique within a dataset.
    pub id: String,
    /// Natural-language question; never empty for a valid query.
    pub text: String,
    /// Reference answer, when known.
    pub gold_answer: Option<String>,
    /// Free-form tags (category, source phase, ...). Sorted map so that
    /// serialization is deterministic.
    pub metadata: BTreeMap<String, String>,
}

impl Query {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            gold_answer: None,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_gold(mut self, gold: impl Into<String>) -> Self {
        self.gold_answer = Some(gold.into());
        self
    }
}

/// A tool invocation instruction. The action space has exactly three
/// operations: retrieve result summaries, read a specific document, or emit
/// the final answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", content = "arguments", rename_all = "snake_case")]
pub enum ToolAction {
    /// Retrieve top-K results for one or more queries.
    Search { queries: Vec<String> },
    /// Read one or more documents with a stated extraction goal.
    Visit { targets: Vec<String>, goal: String },
    /// Produce the final answer and terminate the episode.
    Answer { text: String },
}

impl ToolAction {
    pub fn search<S: Into<String>>(queries: impl IntoIterator<Item = S>) -> Self {
        ToolAction::Search {
            queries: queries.into_iter().map(Into::into).collect(),
        }
    }

    pub fn visit<S: Into<String>>(targets: impl IntoIterator<Item = S>, goal: impl Into<String>) -> Self {
        ToolAction::Visit {
            targets: targets.into_iter().map(Into::into).collect(),
            goal: goal.into(),
        }
    }

    pub fn answer(text: impl Into<String>) -> Self {
        ToolAction::Answer { text: text.into() }
    }

    pub fn is_answer(&self) -> bool {
        matches!(self, ToolAction::Answer { .. })
    }

    /// The textual payload of the action, used for token counting.
    /// Segments are joined with newlines so the text is additive over parts.
    pub fn payload_text(&self) -> String {
        match self {
            ToolAction::Search { queries } => queries.join("\n"),
            ToolAction::Visit { targets, goal } => {
                let mut s = targets.join("\n");
                s.push('\n');
                s.push_str(goal);
                s
            }
            ToolAction::Answer { text } => text.clone(),
        }
    }

    /// Per-variant structural invariants, as violations rather than errors.
    fn violations(&self, at: usize, out: &mut Vec<Violation>) {
        match self {
            ToolAction::Search { queries } => {
                if queries.is_empty() || queries.iter().any(|q| q.trim().is_empty()) {
                    out.push(Violation::new(
                        ViolationKind::MalformedAction,
                        format!("step {at}: search requires at least one non-empty query"),
                    ));
                }
            }
            ToolAction::Visit { targets, .. } => {
                if targets.is_empty() || targets.iter().any(|t| t.trim().is_empty()) {
                    out.push(Violation::new(
                        ViolationKind::MalformedAction,
                        format!("step {at}: visit requires at least one document locator"),
                    ));
                }
            }
            ToolAction::Answer { text } => {
                if text.trim().is_empty() {
                    out.push(Violation::new(
                        ViolationKind::MalformedAction,
                        format!("step {at}: answer text is empty"),
                    ));
                }
            }
        }
    }
}

/// One (thought, action, observation) triple. The observation is empty only
/// when the action is `Answer`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub thought: String,
    pub action: ToolAction,
    pub observation: String,
}

impl Step {
    pub fn new(
        thought: impl Into<String>,
        action: ToolAction,
        observation: impl Into<String>,
    ) -> Self {
        Self {
            thought: thought.into(),
            action,
            observation: observation.into(),
        }
    }

    /// Terminal step carrying the final answer; observation is empty by
    /// construction.
    pub fn answer(thought: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            thought: thought.into(),
            action: ToolAction::answer(text),
            observation: String::new(),
        }
    }
}

/// The complete interaction history up to the current step.
///
/// `cumulative_tool_calls` counts every executed non-answer action over the
/// whole episode and survives context resets; `restarts` counts discard-all
/// resets applied by the runtime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionHistory {
    pub query: Query,
    pub steps: Vec<Step>,
    pub cumulative_tool_calls: u32,
    pub restarts: u32,
}

impl InteractionHistory {
    pub fn new(query: Query) -> Self {
        Self {
            query,
            steps: Vec::new(),
            cumulative_tool_calls: 0,
            restarts: 0,
        }
    }

    /// True once an answer step has been recorded.
    pub fn is_terminated(&self) -> bool {
        self.steps.iter().any(|s| s.action.is_answer())
    }

    pub fn last_answer(&self) -> Option<&str> {
        self.steps.iter().rev().find_map(|s| match &s.action {
            ToolAction::Answer { text } => Some(text.as_str()),
            _ => None,
        })
    }
}

/// The full record of one episode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub history: InteractionHistory,
    pub final_answer: String,
    /// True when the episode ended with the policy's own answer step (as
    /// opposed to truncation or a failed forced answer).
    pub terminated_normally: bool,
    pub token_length: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HistoryError {
    #[error("history already holds an answer step")]
    AlreadyTerminated,
}

/// Append a step to a history, returning the extended copy.
///
/// Non-answer actions increment `cumulative_tool_calls`. The input value is
/// left unchanged. Fails once an answer step exists: answers are terminal.
pub fn extend_history(
    history: &InteractionHistory,
    step: Step,
) -> Result<InteractionHistory, HistoryError> {
    if history.is_terminated() {
        return Err(HistoryError::AlreadyTerminated);
    }
    let mut extended = history.clone();
    if !step.action.is_answer() {
        extended.cumulative_tool_calls += 1;
    }
    extended.steps.push(step);
    Ok(extended)
}

/// Kinds of structural violations reported by [`validate_trajectory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    EmptyQueryText,
    MalformedAction,
    /// An answer step occurs before the final position.
    NonTerminalAnswer,
    /// A non-answer step carries no observation.
    MissingObservation,
    /// An answer step carries a non-empty observation.
    ObservationOnAnswer,
    /// `terminated_normally` is set but the last step is not an answer.
    MissingTerminalAnswer,
    /// `final_answer` disagrees with the terminal answer step.
    AnswerMismatch,
    ZeroTokenLength,
    /// `cumulative_tool_calls` is smaller than the non-answer steps held.
    ToolCallUndercount,
}

/// One structural violation; violations are data, not failures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl Violation {
    fn new(kind: ViolationKind, detail: impl Into<String>) -> Self {
        Self {
            kind,
            detail: detail.into(),
        }
    }
}

/// Structural validation: an empty report means the trajectory is well formed.
///
/// Checks alternation (observations on tool steps only), answer terminality,
/// per-action invariants, the answer/`final_answer` agreement required when
/// `terminated_normally` is set, and the tool-call accounting invariant.
pub fn validate_trajectory(traj: &Trajectory) -> Vec<Violation> {
    let mut out = Vec::new();
    let history = &traj.history;

    if history.query.text.trim().is_empty() {
        out.push(Violation::new(
            ViolationKind::EmptyQueryText,
            "query text is empty",
        ));
    }

    let last = history.steps.len().saturating_sub(1);
    for (i, step) in history.steps.iter().enumerate() {
        step.action.violations(i, &mut out);
        if step.action.is_answer() {
            if i != last {
                out.push(Violation::new(
                    ViolationKind::NonTerminalAnswer,
                    format!("answer action at step {i} of {}", history.steps.len()),
                ));
            }
            if !step.observation.is_empty() {
                out.push(Violation::new(
                    ViolationKind::ObservationOnAnswer,
                    format!("step {i}: answer step carries an observation"),
                ));
            }
        } else if step.observation.is_empty() {
            out.push(Violation::new(
                ViolationKind::MissingObservation,
                format!("step {i}: tool step has no observation"),
            ));
        }
    }

    let non_answer_steps = history
        .steps
        .iter()
        .filter(|s| !s.action.is_answer())
        .count() as u32;
    if history.cumulative_tool_calls < non_answer_steps {
        out.push(Violation::new(
            ViolationKind::ToolCallUndercount,
            format!(
                "cumulative_tool_calls {} < {} non-answer steps held",
                history.cumulative_tool_calls, non_answer_steps
            ),
        ));
    }

    if traj.terminated_normally {
        match history.steps.last().map(|s| &s.action) {
            Some(ToolAction::Answer { text }) => {
                if *text != traj.final_answer {
                    out.push(Violation::new(
                        ViolationKind::AnswerMismatch,
                        "final_answer differs from terminal answer step",
                    ));
                }
            }
            _ => out.push(Violation::new(
                ViolationKind::MissingTerminalAnswer,
                "terminated_normally set without a terminal answer step",
            )),
        }
        if traj.token_length == 0 {
            out.push(Violation::new(
                ViolationKind::ZeroTokenLength,
                "token_length must be positive",
            ));
        }
    }

    out
}
