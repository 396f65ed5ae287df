//! The episode loop, discard-all context resets, and forced answers.

use medsearch_core::{
    extend_history, token_length, InteractionHistory, Query, Step, ToolAction, TokenCounter,
    Trajectory,
};
use medsearch_env::{ToolEnvironment, ToolError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One policy proposal: the reasoning text and the action to take.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyStep {
    pub thought: String,
    pub action: ToolAction,
}

impl PolicyStep {
    pub fn new(thought: impl Into<String>, action: ToolAction) -> Self {
        Self {
            thought: thought.into(),
            action,
        }
    }
}

/// Policy-contract failure. Episodes survive these: the partial trajectory is
/// returned with a `PolicyError` stop reason.
#[derive(Debug, Clone, Error, PartialEq, Eq, Serialize, Deserialize)]
#[error("policy failure: {detail}")]
pub struct PolicyFailure {
    pub detail: String,
}

impl PolicyFailure {
    pub fn new(detail: impl Into<String>) -> Self {
        Self {
            detail: detail.into(),
        }
    }
}

/// The only model touchpoint in the runtime. `decide` may return any of the
/// three action variants; an `Answer` with empty text is a contract
/// violation. `decide_answer_only` is invoked on the forced-answer path and
/// must return an `Answer` action.
pub trait Policy: Send {
    fn decide(&mut self, history: &InteractionHistory) -> Result<PolicyStep, PolicyFailure>;

    fn decide_answer_only(
        &mut self,
        history: &InteractionHistory,
    ) -> Result<PolicyStep, PolicyFailure>;
}

/// Why an episode stopped.
///
/// `ForcedAnswer` marks the context-overflow rollback path (restarts already
/// spent); `BudgetExhausted` marks tool-call exhaustion. Both force an
/// answer-only step whose answer is graded downstream like any other, but
/// neither counts as normal termination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Answered,
    ForcedAnswer,
    BudgetExhausted,
    PolicyError,
}

/// Result of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub trajectory: Trajectory,
    pub stop_reason: StopReason,
    pub tool_calls_used: u32,
    pub restarts_used: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuntimeError {
    #[error("restart budget exhausted ({0} restarts already applied)")]
    RestartBudgetExhausted(u32),
}

/// Marker prefix for observations recording a failed tool call.
pub const TOOL_ERROR_MARKER: &str = "[tool-error ";

fn tool_error_observation(err: &ToolError) -> String {
    format!(
        "{TOOL_ERROR_MARKER}kind={:?} retryable={}] {}",
        err.kind, err.retryable, err.detail
    )
}

/// Number of failed tool calls recorded in a trajectory's observations.
pub fn count_tool_failures(traj: &Trajectory) -> u32 {
    traj.history
        .steps
        .iter()
        .filter(|s| s.observation.starts_with(TOOL_ERROR_MARKER))
        .count() as u32
}

/// Clear all tool-call records, keeping only the query plus one minimal
/// task-description step carrying the original question and the remaining
/// tool budget. Tool-call and restart counters survive the reset.
///
/// Precondition (panics if violated): the history is over the discard
/// threshold. Fails with `RestartBudgetExhausted` once `max_restarts` resets
/// were already applied; callers fall through to the forced-answer path.
pub fn apply_discard_all(
    history: &InteractionHistory,
    config: &crate::config::AgentConfig,
    counter: &dyn TokenCounter,
) -> Result<InteractionHistory, RuntimeError> {
    assert!(
        token_length(history, counter) > config.discard_threshold,
        "apply_discard_all invoked below the discard threshold"
    );
    if history.restarts >= config.max_restarts {
        return Err(RuntimeError::RestartBudgetExhausted(history.restarts));
    }
    let remaining = config
        .max_tool_calls
        .saturating_sub(history.cumulative_tool_calls);
    let reset_step = Step::new(
        "Context reset: all prior tool-call records were discarded.",
        ToolAction::search([history.query.text.clone()]),
        format!(
            "Task restart. Original question: {}\nRemaining tool budget: {remaining} calls.",
            history.query.text
        ),
    );
    Ok(InteractionHistory {
        query: history.query.clone(),
        steps: vec![reset_step],
        cumulative_tool_calls: history.cumulative_tool_calls,
        restarts: history.restarts + 1,
    })
}

/// Outcome of a forced answer: the trajectory, plus the contract failure when
/// the answer-only policy did not produce an answer.
#[derive(Debug, Clone)]
pub struct ForcedAnswerResult {
    pub trajectory: Trajectory,
    pub failure: Option<PolicyFailure>,
}

/// Roll back the last observation-bearing turn and ask the policy for an
/// answer-only step. The rolled-back call's budget stays spent. The
/// trajectory is marked normally terminated only when the policy actually
/// yields an answer; a non-answer action is coerced into a contract failure
/// with an empty final answer.
pub fn force_answer(
    policy: &mut dyn Policy,
    history: &InteractionHistory,
    counter: &dyn TokenCounter,
) -> ForcedAnswerResult {
    let mut rolled = history.clone();
    if rolled.steps.last().map(|s| !s.action.is_answer()).unwrap_or(false) {
        rolled.steps.pop();
    }
    match policy.decide_answer_only(&rolled) {
        Ok(step) => match &step.action {
            ToolAction::Answer { text } if !text.trim().is_empty() => {
                let text = text.clone();
                match extend_history(&rolled, Step::answer(step.thought, text.clone())) {
                    Ok(answered) => {
                        let tokens = token_length(&answered, counter) + counter.count(&text);
                        ForcedAnswerResult {
                            trajectory: Trajectory {
                                history: answered,
                                final_answer: text,
                                terminated_normally: true,
                                token_length: tokens,
                            },
                            failure: None,
                        }
                    }
                    Err(_) => partial(rolled, counter, PolicyFailure::new(
                        "history already terminated before forced answer",
                    )),
                }
            }
            other => partial(
                rolled,
                counter,
                PolicyFailure::new(format!(
                    "answer-only policy returned a non-answer action: {other:?}"
                )),
            ),
        },
        Err(failure) => partial(rolled, counter, failure),
    }
}

fn partial(
    history: InteractionHistory,
    counter: &dyn TokenCounter,
    failure: PolicyFailure,
) -> ForcedAnswerResult {
    let tokens = token_length(&history, counter);
    ForcedAnswerResult {
        trajectory: Trajectory {
            history,
            final_answer: String::new(),
            terminated_normally: false,
            token_length: tokens,
        },
        failure: Some(failure),
    }
}

/// Run one episode to completion.
///
/// Loop: context check (discard-all, then forced answer once restarts are
/// spent) → budget check (forced answer) → policy step → execute → extend.
/// Failed tool calls become error observations and still consume budget.
/// Policy failures end the episode with the partial trajectory.
pub fn run_episode(
    policy: &mut dyn Policy,
    env: &dyn ToolEnvironment,
    query: &Query,
    config: &crate::config::AgentConfig,
    counter: &dyn TokenCounter,
) -> EpisodeOutcome {
    debug_assert!(config.validate().is_ok(), "invalid agent config");
    let mut history = InteractionHistory::new(query.clone());

    loop {
        if token_length(&history, counter) > config.discard_threshold {
            if history.restarts < config.max_restarts && !history.steps.is_empty() {
                match apply_discard_all(&history, config, counter) {
                    Ok(reset) => {
                        history = reset;
                        continue;
                    }
                    Err(RuntimeError::RestartBudgetExhausted(_)) => {
                        return finish_forced(policy, &history, counter, StopReason::ForcedAnswer)
                    }
                }
            }
            return finish_forced(policy, &history, counter, StopReason::ForcedAnswer);
        }

        if history.cumulative_tool_calls >= config.max_tool_calls {
            return finish_forced(policy, &history, counter, StopReason::BudgetExhausted);
        }

        let step = match policy.decide(&history) {
            Ok(step) => step,
            Err(failure) => return finish_policy_error(history, counter, failure),
        };

        match step.action {
            ToolAction::Answer { ref text } => {
                if text.trim().is_empty() {
                    return finish_policy_error(
                        history,
                        counter,
                        PolicyFailure::new("policy answered with empty text"),
                    );
                }
                let text = text.clone();
                let answered = extend_history(&history, Step::answer(step.thought, text.clone()))
                    .expect("loop exits on the first answer step");
                let tokens = token_length(&answered, counter) + counter.count(&text);
                let restarts = answered.restarts;
                let tool_calls = answered.cumulative_tool_calls;
                return EpisodeOutcome {
                    trajectory: Trajectory {
                        history: answered,
                        final_answer: text,
                        terminated_normally: true,
                        token_length: tokens,
                    },
                    stop_reason: StopReason::Answered,
                    tool_calls_used: tool_calls,
                    restarts_used: restarts,
                };
            }
            ref action => {
                let observation = match env.execute(action) {
                    Ok(obs) => obs,
                    Err(err) => tool_error_observation(&err),
                };
                history = extend_history(
                    &history,
                    Step::new(step.thought, action.clone(), observation),
                )
                .expect("non-terminated history extends");
            }
        }
    }
}

fn finish_forced(
    policy: &mut dyn Policy,
    history: &InteractionHistory,
    counter: &dyn TokenCounter,
    reason: StopReason,
) -> EpisodeOutcome {
    let forced = force_answer(policy, history, counter);
    let stop_reason = if forced.failure.is_some() {
        StopReason::PolicyError
    } else {
        reason
    };
    EpisodeOutcome {
        tool_calls_used: forced.trajectory.history.cumulative_tool_calls,
        restarts_used: forced.trajectory.history.restarts,
        trajectory: forced.trajectory,
        stop_reason,
    }
}

fn finish_policy_error(
    history: InteractionHistory,
    counter: &dyn TokenCounter,
    _failure: PolicyFailure,
) -> EpisodeOutcome {
    let tokens = token_length(&history, counter);
    EpisodeOutcome {
        tool_calls_used: history.cumulative_tool_calls,
        restarts_used: history.restarts,
        trajectory: Trajectory {
            history,
            final_answer: String::new(),
            terminated_normally: false,
            token_length: tokens,
        },
        stop_reason: StopReason::PolicyError,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AgentConfig;
    use crate::scripted::{NeverAnswerPolicy, ScriptedPolicy};
    use medsearch_core::WhitespaceCounter;
    use medsearch_env::{build_index, Document, OfflineEnvironment, SourceTag};

    fn tiny_env() -> OfflineEnvironment {
        let corpus = vec![Document {
            id: "d1".into(),
            title: "entry".into(),
            body: "entry body words".into(),
            source_tag: SourceTag::General,
            authority_score: 0.5,
            timestamp: chrono::NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
        }];
        OfflineEnvironment::new(build_index(corpus).unwrap())
    }

    fn query() -> Query {
        Query::new("q1", "what is the entry?")
    }

    #[test]
    fn scripted_search_search_answer() {
        let mut policy = ScriptedPolicy::from_steps(vec![
            PolicyStep::new("s1", ToolAction::search(["entry"])),
            PolicyStep::new("s2", ToolAction::search(["body"])),
            PolicyStep::new("done", ToolAction::answer("x")),
        ]);
        let outcome = run_episode(
            &mut policy,
            &tiny_env(),
            &query(),
            &AgentConfig::default(),
            &WhitespaceCounter,
        );
        assert_eq!(outcome.stop_reason, StopReason::Answered);
        assert_eq!(outcome.trajectory.history.steps.len(), 3);
        assert_eq!(outcome.tool_calls_used, 2);
        assert!(outcome.trajectory.terminated_normally);
        assert_eq!(outcome.trajectory.final_answer, "x");
    }

    #[test]
    fn budget_exhaustion_forces_an_answer() {
        let config = AgentConfig {
            max_tool_calls: 5,
            ..AgentConfig::default()
        };
        let mut policy = NeverAnswerPolicy::new("fallback");
        let outcome = run_episode(&mut policy, &tiny_env(), &query(), &config, &WhitespaceCounter);
        assert_eq!(outcome.stop_reason, StopReason::BudgetExhausted);
        assert_eq!(outcome.tool_calls_used, 5);
        assert_eq!(outcome.trajectory.final_answer, "fallback");
        // Rollback dropped the last tool step; 5 calls but 4 held + answer.
        assert_eq!(outcome.trajectory.history.steps.len(), 5);
        assert!(outcome.trajectory.terminated_normally);
    }

    #[test]
    fn policy_failure_returns_partial_trajectory() {
        let mut policy = ScriptedPolicy::from_steps(vec![PolicyStep::new(
            "s1",
            ToolAction::search(["entry"]),
        )]);
        let outcome = run_episode(
            &mut policy,
            &tiny_env(),
            &query(),
            &AgentConfig::default(),
            &WhitespaceCounter,
        );
        assert_eq!(outcome.stop_reason, StopReason::PolicyError);
        assert_eq!(outcome.trajectory.history.steps.len(), 1);
        assert!(!outcome.trajectory.terminated_normally);
        assert!(outcome.trajectory.final_answer.is_empty());
    }

    #[test]
    fn discard_all_keeps_counters_and_one_step() {
        let config = AgentConfig {
            discard_threshold: 50,
            context_limit: 60,
            ..AgentConfig::default()
        };
        let mut history = InteractionHistory::new(query());
        for i in 0..10 {
            history = extend_history(
                &history,
                Step::new(
                    "t",
                    ToolAction::search([format!("probe {i}")]),
                    "aaa bbb ccc ddd eee fff ggg hhh",
                ),
            )
            .unwrap();
        }
        assert!(token_length(&history, &WhitespaceCounter) > 50);
        let reset = apply_discard_all(&history, &config, &WhitespaceCounter).unwrap();
        assert_eq!(reset.steps.len(), 1);
        assert_eq!(reset.cumulative_tool_calls, 10);
        assert_eq!(reset.restarts, 1);
        assert!(reset.steps[0]
            .observation
            .contains("Remaining tool budget: 118"));
    }

    #[test]
    #[should_panic(expected = "below the discard threshold")]
    fn discard_below_threshold_is_a_caller_bug() {
        let config = AgentConfig::default();
        let history = InteractionHistory::new(query());
        let _ = apply_discard_all(&history, &config, &WhitespaceCounter);
    }

    #[test]
    fn second_reset_is_refused() {
        let config = AgentConfig {
            discard_threshold: 5,
            context_limit: 10,
            max_restarts: 1,
            ..AgentConfig::default()
        };
        let mut history = InteractionHistory::new(query());
        history.restarts = 1;
        history = extend_history(
            &history,
            Step::new("t", ToolAction::search(["x"]), "one two three four five six"),
        )
        .unwrap();
        let err = apply_discard_all(&history, &config, &WhitespaceCounter).unwrap_err();
        assert_eq!(err, RuntimeError::RestartBudgetExhausted(1));
    }

    #[test]
    fn force_answer_drops_last_tool_step() {
        let mut history = InteractionHistory::new(query());
        history = extend_history(
            &history,
            Step::new("t", ToolAction::visit(["d1"], "read"), "visited content"),
        )
        .unwrap();
        let mut policy = ScriptedPolicy::from_steps(vec![]).with_answer_only(PolicyStep::new(
            "forced",
            ToolAction::answer("y"),
        ));
        let forced = force_answer(&mut policy, &history, &WhitespaceCounter);
        assert!(forced.failure.is_none());
        assert_eq!(forced.trajectory.final_answer, "y");
        // The visit step was rolled back; only the answer step remains.
        assert_eq!(forced.trajectory.history.steps.len(), 1);
        assert!(forced.trajectory.history.steps[0].action.is_answer());
        // Its budget stays spent.
        assert_eq!(forced.trajectory.history.cumulative_tool_calls, 1);
    }

    #[test]
    fn force_answer_coerces_non_answer_to_failure() {
        let history = InteractionHistory::new(query());
        let mut policy = ScriptedPolicy::from_steps(vec![]).with_answer_only(PolicyStep::new(
            "still searching",
            ToolAction::search(["more"]),
        ));
        let forced = force_answer(&mut policy, &history, &WhitespaceCounter);
        assert!(forced.failure.is_some());
        assert!(forced.trajectory.final_answer.is_empty());
        assert!(!forced.trajectory.terminated_normally);
    }

    #[test]
    fn tool_failures_become_observations_and_are_countable() {
        struct BrokenEnv;
        impl medsearch_env::ToolEnvironment for BrokenEnv {
            fn execute(&self, _action: &ToolAction) -> Result<String, medsearch_env::ToolError> {
                Err(medsearch_env::ToolError::network("backend down"))
            }
            fn search(
                &self,
                _q: &str,
                _k: usize,
            ) -> Result<Vec<medsearch_env::SearchResult>, medsearch_env::ToolError> {
                Err(medsearch_env::ToolError::network("backend down"))
            }
            fn medical_search(
                &self,
                _q: &str,
                _k: usize,
            ) -> Result<Vec<medsearch_env::SearchResult>, medsearch_env::ToolError> {
                Err(medsearch_env::ToolError::network("backend down"))
            }
            fn visit(&self, _t: &str, _g: &str) -> Result<String, medsearch_env::ToolError> {
                Err(medsearch_env::ToolError::network("backend down"))
            }
        }
        let mut policy = ScriptedPolicy::from_steps(vec![
            PolicyStep::new("s", ToolAction::search(["x"])),
            PolicyStep::new("a", ToolAction::answer("done")),
        ]);
        let outcome = run_episode(
            &mut policy,
            &BrokenEnv,
            &query(),
            &AgentConfig::default(),
            &WhitespaceCounter,
        );
        assert_eq!(outcome.stop_reason, StopReason::Answered);
        assert_eq!(count_tool_failures(&outcome.trajectory), 1);
    }
}
