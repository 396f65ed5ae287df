//! Scripted policies: deterministic fixtures used by tests and the CLI's
//! offline mode.

use crate::episode::{Policy, PolicyFailure, PolicyStep};
use medsearch_core::{InteractionHistory, ToolAction};
use std::collections::VecDeque;

/// Plays a fixed list of steps in order; fails once the script is exhausted.
/// The answer-only response defaults to a generic forced answer.
pub struct ScriptedPolicy {
    steps: VecDeque<PolicyStep>,
    answer_only: Option<PolicyStep>,
}

impl ScriptedPolicy {
    pub fn from_steps(steps: Vec<PolicyStep>) -> Self {
        Self {
            steps: steps.into(),
            answer_only: None,
        }
    }

    pub fn with_answer_only(mut self, step: PolicyStep) -> Self {
        self.answer_only = Some(step);
        self
    }
}

impl Policy for ScriptedPolicy {
    fn decide(&mut self, _history: &InteractionHistory) -> Result<PolicyStep, PolicyFailure> {
        self.steps
            .pop_front()
            .ok_or_else(|| PolicyFailure::new("script exhausted"))
    }

    fn decide_answer_only(
        &mut self,
        _history: &InteractionHistory,
    ) -> Result<PolicyStep, PolicyFailure> {
        Ok(self.answer_only.clone().unwrap_or_else(|| {
            PolicyStep::new("forced", ToolAction::answer("no answer reached"))
        }))
    }
}

/// Searches forever with distinct probe queries; only the forced-answer path
/// produces a reply. Exercises budget and context handling.
pub struct NeverAnswerPolicy {
    forced_answer: String,
    calls: u32,
}

impl NeverAnswerPolicy {
    pub fn new(forced_answer: impl Into<String>) -> Self {
        Self {
            forced_answer: forced_answer.into(),
            calls: 0,
        }
    }
}

impl Policy for NeverAnswerPolicy {
    fn decide(&mut self, _history: &InteractionHistory) -> Result<PolicyStep, PolicyFailure> {
        self.calls += 1;
        Ok(PolicyStep::new(
            format!("probe {}", self.calls),
            ToolAction::search([format!("probe query {}", self.calls)]),
        ))
    }

    fn decide_answer_only(
        &mut self,
        _history: &InteractionHistory,
    ) -> Result<PolicyStep, PolicyFailure> {
        Ok(PolicyStep::new(
            "forced to answer",
            ToolAction::answer(self.forced_answer.clone()),
        ))
    }
}

/// Fails on the nth `decide` call.
pub struct FailingPolicy {
    fail_at: usize,
    calls: usize,
}

impl FailingPolicy {
    pub fn new(fail_at: usize) -> Self {
        Self { fail_at, calls: 0 }
    }
}

impl Policy for FailingPolicy {
    fn decide(&mut self, _history: &InteractionHistory) -> Result<PolicyStep, PolicyFailure> {
        self.calls += 1;
        if self.calls >= self.fail_at {
            Err(PolicyFailure::new(format!("scripted failure at call {}", self.calls)))
        } else {
            Ok(PolicyStep::new(
                "ok so far",
                ToolAction::search([format!("probe {}", self.calls)]),
            ))
        }
    }

    fn decide_answer_only(
        &mut self,
        _history: &InteractionHistory,
    ) -> Result<PolicyStep, PolicyFailure> {
        Err(PolicyFailure::new("scripted failure in answer-only mode"))
    }
}

/// Answers a fixed text after a fixed number of search steps. Used by eval
/// fixtures where correctness per run is scripted in advance.
pub struct FixedAnswerPolicy {
    answer: String,
    searches_before_answer: u32,
    issued: u32,
}

impl FixedAnswerPolicy {
    pub fn new(answer: impl Into<String>, searches_before_answer: u32) -> Self {
        Self {
            answer: answer.into(),
            searches_before_answer,
            issued: 0,
        }
    }
}

impl Policy for FixedAnswerPolicy {
    fn decide(&mut self, history: &InteractionHistory) -> Result<PolicyStep, PolicyFailure> {
        if self.issued < self.searches_before_answer {
            self.issued += 1;
            Ok(PolicyStep::new(
                format!("gather evidence {}", self.issued),
                ToolAction::search([format!("{} {}", history.query.text, self.issued)]),
            ))
        } else {
            Ok(PolicyStep::new(
                "evidence sufficient",
                ToolAction::answer(self.answer.clone()),
            ))
        }
    }

    fn decide_answer_only(
        &mut self,
        _history: &InteractionHistory,
    ) -> Result<PolicyStep, PolicyFailure> {
        Ok(PolicyStep::new(
            "forced",
            ToolAction::answer(self.answer.clone()),
        ))
    }
}

/// Search → visit the top hit → answer from what was read. The CLI's offline
/// demo policy; no model behind it.
pub struct SearchVisitAnswerPolicy;

fn first_doc_id(observation: &str) -> Option<String> {
    let open = observation.find('[')?;
    let close = observation[open + 1..].find(']')?;
    Some(observation[open + 1..open + 1 + close].to_string())
}

impl Policy for SearchVisitAnswerPolicy {
    fn decide(&mut self, history: &InteractionHistory) -> Result<PolicyStep, PolicyFailure> {
        match history.steps.len() {
            0 => Ok(PolicyStep::new(
                "search the question directly",
                ToolAction::search([history.query.text.clone()]),
            )),
            1 => {
                let last = &history.steps[0].observation;
                match first_doc_id(last) {
                    Some(id) => Ok(PolicyStep::new(
                        "read the top result",
                        ToolAction::visit([id], history.query.text.clone()),
                    )),
                    None => Ok(PolicyStep::new(
                        "nothing retrieved",
                        ToolAction::answer("no relevant documents found"),
                    )),
                }
            }
            _ => {
                let last = &history.steps.last().expect("non-empty").observation;
                let summary: String = last.split_whitespace().take(24).collect::<Vec<_>>().join(" ");
                let text = if summary.is_empty() {
                    "no content extracted".to_string()
                } else {
                    summary
                };
                Ok(PolicyStep::new("summarize findings", ToolAction::answer(text)))
            }
        }
    }

    fn decide_answer_only(
        &mut self,
        history: &InteractionHistory,
    ) -> Result<PolicyStep, PolicyFailure> {
        let text = history
            .steps
            .last()
            .map(|s| {
                s.observation
                    .split_whitespace()
                    .take(24)
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| "unknown".to_string());
        Ok(PolicyStep::new("forced summary", ToolAction::answer(text)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doc_id_extraction() {
        assert_eq!(
            first_doc_id("Results for \"x\":\n1. [doc007] snippet"),
            Some("doc007".to_string())
        );
        assert_eq!(first_doc_id("(no matches)"), None);
    }
}
