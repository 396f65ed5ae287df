//! Budget and context safety under adversarial policies, plus the
//! parallel-equals-serial oracle.

use medsearch_core::{validate_trajectory, Query, ToolAction, WhitespaceCounter};
use medsearch_env::{SearchResult, ToolEnvironment, ToolError};
use medsearch_runtime::{
    run_episode, run_parallel, AgentConfig, FixedAnswerPolicy, NeverAnswerPolicy, Policy,
    PolicyStep, StopReason,
};
use proptest::prelude::*;

/// Environment returning observations of a fixed word count, so tests can
/// steer context growth precisely.
struct FloodEnv {
    words_per_observation: usize,
}

impl ToolEnvironment for FloodEnv {
    fn execute(&self, _action: &ToolAction) -> Result<String, ToolError> {
        Ok(vec!["filler"; self.words_per_observation].join(" "))
    }
    fn search(&self, _q: &str, _k: usize) -> Result<Vec<SearchResult>, ToolError> {
        Ok(vec![])
    }
    fn medical_search(&self, _q: &str, _k: usize) -> Result<Vec<SearchResult>, ToolError> {
        Ok(vec![])
    }
    fn visit(&self, _t: &str, _g: &str) -> Result<String, ToolError> {
        Ok(vec!["filler"; self.words_per_observation].join(" "))
    }
}

/// Adversarial scripted policy: seeded mix of searches and visits, answering
/// only after `answer_after` steps (possibly never within budget).
struct AdversarialPolicy {
    state: u64,
    answer_after: u32,
    steps: u32,
}

impl AdversarialPolicy {
    fn new(seed: u64, answer_after: u32) -> Self {
        Self {
            state: seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493),
            answer_after,
            steps: 0,
        }
    }

    fn next(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.state >> 33
    }
}

impl Policy for AdversarialPolicy {
    fn decide(
        &mut self,
        _history: &medsearch_core::InteractionHistory,
    ) -> Result<PolicyStep, medsearch_runtime::PolicyFailure> {
        self.steps += 1;
        if self.steps > self.answer_after {
            return Ok(PolicyStep::new("give up", ToolAction::answer("late answer")));
        }
        let roll = self.next() % 3;
        let action = match roll {
            0 => ToolAction::search([format!("probe {}", self.next())]),
            1 => ToolAction::search([
                format!("probe {}", self.next()),
                format!("probe {}", self.next()),
            ]),
            _ => ToolAction::visit([format!("doc{}", self.next() % 50)], "inspect"),
        };
        Ok(PolicyStep::new(format!("step {}", self.steps), action))
    }

    fn decide_answer_only(
        &mut self,
        _history: &medsearch_core::InteractionHistory,
    ) -> Result<PolicyStep, medsearch_runtime::PolicyFailure> {
        Ok(PolicyStep::new("forced", ToolAction::answer("forced answer")))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// No adversarial policy ever exceeds the tool-call budget, and every
    /// outcome's trajectory validates clean.
    #[test]
    fn tool_calls_never_exceed_budget(
        seed in any::<u64>(),
        answer_after in 0u32..40,
        max_tool_calls in 1u32..20,
        words in 1usize..40,
    ) {
        let config = AgentConfig {
            max_tool_calls,
            context_limit: 4000,
            discard_threshold: 3600,
            ..AgentConfig::default()
        };
        let env = FloodEnv { words_per_observation: words };
        let mut policy = AdversarialPolicy::new(seed, answer_after);
        let outcome = run_episode(
            &mut policy,
            &env,
            &Query::new("q", "adversarial question"),
            &config,
            &WhitespaceCounter,
        );
        prop_assert!(outcome.tool_calls_used <= max_tool_calls);
        prop_assert!(outcome.trajectory.history.cumulative_tool_calls <= max_tool_calls);
        let report = validate_trajectory(&outcome.trajectory);
        prop_assert!(report.is_empty(), "violations: {report:?}");
    }
}

#[test]
fn over_threshold_context_triggers_exactly_one_discard() {
    // 300-word observations against a 1000-token threshold: overflow fires
    // after a few calls; with max_restarts = 1 exactly one reset happens and
    // the counters survive it.
    let config = AgentConfig {
        max_tool_calls: 128,
        context_limit: 1200,
        discard_threshold: 1000,
        max_restarts: 1,
        ..AgentConfig::default()
    };
    let env = FloodEnv {
        words_per_observation: 300,
    };
    let mut policy = NeverAnswerPolicy::new("forced");
    let outcome = run_episode(
        &mut policy,
        &env,
        &Query::new("q", "question words"),
        &config,
        &WhitespaceCounter,
    );
    assert_eq!(outcome.restarts_used, 1);
    assert_eq!(outcome.stop_reason, StopReason::ForcedAnswer);
    assert_eq!(outcome.trajectory.final_answer, "forced");
    // Tool calls from before the reset are still counted.
    assert!(outcome.trajectory.history.cumulative_tool_calls >= 4);
}

#[test]
fn parallel_outcomes_match_serial_and_input_order() {
    let queries: Vec<Query> = (0..4)
        .map(|i| Query::new(format!("q{i}"), format!("question number {i}")))
        .collect();
    let env = FloodEnv {
        words_per_observation: 5,
    };
    let config = AgentConfig::default();
    let factory = |query: &Query, seed: u64| -> Box<dyn Policy> {
        Box::new(FixedAnswerPolicy::new(
            format!("answer for {} seeded {}", query.id, seed % 7),
            (seed % 3) as u32 + 1,
        ))
    };
    let serial = run_parallel(&factory, &env, &queries, &config, &WhitespaceCounter, 1, 42);
    let parallel = run_parallel(&factory, &env, &queries, &config, &WhitespaceCounter, 2, 42);
    assert_eq!(serial, parallel);
    for (outcome, query) in serial.iter().zip(&queries) {
        assert_eq!(outcome.trajectory.history.query.id, query.id);
    }
}

#[test]
fn one_failing_episode_leaves_others_untouched() {
    let queries: Vec<Query> = (0..3)
        .map(|i| Query::new(format!("q{i}"), format!("question {i}")))
        .collect();
    let env = FloodEnv {
        words_per_observation: 5,
    };
    let factory = |query: &Query, _seed: u64| -> Box<dyn Policy> {
        if query.id == "q1" {
            Box::new(medsearch_runtime::FailingPolicy::new(1))
        } else {
            Box::new(FixedAnswerPolicy::new("fine", 1))
        }
    };
    let outcomes = run_parallel(
        &factory,
        &env,
        &queries,
        &AgentConfig::default(),
        &WhitespaceCounter,
        2,
        7,
    );
    assert_eq!(outcomes[0].stop_reason, StopReason::Answered);
    assert_eq!(outcomes[1].stop_reason, StopReason::PolicyError);
    assert_eq!(outcomes[2].stop_reason, StopReason::Answered);
}
