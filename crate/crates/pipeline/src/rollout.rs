//! Rollout sets and shortest-correct selection.

use medsearch_core::{Query, Trajectory};
use serde::{Deserialize, Serialize};

/// All rollouts collected for one query, with per-trajectory correctness as
/// judged against the gold answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutSet {
    pub query: Query,
    pub trajectories: Vec<Trajectory>,
    pub correctness: Vec<bool>,
}

impl RolloutSet {
    pub fn new(query: Query, trajectories: Vec<Trajectory>, correctness: Vec<bool>) -> Self {
        assert_eq!(
            trajectories.len(),
            correctness.len(),
            "one correctness flag per trajectory"
        );
        Self {
            query,
            trajectories,
            correctness,
        }
    }
}

/// The correct trajectory with the fewest actions; ties break by fewer
/// tokens, then stable input order. None when no rollout is correct.
pub fn select_shortest_correct(set: &RolloutSet) -> Option<&Trajectory> {
    set.trajectories
        .iter()
        .zip(&set.correctness)
        .filter(|(_, &correct)| correct)
        .map(|(t, _)| t)
        .min_by_key(|t| (t.history.steps.len(), t.token_length))
}

#[cfg(test)]
mod tests {
    use super::*;
    use medsearch_core::{extend_history, InteractionHistory, Step, ToolAction};

    fn trajectory(actions: usize, tokens: u64, answer: &str) -> Trajectory {
        let mut history = InteractionHistory::new(Query::new("q", "question"));
        for i in 1..actions {
            history = extend_history(
                &history,
                Step::new("t", ToolAction::search([format!("probe {i}")]), "obs"),
            )
            .unwrap();
        }
        history = extend_history(&history, Step::answer("done", answer)).unwrap();
        Trajectory {
            history,
            final_answer: answer.into(),
            terminated_normally: true,
            token_length: tokens,
        }
    }

    #[test]
    fn shortest_correct_wins_over_shorter_incorrect() {
        let set = RolloutSet::new(
            Query::new("q", "question"),
            vec![
                trajectory(5, 100, "a"),
                trajectory(3, 100, "a"),
                trajectory(2, 100, "wrong"),
            ],
            vec![true, true, false],
        );
        let selected = select_shortest_correct(&set).unwrap();
        assert_eq!(selected.history.steps.len(), 3);
    }

    #[test]
    fn no_correct_rollout_yields_none() {
        let set = RolloutSet::new(
            Query::new("q", "question"),
            vec![trajectory(3, 100, "x")],
            vec![false],
        );
        assert!(select_shortest_correct(&set).is_none());
    }

    #[test]
    fn action_tie_breaks_by_token_length() {
        let set = RolloutSet::new(
            Query::new("q", "question"),
            vec![trajectory(3, 900, "a"), trajectory(3, 800, "a")],
            vec![true, true],
        );
        let selected = select_shortest_correct(&set).unwrap();
        assert_eq!(selected.token_length, 800);
    }

    #[test]
    fn full_tie_keeps_input_order() {
        let set = RolloutSet::new(
            Query::new("q", "question"),
            vec![trajectory(3, 800, "first"), trajectory(3, 800, "second")],
            vec![true, true],
        );
        assert_eq!(select_shortest_correct(&set).unwrap().final_answer, "first");
    }

    #[test]
    fn selection_is_optimal_over_correct_rollouts() {
        let set = RolloutSet::new(
            Query::new("q", "question"),
            (0..8)
                .map(|i| trajectory(2 + (i * 3) % 5, 100 + i as u64, "a"))
                .collect(),
            vec![true, false, true, true, false, true, true, true],
        );
        let selected = select_shortest_correct(&set).unwrap();
        for (t, &correct) in set.trajectories.iter().zip(&set.correctness) {
            if correct {
                assert!(selected.history.steps.len() <= t.history.steps.len());
            }
        }
    }
}
