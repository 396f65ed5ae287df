//! Parallel episode execution.
//!
//! Episodes are independent units of work: each gets a fresh policy from the
//! factory, seeded from (global seed, query id), so outcomes are identical
//! for any worker count and any completion order. Results are keyed back to
//! input positions; a failing or panicking episode never aborts the batch.

use crate::config::AgentConfig;
use crate::episode::{run_episode, EpisodeOutcome, Policy, StopReason};
use crate::seed::derive_seed;
use medsearch_core::{token_length, InteractionHistory, Query, TokenCounter, Trajectory};
use medsearch_env::ToolEnvironment;
use std::panic::AssertUnwindSafe;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Creates one policy per episode. The seed is derived from the global seed
/// and the query id; factories must be safe to call from multiple workers.
pub trait PolicyFactory: Sync {
    fn create(&self, query: &Query, seed: u64) -> Box<dyn Policy>;
}

impl<F> PolicyFactory for F
where
    F: Fn(&Query, u64) -> Box<dyn Policy> + Sync,
{
    fn create(&self, query: &Query, seed: u64) -> Box<dyn Policy> {
        self(query, seed)
    }
}

/// Run every query to completion across `workers` threads. The returned
/// outcomes are in input order regardless of scheduling.
pub fn run_parallel(
    factory: &dyn PolicyFactory,
    env: &dyn ToolEnvironment,
    queries: &[Query],
    config: &AgentConfig,
    counter: &dyn TokenCounter,
    workers: usize,
    global_seed: u64,
) -> Vec<EpisodeOutcome> {
    assert!(workers >= 1, "at least one worker required");
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<EpisodeOutcome>>> = Mutex::new(vec![None; queries.len()]);

    std::thread::scope(|scope| {
        for _ in 0..workers.min(queries.len().max(1)) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= queries.len() {
                    break;
                }
                let query = &queries[idx];
                let seed = derive_seed(global_seed, &query.id);
                let outcome = std::panic::catch_unwind(AssertUnwindSafe(|| {
                    let mut policy = factory.create(query, seed);
                    run_episode(policy.as_mut(), env, query, config, counter)
                }))
                .unwrap_or_else(|_| panicked_outcome(query, counter));
                results.lock().expect("results lock")[idx] = Some(outcome);
            });
        }
    });

    results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|o| o.expect("every episode produced an outcome"))
        .collect()
}

fn panicked_outcome(query: &Query, counter: &dyn TokenCounter) -> EpisodeOutcome {
    let history = InteractionHistory::new(query.clone());
    let tokens = token_length(&history, counter);
    EpisodeOutcome {
        trajectory: Trajectory {
            history,
            final_answer: String::new(),
            terminated_normally: false,
            token_length: tokens,
        },
        stop_reason: StopReason::PolicyError,
        tool_calls_used: 0,
        restarts_used: 0,
    }
}
