//! Difficulty filtering for RL dataset construction.
//!
//! Tasks that are always solved or never solved saturate or starve the
//! group-normalized reward signal, so only tasks strictly inside the band
//! are kept. Pass rates are computed upstream as the correct fraction over k
//! probe rollouts.

/// Keep the task ids whose pass rate lies strictly inside `(lo, hi)`.
/// Input order is preserved.
pub fn difficulty_filter<'a, I>(pass_rates: I, lo: f64, hi: f64) -> Vec<String>
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    assert!(
        (0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo < hi,
        "difficulty bounds must satisfy 0 <= lo < hi <= 1"
    );
    pass_rates
        .into_iter()
        .filter(|&(_, rate)| rate > lo && rate < hi)
        .map(|(id, _)| id.to_string())
        .collect()
}
