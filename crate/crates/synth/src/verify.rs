//! Phase-4 verification and benchmark curation: multi-rollout and
//! cross-model verification with infrastructure-failure recovery,
//! entity-level contamination checks, and stratified category balancing.

use crate::harden::CandidateTask;
use medsearch_core::{normalize_answer, AliasTable};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerificationMode {
    MultiRollout,
    CrossModel,
    Recovery,
}

/// One verification run: the candidate answer, whether it matched gold, how
/// many tool failures occurred, and the retained transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationRun {
    pub answer: String,
    pub matched_gold: bool,
    pub tool_failures: u32,
    pub transcript: String,
}

/// Unanimous-or-fail verdict over a set of runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationVerdict {
    pub mode: VerificationMode,
    pub runs: Vec<VerificationRun>,
    pub passed: bool,
}

impl VerificationVerdict {
    fn conclude(mode: VerificationMode, runs: Vec<VerificationRun>) -> Self {
        let passed = !runs.is_empty() && runs.iter().all(|r| r.matched_gold);
        Self { mode, runs, passed }
    }

    /// Runs that failed with infrastructure trouble rather than a wrong
    /// answer; these are routed to recovery instead of counting as failures.
    pub fn deferred_run_indices(&self) -> Vec<usize> {
        self.runs
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.matched_gold && r.tool_failures > 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// True when the verdict is withheld: every mismatching run hit tool
    /// failures, so recovery decides the outcome.
    pub fn is_deferred(&self) -> bool {
        !self.passed
            && !self.deferred_run_indices().is_empty()
            && self
                .runs
                .iter()
                .all(|r| r.matched_gold || r.tool_failures > 0)
    }
}

/// One agent attempt at a question. Tool failures encountered during the
/// attempt are counted, not raised.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentAttempt {
    pub answer: String,
    pub tool_failures: u32,
    pub transcript: String,
}

/// Agentic model contract used for verification runs.
pub trait VerifierAgent: Send {
    fn attempt(&mut self, question: &str) -> AgentAttempt;
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("multi-rollout verification requires n >= 2, got {0}")]
    TooFewRollouts(usize),
    #[error("cross-model verification requires >= 2 agents, got {0}")]
    TooFewModels(usize),
    #[error("balancing targets missing category {0:?}")]
    MissingTarget(BenchCategory),
    #[error("malformed annotation line {0}: {1}")]
    MalformedAnnotation(usize, String),
}

fn run_once(
    agent: &mut dyn VerifierAgent,
    question: &str,
    gold: &str,
    aliases: &AliasTable,
) -> VerificationRun {
    let attempt = agent.attempt(question);
    VerificationRun {
        matched_gold: aliases.matches(&attempt.answer, gold),
        answer: attempt.answer,
        tool_failures: attempt.tool_failures,
        transcript: attempt.transcript,
    }
}

/// N independent reasoning runs by one model; passes only when every run
/// converges on the gold answer.
pub fn multi_rollout_verify(
    task: &CandidateTask,
    agent: &mut dyn VerifierAgent,
    n: usize,
    aliases: &AliasTable,
) -> Result<VerificationVerdict, VerifyError> {
    if n < 2 {
        return Err(VerifyError::TooFewRollouts(n));
    }
    let runs = (0..n)
        .map(|_| run_once(agent, &task.question, &task.answer, aliases))
        .collect();
    Ok(VerificationVerdict::conclude(
        VerificationMode::MultiRollout,
        runs,
    ))
}

/// Heterogeneous models verify independently; passes only when all reach the
/// gold answer. Mutual agreement on a wrong answer still fails.
pub fn cross_model_verify(
    task: &CandidateTask,
    agents: &mut [&mut dyn VerifierAgent],
    aliases: &AliasTable,
) -> Result<VerificationVerdict, VerifyError> {
    if agents.len() < 2 {
        return Err(VerifyError::TooFewModels(agents.len()));
    }
    let runs = agents
        .iter_mut()
        .map(|agent| run_once(*agent, &task.question, &task.answer, aliases))
        .collect();
    Ok(VerificationVerdict::conclude(
        VerificationMode::CrossModel,
        runs,
    ))
}

/// Re-execute the deferred (infrastructure-failed) runs up to `retry_budget`
/// attempts each. Successes merge back into the verdict; runs still failing
/// count as verification failures. Tool-failure counts accumulate.
pub fn recover(
    verdict: &VerificationVerdict,
    task: &CandidateTask,
    agent: &mut dyn VerifierAgent,
    retry_budget: u32,
    aliases: &AliasTable,
) -> VerificationVerdict {
    let mut runs = verdict.runs.clone();
    for idx in verdict.deferred_run_indices() {
        let mut accumulated_failures = runs[idx].tool_failures;
        for _ in 0..retry_budget {
            let retry = run_once(agent, &task.question, &task.answer, aliases);
            accumulated_failures += retry.tool_failures;
            if retry.matched_gold {
                runs[idx] = VerificationRun {
                    tool_failures: accumulated_failures,
                    ..retry
                };
                break;
            }
            if retry.tool_failures == 0 {
                // A clean wrong answer: a real failure, stop retrying.
                runs[idx] = VerificationRun {
                    tool_failures: accumulated_failures,
                    ..retry
                };
                break;
            }
            runs[idx].tool_failures = accumulated_failures;
        }
    }
    VerificationVerdict::conclude(verdict.mode, runs)
}

/// The closed six-category taxonomy benchmark items are classified into.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Hash,
)]
#[serde(rename_all = "snake_case")]
pub enum BenchCategory {
    BiomedicalFundamentals,
    DrugsAndMedicalProducts,
    MedicalResearchAndKnowledge,
    DiseasesAndClinicalManifestations,
    ClinicalProcedures,
    MedicalInstitutions,
}

impl BenchCategory {
    pub const ALL: [BenchCategory; 6] = [
        BenchCategory::BiomedicalFundamentals,
        BenchCategory::DrugsAndMedicalProducts,
        BenchCategory::MedicalResearchAndKnowledge,
        BenchCategory::DiseasesAndClinicalManifestations,
        BenchCategory::ClinicalProcedures,
        BenchCategory::MedicalInstitutions,
    ];
}

/// Imported expert review flags; human review happens outside the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertAnnotation {
    pub clarity: bool,
    pub difficulty: bool,
    pub uniqueness: bool,
}

/// One curated benchmark entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkItem {
    pub task: CandidateTask,
    pub category: BenchCategory,
    pub key_entities: BTreeSet<String>,
    pub expert_flags: ExpertAnnotation,
}

/// One contaminated item and the entities it shares with the training set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContaminationHit {
    pub item_index: usize,
    pub task_id: String,
    pub overlapping: Vec<String>,
}

/// Entity-level contamination check: flags every benchmark item sharing at
/// least one key entity with the training entity set. Comparison is over
/// normalized names on both sides; an empty result certifies isolation.
pub fn check_contamination(
    bench: &[BenchmarkItem],
    training_entities: &BTreeSet<String>,
) -> Vec<ContaminationHit> {
    let normalized_training: BTreeSet<String> = training_entities
        .iter()
        .map(|e| normalize_answer(e))
        .collect();
    let mut hits = Vec::new();
    for (index, item) in bench.iter().enumerate() {
        let overlapping: Vec<String> = item
            .key_entities
            .iter()
            .filter(|e| normalized_training.contains(&normalize_answer(e)))
            .cloned()
            .collect();
        if !overlapping.is_empty() {
            hits.push(ContaminationHit {
                item_index: index,
                task_id: item.task.id.clone(),
                overlapping,
            });
        }
    }
    hits
}

/// Categories that could not be filled to target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryDeficit {
    pub category: BenchCategory,
    pub missing: usize,
}

/// Stratified balancing: over-represented categories are down-sampled with
/// the seeded RNG, under-represented ones are topped up from the synthesized
/// pool. Shortfalls are reported, never fatal. Re-running with the same seed
/// reproduces the exact selection.
pub fn stratified_balance<R: Rng>(
    items: Vec<BenchmarkItem>,
    targets: &BTreeMap<BenchCategory, usize>,
    synth_pool: Vec<BenchmarkItem>,
    rng: &mut R,
) -> Result<(Vec<BenchmarkItem>, Vec<CategoryDeficit>), VerifyError> {
    for category in BenchCategory::ALL {
        if !targets.contains_key(&category) {
            return Err(VerifyError::MissingTarget(category));
        }
    }
    let mut by_category: BTreeMap<BenchCategory, Vec<BenchmarkItem>> = BTreeMap::new();
    for item in items {
        by_category.entry(item.category).or_default().push(item);
    }
    let mut pool_by_category: BTreeMap<BenchCategory, Vec<BenchmarkItem>> = BTreeMap::new();
    for item in synth_pool {
        pool_by_category.entry(item.category).or_default().push(item);
    }

    let mut selected = Vec::new();
    let mut deficits = Vec::new();
    for category in BenchCategory::ALL {
        let target = targets[&category];
        let mut members = by_category.remove(&category).unwrap_or_default();
        members.sort_by(|a, b| a.task.id.cmp(&b.task.id));
        if members.len() > target {
            members.shuffle(rng);
            members.truncate(target);
            members.sort_by(|a, b| a.task.id.cmp(&b.task.id));
            selected.extend(members);
            continue;
        }
        let mut need = target - members.len();
        selected.extend(members);
        if need > 0 {
            let mut pool = pool_by_category.remove(&category).unwrap_or_default();
            pool.sort_by(|a, b| a.task.id.cmp(&b.task.id));
            let take = need.min(pool.len());
            selected.extend(pool.into_iter().take(take));
            need -= take;
        }
        if need > 0 {
            deficits.push(CategoryDeficit {
                category,
                missing: need,
            });
        }
    }
    Ok((selected, deficits))
}

#[derive(Deserialize)]
struct AnnotationLine {
    task_id: String,
    clarity: bool,
    difficulty: bool,
    uniqueness: bool,
}

/// Import expert annotations: one JSON record per line with
/// task_id/clarity/difficulty/uniqueness fields.
pub fn import_annotations(
    input: &mut dyn BufRead,
) -> Result<BTreeMap<String, ExpertAnnotation>, VerifyError> {
    let mut out = BTreeMap::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| VerifyError::MalformedAnnotation(idx + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: AnnotationLine = serde_json::from_str(&line)
            .map_err(|e| VerifyError::MalformedAnnotation(idx + 1, e.to_string()))?;
        out.insert(
            parsed.task_id,
            ExpertAnnotation {
                clarity: parsed.clarity,
                difficulty: parsed.difficulty,
                uniqueness: parsed.uniqueness,
            },
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harden::{CandidateTask, TaskStatus};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn task(id: &str, answer: &str) -> CandidateTask {
        CandidateTask {
            id: id.into(),
            question: format!("question for {id}"),
            answer: answer.into(),
            hop_count: 11,
            seed_hops: 4,
            fact_log: vec![],
            status: TaskStatus::Accepted,
            check_verdicts: vec![],
            obfuscation_log: vec![],
            checklist_history: vec![],
            key_entities: BTreeSet::from([answer.to_string()]),
        }
    }

    /// Scripted agent: plays a fixed sequence of (answer, tool_failures).
    struct ScriptedAgent {
        script: Vec<(String, u32)>,
        cursor: usize,
    }

    impl ScriptedAgent {
        fn new(script: Vec<(&str, u32)>) -> Self {
            Self {
                script: script
                    .into_iter()
                    .map(|(a, f)| (a.to_string(), f))
                    .collect(),
                cursor: 0,
            }
        }
    }

    impl VerifierAgent for ScriptedAgent {
        fn attempt(&mut self, _question: &str) -> AgentAttempt {
            let (answer, failures) = self
                .script
                .get(self.cursor)
                .cloned()
                .unwrap_or(("exhausted".to_string(), 0));
            self.cursor += 1;
            AgentAttempt {
                answer,
                tool_failures: failures,
                transcript: format!("attempt {}", self.cursor),
            }
        }
    }

    #[test]
    fn three_gold_rollouts_pass() {
        let t = task("t1", "gold");
        let mut agent = ScriptedAgent::new(vec![("gold", 0), ("Gold.", 0), ("gold", 0)]);
        let verdict = multi_rollout_verify(&t, &mut agent, 3, &AliasTable::new()).unwrap();
        assert!(verdict.passed);
        assert_eq!(verdict.runs.len(), 3);
    }

    #[test]
    fn one_wrong_rollout_fails() {
        let t = task("t1", "gold");
        let mut agent = ScriptedAgent::new(vec![("gold", 0), ("wrong", 0), ("gold", 0)]);
        let verdict = multi_rollout_verify(&t, &mut agent, 3, &AliasTable::new()).unwrap();
        assert!(!verdict.passed);
        assert!(!verdict.is_deferred());
    }

    #[test]
    fn network_failed_run_defers_the_verdict() {
        let t = task("t1", "gold");
        let mut agent = ScriptedAgent::new(vec![("gold", 0), ("", 1), ("gold", 0)]);
        let verdict = multi_rollout_verify(&t, &mut agent, 3, &AliasTable::new()).unwrap();
        assert!(!verdict.passed);
        assert!(verdict.is_deferred());
        assert_eq!(verdict.deferred_run_indices(), vec![1]);
    }

    #[test]
    fn cross_model_agreement_on_wrong_answer_still_fails() {
        let t = task("t1", "gold");
        let mut a = ScriptedAgent::new(vec![("consensus but wrong", 0)]);
        let mut b = ScriptedAgent::new(vec![("consensus but wrong", 0)]);
        let mut agents: Vec<&mut dyn VerifierAgent> = vec![&mut a, &mut b];
        let verdict = cross_model_verify(&t, &mut agents, &AliasTable::new()).unwrap();
        assert!(!verdict.passed);
    }

    #[test]
    fn cross_model_pass_needs_every_model() {
        let t = task("t1", "gold");
        let mut a = ScriptedAgent::new(vec![("gold", 0)]);
        let mut b = ScriptedAgent::new(vec![("gold", 0)]);
        let mut agents: Vec<&mut dyn VerifierAgent> = vec![&mut a, &mut b];
        let verdict = cross_model_verify(&t, &mut agents, &AliasTable::new()).unwrap();
        assert!(verdict.passed);
        let mut c = ScriptedAgent::new(vec![("gold", 0)]);
        let err = cross_model_verify(&t, &mut [&mut c as &mut dyn VerifierAgent], &AliasTable::new())
            .unwrap_err();
        assert_eq!(err, VerifyError::TooFewModels(1));
    }

    #[test]
    fn recovery_flips_a_deferred_run() {
        let t = task("t1", "gold");
        let mut agent = ScriptedAgent::new(vec![("gold", 0), ("", 1), ("gold", 0)]);
        let verdict = multi_rollout_verify(&t, &mut agent, 3, &AliasTable::new()).unwrap();
        assert!(verdict.is_deferred());
        let mut retry_agent = ScriptedAgent::new(vec![("gold", 0)]);
        let recovered = recover(&verdict, &t, &mut retry_agent, 2, &AliasTable::new());
        assert!(recovered.passed);
        // The original failure count is preserved in the merged run.
        assert_eq!(recovered.runs[1].tool_failures, 1);
    }

    #[test]
    fn zero_retry_budget_counts_deferred_as_failure() {
        let t = task("t1", "gold");
        let mut agent = ScriptedAgent::new(vec![("gold", 0), ("", 1), ("gold", 0)]);
        let verdict = multi_rollout_verify(&t, &mut agent, 3, &AliasTable::new()).unwrap();
        let mut retry_agent = ScriptedAgent::new(vec![]);
        let recovered = recover(&verdict, &t, &mut retry_agent, 0, &AliasTable::new());
        assert!(!recovered.passed);
    }

    #[test]
    fn repeated_network_failure_accumulates() {
        let t = task("t1", "gold");
        let mut agent = ScriptedAgent::new(vec![("gold", 0), ("", 1)]);
        let verdict = multi_rollout_verify(&t, &mut agent, 2, &AliasTable::new()).unwrap();
        let mut retry_agent = ScriptedAgent::new(vec![("", 1)]);
        let recovered = recover(&verdict, &t, &mut retry_agent, 1, &AliasTable::new());
        assert!(!recovered.passed);
        assert_eq!(recovered.runs[1].tool_failures, 2);
    }

    fn bench_item(id: &str, category: BenchCategory, entities: &[&str]) -> BenchmarkItem {
        BenchmarkItem {
            task: task(id, "answer"),
            category,
            key_entities: entities.iter().map(|e| e.to_string()).collect(),
            expert_flags: ExpertAnnotation {
                clarity: true,
                difficulty: true,
                uniqueness: true,
            },
        }
    }

    #[test]
    fn disjoint_sets_are_clean() {
        let bench = vec![bench_item(
            "b1",
            BenchCategory::BiomedicalFundamentals,
            &["erythropoietin"],
        )];
        let training = BTreeSet::from(["aspirin".to_string()]);
        assert!(check_contamination(&bench, &training).is_empty());
        assert!(check_contamination(&bench, &BTreeSet::new()).is_empty());
    }

    #[test]
    fn shared_entity_is_flagged_with_its_name() {
        let bench = vec![
            bench_item("b1", BenchCategory::BiomedicalFundamentals, &["XPF"]),
            bench_item("b2", BenchCategory::ClinicalProcedures, &["biopsy"]),
        ];
        let training = BTreeSet::from(["xpf.".to_string()]);
        let hits = check_contamination(&bench, &training);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].task_id, "b1");
        assert_eq!(hits[0].overlapping, vec!["XPF".to_string()]);
    }

    #[test]
    fn contamination_matches_nested_loop_oracle() {
        let entities = ["alpha", "beta", "gamma", "delta", "epsilon"];
        let bench: Vec<BenchmarkItem> = (0..20)
            .map(|i| {
                bench_item(
                    &format!("b{i:02}"),
                    BenchCategory::ALL[i % 6],
                    &[entities[i % 5], entities[(i + 2) % 5]],
                )
            })
            .collect();
        let training: BTreeSet<String> = (0..100)
            .map(|i| {
                if i % 10 == 0 {
                    entities[i % 5].to_string()
                } else {
                    format!("irrelevant-{i}")
                }
            })
            .collect();

        // Oracle: brute-force pairwise scan.
        let mut expected = Vec::new();
        for (index, item) in bench.iter().enumerate() {
            let mut overlapping = Vec::new();
            for entity in &item.key_entities {
                for train in &training {
                    if normalize_answer(entity) == normalize_answer(train)
                        && !overlapping.contains(entity)
                    {
                        overlapping.push(entity.clone());
                    }
                }
            }
            if !overlapping.is_empty() {
                expected.push((index, overlapping));
            }
        }
        let hits = check_contamination(&bench, &training);
        assert_eq!(hits.len(), expected.len());
        for (hit, (index, overlapping)) in hits.iter().zip(&expected) {
            assert_eq!(hit.item_index, *index);
            assert_eq!(&hit.overlapping, overlapping);
        }
    }

    fn full_targets(n: usize) -> BTreeMap<BenchCategory, usize> {
        BenchCategory::ALL.iter().map(|&c| (c, n)).collect()
    }

    #[test]
    fn oversized_category_downsamples_reproducibly() {
        let items: Vec<BenchmarkItem> = (0..10)
            .map(|i| {
                bench_item(
                    &format!("b{i:02}"),
                    BenchCategory::ClinicalProcedures,
                    &["e"],
                )
            })
            .collect();
        let targets = full_targets(5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (selected, _) =
            stratified_balance(items.clone(), &targets, vec![], &mut rng).unwrap();
        assert_eq!(selected.len(), 5);
        let mut rng2 = ChaCha8Rng::seed_from_u64(11);
        let (selected2, _) = stratified_balance(items, &targets, vec![], &mut rng2).unwrap();
        assert_eq!(selected, selected2);
    }

    #[test]
    fn undersized_category_tops_up_from_pool() {
        let items = vec![
            bench_item("b1", BenchCategory::MedicalInstitutions, &["e"]),
            bench_item("b2", BenchCategory::MedicalInstitutions, &["e"]),
        ];
        let pool: Vec<BenchmarkItem> = (0..3)
            .map(|i| bench_item(&format!("p{i}"), BenchCategory::MedicalInstitutions, &["e"]))
            .collect();
        let mut targets = full_targets(0);
        targets.insert(BenchCategory::MedicalInstitutions, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (selected, deficits) = stratified_balance(items, &targets, pool, &mut rng).unwrap();
        assert_eq!(selected.len(), 5);
        assert!(deficits.is_empty());
    }

    #[test]
    fn pool_shortfall_is_reported() {
        let items = vec![bench_item("b1", BenchCategory::MedicalInstitutions, &["e"])];
        let pool = vec![bench_item(
            "p1",
            BenchCategory::MedicalInstitutions,
            &["e"],
        )];
        let mut targets = full_targets(0);
        targets.insert(BenchCategory::MedicalInstitutions, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (selected, deficits) = stratified_balance(items, &targets, pool, &mut rng).unwrap();
        assert_eq!(selected.len(), 2);
        assert_eq!(
            deficits,
            vec![CategoryDeficit {
                category: BenchCategory::MedicalInstitutions,
                missing: 3
            }]
        );
    }
}
