//! Task hardening: multi-hop real-fact introduction gated by the no-tool
//! answerability check, typed entity obfuscation, and the multi-round
//! checklist refinement loop.

use crate::seed::SeedQA;
use medsearch_env::{llm_check, AnswerModel, CheckJudge, CheckVerdict, ToolEnvironment, ToolError};
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Deepening,
    Accepted,
}

/// One retrieved fact bound into the question, with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactRecord {
    pub fact: String,
    /// Entity the fact is about; feeds key-entity bookkeeping.
    pub entity: String,
    pub source_doc_id: String,
    pub tool: String,
}

/// One applied substitution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObfuscationEvent {
    pub literal: String,
    pub class: EntityClass,
    pub replacement: String,
    pub background_queries: Vec<String>,
    /// 0 for the initial obfuscation pass; checklist re-obfuscations carry
    /// their round index.
    pub round: u32,
}

/// One checklist round: pass/fail along the four review dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChecklistReport {
    pub naturalness: bool,
    pub coverage: bool,
    pub difficulty: bool,
    pub uniqueness: bool,
    pub round: u32,
}

impl ChecklistReport {
    pub fn all_pass(&self) -> bool {
        self.naturalness && self.coverage && self.difficulty && self.uniqueness
    }
}

/// A task moving through hardening. Everything needed for audit rides along:
/// the fact log, every answerability verdict, the substitution map, and the
/// full checklist history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateTask {
    pub id: String,
    pub question: String,
    pub answer: String,
    pub hop_count: u32,
    pub seed_hops: u32,
    pub fact_log: Vec<FactRecord>,
    pub status: TaskStatus,
    pub check_verdicts: Vec<CheckVerdict>,
    pub obfuscation_log: Vec<ObfuscationEvent>,
    pub checklist_history: Vec<ChecklistReport>,
    pub key_entities: BTreeSet<String>,
}

impl CandidateTask {
    /// Start from a seed: hop count equals the subgraph depth, key entities
    /// are the path entities plus the answer.
    pub fn from_seed(id: impl Into<String>, seed: &SeedQA) -> Self {
        let mut key_entities: BTreeSet<String> = seed
            .source_subgraph
            .path
            .iter()
            .flat_map(|r| [r.head.clone(), r.tail.clone()])
            .collect();
        key_entities.insert(seed.answer.clone());
        Self {
            id: id.into(),
            question: seed.question.clone(),
            answer: seed.answer.clone(),
            hop_count: seed.source_subgraph.depth as u32,
            seed_hops: seed.source_subgraph.depth as u32,
            fact_log: Vec::new(),
            status: TaskStatus::Deepening,
            check_verdicts: Vec::new(),
            obfuscation_log: Vec::new(),
            checklist_history: Vec::new(),
            key_entities,
        }
    }
}

#[derive(Debug, Error)]
pub enum HardenError {
    #[error("expansion exhausted after {0} iterations without acceptance")]
    ExpansionExhausted(u32),
    #[error("checklist exhausted after {0} rounds")]
    ChecklistExhausted(u32),
    #[error("task {0} is not accepted; obfuscation requires an accepted task")]
    NotAccepted(String),
    #[error("substitution for '{literal}' still contains the literal")]
    SubstitutionLeak { literal: String },
    #[error(transparent)]
    Tool(#[from] ToolError),
}

/// One deepening cycle's output: the new question and the fact it binds.
#[derive(Debug, Clone)]
pub struct DeepeningProposal {
    pub question: String,
    pub fact: FactRecord,
}

/// Model contract driving fact introduction. One call gathers facts through
/// the environment's tools and proposes a deepened question binding exactly
/// one new fact; the hop count advances once per accepted cycle.
pub trait Explorer: Send {
    fn deepen(
        &mut self,
        task: &CandidateTask,
        env: &dyn ToolEnvironment,
    ) -> Result<DeepeningProposal, ToolError>;
}

/// Bounds for the expansion loop.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExpandLimits {
    pub max_iterations: u32,
    /// A candidate passes the challenge gate only when this many consecutive
    /// answerability checks all fail (k-of-n with k = n).
    pub gate_checks: u32,
    /// Minimum reasoning hops for acceptance.
    pub min_hops: u32,
}

impl Default for ExpandLimits {
    fn default() -> Self {
        Self {
            max_iterations: 16,
            gate_checks: 3,
            min_hops: 11,
        }
    }
}

/// Phase-2 expansion: deepen hop by hop with real retrieved facts until the
/// question stops being answerable from parametric memory and the hop count
/// clears the threshold.
pub fn expand_multihop(
    seed: &SeedQA,
    task_id: impl Into<String>,
    env: &dyn ToolEnvironment,
    explorer: &mut dyn Explorer,
    answerer: &dyn AnswerModel,
    judge: &dyn CheckJudge,
    limits: ExpandLimits,
) -> Result<CandidateTask, HardenError> {
    let mut task = CandidateTask::from_seed(task_id, seed);
    for _ in 0..limits.max_iterations {
        let proposal = explorer.deepen(&task, env)?;
        task.question = proposal.question;
        task.key_entities.insert(proposal.fact.entity.clone());
        task.fact_log.push(proposal.fact);
        task.hop_count += 1;

        let record = llm_check(&task.question, &task.answer, answerer, judge)?;
        let answerable = record.verdict.answerable_from_memory;
        task.check_verdicts.push(record.verdict);
        if answerable {
            continue;
        }
        // The first check failed; require the remaining gate checks to fail
        // too before accepting.
        let mut all_fail = true;
        for _ in 1..limits.gate_checks {
            let repeat = llm_check(&task.question, &task.answer, answerer, judge)?;
            let answerable = repeat.verdict.answerable_from_memory;
            task.check_verdicts.push(repeat.verdict);
            if answerable {
                all_fail = false;
                break;
            }
        }
        if all_fail && task.hop_count >= limits.min_hops {
            task.status = TaskStatus::Accepted;
            return Ok(task);
        }
    }
    Err(HardenError::ExpansionExhausted(limits.max_iterations))
}

/// Entity classes with differentiated obfuscation strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityClass {
    Temporal,
    Location,
    Person,
    MedicalTerm,
    Numeric,
}

/// Class-specific rewrite: produce an indirect description of the literal.
/// The replacement must not contain the literal.
pub trait RewriteTransform: Send + Sync {
    fn rewrite(&self, literal: &str, background: &str) -> Result<String, ToolError>;
}

/// One active rule per entity class.
pub struct ObfuscationRuleSet {
    rules: BTreeMap<EntityClass, Box<dyn RewriteTransform>>,
}

impl ObfuscationRuleSet {
    pub fn new() -> Self {
        Self {
            rules: BTreeMap::new(),
        }
    }

    /// Installing a rule for a class replaces any previous rule for it.
    pub fn set(mut self, class: EntityClass, transform: Box<dyn RewriteTransform>) -> Self {
        self.rules.insert(class, transform);
        self
    }

    pub fn get(&self, class: EntityClass) -> Option<&dyn RewriteTransform> {
        self.rules.get(&class).map(|b| b.as_ref())
    }
}

impl Default for ObfuscationRuleSet {
    fn default() -> Self {
        Self::new()
    }
}

/// An entity occurrence flagged for substitution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectedEntity {
    pub literal: String,
    pub class: EntityClass,
}

/// Detection contract. Implementations are model-backed in production;
/// [`regex_fallback_detect`] covers temporal and numeric literals without a
/// model.
pub trait EntityDetector: Send + Sync {
    fn detect(&self, question: &str) -> Result<Vec<DetectedEntity>, ToolError>;
}

static YEAR_RE: OnceLock<Regex> = OnceLock::new();
static NUMBER_RE: OnceLock<Regex> = OnceLock::new();

/// Regex fallback: four-digit years (1800–2099) as temporal entities, other
/// numerals as numeric ones.
pub fn regex_fallback_detect(question: &str) -> Vec<DetectedEntity> {
    let year_re = YEAR_RE.get_or_init(|| Regex::new(r"\b(1[89]\d{2}|20\d{2})\b").expect("valid"));
    let number_re =
        NUMBER_RE.get_or_init(|| Regex::new(r"\b\d+(?:\.\d+)?\b").expect("valid"));
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for m in year_re.find_iter(question) {
        if seen.insert(m.as_str().to_string()) {
            out.push(DetectedEntity {
                literal: m.as_str().to_string(),
                class: EntityClass::Temporal,
            });
        }
    }
    for m in number_re.find_iter(question) {
        if seen.insert(m.as_str().to_string()) {
            out.push(DetectedEntity {
                literal: m.as_str().to_string(),
                class: EntityClass::Numeric,
            });
        }
    }
    out
}

/// Everything obfuscation needs besides the task: the rule set, the tool
/// environment for background collection, and the detector.
pub struct ObfuscationContext<'a> {
    pub rules: &'a ObfuscationRuleSet,
    pub env: &'a dyn ToolEnvironment,
    pub detector: &'a dyn EntityDetector,
}

fn apply_substitutions(
    question: &str,
    detections: &[DetectedEntity],
    ctx: &ObfuscationContext<'_>,
    round: u32,
    log: &mut Vec<ObfuscationEvent>,
) -> Result<String, HardenError> {
    // Longest literal first so nested literals ("51" inside "2051") cannot
    // partially rewrite one another.
    let mut ordered: Vec<&DetectedEntity> = detections.iter().collect();
    ordered.sort_by(|a, b| {
        b.literal
            .len()
            .cmp(&a.literal.len())
            .then_with(|| a.literal.cmp(&b.literal))
    });
    let mut question = question.to_string();
    for detection in ordered {
        if !question.contains(&detection.literal) {
            continue;
        }
        let Some(rule) = ctx.rules.get(detection.class) else {
            continue;
        };
        // Collect background knowledge before substituting.
        let background_query = detection.literal.clone();
        let background = ctx
            .env
            .search(&background_query, 3)?
            .iter()
            .map(|r| r.snippet.clone())
            .collect::<Vec<_>>()
            .join(" ");
        let replacement = rule.rewrite(&detection.literal, &background)?;
        if replacement.contains(&detection.literal) {
            return Err(HardenError::SubstitutionLeak {
                literal: detection.literal.clone(),
            });
        }
        question = question.replace(&detection.literal, &replacement);
        log.push(ObfuscationEvent {
            literal: detection.literal.clone(),
            class: detection.class,
            replacement,
            background_queries: vec![background_query],
            round,
        });
    }
    Ok(question)
}

/// Phase-3 obfuscation: detect entities, collect background knowledge
/// through the search tools, and rewrite each literal per its class rule.
/// The answer field is never touched.
pub fn obfuscate(
    task: &CandidateTask,
    ctx: &ObfuscationContext<'_>,
) -> Result<CandidateTask, HardenError> {
    if task.status != TaskStatus::Accepted {
        return Err(HardenError::NotAccepted(task.id.clone()));
    }
    let mut detections = ctx.detector.detect(&task.question)?;
    let detected_literals: BTreeSet<String> =
        detections.iter().map(|d| d.literal.clone()).collect();
    for fallback in regex_fallback_detect(&task.question) {
        if !detected_literals.contains(&fallback.literal) {
            detections.push(fallback);
        }
    }
    let mut out = task.clone();
    if detections.is_empty() {
        return Ok(out);
    }
    out.question = apply_substitutions(
        &task.question,
        &detections,
        ctx,
        0,
        &mut out.obfuscation_log,
    )?;
    Ok(out)
}

/// Review outcome for one round, including the spans a failed coverage check
/// flags for re-obfuscation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChecklistReview {
    pub naturalness: bool,
    pub coverage: bool,
    pub difficulty: bool,
    pub uniqueness: bool,
    pub flagged_spans: Vec<String>,
}

/// Judgment contract for the four-dimension review.
pub trait ChecklistReviewer: Send {
    fn review(&mut self, task: &CandidateTask, round: u32) -> Result<ChecklistReview, ToolError>;
}

/// Phase-3 refinement loop: review along the four dimensions each round,
/// re-obfuscate flagged spans on coverage failures, and exit only when all
/// four pass and at least `min_rounds` rounds have run. The full round
/// history stays on the task.
pub fn checklist_iterate(
    task: &CandidateTask,
    reviewer: &mut dyn ChecklistReviewer,
    ctx: &ObfuscationContext<'_>,
    min_rounds: u32,
    max_rounds: u32,
) -> Result<CandidateTask, HardenError> {
    assert!(min_rounds >= 1 && min_rounds <= max_rounds);
    let mut task = task.clone();
    for round in 1..=max_rounds {
        let review = reviewer.review(&task, round)?;
        task.checklist_history.push(ChecklistReport {
            naturalness: review.naturalness,
            coverage: review.coverage,
            difficulty: review.difficulty,
            uniqueness: review.uniqueness,
            round,
        });
        if !review.coverage {
            for span in &review.flagged_spans {
                let mut detections = ctx.detector.detect(span)?;
                let seen: BTreeSet<String> =
                    detections.iter().map(|d| d.literal.clone()).collect();
                for fallback in regex_fallback_detect(span) {
                    if !seen.contains(&fallback.literal) {
                        detections.push(fallback);
                    }
                }
                task.question = apply_substitutions(
                    &task.question,
                    &detections,
                    ctx,
                    round,
                    &mut task.obfuscation_log,
                )?;
            }
        }
        let last = task.checklist_history.last().expect("just pushed");
        if last.all_pass() && round >= min_rounds {
            return Ok(task);
        }
    }
    Err(HardenError::ChecklistExhausted(max_rounds))
}
