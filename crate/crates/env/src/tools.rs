//! The four tools and the environment contract agents run against.
//!
//! Search and visit execute through [`ToolEnvironment`] during episodes;
//! medical professional search and the no-tool answerability check are
//! additionally exposed directly for the synthesis pipeline, which calls
//! them outside the episode action space.

use crate::error::ToolError;
use crate::index::{MedicalSearchWeights, SearchIndex, SearchResult};
use medsearch_core::ToolAction;
use serde::{Deserialize, Serialize};

/// Summarization contract applied to visited page bodies.
pub trait Summarizer: Send + Sync {
    fn summarize(&self, body: &str, goal: &str) -> String;
}

/// Default summarizer: deterministic head truncation to a configured number
/// of characters. Idempotent and length-bounded.
#[derive(Debug, Clone, Copy)]
pub struct HeadTruncation {
    pub max_chars: usize,
}

impl Default for HeadTruncation {
    fn default() -> Self {
        Self { max_chars: 2000 }
    }
}

impl Summarizer for HeadTruncation {
    fn summarize(&self, body: &str, _goal: &str) -> String {
        body.chars().take(self.max_chars).collect()
    }
}

/// Passes the body through unchanged. Test fixture.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentitySummarizer;

impl Summarizer for IdentitySummarizer {
    fn summarize(&self, body: &str, _goal: &str) -> String {
        body.to_string()
    }
}

/// Verdict of the no-tool answerability check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckVerdict {
    pub answerable_from_memory: bool,
    pub resolved_entities: Vec<String>,
    pub judge_rationale: String,
}

/// A verdict together with the raw answerer outputs, kept for audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub verdict: CheckVerdict,
    pub answerer_reasoning: String,
    pub answerer_answer: String,
}

/// Reasoning trace and final answer of a no-tool model response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelAnswer {
    pub reasoning: String,
    pub answer: String,
}

/// Model contract: answer a question without any tool calls.
pub trait AnswerModel: Send + Sync {
    fn answer_without_tools(&self, question: &str) -> Result<ModelAnswer, ToolError>;
}

/// Judgment contract: decide whether the key entities were resolved from
/// memory, given the question, the reference answer, and the raw response.
pub trait CheckJudge: Send + Sync {
    fn judge(
        &self,
        question: &str,
        gold: &str,
        reasoning: &str,
        answer: &str,
    ) -> Result<CheckVerdict, ToolError>;
}

/// Probe whether a question is answerable from parametric memory alone.
///
/// The answerer responds with no tools; the judge sees the question, the
/// reference answer, and both raw outputs, and returns the verdict. The raw
/// outputs are retained in the returned record. A verdict claiming memory
/// answerability without any resolved entity is inconsistent and rejected.
pub fn llm_check(
    question: &str,
    gold: &str,
    answerer: &dyn AnswerModel,
    judge: &dyn CheckJudge,
) -> Result<CheckRecord, ToolError> {
    let response = answerer.answer_without_tools(question)?;
    let verdict = judge.judge(question, gold, &response.reasoning, &response.answer)?;
    if verdict.answerable_from_memory && verdict.resolved_entities.is_empty() {
        return Err(ToolError::parse(
            "check judge claimed memory answerability without resolved entities",
        ));
    }
    Ok(CheckRecord {
        verdict,
        answerer_reasoning: response.reasoning,
        answerer_answer: response.answer,
    })
}

/// The environment an episode executes its actions against. Implementations
/// must be safe for concurrent calls.
pub trait ToolEnvironment: Send + Sync {
    /// Execute a non-answer action and return the observation text.
    fn execute(&self, action: &ToolAction) -> Result<String, ToolError>;

    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchResult>, ToolError>;

    fn medical_search(&self, query: &str, k: usize) -> Result<Vec<SearchResult>, ToolError>;

    fn visit(&self, target: &str, goal: &str) -> Result<String, ToolError>;
}

/// Render ranked results as a deterministic observation block.
pub fn format_results(query: &str, results: &[SearchResult]) -> String {
    let mut out = format!("Results for \"{query}\":");
    if results.is_empty() {
        out.push_str("\n(no matches)");
    }
    for r in results {
        out.push_str(&format!("\n{}. [{}] {}", r.rank, r.doc_id, r.snippet));
    }
    out
}

/// Offline environment over the local index. Deterministic: the same index
/// and query always produce the same observation bytes.
pub struct OfflineEnvironment {
    index: SearchIndex,
    summarizer: Box<dyn Summarizer>,
    top_k: usize,
    weights: MedicalSearchWeights,
}

impl OfflineEnvironment {
    pub fn new(index: SearchIndex) -> Self {
        Self {
            index,
            summarizer: Box::new(HeadTruncation::default()),
            top_k: 5,
            weights: MedicalSearchWeights::default(),
        }
    }

    pub fn with_summarizer(mut self, summarizer: Box<dyn Summarizer>) -> Self {
        self.summarizer = summarizer;
        self
    }

    pub fn with_top_k(mut self, k: usize) -> Self {
        self.top_k = k;
        self
    }

    pub fn with_weights(mut self, weights: MedicalSearchWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn index(&self) -> &SearchIndex {
        &self.index
    }
}

impl ToolEnvironment for OfflineEnvironment {
    fn execute(&self, action: &ToolAction) -> Result<String, ToolError> {
        match action {
            ToolAction::Search { queries } => {
                let blocks: Vec<String> = queries
                    .iter()
                    .map(|q| format_results(q, &self.index.search(q, self.top_k)))
                    .collect();
                Ok(blocks.join("\n\n"))
            }
            ToolAction::Visit { targets, goal } => {
                let mut blocks = Vec::new();
                for target in targets {
                    blocks.push(format!("[{target}]\n{}", self.visit(target, goal)?));
                }
                Ok(blocks.join("\n\n"))
            }
            ToolAction::Answer { .. } => Err(ToolError::parse(
                "answer actions terminate the episode and are not executed as tools",
            )),
        }
    }

    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchResult>, ToolError> {
        Ok(self.index.search(query, k))
    }

    fn medical_search(&self, query: &str, k: usize) -> Result<Vec<SearchResult>, ToolError> {
        Ok(self.index.medical_search(query, k, self.weights))
    }

    fn visit(&self, target: &str, goal: &str) -> Result<String, ToolError> {
        let doc = self
            .index
            .document(target)
            .ok_or_else(|| ToolError::not_found(format!("no document with id {target}")))?;
        Ok(self.summarizer.summarize(&doc.body, goal))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::{Document, SourceTag};
    use crate::index::build_index;
    use chrono::NaiveDate;

    fn small_env() -> OfflineEnvironment {
        let corpus = vec![Document {
            id: "d1".into(),
            title: "alpha".into(),
            body: "alpha body text with enough words".into(),
            source_tag: SourceTag::Medical,
            authority_score: 0.8,
            timestamp: NaiveDate::from_ymd_opt(2024, 5, 1).unwrap(),
        }];
        OfflineEnvironment::new(build_index(corpus).unwrap())
    }

    struct ScriptedAnswerer(&'static str);
    impl AnswerModel for ScriptedAnswerer {
        fn answer_without_tools(&self, _q: &str) -> Result<ModelAnswer, ToolError> {
            Ok(ModelAnswer {
                reasoning: "recalled directly".into(),
                answer: self.0.into(),
            })
        }
    }

    struct ExactJudge;
    impl CheckJudge for ExactJudge {
        fn judge(
            &self,
            _q: &str,
            gold: &str,
            _reasoning: &str,
            answer: &str,
        ) -> Result<CheckVerdict, ToolError> {
            let hit = answer == gold;
            Ok(CheckVerdict {
                answerable_from_memory: hit,
                resolved_entities: if hit { vec![gold.to_string()] } else { vec![] },
                judge_rationale: if hit { "answer matches gold".into() } else { "mismatch".into() },
            })
        }
    }

    struct FailingAnswerer;
    impl AnswerModel for FailingAnswerer {
        fn answer_without_tools(&self, _q: &str) -> Result<ModelAnswer, ToolError> {
            Err(ToolError::network("backend unavailable"))
        }
    }

    #[test]
    fn visit_with_identity_summarizer_returns_full_body() {
        let env = small_env().with_summarizer(Box::new(IdentitySummarizer));
        let body = env.visit("d1", "anything").unwrap();
        assert_eq!(body, "alpha body text with enough words");
    }

    #[test]
    fn visit_unknown_locator_is_not_found() {
        let env = small_env();
        let err = env.visit("missing", "goal").unwrap_err();
        assert_eq!(err.kind, crate::error::ToolErrorKind::NotFound);
        assert!(!err.retryable);
    }

    #[test]
    fn truncation_summarizer_is_length_bounded_and_idempotent() {
        let s = HeadTruncation { max_chars: 10 };
        let once = s.summarize("0123456789abcdef", "goal");
        assert_eq!(once, "0123456789");
        assert_eq!(s.summarize(&once, "goal"), once);
    }

    #[test]
    fn check_with_matching_scripted_answerer_is_answerable() {
        let record = llm_check("q?", "gold", &ScriptedAnswerer("gold"), &ExactJudge).unwrap();
        assert!(record.verdict.answerable_from_memory);
        assert_eq!(record.verdict.resolved_entities, vec!["gold".to_string()]);
        assert_eq!(record.answerer_answer, "gold");
    }

    #[test]
    fn check_with_unknown_answer_is_not_answerable() {
        let record = llm_check("q?", "gold", &ScriptedAnswerer("unknown"), &ExactJudge).unwrap();
        assert!(!record.verdict.answerable_from_memory);
    }

    #[test]
    fn check_propagates_retryable_network_failure() {
        let err = llm_check("q?", "gold", &FailingAnswerer, &ExactJudge).unwrap_err();
        assert_eq!(err.kind, crate::error::ToolErrorKind::NetworkFailure);
        assert!(err.retryable);
    }
}
