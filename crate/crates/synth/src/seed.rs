//! Seed QA generation from subgraphs and multi-model consistency checking.

use crate::kg::{KnowledgeGraph, Subgraph};
use medsearch_core::{normalize_answer, AliasTable};
use medsearch_env::ToolError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Canonical rendering of a path: entity types and relation labels spelled
/// out, the terminal withheld as the answer slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathRendering {
    pub text: String,
    pub root: String,
    pub root_type: String,
    pub relation_labels: Vec<String>,
    pub terminal_type: String,
}

/// Render a subgraph for question generation. The terminal entity never
/// appears in the rendering.
pub fn render_path(kg: &KnowledgeGraph, sub: &Subgraph) -> PathRendering {
    let root_type = kg
        .entity(&sub.root)
        .map(|e| e.entity_type.clone())
        .unwrap_or_else(|| "entity".to_string());
    let terminal_type = kg
        .entity(&sub.terminal)
        .map(|e| e.entity_type.clone())
        .unwrap_or_else(|| "entity".to_string());
    let labels: Vec<String> = sub.path.iter().map(|r| r.label.clone()).collect();
    let mut text = format!(
        "Path of {} hops. Start at the {} named '{}'.",
        sub.depth, root_type, sub.root
    );
    for (i, rel) in sub.path.iter().enumerate() {
        let hop_type = if i + 1 == sub.path.len() {
            format!("(withheld {terminal_type} — this is the answer slot)")
        } else {
            kg.entity(&rel.tail)
                .map(|e| e.entity_type.clone())
                .unwrap_or_else(|| "entity".to_string())
        };
        text.push_str(&format!(
            " Hop {}: follow relation '{}' to {}.",
            i + 1,
            rel.label,
            hop_type
        ));
    }
    PathRendering {
        text,
        root: sub.root.clone(),
        root_type,
        relation_labels: labels,
        terminal_type,
    }
}

/// Model contract for turning a rendered path into a natural-language
/// question (the terminal is the answer and must not be mentioned).
pub trait QaGenerator: Send + Sync {
    fn generate(&self, rendering: &PathRendering) -> Result<String, ToolError>;

    /// Retry with the verifiers' disagreement reasons fed back.
    fn regenerate(
        &self,
        rendering: &PathRendering,
        feedback: &[String],
    ) -> Result<String, ToolError> {
        let _ = feedback;
        self.generate(rendering)
    }
}

/// Model contract answering a seed question during consistency checking.
pub trait SeedVerifier: Send + Sync {
    fn verify(&self, question: &str) -> Result<VerifierReply, ToolError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifierReply {
    pub answer: String,
    pub rationale: String,
}

/// A seed QA pair with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedQA {
    pub question: String,
    pub answer: String,
    pub source_subgraph: Subgraph,
    pub generation_attempts: u32,
}

#[derive(Debug, Error)]
pub enum SeedError {
    #[error("generated question leaks the answer '{0}'")]
    GenerationLeak(String),
    #[error("consistency check exhausted after {0} regenerations")]
    ConsistencyExhausted(u32),
    #[error("consistency checking requires at least 2 verifiers, got {0}")]
    TooFewVerifiers(usize),
    #[error(transparent)]
    Model(#[from] ToolError),
}

fn leak_check(question: &str, answer: &str) -> Result<(), SeedError> {
    let q = normalize_answer(question);
    let a = normalize_answer(answer);
    if !a.is_empty() && q.contains(&a) {
        return Err(SeedError::GenerationLeak(answer.to_string()));
    }
    Ok(())
}

/// Generate the seed question for a subgraph. The generator sees the
/// rendering (terminal withheld); output that mentions the answer is
/// rejected.
pub fn subgraph_to_qa(
    kg: &KnowledgeGraph,
    sub: &Subgraph,
    generator: &dyn QaGenerator,
) -> Result<SeedQA, SeedError> {
    let rendering = render_path(kg, sub);
    let question = generator.generate(&rendering)?;
    leak_check(&question, &sub.terminal)?;
    Ok(SeedQA {
        question,
        answer: sub.terminal.clone(),
        source_subgraph: sub.clone(),
        generation_attempts: 0,
    })
}

/// Require every verifier to reach the seed answer (alias-aware comparison).
/// On disagreement the reasons are fed back to the generator and the question
/// is regenerated, up to `max_regen` times.
pub fn consistency_check(
    kg: &KnowledgeGraph,
    mut qa: SeedQA,
    verifiers: &[&dyn SeedVerifier],
    max_regen: u32,
    generator: &dyn QaGenerator,
    aliases: &AliasTable,
) -> Result<SeedQA, SeedError> {
    if verifiers.len() < 2 {
        return Err(SeedError::TooFewVerifiers(verifiers.len()));
    }
    let rendering = render_path(kg, &qa.source_subgraph);
    for attempt in 0..=max_regen {
        qa.generation_attempts = attempt;
        let mut feedback = Vec::new();
        for (i, verifier) in verifiers.iter().enumerate() {
            let reply = verifier.verify(&qa.question)?;
            if !aliases.matches(&reply.answer, &qa.answer) {
                feedback.push(format!(
                    "verifier {i} answered '{}' instead of the expected terminal: {}",
                    reply.answer, reply.rationale
                ));
            }
        }
        if feedback.is_empty() {
            return Ok(qa);
        }
        if attempt == max_regen {
            break;
        }
        let question = generator.regenerate(&rendering, &feedback)?;
        if leak_check(&question, &qa.answer).is_err() {
            // A leaking regeneration is itself a failed attempt.
            continue;
        }
        qa.question = question;
    }
    Err(SeedError::ConsistencyExhausted(max_regen))
}
