//! Offline lexical index.
//!
//! Relevance is plain tf-idf: `score(q, d) = Σ_t tf(t, d) · ln(1 + N/df(t))`
//! over the deduplicated query terms, where tf counts occurrences of `t` in
//! the document's title plus body and N is the corpus size. Tokens are
//! lowercase maximal alphanumeric runs. Ties break by ascending document id,
//! so rankings are reproducible byte for byte. An embedding index can replace
//! this behind the same contract; nothing upstream depends on the scheme.

use crate::document::{Document, SourceTag};
use crate::error::ToolError;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// One ranked hit. `rank` is 1-based and consecutive; results are ordered by
/// non-increasing score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub doc_id: String,
    pub snippet: String,
    pub score: f64,
    pub rank: u32,
}

/// Weights for medical professional search: the base relevance is multiplied
/// by `1 + alpha·authority + beta·recency`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MedicalSearchWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for MedicalSearchWeights {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.5,
        }
    }
}

const SNIPPET_CHARS: usize = 160;

/// Immutable index over a corpus; term statistics are computed once at build
/// time and the index is safe to share across parallel workers.
#[derive(Debug, Clone)]
pub struct SearchIndex {
    docs: Vec<Document>,
    by_id: BTreeMap<String, usize>,
    /// term → (doc index, term frequency), doc indices ascending.
    postings: BTreeMap<String, Vec<(usize, u32)>>,
    /// Per-document recency in [0,1], linear over the corpus date range.
    recency: Vec<f64>,
}

/// Lowercase alphanumeric tokens of a text.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            for low in ch.to_lowercase() {
                current.push(low);
            }
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Build the immutable index. Fails on duplicate ids or an empty corpus.
pub fn build_index(corpus: Vec<Document>) -> Result<SearchIndex, ToolError> {
    if corpus.is_empty() {
        return Err(ToolError::parse("cannot index an empty corpus"));
    }
    let mut by_id = BTreeMap::new();
    for (i, doc) in corpus.iter().enumerate() {
        doc.check()?;
        if by_id.insert(doc.id.clone(), i).is_some() {
            return Err(ToolError::parse(format!("duplicate document id {}", doc.id)));
        }
    }

    let mut postings: BTreeMap<String, Vec<(usize, u32)>> = BTreeMap::new();
    for (i, doc) in corpus.iter().enumerate() {
        let mut counts: BTreeMap<String, u32> = BTreeMap::new();
        for token in tokenize(&doc.title).into_iter().chain(tokenize(&doc.body)) {
            *counts.entry(token).or_insert(0) += 1;
        }
        for (term, tf) in counts {
            postings.entry(term).or_default().push((i, tf));
        }
    }

    let min_date = corpus.iter().map(|d| d.timestamp).min().expect("non-empty");
    let max_date = corpus.iter().map(|d| d.timestamp).max().expect("non-empty");
    let span = (max_date - min_date).num_days();
    let recency = corpus
        .iter()
        .map(|d| {
            if span == 0 {
                1.0
            } else {
                (d.timestamp - min_date).num_days() as f64 / span as f64
            }
        })
        .collect();

    Ok(SearchIndex {
        docs: corpus,
        by_id,
        postings,
        recency,
    })
}

impl SearchIndex {
    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.by_id.get(id).map(|&i| &self.docs[i])
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    /// Occurrences of `term` in the given document (title + body).
    pub fn term_frequency(&self, term: &str, doc_id: &str) -> u32 {
        let Some(&idx) = self.by_id.get(doc_id) else {
            return 0;
        };
        self.postings
            .get(term)
            .and_then(|list| list.iter().find(|(i, _)| *i == idx))
            .map(|(_, tf)| *tf)
            .unwrap_or(0)
    }

    /// Number of documents containing `term`.
    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings.get(term).map(|l| l.len()).unwrap_or(0)
    }

    /// Inverse document frequency: `ln(1 + N/df)`; 0 for unseen terms.
    pub fn idf(&self, term: &str) -> f64 {
        let df = self.document_frequency(term);
        if df == 0 {
            0.0
        } else {
            (1.0 + self.docs.len() as f64 / df as f64).ln()
        }
    }

    /// Base tf-idf scores for every matching document. Terms are deduplicated
    /// and accumulated in sorted term order so scores are bit-reproducible.
    fn base_scores(&self, query: &str) -> BTreeMap<usize, f64> {
        let terms: BTreeSet<String> = tokenize(query).into_iter().collect();
        let mut scores: BTreeMap<usize, f64> = BTreeMap::new();
        for term in &terms {
            let idf = self.idf(term);
            if let Some(list) = self.postings.get(term) {
                for &(doc, tf) in list {
                    *scores.entry(doc).or_insert(0.0) += tf as f64 * idf;
                }
            }
        }
        scores
    }

    fn to_results(&self, mut scored: Vec<(usize, f64)>, k: usize) -> Vec<SearchResult> {
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| self.docs[a.0].id.cmp(&self.docs[b.0].id))
        });
        scored
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(i, (doc, score))| {
                let body = &self.docs[doc].body;
                let snippet: String = body.chars().take(SNIPPET_CHARS).collect();
                SearchResult {
                    doc_id: self.docs[doc].id.clone(),
                    snippet,
                    score,
                    rank: i as u32 + 1,
                }
            })
            .collect()
    }

    /// Top-k documents for a query; empty when nothing matches.
    pub fn search(&self, query: &str, k: usize) -> Vec<SearchResult> {
        let scored = self
            .base_scores(query)
            .into_iter()
            .filter(|&(_, s)| s > 0.0)
            .collect();
        self.to_results(scored, k)
    }

    /// Medical professional search: candidates restricted to medical-tagged
    /// documents, relevance reweighted by source authority and recency.
    pub fn medical_search(
        &self,
        query: &str,
        k: usize,
        weights: MedicalSearchWeights,
    ) -> Vec<SearchResult> {
        let scored = self
            .base_scores(query)
            .into_iter()
            .filter(|&(doc, s)| s > 0.0 && self.docs[doc].source_tag == SourceTag::Medical)
            .map(|(doc, s)| {
                let boost = 1.0
                    + weights.alpha * self.docs[doc].authority_score
                    + weights.beta * self.recency[doc];
                (doc, s * boost)
            })
            .collect();
        self.to_results(scored, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn doc(id: &str, body: &str, tag: SourceTag, authority: f64, date: (i32, u32, u32)) -> Document {
        Document {
            id: id.into(),
            title: String::new(),
            body: body.into(),
            source_tag: tag,
            authority_score: authority,
            timestamp: NaiveDate::from_ymd_opt(date.0, date.1, date.2).unwrap(),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let corpus = vec![
            doc("a", "x", SourceTag::General, 0.5, (2024, 1, 1)),
            doc("a", "y", SourceTag::General, 0.5, (2024, 1, 1)),
        ];
        let err = build_index(corpus).unwrap_err();
        assert!(err.detail.contains("duplicate"));
    }

    #[test]
    fn unique_term_ranks_its_document_first() {
        let corpus = vec![
            doc("a", "common words here", SourceTag::General, 0.5, (2024, 1, 1)),
            doc("b", "common words zebra", SourceTag::General, 0.5, (2024, 1, 1)),
        ];
        let index = build_index(corpus).unwrap();
        let results = index.search("zebra", 5);
        assert_eq!(results.len(), 1);
        assert_eq!(results[0].doc_id, "b");
        assert_eq!(results[0].rank, 1);
    }

    #[test]
    fn k_larger_than_corpus_returns_all_matches() {
        let corpus = vec![
            doc("a", "shared term", SourceTag::General, 0.5, (2024, 1, 1)),
            doc("b", "shared term", SourceTag::General, 0.5, (2024, 1, 1)),
        ];
        let index = build_index(corpus).unwrap();
        let results = index.search("shared", 10);
        assert_eq!(results.len(), 2);
        // Equal scores break by ascending doc id.
        assert_eq!(results[0].doc_id, "a");
        assert_eq!(results[1].doc_id, "b");
    }

    #[test]
    fn medical_search_filters_general_documents() {
        let corpus = vec![
            doc("gen", "aspirin dosage", SourceTag::General, 0.9, (2024, 1, 1)),
            doc("med", "aspirin dosage", SourceTag::Medical, 0.3, (2024, 1, 1)),
        ];
        let index = build_index(corpus).unwrap();
        let results = index.medical_search("aspirin", 5, MedicalSearchWeights::default());
        assert_eq!(results.len(), 1);
        assert_eq!(results[0].doc_id, "med");
    }

    #[test]
    fn zero_weights_degenerate_to_plain_search_over_medical_subset() {
        let corpus = vec![
            doc("m1", "renal biopsy protocol", SourceTag::Medical, 0.9, (2020, 1, 1)),
            doc("m2", "renal biopsy biopsy", SourceTag::Medical, 0.1, (2024, 1, 1)),
            doc("g1", "renal biopsy news", SourceTag::General, 0.5, (2024, 1, 1)),
        ];
        let index = build_index(corpus).unwrap();
        let zero = MedicalSearchWeights { alpha: 0.0, beta: 0.0 };
        let weighted = index.medical_search("biopsy", 5, zero);
        let plain: Vec<_> = index
            .search("biopsy", 5)
            .into_iter()
            .filter(|r| index.document(&r.doc_id).unwrap().source_tag == SourceTag::Medical)
            .collect();
        let got: Vec<_> = weighted.iter().map(|r| (&r.doc_id, r.score)).collect();
        let want: Vec<_> = plain.iter().map(|r| (&r.doc_id, r.score)).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn authority_separates_equal_relevance() {
        // Same body → same base score and same recency; alpha decides.
        let corpus = vec![
            doc("low", "statin interaction", SourceTag::Medical, 0.1, (2024, 1, 1)),
            doc("high", "statin interaction", SourceTag::Medical, 0.9, (2024, 1, 1)),
        ];
        let index = build_index(corpus).unwrap();
        let weights = MedicalSearchWeights { alpha: 1.0, beta: 0.0 };
        let results = index.medical_search("statin", 5, weights);
        assert_eq!(results[0].doc_id, "high");
        assert_eq!(results[1].doc_id, "low");
        // Recompute the weighted scores by hand: base · (1 + authority).
        let base = index.idf("statin");
        assert!((results[0].score - base * 1.9).abs() < 1e-12);
        assert!((results[1].score - base * 1.1).abs() < 1e-12);
    }

    #[test]
    fn term_frequency_matches_naive_count() {
        let corpus = vec![doc(
            "a",
            "beta beta gamma, beta; delta",
            SourceTag::General,
            0.5,
            (2024, 1, 1),
        )];
        let index = build_index(corpus).unwrap();
        assert_eq!(index.term_frequency("beta", "a"), 3);
        assert_eq!(index.term_frequency("gamma", "a"), 1);
        assert_eq!(index.term_frequency("missing", "a"), 0);
    }
}
