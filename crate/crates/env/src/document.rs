//! Documents and corpus ingestion files.

use crate::error::ToolError;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceTag {
    General,
    Medical,
}

/// One corpus document. `authority_score` is a trust weight in [0,1];
/// `timestamp` is the publication or crawl date used for recency weighting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub body: String,
    pub source_tag: SourceTag,
    pub authority_score: f64,
    pub timestamp: NaiveDate,
}

impl Document {
    /// Field-level sanity check used at ingestion time.
    pub fn check(&self) -> Result<(), ToolError> {
        if self.id.trim().is_empty() {
            return Err(ToolError::parse("document with empty id"));
        }
        if !(0.0..=1.0).contains(&self.authority_score) {
            return Err(ToolError::parse(format!(
                "document {}: authority_score {} outside [0,1]",
                self.id, self.authority_score
            )));
        }
        Ok(())
    }
}

/// Read a corpus file: one document per line, no header.
pub fn read_corpus(input: &mut dyn BufRead) -> Result<Vec<Document>, ToolError> {
    let mut docs = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| ToolError::parse(format!("line {}: {e}", idx + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line)
            .map_err(|e| ToolError::parse(format!("line {}: {e}", idx + 1)))?;
        doc.check()?;
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_corpus<'a>(
    out: &mut dyn Write,
    docs: impl IntoIterator<Item = &'a Document>,
) -> std::io::Result<()> {
    for doc in docs {
        let line = serde_json::to_string(doc).expect("document serializes");
        writeln!(out, "{line}")?;
    }
    Ok(())
}
