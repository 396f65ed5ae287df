//! Alias-aware answer comparison.
//!
//! One equivalence definition is shared by seed consistency checking,
//! verification, and evaluation: case folding, punctuation stripping,
//! whitespace collapsing, plus an optional alias table for domain synonyms
//! (medical entities routinely have several accepted names).

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Canonical form used for answer comparison: lowercase, alphanumeric words
/// separated by single spaces.
pub fn normalize_answer(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            for low in ch.to_lowercase() {
                out.push(low);
            }
        } else {
            pending_space = true;
        }
    }
    out
}

/// Groups of equivalent answer strings, compared after normalization.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AliasTable {
    groups: Vec<BTreeSet<String>>,
}

impl AliasTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register one group of mutually equivalent surface forms.
    pub fn add_group<S: AsRef<str>>(&mut self, forms: impl IntoIterator<Item = S>) {
        let group: BTreeSet<String> = forms
            .into_iter()
            .map(|f| normalize_answer(f.as_ref()))
            .collect();
        if group.len() > 1 {
            self.groups.push(group);
        }
    }

    /// True when the two answers normalize equal or share an alias group.
    pub fn matches(&self, a: &str, b: &str) -> bool {
        let na = normalize_answer(a);
        let nb = normalize_answer(b);
        if na == nb {
            return true;
        }
        self.groups
            .iter()
            .any(|g| g.contains(&na) && g.contains(&nb))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_folds_case_and_punctuation() {
        assert_eq!(normalize_answer("  XPF/ERCC4,  gene! "), "xpf ercc4 gene");
        assert_eq!(normalize_answer("Fanconi Anemia"), "fanconi anemia");
    }

    #[test]
    fn plain_match_without_aliases() {
        let table = AliasTable::new();
        assert!(table.matches("Fanconi anemia", "fanconi ANEMIA."));
        assert!(!table.matches("XPF", "FANCD2"));
    }

    #[test]
    fn alias_groups_bridge_synonyms() {
        let mut table = AliasTable::new();
        table.add_group(["XPF", "ERCC4", "FANCQ"]);
        assert!(table.matches("xpf", "FANCQ"));
        assert!(!table.matches("xpf", "FANCL"));
    }
}
