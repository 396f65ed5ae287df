//! Answer judging.

use medsearch_core::AliasTable;
use medsearch_env::ToolError;

/// Judgment contract: is the predicted answer correct against gold? Backed
/// by a model in production; the shipped scripted judge is normalized exact
/// match.
pub trait AnswerJudge: Send + Sync {
    fn judge(&self, predicted: &str, gold: &str) -> Result<bool, ToolError>;
}

/// Deterministic normalized exact match with optional aliases.
#[derive(Debug, Clone, Default)]
pub struct ExactMatchJudge {
    pub aliases: AliasTable,
}

impl AnswerJudge for ExactMatchJudge {
    fn judge(&self, predicted: &str, gold: &str) -> Result<bool, ToolError> {
        Ok(self.aliases.matches(predicted, gold))
    }
}

/// Judge one answer.
pub fn judge_answer(
    predicted: &str,
    gold: &str,
    judge: &dyn AnswerJudge,
) -> Result<bool, ToolError> {
    judge.judge(predicted, gold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_strings_match() {
        assert!(judge_answer("XPF", "XPF", &ExactMatchJudge::default()).unwrap());
    }

    #[test]
    fn case_and_punctuation_variants_match() {
        assert!(judge_answer("  xpf. ", "XPF", &ExactMatchJudge::default()).unwrap());
    }

    #[test]
    fn disjoint_strings_do_not_match() {
        assert!(!judge_answer("FANCD2", "XPF", &ExactMatchJudge::default()).unwrap());
    }
}
