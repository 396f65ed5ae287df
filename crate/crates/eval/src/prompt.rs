//! The unified prompt template applied to every evaluated policy, shipped as
//! a versioned asset so comparisons across policies share one brief.

pub const UNIFIED_PROMPT_TEMPLATE: &str = include_str!("../assets/unified_prompt.txt");
pub const UNIFIED_PROMPT_VERSION: &str = "v1";

/// Render the template for one question.
pub fn render_unified_prompt(question: &str) -> String {
    UNIFIED_PROMPT_TEMPLATE.replace("{question}", question)
}
