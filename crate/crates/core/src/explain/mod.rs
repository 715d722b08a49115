//! Hybrid explanations: exact per-token attributions for the logistic model,
//! highlight selection, LLM-written narratives with a deterministic
//! fallback, and the zero-shot LLM classification baseline.

mod attribution;
mod llm;
mod mapping;

pub use attribution::{attribute, highlight, Attribution, ExplainError, TokenAttribution, DEFAULT_HIGHLIGHTS};
pub use llm::{
    fallback_narrative, narrate, narration_prompt, zero_shot_classify, zero_shot_prompt, ChatBackend, ChatError,
    Explanation, Narration, NarrativeSource, ZeroShotOutcome, DISCLAIMER,
};
pub use mapping::{map_llm_output, normalize_reply, AliasError, AliasTable};
