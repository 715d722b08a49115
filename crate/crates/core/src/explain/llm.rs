use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::attribution::TokenAttribution;
use super::mapping::{map_llm_output, AliasTable};
use crate::label::ClassLabel;

pub const DISCLAIMER: &str = "This is not a clinical diagnosis.";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChatError {
    #[error("LLM client is disabled")]
    Disabled,
    #[error("LLM request timed out")]
    Timeout,
    #[error("LLM transport failure: {0}")]
    Transport(String),
    #[error("unexpected LLM response: {0}")]
    BadResponse(String),
}

/// A single-turn chat completion endpoint.
pub trait ChatBackend {
    /// A disabled backend must never perform network activity.
    fn enabled(&self) -> bool;
    fn complete(&self, prompt: &str) -> Result<String, ChatError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NarrativeSource {
    Llm,
    TemplateFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Narration {
    pub text: String,
    pub source: NarrativeSource,
    /// Why the LLM was not used, when it was enabled but failed.
    pub failure: Option<ChatError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub predicted: ClassLabel,
    pub confidence: f64,
    pub attributions: Vec<TokenAttribution>,
    pub highlights: Vec<TokenAttribution>,
    pub narrative: String,
    pub narrative_source: NarrativeSource,
    pub disclaimer: String,
}

fn term_list(highlights: &[TokenAttribution]) -> String {
    if highlights.is_empty() {
        return String::from("none");
    }
    highlights
        .iter()
        .map(|h| h.token.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn narration_prompt(text: &str, predicted: ClassLabel, confidence: f64, highlights: &[TokenAttribution]) -> String {
    format!(
        "A screening model flagged the following post as {} with confidence {:.3}. The most influential terms were: {}. \
         In 2-3 sentences, explain in plain language why the model may have flagged it. Do not diagnose. Post: {}",
        predicted,
        confidence,
        term_list(highlights),
        text
    )
}

pub fn fallback_narrative(predicted: ClassLabel, confidence: f64, highlights: &[TokenAttribution]) -> String {
    format!(
        "Flagged as {} (confidence {:.3}). Most influential terms: {}.",
        predicted,
        confidence,
        term_list(highlights)
    )
}

/// Asks the backend for a narrative; any failure or a disabled backend
/// yields the template fallback. Never touches the classification itself.
pub fn narrate(
    client: &dyn ChatBackend,
    text: &str,
    predicted: ClassLabel,
    confidence: f64,
    highlights: &[TokenAttribution],
) -> Narration {
    let fallback = |failure| Narration {
        text: fallback_narrative(predicted, confidence, highlights),
        source: NarrativeSource::TemplateFallback,
        failure,
    };
    if !client.enabled() {
        return fallback(None);
    }
    match client.complete(&narration_prompt(text, predicted, confidence, highlights)) {
        Ok(reply) if !reply.trim().is_empty() => Narration {
            text: String::from(reply.trim()),
            source: NarrativeSource::Llm,
            failure: None,
        },
        Ok(_) => fallback(Some(ChatError::BadResponse(String::from("empty reply")))),
        Err(e) => fallback(Some(e)),
    }
}

pub fn zero_shot_prompt(text: &str) -> String {
    let labels: Vec<&str> = ClassLabel::ALL.iter().map(|c| c.as_str()).collect();
    format!(
        "Classify the following social media post into exactly one of these categories: {}. \
         Reply with the category name only. Post: {}",
        labels.join(", "),
        text
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroShotOutcome {
    Label(ClassLabel),
    /// The reply did not map to exactly one label; kept verbatim.
    Unmapped(String),
}

pub fn zero_shot_classify(
    client: &dyn ChatBackend,
    text: &str,
    aliases: &AliasTable,
) -> Result<ZeroShotOutcome, ChatError> {
    if !client.enabled() {
        return Err(ChatError::Disabled);
    }
    let reply = client.complete(&zero_shot_prompt(text))?;
    Ok(match map_llm_output(&reply, &ClassLabel::ALL, aliases) {
        Some(label) => ZeroShotOutcome::Label(label),
        None => ZeroShotOutcome::Unmapped(reply),
    })
}
