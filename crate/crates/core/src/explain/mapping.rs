use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::label::ClassLabel;

const BUNDLED: &str = include_str!("../../data/label_aliases.txt");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AliasError {
    #[error("line {line}: expected `label = alias, alias`")]
    Syntax { line: usize },
    #[error("line {line}: unknown label {label:?}")]
    UnknownLabel { line: usize, label: String },
    #[error("alias {alias:?} is claimed by both {first} and {second}")]
    Conflict {
        alias: String,
        first: ClassLabel,
        second: ClassLabel,
    },
}

/// Lowercase, map every non-alphanumeric character to a space, collapse.
pub fn normalize_reply(reply: &str) -> String {
    let mut out = String::with_capacity(reply.len());
    for word in reply
        .chars()
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .split_whitespace()
    {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Normalized surface form to label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AliasTable {
    aliases: BTreeMap<String, ClassLabel>,
}

impl AliasTable {
    pub fn parse(src: &str) -> Result<Self, AliasError> {
        let mut aliases: BTreeMap<String, ClassLabel> = BTreeMap::new();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (label, forms) = line.split_once('=').ok_or(AliasError::Syntax { line: i + 1 })?;
            let label: ClassLabel = label.trim().parse().map_err(|_| AliasError::UnknownLabel {
                line: i + 1,
                label: String::from(label.trim()),
            })?;
            for form in forms.split(',').map(normalize_reply).filter(|f| !f.is_empty()) {
                match aliases.get(&form) {
                    Some(&other) if other != label => {
                        return Err(AliasError::Conflict {
                            alias: form,
                            first: other,
                            second: label,
                        })
                    }
                    _ => {
                        aliases.insert(form, label);
                    }
                }
            }
        }
        Ok(AliasTable { aliases })
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled alias table is well formed")
    }

    pub fn get(&self, normalized: &str) -> Option<ClassLabel> {
        self.aliases.get(normalized).copied()
    }

    pub fn len(&self) -> usize {
        self.aliases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, ClassLabel)> {
        self.aliases.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

fn label_name(label: ClassLabel) -> String {
    normalize_reply(label.as_str())
}

/// Word-aligned occurrences of `form` in `words`, as half-open word spans.
fn find_spans(words: &[&str], form: &str) -> Vec<(usize, usize)> {
    let needle: Vec<&str> = form.split(' ').collect();
    if needle.len() > words.len() {
        return Vec::new();
    }
    (0..=words.len() - needle.len())
        .filter(|&i| words[i..i + needle.len()] == needle[..])
        .map(|i| (i, i + needle.len()))
        .collect()
}

/// Map a free-text model reply onto one of `labels`.
///
/// Tried in order: the whole reply equals a label name; the whole reply
/// equals an alias; label names and aliases found as whole-word runs inside
/// the reply. In the last step a match lying inside a longer match is
/// ignored, so "non suicide" does not also count as "suicide". Anything
/// other than exactly one candidate label is unmapped.
pub fn map_llm_output(reply: &str, labels: &[ClassLabel], aliases: &AliasTable) -> Option<ClassLabel> {
    let norm = normalize_reply(reply);
    if norm.is_empty() {
        return None;
    }
    if let Some(&l) = labels.iter().find(|&&l| label_name(l) == norm) {
        return Some(l);
    }
    if let Some(l) = aliases.get(&norm).filter(|l| labels.contains(l)) {
        return Some(l);
    }

    let words: Vec<&str> = norm.split(' ').collect();
    let mut hits: Vec<((usize, usize), ClassLabel)> = Vec::new();
    for &l in labels {
        for span in find_spans(&words, &label_name(l)) {
            hits.push((span, l));
        }
    }
    for (form, l) in aliases.iter().filter(|(_, l)| labels.contains(l)) {
        for span in find_spans(&words, form) {
            hits.push((span, l));
        }
    }
    let inside_longer =
        |(s, e): (usize, usize)| hits.iter().any(|&((s2, e2), _)| s2 <= s && e <= e2 && e2 - s2 > e - s);
    let candidates: BTreeSet<ClassLabel> = hits
        .iter()
        .filter(|(span, _)| !inside_longer(*span))
        .map(|&(_, l)| l)
        .collect();
    if candidates.len() == 1 {
        candidates.into_iter().next()
    } else {
        None
    }
}
