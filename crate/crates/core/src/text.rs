//! Text normalization shared by ingestion, augmentation and serving.

use alloc::string::String;
use alloc::vec::Vec;

const URL_PREFIXES: [&str; 3] = ["http://", "https://", "www."];

/// Normalizes a raw post.
///
/// The steps run in a fixed order: lowercase, drop URL tokens (anything
/// starting with `http://`, `https://` or `www.` up to the next whitespace),
/// drop `@mentions`, map every character outside `[a-z0-9 ]` to a space,
/// collapse whitespace runs and trim.
pub fn clean_text(raw: &str) -> String {
    let lowered: String = raw.chars().flat_map(char::to_lowercase).collect();
    let without_urls = strip_urls(&lowered);
    let without_mentions = strip_mentions(&without_urls);

    let mut out = String::with_capacity(without_mentions.len());
    let mut pending_space = false;
    for ch in without_mentions.chars() {
        if ch.is_ascii_lowercase() || ch.is_ascii_digit() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(ch);
        } else {
            pending_space = true;
        }
    }
    out
}

fn strip_urls(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while !rest.is_empty() {
        if URL_PREFIXES.iter().any(|p| rest.starts_with(p)) {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            rest = &rest[end..];
            continue;
        }
        let ch = rest.chars().next().unwrap_or_default();
        out.push(ch);
        rest = &rest[ch.len_utf8()..];
    }
    out
}

fn is_word_char(ch: char) -> bool {
    ch.is_alphanumeric() || ch == '_'
}

fn strip_mentions(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars().peekable();
    while let Some(ch) = chars.next() {
        if ch == '@' && chars.peek().copied().is_some_and(is_word_char) {
            while chars.peek().copied().is_some_and(is_word_char) {
                chars.next();
            }
            continue;
        }
        out.push(ch);
    }
    out
}

/// Splits cleaned text into word tokens.
pub fn tokens(clean: &str) -> Vec<&str> {
    clean.split_whitespace().collect()
}
