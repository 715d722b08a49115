//! EDA text perturbations: synonym replacement, random insertion, random
//! swap and random deletion.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lexicon::{Stopwords, SynonymLexicon};
use crate::corpus::LabeledPost;
use crate::rng::{stream, tag, StreamRng};
use crate::text::clean_text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdaOp {
    SynonymReplacement,
    RandomInsertion,
    RandomSwap,
    RandomDeletion,
}

impl EdaOp {
    pub const ALL: [EdaOp; 4] = [
        EdaOp::SynonymReplacement,
        EdaOp::RandomInsertion,
        EdaOp::RandomSwap,
        EdaOp::RandomDeletion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdaOp::SynonymReplacement => "synonym_replacement",
            EdaOp::RandomInsertion => "random_insertion",
            EdaOp::RandomSwap => "random_swap",
            EdaOp::RandomDeletion => "random_deletion",
        }
    }

    fn uses_lexicon(self) -> bool {
        matches!(self, EdaOp::SynonymReplacement | EdaOp::RandomInsertion)
    }
}

impl fmt::Display for EdaOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EdaError {
    #[error("post {0:?} has no words to augment")]
    EmptyPost(String),
    #[error("{0} needs a non-empty synonym lexicon")]
    EmptyLexicon(EdaOp),
}

/// Number of words an operation touches: `max(1, round(alpha * len))`.
fn touched(alpha: f64, len: usize) -> usize {
    (libm::round(alpha * len as f64) as usize).max(1)
}

/// Seeded single augmentation of `p` using the bundled English stopwords.
pub fn eda_augment(
    p: &LabeledPost,
    op: EdaOp,
    alpha: f64,
    lex: &SynonymLexicon,
    seed: u64,
) -> Result<LabeledPost, EdaError> {
    let mut rng = stream(seed, &[tag::AUGMENT]);
    augment_with_rng(p, op, alpha, lex, &Stopwords::english(), &mut rng)
}

/// Applies `op` to `p.clean_text`. The result keeps the label, takes the
/// source id as its id and is re-cleaned; callers assign fresh ids.
pub fn augment_with_rng(
    p: &LabeledPost,
    op: EdaOp,
    alpha: f64,
    lex: &SynonymLexicon,
    stop: &Stopwords,
    rng: &mut StreamRng,
) -> Result<LabeledPost, EdaError> {
    if op.uses_lexicon() && lex.is_empty() {
        return Err(EdaError::EmptyLexicon(op));
    }
    let mut words: Vec<String> = p.clean_text.split_whitespace().map(ToString::to_string).collect();
    if words.is_empty() {
        return Err(EdaError::EmptyPost(p.id.clone()));
    }
    let n = touched(alpha, words.len());
    match op {
        EdaOp::SynonymReplacement => synonym_replacement(&mut words, n, lex, stop, rng),
        EdaOp::RandomInsertion => random_insertion(&mut words, n, lex, rng),
        EdaOp::RandomSwap => {
            for _ in 0..n {
                swap_random_pair(&mut words, rng);
            }
        }
        EdaOp::RandomDeletion => random_deletion(&mut words, alpha, rng),
    }
    let raw = words.join(" ");
    Ok(LabeledPost {
        id: p.id.clone(),
        clean_text: clean_text(&raw),
        raw_text: raw,
        label: p.label,
        source_tag: Some(alloc::format!("eda:{op}")),
    })
}

fn swap_random_pair(words: &mut [String], rng: &mut StreamRng) {
    if words.len() < 2 {
        return;
    }
    let i = rng.gen_range(0..words.len());
    swap_with_other(words, i, rng);
}

fn swap_with_other(words: &mut [String], i: usize, rng: &mut StreamRng) {
    if words.len() < 2 {
        return;
    }
    let mut j = rng.gen_range(0..words.len() - 1);
    if j >= i {
        j += 1;
    }
    words.swap(i, j);
}

fn synonym_replacement(words: &mut [String], n: usize, lex: &SynonymLexicon, stop: &Stopwords, rng: &mut StreamRng) {
    let candidates: Vec<usize> = (0..words.len()).filter(|&i| !stop.contains(&words[i])).collect();
    if candidates.is_empty() {
        for _ in 0..n {
            swap_random_pair(words, rng);
        }
        return;
    }
    let picks = index::sample(rng, candidates.len(), n.min(candidates.len()));
    for k in picks.iter() {
        let pos = candidates[k];
        match lex.synonyms(&words[pos]) {
            Some(syns) => words[pos] = syns.choose(rng).cloned().unwrap_or_default(),
            None => swap_with_other(words, pos, rng),
        }
    }
}

fn random_insertion(words: &mut Vec<String>, n: usize, lex: &SynonymLexicon, rng: &mut StreamRng) {
    for _ in 0..n {
        let pick = rng.gen_range(0..words.len());
        match lex.synonyms(&words[pick]) {
            Some(syns) => {
                let syn = syns.choose(rng).cloned().unwrap_or_default();
                let at = rng.gen_range(0..=words.len());
                words.insert(at, syn);
            }
            None => swap_with_other(words, pick, rng),
        }
    }
}

fn random_deletion(words: &mut Vec<String>, alpha: f64, rng: &mut StreamRng) {
    let kept: Vec<String> = words.iter().filter(|_| !rng.gen_bool(alpha)).cloned().collect();
    if kept.is_empty() {
        let keep = rng.gen_range(0..words.len());
        let w = words.swap_remove(keep);
        words.clear();
        words.push(w);
    } else {
        *words = kept;
    }
}
