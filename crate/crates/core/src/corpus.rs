//! Labeled posts, corpora and post-level deduplication.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::label::{ClassLabel, NUM_CLASSES};
use crate::text::clean_text;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPost {
    pub id: String,
    pub raw_text: String,
    pub clean_text: String,
    pub label: ClassLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_tag: Option<String>,
}

impl LabeledPost {
    /// Builds a post from raw text; `clean_text` is derived, never supplied.
    pub fn new(id: String, raw_text: String, label: ClassLabel, source_tag: Option<String>) -> Self {
        let clean = clean_text(&raw_text);
        LabeledPost {
            id,
            raw_text,
            clean_text: clean,
            label,
            source_tag,
        }
    }
}

/// Stable content identifier: first 16 hex digits of SHA-256 over
/// `clean_text`, a unit separator, and the label name.
pub fn content_id(clean: &str, label: ClassLabel) -> String {
    let mut hasher = Sha256::new();
    hasher.update(clean.as_bytes());
    hasher.update([0x1f]);
    hasher.update(label.as_str().as_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(16);
    for b in digest.iter().take(8) {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("duplicate post id {0:?}")]
    DuplicateId(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    posts: Vec<LabeledPost>,
    class_counts: [usize; NUM_CLASSES],
}

/// One input record before id assignment.
#[derive(Debug, Clone)]
pub struct RawRecord {
    pub id: Option<String>,
    pub text: String,
    pub label: ClassLabel,
    pub source: Option<String>,
}

impl Corpus {
    pub fn new(posts: Vec<LabeledPost>) -> Result<Self, CorpusError> {
        let mut seen = BTreeSet::new();
        let mut class_counts = [0usize; NUM_CLASSES];
        for p in &posts {
            if !seen.insert(p.id.as_str()) {
                return Err(CorpusError::DuplicateId(p.id.clone()));
            }
            class_counts[p.label.index()] += 1;
        }
        Ok(Corpus { posts, class_counts })
    }

    /// Cleans each record and assigns content-hash ids where none was given.
    /// Repeated content hashes get `-1`, `-2`, ... suffixes in input order.
    pub fn from_records<I>(records: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = RawRecord>,
    {
        let mut hash_uses: BTreeMap<String, usize> = BTreeMap::new();
        let posts = records
            .into_iter()
            .map(|r| {
                let mut post = LabeledPost::new(String::new(), r.text, r.label, r.source);
                post.id = match r.id {
                    Some(id) => id,
                    None => {
                        let base = content_id(&post.clean_text, post.label);
                        let uses = hash_uses.entry(base.clone()).or_insert(0);
                        let id = if *uses == 0 { base } else { format!("{base}-{uses}") };
                        *uses += 1;
                        id
                    }
                };
                post
            })
            .collect();
        Corpus::new(posts)
    }

    pub fn posts(&self) -> &[LabeledPost] {
        &self.posts
    }

    pub fn into_posts(self) -> Vec<LabeledPost> {
        self.posts
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn class_counts(&self) -> &[usize; NUM_CLASSES] {
        &self.class_counts
    }

    pub fn count(&self, label: ClassLabel) -> usize {
        self.class_counts[label.index()]
    }

    pub fn of_class(&self, label: ClassLabel) -> impl Iterator<Item = &LabeledPost> {
        self.posts.iter().filter(move |p| p.label == label)
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.posts.iter().map(|p| p.clean_text.as_str())
    }

    pub fn labels(&self) -> Vec<ClassLabel> {
        self.posts.iter().map(|p| p.label).collect()
    }
}

/// A dropped post whose text matched an earlier survivor with another label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelConflict {
    pub kept_id: String,
    pub kept_label: ClassLabel,
    pub dropped_id: String,
    pub dropped_label: ClassLabel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deduplicated {
    pub corpus: Corpus,
    pub removed: usize,
    pub label_conflicts: Vec<LabelConflict>,
}

/// Keeps the first post for each distinct `clean_text`, regardless of label.
pub fn deduplicate(c: &Corpus) -> Deduplicated {
    let mut first: BTreeMap<&str, usize> = BTreeMap::new();
    let mut keep = Vec::with_capacity(c.len());
    let mut label_conflicts = Vec::new();
    for (i, p) in c.posts.iter().enumerate() {
        match first.get(p.clean_text.as_str()) {
            Some(&k) => {
                let kept = &c.posts[k];
                if kept.label != p.label {
                    label_conflicts.push(LabelConflict {
                        kept_id: kept.id.clone(),
                        kept_label: kept.label,
                        dropped_id: p.id.clone(),
                        dropped_label: p.label,
                    });
                }
            }
            None => {
                first.insert(p.clean_text.as_str(), i);
                keep.push(i);
            }
        }
    }
    let removed = c.len() - keep.len();
    let posts: Vec<LabeledPost> = keep.into_iter().map(|i| c.posts[i].clone()).collect();
    let mut class_counts = [0usize; NUM_CLASSES];
    for p in &posts {
        class_counts[p.label.index()] += 1;
    }
    Deduplicated {
        corpus: Corpus { posts, class_counts },
        removed,
        label_conflicts,
    }
}
