use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::text::clean_text;

const ENGLISH_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");
const BUNDLED_LEXICON: &str = include_str!("../../data/lexicon_en.txt");

/// Word → synonyms source for the synonym-based EDA operations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SynonymLexicon {
    entries: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("line {line}: expected `word = synonym, synonym, ...`")]
    Syntax { line: usize },
    #[error("line {line}: {word:?} has no synonyms other than itself")]
    EmptyEntry { line: usize, word: String },
}

impl SynonymLexicon {
    /// Parses `word = syn1, syn2` lines. Words and synonyms are normalized
    /// with [`clean_text`]; a word listed as its own synonym is dropped from
    /// its list, and a list left empty is an error.
    pub fn parse(src: &str) -> Result<Self, LexiconError> {
        let mut entries: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (n, raw) in src.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (word, syns) = line.split_once('=').ok_or(LexiconError::Syntax { line: n + 1 })?;
            let word = clean_text(word);
            if word.is_empty() || word.contains(' ') {
                return Err(LexiconError::Syntax { line: n + 1 });
            }
            let list = entries.entry(word.clone()).or_default();
            for s in syns.split(',').map(clean_text) {
                if !s.is_empty() && s != word && !list.contains(&s) {
                    list.push(s);
                }
            }
            if list.is_empty() {
                return Err(LexiconError::EmptyEntry { line: n + 1, word });
            }
        }
        Ok(SynonymLexicon { entries })
    }

    /// The small English lexicon shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_LEXICON).expect("bundled lexicon is well formed")
    }

    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (&'a str, &'a [&'a str])>,
    {
        let mut src = String::new();
        for (w, syns) in pairs {
            src.push_str(w);
            src.push_str(" = ");
            src.push_str(&syns.join(", "));
            src.push('\n');
        }
        Self::parse(&src)
    }

    pub fn synonyms(&self, word: &str) -> Option<&[String]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Words never chosen for synonym replacement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    /// The pinned 127-word English list.
    pub fn english() -> Self {
        Stopwords(ENGLISH_STOPWORDS.split_whitespace().map(ToString::to_string).collect())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
