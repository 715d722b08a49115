use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::sparse::SparseVector;

pub const DEFAULT_MAX_FEATURES: usize = 5000;

/// Fitted unigram+bigram vocabulary with smoothed IDF weights.
///
/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`; document vectors are raw term
/// counts times IDF, L2-normalized. Column indices follow lexicographic
/// term order.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    vocabulary: BTreeMap<String, usize>,
    terms: Vec<String>,
    idf: Vec<f64>,
    max_features: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TfidfError {
    #[error("cannot fit a vectorizer on an empty corpus")]
    EmptyCorpus,
    #[error("max_features must be positive")]
    ZeroMaxFeatures,
    #[error("vocabulary of {vocab} terms does not match {idf} idf weights")]
    LengthMismatch { vocab: usize, idf: usize },
    #[error("vocabulary indices are not a bijection onto 0..{0}")]
    BadIndices(usize),
    #[error("vocabulary has {len} terms, above max_features {max}")]
    TooManyTerms { len: usize, max: usize },
    #[error("idf weight for {term:?} is {value}, expected a finite value > 0")]
    BadIdf { term: String, value: f64 },
}

/// Calls `f(term, first_token, is_bigram)` for every unigram and bigram of
/// `tokens`, in text order (each unigram, then the bigram starting there).
pub fn for_each_term<F: FnMut(&str, usize, bool)>(tokens: &[&str], mut f: F) {
    let mut buf = String::new();
    for (i, tok) in tokens.iter().enumerate() {
        f(tok, i, false);
        if let Some(next) = tokens.get(i + 1) {
            buf.clear();
            buf.push_str(tok);
            buf.push(' ');
            buf.push_str(next);
            f(&buf, i, true);
        }
    }
}

pub fn fit_tfidf<'a, I>(docs: I, max_features: usize) -> Result<TfidfModel, TfidfError>
where
    I: IntoIterator<Item = &'a str>,
{
    if max_features == 0 {
        return Err(TfidfError::ZeroMaxFeatures);
    }
    // term -> (corpus count, document frequency)
    let mut stats: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    let mut n_docs = 0u64;
    let mut in_doc: BTreeSet<String> = BTreeSet::new();
    for doc in docs {
        n_docs += 1;
        in_doc.clear();
        let toks: Vec<&str> = doc.split_whitespace().collect();
        for_each_term(&toks, |term, _, _| {
            match stats.get_mut(term) {
                Some(s) => s.0 += 1,
                None => {
                    stats.insert(String::from(term), (1, 0));
                }
            }
            if !in_doc.contains(term) {
                in_doc.insert(String::from(term));
            }
        });
        for t in &in_doc {
            if let Some(s) = stats.get_mut(t) {
                s.1 += 1;
            }
        }
    }
    if n_docs == 0 {
        return Err(TfidfError::EmptyCorpus);
    }

    let mut kept: Vec<(String, u64)> = stats.iter().map(|(t, s)| (t.clone(), s.0)).collect();
    if kept.len() > max_features {
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        kept.truncate(max_features);
        kept.sort_by(|a, b| a.0.cmp(&b.0));
    }
    let terms: Vec<String> = kept.into_iter().map(|(t, _)| t).collect();
    let idf = terms
        .iter()
        .map(|t| {
            let df = stats[t].1 as f64;
            libm::log((1.0 + n_docs as f64) / (1.0 + df)) + 1.0
        })
        .collect();
    let vocabulary = terms.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    Ok(TfidfModel {
        vocabulary,
        terms,
        idf,
        max_features,
    })
}

impl TfidfModel {
    /// Rebuilds a model from stored parts, checking every invariant.
    pub fn from_parts(
        vocabulary: BTreeMap<String, usize>,
        idf: Vec<f64>,
        max_features: usize,
    ) -> Result<Self, TfidfError> {
        if vocabulary.len() != idf.len() {
            return Err(TfidfError::LengthMismatch {
                vocab: vocabulary.len(),
                idf: idf.len(),
            });
        }
        if vocabulary.len() > max_features {
            return Err(TfidfError::TooManyTerms {
                len: vocabulary.len(),
                max: max_features,
            });
        }
        let mut terms: Vec<Option<String>> = alloc::vec![None; idf.len()];
        for (t, &i) in &vocabulary {
            match terms.get_mut(i) {
                Some(slot @ None) => *slot = Some(t.clone()),
                _ => return Err(TfidfError::BadIndices(idf.len())),
            }
        }
        let terms: Vec<String> = terms.into_iter().map(|t| t.unwrap_or_default()).collect();
        for (t, &v) in terms.iter().zip(&idf) {
            if !(v.is_finite() && v > 0.0) {
                return Err(TfidfError::BadIdf {
                    term: t.clone(),
                    value: v,
                });
            }
        }
        Ok(TfidfModel {
            vocabulary,
            terms,
            idf,
            max_features,
        })
    }

    pub fn vocabulary(&self) -> &BTreeMap<String, usize> {
        &self.vocabulary
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn max_features(&self) -> usize {
        self.max_features
    }

    pub fn ngram_range(&self) -> (usize, usize) {
        (1, 2)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.vocabulary.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn idf_of(&self, term: &str) -> Option<f64> {
        self.index_of(term).map(|i| self.idf[i])
    }

    /// Unnormalized count×idf weights, used by [`transform`](Self::transform).
    pub fn raw_weights(&self, text: &str) -> SparseVector {
        let toks: Vec<&str> = text.split_whitespace().collect();
        let mut pairs = Vec::new();
        for_each_term(&toks, |term, _, _| {
            if let Some(&i) = self.vocabulary.get(term) {
                pairs.push((i, self.idf[i]));
            }
        });
        SparseVector::from_pairs(pairs)
    }

    /// L2-normalized TF-IDF vector of an already cleaned text. Texts with no
    /// in-vocabulary term map to the empty vector.
    pub fn transform(&self, text: &str) -> SparseVector {
        let raw = self.raw_weights(text);
        let norm = raw.norm();
        if norm == 0.0 {
            SparseVector::default()
        } else {
            raw.scaled(1.0 / norm)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_document_fixture() {
        let m = fit_tfidf(["a b", "a c"], 10).unwrap();
        let terms: Vec<_> = m.vocabulary().keys().map(String::as_str).collect();
        assert_eq!(terms, ["a", "a b", "a c", "b", "c"]);
        assert_eq!(m.idf_of("a"), Some(1.0));
        let rare = libm::log(3.0 / 2.0) + 1.0;
        assert!((m.idf_of("b").unwrap() - rare).abs() < 1e-12);
        assert!((m.idf_of("a c").unwrap() - rare).abs() < 1e-12);
    }

    #[test]
    fn single_document_idf_is_one() {
        let m = fit_tfidf(["x y z x"], 10).unwrap();
        assert!(m.idf().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn max_features_keeps_most_frequent() {
        let m = fit_tfidf(["x y", "x z"], 1).unwrap();
        assert_eq!(m.vocabulary().keys().collect::<Vec<_>>(), ["x"]);
        // ties broken lexicographically: y and z both occur once
        let m = fit_tfidf(["x y", "x z"], 2).unwrap();
        assert_eq!(m.vocabulary().keys().collect::<Vec<_>>(), ["x", "x y"]);
    }

    #[test]
    fn transform_cases() {
        let m = fit_tfidf(["a b", "a c"], 10).unwrap();
        assert!(m.transform("zzz qqq").is_empty());
        for k in 1..5 {
            let text = alloc::vec!["b"; k].join(" ");
            // "b b" contains the out-of-vocabulary bigram only
            let v = m.transform(&text);
            assert_eq!(v.nnz(), 1);
            assert!((v.entries()[0].1 - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn equal_counts_weighted_by_idf() {
        let mut vocab = BTreeMap::new();
        vocab.insert(String::from("p"), 0);
        vocab.insert(String::from("q"), 1);
        let m = TfidfModel::from_parts(vocab, alloc::vec![1.0, 2.0], 10).unwrap();
        let v = m.transform("p q");
        let s5 = libm::sqrt(5.0);
        assert!((v.get(0) - 1.0 / s5).abs() < 1e-12);
        assert!((v.get(1) - 2.0 / s5).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(fit_tfidf(core::iter::empty(), 10), Err(TfidfError::EmptyCorpus));
        let mut vocab = BTreeMap::new();
        vocab.insert(String::from("p"), 1);
        assert!(matches!(
            TfidfModel::from_parts(vocab, alloc::vec![1.0], 10),
            Err(TfidfError::BadIndices(1))
        ));
    }

    #[test]
    fn stopwords_are_kept() {
        let m = fit_tfidf(["the cat", "the dog", "the end"], 3).unwrap();
        assert!(m.index_of("the").is_some());
    }
}
