use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::features::TfidfModel;
use crate::label::ClassLabel;
use crate::models::{LinearClassifier, ModelKind};

pub const DEFAULT_HIGHLIGHTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenAttribution {
    pub token: String,
    /// Byte offsets of each occurrence in the cleaned text.
    pub occurrences: Vec<usize>,
    pub contribution: f64,
}

/// Token contributions toward one class's centered logit.
///
/// `base_value + Σ contributions` equals `z_target − mean_c z_c`; the base
/// value is the centered bias, i.e. the output for a text with no features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub target: ClassLabel,
    pub base_value: f64,
    pub centered_logit: f64,
    pub tokens: Vec<TokenAttribution>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExplainError {
    #[error("attributions need a multinomial logistic model, got {0}")]
    UnsupportedModel(ModelKind),
    #[error("model has no class {0}")]
    UnknownClass(ClassLabel),
    #[error("model expects {model} features but the vectorizer has {vectorizer}")]
    DimensionMismatch { model: usize, vectorizer: usize },
}

/// Exact linear attribution of `clean_text` toward `target`.
///
/// Feature `j` contributes `(w_target,j − mean_c w_c,j) · x_j`, where `x` is
/// the TF-IDF vector of the text. A unigram's contribution goes to its
/// token; a bigram's is split equally between its two tokens. Every
/// distinct token of the text is listed, in order of first occurrence;
/// tokens outside the vocabulary get 0.
pub fn attribute(
    m: &LinearClassifier,
    v: &TfidfModel,
    clean_text: &str,
    target: ClassLabel,
) -> Result<Attribution, ExplainError> {
    if m.kind != ModelKind::MultinomialLogistic {
        return Err(ExplainError::UnsupportedModel(m.kind));
    }
    if m.num_features() != v.len() {
        return Err(ExplainError::DimensionMismatch {
            model: m.num_features(),
            vectorizer: v.len(),
        });
    }
    let t = m.class_position(target).ok_or(ExplainError::UnknownClass(target))?;
    let k = m.classes.len() as f64;

    let mut tokens: Vec<TokenAttribution> = Vec::new();
    let mut offset = 0;
    for word in clean_text.split(' ') {
        if !word.is_empty() {
            match tokens.iter_mut().find(|a| a.token == word) {
                Some(a) => a.occurrences.push(offset),
                None => tokens.push(TokenAttribution {
                    token: String::from(word),
                    occurrences: alloc::vec![offset],
                    contribution: 0.0,
                }),
            }
        }
        offset += word.len() + 1;
    }

    let x = v.transform(clean_text);
    let mut credit = |token: &str, amount: f64| {
        if let Some(a) = tokens.iter_mut().find(|a| a.token == token) {
            a.contribution += amount;
        }
    };
    let mut feature_total = 0.0;
    for &(j, xj) in x.entries() {
        let mean_w = m.weights.iter().map(|row| row[j]).sum::<f64>() / k;
        let c = (m.weights[t][j] - mean_w) * xj;
        feature_total += c;
        let term = v.term(j).unwrap_or_default();
        match term.split_once(' ') {
            Some((a, b)) if a != b => {
                credit(a, c / 2.0);
                credit(b, c / 2.0);
            }
            Some((a, _)) => credit(a, c),
            None => credit(term, c),
        }
    }
    let base_value = m.bias[t] - m.bias.iter().sum::<f64>() / k;
    Ok(Attribution {
        target,
        base_value,
        centered_logit: base_value + feature_total,
        tokens,
    })
}

/// The `k` tokens with the largest positive contributions, highest first.
/// Equal contributions keep text order.
pub fn highlight(attrs: &[TokenAttribution], k: usize) -> Vec<TokenAttribution> {
    let mut positive: Vec<&TokenAttribution> = attrs.iter().filter(|a| a.contribution > 0.0).collect();
    positive.sort_by(|a, b| b.contribution.total_cmp(&a.contribution));
    positive.into_iter().take(k).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::fit_tfidf;
    use crate::models::TrainingMeta;
    use alloc::collections::BTreeMap;
    use alloc::vec;

    fn model(weights: Vec<Vec<f64>>, bias: Vec<f64>) -> LinearClassifier {
        LinearClassifier {
            kind: ModelKind::MultinomialLogistic,
            classes: ClassLabel::ALL[..weights.len()].to_vec(),
            weights,
            bias,
            chosen_c: 1.0,
            training_meta: TrainingMeta {
                seed: 0,
                folds: 0,
                c_grid: vec![],
                cv_scores: vec![],
                converged: true,
                epochs: 0,
                final_grad_norm: 0.0,
            },
        }
    }

    fn attr(token: &str, contribution: f64) -> TokenAttribution {
        TokenAttribution {
            token: token.into(),
            occurrences: vec![0],
            contribution,
        }
    }

    #[test]
    fn one_feature_hand_formula() {
        let mut vocab = BTreeMap::new();
        vocab.insert(String::from("kill"), 0);
        let v = TfidfModel::from_parts(vocab, vec![1.0], 10).unwrap();
        let mut w = vec![vec![0.0]; 10];
        w[9][0] = 2.0;
        let m = model(w, vec![0.0; 10]);
        let a = attribute(&m, &v, "kill", ClassLabel::Suicide).unwrap();
        assert!((a.tokens[0].contribution - 1.8).abs() < 1e-15);
        assert!((a.centered_logit - 1.8).abs() < 1e-15);
    }

    #[test]
    fn zero_vector_gives_zero_contributions() {
        let v = fit_tfidf(["a b"], 10).unwrap();
        let m = model(vec![vec![1.0; v.len()], vec![-1.0; v.len()]], vec![0.5, 0.0]);
        let a = attribute(&m, &v, "zz yy zz", ClassLabel::AgeCb).unwrap();
        assert!(a.tokens.iter().all(|t| t.contribution == 0.0));
        assert_eq!(a.tokens[0].occurrences, [0, 6]);
        assert_eq!(a.base_value, 0.25);
    }

    #[test]
    fn rejects_svm_and_unknown_class() {
        let v = fit_tfidf(["a"], 10).unwrap();
        let mut m = model(vec![vec![0.0]; 2], vec![0.0; 2]);
        assert_eq!(
            attribute(&m, &v, "a", ClassLabel::Suicide),
            Err(ExplainError::UnknownClass(ClassLabel::Suicide))
        );
        m.kind = ModelKind::LinearSvmOvr;
        assert!(matches!(
            attribute(&m, &v, "a", ClassLabel::AgeCb),
            Err(ExplainError::UnsupportedModel(_))
        ));
    }

    #[test]
    fn highlight_cases() {
        let attrs = vec![attr("a", 0.5), attr("b", 0.9), attr("c", 0.1)];
        let top: Vec<_> = highlight(&attrs, 2).into_iter().map(|a| a.token).collect();
        assert_eq!(top, ["b", "a"]);
        assert_eq!(highlight(&attrs, 10).len(), 3);
        assert!(highlight(&[attr("x", -1.0), attr("y", 0.0)], 3).is_empty());
    }
}
