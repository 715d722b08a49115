use alloc::string::String;
use alloc::vec::Vec;

use super::tfidf::TfidfModel;
use crate::corpus::Corpus;
use crate::label::ClassLabel;

/// Mean TF-IDF vector of one class and its highest-weighted terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProfile {
    pub class: ClassLabel,
    pub mean_vector: Vec<f64>,
    pub top_terms: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("class {0} has no posts in the corpus")]
    ClassAbsent(ClassLabel),
    #[error("correlation needs at least two profiles, got {0}")]
    TooFewProfiles(usize),
    #[error("profile vectors differ in length")]
    LengthMismatch,
}

/// Profiles for `classes`, ranking every vocabulary term.
pub fn class_profiles(
    m: &TfidfModel,
    c: &Corpus,
    classes: &[ClassLabel],
    k: usize,
) -> Result<Vec<ClassProfile>, ProfileError> {
    class_profiles_filtered(m, c, classes, k, |_| true)
}

/// Profiles whose `top_terms` only rank terms accepted by `keep`; the mean
/// vectors always span the whole vocabulary. Ties rank lexicographically.
pub fn class_profiles_filtered<F: Fn(&str) -> bool>(
    m: &TfidfModel,
    c: &Corpus,
    classes: &[ClassLabel],
    k: usize,
    keep: F,
) -> Result<Vec<ClassProfile>, ProfileError> {
    classes
        .iter()
        .map(|&class| {
            let n = c.count(class);
            if n == 0 {
                return Err(ProfileError::ClassAbsent(class));
            }
            let mut mean = alloc::vec![0.0; m.len()];
            for p in c.of_class(class) {
                for &(i, w) in m.transform(&p.clean_text).entries() {
                    mean[i] += w;
                }
            }
            for v in &mut mean {
                *v /= n as f64;
            }
            let mut ranked: Vec<(String, f64)> = mean
                .iter()
                .enumerate()
                .filter(|&(_, &w)| w > 0.0)
                .filter_map(|(i, &w)| m.term(i).filter(|t| keep(t)).map(|t| (String::from(t), w)))
                .collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            ranked.truncate(k);
            Ok(ClassProfile {
                class,
                mean_vector: mean,
                top_terms: ranked,
            })
        })
        .collect()
}

/// Pairwise Pearson correlations between profile mean vectors. Entries
/// involving a constant vector are undefined and reported as `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub classes: Vec<ClassLabel>,
    pub values: Vec<Vec<Option<f64>>>,
}

pub fn class_correlation(profiles: &[ClassProfile]) -> Result<CorrelationMatrix, ProfileError> {
    if profiles.len() < 2 {
        return Err(ProfileError::TooFewProfiles(profiles.len()));
    }
    let dim = profiles[0].mean_vector.len();
    if profiles.iter().any(|p| p.mean_vector.len() != dim) {
        return Err(ProfileError::LengthMismatch);
    }
    let centered: Vec<(Vec<f64>, f64)> = profiles
        .iter()
        .map(|p| {
            let mean = p.mean_vector.iter().sum::<f64>() / dim as f64;
            let dev: Vec<f64> = p.mean_vector.iter().map(|v| v - mean).collect();
            let ss = dev.iter().map(|d| d * d).sum::<f64>();
            (dev, libm::sqrt(ss))
        })
        .collect();
    let n = profiles.len();
    let mut values = alloc::vec![alloc::vec![None; n]; n];
    for i in 0..n {
        for j in i..n {
            let (a, na) = &centered[i];
            let (b, nb) = &centered[j];
            let r = if *na == 0.0 || *nb == 0.0 {
                None
            } else if i == j {
                Some(1.0)
            } else {
                let cov: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                Some((cov / (na * nb)).clamp(-1.0, 1.0))
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        classes: profiles.iter().map(|p| p.class).collect(),
        values,
    })
}
