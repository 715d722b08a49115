use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::corpus::Corpus;
use crate::label::{ClassLabel, NUM_CLASSES};
use crate::rng::{stream, tag};

#[derive(Debug, Clone, PartialEq)]
pub struct SplitArtifacts {
    pub train_pool: Corpus,
    pub test_pool: Corpus,
    pub ratio: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplitError {
    #[error("split ratio must lie strictly between 0 and 1, got {0}")]
    BadRatio(f64),
    #[error("class {class} has {count} post(s); stratified splitting needs at least 2")]
    TooFewPosts { class: ClassLabel, count: usize },
}

/// Per-class stratified split into train and test pools.
///
/// Each class is shuffled with its own stream derived from `(seed, class)`
/// and `round(ratio * n)` of its posts (clamped to `1..n-1`) go to the
/// training pool. Both pools keep the input order of their members.
/// Disjointness by text assumes the input was deduplicated first.
pub fn stratified_split(c: &Corpus, ratio: f64, seed: u64) -> Result<SplitArtifacts, SplitError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(SplitError::BadRatio(ratio));
    }
    let mut by_class: [Vec<usize>; NUM_CLASSES] = Default::default();
    for (i, p) in c.posts().iter().enumerate() {
        by_class[p.label.index()].push(i);
    }
    let mut in_train = alloc::vec![false; c.len()];
    for (ci, members) in by_class.iter_mut().enumerate() {
        let n = members.len();
        if n == 0 {
            continue;
        }
        if n < 2 {
            return Err(SplitError::TooFewPosts {
                class: ClassLabel::ALL[ci],
                count: n,
            });
        }
        let n_train = libm::round(ratio * n as f64).clamp(1.0, (n - 1) as f64) as usize;
        let mut rng = stream(seed, &[tag::SPLIT, ci as u64]);
        members.shuffle(&mut rng);
        for &i in &members[..n_train] {
            in_train[i] = true;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (p, t) in c.posts().iter().zip(in_train) {
        if t {
            train.push(p.clone());
        } else {
            test.push(p.clone());
        }
    }
    Ok(SplitArtifacts {
        train_pool: Corpus::new(train).expect("subset of a valid corpus"),
        test_pool: Corpus::new(test).expect("subset of a valid corpus"),
        ratio,
        seed,
    })
}
