//! Split-then-balance data preparation.
//!
//! The corpus is deduplicated, split per class into a training pool and a
//! held-out test pool, and only the training pool is rebalanced: classes
//! above their cap are downsampled and classes below their target are
//! oversampled with EDA perturbations, dropping any synthetic text that
//! already exists. The test pool keeps its natural distribution.

mod balance;
mod eda;
mod lexicon;
mod plan;
mod split;

pub use balance::{balance, balance_excluding, downsample, BalanceOutcome, ClassBalance};
pub use eda::{augment_with_rng, eda_augment, EdaError, EdaOp};
pub use lexicon::{LexiconError, Stopwords, SynonymLexicon};
pub use plan::{BalancePlan, PlanError, DEFAULT_EDA_ALPHA, DEFAULT_RETRY_FACTOR};
pub use split::{stratified_split, SplitArtifacts, SplitError};

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::corpus::{deduplicate, Corpus, Deduplicated};
use crate::label::{ClassLabel, NUM_CLASSES};

/// One row of the class-distribution table produced by [`prepare`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistributionRow {
    pub class: ClassLabel,
    pub before_ds: usize,
    pub after_ds: usize,
    pub after_eda_dd: usize,
    pub test: usize,
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub dedup_removed: usize,
    pub label_conflicts: usize,
    pub split: SplitArtifacts,
    pub balance: BalanceOutcome,
    pub table: Vec<DistributionRow>,
}

/// dedup → stratified split → balance of the training pool only.
///
/// Augmentations are also kept out of the test pool's text set.
pub fn prepare(
    corpus: &Corpus,
    ratio: f64,
    plan: &BalancePlan,
    lexicon: &SynonymLexicon,
) -> Result<Prepared, SplitError> {
    let Deduplicated {
        corpus: unique,
        removed,
        label_conflicts,
    } = deduplicate(corpus);
    let split = stratified_split(&unique, ratio, plan.seed)?;
    let test_texts: BTreeSet<&str> = split.test_pool.texts().collect();
    let balance = balance_excluding(&split.train_pool, plan, lexicon, &test_texts);
    let table = distribution_table(&balance, &split.test_pool);
    Ok(Prepared {
        dedup_removed: removed,
        label_conflicts: label_conflicts.len(),
        split,
        balance,
        table,
    })
}

pub fn distribution_table(balance: &BalanceOutcome, test_pool: &Corpus) -> Vec<DistributionRow> {
    (0..NUM_CLASSES)
        .map(|i| {
            let c = &balance.per_class[i];
            DistributionRow {
                class: c.class,
                before_ds: c.before,
                after_ds: c.after_downsample,
                after_eda_dd: c.after_augment,
                test: test_pool.class_counts()[i],
            }
        })
        .collect()
}
