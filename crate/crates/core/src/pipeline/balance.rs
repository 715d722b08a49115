use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::eda::{augment_with_rng, EdaOp};
use super::lexicon::{Stopwords, SynonymLexicon};
use super::plan::BalancePlan;
use crate::corpus::{Corpus, LabeledPost};
use crate::label::{ClassLabel, NUM_CLASSES};
use crate::rng::{stream, tag};

/// Per-class accounting of one balancing run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassBalance {
    pub class: ClassLabel,
    pub before: usize,
    pub after_downsample: usize,
    pub after_augment: usize,
    pub target: usize,
    pub attempts: usize,
    /// Augmentations dropped because their text already existed.
    pub duplicates_dropped: usize,
}

impl ClassBalance {
    pub fn shortfall(&self) -> usize {
        self.target.saturating_sub(self.after_augment)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceOutcome {
    pub corpus: Corpus,
    pub per_class: [ClassBalance; NUM_CLASSES],
}

fn class_members(c: &Corpus) -> [Vec<usize>; NUM_CLASSES] {
    let mut by_class: [Vec<usize>; NUM_CLASSES] = Default::default();
    for (i, p) in c.posts().iter().enumerate() {
        by_class[p.label.index()].push(i);
    }
    by_class
}

fn downsample_indices(c: &Corpus, plan: &BalancePlan) -> Vec<usize> {
    let mut keep = Vec::with_capacity(c.len());
    for (ci, members) in class_members(c).into_iter().enumerate() {
        let cap = plan.caps[ci];
        if members.len() <= cap {
            keep.extend(members);
        } else {
            let mut rng = stream(plan.seed, &[tag::DOWNSAMPLE, ci as u64]);
            keep.extend(index::sample(&mut rng, members.len(), cap).iter().map(|k| members[k]));
        }
    }
    keep.sort_unstable();
    keep
}

/// Caps each class at `plan.cap(class)` by seeded sampling without
/// replacement. Survivors keep their input order.
pub fn downsample(c: &Corpus, plan: &BalancePlan) -> Corpus {
    let posts = downsample_indices(c, plan)
        .into_iter()
        .map(|i| c.posts()[i].clone())
        .collect();
    Corpus::new(posts).expect("subset of a valid corpus")
}

/// Downsamples, then oversamples every class below its target with EDA.
///
/// Expects a deduplicated training pool. See [`balance_excluding`].
pub fn balance(train_pool: &Corpus, plan: &BalancePlan, lex: &SynonymLexicon) -> BalanceOutcome {
    balance_excluding(train_pool, plan, lex, &BTreeSet::new())
}

/// Like [`balance`], but synthetic posts must also avoid every text in
/// `excluded` (typically the held-out test pool).
///
/// Each class draws from its own stream derived from `(plan.seed, class)`
/// and checks candidates against the downsampled pool, `excluded` and its
/// own accepted augmentations, so classes can be processed independently.
/// A final pass drops the (rare) augmentations that coincide across
/// classes, keeping the one from the earlier class.
pub fn balance_excluding(
    train_pool: &Corpus,
    plan: &BalancePlan,
    lex: &SynonymLexicon,
    excluded: &BTreeSet<&str>,
) -> BalanceOutcome {
    let before = *train_pool.class_counts();
    let reduced = downsample(train_pool, plan);
    let base_texts: BTreeSet<&str> = reduced.texts().collect();
    let stop = Stopwords::english();

    let mut per_class = [ClassBalance {
        class: ClassLabel::AgeCb,
        before: 0,
        after_downsample: 0,
        after_augment: 0,
        target: 0,
        attempts: 0,
        duplicates_dropped: 0,
    }; NUM_CLASSES];

    let sources = class_members(&reduced);
    let mut synthetic: Vec<Vec<LabeledPost>> = Vec::with_capacity(NUM_CLASSES);
    for class in ClassLabel::ALL {
        let ci = class.index();
        let members: Vec<&LabeledPost> = sources[ci].iter().map(|&i| &reduced.posts()[i]).collect();
        let (made, attempts, dropped) = augment_class(class, &members, plan, lex, &stop, &base_texts, excluded);
        per_class[ci] = ClassBalance {
            class,
            before: before[ci],
            after_downsample: members.len(),
            after_augment: members.len() + made.len(),
            target: plan.target(class),
            attempts,
            duplicates_dropped: dropped,
        };
        synthetic.push(made);
    }

    let mut posts = reduced.into_posts();
    let mut cross: BTreeSet<String> = BTreeSet::new();
    for (ci, made) in synthetic.into_iter().enumerate() {
        for p in made {
            if cross.insert(p.clean_text.clone()) {
                posts.push(p);
            } else {
                per_class[ci].after_augment -= 1;
                per_class[ci].duplicates_dropped += 1;
            }
        }
    }
    BalanceOutcome {
        corpus: Corpus::new(posts).expect("augmented ids are unique"),
        per_class,
    }
}

fn augment_class(
    class: ClassLabel,
    members: &[&LabeledPost],
    plan: &BalancePlan,
    lex: &SynonymLexicon,
    stop: &Stopwords,
    base_texts: &BTreeSet<&str>,
    excluded: &BTreeSet<&str>,
) -> (Vec<LabeledPost>, usize, usize) {
    let target = plan.target(class);
    let mut made = Vec::new();
    if members.is_empty() || members.len() >= target {
        return (made, 0, 0);
    }
    let budget = plan.retry_factor * (target - members.len());
    let mut rng = stream(plan.seed, &[tag::AUGMENT, class.index() as u64]);
    let mut own: BTreeSet<String> = BTreeSet::new();
    let (mut attempts, mut dropped) = (0, 0);
    while members.len() + made.len() < target && attempts < budget {
        attempts += 1;
        let src = members.choose(&mut rng).expect("non-empty");
        let op = EdaOp::ALL[rng.gen_range(0..EdaOp::ALL.len())];
        let Ok(mut aug) = augment_with_rng(src, op, plan.eda_alpha, lex, stop, &mut rng) else {
            continue;
        };
        let text = aug.clean_text.as_str();
        if text.is_empty() || base_texts.contains(text) || excluded.contains(text) || own.contains(text) {
            dropped += 1;
            continue;
        }
        own.insert(aug.clean_text.clone());
        aug.id = format!("{}~eda{}", src.id, made.len() + 1);
        made.push(aug);
    }
    (made, attempts, dropped)
}
