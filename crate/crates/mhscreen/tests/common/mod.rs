#![allow(dead_code)]

use mhscreen_core::corpus::RawRecord;
use mhscreen_core::features::{fit_tfidf, TfidfModel};
use mhscreen_core::models::{fit_fixed_c, LinearClassifier, ModelKind, OptimizerOptions};
use mhscreen_core::{ClassLabel, Corpus};

pub const CLASS_WORDS: [&str; 10] = [
    "boomer", "panic", "manic", "racist", "sexist", "party", "bpd", "church", "deadline", "goodbye",
];

/// Ten short posts per class, each led by its class word.
pub fn tiny_corpus() -> Corpus {
    let fillers = [
        "today",
        "again",
        "at school",
        "online",
        "with friends",
        "all week",
        "at night",
        "now",
        "still",
        "lately",
    ];
    let records = ClassLabel::ALL.iter().zip(CLASS_WORDS).flat_map(|(&label, w)| {
        fillers.iter().map(move |f| RawRecord {
            id: None,
            text: format!("{w} {w} {f}"),
            label,
            source: None,
        })
    });
    Corpus::from_records(records).unwrap()
}

pub fn tiny_model() -> (LinearClassifier, TfidfModel) {
    let c = tiny_corpus();
    let v = fit_tfidf(c.texts(), 1000).unwrap();
    let x: Vec<_> = c.posts().iter().map(|p| v.transform(&p.clean_text)).collect();
    let y = c.labels();
    let m = fit_fixed_c(
        ModelKind::MultinomialLogistic,
        &x,
        &y,
        v.len(),
        100.0,
        &OptimizerOptions::default(),
    )
    .unwrap();
    (m, v)
}

use std::fs;
use std::path::Path;

use mhscreen::store::{snapshot_path_for, EventStore};
use mhscreen_core::explain::{NarrativeSource, DISCLAIMER};
use mhscreen_core::review::{DecisionAction, Flag, FlagStatus, ModeratorDecision, Urgency};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn pending_flag(n: usize, urgent: bool) -> Flag {
    Flag {
        id: String::new(),
        post_text: format!("post number {n}"),
        clean_text: format!("post number {n}"),
        predicted: ClassLabel::Suicide,
        confidence: if urgent { 0.9 } else { 0.6 },
        probabilities: vec![],
        highlights: vec![],
        narrative: "n".into(),
        narrative_source: NarrativeSource::TemplateFallback,
        urgency: if urgent { Urgency::Urgent } else { Urgency::Routine },
        low_confidence: false,
        status: FlagStatus::Pending,
        created_at: format!("2024-05-01T00:{:02}:{:02}Z", n / 60 % 60, n % 60),
        decision: None,
        disclaimer: DISCLAIMER.into(),
    }
}

pub fn decision(flag_id: &str, action: DecisionAction) -> ModeratorDecision {
    ModeratorDecision {
        flag_id: flag_id.into(),
        action,
        new_label: (action == DecisionAction::Recategorize).then_some(ClassLabel::Stress),
        moderator_id: "mod-1".into(),
        decided_at: "2024-05-02T00:00:00Z".into(),
        note: None,
    }
}

/// Commits one random event: a new flag, or a decision on a pending one.
pub fn random_commit(store: &mut EventStore, rng: &mut ChaCha8Rng) {
    let pending: Vec<String> = store
        .state()
        .flags()
        .iter()
        .filter(|f| f.status == FlagStatus::Pending)
        .map(|f| f.id.clone())
        .collect();
    if pending.is_empty() || rng.gen_bool(0.55) {
        let n = store.state().len() + 1;
        let urgent = rng.gen_bool(0.3);
        store.record_flag(pending_flag(n, urgent)).unwrap();
    } else {
        let id = &pending[rng.gen_range(0..pending.len())];
        let action = [
            DecisionAction::Confirm,
            DecisionAction::Dismiss,
            DecisionAction::Recategorize,
        ][rng.gen_range(0..3)];
        store.record_decision(decision(id, action)).unwrap();
    }
}

/// Commits `n` events, then for every prefix k rebuilds the on-disk state a
/// crash right after event k could leave (log cut at k plus a torn piece of
/// event k+1, latest snapshot at or before k) and recovers from it. Returns
/// the first k whose recovered state differs from the state after k commits.
pub fn crash_replay_sweep(n: usize, snapshot_every: u64, seed: u64) -> Result<(), String> {
    let work = tempfile::tempdir().unwrap();
    let log = work.path().join("events.jsonl");
    let (mut store, _) = EventStore::open(&log, snapshot_every).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut offsets = vec![0u64];
    let mut expected = vec![serde_json::to_string(&store.state().snapshot()).unwrap()];
    let mut snapshots: Vec<Option<Vec<u8>>> = vec![None];
    for k in 1..=n {
        random_commit(&mut store, &mut rng);
        offsets.push(fs::metadata(&log).unwrap().len());
        expected.push(serde_json::to_string(&store.state().snapshot()).unwrap());
        snapshots.push(if (k as u64).is_multiple_of(snapshot_every) {
            Some(fs::read(snapshot_path_for(&log)).unwrap())
        } else {
            None
        });
    }
    drop(store);
    let full = fs::read(&log).unwrap();

    for k in 0..=n {
        let dir = tempfile::tempdir().unwrap();
        let cut_log = dir.path().join("events.jsonl");
        let end = offsets[k] as usize;
        let mut bytes = full[..end].to_vec();
        if k < n {
            let next = offsets[k + 1] as usize;
            bytes.extend_from_slice(&full[end..end + (next - end) / 2]);
        }
        fs::write(&cut_log, &bytes).unwrap();
        if let Some(snap) = (0..=k).rev().find_map(|j| snapshots[j].as_ref()) {
            fs::write(snapshot_path_for(&cut_log), snap).unwrap();
        }
        let (recovered, _) = EventStore::open(&cut_log, snapshot_every).map_err(|e| format!("k={k}: {e}"))?;
        let got = serde_json::to_string(&recovered.state().snapshot()).unwrap();
        if got != expected[k] {
            return Err(format!("k={k}: recovered state differs"));
        }
        if fs::metadata(&cut_log).unwrap().len() != offsets[k] {
            return Err(format!("k={k}: torn record not truncated"));
        }
    }
    Ok(())
}

pub fn read_to_string(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}
