//! Moderator review queue as a replayable state machine.
//!
//! State only changes by applying [`Event`]s, so the same event sequence
//! always rebuilds the same queue. Persisting the events is the caller's job.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::explain::{
    attribute, highlight, narrate, ChatBackend, ExplainError, NarrativeSource, TokenAttribution, DEFAULT_HIGHLIGHTS,
    DISCLAIMER,
};
use crate::features::TfidfModel;
use crate::label::ClassLabel;
use crate::models::{LinearClassifier, ModelError};
use crate::text::clean_text;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Top-class probability below this marks a flag as low confidence.
    pub flag: f64,
    pub urgent_suicide: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            flag: 0.5,
            urgent_suicide: 0.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Urgency {
    Urgent,
    Routine,
}

pub fn urgency_for(predicted: ClassLabel, confidence: f64, t: &Thresholds) -> Urgency {
    if predicted == ClassLabel::Suicide && confidence >= t.urgent_suicide {
        Urgency::Urgent
    } else {
        Urgency::Routine
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagStatus {
    Pending,
    Confirmed,
    Dismissed,
    Recategorized,
}

impl FlagStatus {
    pub const ALL: [FlagStatus; 4] = [
        FlagStatus::Pending,
        FlagStatus::Confirmed,
        FlagStatus::Dismissed,
        FlagStatus::Recategorized,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FlagStatus::Pending => "pending",
            FlagStatus::Confirmed => "confirmed",
            FlagStatus::Dismissed => "dismissed",
            FlagStatus::Recategorized => "recategorized",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|st| st.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionAction {
    Confirm,
    Dismiss,
    Recategorize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeratorDecision {
    pub flag_id: String,
    pub action: DecisionAction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new_label: Option<ClassLabel>,
    pub moderator_id: String,
    pub decided_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProbability {
    pub label: ClassLabel,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub id: String,
    pub post_text: String,
    pub clean_text: String,
    pub predicted: ClassLabel,
    pub confidence: f64,
    pub probabilities: Vec<ClassProbability>,
    pub highlights: Vec<TokenAttribution>,
    pub narrative: String,
    pub narrative_source: NarrativeSource,
    pub urgency: Urgency,
    pub low_confidence: bool,
    pub status: FlagStatus,
    pub created_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<ModeratorDecision>,
    pub disclaimer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    FlagCreated { seq: u64, flag: Box<Flag> },
    DecisionRecorded { seq: u64, decision: ModeratorDecision },
}

impl Event {
    pub fn seq(&self) -> u64 {
        match self {
            Event::FlagCreated { seq, .. } | Event::DecisionRecorded { seq, .. } => *seq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReviewError {
    #[error("no flag with id {0}")]
    UnknownFlag(String),
    #[error("flag {id} was already decided ({status:?})")]
    AlreadyDecided { id: String, status: FlagStatus },
    #[error("recategorize requires new_label")]
    MissingNewLabel,
    #[error("new_label is only allowed with recategorize")]
    UnexpectedNewLabel,
    #[error("new_label {0} equals the predicted label")]
    SameLabel(ClassLabel),
    #[error("flag id {0} already exists")]
    DuplicateFlag(String),
    #[error("new flags must be pending")]
    NotPending,
    #[error("expected event seq {expected}, got {got}")]
    SequenceGap { expected: u64, got: u64 },
    #[error("event {seq} differs from the event already applied at that position")]
    ConflictingReplay { seq: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Applied {
    Changed,
    /// Already applied earlier; state untouched.
    Duplicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueueOrder {
    #[default]
    CreatedAt,
    UrgencyThenCreatedAt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueueQuery {
    /// Empty means every status.
    pub statuses: Vec<FlagStatus>,
    pub order: QueueOrder,
    pub offset: usize,
    pub limit: usize,
}

impl Default for QueueQuery {
    fn default() -> Self {
        QueueQuery {
            statuses: Vec::new(),
            order: QueueOrder::CreatedAt,
            offset: 0,
            limit: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueuePage {
    pub flags: Vec<Flag>,
    pub total: usize,
}

/// Serialized form of a [`QueueState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub last_seq: u64,
    pub flags: Vec<Flag>,
    /// One fingerprint per applied event, to catch a replay that
    /// disagrees with history.
    pub event_fingerprints: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueueState {
    flags: Vec<Flag>,
    index: BTreeMap<String, usize>,
    fingerprints: Vec<u64>,
}

fn fingerprint(e: &Event) -> u64 {
    // FNV-1a over the debug rendering.
    let s = format!("{:?}", e);
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3)
    })
}

impl QueueState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last_seq(&self) -> u64 {
        self.fingerprints.len() as u64
    }

    pub fn next_seq(&self) -> u64 {
        self.last_seq() + 1
    }

    /// Deterministic id for the next created flag.
    pub fn next_flag_id(&self) -> String {
        format!("flag-{:06}", self.flags.len() + 1)
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Flag> {
        self.index.get(id).map(|&i| &self.flags[i])
    }

    /// Flags in creation order.
    pub fn flags(&self) -> &[Flag] {
        &self.flags
    }

    /// Checks a decision against the current state without changing it.
    pub fn validate_decision(&self, d: &ModeratorDecision) -> Result<(), ReviewError> {
        let flag = self
            .get(&d.flag_id)
            .ok_or_else(|| ReviewError::UnknownFlag(d.flag_id.clone()))?;
        if flag.status != FlagStatus::Pending {
            return Err(ReviewError::AlreadyDecided {
                id: flag.id.clone(),
                status: flag.status,
            });
        }
        match (d.action, d.new_label) {
            (DecisionAction::Recategorize, None) => Err(ReviewError::MissingNewLabel),
            (DecisionAction::Recategorize, Some(l)) if l == flag.predicted => Err(ReviewError::SameLabel(l)),
            (DecisionAction::Confirm | DecisionAction::Dismiss, Some(_)) => Err(ReviewError::UnexpectedNewLabel),
            _ => Ok(()),
        }
    }

    pub fn validate_flag(&self, f: &Flag) -> Result<(), ReviewError> {
        if self.index.contains_key(&f.id) {
            return Err(ReviewError::DuplicateFlag(f.id.clone()));
        }
        if f.status != FlagStatus::Pending || f.decision.is_some() {
            return Err(ReviewError::NotPending);
        }
        Ok(())
    }

    /// Applies one event. An event whose seq was already applied is a
    /// no-op if it matches what was applied, an error otherwise.
    pub fn apply(&mut self, e: &Event) -> Result<Applied, ReviewError> {
        let seq = e.seq();
        if seq >= 1 && seq <= self.last_seq() {
            return if self.fingerprints[(seq - 1) as usize] == fingerprint(e) {
                Ok(Applied::Duplicate)
            } else {
                Err(ReviewError::ConflictingReplay { seq })
            };
        }
        if seq != self.next_seq() {
            return Err(ReviewError::SequenceGap {
                expected: self.next_seq(),
                got: seq,
            });
        }
        match e {
            Event::FlagCreated { flag, .. } => {
                self.validate_flag(flag)?;
                self.index.insert(flag.id.clone(), self.flags.len());
                self.flags.push((**flag).clone());
            }
            Event::DecisionRecorded { decision, .. } => {
                self.validate_decision(decision)?;
                let i = self.index[&decision.flag_id];
                let flag = &mut self.flags[i];
                flag.status = match decision.action {
                    DecisionAction::Confirm => FlagStatus::Confirmed,
                    DecisionAction::Dismiss => FlagStatus::Dismissed,
                    DecisionAction::Recategorize => FlagStatus::Recategorized,
                };
                flag.decision = Some(decision.clone());
            }
        }
        self.fingerprints.push(fingerprint(e));
        Ok(Applied::Changed)
    }

    pub fn replay<'a, I: IntoIterator<Item = &'a Event>>(events: I) -> Result<Self, ReviewError> {
        let mut s = Self::new();
        for e in events {
            s.apply(e)?;
        }
        Ok(s)
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            last_seq: self.last_seq(),
            flags: self.flags.clone(),
            event_fingerprints: self.fingerprints.clone(),
        }
    }

    pub fn from_snapshot(s: Snapshot) -> Result<Self, ReviewError> {
        if s.event_fingerprints.len() as u64 != s.last_seq {
            return Err(ReviewError::SequenceGap {
                expected: s.event_fingerprints.len() as u64,
                got: s.last_seq,
            });
        }
        let mut index = BTreeMap::new();
        for (i, f) in s.flags.iter().enumerate() {
            if index.insert(f.id.clone(), i).is_some() {
                return Err(ReviewError::DuplicateFlag(f.id.clone()));
            }
        }
        Ok(QueueState {
            flags: s.flags,
            index,
            fingerprints: s.event_fingerprints,
        })
    }

    /// Filtered, ordered page of flags. Ties keep creation order.
    pub fn list_queue(&self, q: &QueueQuery) -> QueuePage {
        let mut hits: Vec<&Flag> = self
            .flags
            .iter()
            .filter(|f| q.statuses.is_empty() || q.statuses.contains(&f.status))
            .collect();
        if q.order == QueueOrder::UrgencyThenCreatedAt {
            hits.sort_by_key(|f| f.urgency);
        }
        QueuePage {
            total: hits.len(),
            flags: hits.into_iter().skip(q.offset).take(q.limit).cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScreenError {
    #[error("post is empty after cleaning")]
    EmptyText,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
}

/// Everything needed to turn a post into a pending flag.
pub struct Screener<'a> {
    pub model: &'a LinearClassifier,
    pub vectorizer: &'a TfidfModel,
    pub thresholds: Thresholds,
    pub llm: &'a dyn ChatBackend,
    pub highlights: usize,
}

impl<'a> Screener<'a> {
    pub fn new(model: &'a LinearClassifier, vectorizer: &'a TfidfModel, llm: &'a dyn ChatBackend) -> Self {
        Screener {
            model,
            vectorizer,
            thresholds: Thresholds::default(),
            llm,
            highlights: DEFAULT_HIGHLIGHTS,
        }
    }

    /// Clean, score, attribute and narrate. Every non-empty post yields a
    /// flag; thresholds only set urgency and the low-confidence marker.
    pub fn screen(&self, id: String, text: &str, created_at: String) -> Result<Flag, ScreenError> {
        let clean = clean_text(text);
        if clean.is_empty() {
            return Err(ScreenError::EmptyText);
        }
        let x = self.vectorizer.transform(&clean);
        let dist = self.model.predict_proba(&x)?;
        let (predicted, confidence) = dist.argmax();
        let attribution = attribute(self.model, self.vectorizer, &clean, predicted)?;
        let highlights = highlight(&attribution.tokens, self.highlights);
        let narration = narrate(self.llm, &clean, predicted, confidence, &highlights);
        Ok(Flag {
            id,
            post_text: String::from(text),
            clean_text: clean,
            predicted,
            confidence,
            probabilities: dist
                .classes
                .iter()
                .zip(&dist.probs)
                .map(|(&label, &probability)| ClassProbability { label, probability })
                .collect(),
            highlights,
            narrative: narration.text,
            narrative_source: narration.source,
            urgency: urgency_for(predicted, confidence, &self.thresholds),
            low_confidence: confidence < self.thresholds.flag,
            status: FlagStatus::Pending,
            created_at,
            decision: None,
            disclaimer: String::from(DISCLAIMER),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn flag(id: &str, urgency: Urgency) -> Flag {
        Flag {
            id: id.into(),
            post_text: "x".into(),
            clean_text: "x".into(),
            predicted: ClassLabel::Suicide,
            confidence: 0.9,
            probabilities: vec![],
            highlights: vec![],
            narrative: String::new(),
            narrative_source: NarrativeSource::TemplateFallback,
            urgency,
            low_confidence: false,
            status: FlagStatus::Pending,
            created_at: "2024-01-01T00:00:00Z".into(),
            decision: None,
            disclaimer: DISCLAIMER.into(),
        }
    }

    fn decision(id: &str, action: DecisionAction, new_label: Option<ClassLabel>) -> ModeratorDecision {
        ModeratorDecision {
            flag_id: id.into(),
            action,
            new_label,
            moderator_id: "m1".into(),
            decided_at: "2024-01-01T00:01:00Z".into(),
            note: None,
        }
    }

    fn created(seq: u64, id: &str, u: Urgency) -> Event {
        Event::FlagCreated {
            seq,
            flag: Box::new(flag(id, u)),
        }
    }

    #[test]
    fn urgency_rule() {
        let t = Thresholds::default();
        assert_eq!(urgency_for(ClassLabel::Suicide, 0.8, &t), Urgency::Urgent);
        assert_eq!(urgency_for(ClassLabel::Suicide, 0.79, &t), Urgency::Routine);
        assert_eq!(urgency_for(ClassLabel::Stress, 0.99, &t), Urgency::Routine);
    }

    #[test]
    fn decisions_and_transitions() {
        let mut s = QueueState::replay(&[created(1, "a", Urgency::Routine)]).unwrap();
        let confirm = Event::DecisionRecorded {
            seq: 2,
            decision: decision("a", DecisionAction::Confirm, None),
        };
        assert_eq!(s.apply(&confirm), Ok(Applied::Changed));
        assert_eq!(s.get("a").unwrap().status, FlagStatus::Confirmed);
        assert_eq!(s.apply(&confirm), Ok(Applied::Duplicate));
        let again = decision("a", DecisionAction::Dismiss, None);
        assert!(matches!(
            s.validate_decision(&again),
            Err(ReviewError::AlreadyDecided { .. })
        ));
        assert_eq!(
            s.apply(&Event::DecisionRecorded {
                seq: 3,
                decision: again
            }),
            Err(ReviewError::AlreadyDecided {
                id: "a".into(),
                status: FlagStatus::Confirmed
            })
        );
        assert_eq!(s.last_seq(), 2);
    }

    #[test]
    fn decision_validation() {
        let s = QueueState::replay(&[created(1, "a", Urgency::Routine)]).unwrap();
        let v = |a, l| s.validate_decision(&decision("a", a, l));
        assert_eq!(v(DecisionAction::Recategorize, None), Err(ReviewError::MissingNewLabel));
        assert_eq!(
            v(DecisionAction::Recategorize, Some(ClassLabel::Suicide)),
            Err(ReviewError::SameLabel(ClassLabel::Suicide))
        );
        assert_eq!(v(DecisionAction::Recategorize, Some(ClassLabel::Stress)), Ok(()));
        assert_eq!(
            v(DecisionAction::Confirm, Some(ClassLabel::Stress)),
            Err(ReviewError::UnexpectedNewLabel)
        );
        assert_eq!(
            s.validate_decision(&decision("zz", DecisionAction::Confirm, None)),
            Err(ReviewError::UnknownFlag("zz".into()))
        );
    }

    #[test]
    fn sequence_rules() {
        let mut s = QueueState::new();
        assert_eq!(
            s.apply(&created(2, "a", Urgency::Routine)),
            Err(ReviewError::SequenceGap { expected: 1, got: 2 })
        );
        s.apply(&created(1, "a", Urgency::Routine)).unwrap();
        assert_eq!(
            s.apply(&created(1, "b", Urgency::Routine)),
            Err(ReviewError::ConflictingReplay { seq: 1 })
        );
        assert_eq!(
            s.apply(&created(2, "a", Urgency::Routine)),
            Err(ReviewError::DuplicateFlag("a".into()))
        );
    }

    #[test]
    fn queue_ordering_and_paging() {
        assert_eq!(QueueState::new().list_queue(&QueueQuery::default()).total, 0);
        let s = QueueState::replay(&[
            created(1, "a", Urgency::Routine),
            created(2, "b", Urgency::Routine),
            created(3, "c", Urgency::Urgent),
        ])
        .unwrap();
        let ids = |q: &QueueQuery| s.list_queue(q).flags.into_iter().map(|f| f.id).collect::<Vec<_>>();
        let mut q = QueueQuery::default();
        assert_eq!(ids(&q), ["a", "b", "c"]);
        q.order = QueueOrder::UrgencyThenCreatedAt;
        assert_eq!(ids(&q), ["c", "a", "b"]);
        q.offset = 2;
        assert_eq!(ids(&q), ["b"]);
        q.offset = 10;
        assert!(ids(&q).is_empty());
        assert_eq!(s.list_queue(&q).total, 3);
        q.offset = 0;
        q.statuses = vec![FlagStatus::Confirmed];
        assert!(ids(&q).is_empty());
    }

    #[test]
    fn snapshot_round_trip() {
        let s = QueueState::replay(&[created(1, "a", Urgency::Urgent)]).unwrap();
        let back = QueueState::from_snapshot(s.snapshot()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.next_flag_id(), "flag-000002");
    }
}
