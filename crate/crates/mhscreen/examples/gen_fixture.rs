//! Regenerates `fixtures/synthetic_corpus.jsonl`.
//!
//! cargo run -p mhscreen --example gen_fixture -- fixtures/synthetic_corpus.jsonl

use std::fs::File;
use std::io::{BufWriter, Write};

use mhscreen_core::ClassLabel;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const COMMON: &[&str] = &[
    "i", "you", "the", "a", "and", "to", "it", "is", "was", "that", "this", "my", "me", "so", "just", "really",
    "today", "people", "know", "think", "time", "day", "again", "never", "always", "about", "what", "with", "they",
    "he", "she", "we", "get", "got", "even", "still", "anymore", "like", "want", "going", "make", "everyone", "school",
    "work", "home", "friends", "night", "week", "thing", "things", "lot", "much", "more", "why", "how", "online",
    "post", "said", "say", "tell", "told", "keep", "feel", "feeling", "life", "good", "bad", "now",
];

const GROUP_CB: &[&str] = &[
    "bully", "bullied", "insult", "mocked", "called", "stupid", "jokes", "hate", "loser",
];
const GROUP_MH: &[&str] = &[
    "therapy", "doctor", "meds", "mind", "sleep", "tired", "struggle", "help", "cope",
];

fn class_words(c: ClassLabel) -> (&'static [&'static str], &'static [&'static str]) {
    match c {
        ClassLabel::AgeCb => (
            &[
                "old",
                "boomer",
                "grandpa",
                "young",
                "kid",
                "age",
                "generation",
                "elderly",
                "teen",
                "retire",
            ],
            GROUP_CB,
        ),
        ClassLabel::EthnicityCb => (
            &[
                "race",
                "racist",
                "skin",
                "color",
                "immigrant",
                "ethnic",
                "accent",
                "country",
                "minority",
                "slur",
            ],
            GROUP_CB,
        ),
        ClassLabel::GenderCb => (
            &[
                "women", "girls", "sexist", "kitchen", "feminist", "gender", "men", "guys", "female", "misogyny",
            ],
            GROUP_CB,
        ),
        ClassLabel::ReligionCb => (
            &[
                "religion",
                "church",
                "muslim",
                "christian",
                "faith",
                "god",
                "prayer",
                "jewish",
                "mosque",
                "belief",
            ],
            GROUP_CB,
        ),
        ClassLabel::NonSuicide => (
            &[
                "fun", "game", "movie", "weekend", "party", "laugh", "music", "trip", "dinner", "happy",
            ],
            &["friends", "great", "enjoy", "love", "nice", "cool"],
        ),
        ClassLabel::Suicide => (
            &[
                "die",
                "end",
                "suicide",
                "kill",
                "goodbye",
                "worthless",
                "pain",
                "burden",
                "gone",
                "hopeless",
            ],
            GROUP_MH,
        ),
        ClassLabel::Anxiety => (
            &[
                "anxiety",
                "panic",
                "worry",
                "nervous",
                "heart",
                "racing",
                "attack",
                "fear",
                "breathe",
                "overthinking",
            ],
            GROUP_MH,
        ),
        ClassLabel::Bipolar => (
            &[
                "bipolar",
                "manic",
                "mania",
                "episode",
                "mood",
                "lithium",
                "swing",
                "depressive",
                "energy",
                "cycle",
            ],
            GROUP_MH,
        ),
        ClassLabel::Stress => (
            &[
                "stress",
                "deadline",
                "pressure",
                "exam",
                "overwhelmed",
                "busy",
                "boss",
                "bills",
                "exhausted",
                "workload",
            ],
            GROUP_MH,
        ),
        ClassLabel::PersonalityDisorder => (
            &[
                "bpd",
                "personality",
                "abandonment",
                "identity",
                "splitting",
                "empty",
                "unstable",
                "relationships",
                "disorder",
                "impulsive",
            ],
            GROUP_MH,
        ),
    }
}

const SIZES: [(ClassLabel, usize); 10] = [
    (ClassLabel::AgeCb, 300),
    (ClassLabel::Anxiety, 260),
    (ClassLabel::Bipolar, 200),
    (ClassLabel::EthnicityCb, 300),
    (ClassLabel::GenderCb, 280),
    (ClassLabel::NonSuicide, 320),
    (ClassLabel::PersonalityDisorder, 120),
    (ClassLabel::ReligionCb, 300),
    (ClassLabel::Stress, 180),
    (ClassLabel::Suicide, 320),
];

fn post(rng: &mut ChaCha8Rng, c: ClassLabel) -> String {
    let (own, group) = class_words(c);
    let len = rng.gen_range(10..28);
    let mut words: Vec<&str> = Vec::with_capacity(len);
    for _ in 0..len {
        let r: f64 = rng.gen();
        let pool = if r < 0.22 {
            own
        } else if r < 0.32 {
            group
        } else if r < 0.36 {
            // Cross-class noise keeps the task from being trivially separable.
            class_words(ClassLabel::ALL[rng.gen_range(0..10)]).0
        } else {
            COMMON
        };
        words.push(pool.choose(rng).expect("pools are non-empty"));
    }
    let mut s = words.join(" ");
    if rng.gen_bool(0.3) {
        s.push_str(if rng.gen_bool(0.5) { "!" } else { "..." });
    }
    if rng.gen_bool(0.05) {
        s.push_str(" https://example.com/x");
    }
    let mut chars = s.chars();
    match chars.next() {
        Some(f) => f.to_uppercase().chain(chars).collect(),
        None => s,
    }
}

fn main() -> std::io::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "fixtures/synthetic_corpus.jsonl".into());
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut rows = Vec::new();
    for (c, n) in SIZES {
        for _ in 0..n {
            rows.push((post(&mut rng, c), c));
        }
    }
    // A few exact repeats for the deduplication step.
    for _ in 0..25 {
        let i = rng.gen_range(0..rows.len());
        rows.push(rows[i].clone());
    }
    rows.shuffle(&mut rng);
    let mut w = BufWriter::new(File::create(&out)?);
    for (i, (text, label)) in rows.iter().enumerate() {
        let rec = serde_json::json!({
            "id": format!("syn-{:05}", i + 1),
            "text": text,
            "label": label.as_str(),
            "source": "synthetic",
        });
        writeln!(w, "{rec}")?;
    }
    w.flush()?;
    eprintln!("{} posts written to {out}", rows.len());
    Ok(())
}
