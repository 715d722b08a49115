use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const NUM_CLASSES: usize = 10;

/// The ten screening categories. Declaration order is alphabetical and is
/// the canonical class order for matrices, tie-breaking and serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    AgeCb,
    Anxiety,
    Bipolar,
    EthnicityCb,
    GenderCb,
    NonSuicide,
    PersonalityDisorder,
    ReligionCb,
    Stress,
    Suicide,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown class label {0:?}")]
pub struct LabelParseError(pub String);

impl ClassLabel {
    pub const ALL: [ClassLabel; NUM_CLASSES] = [
        ClassLabel::AgeCb,
        ClassLabel::Anxiety,
        ClassLabel::Bipolar,
        ClassLabel::EthnicityCb,
        ClassLabel::GenderCb,
        ClassLabel::NonSuicide,
        ClassLabel::PersonalityDisorder,
        ClassLabel::ReligionCb,
        ClassLabel::Stress,
        ClassLabel::Suicide,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::AgeCb => "age_cb",
            ClassLabel::Anxiety => "anxiety",
            ClassLabel::Bipolar => "bipolar",
            ClassLabel::EthnicityCb => "ethnicity_cb",
            ClassLabel::GenderCb => "gender_cb",
            ClassLabel::NonSuicide => "non_suicide",
            ClassLabel::PersonalityDisorder => "personality_disorder",
            ClassLabel::ReligionCb => "religion_cb",
            ClassLabel::Stress => "stress",
            ClassLabel::Suicide => "suicide",
        }
    }

    /// Human-facing name used in reports.
    pub fn display_name(self) -> &'static str {
        match self {
            ClassLabel::AgeCb => "Age CB",
            ClassLabel::Anxiety => "Anxiety",
            ClassLabel::Bipolar => "Bipolar",
            ClassLabel::EthnicityCb => "Ethnicity CB",
            ClassLabel::GenderCb => "Gender CB",
            ClassLabel::NonSuicide => "Non-Suicide",
            ClassLabel::PersonalityDisorder => "Personality Disorder",
            ClassLabel::ReligionCb => "Religion CB",
            ClassLabel::Stress => "Stress",
            ClassLabel::Suicide => "Suicide",
        }
    }

    /// Position in the canonical class order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<ClassLabel> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = LabelParseError;

    /// Case-insensitive; spaces, hyphens and underscores are interchangeable.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut key = String::with_capacity(s.len());
        let mut pending_sep = false;
        for ch in s.trim().chars() {
            if ch == ' ' || ch == '_' || ch == '-' {
                pending_sep = !key.is_empty();
                continue;
            }
            if pending_sep {
                key.push('_');
                pending_sep = false;
            }
            key.extend(ch.to_lowercase());
        }
        ClassLabel::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == key)
            .ok_or_else(|| LabelParseError(String::from(s)))
    }
}

impl Serialize for ClassLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ClassLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_is_alphabetical() {
        let names: Vec<_> = ClassLabel::ALL.iter().map(|c| c.as_str()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        for (i, c) in ClassLabel::ALL.iter().enumerate() {
            assert_eq!(c.index(), i);
        }
    }

    #[test]
    fn parses_loose_spellings() {
        assert_eq!("Personality Disorder".parse(), Ok(ClassLabel::PersonalityDisorder));
        assert_eq!("personality_disorder".parse(), Ok(ClassLabel::PersonalityDisorder));
        assert_eq!("Non-Suicide".parse(), Ok(ClassLabel::NonSuicide));
        assert_eq!(" AGE CB ".parse(), Ok(ClassLabel::AgeCb));
        for c in ClassLabel::ALL {
            assert_eq!(c.display_name().parse(), Ok(c));
        }
    }

    #[test]
    fn rejects_unknown() {
        assert!("depresion".parse::<ClassLabel>().is_err());
        assert!("".parse::<ClassLabel>().is_err());
        assert!("age".parse::<ClassLabel>().is_err());
    }
}
