use alloc::format;
use alloc::string::String;

use crate::label::{ClassLabel, NUM_CLASSES};

pub const DEFAULT_CAP: usize = 2400;
pub const DEFAULT_EDA_ALPHA: f64 = 0.1;
pub const DEFAULT_RETRY_FACTOR: usize = 20;
pub const DEFAULT_SEED: u64 = 42;

/// Per-class downsampling caps and augmentation targets.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancePlan {
    pub caps: [usize; NUM_CLASSES],
    pub targets: [usize; NUM_CLASSES],
    pub eda_alpha: f64,
    /// Augmentation attempts allowed per missing post.
    pub retry_factor: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{class}: cap must be positive")]
    ZeroCap { class: ClassLabel },
    #[error("{class}: cap {cap} exceeds target {target}")]
    CapAboveTarget {
        class: ClassLabel,
        cap: usize,
        target: usize,
    },
    #[error("eda_alpha must lie strictly between 0 and 1, got {0}")]
    BadAlpha(f64),
}

impl Default for BalancePlan {
    /// Cap and target of 2,400 for every class.
    fn default() -> Self {
        BalancePlan::uniform(DEFAULT_CAP, DEFAULT_CAP, DEFAULT_SEED)
    }
}

impl BalancePlan {
    pub fn uniform(cap: usize, target: usize, seed: u64) -> Self {
        BalancePlan {
            caps: [cap; NUM_CLASSES],
            targets: [target; NUM_CLASSES],
            eda_alpha: DEFAULT_EDA_ALPHA,
            retry_factor: DEFAULT_RETRY_FACTOR,
            seed,
        }
    }

    pub fn cap(&self, c: ClassLabel) -> usize {
        self.caps[c.index()]
    }

    pub fn target(&self, c: ClassLabel) -> usize {
        self.targets[c.index()]
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        for class in ClassLabel::ALL {
            let (cap, target) = (self.cap(class), self.target(class));
            if cap == 0 {
                return Err(PlanError::ZeroCap { class });
            }
            if cap > target {
                return Err(PlanError::CapAboveTarget { class, cap, target });
            }
        }
        if !(self.eda_alpha > 0.0 && self.eda_alpha < 1.0) {
            return Err(PlanError::BadAlpha(self.eda_alpha));
        }
        Ok(())
    }

    /// Parses the `key = value` plan format.
    ///
    /// Recognized keys: `seed`, `eda_alpha`, `retry_factor`, `cap`, `target`
    /// (defaults for every class) and `cap.<class>` / `target.<class>`.
    /// Class-specific keys win over the defaults regardless of line order.
    /// `#` starts a comment.
    pub fn parse(src: &str) -> Result<Self, PlanError> {
        let mut plan = BalancePlan::default();
        let mut cap_override = [None; NUM_CLASSES];
        let mut target_override = [None; NUM_CLASSES];
        for (n, raw_line) in src.lines().enumerate() {
            let line_no = n + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| PlanError::Syntax { line: line_no, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let int = |v: &str| {
                v.replace(['_', ','], "")
                    .parse::<usize>()
                    .map_err(|_| syntax(format!("{key}: expected a non-negative integer, got {v:?}")))
            };
            match key {
                "seed" => {
                    plan.seed = value
                        .parse()
                        .map_err(|_| syntax(format!("seed: expected an integer, got {value:?}")))?
                }
                "eda_alpha" => {
                    plan.eda_alpha = value
                        .parse()
                        .map_err(|_| syntax(format!("eda_alpha: expected a number, got {value:?}")))?
                }
                "retry_factor" => plan.retry_factor = int(value)?,
                "cap" => plan.caps = [int(value)?; NUM_CLASSES],
                "target" => plan.targets = [int(value)?; NUM_CLASSES],
                _ => {
                    let (kind, class) = key
                        .split_once('.')
                        .ok_or_else(|| syntax(format!("unknown key {key:?}")))?;
                    let class: ClassLabel = class
                        .parse()
                        .map_err(|_| syntax(format!("unknown class in key {key:?}")))?;
                    match kind {
                        "cap" => cap_override[class.index()] = Some(int(value)?),
                        "target" => target_override[class.index()] = Some(int(value)?),
                        _ => return Err(syntax(format!("unknown key {key:?}"))),
                    }
                }
            }
        }
        for i in 0..NUM_CLASSES {
            if let Some(c) = cap_override[i] {
                plan.caps[i] = c;
            }
            if let Some(t) = target_override[i] {
                plan.targets[i] = t;
            }
        }
        plan.validate()?;
        Ok(plan)
    }

    /// Writes every key explicitly, one class per line.
    pub fn to_config_string(&self) -> String {
        let mut out = String::from("# balance plan\n");
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("eda_alpha = {}\n", self.eda_alpha));
        out.push_str(&format!("retry_factor = {}\n", self.retry_factor));
        for c in ClassLabel::ALL {
            out.push_str(&format!("cap.{} = {}\n", c, self.cap(c)));
        }
        for c in ClassLabel::ALL {
            out.push_str(&format!("target.{} = {}\n", c, self.target(c)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_table() {
        let p = BalancePlan::default();
        assert!(p.caps.iter().all(|&c| c == 2400));
        assert!(p.targets.iter().all(|&c| c == 2400));
        assert_eq!(p.eda_alpha, 0.1);
        p.validate().unwrap();
    }

    #[test]
    fn parse_overrides_and_roundtrip() {
        let src = "target.stress = 3000\ncap = 100 # all\ntarget = 200\nseed=7\n";
        let p = BalancePlan::parse(src).unwrap();
        assert_eq!(p.cap(ClassLabel::Anxiety), 100);
        assert_eq!(p.target(ClassLabel::Stress), 3000);
        assert_eq!(p.target(ClassLabel::Suicide), 200);
        assert_eq!(p.seed, 7);
        assert_eq!(BalancePlan::parse(&p.to_config_string()).unwrap(), p);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = BalancePlan::parse("seed = 1\nbogus\n").unwrap_err();
        assert!(matches!(err, PlanError::Syntax { line: 2, .. }));
        let err = BalancePlan::parse("cap.depresion = 3").unwrap_err();
        assert!(matches!(err, PlanError::Syntax { line: 1, .. }));
        assert!(matches!(
            BalancePlan::parse("cap = 10\ntarget = 5"),
            Err(PlanError::CapAboveTarget { .. })
        ));
        assert!(matches!(
            BalancePlan::parse("eda_alpha = 1.0"),
            Err(PlanError::BadAlpha(_))
        ));
        assert!(matches!(BalancePlan::parse("cap = 0"), Err(PlanError::ZeroCap { .. })));
    }
}
