//! Report renderers. All output is a pure function of its input, so
//! reruns are byte-identical.

use std::fmt::Write as _;

use mhscreen_core::eval::{CalibrationTable, ConfusionMatrix, EvalReport, PrPoint};
use mhscreen_core::features::{ClassProfile, CorrelationMatrix};
use mhscreen_core::pipeline::DistributionRow;
use mhscreen_core::ClassLabel;
use serde::{Deserialize, Serialize};

use crate::predictions::Scored;

pub fn table1_csv(rows: &[DistributionRow]) -> String {
    let mut s = String::from("class,before_ds,after_ds,after_eda_dd,test\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{}",
            r.class.as_str(),
            r.before_ds,
            r.after_ds,
            r.after_eda_dd,
            r.test
        )
        .unwrap();
    }
    let t = totals(rows);
    writeln!(s, "total,{},{},{},{}", t[0], t[1], t[2], t[3]).unwrap();
    s
}

fn totals(rows: &[DistributionRow]) -> [usize; 4] {
    rows.iter().fold([0; 4], |a, r| {
        [
            a[0] + r.before_ds,
            a[1] + r.after_ds,
            a[2] + r.after_eda_dd,
            a[3] + r.test,
        ]
    })
}

pub fn table1_text(rows: &[DistributionRow]) -> String {
    let mut s = format!(
        "{:<22} {:>10} {:>10} {:>15} {:>8}\n",
        "Class", "Before DS", "After DS", "After EDA & DD", "Test"
    );
    for r in rows {
        writeln!(
            s,
            "{:<22} {:>10} {:>10} {:>15} {:>8}",
            r.class.display_name(),
            r.before_ds,
            r.after_ds,
            r.after_eda_dd,
            r.test
        )
        .unwrap();
    }
    let t = totals(rows);
    writeln!(s, "{:<22} {:>10} {:>10} {:>15} {:>8}", "Total", t[0], t[1], t[2], t[3]).unwrap();
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutput {
    pub model: String,
    pub report: EvalReport,
    /// Rows are true labels, columns predictions, both in `classes` order.
    pub classes: Vec<ClassLabel>,
    pub confusion: Vec<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auprc_suicide: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration_suicide: Option<CalibrationTable>,
}

impl EvalOutput {
    pub fn new(model: impl Into<String>, scored: &Scored) -> Self {
        EvalOutput {
            model: model.into(),
            report: scored.report.clone(),
            classes: ClassLabel::ALL.to_vec(),
            confusion: scored.confusion.counts.iter().map(|r| r.to_vec()).collect(),
            auprc_suicide: scored.auprc,
            calibration_suicide: scored.calibration.clone(),
        }
    }
}

pub fn eval_text(model: &str, r: &EvalReport, auprc: Option<f64>) -> String {
    let mut s = format!("Model: {model}\n\n");
    writeln!(
        s,
        "{:<22} {:>9} {:>9} {:>9} {:>8}",
        "Class", "Precision", "Recall", "F1", "Support"
    )
    .unwrap();
    for m in &r.per_class {
        writeln!(
            s,
            "{:<22} {:>9.4} {:>9.4} {:>9.4} {:>8}",
            m.class.display_name(),
            m.precision,
            m.recall,
            m.f1,
            m.support
        )
        .unwrap();
    }
    s.push('\n');
    writeln!(
        s,
        "{:<22} {:>9.4} {:>9.4} {:>9.4} {:>8}",
        "Macro avg", r.macro_precision, r.macro_recall, r.macro_f1, r.support
    )
    .unwrap();
    writeln!(
        s,
        "{:<22} {:>9.4} {:>9.4} {:>9.4} {:>8}",
        "Weighted avg", r.weighted_precision, r.weighted_recall, r.weighted_f1, r.support
    )
    .unwrap();
    writeln!(s, "{:<22} {:>9.4}", "Accuracy", r.accuracy).unwrap();
    if let Some(a) = auprc {
        writeln!(s, "{:<22} {:>9.4}", "AUPRC (suicide)", a).unwrap();
    }
    if r.zero_division > 0 {
        writeln!(
            s,
            "\n{} precision/recall values set to 0 (empty denominator)",
            r.zero_division
        )
        .unwrap();
    }
    s
}

pub fn confusion_csv(cm: &ConfusionMatrix) -> String {
    let mut s = String::from("true\\pred");
    for c in ClassLabel::ALL {
        write!(s, ",{}", c.as_str()).unwrap();
    }
    s.push('\n');
    for (c, row) in ClassLabel::ALL.iter().zip(&cm.counts) {
        s.push_str(c.as_str());
        for v in row {
            write!(s, ",{v}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn calibration_csv(t: &CalibrationTable) -> String {
    let mut s = String::from("lower,upper,mean_predicted,observed_frequency,count\n");
    for b in &t.bins {
        writeln!(
            s,
            "{},{},{},{},{}",
            b.lower, b.upper, b.mean_predicted, b.observed_frequency, b.count
        )
        .unwrap();
    }
    s
}

pub fn pr_curve_csv(points: &[PrPoint]) -> String {
    let mut s = String::from("threshold,precision,recall\n");
    for p in points {
        writeln!(s, "{},{},{}", p.threshold, p.precision, p.recall).unwrap();
    }
    s
}

pub fn top_terms_csv(profiles: &[ClassProfile]) -> String {
    let mut s = String::from("class,rank,term,mean_weight\n");
    for p in profiles {
        for (i, (term, w)) in p.top_terms.iter().enumerate() {
            writeln!(s, "{},{},{},{}", p.class.as_str(), i + 1, term, w).unwrap();
        }
    }
    s
}

pub fn top_terms_text(profiles: &[ClassProfile]) -> String {
    let mut s = String::new();
    for p in profiles {
        let terms: Vec<&str> = p.top_terms.iter().map(|(t, _)| t.as_str()).collect();
        writeln!(s, "{:<22} {}", p.class.display_name(), terms.join(", ")).unwrap();
    }
    s
}

/// Undefined correlations (constant profiles) are left empty.
pub fn correlation_csv(m: &CorrelationMatrix) -> String {
    let mut s = String::from("class");
    for c in &m.classes {
        write!(s, ",{}", c.as_str()).unwrap();
    }
    s.push('\n');
    for (c, row) in m.classes.iter().zip(&m.values) {
        s.push_str(c.as_str());
        for v in row {
            match v {
                Some(v) => write!(s, ",{v}").unwrap(),
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDelta {
    pub class: ClassLabel,
    pub f1_unbalanced: f64,
    pub f1_balanced: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub model: String,
    pub unbalanced: EvalReport,
    pub balanced: EvalReport,
    pub macro_f1_unbalanced: f64,
    pub macro_f1_balanced: f64,
    pub macro_f1_delta: f64,
    pub accuracy_delta: f64,
    pub weighted_f1_delta: f64,
    pub per_class: Vec<ClassDelta>,
}

impl AblationReport {
    /// Deltas are balanced minus unbalanced.
    pub fn new(model: impl Into<String>, unbalanced: EvalReport, balanced: EvalReport) -> Self {
        let per_class = unbalanced
            .per_class
            .iter()
            .zip(&balanced.per_class)
            .map(|(u, b)| ClassDelta {
                class: u.class,
                f1_unbalanced: u.f1,
                f1_balanced: b.f1,
                delta: b.f1 - u.f1,
            })
            .collect();
        AblationReport {
            model: model.into(),
            macro_f1_unbalanced: unbalanced.macro_f1,
            macro_f1_balanced: balanced.macro_f1,
            macro_f1_delta: balanced.macro_f1 - unbalanced.macro_f1,
            accuracy_delta: balanced.accuracy - unbalanced.accuracy,
            weighted_f1_delta: balanced.weighted_f1 - unbalanced.weighted_f1,
            per_class,
            unbalanced,
            balanced,
        }
    }

    pub fn text(&self) -> String {
        let mut s = format!("Model: {}\n\n", self.model);
        writeln!(s, "{:<22} {:>11} {:>11} {:>9}", "", "Unbalanced", "Balanced", "Delta").unwrap();
        let row = |s: &mut String, name: &str, u: f64, b: f64| {
            writeln!(s, "{:<22} {:>11.4} {:>11.4} {:>+9.4}", name, u, b, b - u).unwrap();
        };
        row(&mut s, "Accuracy", self.unbalanced.accuracy, self.balanced.accuracy);
        row(&mut s, "Macro F1", self.macro_f1_unbalanced, self.macro_f1_balanced);
        row(
            &mut s,
            "Weighted F1",
            self.unbalanced.weighted_f1,
            self.balanced.weighted_f1,
        );
        s.push('\n');
        for d in &self.per_class {
            row(&mut s, d.class.display_name(), d.f1_unbalanced, d.f1_balanced);
        }
        s
    }
}
