//! Prediction files: `id,pred_label[,p_age_cb,...,p_suicide]`.
//!
//! Internal models write them and external models can be scored from
//! them, so both go through the same report code.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use mhscreen_core::eval::{
    auprc, calibration, confusion, pr_curve, report, BinaryScoreSet, CalibrationTable, ConfusionMatrix, EvalError,
    EvalReport, PrPoint, DEFAULT_BINS,
};
use mhscreen_core::{ClassLabel, Corpus, NUM_CLASSES};

pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub id: String,
    pub predicted: ClassLabel,
    /// Canonical class order when present.
    pub probs: Option<[f64; NUM_CLASSES]>,
}

#[derive(Debug, thiserror::Error)]
pub enum PredictionError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Malformed { path: PathBuf, line: u64, message: String },
    #[error("{path}: header must be id,pred_label optionally followed by {expected}")]
    Header { path: PathBuf, expected: String },
    #[error("{path}, line {line}: unknown label {label:?}")]
    UnknownLabel { path: PathBuf, line: u64, label: String },
    #[error("{path}, line {line}: probabilities sum to {sum}, expected 1 within {ROW_SUM_TOLERANCE}")]
    RowSum { path: PathBuf, line: u64, sum: f64 },
    #[error("{path}: ids not in the test corpus: {ids:?}")]
    UnknownIds { path: PathBuf, ids: Vec<String> },
    #[error("{path}: test ids without a prediction: {ids:?}")]
    MissingIds { path: PathBuf, ids: Vec<String> },
    #[error("{path}: id {id} appears more than once")]
    DuplicateId { path: PathBuf, id: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub fn probability_columns() -> Vec<String> {
    ClassLabel::ALL.iter().map(|c| format!("p_{}", c.as_str())).collect()
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRow>, PredictionError> {
    let file = File::open(path).map_err(|source| PredictionError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().from_reader(BufReader::new(file));
    let malformed = |line: u64, message: String| PredictionError::Malformed {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| malformed(1, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let prob_cols = probability_columns();
    let with_probs = match headers.len() {
        2 => false,
        n if n == 2 + NUM_CLASSES => true,
        _ => {
            return Err(PredictionError::Header {
                path: path.to_path_buf(),
                expected: prob_cols.join(","),
            })
        }
    };
    if headers[0] != "id" || headers[1] != "pred_label" || (with_probs && headers[2..] != prob_cols[..]) {
        return Err(PredictionError::Header {
            path: path.to_path_buf(),
            expected: prob_cols.join(","),
        });
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| malformed(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let predicted = rec[1].trim().parse().map_err(|_| PredictionError::UnknownLabel {
            path: path.to_path_buf(),
            line,
            label: rec[1].to_string(),
        })?;
        let probs = if with_probs {
            let mut p = [0.0; NUM_CLASSES];
            for (i, v) in p.iter_mut().enumerate() {
                *v = rec[2 + i]
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| (0.0..=1.0).contains(v))
                    .ok_or_else(|| malformed(line, format!("bad probability {:?}", &rec[2 + i])))?;
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(PredictionError::RowSum {
                    path: path.to_path_buf(),
                    line,
                    sum,
                });
            }
            Some(p)
        } else {
            None
        };
        rows.push(PredictionRow {
            id: rec[0].trim().to_string(),
            predicted,
            probs,
        });
    }
    Ok(rows)
}

pub fn write_predictions(path: &Path, rows: &[PredictionRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let with_probs = rows.first().is_some_and(|r| r.probs.is_some());
    let mut header = vec!["id".to_string(), "pred_label".to_string()];
    if with_probs {
        header.extend(probability_columns());
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.id.clone(), r.predicted.as_str().to_string()];
        if let Some(p) = r.probs {
            rec.extend(p.iter().map(|v| format!("{v:.17}")));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Everything the evaluate step reports about one set of predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub report: EvalReport,
    pub confusion: ConfusionMatrix,
    /// Suicide-vs-rest views; present only when probabilities were given.
    pub calibration: Option<CalibrationTable>,
    pub auprc: Option<f64>,
    pub pr_curve: Option<Vec<PrPoint>>,
}

/// Scores rows against their true labels; rows must cover `truth` exactly.
pub fn score(path: &Path, truth: &Corpus, rows: &[PredictionRow]) -> Result<Scored, PredictionError> {
    let gold: BTreeMap<&str, ClassLabel> = truth.posts().iter().map(|p| (p.id.as_str(), p.label)).collect();
    let mut seen = BTreeSet::new();
    let mut unknown = Vec::new();
    for r in rows {
        if !seen.insert(r.id.as_str()) {
            return Err(PredictionError::DuplicateId {
                path: path.to_path_buf(),
                id: r.id.clone(),
            });
        }
        if !gold.contains_key(r.id.as_str()) {
            unknown.push(r.id.clone());
        }
    }
    if !unknown.is_empty() {
        return Err(PredictionError::UnknownIds {
            path: path.to_path_buf(),
            ids: unknown,
        });
    }
    let missing: Vec<String> = gold
        .keys()
        .filter(|id| !seen.contains(*id))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(PredictionError::MissingIds {
            path: path.to_path_buf(),
            ids: missing,
        });
    }

    let y_true: Vec<ClassLabel> = rows.iter().map(|r| gold[r.id.as_str()]).collect();
    let y_pred: Vec<ClassLabel> = rows.iter().map(|r| r.predicted).collect();
    let cm = confusion(&y_true, &y_pred)?;
    let rep = report(&cm)?;

    let (mut cal, mut ap, mut curve) = (None, None, None);
    if rows.iter().all(|r| r.probs.is_some()) && !rows.is_empty() {
        let si = ClassLabel::Suicide.index();
        let scores: Vec<f64> = rows.iter().map(|r| r.probs.expect("checked above")[si]).collect();
        let positive: Vec<bool> = y_true.iter().map(|&l| l == ClassLabel::Suicide).collect();
        cal = Some(calibration(&scores, &positive, DEFAULT_BINS)?);
        let set = BinaryScoreSet::new(scores.into_iter().zip(positive).collect())?;
        match (auprc(&set), pr_curve(&set)) {
            (Ok(a), Ok(c)) => {
                ap = Some(a);
                curve = Some(c);
            }
            (Err(EvalError::OneSided), _) => {}
            (Err(e), _) | (_, Err(e)) => return Err(e.into()),
        }
    }
    Ok(Scored {
        report: rep,
        confusion: cm,
        calibration: cal,
        auprc: ap,
        pr_curve: curve,
    })
}

/// Reads and scores an external prediction file.
pub fn score_prediction_file(truth: &Corpus, path: &Path) -> Result<Scored, PredictionError> {
    let rows = read_predictions(path)?;
    score(path, truth, &rows)
}

pub fn write_lines(path: &Path, text: &str) -> std::io::Result<()> {
    let mut f = File::create(path)?;
    f.write_all(text.as_bytes())
}
