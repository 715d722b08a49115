//! Corpus files: CSV with a `text,label` header, or JSON lines.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use mhscreen_core::corpus::RawRecord;
use mhscreen_core::{ClassLabel, Corpus, CorpusError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CorpusFormat {
    Csv,
    Jsonl,
}

impl CorpusFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(CorpusFormat::Csv),
            "jsonl" | "ndjson" => Some(CorpusFormat::Jsonl),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: cannot tell the corpus format from the extension; pass --format")]
    UnknownFormat { path: PathBuf },
    #[error("{path}: header must contain `text` and `label` columns")]
    MissingColumns { path: PathBuf },
    #[error("{path}, line {line}: {message}")]
    Malformed { path: PathBuf, line: u64, message: String },
    #[error("{path}, line {line}: unknown label {label:?}")]
    UnknownLabel { path: PathBuf, line: u64, label: String },
    #[error("{path}: {source}")]
    Corpus {
        path: PathBuf,
        #[source]
        source: CorpusError,
    },
}

#[derive(Deserialize)]
struct JsonRecord {
    text: String,
    label: String,
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    source: Option<String>,
}

#[derive(Serialize)]
struct JsonOut<'a> {
    id: &'a str,
    text: &'a str,
    label: ClassLabel,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<&'a str>,
}

fn parse_label(path: &Path, line: u64, raw: &str) -> Result<ClassLabel, LoadError> {
    raw.parse().map_err(|_| LoadError::UnknownLabel {
        path: path.to_path_buf(),
        line,
        label: raw.to_string(),
    })
}

/// Reads a corpus; every text is cleaned, ids are content hashes when the
/// file has none. Line numbers in errors count the header as line 1.
pub fn load_corpus(path: &Path, format: Option<CorpusFormat>) -> Result<Corpus, LoadError> {
    let format = format
        .or_else(|| CorpusFormat::from_path(path))
        .ok_or_else(|| LoadError::UnknownFormat {
            path: path.to_path_buf(),
        })?;
    let io = |source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io)?;
    let records = match format {
        CorpusFormat::Csv => read_csv(path, file)?,
        CorpusFormat::Jsonl => read_jsonl(path, file)?,
    };
    Corpus::from_records(records).map_err(|source| LoadError::Corpus {
        path: path.to_path_buf(),
        source,
    })
}

fn read_csv(path: &Path, file: File) -> Result<Vec<RawRecord>, LoadError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(BufReader::new(file));
    let malformed = |line: u64, e: csv::Error| LoadError::Malformed {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    };
    let headers = reader.headers().map_err(|e| malformed(1, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let (Some(text_col), Some(label_col)) = (col("text"), col("label")) else {
        return Err(LoadError::MissingColumns {
            path: path.to_path_buf(),
        });
    };
    let id_col = col("id");
    let source_col = col("source");
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e)
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |c: usize| {
            row.get(c).ok_or_else(|| LoadError::Malformed {
                path: path.to_path_buf(),
                line,
                message: format!("expected at least {} fields, found {}", c + 1, row.len()),
            })
        };
        let text = field(text_col)?.to_string();
        let label = parse_label(path, line, field(label_col)?.trim())?;
        let optional = |c: Option<usize>| c.and_then(|c| row.get(c)).filter(|v| !v.is_empty()).map(String::from);
        out.push(RawRecord {
            id: optional(id_col),
            text,
            label,
            source: optional(source_col),
        });
    }
    Ok(out)
}

fn read_jsonl(path: &Path, file: File) -> Result<Vec<RawRecord>, LoadError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let n = i as u64 + 1;
        let line = line.map_err(|source| LoadError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonRecord = serde_json::from_str(&line).map_err(|e| LoadError::Malformed {
            path: path.to_path_buf(),
            line: n,
            message: e.to_string(),
        })?;
        out.push(RawRecord {
            label: parse_label(path, n, rec.label.trim())?,
            id: rec.id,
            text: rec.text,
            source: rec.source,
        });
    }
    Ok(out)
}

/// Writes JSON lines that [`load_corpus`] reads back to an equal corpus.
pub fn write_corpus_jsonl(path: &Path, c: &Corpus) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for p in c.posts() {
        let rec = JsonOut {
            id: &p.id,
            text: &p.raw_text,
            label: p.label,
            source: p.source_tag.as_deref(),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}
