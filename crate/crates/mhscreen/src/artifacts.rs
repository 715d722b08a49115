//! Versioned JSON artifacts for fitted vectorizers and classifiers.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use mhscreen_core::features::{TfidfError, TfidfModel};
use mhscreen_core::models::{LinearClassifier, ModelError, ModelKind, TrainingMeta};
use mhscreen_core::ClassLabel;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const VECTORIZER_VERSION: u32 = 1;
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ArtifactError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: unsupported artifact version {found} (expected {expected})")]
    Version { path: PathBuf, found: u32, expected: u32 },
    #[error("{path}: unsupported ngram_range {found:?}")]
    NgramRange { path: PathBuf, found: (usize, usize) },
    #[error("{path}: {source}")]
    Vectorizer {
        path: PathBuf,
        #[source]
        source: TfidfError,
    },
    #[error("{path}: {source}")]
    Model {
        path: PathBuf,
        #[source]
        source: ModelError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorizerArtifact {
    pub version: u32,
    pub max_features: usize,
    pub ngram_range: (usize, usize),
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
}

impl VectorizerArtifact {
    pub fn from_model(m: &TfidfModel) -> Self {
        VectorizerArtifact {
            version: VECTORIZER_VERSION,
            max_features: m.max_features(),
            ngram_range: m.ngram_range(),
            vocabulary: m.vocabulary().clone(),
            idf: m.idf().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub version: u32,
    pub kind: ModelKind,
    pub classes: Vec<ClassLabel>,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    #[serde(rename = "chosen_C")]
    pub chosen_c: f64,
    pub training_meta: TrainingMeta,
}

impl ModelArtifact {
    pub fn from_model(m: &LinearClassifier) -> Self {
        ModelArtifact {
            version: MODEL_VERSION,
            kind: m.kind,
            classes: m.classes.clone(),
            weights: m.weights.clone(),
            bias: m.bias.clone(),
            chosen_c: m.chosen_c,
            training_meta: m.training_meta.clone(),
        }
    }

    pub fn into_model(self) -> LinearClassifier {
        LinearClassifier {
            kind: self.kind,
            classes: self.classes,
            weights: self.weights,
            bias: self.bias,
            chosen_c: self.chosen_c,
            training_meta: self.training_meta,
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ArtifactError> {
    let bytes = fs::read(path).map_err(|source| ArtifactError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_slice(&bytes).map_err(|source| ArtifactError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Pretty JSON with a trailing newline. Map keys are sorted, so equal
/// values always produce equal bytes.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ArtifactError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| ArtifactError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|source| ArtifactError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save_vectorizer(path: &Path, m: &TfidfModel) -> Result<(), ArtifactError> {
    write_json(path, &VectorizerArtifact::from_model(m))
}

pub fn load_vectorizer(path: &Path) -> Result<TfidfModel, ArtifactError> {
    let a: VectorizerArtifact = read_json(path)?;
    if a.version != VECTORIZER_VERSION {
        return Err(ArtifactError::Version {
            path: path.to_path_buf(),
            found: a.version,
            expected: VECTORIZER_VERSION,
        });
    }
    if a.ngram_range != (1, 2) {
        return Err(ArtifactError::NgramRange {
            path: path.to_path_buf(),
            found: a.ngram_range,
        });
    }
    TfidfModel::from_parts(a.vocabulary, a.idf, a.max_features).map_err(|source| ArtifactError::Vectorizer {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save_model(path: &Path, m: &LinearClassifier) -> Result<(), ArtifactError> {
    write_json(path, &ModelArtifact::from_model(m))
}

pub fn load_model(path: &Path) -> Result<LinearClassifier, ArtifactError> {
    let a: ModelArtifact = read_json(path)?;
    if a.version != MODEL_VERSION {
        return Err(ArtifactError::Version {
            path: path.to_path_buf(),
            found: a.version,
            expected: MODEL_VERSION,
        });
    }
    let m = a.into_model();
    m.validate().map_err(|source| ArtifactError::Model {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(m)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}
