//! Core algorithms for the mhscreen toolkit.
//!
//! Everything in this crate is pure computation over in-memory values and
//! only needs an allocator: text normalization, split-then-balance data
//! preparation, TF-IDF featurization, linear classifiers, evaluation
//! metrics, exact linear attributions and the moderator review state
//! machine. File formats, networking and the command line live in the
//! `mhscreen` crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod corpus;
pub mod eval;
pub mod explain;
pub mod features;
pub mod label;
pub mod models;
pub mod pipeline;
pub mod review;
pub mod rng;
pub mod text;

pub use crate::corpus::{Corpus, CorpusError, LabeledPost};
pub use crate::label::{ClassLabel, LabelParseError, NUM_CLASSES};
pub use crate::text::clean_text;
