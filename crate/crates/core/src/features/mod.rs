//! TF-IDF featurization and per-class lexical profiles.

mod profile;
mod sparse;
mod tfidf;

pub use profile::{
    class_correlation, class_profiles, class_profiles_filtered, ClassProfile, CorrelationMatrix, ProfileError,
};
pub use sparse::SparseVector;
pub use tfidf::{fit_tfidf, for_each_term, TfidfError, TfidfModel, DEFAULT_MAX_FEATURES};
