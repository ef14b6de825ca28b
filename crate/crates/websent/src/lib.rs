//! Sentence segmentation and word tokenization for noisy web text.
//!
//! The crate bundles:
//! - a paragraph-aware corpus model with tiered (orthographic/syntactic)
//!   sentence boundaries, standoff annotations and CoNLL-U import/export,
//! - a rule-based word tokenizer that keeps URLs, emoticons, punctuation runs
//!   and known abbreviations intact,
//! - an unsupervised Punkt-style boundary detector with web-specific
//!   post-processing rules,
//! - tokenization and three-scenario sentence evaluation metrics,
//! - multi-annotator agreement statistics and majority aggregation,
//! - an automatic classifier for segmentation error categories.

pub mod agreement;
pub mod conllu;
pub mod corpus;
pub mod error;
pub mod error_analysis;
pub mod eval;
pub mod segmenter;
pub mod tokenizer;

pub use error::{Error, Result};
