//! Token-level argument unit recognition and classification.
//!
//! Corpus handling, annotation aggregation, inter-annotator agreement, the
//! token/segment/sentence evaluation measures, candidate sampling, a
//! topic-conditioned sequence tagger and sliding-window evaluation.

pub mod aggregate;
pub mod agreement;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod sampling;
pub mod seed;
pub mod tagger;
pub mod window;

pub use corpus::{
    Corpus, LabeledSentence, Segment, Split, SplitScheme, StanceLabel, Topic,
};
pub use error::{Error, Result};
