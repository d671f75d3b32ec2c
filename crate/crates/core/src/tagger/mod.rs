//! Topic-conditioned stance tagging.
//!
//! A linear first-order sequence model over the labels PRO, CON and NON,
//! trained with an averaged structured perceptron. Every token feature can be
//! conjoined with the topic id, and the topic name itself is visible through
//! the `intopic` features, so the same sentence may be tagged differently
//! under different topics.

mod decode;
mod features;
mod model;
mod train;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use decode::{decode, SequenceScores};
pub use features::{featurize, in_topic, shape, TokenFeatures};
pub use model::{TaggerModel, TrainingInfo, MODEL_FORMAT, MODEL_VERSION};
pub use train::{targets, train, TrainConfig};

use crate::corpus::{LabeledSentence, StanceLabel, Topic};
use crate::error::{Error, Result};
use crate::metrics::{sentence_label, sentence_tie_seed, Predictions};

/// Granularity of training targets and predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// One label per token.
    Token,
    /// One label per sentence, repeated on each token.
    Sentence,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Token => "token",
            Level::Sentence => "sentence",
        })
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "token" => Ok(Level::Token),
            "sentence" => Ok(Level::Sentence),
            other => Err(Error::invalid(format!("unknown level {other:?} (expected token or sentence)"))),
        }
    }
}

/// Anything that assigns one stance label per token given the topic.
pub trait SequenceLabeler: Send + Sync {
    fn label(&self, tokens: &[String], topic: &Topic) -> Vec<StanceLabel>;
}

/// Predicts one fixed label everywhere: the most frequent training label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorityBaseline {
    pub label: StanceLabel,
}

impl Default for MajorityBaseline {
    fn default() -> Self {
        MajorityBaseline { label: StanceLabel::Non }
    }
}

impl MajorityBaseline {
    /// Most frequent training target at `level`; ties go to NON, then PRO before CON.
    pub fn fit(sentences: &[&LabeledSentence], level: Level, tie_seed: u64) -> Self {
        let mut counts = [0usize; 3];
        for sentence in sentences {
            match level {
                Level::Token => {
                    for label in &sentence.labels {
                        counts[label.index()] += 1;
                    }
                }
                Level::Sentence => counts[targets(sentence, level, tie_seed)[0].index()] += 1,
            }
        }
        let max = counts.iter().copied().max().unwrap_or(0);
        let label = [StanceLabel::Non, StanceLabel::Pro, StanceLabel::Con]
            .into_iter()
            .find(|l| counts[l.index()] == max)
            .unwrap_or(StanceLabel::Non);
        MajorityBaseline { label }
    }
}

impl SequenceLabeler for MajorityBaseline {
    fn label(&self, tokens: &[String], _topic: &Topic) -> Vec<StanceLabel> {
        vec![self.label; tokens.len()]
    }
}

/// Collapses labels to the sentence label and repeats it on every token.
pub fn to_sentence_level(sentence_id: &str, labels: &[StanceLabel], tie_seed: u64) -> Vec<StanceLabel> {
    let seed = sentence_tie_seed(tie_seed, sentence_id);
    vec![sentence_label(labels, seed); labels.len()]
}

/// Labels every sentence, in parallel; output order follows `sentences`.
pub fn predict_corpus<L: SequenceLabeler + ?Sized>(
    labeler: &L,
    sentences: &[&LabeledSentence],
    level: Level,
    tie_seed: u64,
) -> Predictions {
    let labeled: Vec<(String, Vec<StanceLabel>)> = sentences
        .par_iter()
        .map(|s| {
            let labels = labeler.label(&s.tokens, &s.topic);
            let labels = match level {
                Level::Token => labels,
                Level::Sentence => to_sentence_level(&s.sentence_id, &labels, tie_seed),
            };
            (s.sentence_id.clone(), labels)
        })
        .collect();
    let mut predictions = Predictions::new();
    for (id, labels) in labeled {
        predictions.insert(id, labels);
    }
    predictions
}
