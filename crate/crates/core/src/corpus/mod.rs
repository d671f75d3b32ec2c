//! Span-labeled sentence corpora.
//!
//! Token labels are the canonical storage; segments are always derived from
//! them (see [`labels_to_segments`]).

mod jsonl;
mod render;
mod segments;
mod splits;
mod stats;
pub mod synthetic;
pub mod tsv;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use jsonl::{load_corpus, read_corpus, save_corpus, write_corpus};
pub use render::{detokenize, render_argument, render_segment};
pub use segments::{labels_to_segments, segments_to_labels, Segment};
pub use splits::{make_splits, SplitPlan, SplitSizes, SplitSource};
pub use stats::{compute_stats, CorpusStats, TopicStats};

/// Stance of a token towards the sentence topic.
///
/// The derived ordering `Pro < Con < Non` is the tie-break order used by
/// decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum StanceLabel {
    Pro,
    Con,
    Non,
}

impl StanceLabel {
    pub const ALL: [StanceLabel; 3] = [StanceLabel::Pro, StanceLabel::Con, StanceLabel::Non];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<StanceLabel> {
        Self::ALL.get(index).copied()
    }

    pub fn is_argumentative(self) -> bool {
        self != StanceLabel::Non
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StanceLabel::Pro => "PRO",
            StanceLabel::Con => "CON",
            StanceLabel::Non => "NON",
        }
    }
}

impl fmt::Display for StanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StanceLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "PRO" => Ok(StanceLabel::Pro),
            "CON" => Ok(StanceLabel::Con),
            "NON" => Ok(StanceLabel::Non),
            _ => Err(Error::UnknownLabel(s.to_string())),
        }
    }
}

/// The eight AURC-8 topics, in table order.
pub const AURC8_TOPICS: [(&str, &str); 8] = [
    ("T1", "abortion"),
    ("T2", "cloning"),
    ("T3", "marijuana legalization"),
    ("T4", "minimum wage"),
    ("T5", "nuclear energy"),
    ("T6", "death penalty"),
    ("T7", "gun control"),
    ("T8", "school uniforms"),
];

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Topic {
    pub id: String,
    pub name: String,
}

impl Topic {
    pub fn new(id: impl Into<String>, name: impl Into<String>) -> Self {
        Topic {
            id: id.into(),
            name: name.into(),
        }
    }

    /// Looks up an AURC-8 topic by id (`"T3"`) or by name (`"marijuana legalization"`).
    pub fn aurc8(key: &str) -> Result<Topic> {
        let key = key.trim();
        AURC8_TOPICS
            .iter()
            .find(|(id, name)| id.eq_ignore_ascii_case(key) || name.eq_ignore_ascii_case(key))
            .map(|(id, name)| Topic::new(*id, *name))
            .ok_or_else(|| Error::UnknownTopic(key.to_string()))
    }

    pub fn all_aurc8() -> Vec<Topic> {
        AURC8_TOPICS.iter().map(|(id, name)| Topic::new(*id, *name)).collect()
    }

    /// Lowercased words of the topic name.
    pub fn words(&self) -> Vec<String> {
        self.name
            .split_whitespace()
            .map(|w| w.to_lowercase())
            .collect()
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.id, self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" | "val" | "validation" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(Error::invalid(format!("unknown split {other:?}"))),
        }
    }
}

/// The two evaluation regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitScheme {
    InDomain,
    CrossDomain,
}

impl fmt::Display for SplitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitScheme::InDomain => "in-domain",
            SplitScheme::CrossDomain => "cross-domain",
        })
    }
}

impl FromStr for SplitScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "in-domain" | "in_domain" | "indomain" => Ok(SplitScheme::InDomain),
            "cross-domain" | "cross_domain" | "crossdomain" => Ok(SplitScheme::CrossDomain),
            other => Err(Error::invalid(format!("unknown split scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    pub sentence_id: String,
    pub topic: Topic,
    pub tokens: Vec<String>,
    pub labels: Vec<StanceLabel>,
    pub split_in_domain: Option<Split>,
    pub split_cross_domain: Option<Split>,
}

impl LabeledSentence {
    pub fn new(
        sentence_id: impl Into<String>,
        topic: Topic,
        tokens: Vec<String>,
        labels: Vec<StanceLabel>,
    ) -> Result<Self> {
        let sentence = LabeledSentence {
            sentence_id: sentence_id.into(),
            topic,
            tokens,
            labels,
            split_in_domain: None,
            split_cross_domain: None,
        };
        sentence.validate()?;
        Ok(sentence)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn split(&self, scheme: SplitScheme) -> Option<Split> {
        match scheme {
            SplitScheme::InDomain => self.split_in_domain,
            SplitScheme::CrossDomain => self.split_cross_domain,
        }
    }

    pub fn is_argumentative(&self) -> bool {
        self.labels.iter().any(|l| l.is_argumentative())
    }

    pub fn segments(&self) -> Vec<Segment> {
        if self.labels.is_empty() {
            return Vec::new();
        }
        labels_to_segments(&self.labels).expect("non-empty labels")
    }

    pub fn validate(&self) -> Result<()> {
        if self.sentence_id.is_empty() {
            return Err(Error::invalid("empty sentence_id"));
        }
        if self.tokens.is_empty() {
            return Err(Error::sentence(&self.sentence_id, "sentence has no tokens"));
        }
        if self.tokens.len() != self.labels.len() {
            return Err(Error::LengthMismatch {
                sentence_id: self.sentence_id.clone(),
                expected: self.tokens.len(),
                actual: self.labels.len(),
            });
        }
        Ok(())
    }
}

/// An ordered collection of labeled sentences.
///
/// Storage order is significant: split construction and token streams follow it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<LabeledSentence>,
}

impl Corpus {
    pub fn new(sentences: Vec<LabeledSentence>) -> Result<Self> {
        let corpus = Corpus { sentences };
        corpus.validate()?;
        Ok(corpus)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledSentence> {
        self.sentences.iter()
    }

    /// Checks per-sentence invariants, id uniqueness and that every topic id
    /// maps to a single name.
    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        let mut names: HashMap<&str, &str> = HashMap::new();
        for sentence in &self.sentences {
            sentence.validate()?;
            if !ids.insert(sentence.sentence_id.as_str()) {
                return Err(Error::sentence(&sentence.sentence_id, "duplicate sentence_id"));
            }
            let name = names
                .entry(sentence.topic.id.as_str())
                .or_insert(sentence.topic.name.as_str());
            if *name != sentence.topic.name {
                return Err(Error::sentence(
                    &sentence.sentence_id,
                    format!(
                        "topic {} named both {:?} and {:?}",
                        sentence.topic.id, name, sentence.topic.name
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Stricter checks for a sampled AURC-8 style corpus: every topic is one of
    /// the eight, every sentence has between 3 and 45 tokens.
    pub fn validate_aurc8(&self) -> Result<()> {
        self.validate()?;
        for sentence in &self.sentences {
            let known = Topic::aurc8(&sentence.topic.id)?;
            if !known.name.eq_ignore_ascii_case(&sentence.topic.name) {
                return Err(Error::sentence(
                    &sentence.sentence_id,
                    format!("topic {} should be named {:?}", known.id, known.name),
                ));
            }
            if !(3..=45).contains(&sentence.len()) {
                return Err(Error::sentence(
                    &sentence.sentence_id,
                    format!("{} tokens, outside [3, 45]", sentence.len()),
                ));
            }
        }
        Ok(())
    }

    /// Topics in order of first appearance.
    pub fn topics(&self) -> Vec<Topic> {
        let mut seen = HashSet::new();
        self.sentences
            .iter()
            .filter(|s| seen.insert(s.topic.id.clone()))
            .map(|s| s.topic.clone())
            .collect()
    }

    pub fn topic(&self, key: &str) -> Option<Topic> {
        self.topics()
            .into_iter()
            .find(|t| t.id.eq_ignore_ascii_case(key) || t.name.eq_ignore_ascii_case(key))
    }

    pub fn by_topic<'a>(&'a self, topic_id: &'a str) -> impl Iterator<Item = &'a LabeledSentence> + 'a {
        self.sentences.iter().filter(move |s| s.topic.id == topic_id)
    }

    /// Sentences assigned to `split` under `scheme`, in storage order.
    pub fn subset(&self, scheme: SplitScheme, split: Split) -> Vec<&LabeledSentence> {
        self.sentences
            .iter()
            .filter(|s| s.split(scheme) == Some(split))
            .collect()
    }

    pub fn get(&self, sentence_id: &str) -> Option<&LabeledSentence> {
        self.sentences.iter().find(|s| s.sentence_id == sentence_id)
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a LabeledSentence;
    type IntoIter = std::slice::Iter<'a, LabeledSentence>;

    fn into_iter(self) -> Self::IntoIter {
        self.sentences.iter()
    }
}
