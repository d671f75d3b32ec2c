//! Sentence-boundary-free evaluation.
//!
//! All evaluation sentences of a topic are concatenated into one token stream
//! and a labeler is run over fixed-size windows of it, ignoring the original
//! sentence boundaries. Overlapping windows vote per token (plurality, ties
//! go to NON) and the stream labels are cut back into sentences for scoring.

use std::collections::HashMap;
use std::ops::Range;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::winner;
use crate::corpus::{LabeledSentence, StanceLabel, Topic};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, ClassSet, EvalReport, Measure, Predictions};
use crate::seed;
use crate::tagger::SequenceLabeler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub size: usize,
    pub stride: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig { size: 45, stride: 1 }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.size == 0 || self.stride == 0 {
            return Err(Error::invalid(format!(
                "window size and stride must be at least 1 (got size {}, stride {})",
                self.size, self.stride
            )));
        }
        if self.stride > self.size {
            return Err(Error::invalid(format!(
                "stride {} exceeds window size {}; tokens between windows would be skipped",
                self.stride, self.size
            )));
        }
        Ok(())
    }
}

/// The sentences of one topic laid end to end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub topic: Topic,
    pub tokens: Vec<String>,
    pub gold: Vec<StanceLabel>,
    pub sentence_ids: Vec<String>,
    /// Start of each sentence in the stream.
    pub offsets: Vec<usize>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn sentence_range(&self, k: usize) -> Range<usize> {
        let end = self.offsets.get(k + 1).copied().unwrap_or(self.len());
        self.offsets[k]..end
    }

    /// Cuts stream-aligned labels back into per-sentence sequences.
    pub fn split_back<'a>(&'a self, labels: &'a [StanceLabel]) -> impl Iterator<Item = (&'a str, &'a [StanceLabel])> + 'a {
        self.sentence_ids
            .iter()
            .enumerate()
            .map(move |(k, id)| (id.as_str(), &labels[self.sentence_range(k)]))
    }
}

/// Concatenates the sentences of `topic` (id or name) in their given order.
pub fn build_stream(sentences: &[&LabeledSentence], topic: &str) -> Result<TokenStream> {
    let members: Vec<&LabeledSentence> = sentences
        .iter()
        .copied()
        .filter(|s| s.topic.id == topic || s.topic.name.eq_ignore_ascii_case(topic))
        .collect();
    let first = members.first().ok_or_else(|| Error::UnknownTopic(topic.to_string()))?;
    let mut stream = TokenStream {
        topic: first.topic.clone(),
        tokens: Vec::new(),
        gold: Vec::new(),
        sentence_ids: Vec::with_capacity(members.len()),
        offsets: Vec::with_capacity(members.len()),
    };
    for s in members {
        s.validate()?;
        stream.offsets.push(stream.tokens.len());
        stream.sentence_ids.push(s.sentence_id.clone());
        stream.tokens.extend(s.tokens.iter().cloned());
        stream.gold.extend(&s.labels);
    }
    Ok(stream)
}

/// One stream per topic, topics in order of first appearance. With a shuffle
/// seed, sentence order within each topic is permuted first.
pub fn build_streams(sentences: &[&LabeledSentence], shuffle_seed: Option<u64>) -> Result<Vec<TokenStream>> {
    let mut topics: Vec<&str> = Vec::new();
    for s in sentences {
        if !topics.contains(&s.topic.id.as_str()) {
            topics.push(&s.topic.id);
        }
    }
    topics
        .into_iter()
        .map(|topic| {
            let mut members: Vec<&LabeledSentence> =
                sentences.iter().copied().filter(|s| s.topic.id == topic).collect();
            if let Some(seed) = shuffle_seed {
                members.shuffle(&mut seed::rng(seed::derive_seed(seed, &["window-shuffle", topic])));
            }
            build_stream(&members, topic)
        })
        .collect()
}

/// Windows `[i, i + size)` for `i = 0, stride, 2 * stride, ...`, stopping
/// after the first window that reaches the end of the stream; that window is
/// truncated when it runs past the end.
pub fn windows(length: usize, config: &WindowConfig) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < length {
        let end = (start + config.size).min(length);
        out.push(start..end);
        if end == length {
            break;
        }
        start += config.stride;
    }
    out
}

/// Labels a window of a stream.
pub trait WindowLabeler: Send + Sync {
    fn label_window(&self, stream: &TokenStream, window: Range<usize>) -> Vec<StanceLabel>;
}

impl<T: SequenceLabeler + ?Sized> WindowLabeler for T {
    fn label_window(&self, stream: &TokenStream, window: Range<usize>) -> Vec<StanceLabel> {
        self.label(&stream.tokens[window], &stream.topic)
    }
}

/// Returns the gold labels of each window.
#[derive(Debug, Clone, Copy, Default)]
pub struct GoldOracle;

impl WindowLabeler for GoldOracle {
    fn label_window(&self, stream: &TokenStream, window: Range<usize>) -> Vec<StanceLabel> {
        stream.gold[window].to_vec()
    }
}

/// Labels every window independently, then takes a per-token plurality vote
/// over the windows covering it (ties go to NON).
pub fn windowed_predict<L: WindowLabeler + ?Sized>(
    labeler: &L,
    stream: &TokenStream,
    config: &WindowConfig,
) -> Result<Vec<StanceLabel>> {
    config.validate()?;
    let spans = windows(stream.len(), config);
    let labeled: Vec<Vec<StanceLabel>> = spans
        .par_iter()
        .map(|w| labeler.label_window(stream, w.clone()))
        .collect();
    let mut votes = vec![[0usize; 3]; stream.len()];
    for (span, labels) in spans.iter().zip(&labeled) {
        if labels.len() != span.len() {
            return Err(Error::invalid(format!(
                "labeler returned {} labels for a window of {} tokens",
                labels.len(),
                span.len()
            )));
        }
        for (slot, label) in votes[span.clone()].iter_mut().zip(labels) {
            slot[label.index()] += 1;
        }
    }
    Ok(votes.iter().map(winner).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowEvalReport {
    pub config: WindowConfig,
    pub streams: usize,
    pub windows: usize,
    pub shuffle_seed: Option<u64>,
    /// Token, segment and sentence scores, in that order.
    pub reports: Vec<EvalReport>,
    #[serde(skip)]
    pub predictions: Predictions,
}

impl WindowEvalReport {
    pub fn report(&self, measure: Measure) -> Option<&EvalReport> {
        self.reports.iter().find(|r| r.measure == measure)
    }
}

/// Windowed prediction over one stream per topic, mapped back to sentences
/// and scored with all three measures.
pub fn boundary_free_eval<L: WindowLabeler + ?Sized>(
    labeler: &L,
    sentences: &[&LabeledSentence],
    config: &WindowConfig,
    classes: ClassSet,
    tie_seed: u64,
    shuffle_seed: Option<u64>,
) -> Result<WindowEvalReport> {
    config.validate()?;
    let streams = build_streams(sentences, shuffle_seed)?;
    let mut by_id: HashMap<String, Vec<StanceLabel>> = HashMap::with_capacity(sentences.len());
    let mut window_count = 0;
    for stream in &streams {
        window_count += windows(stream.len(), config).len();
        let labels = windowed_predict(labeler, stream, config)?;
        for (id, part) in stream.split_back(&labels) {
            by_id.insert(id.to_string(), part.to_vec());
        }
    }
    let mut predictions = Predictions::new();
    for s in sentences {
        if let Some(labels) = by_id.remove(&s.sentence_id) {
            predictions.insert(s.sentence_id.clone(), labels);
        }
    }
    let reports = Measure::ALL
        .iter()
        .map(|&m| evaluate(m, sentences, &predictions, classes, tie_seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(WindowEvalReport {
        config: *config,
        streams: streams.len(),
        windows: window_count,
        shuffle_seed,
        reports,
        predictions,
    })
}
