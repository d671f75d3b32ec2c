//! Seeded synthetic corpora with the AURC-8 layout, for tests, benchmarks and demos.
//!
//! Sentences are built from small word lists: argumentative units start at a
//! topic word followed by a supporting or opposing cue, so the labels are
//! learnable from local context but not from single words alone.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Corpus, LabeledSentence, StanceLabel, Topic};
use crate::error::Result;
use crate::seed;

const FILLER: &[&str] = &[
    "the", "a", "people", "many", "some", "often", "in", "of", "for", "and", "to", "this", "that",
    "country", "year", "report", "policy", "state", "public", "new", "study", "law", "local",
    "debate", "experts", "recent", "data", "citizens", "government", "issue", "media", "time",
];
const SUPPORT: &[&str] = &["helps", "improves", "protects", "benefits", "saves", "strengthens"];
const OPPOSE: &[&str] = &["harms", "threatens", "damages", "costs", "endangers", "undermines"];
const NEUTRAL_VERBS: &[&str] = &["is", "was", "remains", "became", "appears"];
const REASON: &[&str] = &["lives", "jobs", "families", "health", "money", "safety", "children", "freedom"];

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub topics: Vec<Topic>,
    pub sentences_per_topic: usize,
    /// Share of sentences containing at least one argument unit.
    pub argumentative_share: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            topics: Topic::all_aurc8(),
            sentences_per_topic: 1000,
            argumentative_share: 0.5,
            seed: 0,
        }
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, words: &[&'a str]) -> &'a str {
    words[rng.random_range(0..words.len())]
}

struct Builder {
    tokens: Vec<String>,
    labels: Vec<StanceLabel>,
}

impl Builder {
    fn push(&mut self, word: &str, label: StanceLabel) {
        self.tokens.push(word.to_string());
        self.labels.push(label);
    }

    fn filler(&mut self, rng: &mut ChaCha8Rng, count: usize, label: StanceLabel) {
        for _ in 0..count {
            self.push(pick(rng, FILLER), label);
        }
    }

    fn unit(&mut self, rng: &mut ChaCha8Rng, topic: &[String], stance: StanceLabel) {
        let cue = if stance == StanceLabel::Pro { SUPPORT } else { OPPOSE };
        for w in topic {
            self.push(w, stance);
        }
        self.push(pick(rng, cue), stance);
        let extra = rng.random_range(1..=5);
        self.filler(rng, extra, stance);
        self.push(pick(rng, REASON), stance);
    }
}

fn sentence(rng: &mut ChaCha8Rng, topic: &Topic, argumentative: bool) -> (Vec<String>, Vec<StanceLabel>) {
    let words = topic.words();
    let mut b = Builder { tokens: Vec::new(), labels: Vec::new() };
    let lead = rng.random_range(0..=4);
    b.filler(rng, lead, StanceLabel::Non);
    if argumentative {
        let first = if rng.random_bool(0.5) { StanceLabel::Pro } else { StanceLabel::Con };
        b.unit(rng, &words, first);
        if rng.random_bool(0.15) {
            b.push("but", StanceLabel::Non);
            let second = if first == StanceLabel::Pro { StanceLabel::Con } else { StanceLabel::Pro };
            b.unit(rng, &words, second);
        }
    } else {
        if rng.random_bool(0.5) {
            for w in &words {
                b.push(w, StanceLabel::Non);
            }
            b.push(pick(rng, NEUTRAL_VERBS), StanceLabel::Non);
        }
        let body = rng.random_range(3..=10);
        b.filler(rng, body, StanceLabel::Non);
    }
    let tail = rng.random_range(0..=3);
    b.filler(rng, tail, StanceLabel::Non);
    b.push(".", StanceLabel::Non);
    (b.tokens, b.labels)
}

/// Generates `sentences_per_topic` sentences for every topic, in topic order,
/// with ids `<topic id>-<index>`. Sentences carry no split tags.
pub fn generate(config: &SyntheticConfig) -> Result<Corpus> {
    let mut sentences = Vec::with_capacity(config.topics.len() * config.sentences_per_topic);
    for topic in &config.topics {
        let mut rng = seed::rng(seed::derive_seed(config.seed, &["synthetic", &topic.id]));
        for i in 0..config.sentences_per_topic {
            let argumentative = rng.random_bool(config.argumentative_share.clamp(0.0, 1.0));
            let (mut tokens, mut labels) = sentence(&mut rng, topic, argumentative);
            if tokens.len() > 45 {
                tokens.truncate(44);
                labels.truncate(44);
                tokens.push(".".to_string());
                labels.push(StanceLabel::Non);
            }
            sentences.push(LabeledSentence::new(
                format!("{}-{i:05}", topic.id),
                topic.clone(),
                tokens,
                labels,
            )?);
        }
    }
    Corpus::new(sentences)
}
