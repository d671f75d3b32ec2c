use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::decode::{decode, SequenceScores};
use super::features::featurize;
use super::model::{TaggerModel, TrainingInfo};
use super::Level;
use crate::corpus::{LabeledSentence, StanceLabel};
use crate::error::Result;
use crate::metrics::{sentence_label, sentence_tie_seed, DEFAULT_TIE_SEED};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Passes over the training data.
    pub epochs: usize,
    pub seed: u64,
    pub level: Level,
    /// Seed for PRO/CON ties when sentence-level targets are built.
    pub tie_seed: u64,
    /// Drop all-zero features from the saved vocabulary.
    pub prune: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            seed: 0,
            level: Level::Token,
            tie_seed: DEFAULT_TIE_SEED,
            prune: true,
        }
    }
}

/// Training targets: the token labels, or the sentence label on every token.
pub fn targets(sentence: &LabeledSentence, level: Level, tie_seed: u64) -> Vec<StanceLabel> {
    match level {
        Level::Token => sentence.labels.clone(),
        Level::Sentence => {
            let seed = sentence_tie_seed(tie_seed, &sentence.sentence_id);
            vec![sentence_label(&sentence.labels, seed); sentence.len()]
        }
    }
}

/// Weights with running sums for averaging. Each update at step `c` also adds
/// `c * delta` to the sums, and the average is `w - sums / c`.
struct Averaged {
    emissions: Vec<[f64; 3]>,
    emission_sums: Vec<[f64; 3]>,
    transitions: [[f64; 3]; 3],
    transition_sums: [[f64; 3]; 3],
    start: [f64; 3],
    start_sums: [f64; 3],
    end: [f64; 3],
    end_sums: [f64; 3],
    step: f64,
}

impl Averaged {
    fn new(features: usize) -> Self {
        Averaged {
            emissions: vec![[0.0; 3]; features],
            emission_sums: vec![[0.0; 3]; features],
            transitions: [[0.0; 3]; 3],
            transition_sums: [[0.0; 3]; 3],
            start: [0.0; 3],
            start_sums: [0.0; 3],
            end: [0.0; 3],
            end_sums: [0.0; 3],
            step: 1.0,
        }
    }

    fn scores(&self, ids: &[Vec<usize>]) -> SequenceScores {
        SequenceScores {
            emissions: ids
                .iter()
                .map(|position| {
                    let mut total = [0.0; 3];
                    for &id in position {
                        for (t, w) in total.iter_mut().zip(self.emissions[id]) {
                            *t += w;
                        }
                    }
                    total
                })
                .collect(),
            transitions: self.transitions,
            start: self.start,
            end: self.end,
        }
    }

    fn update(&mut self, ids: &[Vec<usize>], gold: &[usize], predicted: &[usize]) {
        let c = self.step;
        let bump = |w: &mut f64, sum: &mut f64, delta: f64| {
            *w += delta;
            *sum += c * delta;
        };
        for (i, position) in ids.iter().enumerate() {
            if gold[i] != predicted[i] {
                for &id in position {
                    bump(&mut self.emissions[id][gold[i]], &mut self.emission_sums[id][gold[i]], 1.0);
                    bump(&mut self.emissions[id][predicted[i]], &mut self.emission_sums[id][predicted[i]], -1.0);
                }
            }
            if i > 0 && (gold[i - 1], gold[i]) != (predicted[i - 1], predicted[i]) {
                let (a, b) = (gold[i - 1], gold[i]);
                bump(&mut self.transitions[a][b], &mut self.transition_sums[a][b], 1.0);
                let (a, b) = (predicted[i - 1], predicted[i]);
                bump(&mut self.transitions[a][b], &mut self.transition_sums[a][b], -1.0);
            }
        }
        let n = gold.len();
        if gold[0] != predicted[0] {
            bump(&mut self.start[gold[0]], &mut self.start_sums[gold[0]], 1.0);
            bump(&mut self.start[predicted[0]], &mut self.start_sums[predicted[0]], -1.0);
        }
        if gold[n - 1] != predicted[n - 1] {
            bump(&mut self.end[gold[n - 1]], &mut self.end_sums[gold[n - 1]], 1.0);
            bump(&mut self.end[predicted[n - 1]], &mut self.end_sums[predicted[n - 1]], -1.0);
        }
    }

    fn average<const N: usize>(w: [f64; N], sums: [f64; N], c: f64) -> [f64; N] {
        std::array::from_fn(|i| w[i] - sums[i] / c)
    }

    fn finish(self, model: &mut TaggerModel) {
        let c = self.step;
        model.emissions = self
            .emissions
            .iter()
            .zip(&self.emission_sums)
            .map(|(w, s)| Self::average(*w, *s, c))
            .collect();
        model.transitions = std::array::from_fn(|a| Self::average(self.transitions[a], self.transition_sums[a], c));
        model.start = Self::average(self.start, self.start_sums, c);
        model.end = Self::average(self.end, self.end_sums, c);
    }
}

/// Averaged structured perceptron over exact decoding.
///
/// The feature vocabulary is collected from the training sentences in their
/// given order; each epoch visits sentences in an order shuffled by a seed
/// derived from `config.seed` and the epoch number.
pub fn train(sentences: &[&LabeledSentence], config: &TrainConfig) -> Result<TaggerModel> {
    let mut vocabulary: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut examples: Vec<(Vec<Vec<usize>>, Vec<usize>)> = Vec::with_capacity(sentences.len());
    for sentence in sentences {
        sentence.validate()?;
        let ids = featurize(&sentence.tokens, &sentence.topic)
            .into_iter()
            .map(|position| {
                position
                    .into_iter()
                    .map(|f| {
                        *index.entry(f).or_insert_with_key(|f| {
                            vocabulary.push(f.clone());
                            vocabulary.len() - 1
                        })
                    })
                    .collect()
            })
            .collect();
        let gold = targets(sentence, config.level, config.tie_seed)
            .into_iter()
            .map(StanceLabel::index)
            .collect();
        examples.push((ids, gold));
    }

    let mut model = TaggerModel::zeros(vocabulary)?;
    let mut weights = Averaged::new(model.feature_count());
    let mut mistakes_per_epoch = Vec::new();
    let mut order: Vec<usize> = (0..examples.len()).collect();
    for epoch in 0..config.epochs {
        let mut rng = seed::rng(seed::derive_seed(config.seed, &["train-epoch", &epoch.to_string()]));
        order.sort_unstable();
        order.shuffle(&mut rng);
        let mut mistakes = 0;
        for &i in &order {
            let (ids, gold) = &examples[i];
            let predicted: Vec<usize> = decode(&weights.scores(ids))
                .into_iter()
                .map(StanceLabel::index)
                .collect();
            if &predicted != gold {
                mistakes += 1;
                weights.update(ids, gold, &predicted);
            }
            weights.step += 1.0;
        }
        mistakes_per_epoch.push(mistakes);
    }
    weights.finish(&mut model);
    if config.prune {
        model.prune();
    }
    model.info = Some(TrainingInfo {
        level: config.level,
        epochs: config.epochs,
        seed: config.seed,
        train_sentences: sentences.len(),
        mistakes_per_epoch,
    });
    Ok(model)
}
