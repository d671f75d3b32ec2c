//! Token, segment and sentence F1.
//!
//! * Token F1: per-class precision/recall/F1 over all tokens of the evaluation
//!   set, macro-averaged over classes.
//! * Segment F1: per sentence, a predicted PRO/CON segment `p` is a true
//!   positive when some gold segment `g` with the same label has
//!   `|g ∩ p| / max(|g|, |p|) > 0.5`. A sentence with no gold and no predicted
//!   segments scores 1.0; the reported value is the mean over sentences.
//! * Sentence F1: token labels collapse to one label per sentence (NON if no
//!   argumentative token, otherwise the more frequent of PRO/CON by token
//!   count, exact ties by a seeded coin), then per-class F1 is macro-averaged.
//!
//! The 2-class variants merge PRO and CON into ARG in gold and predictions
//! before scoring.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::corpus::{labels_to_segments, LabeledSentence, Segment, StanceLabel};
use crate::error::{Error, Result};
use crate::seed;

/// Tie seed used when none is given.
pub const DEFAULT_TIE_SEED: u64 = 20_200_207;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Token,
    Segment,
    Sentence,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::Token, Measure::Segment, Measure::Sentence];
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Token => "token",
            Measure::Segment => "segment",
            Measure::Sentence => "sentence",
        })
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "token" => Ok(Measure::Token),
            "segment" => Ok(Measure::Segment),
            "sentence" => Ok(Measure::Sentence),
            other => Err(Error::invalid(format!("unknown measure {other:?}"))),
        }
    }
}

/// PRO/CON/NON classification or ARG/NON recognition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassSet {
    #[serde(rename = "3")]
    Three,
    #[serde(rename = "2")]
    Two,
}

impl ClassSet {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            ClassSet::Three => &["PRO", "CON", "NON"],
            ClassSet::Two => &["ARG", "NON"],
        }
    }

    fn class_of(self, label: StanceLabel) -> usize {
        match self {
            ClassSet::Three => label.index(),
            ClassSet::Two => usize::from(!label.is_argumentative()),
        }
    }

    /// Maps labels into this class set; under `Two`, CON becomes PRO and PRO
    /// stands for ARG.
    fn project(self, labels: &[StanceLabel]) -> Vec<StanceLabel> {
        match self {
            ClassSet::Three => labels.to_vec(),
            ClassSet::Two => labels
                .iter()
                .map(|l| if l.is_argumentative() { StanceLabel::Pro } else { StanceLabel::Non })
                .collect(),
        }
    }
}

impl FromStr for ClassSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "3" => Ok(ClassSet::Three),
            "2" => Ok(ClassSet::Two),
            other => Err(Error::invalid(format!("class set must be 2 or 3, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassScores {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold instances of the class.
    pub support: usize,
    pub predicted: usize,
    pub true_positives: usize,
}

impl ClassScores {
    fn from_counts(class: &str, tp: usize, predicted: usize, support: usize) -> Self {
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        ClassScores {
            class: class.to_string(),
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
            support,
            predicted,
            true_positives: tp,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub measure: Measure,
    pub classes: ClassSet,
    /// For segment F1 these are pooled segment counts, reported for reference;
    /// `macro_f1` is the mean of per-sentence F1 values.
    pub per_class: Vec<ClassScores>,
    pub macro_f1: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub n_sentences: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tie_seed: Option<u64>,
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let classes = match self.classes {
            ClassSet::Three => "3-class",
            ClassSet::Two => "2-class",
        };
        writeln!(
            f,
            "{} F1 ({classes}, {} sentences): {:.3}",
            self.measure, self.n_sentences, self.macro_f1
        )?;
        for c in &self.per_class {
            writeln!(
                f,
                "  {:<4} P {:.3}  R {:.3}  F1 {:.3}  (gold {}, predicted {}, tp {})",
                c.class, c.precision, c.recall, c.f1, c.support, c.predicted, c.true_positives
            )?;
        }
        Ok(())
    }
}

fn build_report(
    measure: Measure,
    classes: ClassSet,
    per_class: Vec<ClassScores>,
    n_sentences: usize,
    tie_seed: Option<u64>,
) -> EvalReport {
    let mean = |f: fn(&ClassScores) -> f64| per_class.iter().map(f).sum::<f64>() / per_class.len() as f64;
    EvalReport {
        measure,
        classes,
        macro_f1: mean(|c| c.f1),
        macro_precision: mean(|c| c.precision),
        macro_recall: mean(|c| c.recall),
        per_class,
        n_sentences,
        tie_seed,
    }
}

/// Predicted label sequences keyed by sentence id, kept in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Predictions {
    order: Vec<String>,
    labels: HashMap<String, Vec<StanceLabel>>,
}

#[derive(Serialize, Deserialize)]
struct PredictionRecord {
    sentence_id: String,
    labels: Vec<StanceLabel>,
}

impl Predictions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, sentence_id: impl Into<String>, labels: Vec<StanceLabel>) {
        let id = sentence_id.into();
        if self.labels.insert(id.clone(), labels).is_none() {
            self.order.push(id);
        }
    }

    pub fn get(&self, sentence_id: &str) -> Option<&[StanceLabel]> {
        self.labels.get(sentence_id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[StanceLabel])> {
        self.order
            .iter()
            .map(move |id| (id.as_str(), self.labels[id].as_slice()))
    }

    /// Gold labels of `sentences`, as predictions.
    pub fn from_gold<'a>(sentences: impl IntoIterator<Item = &'a LabeledSentence>) -> Self {
        let mut out = Predictions::new();
        for s in sentences {
            out.insert(s.sentence_id.clone(), s.labels.clone());
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file), &path.display().to_string())
    }

    pub fn read<R: BufRead>(reader: R, source: &str) -> Result<Self> {
        let mut out = Predictions::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: PredictionRecord = serde_json::from_str(&line).map_err(|e| Error::Record {
                path: source.to_string(),
                line: i + 1,
                message: format!("malformed prediction: {e}"),
            })?;
            if out.get(&record.sentence_id).is_some() {
                return Err(Error::Record {
                    path: source.to_string(),
                    line: i + 1,
                    message: format!("duplicate prediction for {}", record.sentence_id),
                });
            }
            out.insert(record.sentence_id, record.labels);
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        self.write(&mut writer)?;
        writer.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write<W: Write>(&self, writer: &mut W) -> Result<()> {
        for (id, labels) in self.iter() {
            let record = PredictionRecord {
                sentence_id: id.to_string(),
                labels: labels.to_vec(),
            };
            serde_json::to_writer(&mut *writer, &record)?;
            writer.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
        }
        Ok(())
    }
}

/// Pairs every gold sentence with its prediction. Extra predictions are ignored.
fn align<'a>(
    gold: &[&'a LabeledSentence],
    predictions: &'a Predictions,
) -> Result<Vec<(&'a LabeledSentence, &'a [StanceLabel])>> {
    gold.iter()
        .map(|sentence| {
            let predicted = predictions
                .get(&sentence.sentence_id)
                .ok_or_else(|| Error::MissingPrediction(sentence.sentence_id.clone()))?;
            if predicted.len() != sentence.len() {
                return Err(Error::LengthMismatch {
                    sentence_id: sentence.sentence_id.clone(),
                    expected: sentence.len(),
                    actual: predicted.len(),
                });
            }
            Ok((*sentence, predicted))
        })
        .collect()
}

fn class_report<I>(pairs: I, classes: ClassSet) -> Vec<ClassScores>
where
    I: IntoIterator<Item = (StanceLabel, StanceLabel)>,
{
    let k = classes.names().len();
    let (mut tp, mut predicted, mut support) = (vec![0; k], vec![0; k], vec![0; k]);
    for (gold, pred) in pairs {
        let (g, p) = (classes.class_of(gold), classes.class_of(pred));
        support[g] += 1;
        predicted[p] += 1;
        if g == p {
            tp[g] += 1;
        }
    }
    classes
        .names()
        .iter()
        .enumerate()
        .map(|(i, name)| ClassScores::from_counts(name, tp[i], predicted[i], support[i]))
        .collect()
}

pub fn token_f1(gold: &[&LabeledSentence], predictions: &Predictions, classes: ClassSet) -> Result<EvalReport> {
    let aligned = align(gold, predictions)?;
    let pairs = aligned
        .iter()
        .flat_map(|(s, p)| s.labels.iter().copied().zip(p.iter().copied()));
    Ok(build_report(Measure::Token, classes, class_report(pairs, classes), aligned.len(), None))
}

/// True when `|g ∩ p| / max(|g|, |p|) > 0.5`, computed exactly.
pub fn segments_match(gold: &Segment, predicted: &Segment) -> bool {
    gold.label == predicted.label && 2 * gold.overlap(predicted) > gold.len().max(predicted.len())
}

fn check_disjoint(segments: &[Segment]) -> Result<()> {
    let mut sorted = segments.to_vec();
    sorted.sort_by_key(|s| (s.start, s.end));
    for pair in sorted.windows(2) {
        if pair[1].start < pair[0].end {
            return Err(Error::invalid(format!("segments {} and {} overlap", pair[0], pair[1])));
        }
    }
    Ok(())
}

/// Matched counts for one sentence: (true positives, |predicted|, |gold|).
fn segment_counts(gold: &[Segment], predicted: &[Segment]) -> Result<(usize, usize, usize)> {
    check_disjoint(predicted)?;
    let tp = predicted
        .iter()
        .filter(|p| gold.iter().any(|g| segments_match(g, p)))
        .count();
    Ok((tp, predicted.len(), gold.len()))
}

/// Segment F1 for one sentence.
pub fn segment_f1_sentence(gold: &[Segment], predicted: &[Segment]) -> Result<f64> {
    let (tp, n_pred, n_gold) = segment_counts(gold, predicted)?;
    if n_pred == 0 && n_gold == 0 {
        return Ok(1.0);
    }
    Ok(harmonic_mean(ratio(tp, n_pred), ratio(tp, n_gold)))
}

pub fn segment_f1(gold: &[&LabeledSentence], predictions: &Predictions, classes: ClassSet) -> Result<EvalReport> {
    let aligned = align(gold, predictions)?;
    let k = classes.names().len();
    let (mut tp, mut predicted, mut support) = (vec![0; k], vec![0; k], vec![0; k]);
    let mut sum = 0.0;
    for (sentence, pred) in &aligned {
        let gold_segments = labels_to_segments(&classes.project(&sentence.labels))?;
        let pred_segments = labels_to_segments(&classes.project(pred))?;
        sum += segment_f1_sentence(&gold_segments, &pred_segments)?;
        for p in &pred_segments {
            let c = classes.class_of(p.label);
            predicted[c] += 1;
            if gold_segments.iter().any(|g| segments_match(g, p)) {
                tp[c] += 1;
            }
        }
        for g in &gold_segments {
            support[classes.class_of(g.label)] += 1;
        }
    }
    // NON is not scored at segment level.
    let per_class = classes
        .names()
        .iter()
        .enumerate()
        .filter(|(_, name)| **name != "NON")
        .map(|(i, name)| ClassScores::from_counts(name, tp[i], predicted[i], support[i]))
        .collect::<Vec<_>>();
    let mut report = build_report(Measure::Segment, classes, per_class, aligned.len(), None);
    report.macro_f1 = if aligned.is_empty() { 0.0 } else { sum / aligned.len() as f64 };
    Ok(report)
}

/// One label for a whole sentence.
///
/// NON without PRO/CON tokens; otherwise the more frequent of PRO and CON by
/// token count. Equal nonzero counts are decided by the first draw of a
/// generator seeded with `tie_seed`.
pub fn sentence_label(labels: &[StanceLabel], tie_seed: u64) -> StanceLabel {
    let pro = labels.iter().filter(|l| **l == StanceLabel::Pro).count();
    let con = labels.iter().filter(|l| **l == StanceLabel::Con).count();
    match (pro, con) {
        (0, 0) => StanceLabel::Non,
        (p, c) if p > c => StanceLabel::Pro,
        (p, c) if c > p => StanceLabel::Con,
        _ => {
            if seed::rng(tie_seed).next_u64() & 1 == 0 {
                StanceLabel::Pro
            } else {
                StanceLabel::Con
            }
        }
    }
}

/// Per-sentence tie seed derived from the run's tie seed and the sentence id.
///
/// Gold and predicted labels of a sentence share it, so identical token
/// labels always collapse to the same sentence label.
pub fn sentence_tie_seed(tie_seed: u64, sentence_id: &str) -> u64 {
    seed::derive_seed(tie_seed, &["sentence-label", sentence_id])
}

pub fn sentence_f1(
    gold: &[&LabeledSentence],
    predictions: &Predictions,
    classes: ClassSet,
    tie_seed: u64,
) -> Result<EvalReport> {
    let aligned = align(gold, predictions)?;
    let pairs = aligned.iter().map(|(s, p)| {
        let seed = sentence_tie_seed(tie_seed, &s.sentence_id);
        (sentence_label(&s.labels, seed), sentence_label(p, seed))
    });
    Ok(build_report(
        Measure::Sentence,
        classes,
        class_report(pairs, classes),
        aligned.len(),
        Some(tie_seed),
    ))
}

pub fn evaluate(
    measure: Measure,
    gold: &[&LabeledSentence],
    predictions: &Predictions,
    classes: ClassSet,
    tie_seed: u64,
) -> Result<EvalReport> {
    match measure {
        Measure::Token => token_f1(gold, predictions, classes),
        Measure::Segment => segment_f1(gold, predictions, classes),
        Measure::Sentence => sentence_f1(gold, predictions, classes, tie_seed),
    }
}
