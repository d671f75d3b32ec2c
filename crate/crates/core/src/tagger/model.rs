use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::decode::{decode, SequenceScores};
use super::features::featurize;
use super::{Level, SequenceLabeler};
use crate::corpus::{StanceLabel, Topic};
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "aurc-tagger";
pub const MODEL_VERSION: u32 = 1;

/// Training provenance stored alongside the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingInfo {
    pub level: Level,
    pub epochs: usize,
    pub seed: u64,
    pub train_sentences: usize,
    /// Training sentences decoded wrongly in each epoch.
    pub mistakes_per_epoch: Vec<usize>,
}

/// Linear first-order tagger: per-feature emission weights for each label
/// plus transition, start and end scores.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel {
    features: Vec<String>,
    index: HashMap<String, usize>,
    pub(crate) emissions: Vec<[f64; 3]>,
    pub transitions: [[f64; 3]; 3],
    pub start: [f64; 3],
    pub end: [f64; 3],
    pub info: Option<TrainingInfo>,
}

impl TaggerModel {
    /// All-zero weights over the given feature vocabulary.
    pub fn zeros(features: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(features.len());
        for (i, f) in features.iter().enumerate() {
            if index.insert(f.clone(), i).is_some() {
                return Err(Error::Model(format!("duplicate feature {f:?}")));
            }
        }
        Ok(TaggerModel {
            emissions: vec![[0.0; 3]; features.len()],
            features,
            index,
            transitions: [[0.0; 3]; 3],
            start: [0.0; 3],
            end: [0.0; 3],
            info: None,
        })
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn feature_id(&self, feature: &str) -> Option<usize> {
        self.index.get(feature).copied()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.features
    }

    pub fn weight(&self, feature: &str, label: StanceLabel) -> f64 {
        self.feature_id(feature).map_or(0.0, |id| self.emissions[id][label.index()])
    }

    pub fn set_weight(&mut self, feature: &str, label: StanceLabel, value: f64) -> Result<()> {
        let id = self
            .feature_id(feature)
            .ok_or_else(|| Error::Model(format!("unknown feature {feature:?}")))?;
        self.emissions[id][label.index()] = value;
        Ok(())
    }

    /// Scores for a sentence; features missing from the vocabulary contribute nothing.
    pub fn scores(&self, tokens: &[String], topic: &Topic) -> SequenceScores {
        let emissions = featurize(tokens, topic)
            .iter()
            .map(|position| {
                let mut total = [0.0; 3];
                for id in position.iter().filter_map(|f| self.feature_id(f)) {
                    for (t, w) in total.iter_mut().zip(self.emissions[id]) {
                        *t += w;
                    }
                }
                total
            })
            .collect();
        self.scores_from_emissions(emissions)
    }

    fn scores_from_emissions(&self, emissions: Vec<[f64; 3]>) -> SequenceScores {
        SequenceScores {
            emissions,
            transitions: self.transitions,
            start: self.start,
            end: self.end,
        }
    }

    pub fn predict(&self, tokens: &[String], topic: &Topic) -> Vec<StanceLabel> {
        decode(&self.scores(tokens, topic))
    }

    /// Drops features whose weights are all zero; predictions are unchanged.
    pub fn prune(&mut self) {
        let keep: Vec<usize> = (0..self.features.len())
            .filter(|&i| self.emissions[i].iter().any(|w| *w != 0.0))
            .collect();
        self.features = keep.iter().map(|&i| std::mem::take(&mut self.features[i])).collect();
        self.emissions = keep.iter().map(|&i| self.emissions[i]).collect();
        self.index = self.features.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        self.write(&mut writer).map_err(|e| match e {
            Error::Json(j) if j.is_io() => Error::io(path, std::io::Error::other(j)),
            other => other,
        })?;
        writer.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write<W: Write>(&self, writer: &mut W) -> Result<()> {
        serde_json::to_writer(&mut *writer, &ModelFile::from(self))?;
        writer.write_all(b"\n").map_err(|e| Error::io("<model>", e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file))
            .map_err(|e| Error::Model(format!("{}: {e}", path.display())))
    }

    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let file: ModelFile = serde_json::from_reader(reader)?;
        file.try_into()
    }
}

impl SequenceLabeler for TaggerModel {
    fn label(&self, tokens: &[String], topic: &Topic) -> Vec<StanceLabel> {
        self.predict(tokens, topic)
    }
}

/// A weight that may be `-inf`, written as the string `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Weight(f64);

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::NEG_INFINITY {
            serializer.serialize_str("-inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(x) => Ok(Weight(x)),
            Raw::Text(s) if s == "-inf" => Ok(Weight(f64::NEG_INFINITY)),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("invalid weight {s:?}"))),
        }
    }
}

fn wrap(row: [f64; 3]) -> [Weight; 3] {
    row.map(Weight)
}

fn unwrap(row: [Weight; 3]) -> [f64; 3] {
    row.map(|w| w.0)
}

#[derive(Serialize, Deserialize)]
struct FeatureWeights {
    name: String,
    weights: [f64; 3],
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    labels: [StanceLabel; 3],
    #[serde(default)]
    training: Option<TrainingInfo>,
    start: [Weight; 3],
    end: [Weight; 3],
    transitions: [[Weight; 3]; 3],
    features: Vec<FeatureWeights>,
}

impl From<&TaggerModel> for ModelFile {
    fn from(model: &TaggerModel) -> Self {
        ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            labels: StanceLabel::ALL,
            training: model.info.clone(),
            start: wrap(model.start),
            end: wrap(model.end),
            transitions: model.transitions.map(wrap),
            features: model
                .features
                .iter()
                .zip(&model.emissions)
                .map(|(name, weights)| FeatureWeights {
                    name: name.clone(),
                    weights: *weights,
                })
                .collect(),
        }
    }
}

impl TryFrom<ModelFile> for TaggerModel {
    type Error = Error;

    fn try_from(file: ModelFile) -> Result<Self> {
        if file.format != MODEL_FORMAT {
            return Err(Error::Model(format!("not a tagger model (format {:?})", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                file.version
            )));
        }
        if file.labels != StanceLabel::ALL {
            return Err(Error::Model("label order must be PRO, CON, NON".to_string()));
        }
        let (names, weights): (Vec<String>, Vec<[f64; 3]>) =
            file.features.into_iter().map(|f| (f.name, f.weights)).unzip();
        let mut model = TaggerModel::zeros(names)?;
        model.emissions = weights;
        model.transitions = file.transitions.map(unwrap);
        model.start = unwrap(file.start);
        model.end = unwrap(file.end);
        model.info = file.training;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use StanceLabel::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn zero_model_predicts_all_pro() {
        let model = TaggerModel::zeros(vec!["bias".into()]).unwrap();
        let topic = Topic::aurc8("T1").unwrap();
        assert_eq!(model.predict(&toks("a b c d"), &topic), vec![Pro; 4]);
    }

    #[test]
    fn unknown_features_are_ignored() {
        let mut model = TaggerModel::zeros(vec!["w=bad".into(), "w=fine".into()]).unwrap();
        model.set_weight("w=bad", Con, 1.0).unwrap();
        model.set_weight("w=fine", Non, 1.0).unwrap();
        let topic = Topic::aurc8("T1").unwrap();
        assert_eq!(model.predict(&toks("bad fine unseen"), &topic), vec![Con, Non, Pro]);
        assert!(model.set_weight("w=unseen", Pro, 1.0).is_err());
    }

    #[test]
    fn round_trip_preserves_predictions_and_forbidden_transitions() {
        let mut model = TaggerModel::zeros(vec!["bias".into(), "w=x".into(), "w=y".into()]).unwrap();
        model.set_weight("bias", Non, 0.5).unwrap();
        model.set_weight("w=x", Pro, 1.25).unwrap();
        model.transitions[0][1] = f64::NEG_INFINITY;
        model.end[1] = -0.75;
        let mut buf = Vec::new();
        model.write(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).contains("\"-inf\""));
        let back = TaggerModel::read(buf.as_slice()).unwrap();
        assert_eq!(back, model);
        let topic = Topic::aurc8("T5").unwrap();
        let s = toks("x y x z");
        assert_eq!(back.predict(&s, &topic), model.predict(&s, &topic));
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn rejects_other_formats_and_versions() {
        let model = TaggerModel::zeros(vec![]).unwrap();
        let mut buf = Vec::new();
        model.write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let bumped = text.replace("\"version\":1", "\"version\":99");
        assert!(matches!(TaggerModel::read(bumped.as_bytes()), Err(Error::Model(_))));
        let other = text.replace("aurc-tagger", "something-else");
        assert!(TaggerModel::read(other.as_bytes()).is_err());
    }

    #[test]
    fn pruning_keeps_predictions() {
        let mut model = TaggerModel::zeros(vec!["bias".into(), "w=a".into(), "w=b".into()]).unwrap();
        model.set_weight("w=b", Con, 2.0).unwrap();
        let topic = Topic::aurc8("T1").unwrap();
        let s = toks("a b a");
        let before = model.predict(&s, &topic);
        model.prune();
        assert_eq!(model.feature_names(), ["w=b".to_string()]);
        assert_eq!(model.predict(&s, &topic), before);
    }
}
