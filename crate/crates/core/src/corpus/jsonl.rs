use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Corpus, LabeledSentence, Split, StanceLabel, Topic};
use crate::error::{Error, Result};

/// One line of the canonical corpus file. Field order is the serialized order.
#[derive(Debug, Serialize, Deserialize)]
struct SentenceRecord {
    sentence_id: String,
    topic_id: String,
    topic_name: String,
    tokens: Vec<String>,
    labels: Vec<String>,
    #[serde(default)]
    split_in_domain: Option<String>,
    #[serde(default)]
    split_cross_domain: Option<String>,
}

impl SentenceRecord {
    fn from_sentence(sentence: &LabeledSentence) -> Self {
        SentenceRecord {
            sentence_id: sentence.sentence_id.clone(),
            topic_id: sentence.topic.id.clone(),
            topic_name: sentence.topic.name.clone(),
            tokens: sentence.tokens.clone(),
            labels: sentence.labels.iter().map(|l| l.as_str().to_string()).collect(),
            split_in_domain: sentence.split_in_domain.map(split_name),
            split_cross_domain: sentence.split_cross_domain.map(split_name),
        }
    }

    fn into_sentence(self) -> Result<LabeledSentence> {
        let labels = self
            .labels
            .iter()
            .map(|l| l.parse::<StanceLabel>())
            .collect::<Result<Vec<_>>>()?;
        let parse_split = |s: Option<String>| s.map(|s| s.parse::<Split>()).transpose();
        let mut sentence = LabeledSentence::new(
            self.sentence_id,
            Topic::new(self.topic_id, self.topic_name),
            self.tokens,
            labels,
        )?;
        sentence.split_in_domain = parse_split(self.split_in_domain)?;
        sentence.split_cross_domain = parse_split(self.split_cross_domain)?;
        Ok(sentence)
    }
}

fn split_name(split: Split) -> String {
    match split {
        Split::Train => "Train",
        Split::Dev => "Dev",
        Split::Test => "Test",
    }
    .to_string()
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), &path.display().to_string())
}

/// Parses canonical JSONL; `source` names the input in error messages.
pub fn read_corpus<R: BufRead>(reader: R, source: &str) -> Result<Corpus> {
    let mut sentences = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record_error = |message: String| Error::Record {
            path: source.to_string(),
            line: line_no,
            message,
        };
        let record: SentenceRecord =
            serde_json::from_str(&line).map_err(|e| record_error(format!("malformed record: {e}")))?;
        let id = record.sentence_id.clone();
        let sentence = record
            .into_sentence()
            .map_err(|e| record_error(format!("sentence {id}: {e}")))?;
        sentences.push(sentence);
    }
    let corpus = Corpus { sentences };
    corpus.validate().map_err(|e| Error::Record {
        path: source.to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    Ok(corpus)
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    write_corpus(corpus, &mut writer).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn write_corpus<W: Write>(corpus: &Corpus, writer: &mut W) -> Result<()> {
    for sentence in &corpus.sentences {
        serde_json::to_writer(&mut *writer, &SentenceRecord::from_sentence(sentence))?;
        writer.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}
