//! Delimited-text importer for span-annotated sentences.
//!
//! The column layout is declared in a small `key=value` config file so that
//! different releases can be read without code changes. The defaults match the
//! AURC-8 release layout (`topic`, `sentence_hash`, `sentence`,
//! `merged_segments`, with character spans written as `(start,end)_label`).
//!
//! Character spans are mapped to tokens through token offsets. A token takes a
//! span's label only when it lies fully inside the span; a partial overlap
//! leaves the token NON and produces a warning.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use regex::Regex;

use super::{Corpus, LabeledSentence, Split, StanceLabel, Topic};
use crate::error::{Error, Result};

/// A column addressed by header name or by zero-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Name(String),
    Index(usize),
}

impl Column {
    fn parse(value: &str) -> Column {
        match value.trim().parse::<usize>() {
            Ok(index) => Column::Index(index),
            Err(_) => Column::Name(value.trim().to_string()),
        }
    }

    fn resolve(&self, header: Option<&[String]>) -> Result<usize> {
        match (self, header) {
            (Column::Index(i), _) => Ok(*i),
            (Column::Name(name), Some(header)) => header
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::invalid(format!("column {name:?} not found in header"))),
            (Column::Name(name), None) => Err(Error::invalid(format!(
                "column {name:?} addressed by name but the file has no header"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tokenizer {
    /// Split on whitespace only.
    Whitespace,
    /// Word characters (with inner apostrophes) form a token; every other
    /// non-space character is its own token.
    Simple,
}

#[derive(Debug, Clone)]
pub struct TsvConfig {
    pub delimiter: u8,
    pub header: bool,
    pub quoting: bool,
    pub id_column: Column,
    pub topic_column: Column,
    pub text_column: Column,
    pub segments_column: Option<Column>,
    /// Pre-tokenized text (whitespace separated); overrides `tokenizer`.
    pub tokens_column: Option<Column>,
    pub tokenizer: Tokenizer,
    /// Must capture start, end and label, in that order.
    pub segment_pattern: Regex,
    pub split_in_domain_column: Option<Column>,
    pub split_cross_domain_column: Option<Column>,
    /// Separate split assignment file, joined on sentence id.
    pub splits_file: Option<PathBuf>,
    pub splits_id_column: Column,
    pub splits_in_domain_column: Column,
    pub splits_cross_domain_column: Column,
}

impl Default for TsvConfig {
    fn default() -> Self {
        TsvConfig {
            delimiter: b'\t',
            header: true,
            quoting: true,
            id_column: Column::Name("sentence_hash".into()),
            topic_column: Column::Name("topic".into()),
            text_column: Column::Name("sentence".into()),
            segments_column: Some(Column::Name("merged_segments".into())),
            tokens_column: None,
            tokenizer: Tokenizer::Simple,
            segment_pattern: Regex::new(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)_([A-Za-z]+)").unwrap(),
            split_in_domain_column: None,
            split_cross_domain_column: None,
            splits_file: None,
            splits_id_column: Column::Name("sentence_hash".into()),
            splits_in_domain_column: Column::Name("In-Domain".into()),
            splits_cross_domain_column: Column::Name("Cross-Domain".into()),
        }
    }
}

impl TsvConfig {
    /// Reads a config file. Relative `splits_file` paths resolve against the
    /// config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::parse(&text)?;
        if let (Some(file), Some(dir)) = (&config.splits_file, path.parent()) {
            if file.is_relative() {
                config.splits_file = Some(dir.join(file));
            }
        }
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config = TsvConfig::default();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Record {
                path: "<tsv config>".into(),
                line: index + 1,
                message: format!("expected key=value, got {line:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let optional = |v: &str| (!v.is_empty() && v != "none").then(|| Column::parse(v));
            match key {
                "delimiter" => config.delimiter = parse_delimiter(value)?,
                "header" => config.header = parse_bool(key, value)?,
                "quoting" => config.quoting = parse_bool(key, value)?,
                "id_column" => config.id_column = Column::parse(value),
                "topic_column" => config.topic_column = Column::parse(value),
                "text_column" => config.text_column = Column::parse(value),
                "segments_column" => config.segments_column = optional(value),
                "tokens_column" => config.tokens_column = optional(value),
                "tokenizer" => {
                    config.tokenizer = match value {
                        "whitespace" => Tokenizer::Whitespace,
                        "simple" => Tokenizer::Simple,
                        other => return Err(Error::invalid(format!("unknown tokenizer {other:?}"))),
                    }
                }
                "segment_pattern" => {
                    let pattern = Regex::new(value)
                        .map_err(|e| Error::invalid(format!("bad segment_pattern: {e}")))?;
                    if pattern.captures_len() < 4 {
                        return Err(Error::invalid(
                            "segment_pattern needs three groups: start, end, label",
                        ));
                    }
                    config.segment_pattern = pattern;
                }
                "split_in_domain_column" => config.split_in_domain_column = optional(value),
                "split_cross_domain_column" => config.split_cross_domain_column = optional(value),
                "splits_file" => {
                    config.splits_file = (!value.is_empty()).then(|| PathBuf::from(value))
                }
                "splits_id_column" => config.splits_id_column = Column::parse(value),
                "splits_in_domain_column" => config.splits_in_domain_column = Column::parse(value),
                "splits_cross_domain_column" => {
                    config.splits_cross_domain_column = Column::parse(value)
                }
                other => {
                    return Err(Error::Record {
                        path: "<tsv config>".into(),
                        line: index + 1,
                        message: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        Ok(config)
    }
}

fn parse_delimiter(value: &str) -> Result<u8> {
    match value {
        "\\t" | "tab" | "" => Ok(b'\t'),
        "comma" => Ok(b','),
        v if v.len() == 1 => Ok(v.as_bytes()[0]),
        other => Err(Error::invalid(format!("unsupported delimiter {other:?}"))),
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::invalid(format!("{key}: expected a boolean, got {other:?}"))),
    }
}

/// A token with its character offsets `[start, end)` in the sentence text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetToken {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Tokenizes `text`, reporting offsets in characters (not bytes).
pub fn tokenize(text: &str, tokenizer: Tokenizer) -> Vec<OffsetToken> {
    let pattern = match tokenizer {
        Tokenizer::Whitespace => r"\S+",
        Tokenizer::Simple => r"\w+(?:['’]\w+)*|[^\w\s]",
    };
    let re = Regex::new(pattern).expect("static pattern");
    let char_index = byte_to_char_index(text);
    re.find_iter(text)
        .map(|m| OffsetToken {
            text: m.as_str().to_string(),
            start: char_index[m.start()],
            end: char_index[m.end()],
        })
        .collect()
}

/// Locates pre-tokenized tokens in `text`, left to right.
pub fn align_tokens(text: &str, tokens: &[String]) -> Result<Vec<OffsetToken>> {
    let char_index = byte_to_char_index(text);
    let mut cursor = 0;
    let mut out = Vec::with_capacity(tokens.len());
    for token in tokens {
        let found = text[cursor..]
            .find(token.as_str())
            .ok_or_else(|| Error::invalid(format!("token {token:?} not found in text after offset {cursor}")))?;
        let start = cursor + found;
        let end = start + token.len();
        out.push(OffsetToken {
            text: token.clone(),
            start: char_index[start],
            end: char_index[end],
        });
        cursor = end;
    }
    Ok(out)
}

fn byte_to_char_index(text: &str) -> Vec<usize> {
    let mut index = vec![0; text.len() + 1];
    let mut chars = 0;
    for (byte, _) in text.char_indices() {
        index[byte] = chars;
        chars += 1;
    }
    index[text.len()] = chars;
    index
}

/// A labeled character span `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharSpan {
    pub label: StanceLabel,
    pub start: usize,
    pub end: usize,
}

/// Assigns each token the label of the span that fully contains it.
///
/// Returns the labels plus one warning per partially covered token.
pub fn char_spans_to_labels(tokens: &[OffsetToken], spans: &[CharSpan]) -> (Vec<StanceLabel>, Vec<String>) {
    let mut labels = vec![StanceLabel::Non; tokens.len()];
    let mut warnings = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        for span in spans {
            let inside = span.start <= token.start && token.end <= span.end;
            let touches = token.start < span.end && span.start < token.end;
            if inside {
                if labels[i] != StanceLabel::Non && labels[i] != span.label {
                    warnings.push(format!(
                        "token {i} {:?} lies in spans with different labels; keeping {}",
                        token.text, labels[i]
                    ));
                    continue;
                }
                labels[i] = span.label;
            } else if touches {
                warnings.push(format!(
                    "token {i} {:?} [{},{}) only partially inside {} span [{},{}); left NON",
                    token.text, token.start, token.end, span.label, span.start, span.end
                ));
            }
        }
    }
    (labels, warnings)
}

fn parse_spans(field: &str, pattern: &Regex) -> Result<Vec<CharSpan>> {
    let mut spans = Vec::new();
    for caps in pattern.captures_iter(field) {
        let number = |i: usize| -> Result<usize> {
            caps[i]
                .parse()
                .map_err(|_| Error::invalid(format!("bad span offset {:?}", &caps[i])))
        };
        let label: StanceLabel = caps[3].parse()?;
        if label == StanceLabel::Non {
            continue;
        }
        let (start, end) = (number(1)?, number(2)?);
        if start >= end {
            return Err(Error::invalid(format!("empty span ({start},{end})")));
        }
        spans.push(CharSpan { label, start, end });
    }
    let leftover = pattern.replace_all(field, "");
    let leftover = leftover.trim_matches(|c: char| c.is_whitespace() || ";,|[]{}\"'".contains(c));
    let placeholder = ["", "none", "nan", "n/a", "-", "[]"];
    if !placeholder.contains(&leftover.to_ascii_lowercase().as_str()) {
        return Err(Error::invalid(format!("unparsed segment text {leftover:?}")));
    }
    Ok(spans)
}

fn parse_optional_split(value: &str) -> Result<Option<Split>> {
    let value = value.trim();
    match value.to_ascii_lowercase().as_str() {
        "" | "-" | "none" | "nan" | "null" => Ok(None),
        _ => value.parse().map(Some),
    }
}

#[derive(Debug)]
pub struct ImportReport {
    pub corpus: Corpus,
    pub warnings: Vec<String>,
}

fn reader_for(config: &TsvConfig, text: &str) -> csv::Reader<std::io::Cursor<Vec<u8>>> {
    csv::ReaderBuilder::new()
        .delimiter(config.delimiter)
        .has_headers(false)
        .quoting(config.quoting)
        .flexible(true)
        .from_reader(std::io::Cursor::new(text.as_bytes().to_vec()))
}

type SplitTable = HashMap<String, (Option<Split>, Option<Split>)>;

fn read_split_table(config: &TsvConfig, path: &Path) -> Result<SplitTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = reader_for(config, &text);
    let mut rows = reader.records();
    let header: Vec<String> = match rows.next() {
        Some(row) => row
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?
            .iter()
            .map(str::to_string)
            .collect(),
        None => return Ok(SplitTable::new()),
    };
    let id = config.splits_id_column.resolve(Some(&header))?;
    let in_domain = config.splits_in_domain_column.resolve(Some(&header))?;
    let cross = config.splits_cross_domain_column.resolve(Some(&header))?;
    let mut table = SplitTable::new();
    for (index, row) in rows.enumerate() {
        let record_error = |message: String| Error::Record {
            path: path.display().to_string(),
            line: index + 2,
            message,
        };
        let row = row.map_err(|e| record_error(e.to_string()))?;
        let field = |i: usize| row.get(i).ok_or_else(|| record_error(format!("missing column {i}")));
        let splits = (
            parse_optional_split(field(in_domain)?).map_err(|e| record_error(e.to_string()))?,
            parse_optional_split(field(cross)?).map_err(|e| record_error(e.to_string()))?,
        );
        table.insert(field(id)?.trim().to_string(), splits);
    }
    Ok(table)
}

pub fn import_tsv(path: impl AsRef<Path>, config: &TsvConfig) -> Result<ImportReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut report = import_tsv_str(&text, config, &path.display().to_string())?;
    if let Some(splits_path) = &config.splits_file {
        let table = read_split_table(config, splits_path)?;
        for sentence in &mut report.corpus.sentences {
            match table.get(&sentence.sentence_id) {
                Some((in_domain, cross)) => {
                    sentence.split_in_domain = *in_domain;
                    sentence.split_cross_domain = *cross;
                }
                None => report.warnings.push(format!(
                    "sentence {} has no entry in {}",
                    sentence.sentence_id,
                    splits_path.display()
                )),
            }
        }
    }
    Ok(report)
}

/// Imports from in-memory text; `source` names the input in error messages.
pub fn import_tsv_str(text: &str, config: &TsvConfig, source: &str) -> Result<ImportReport> {
    let mut reader = reader_for(config, text);
    let mut rows = reader.records().enumerate().peekable();
    let header: Option<Vec<String>> = if config.header {
        match rows.next() {
            Some((_, row)) => Some(
                row.map_err(|e| Error::invalid(format!("{source}: {e}")))?
                    .iter()
                    .map(str::to_string)
                    .collect(),
            ),
            None => None,
        }
    } else {
        None
    };
    let header = header.as_deref();
    let id_col = config.id_column.resolve(header)?;
    let topic_col = config.topic_column.resolve(header)?;
    let text_col = config.text_column.resolve(header)?;
    let segments_col = config.segments_column.as_ref().map(|c| c.resolve(header)).transpose()?;
    let tokens_col = config.tokens_column.as_ref().map(|c| c.resolve(header)).transpose()?;
    let in_domain_col = config.split_in_domain_column.as_ref().map(|c| c.resolve(header)).transpose()?;
    let cross_col = config.split_cross_domain_column.as_ref().map(|c| c.resolve(header)).transpose()?;

    let mut sentences = Vec::new();
    let mut warnings = Vec::new();
    for (index, row) in rows {
        let line = index + 1;
        let record_error = |message: String| Error::Record {
            path: source.to_string(),
            line,
            message,
        };
        let row = row.map_err(|e| record_error(e.to_string()))?;
        if row.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let field = |i: usize| row.get(i).ok_or_else(|| record_error(format!("missing column {i}")));
        let sentence_id = field(id_col)?.trim().to_string();
        let with_id = |e: Error| record_error(format!("sentence {sentence_id}: {e}"));
        let topic = Topic::aurc8(field(topic_col)?).map_err(with_id)?;
        let sentence_text = field(text_col)?;
        let tokens = match tokens_col {
            Some(col) => {
                let given: Vec<String> = field(col)?.split_whitespace().map(str::to_string).collect();
                align_tokens(sentence_text, &given).map_err(with_id)?
            }
            None => tokenize(sentence_text, config.tokenizer),
        };
        let spans = match segments_col {
            Some(col) => parse_spans(field(col)?, &config.segment_pattern).map_err(with_id)?,
            None => Vec::new(),
        };
        let (labels, span_warnings) = char_spans_to_labels(&tokens, &spans);
        warnings.extend(span_warnings.into_iter().map(|w| format!("{source}:{line}: sentence {sentence_id}: {w}")));
        let token_texts = tokens.into_iter().map(|t| t.text).collect();
        let mut sentence =
            LabeledSentence::new(sentence_id.clone(), topic, token_texts, labels).map_err(with_id)?;
        if let Some(col) = in_domain_col {
            sentence.split_in_domain = parse_optional_split(field(col)?).map_err(with_id)?;
        }
        if let Some(col) = cross_col {
            sentence.split_cross_domain = parse_optional_split(field(col)?).map_err(with_id)?;
        }
        sentences.push(sentence);
    }
    let corpus = Corpus { sentences };
    corpus.validate()?;
    Ok(ImportReport { corpus, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use StanceLabel::*;

    // "School uniforms , they say , create unity and end bullying ."
    const TEXT: &str = "School uniforms, they say, create unity and end bullying.";

    #[test]
    fn simple_tokenizer_offsets() {
        let tokens = tokenize("It's 5 o'clock, ok?", Tokenizer::Simple);
        let texts: Vec<_> = tokens.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, ["It's", "5", "o'clock", ",", "ok", "?"]);
        assert_eq!((tokens[2].start, tokens[2].end), (7, 14));
    }

    #[test]
    fn offsets_count_characters_not_bytes() {
        let tokens = tokenize("café au lait", Tokenizer::Whitespace);
        assert_eq!((tokens[1].start, tokens[1].end), (5, 7));
    }

    #[test]
    fn char_span_maps_to_fully_covered_tokens() {
        // Offsets by hand:
        //   School[0,6) uniforms[7,15) ,[15,16) they[17,21) say[22,25) ,[25,26)
        //   create[27,33) unity[34,39) and[40,43) end[44,47) bullying[48,56) .[56,57)
        let tokens = tokenize(TEXT, Tokenizer::Simple);
        let expected_offsets = [
            (0, 6), (7, 15), (15, 16), (17, 21), (22, 25), (25, 26),
            (27, 33), (34, 39), (40, 43), (44, 47), (48, 56), (56, 57),
        ];
        let offsets: Vec<_> = tokens.iter().map(|t| (t.start, t.end)).collect();
        assert_eq!(offsets, expected_offsets);

        // [17, 62) runs past the end of the text; tokens 3..12 lie fully inside.
        let (labels, warnings) = char_spans_to_labels(&tokens, &[CharSpan { label: Pro, start: 17, end: 62 }]);
        assert_eq!(labels, [Non, Non, Non, Pro, Pro, Pro, Pro, Pro, Pro, Pro, Pro, Pro]);
        assert!(warnings.is_empty());

        // [19, 39) cuts "they" in half: it stays NON and is reported.
        let (labels, warnings) = char_spans_to_labels(&tokens, &[CharSpan { label: Con, start: 19, end: 39 }]);
        assert_eq!(labels, [Non, Non, Non, Non, Con, Con, Con, Con, Non, Non, Non, Non]);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("\"they\""));
    }

    #[test]
    fn imports_release_layout_with_split_columns() {
        let config = TsvConfig::parse(
            "# release layout plus inline splits\n\
             split_in_domain_column=In-Domain\n\
             split_cross_domain_column=Cross-Domain\n",
        )
        .unwrap();
        let text = format!(
            "topic\tsentence_hash\tsentence\tmerged_segments\tIn-Domain\tCross-Domain\n\
             school uniforms\tabc\t{TEXT}\t(17,57)_con\tNone\tTest\n\
             abortion\tdef\tNothing to see here .\t\tTrain\tTrain\n"
        );
        let report = import_tsv_str(&text, &config, "mem").unwrap();
        let corpus = report.corpus;
        assert_eq!(corpus.len(), 2);
        let first = &corpus.sentences[0];
        assert_eq!(first.topic.id, "T8");
        assert_eq!(first.labels.iter().filter(|l| **l == Con).count(), 9);
        assert_eq!(first.split_in_domain, None);
        assert_eq!(first.split_cross_domain, Some(Split::Test));
        assert!(!corpus.sentences[1].is_argumentative());
        assert_eq!(corpus.sentences[1].split_in_domain, Some(Split::Train));
    }

    #[test]
    fn pretokenized_column_and_index_addressing() {
        let config = TsvConfig::parse(
            "header=false\nid_column=0\ntopic_column=1\ntext_column=2\ntokens_column=3\nsegments_column=4\n",
        )
        .unwrap();
        let text = "x1\tT2\tClones aren't people.\tClones are n't people .\t(0,22)_pro\n";
        let corpus = import_tsv_str(text, &config, "mem").unwrap().corpus;
        assert_eq!(corpus.sentences[0].tokens, ["Clones", "are", "n't", "people", "."]);
        assert_eq!(corpus.sentences[0].labels, [Pro, Pro, Pro, Pro, Pro]);
    }

    #[test]
    fn bad_inputs_are_errors_with_line_numbers() {
        let config = TsvConfig::default();
        let unknown_label = "topic\tsentence_hash\tsentence\tmerged_segments\ncloning\tq\ta b c\t(0,3)_maybe\n";
        let err = import_tsv_str(unknown_label, &config, "mem").unwrap_err().to_string();
        assert!(err.starts_with("mem:2:") && err.contains("maybe"), "{err}");

        let garbage = "topic\tsentence_hash\tsentence\tmerged_segments\ncloning\tq\ta b c\tsomething odd\n";
        assert!(import_tsv_str(garbage, &config, "mem").is_err());

        let unknown_topic = "topic\tsentence_hash\tsentence\tmerged_segments\nvaccines\tq\ta b c\t\n";
        assert!(import_tsv_str(unknown_topic, &config, "mem").unwrap_err().to_string().contains("vaccines"));

        assert!(TsvConfig::parse("colour=blue").is_err());
        assert!(TsvConfig::parse("segment_pattern=(\\d+)").is_err());
    }
}
