//! Combining several annotators' token labels into one gold sequence.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::corpus::{labels_to_segments, segments_to_labels, Corpus, LabeledSentence, StanceLabel, Topic};
use crate::error::{Error, Result};

/// All annotators' label sequences for one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationSet {
    pub sentence_id: String,
    pub annotations: BTreeMap<String, Vec<StanceLabel>>,
}

impl AnnotationSet {
    pub fn new(
        sentence_id: impl Into<String>,
        annotations: BTreeMap<String, Vec<StanceLabel>>,
    ) -> Result<Self> {
        let set = AnnotationSet {
            sentence_id: sentence_id.into(),
            annotations,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        let mut lengths = self.annotations.values().map(Vec::len);
        let first = lengths
            .next()
            .ok_or_else(|| Error::sentence(&self.sentence_id, "no annotators"))?;
        if first == 0 {
            return Err(Error::sentence(&self.sentence_id, "empty label sequence"));
        }
        for (annotator, labels) in &self.annotations {
            if labels.len() != first {
                return Err(Error::sentence(
                    &self.sentence_id,
                    format!(
                        "annotator {annotator} has {} labels, others have {first}",
                        labels.len()
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Sentence length in tokens.
    pub fn len(&self) -> usize {
        self.annotations.values().next().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn annotator_count(&self) -> usize {
        self.annotations.len()
    }
}

/// Per-token plurality over `sequences`; a tie for the highest count yields NON.
///
/// All sequences must have the same length.
pub fn plurality<'a, I>(sequences: I, length: usize) -> Vec<StanceLabel>
where
    I: IntoIterator<Item = &'a [StanceLabel]>,
{
    let mut counts = vec![[0usize; 3]; length];
    for sequence in sequences {
        for (slot, label) in counts.iter_mut().zip(sequence) {
            slot[label.index()] += 1;
        }
    }
    counts.iter().map(winner).collect()
}

pub(crate) fn winner(votes: &[usize; 3]) -> StanceLabel {
    let max = *votes.iter().max().expect("three classes");
    let mut leaders = StanceLabel::ALL.iter().filter(|l| votes[l.index()] == max);
    match (leaders.next(), leaders.next()) {
        (Some(&label), None) => label,
        _ => StanceLabel::Non,
    }
}

/// Token-level majority vote, ties broken as NON.
pub fn majority_vote(set: &AnnotationSet) -> Result<Vec<StanceLabel>> {
    set.validate()?;
    Ok(plurality(set.annotations.values().map(Vec::as_slice), set.len()))
}

/// Majority vote followed by segment canonicalization (maximal same-stance runs).
pub fn aggregate_gold(set: &AnnotationSet) -> Result<Vec<StanceLabel>> {
    let voted = majority_vote(set)?;
    let segments = labels_to_segments(&voted)?;
    segments_to_labels(&segments, voted.len())
}

/// Strategy for turning an annotation set into gold labels.
pub trait Aggregator {
    fn aggregate(&self, set: &AnnotationSet) -> Result<Vec<StanceLabel>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MajorityVote;

impl Aggregator for MajorityVote {
    fn aggregate(&self, set: &AnnotationSet) -> Result<Vec<StanceLabel>> {
        aggregate_gold(set)
    }
}

/// Gold labels supplied from elsewhere (e.g. a separately aggregated corpus file).
#[derive(Debug, Clone, Default)]
pub struct ExternalGold {
    pub labels: HashMap<String, Vec<StanceLabel>>,
}

impl ExternalGold {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        ExternalGold {
            labels: corpus
                .iter()
                .map(|s| (s.sentence_id.clone(), s.labels.clone()))
                .collect(),
        }
    }
}

impl Aggregator for ExternalGold {
    fn aggregate(&self, set: &AnnotationSet) -> Result<Vec<StanceLabel>> {
        let labels = self
            .labels
            .get(&set.sentence_id)
            .ok_or_else(|| Error::sentence(&set.sentence_id, "no external gold labels"))?;
        if labels.len() != set.len() {
            return Err(Error::LengthMismatch {
                sentence_id: set.sentence_id.clone(),
                expected: set.len(),
                actual: labels.len(),
            });
        }
        Ok(labels.clone())
    }
}

/// Mean token agreement (in percent) between `reference` and the majority vote
/// of every size-`k` annotator subset.
///
/// Each sentence contributes the mean over its `C(n, k)` subsets; sentences are
/// then averaged with equal weight.
pub fn overlap_curve(
    reference: &HashMap<String, Vec<StanceLabel>>,
    sets: &[AnnotationSet],
    k: usize,
) -> Result<f64> {
    if sets.is_empty() {
        return Err(Error::invalid("no annotation sets"));
    }
    let mut total = 0.0;
    for set in sets {
        set.validate()?;
        let n = set.annotator_count();
        if k == 0 || k > n {
            return Err(Error::sentence(
                &set.sentence_id,
                format!("worker count {k} outside [1, {n}]"),
            ));
        }
        let gold = reference
            .get(&set.sentence_id)
            .ok_or_else(|| Error::sentence(&set.sentence_id, "missing from reference"))?;
        if gold.len() != set.len() {
            return Err(Error::LengthMismatch {
                sentence_id: set.sentence_id.clone(),
                expected: set.len(),
                actual: gold.len(),
            });
        }
        let sequences: Vec<&[StanceLabel]> = set.annotations.values().map(Vec::as_slice).collect();
        let mut subset_sum = 0.0;
        let mut subsets = 0usize;
        for combo in sequences.iter().copied().combinations(k) {
            let voted = plurality(combo, set.len());
            let agree = voted.iter().zip(gold).filter(|(a, b)| a == b).count();
            subset_sum += agree as f64 / set.len() as f64;
            subsets += 1;
        }
        total += subset_sum / subsets as f64;
    }
    Ok(100.0 * total / sets.len() as f64)
}

/// One line of the annotation input file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub sentence_id: String,
    pub annotator_id: String,
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic_name: Option<String>,
}

/// Annotation sets plus whatever sentence metadata the records carried.
#[derive(Debug, Clone, Default)]
pub struct AnnotationFile {
    /// In order of first appearance.
    pub sets: Vec<AnnotationSet>,
    pub tokens: HashMap<String, Vec<String>>,
    pub topics: HashMap<String, Topic>,
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<AnnotationFile> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_annotations(BufReader::new(file), &path.display().to_string())
}

pub fn read_annotations<R: BufRead>(reader: R, source: &str) -> Result<AnnotationFile> {
    let mut out = AnnotationFile::default();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record_error = |message: String| Error::Record {
            path: source.to_string(),
            line: line_no,
            message,
        };
        let record: AnnotationRecord =
            serde_json::from_str(&line).map_err(|e| record_error(format!("malformed record: {e}")))?;
        let labels = record
            .labels
            .iter()
            .map(|l| l.parse())
            .collect::<Result<Vec<StanceLabel>>>()
            .map_err(|e| record_error(e.to_string()))?;
        let slot = *index.entry(record.sentence_id.clone()).or_insert_with(|| {
            out.sets.push(AnnotationSet {
                sentence_id: record.sentence_id.clone(),
                annotations: BTreeMap::new(),
            });
            out.sets.len() - 1
        });
        let set = &mut out.sets[slot];
        if set
            .annotations
            .insert(record.annotator_id.clone(), labels)
            .is_some()
        {
            return Err(record_error(format!(
                "annotator {} labeled sentence {} twice",
                record.annotator_id, record.sentence_id
            )));
        }
        set.validate().map_err(|e| record_error(e.to_string()))?;
        if let Some(tokens) = record.tokens {
            if tokens.len() != set.len() {
                return Err(record_error(format!(
                    "{} tokens but {} labels",
                    tokens.len(),
                    set.len()
                )));
            }
            out.tokens.entry(record.sentence_id.clone()).or_insert(tokens);
        }
        if let Some(topic_id) = record.topic_id {
            let topic = match record.topic_name {
                Some(name) => Topic::new(topic_id, name),
                None => Topic::aurc8(&topic_id).map_err(|e| record_error(e.to_string()))?,
            };
            out.topics.entry(record.sentence_id).or_insert(topic);
        }
    }
    Ok(out)
}

/// Builds a canonical corpus from aggregated annotations. Tokens and topics
/// come from the annotation records or, failing that, from `base`.
pub fn aggregate_corpus(
    annotations: &AnnotationFile,
    aggregator: &dyn Aggregator,
    base: Option<&Corpus>,
) -> Result<Corpus> {
    let mut sentences = Vec::with_capacity(annotations.sets.len());
    for set in &annotations.sets {
        let id = &set.sentence_id;
        let from_base = base.and_then(|c| c.get(id));
        let tokens = annotations
            .tokens
            .get(id)
            .cloned()
            .or_else(|| from_base.map(|s| s.tokens.clone()))
            .ok_or_else(|| Error::sentence(id, "no tokens in annotations or base corpus"))?;
        let topic = annotations
            .topics
            .get(id)
            .cloned()
            .or_else(|| from_base.map(|s| s.topic.clone()))
            .ok_or_else(|| Error::sentence(id, "no topic in annotations or base corpus"))?;
        let labels = aggregator.aggregate(set)?;
        let mut sentence = LabeledSentence::new(id.clone(), topic, tokens, labels)?;
        if let Some(base_sentence) = from_base {
            sentence.split_in_domain = base_sentence.split_in_domain;
            sentence.split_cross_domain = base_sentence.split_cross_domain;
        }
        sentences.push(sentence);
    }
    Corpus::new(sentences)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_util::labels;
    use proptest::prelude::*;
    use StanceLabel::*;

    fn set(id: &str, rows: &[&str]) -> AnnotationSet {
        let annotations = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (format!("a{i}"), labels(r)))
            .collect();
        AnnotationSet::new(id, annotations).unwrap()
    }

    /// Independent tally: count each class with explicit comparisons.
    fn brute_force_tally(rows: &[Vec<StanceLabel>]) -> Vec<StanceLabel> {
        (0..rows[0].len())
            .map(|t| {
                let pro = rows.iter().filter(|r| r[t] == Pro).count();
                let con = rows.iter().filter(|r| r[t] == Con).count();
                let non = rows.iter().filter(|r| r[t] == Non).count();
                if pro > con && pro > non {
                    Pro
                } else if con > pro && con > non {
                    Con
                } else {
                    Non
                }
            })
            .collect()
    }

    #[test]
    fn unanimous_and_tie_rules() {
        assert_eq!(majority_vote(&set("s", &["P", "P", "P", "P", "P"])).unwrap(), [Pro]);
        assert_eq!(majority_vote(&set("s", &["P", "P", "C", "C", "N"])).unwrap(), [Non]);
        assert_eq!(majority_vote(&set("s", &["P", "P", "N", "N", "C"])).unwrap(), [Non]);
        assert_eq!(majority_vote(&set("s", &["C", "C", "P", "N", "N"])).unwrap(), [Non]);
        assert_eq!(majority_vote(&set("s", &["C", "C", "P", "N", "C"])).unwrap(), [Con]);
    }

    #[test]
    fn identical_annotators_reproduce_their_labels() {
        let gold = aggregate_gold(&set("s", &["NPPCN", "NPPCN", "NPPCN"])).unwrap();
        assert_eq!(gold, labels("NPPCN"));
    }

    #[test]
    fn gold_is_one_maximal_segment() {
        let gold = aggregate_gold(&set("s", &["PPP", "PPN", "NPP"])).unwrap();
        assert_eq!(gold, labels("PPP"));
        assert_eq!(labels_to_segments(&gold).unwrap().len(), 1);
    }

    #[test]
    fn five_annotators_match_brute_force_tally() {
        let rows = ["PPNCCNNP", "PNNCCNPP", "PPNNCCNP", "NPNCCNNN", "PPCCNNPP"];
        let expected = brute_force_tally(&rows.iter().map(|r| labels(r)).collect::<Vec<_>>());
        assert_eq!(aggregate_gold(&set("s", &rows)).unwrap(), expected);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let annotations = [("a".to_string(), labels("PP")), ("b".to_string(), labels("P"))]
            .into_iter()
            .collect();
        assert!(AnnotationSet::new("s", annotations).is_err());
    }

    #[test]
    fn overlap_with_all_annotators_is_complete() {
        let sets = vec![set("s1", &["PPN", "PNN", "CPN"]), set("s2", &["NNNN", "CCNN", "CCCN"])];
        let reference = sets
            .iter()
            .map(|s| (s.sentence_id.clone(), majority_vote(s).unwrap()))
            .collect();
        assert!((overlap_curve(&reference, &sets, 3).unwrap() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn identical_pair_at_k1() {
        let sets = vec![set("s", &["PPNC", "PPNC"])];
        let reference = [("s".to_string(), labels("PPNC"))].into_iter().collect();
        assert!((overlap_curve(&reference, &sets, 1).unwrap() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn three_annotators_k2_matches_enumeration() {
        // Subsets by hand, reference NPPN:
        //   {a,b}: votes PPPN vs NPPN? a=PPPN b=NPPC -> pos0 P/N tie->N, pos1 P, pos2 P, pos3 N/C tie->N => NPPN, 4/4
        //   {a,c}: a=PPPN c=NNPN -> pos0 tie N, pos1 tie N, pos2 P, pos3 N => NNPN, 3/4
        //   {b,c}: b=NPPC c=NNPN -> pos0 N, pos1 tie N, pos2 P, pos3 tie N => NNPN, 3/4
        // mean = (1 + 0.75 + 0.75) / 3 = 5/6
        let sets = vec![set("s", &["PPPN", "NPPC", "NNPN"])];
        let reference = [("s".to_string(), labels("NPPN"))].into_iter().collect();
        let value = overlap_curve(&reference, &sets, 2).unwrap();
        assert!((value - 100.0 * 5.0 / 6.0).abs() < 1e-9, "{value}");
    }

    #[test]
    fn overlap_rejects_bad_k() {
        let sets = vec![set("s", &["P", "N"])];
        let reference = [("s".to_string(), labels("P"))].into_iter().collect();
        assert!(overlap_curve(&reference, &sets, 0).is_err());
        assert!(overlap_curve(&reference, &sets, 3).is_err());
    }

    #[test]
    fn reads_annotation_jsonl_and_builds_corpus() {
        let input = r#"{"sentence_id":"s1","annotator_id":"w1","labels":["PRO","PRO","NON"],"tokens":["a","b","c"],"topic_id":"T2"}
{"sentence_id":"s1","annotator_id":"w2","labels":["PRO","NON","NON"]}
{"sentence_id":"s1","annotator_id":"w3","labels":["PRO","PRO","CON"]}
"#;
        let file = read_annotations(input.as_bytes(), "mem").unwrap();
        assert_eq!(file.sets.len(), 1);
        let corpus = aggregate_corpus(&file, &MajorityVote, None).unwrap();
        assert_eq!(corpus.sentences[0].labels, labels("PPN"));
        assert_eq!(corpus.sentences[0].topic.name, "cloning");

        let duplicate = format!("{input}{}", r#"{"sentence_id":"s1","annotator_id":"w3","labels":["PRO","PRO","CON"]}"#);
        assert!(read_annotations(duplicate.as_bytes(), "mem").unwrap_err().to_string().contains("mem:4"));
    }

    #[test]
    fn external_gold_overrides_vote() {
        let file = read_annotations(
            r#"{"sentence_id":"s1","annotator_id":"w1","labels":["PRO","PRO"],"tokens":["a","b"],"topic_id":"T1"}"#.as_bytes(),
            "mem",
        )
        .unwrap();
        let gold = ExternalGold {
            labels: [("s1".to_string(), labels("NC"))].into_iter().collect(),
        };
        let corpus = aggregate_corpus(&file, &gold, None).unwrap();
        assert_eq!(corpus.sentences[0].labels, labels("NC"));
    }

    fn rows_strategy() -> impl Strategy<Value = Vec<Vec<StanceLabel>>> {
        (1usize..8, 1usize..7).prop_flat_map(|(len, annotators)| {
            prop::collection::vec(
                prop::collection::vec(prop_oneof![Just(Pro), Just(Con), Just(Non)], len),
                annotators,
            )
        })
    }

    fn set_from_rows(rows: &[Vec<StanceLabel>]) -> AnnotationSet {
        let annotations = rows.iter().enumerate().map(|(i, r)| (format!("w{i}"), r.clone())).collect();
        AnnotationSet::new("s", annotations).unwrap()
    }

    proptest! {
        #[test]
        fn vote_matches_tally(rows in rows_strategy()) {
            let voted = majority_vote(&set_from_rows(&rows)).unwrap();
            prop_assert_eq!(voted.len(), rows[0].len());
            prop_assert_eq!(voted, brute_force_tally(&rows));
        }

        #[test]
        fn vote_is_order_invariant(rows in rows_strategy(), rotate in 0usize..7) {
            let mut shuffled = rows.clone();
            let r = rotate % shuffled.len();
            shuffled.rotate_left(r);
            shuffled.reverse();
            prop_assert_eq!(
                majority_vote(&set_from_rows(&rows)).unwrap(),
                majority_vote(&set_from_rows(&shuffled)).unwrap()
            );
        }

        #[test]
        fn single_annotator_is_identity(row in prop::collection::vec(prop_oneof![Just(Pro), Just(Con), Just(Non)], 1..20)) {
            prop_assert_eq!(majority_vote(&set_from_rows(std::slice::from_ref(&row))).unwrap(), row);
        }

        #[test]
        fn overlap_in_range(rows in rows_strategy(), k in 1usize..7) {
            let set = set_from_rows(&rows);
            let k = 1 + (k - 1) % set.annotator_count();
            let reference = [("s".to_string(), rows[0].clone())].into_iter().collect();
            let value = overlap_curve(&reference, &[set], k).unwrap();
            prop_assert!((0.0..=100.0).contains(&value));
        }
    }
}
