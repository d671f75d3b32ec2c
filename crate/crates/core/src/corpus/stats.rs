use std::fmt;

use serde::Serialize;

use super::{LabeledSentence, StanceLabel, Topic};

/// Counts for one topic (or the whole corpus).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicStats {
    pub topic_id: String,
    pub topic_name: String,
    pub sentences: usize,
    pub arg_sentences: usize,
    pub arg_units: usize,
    pub non_arg_sentences: usize,
    /// `(arg_units - arg_sentences) / arg_sentences * 100`; 0 when there are no
    /// argumentative sentences (see `increase_defined`).
    pub increase_percent: f64,
    pub increase_defined: bool,
    pub pro_only_sentences: usize,
    pub con_only_sentences: usize,
    pub mixed_sentences: usize,
    /// Mean length in tokens of PRO/CON segments; 0 when there are none.
    pub mean_segment_length: f64,
    /// Share of tokens inside argumentative sentences that are PRO or CON.
    pub arg_token_ratio: f64,
    pub tokens: usize,
}

#[derive(Debug, Default)]
struct Tally {
    sentences: usize,
    arg_sentences: usize,
    arg_units: usize,
    pro_only: usize,
    con_only: usize,
    mixed: usize,
    segment_tokens: usize,
    tokens: usize,
    tokens_in_arg_sentences: usize,
}

impl Tally {
    fn add(&mut self, sentence: &LabeledSentence) {
        self.sentences += 1;
        self.tokens += sentence.len();
        let segments = sentence.segments();
        if segments.is_empty() {
            return;
        }
        self.arg_sentences += 1;
        self.arg_units += segments.len();
        self.segment_tokens += segments.iter().map(|s| s.len()).sum::<usize>();
        self.tokens_in_arg_sentences += sentence.len();
        let has = |label| segments.iter().any(|s| s.label == label);
        match (has(StanceLabel::Pro), has(StanceLabel::Con)) {
            (true, true) => self.mixed += 1,
            (true, false) => self.pro_only += 1,
            _ => self.con_only += 1,
        }
    }

    fn finish(&self, topic_id: &str, topic_name: &str) -> TopicStats {
        let increase_defined = self.arg_sentences > 0;
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        TopicStats {
            topic_id: topic_id.to_string(),
            topic_name: topic_name.to_string(),
            sentences: self.sentences,
            arg_sentences: self.arg_sentences,
            arg_units: self.arg_units,
            non_arg_sentences: self.sentences - self.arg_sentences,
            increase_percent: if increase_defined {
                (self.arg_units as f64 - self.arg_sentences as f64) / self.arg_sentences as f64 * 100.0
            } else {
                0.0
            },
            increase_defined,
            pro_only_sentences: self.pro_only,
            con_only_sentences: self.con_only,
            mixed_sentences: self.mixed,
            mean_segment_length: ratio(self.segment_tokens, self.arg_units),
            arg_token_ratio: ratio(self.segment_tokens, self.tokens_in_arg_sentences),
            tokens: self.tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub topics: Vec<TopicStats>,
    pub total: TopicStats,
}

impl CorpusStats {
    pub fn topic(&self, id: &str) -> Option<&TopicStats> {
        self.topics.iter().find(|t| t.topic_id == id)
    }
}

/// Per-topic (in order of first appearance) and total counts.
pub fn compute_stats<'a, I>(sentences: I) -> CorpusStats
where
    I: IntoIterator<Item = &'a LabeledSentence>,
{
    let mut order: Vec<Topic> = Vec::new();
    let mut tallies: Vec<Tally> = Vec::new();
    let mut total = Tally::default();
    for sentence in sentences {
        let slot = match order.iter().position(|t| t.id == sentence.topic.id) {
            Some(i) => i,
            None => {
                order.push(sentence.topic.clone());
                tallies.push(Tally::default());
                order.len() - 1
            }
        };
        tallies[slot].add(sentence);
        total.add(sentence);
    }
    CorpusStats {
        topics: order
            .iter()
            .zip(&tallies)
            .map(|(topic, tally)| tally.finish(&topic.id, &topic.name))
            .collect(),
        total: total.finish("", "total"),
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<4} {:<24} {:>10} {:>10} {:>10} {:>9} {:>9} {:>8}",
            "#", "topic", "#sentences", "#arg-sent", "#arg-unit", "increase", "#non-arg", "seg-len"
        )?;
        for row in self.topics.iter().chain(std::iter::once(&self.total)) {
            let increase = if row.increase_defined {
                format!("{:+.2}", row.increase_percent)
            } else {
                "n/a".to_string()
            };
            writeln!(
                f,
                "{:<4} {:<24} {:>10} {:>10} {:>10} {:>9} {:>9} {:>8.2}",
                row.topic_id,
                row.topic_name,
                row.sentences,
                row.arg_sentences,
                row.arg_units,
                increase,
                row.non_arg_sentences,
                row.mean_segment_length
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_util::sentence;
    use crate::corpus::Corpus;

    #[test]
    fn counts_follow_table_semantics() {
        let corpus = Corpus::new(vec![
            sentence("a", "T1", "PPNCC"),
            sentence("b", "T1", "NNN"),
            sentence("c", "T1", "PPPNP"),
            sentence("d", "T8", "CCCCN"),
        ])
        .unwrap();
        let stats = compute_stats(&corpus);
        let t1 = stats.topic("T1").unwrap();
        assert_eq!((t1.sentences, t1.arg_sentences, t1.arg_units, t1.non_arg_sentences), (3, 2, 4, 1));
        assert!((t1.increase_percent - 100.0).abs() < 1e-12);
        assert_eq!((t1.pro_only_sentences, t1.con_only_sentences, t1.mixed_sentences), (1, 0, 1));
        // segments: PP, CC, PPP, P
        assert!((t1.mean_segment_length - 2.0).abs() < 1e-12);
        assert!((t1.arg_token_ratio - 0.8).abs() < 1e-12);

        let total = &stats.total;
        assert_eq!((total.sentences, total.arg_sentences, total.arg_units), (4, 3, 5));
        assert_eq!(total.arg_sentences + total.non_arg_sentences, total.sentences);
    }

    #[test]
    fn increase_matches_published_rounding() {
        // 4973 units over 4500 sentences and 821 over 713, as in the corpus table.
        let pct = |units: f64, sents: f64| (units - sents) / sents * 100.0;
        assert_eq!(format!("{:+.2}", pct(4973.0, 4500.0)), "+10.51");
        assert_eq!(format!("{:+.2}", pct(821.0, 713.0)), "+15.15");
    }

    #[test]
    fn all_non_corpus_reports_zero_increase() {
        let corpus = Corpus::new(vec![sentence("a", "T2", "NNN")]).unwrap();
        let stats = compute_stats(&corpus);
        assert_eq!(stats.total.arg_sentences, 0);
        assert_eq!(stats.total.non_arg_sentences, 1);
        assert_eq!(stats.total.increase_percent, 0.0);
        assert!(!stats.total.increase_defined);
        assert!(stats.to_string().contains("n/a"));
    }
}
