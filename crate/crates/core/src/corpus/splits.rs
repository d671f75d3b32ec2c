use std::collections::HashMap;

use serde::Serialize;

use super::{Corpus, Split, SplitScheme};
use crate::error::{Error, Result};

/// Which topics go where, and how in-domain topics are cut.
#[derive(Debug, Clone)]
pub struct SplitPlan {
    pub in_domain_topics: Vec<String>,
    pub cross_train_topics: Vec<String>,
    pub cross_dev_topics: Vec<String>,
    pub cross_test_topics: Vec<String>,
    /// Percentages of each in-domain topic (in storage order) for train and dev;
    /// the remainder is test.
    pub train_percent: usize,
    pub dev_percent: usize,
    /// Required number of sentences per planned topic, if any.
    pub per_topic: Option<usize>,
}

impl SplitPlan {
    /// T1-T6 in-domain at 70/10/20; cross-domain T1-T5 / T6 / T7-T8; 1000 sentences per topic.
    pub fn aurc8() -> Self {
        let ids = |r: std::ops::RangeInclusive<usize>| r.map(|i| format!("T{i}")).collect::<Vec<_>>();
        SplitPlan {
            in_domain_topics: ids(1..=6),
            cross_train_topics: ids(1..=5),
            cross_dev_topics: ids(6..=6),
            cross_test_topics: ids(7..=8),
            train_percent: 70,
            dev_percent: 10,
            per_topic: Some(1000),
        }
    }

    fn planned_topics(&self) -> impl Iterator<Item = &String> {
        self.in_domain_topics
            .iter()
            .chain(&self.cross_train_topics)
            .chain(&self.cross_dev_topics)
            .chain(&self.cross_test_topics)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitSource {
    /// Always compute assignments from the plan.
    Recompute,
    /// Keep assignments already present in the corpus; compute only when none exist.
    PreferReleased,
}

/// Assigns in-domain and cross-domain split tags.
///
/// In-domain test sentences are left out of cross-domain train and dev.
pub fn make_splits(corpus: &Corpus, plan: &SplitPlan, source: SplitSource) -> Result<Corpus> {
    let has_released = corpus
        .iter()
        .any(|s| s.split_in_domain.is_some() || s.split_cross_domain.is_some());
    if source == SplitSource::PreferReleased && has_released {
        check_disjoint(corpus)?;
        return Ok(corpus.clone());
    }
    if plan.train_percent + plan.dev_percent > 100 {
        return Err(Error::invalid("train and dev percentages exceed 100"));
    }

    let mut counts: HashMap<&str, usize> = HashMap::new();
    for sentence in corpus {
        *counts.entry(sentence.topic.id.as_str()).or_default() += 1;
    }
    for topic in plan.planned_topics() {
        let count = counts.get(topic.as_str()).copied().unwrap_or(0);
        if count == 0 {
            return Err(Error::UnknownTopic(format!("{topic} (required by the split plan, absent from corpus)")));
        }
        if let Some(expected) = plan.per_topic {
            if count != expected {
                return Err(Error::invalid(format!(
                    "topic {topic} has {count} sentences, expected {expected}"
                )));
            }
        }
    }

    let mut out = corpus.clone();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for sentence in &mut out.sentences {
        let topic = sentence.topic.id.clone();
        let position = seen.entry(topic.clone()).or_default();
        let n = counts[topic.as_str()];
        let in_domain = plan.in_domain_topics.contains(&topic).then(|| {
            let train_end = n * plan.train_percent / 100;
            let dev_end = n * (plan.train_percent + plan.dev_percent) / 100;
            match *position {
                p if p < train_end => Split::Train,
                p if p < dev_end => Split::Dev,
                _ => Split::Test,
            }
        });
        *position += 1;
        let held_out = in_domain == Some(Split::Test);
        let cross = if plan.cross_test_topics.contains(&topic) {
            Some(Split::Test)
        } else if held_out {
            None
        } else if plan.cross_dev_topics.contains(&topic) {
            Some(Split::Dev)
        } else if plan.cross_train_topics.contains(&topic) {
            Some(Split::Train)
        } else {
            None
        };
        sentence.split_in_domain = in_domain;
        sentence.split_cross_domain = cross;
    }
    check_disjoint(&out)?;
    Ok(out)
}

/// Fails if an in-domain test sentence is also in cross-domain train or dev.
pub(crate) fn check_disjoint(corpus: &Corpus) -> Result<()> {
    for sentence in corpus {
        if sentence.split_in_domain == Some(Split::Test)
            && matches!(sentence.split_cross_domain, Some(Split::Train | Split::Dev))
        {
            return Err(Error::sentence(
                &sentence.sentence_id,
                "in-domain test sentence is also in cross-domain train/dev",
            ));
        }
    }
    Ok(())
}

/// Sentence counts per split, as (train, dev, test).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitSizes {
    pub in_domain: (usize, usize, usize),
    pub cross_domain: (usize, usize, usize),
}

impl SplitSizes {
    pub fn of(corpus: &Corpus) -> Self {
        let sizes = |scheme| {
            let count = |split| corpus.iter().filter(|s| s.split(scheme) == Some(split)).count();
            (count(Split::Train), count(Split::Dev), count(Split::Test))
        };
        SplitSizes {
            in_domain: sizes(SplitScheme::InDomain),
            cross_domain: sizes(SplitScheme::CrossDomain),
        }
    }
}
