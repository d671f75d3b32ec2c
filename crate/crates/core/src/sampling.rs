//! Building annotation batches from pre-scored candidate sentences.
//!
//! Candidates are filtered by length and argument score, grouped by topic and
//! pre-classified stance, ranked by the sum of three per-score ranks, and then
//! drawn top-down with a fixed probability until the group target is met.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::StanceLabel;
use crate::error::{Error, Result};
use crate::seed;

pub const MIN_TOKENS: usize = 3;
pub const MAX_TOKENS: usize = 45;
pub const MIN_ARG_SCORE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub topic_id: String,
    #[serde(default)]
    pub topic_name: String,
    pub sentence_id: String,
    pub tokens: Vec<String>,
    pub doc_score: f64,
    pub arg_score: f64,
    pub stance: StanceLabel,
    pub stance_score: f64,
}

impl ScoredCandidate {
    pub fn validate(&self) -> Result<()> {
        if self.stance == StanceLabel::Non {
            return Err(Error::sentence(&self.sentence_id, "candidate stance must be PRO or CON"));
        }
        if ![self.doc_score, self.arg_score, self.stance_score]
            .iter()
            .all(|s| s.is_finite())
        {
            return Err(Error::sentence(&self.sentence_id, "non-finite score"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedCandidate {
    pub candidate: ScoredCandidate,
    pub doc_rank: usize,
    pub arg_rank: usize,
    pub stance_rank: usize,
    pub agg: usize,
}

/// Keeps candidates with 3 to 45 tokens and an argument score of at least 0.5.
pub fn filter_candidates(candidates: Vec<ScoredCandidate>) -> Vec<ScoredCandidate> {
    candidates
        .into_iter()
        .filter(|c| (MIN_TOKENS..=MAX_TOKENS).contains(&c.tokens.len()) && c.arg_score >= MIN_ARG_SCORE)
        .collect()
}

/// Competition ranks ("1, 2, 2, 4"), highest score first.
fn competition_ranks(scores: &[f64]) -> Vec<usize> {
    scores
        .iter()
        .map(|s| 1 + scores.iter().filter(|other| *other > s).count())
        .collect()
}

/// Ranks one topic-stance group; output ascending by `agg`, ties by sentence id.
pub fn rank_aggregate(group: Vec<ScoredCandidate>) -> Vec<RankedCandidate> {
    let doc = competition_ranks(&group.iter().map(|c| c.doc_score).collect::<Vec<_>>());
    let arg = competition_ranks(&group.iter().map(|c| c.arg_score).collect::<Vec<_>>());
    let stance = competition_ranks(&group.iter().map(|c| c.stance_score).collect::<Vec<_>>());
    let mut ranked: Vec<RankedCandidate> = group
        .into_iter()
        .enumerate()
        .map(|(i, candidate)| RankedCandidate {
            candidate,
            doc_rank: doc[i],
            arg_rank: arg[i],
            stance_rank: stance[i],
            agg: doc[i] + arg[i] + stance[i],
        })
        .collect();
    ranked.sort_by(|a, b| {
        a.agg
            .cmp(&b.agg)
            .then_with(|| a.candidate.sentence_id.cmp(&b.candidate.sentence_id))
    });
    ranked
}

/// Walks `ranked` top-down, taking each not-yet-selected item when a uniform
/// draw is below `p`, and repeats passes until `n` items are chosen or the list
/// is exhausted. Items are returned in selection order.
///
/// Draws come from ChaCha8 seeded with `seed`; each draw uses the top 53 bits
/// of one `u64`.
pub fn probabilistic_select<T: Clone>(ranked: &[T], n: usize, p: f64, seed: u64) -> Result<Vec<T>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!("selection probability {p} outside (0, 1]")));
    }
    let target = n.min(ranked.len());
    let mut rng = seed::rng(seed);
    let mut taken = vec![false; ranked.len()];
    let mut selected = Vec::with_capacity(target);
    while selected.len() < target {
        for (i, item) in ranked.iter().enumerate() {
            if selected.len() == target {
                break;
            }
            if !taken[i] && seed::unit_f64(&mut rng) < p {
                taken[i] = true;
                selected.push(item.clone());
            }
        }
    }
    Ok(selected)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            n: 500,
            p: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub topic_id: String,
    pub stance: StanceLabel,
    pub input: usize,
    pub candidates: usize,
    pub selected: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedCandidate {
    #[serde(flatten)]
    pub ranked: RankedCandidate,
    /// 1-based position in selection order within the group.
    pub selection_order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub selected: Vec<SelectedCandidate>,
    pub groups: Vec<GroupSummary>,
}

/// Full pipeline over all topic-stance groups (sorted by topic id, then PRO
/// before CON). Each group draws from its own seed derived from the master
/// seed, so groups can be processed independently.
pub fn sample(candidates: Vec<ScoredCandidate>, config: &SamplingConfig) -> Result<Selection> {
    let mut input_counts: BTreeMap<(String, StanceLabel), usize> = BTreeMap::new();
    for c in &candidates {
        c.validate()?;
        *input_counts.entry((c.topic_id.clone(), c.stance)).or_default() += 1;
    }
    let mut groups: BTreeMap<(String, StanceLabel), Vec<ScoredCandidate>> = BTreeMap::new();
    for c in filter_candidates(candidates) {
        groups.entry((c.topic_id.clone(), c.stance)).or_default().push(c);
    }
    let mut selection = Selection {
        selected: Vec::new(),
        groups: Vec::new(),
    };
    for ((topic_id, stance), input) in input_counts {
        let group = groups.remove(&(topic_id.clone(), stance)).unwrap_or_default();
        let group_seed = seed::derive_seed(config.seed, &["sample", &topic_id, stance.as_str()]);
        let candidates = group.len();
        let ranked = rank_aggregate(group);
        let chosen = probabilistic_select(&ranked, config.n, config.p, group_seed)?;
        selection.groups.push(GroupSummary {
            topic_id,
            stance,
            input,
            candidates,
            selected: chosen.len(),
            seed: group_seed,
        });
        selection
            .selected
            .extend(chosen.into_iter().enumerate().map(|(i, ranked)| SelectedCandidate {
                ranked,
                selection_order: i + 1,
            }));
    }
    Ok(selection)
}

pub fn load_candidates(path: impl AsRef<Path>) -> Result<Vec<ScoredCandidate>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_candidates(BufReader::new(file), &path.display().to_string())
}

pub fn read_candidates<R: BufRead>(reader: R, source: &str) -> Result<Vec<ScoredCandidate>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record_error = |message: String| Error::Record {
            path: source.to_string(),
            line: i + 1,
            message,
        };
        let candidate: ScoredCandidate =
            serde_json::from_str(&line).map_err(|e| record_error(format!("malformed candidate: {e}")))?;
        candidate.validate().map_err(|e| record_error(e.to_string()))?;
        out.push(candidate);
    }
    Ok(out)
}
