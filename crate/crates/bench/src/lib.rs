//! Shared inputs for the benchmarks.

use aurc_core::corpus::synthetic::{generate, SyntheticConfig};
use aurc_core::corpus::{make_splits, SplitPlan, SplitSource};
use aurc_core::tagger::SequenceScores;
use aurc_core::Corpus;
use rand::Rng;

/// Synthetic corpus over the eight topics with split tags.
pub fn corpus(per_topic: usize, seed: u64) -> Corpus {
    let raw = generate(&SyntheticConfig { sentences_per_topic: per_topic, seed, ..Default::default() })
        .expect("synthetic corpus");
    let plan = SplitPlan { per_topic: None, ..SplitPlan::aurc8() };
    make_splits(&raw, &plan, SplitSource::Recompute).expect("splits")
}

/// Random decoding problem of length `n`.
pub fn scores(n: usize, seed: u64) -> SequenceScores {
    let mut rng = aurc_core::seed::rng(seed);
    let mut triple = || [0; 3].map(|_| rng.random_range(-1.0..1.0));
    SequenceScores {
        emissions: (0..n).map(|_| triple()).collect(),
        transitions: [triple(), triple(), triple()],
        start: triple(),
        end: triple(),
    }
}
