//! Exact first-order decoding over the three stance labels.
//!
//! Among all maximum-score sequences the lexicographically smallest one under
//! PRO < CON < NON is returned, so ties never depend on float noise in the
//! search order. Scores may be `-inf` to forbid a transition.

use crate::corpus::StanceLabel;

/// Label-indexed scores: emissions per position, transitions `[from][to]`,
/// and start/end scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceScores {
    pub emissions: Vec<[f64; 3]>,
    pub transitions: [[f64; 3]; 3],
    pub start: [f64; 3],
    pub end: [f64; 3],
}

impl SequenceScores {
    pub fn len(&self) -> usize {
        self.emissions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.emissions.is_empty()
    }

    /// Total score of one label sequence.
    pub fn score(&self, labels: &[StanceLabel]) -> f64 {
        assert_eq!(labels.len(), self.len(), "label sequence length");
        let Some(first) = labels.first() else {
            return 0.0;
        };
        let mut total = self.start[first.index()];
        for (i, label) in labels.iter().enumerate() {
            total += self.emissions[i][label.index()];
            if i > 0 {
                total += self.transitions[labels[i - 1].index()][label.index()];
            }
        }
        total + self.end[labels[labels.len() - 1].index()]
    }
}

fn first_argmax(values: [f64; 3]) -> usize {
    let mut best = 0;
    for y in 1..3 {
        if values[y] > values[best] {
            best = y;
        }
    }
    best
}

/// Highest-scoring label sequence, lexicographically smallest among ties.
///
/// A backward pass computes the best completion score from every
/// (position, label); the forward pass then picks, position by position, the
/// smallest label that still reaches the optimum.
pub fn decode(scores: &SequenceScores) -> Vec<StanceLabel> {
    let n = scores.len();
    if n == 0 {
        return Vec::new();
    }
    let mut beta = vec![[0.0f64; 3]; n];
    beta[n - 1] = scores.end;
    for i in (0..n - 1).rev() {
        for y in 0..3 {
            let mut best = f64::NEG_INFINITY;
            for next in 0..3 {
                let v = scores.transitions[y][next] + scores.emissions[i + 1][next] + beta[i + 1][next];
                if v > best {
                    best = v;
                }
            }
            beta[i][y] = best;
        }
    }
    let mut path = Vec::with_capacity(n);
    let mut prev = first_argmax(std::array::from_fn(|y| {
        scores.start[y] + scores.emissions[0][y] + beta[0][y]
    }));
    path.push(prev);
    for i in 1..n {
        prev = first_argmax(std::array::from_fn(|y| {
            scores.transitions[prev][y] + scores.emissions[i][y] + beta[i][y]
        }));
        path.push(prev);
    }
    path.into_iter()
        .map(|y| StanceLabel::ALL[y])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use StanceLabel::*;

    /// Exhaustive search over all 3^n sequences in lexicographic order; the
    /// first one with the maximal score wins.
    fn brute_force(scores: &SequenceScores) -> Vec<StanceLabel> {
        let n = scores.len();
        let mut best: Option<(f64, Vec<StanceLabel>)> = None;
        for code in 0..3usize.pow(n as u32) {
            let mut labels = vec![Pro; n];
            let mut rest = code;
            for i in (0..n).rev() {
                labels[i] = StanceLabel::ALL[rest % 3];
                rest /= 3;
            }
            let s = scores.score(&labels);
            if best.as_ref().is_none_or(|(b, _)| s > *b) {
                best = Some((s, labels));
            }
        }
        best.map(|(_, l)| l).unwrap_or_default()
    }

    fn zero(n: usize) -> SequenceScores {
        SequenceScores {
            emissions: vec![[0.0; 3]; n],
            transitions: [[0.0; 3]; 3],
            start: [0.0; 3],
            end: [0.0; 3],
        }
    }

    #[test]
    fn all_ties_give_all_pro() {
        assert_eq!(decode(&zero(5)), vec![Pro; 5]);
        assert!(decode(&zero(0)).is_empty());
    }

    #[test]
    fn emissions_alone() {
        let mut s = zero(3);
        s.emissions = vec![[0.0, 1.0, 0.0], [0.0, 0.0, 2.0], [1.0, 1.0, 0.0]];
        assert_eq!(decode(&s), vec![Con, Non, Pro]);
    }

    #[test]
    fn forbidden_transition_is_never_used() {
        let mut s = zero(2);
        s.emissions = vec![[5.0, 0.0, 0.0], [0.0, 5.0, 0.0]];
        s.transitions[0][1] = f64::NEG_INFINITY;
        let best = decode(&s);
        assert_ne!(best, vec![Pro, Con]);
        assert_eq!(best, brute_force(&s));
    }

    #[test]
    fn transitions_override_local_choice() {
        let mut s = zero(3);
        s.emissions = vec![[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [2.0, 0.0, 0.0]];
        s.transitions[0][1] = -2.0;
        s.transitions[1][0] = -2.0;
        assert_eq!(decode(&s), vec![Pro, Pro, Pro]);
    }

    fn small_weight() -> impl Strategy<Value = f64> {
        prop_oneof![
            8 => (-2i32..=2).prop_map(f64::from),
            1 => Just(f64::NEG_INFINITY),
        ]
    }

    fn triple() -> impl Strategy<Value = [f64; 3]> {
        [(-2i32..=2).prop_map(f64::from), (-2i32..=2).prop_map(f64::from), (-2i32..=2).prop_map(f64::from)]
    }

    fn scores(max_len: usize) -> impl Strategy<Value = SequenceScores> {
        (
            prop::collection::vec(triple(), 1..=max_len),
            [[small_weight(), small_weight(), small_weight()], [small_weight(), small_weight(), small_weight()], [small_weight(), small_weight(), small_weight()]],
            triple(),
            triple(),
        )
            .prop_map(|(emissions, transitions, start, end)| SequenceScores { emissions, transitions, start, end })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn matches_exhaustive_search(s in scores(6)) {
            prop_assert_eq!(decode(&s), brute_force(&s));
        }
    }
}
