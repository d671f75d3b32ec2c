use serde::{Deserialize, Serialize};

use super::StanceLabel;
use crate::error::{Error, Result};

/// A contiguous PRO or CON span `[start, end)` of token indices within one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Segment {
    pub label: StanceLabel,
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn new(label: StanceLabel, start: usize, end: usize) -> Result<Self> {
        if label == StanceLabel::Non {
            return Err(Error::invalid("segments carry PRO or CON, never NON"));
        }
        if start >= end {
            return Err(Error::invalid(format!("empty segment [{start}, {end})")));
        }
        Ok(Segment { label, start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Number of tokens shared with `other`.
    pub fn overlap(&self, other: &Segment) -> usize {
        self.end.min(other.end).saturating_sub(self.start.max(other.start))
    }
}

impl std::fmt::Display for Segment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}@[{},{})", self.label, self.start, self.end)
    }
}

/// Maximal runs of PRO and of CON tokens, left to right.
pub fn labels_to_segments(labels: &[StanceLabel]) -> Result<Vec<Segment>> {
    if labels.is_empty() {
        return Err(Error::invalid("cannot segment an empty label sequence"));
    }
    let mut segments = Vec::new();
    let mut run_start = 0;
    for i in 1..=labels.len() {
        if i == labels.len() || labels[i] != labels[run_start] {
            if labels[run_start].is_argumentative() {
                segments.push(Segment {
                    label: labels[run_start],
                    start: run_start,
                    end: i,
                });
            }
            run_start = i;
        }
    }
    Ok(segments)
}

/// Expands segments into a token label sequence; uncovered positions are NON.
pub fn segments_to_labels(segments: &[Segment], length: usize) -> Result<Vec<StanceLabel>> {
    let mut labels = vec![StanceLabel::Non; length];
    let mut covered = vec![false; length];
    for segment in segments {
        if segment.label == StanceLabel::Non || segment.is_empty() {
            return Err(Error::invalid(format!("invalid segment {segment}")));
        }
        if segment.end > length {
            return Err(Error::invalid(format!(
                "segment {segment} out of range for length {length}"
            )));
        }
        for i in segment.start..segment.end {
            if covered[i] {
                return Err(Error::invalid(format!("segment {segment} overlaps another segment")));
            }
            covered[i] = true;
            labels[i] = segment.label;
        }
    }
    Ok(labels)
}
