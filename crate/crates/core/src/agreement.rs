//! Chance-corrected agreement over token-labeled sentences.
//!
//! Every token position of every sentence is a unit; each annotator who
//! labeled the sentence contributes one nominal value to it. NON is an
//! ordinary category, so agreement on blanks counts. Units with fewer than two
//! values cannot be paired and are skipped.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::aggregate::AnnotationSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub alpha: f64,
    pub observed_disagreement: f64,
    pub expected_disagreement: f64,
    /// Pairable units (token positions with at least two values).
    pub n_tokens: usize,
    pub n_annotators: usize,
    /// Pairable values, the `n` of the coincidence matrix.
    pub n_values: usize,
}

impl std::fmt::Display for AgreementReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "alpha (nominal, token units): {:.4}", self.alpha)?;
        writeln!(f, "observed disagreement:        {:.6}", self.observed_disagreement)?;
        writeln!(f, "expected disagreement:        {:.6}", self.expected_disagreement)?;
        writeln!(f, "pairable tokens:              {}", self.n_tokens)?;
        writeln!(f, "pairable values:              {}", self.n_values)?;
        write!(f, "annotators:                   {}", self.n_annotators)
    }
}

/// Coincidence matrix over the three stance categories.
pub fn coincidences(sets: &[AnnotationSet]) -> Result<([[f64; 3]; 3], usize)> {
    let mut matrix = [[0.0; 3]; 3];
    let mut units = 0;
    for set in sets {
        set.validate()?;
        for position in 0..set.len() {
            let mut counts = [0usize; 3];
            for labels in set.annotations.values() {
                counts[labels[position].index()] += 1;
            }
            let m: usize = counts.iter().sum();
            if m < 2 {
                continue;
            }
            units += 1;
            let weight = 1.0 / (m - 1) as f64;
            for c in 0..3 {
                for k in 0..3 {
                    let pairs = if c == k {
                        counts[c] * counts[c].saturating_sub(1)
                    } else {
                        counts[c] * counts[k]
                    };
                    matrix[c][k] += pairs as f64 * weight;
                }
            }
        }
    }
    Ok((matrix, units))
}

/// Krippendorff's alpha with the nominal distance, `1 - D_o / D_e`.
pub fn alpha_nominal(sets: &[AnnotationSet]) -> Result<AgreementReport> {
    let annotators: BTreeSet<&str> = sets
        .iter()
        .flat_map(|s| s.annotations.keys().map(String::as_str))
        .collect();
    if annotators.len() < 2 {
        return Err(Error::invalid("agreement needs at least two annotators"));
    }
    let (matrix, units) = coincidences(sets)?;
    let marginals: Vec<f64> = matrix.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = marginals.iter().sum();
    if units == 0 || n < 2.0 {
        return Err(Error::invalid("no token is labeled by two or more annotators"));
    }
    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..3 {
        for k in 0..3 {
            if c != k {
                observed += matrix[c][k];
                expected += marginals[c] * marginals[k];
            }
        }
    }
    let observed = observed / n;
    let expected = expected / (n * (n - 1.0));
    if expected <= 0.0 {
        return Err(Error::UndefinedAgreement);
    }
    Ok(AgreementReport {
        alpha: 1.0 - observed / expected,
        observed_disagreement: observed,
        expected_disagreement: expected,
        n_tokens: units,
        n_annotators: annotators.len(),
        n_values: n.round() as usize,
    })
}
