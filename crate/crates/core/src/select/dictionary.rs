//! Selection among a finite family of candidate densities with weights.

use serde::Serialize;

use crate::loss::{hellinger2_between, test_between, PenaltyConfig, ALPHA};
use crate::stats::{HistogramEstimate, Sample, StatsPyramid};
use crate::{Error, Result};

/// Candidates `f` with weights `Δ(f) ≥ 1` and `Σ e^{−Δ(f)} ≤ 1`. Every
/// candidate is a histogram on a dyadic partition, hence vanishes off the
/// square.
#[derive(Debug, Clone)]
pub struct Dictionary {
    candidates: Vec<HistogramEstimate>,
    weights: Vec<f64>,
}

impl Dictionary {
    pub fn new(candidates: Vec<HistogramEstimate>, weights: Vec<f64>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::InvalidDictionary("no candidates".into()));
        }
        if candidates.len() != weights.len() {
            return Err(Error::InvalidDictionary(format!(
                "{} candidates but {} weights",
                candidates.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 1.0 && w.is_finite())) {
            return Err(Error::InvalidDictionary(format!("weight {w} is below 1")));
        }
        let kraft: f64 = weights.iter().map(|w| (-w).exp()).sum();
        if kraft > 1.0 + 1e-12 {
            return Err(Error::InvalidDictionary(format!(
                "sum of exp(-weight) is {kraft}, above 1"
            )));
        }
        let dim = candidates[0].partition().dim();
        if candidates.iter().any(|c| c.partition().dim() != dim) {
            return Err(Error::InvalidDictionary(
                "candidates of different dimensions".into(),
            ));
        }
        Ok(Dictionary {
            candidates,
            weights,
        })
    }

    pub fn candidates(&self) -> &[HistogramEstimate] {
        &self.candidates
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// Chosen index and the criterion of every candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DictionarySelection {
    pub index: usize,
    pub criteria: Vec<f64>,
}

/// Minimizes `℘(f) = sup_{f'} [α H²(f, f') + T(f, f') − L Δ(f') / n] + L Δ(f) / n`
/// over the dictionary. Ties pick the lowest index.
pub fn dictionary_select(
    dict: &Dictionary,
    sample: &Sample,
    l: f64,
) -> Result<DictionarySelection> {
    if dict.candidates[0].partition().dim() != 2 * sample.d() {
        return Err(Error::InvalidInput(
            "dictionary and sample dimensions differ".into(),
        ));
    }
    let config = PenaltyConfig::new(l, sample.n())?;
    let depth = dict
        .candidates
        .iter()
        .map(|c| c.partition().max_level())
        .max()
        .unwrap_or(0);
    let stats = StatsPyramid::bin(sample, depth)?;
    let scale = config.l() / config.n() as f64;
    let criteria: Vec<f64> = dict
        .candidates
        .iter()
        .zip(&dict.weights)
        .map(|(f, wf)| {
            let sup = dict
                .candidates
                .iter()
                .zip(&dict.weights)
                .map(|(g, wg)| {
                    ALPHA * hellinger2_between(f, g, &stats) + test_between(f, g, &stats)
                        - scale * wg
                })
                .fold(f64::NEG_INFINITY, f64::max);
            sup + scale * wf
        })
        .collect();
    let mut index = 0;
    for (i, c) in criteria.iter().enumerate() {
        if *c < criteria[index] {
            index = i;
        }
    }
    Ok(DictionarySelection { index, criteria })
}
