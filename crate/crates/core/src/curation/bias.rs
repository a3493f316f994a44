use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Label, McqPair};

/// Distribution of correct-answer positions and its total-variation distance
/// to the uniform distribution over A..D (0 = balanced, 0.75 = all one label).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub counts: BTreeMap<Label, usize>,
    pub total: usize,
    pub frequency: BTreeMap<Label, f64>,
    pub tv_distance: f64,
}

impl BiasReport {
    pub fn from_counts(counts: [usize; 4]) -> Result<Self> {
        let total: usize = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyDataset);
        }
        // ½ Σ |c/N − ¼| = Σ |4c − N| / (8N), computed in integers first.
        let numerator: u128 = counts
            .iter()
            .map(|&c| (4 * c as u128).abs_diff(total as u128))
            .sum();
        let tv_distance = numerator as f64 / (8 * total) as f64;
        Ok(BiasReport {
            counts: Label::ALL.iter().map(|l| (*l, counts[l.index()])).collect(),
            total,
            frequency: Label::ALL
                .iter()
                .map(|l| (*l, counts[l.index()] as f64 / total as f64))
                .collect(),
            tv_distance,
        })
    }
}

pub fn position_bias(pairs: &[McqPair]) -> Result<BiasReport> {
    let mut counts = [0usize; 4];
    for p in pairs {
        counts[p.answer.index()] += 1;
    }
    BiasReport::from_counts(counts)
}
