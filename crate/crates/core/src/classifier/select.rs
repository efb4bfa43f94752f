//! Greedy forward selection over groups of features.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Smallest gain (in weighted-F1 points) that justifies adding a group.
pub const DEFAULT_MIN_GAIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureGroup {
    pub name: String,
    pub features: Vec<String>,
}

impl FeatureGroup {
    pub fn new(name: impl Into<String>, features: Vec<String>) -> Self {
        FeatureGroup {
            name: name.into(),
            features,
        }
    }

    pub fn single(feature: impl Into<String>) -> Self {
        let f = feature.into();
        FeatureGroup {
            name: f.clone(),
            features: vec![f],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionStep {
    pub added: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Base features followed by the features of each added group, in order.
    pub features: Vec<String>,
    pub groups: Vec<String>,
    pub base_score: f64,
    pub trace: Vec<SelectionStep>,
}

impl Selection {
    pub fn score(&self) -> f64 {
        self.trace.last().map_or(self.base_score, |s| s.score)
    }
}

/// Starting from `base`, repeatedly adds the candidate group whose inclusion
/// maximizes `score` and stops when the best gain is not above `min_gain`.
/// Candidates of one round are scored in parallel; ties go to the earlier
/// candidate.
pub fn forward_select<F>(
    candidates: &[FeatureGroup],
    base: &[String],
    min_gain: f64,
    score: F,
) -> Result<Selection>
where
    F: Fn(&[String]) -> Result<f64> + Sync,
{
    let mut seen: HashSet<&str> = base.iter().map(String::as_str).collect();
    for g in candidates {
        for f in &g.features {
            if !seen.insert(f) {
                return Err(Error::invalid(format!(
                    "feature `{f}` appears in more than one selection group"
                )));
            }
        }
    }

    let mut features = base.to_vec();
    let base_score = score(&features)?;
    let mut current = base_score;
    let mut remaining: Vec<&FeatureGroup> = candidates.iter().collect();
    let mut groups = Vec::new();
    let mut trace = Vec::new();

    while !remaining.is_empty() {
        let scores: Vec<f64> = remaining
            .par_iter()
            .map(|g| {
                let mut trial = features.clone();
                trial.extend(g.features.iter().cloned());
                score(&trial)
            })
            .collect::<Result<_>>()?;
        let mut best = 0;
        for (i, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = i;
            }
        }
        if !(scores[best] - current > min_gain) {
            break;
        }
        let chosen = remaining.remove(best);
        features.extend(chosen.features.iter().cloned());
        groups.push(chosen.name.clone());
        current = scores[best];
        trace.push(SelectionStep {
            added: chosen.name.clone(),
            score: current,
        });
    }

    Ok(Selection {
        features,
        groups,
        base_score,
        trace,
    })
}
