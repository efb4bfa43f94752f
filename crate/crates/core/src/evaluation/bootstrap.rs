//! Paired bootstrap comparison of two classifiers on the same instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::metrics::{weighted_prf, ConfusionMatrix};
use crate::error::{Error, Result};
use crate::label::Label;

pub const DEFAULT_RESAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Significance {
    /// Weighted F1 of A minus that of B on the full data, in points.
    pub delta: f64,
    pub p_value: f64,
    /// Percentile 95% interval of the resampled difference, in points.
    pub ci_low: f64,
    pub ci_high: f64,
    pub resamples: usize,
}

fn weighted_f1_points(gold: &[Label], pred: &[Label], idx: impl Iterator<Item = usize> + Clone) -> f64 {
    let mut cm = ConfusionMatrix::default();
    for i in idx {
        cm.add(gold[i], pred[i]);
    }
    // A non-empty resample always has a positive total.
    100.0 * weighted_prf(&cm).map_or(0.0, |r| r.weighted_f1)
}

/// Linear interpolation between closest ranks on sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Each resample draws its indices from its own ChaCha8 stream (`seed`,
/// stream = resample number), so the result does not depend on how the
/// resamples are spread over threads.
pub fn significance(
    preds_a: &[Label],
    preds_b: &[Label],
    gold: &[Label],
    resamples: usize,
    seed: u64,
) -> Result<Significance> {
    let n = gold.len();
    if preds_a.len() != n || preds_b.len() != n {
        return Err(Error::invalid(format!(
            "prediction vectors ({}, {}) do not align with {n} gold labels",
            preds_a.len(),
            preds_b.len()
        )));
    }
    if n == 0 || resamples == 0 {
        return Err(Error::invalid("need at least one instance and one resample"));
    }

    let delta = weighted_f1_points(gold, preds_a, 0..n) - weighted_f1_points(gold, preds_b, 0..n);
    let mut deltas: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            weighted_f1_points(gold, preds_a, idx.iter().copied())
                - weighted_f1_points(gold, preds_b, idx.iter().copied())
        })
        .collect();

    let at_most_zero = deltas.iter().filter(|d| **d <= 0.0).count();
    let at_least_zero = deltas.iter().filter(|d| **d >= 0.0).count();
    let tail = at_most_zero.min(at_least_zero);
    let p_value = (2.0 * (1 + tail) as f64 / (1 + resamples) as f64).min(1.0);

    deltas.sort_by(f64::total_cmp);
    Ok(Significance {
        delta,
        p_value,
        ci_low: percentile(&deltas, 0.025),
        ci_high: percentile(&deltas, 0.975),
        resamples,
    })
}
