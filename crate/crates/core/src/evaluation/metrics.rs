//! Confusion matrices and weighted precision / recall / F1.

use crate::error::{Error, Result};
use crate::label::Label;

/// Gold classes on rows, predictions on columns, both in canonical
/// [NOM, PLEON, CLAUSE] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    counts: [[u64; Label::COUNT]; Label::COUNT],
}

impl ConfusionMatrix {
    pub fn new(counts: [[u64; Label::COUNT]; Label::COUNT]) -> Self {
        ConfusionMatrix { counts }
    }

    /// Builds a matrix from rows and columns written in `order`. Published
    /// tables do not always use the canonical order.
    pub fn from_rows_in_order(
        order: [Label; Label::COUNT],
        rows: [[u64; Label::COUNT]; Label::COUNT],
    ) -> Result<Self> {
        let mut seen = [false; Label::COUNT];
        order.iter().for_each(|l| seen[l.index()] = true);
        if seen.contains(&false) {
            return Err(Error::invalid("label order must list every class once"));
        }
        let mut counts = [[0; Label::COUNT]; Label::COUNT];
        for (i, gold) in order.iter().enumerate() {
            for (j, pred) in order.iter().enumerate() {
                counts[gold.index()][pred.index()] = rows[i][j];
            }
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn from_predictions(gold: &[Label], predicted: &[Label]) -> Result<Self> {
        if gold.len() != predicted.len() {
            return Err(Error::invalid(format!(
                "{} gold labels but {} predictions",
                gold.len(),
                predicted.len()
            )));
        }
        let mut cm = ConfusionMatrix::default();
        for (g, p) in gold.iter().zip(predicted) {
            cm.add(*g, *p);
        }
        Ok(cm)
    }

    pub fn add(&mut self, gold: Label, predicted: Label) {
        self.counts[gold.index()][predicted.index()] += 1;
    }

    pub fn get(&self, gold: Label, predicted: Label) -> u64 {
        self.counts[gold.index()][predicted.index()]
    }

    pub fn counts(&self) -> &[[u64; Label::COUNT]; Label::COUNT] {
        &self.counts
    }

    /// The matrix with rows and columns listed in `order`.
    pub fn rows_in_order(&self, order: [Label; Label::COUNT]) -> [[u64; Label::COUNT]; Label::COUNT] {
        order.map(|g| order.map(|p| self.get(g, p)))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn gold_count(&self, l: Label) -> u64 {
        self.counts[l.index()].iter().sum()
    }

    pub fn predicted_count(&self, l: Label) -> u64 {
        self.counts.iter().map(|r| r[l.index()]).sum()
    }

    pub fn correct(&self) -> u64 {
        (0..Label::COUNT).map(|i| self.counts[i][i]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Metrics are fractions in [0, 1]; reports print them as percentages.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub model_id: String,
    pub feature_set: String,
    pub confusion: ConfusionMatrix,
    /// Canonical class order.
    pub per_class: [ClassMetrics; Label::COUNT],
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub accuracy: f64,
    /// Supplementary; not used for model selection.
    pub macro_f1: f64,
    pub n: u64,
}

impl EvalReport {
    pub fn labelled(mut self, model_id: impl Into<String>, feature_set: impl Into<String>) -> Self {
        self.model_id = model_id.into();
        self.feature_set = feature_set.into();
        self
    }

    pub fn class(&self, l: Label) -> &ClassMetrics {
        &self.per_class[l.index()]
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class metrics, each class weighted by its gold count.
pub fn weighted_prf(cm: &ConfusionMatrix) -> Result<EvalReport> {
    let n = cm.total();
    if n == 0 {
        return Err(Error::invalid("cannot score an empty confusion matrix"));
    }
    let per_class = Label::ALL.map(|l| {
        let tp = cm.get(l, l);
        let precision = ratio(tp, cm.predicted_count(l));
        let recall = ratio(tp, cm.gold_count(l));
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        ClassMetrics {
            precision,
            recall,
            f1,
            support: cm.gold_count(l),
        }
    });
    let weighted = |f: fn(&ClassMetrics) -> f64| -> f64 {
        per_class.iter().map(|c| f(c) * c.support as f64).sum::<f64>() / n as f64
    };
    Ok(EvalReport {
        model_id: String::new(),
        feature_set: String::new(),
        confusion: *cm,
        weighted_precision: weighted(|c| c.precision),
        weighted_recall: weighted(|c| c.recall),
        weighted_f1: weighted(|c| c.f1),
        accuracy: ratio(cm.correct(), n),
        macro_f1: per_class.iter().map(|c| c.f1).sum::<f64>() / Label::COUNT as f64,
        per_class,
        n,
    })
}

/// The most frequent class; ties go to the earlier class.
pub fn majority_class(labels: &[Label]) -> Option<Label> {
    let mut counts = [0usize; Label::COUNT];
    labels.iter().for_each(|l| counts[l.index()] += 1);
    if labels.is_empty() {
        return None;
    }
    let mut best = 0;
    for i in 1..Label::COUNT {
        if counts[i] > counts[best] {
            best = i;
        }
    }
    Label::from_index(best)
}

/// Scores the constant predictor of the majority class.
pub fn majority_baseline(labels: &[Label]) -> Result<EvalReport> {
    let majority = majority_class(labels).ok_or_else(|| Error::invalid("no labels to score"))?;
    let predicted = vec![majority; labels.len()];
    let cm = ConfusionMatrix::from_predictions(labels, &predicted)?;
    Ok(weighted_prf(&cm)?.labelled("majority", format!("always {majority}")))
}
