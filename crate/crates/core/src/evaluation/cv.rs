//! Cross-validated training and pooled evaluation.

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use super::folds::Folds;
use super::metrics::{weighted_prf, ConfusionMatrix, EvalReport};
use crate::classifier::{predict_all, train, ColumnPlan, DesignMatrix, Prediction, TrainConfig};
use crate::error::{Error, Result};
use crate::feature::FeatureVector;
use crate::label::Label;

struct FoldData {
    plan: ColumnPlan,
    x_train: Array2<f64>,
    y_train: Vec<Label>,
    x_test: Array2<f64>,
    test: Vec<usize>,
}

/// Per-fold encodings of the full feature set, computed once. Evaluating a
/// feature subset selects columns instead of re-encoding, which gives the
/// same matrices a fresh fit on the projected rows would.
pub struct CvHarness {
    folds: Vec<FoldData>,
    labels: Vec<Label>,
    config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    /// Out-of-fold prediction for every instance, in instance order.
    pub predictions: Vec<Prediction>,
    pub report: EvalReport,
}

impl CvOutcome {
    pub fn predicted_labels(&self) -> Vec<Label> {
        self.predictions.iter().map(|p| p.label).collect()
    }
}

impl CvHarness {
    pub fn new(
        rows: &[&FeatureVector],
        labels: &[Label],
        folds: &Folds,
        min_level_count: usize,
        config: TrainConfig,
    ) -> Result<Self> {
        if rows.len() != labels.len() || folds.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} rows, {} labels and {} fold assignments",
                rows.len(),
                labels.len(),
                folds.len()
            )));
        }
        let folds = (0..folds.k())
            .into_par_iter()
            .map(|f| {
                let train_idx = folds.train(f);
                let test = folds.test(f);
                let train_rows: Vec<&FeatureVector> = train_idx.iter().map(|&i| rows[i]).collect();
                let test_rows: Vec<&FeatureVector> = test.iter().map(|&i| rows[i]).collect();
                let plan = ColumnPlan::fit(&train_rows, min_level_count)?;
                Ok(FoldData {
                    x_train: plan.encode(&train_rows)?.x,
                    x_test: plan.encode(&test_rows)?.x,
                    y_train: train_idx.iter().map(|&i| labels[i]).collect(),
                    plan,
                    test,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CvHarness {
            folds,
            labels: labels.to_vec(),
            config,
        })
    }

    /// Trains on each fold's training part using only `features` and pools
    /// the out-of-fold predictions into one confusion matrix.
    pub fn evaluate(&self, features: &[String]) -> Result<CvOutcome> {
        let per_fold = self
            .folds
            .par_iter()
            .map(|fold| {
                let (plan, idx) = fold.plan.restrict(features)?;
                let x = DesignMatrix {
                    x: fold.x_train.select(Axis(1), &idx),
                    columns: plan.columns().to_vec(),
                };
                let model = train(&x, &fold.y_train, &self.config)?;
                let test = DesignMatrix {
                    x: fold.x_test.select(Axis(1), &idx),
                    columns: x.columns,
                };
                predict_all(&model, &test)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut slots: Vec<Option<Prediction>> = vec![None; self.labels.len()];
        for (fold, preds) in self.folds.iter().zip(per_fold) {
            for (&i, p) in fold.test.iter().zip(preds) {
                slots[i] = Some(p);
            }
        }
        let predictions: Vec<Prediction> = slots
            .into_iter()
            .map(|p| p.ok_or_else(|| Error::invalid("an instance belongs to no test fold")))
            .collect::<Result<_>>()?;
        let predicted: Vec<Label> = predictions.iter().map(|p| p.label).collect();
        let cm = ConfusionMatrix::from_predictions(&self.labels, &predicted)?;
        Ok(CvOutcome {
            predictions,
            report: weighted_prf(&cm)?,
        })
    }

    /// Pooled weighted F1 in points, the selection criterion.
    pub fn score(&self, features: &[String]) -> Result<f64> {
        Ok(100.0 * self.evaluate(features)?.report.weighted_f1)
    }
}
