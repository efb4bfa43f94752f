//! Declarative experiments: configs, dataset assembly, runs and reports.

mod config;
mod dataset;
mod run;

pub use config::{Block, DataPaths, ExperimentConfig, Granularity, ModelKind};
pub use dataset::{build_features, load_embeddings_for_dataset, Dataset, FeatureTable, TagSource};
pub use run::{
    config_features, feature_dump, read_predictions, render_experiment, run_ablation,
    run_experiment, train_final, write_artifacts, AblationGrid, ExperimentOutcome,
};

use std::path::Path;

use crate::corpus::read_annotations;
use crate::error::{Error, Result};
use crate::evaluation::{cohen_kappa, render_agreement, significance, AgreementReport, Significance};
use crate::label::Label;

/// κ, raw agreement and the per-annotator / retained distribution table for
/// an annotation file.
pub fn agreement_report(path: impl AsRef<Path>) -> Result<(AgreementReport, String)> {
    let rows = read_annotations(path)?;
    let a: Vec<Label> = rows.iter().map(|r| r.label_a1).collect();
    let b: Vec<Label> = rows.iter().map(|r| r.label_a2).collect();
    let report = cohen_kappa(&a, &b)?;
    let table = render_agreement(&report);
    Ok((report, table))
}

/// Paired bootstrap between two prediction files over the same instances.
pub fn compare_predictions(
    a: impl AsRef<Path>,
    b: impl AsRef<Path>,
    resamples: usize,
    seed: u64,
) -> Result<Significance> {
    let pa = read_predictions(a)?;
    let pb = read_predictions(b)?;
    if pa.len() != pb.len() || pa.iter().zip(&pb).any(|(x, y)| x.0 != y.0 || x.1 != y.1) {
        return Err(Error::invalid(
            "prediction files do not cover the same instances with the same gold labels",
        ));
    }
    let gold: Vec<Label> = pa.iter().map(|r| r.1).collect();
    let la: Vec<Label> = pa.iter().map(|r| r.2).collect();
    let lb: Vec<Label> = pb.iter().map(|r| r.2).collect();
    significance(&la, &lb, &gold, resamples, seed)
}
