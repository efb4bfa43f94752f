//! Cross-validation, metrics, agreement and significance.

mod agreement;
mod bootstrap;
mod cv;
mod folds;
mod metrics;
mod report;

pub use agreement::{cohen_kappa, AgreementReport};
pub use bootstrap::{significance, Significance, DEFAULT_RESAMPLES};
pub use cv::{CvHarness, CvOutcome};
pub use folds::{stratified_kfold, Folds};
pub use metrics::{
    majority_baseline, majority_class, weighted_prf, ClassMetrics, ConfusionMatrix, EvalReport,
};
pub use report::{
    confusion_csv, read_report_csv, render_agreement, render_table, report_csv, ReportRow,
};
