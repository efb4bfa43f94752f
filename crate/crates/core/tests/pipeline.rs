//! End-to-end runs over a synthetic corpus in the export format.

use std::fs;
use std::path::Path;
use std::time::Instant;

use itgaze::experiments::{
    run_ablation, run_experiment, write_artifacts, Dataset, ExperimentConfig,
};
use itgaze::synthetic::{generate, SyntheticSpec};
use itgaze::Label;

fn corpus(dir: &Path, sentences: usize) -> String {
    let spec = SyntheticSpec {
        sentences,
        participants: 6,
        ..SyntheticSpec::default()
    };
    generate(&spec).write_to(dir).unwrap();
    format!("gaze = {}\nannotations = {}\n", dir.join("gaze.csv").display(), dir.join("annotations.tsv").display())
}

fn config(data: &str, body: &str) -> ExperimentConfig {
    ExperimentConfig::parse(&format!("{data}{body}"), Path::new(".")).unwrap()
}

#[test]
fn full_sized_run_fits_the_time_budget() {
    let dir = tempfile::tempdir().unwrap();
    let data = corpus(dir.path(), 1050);
    let t0 = Instant::now();
    let cfg = config(
        &data,
        "name = gaze-basic-pos\nblock = BASIC\nblock = POS_WINDOW\ncandidate = GAZE:ALL:ALL\nselect = feature\n",
    );
    let dataset = Dataset::load(&cfg.paths, cfg.train.seed).unwrap();
    let n = dataset.retained.len();
    assert!((700..900).contains(&n), "{n} retained");
    let out = run_experiment(&cfg, &dataset).unwrap();
    let elapsed = t0.elapsed();
    eprintln!(
        "{n} instances, weighted F1 {:.1}, {} groups added, {:?}",
        100.0 * out.report.weighted_f1,
        out.selection.as_ref().unwrap().groups.len(),
        elapsed
    );
    assert!(elapsed.as_secs() < 300, "{elapsed:?}");
    assert_eq!(out.report.n as usize, n);
}

#[test]
fn gaze_and_lexical_signal_is_learned() {
    let dir = tempfile::tempdir().unwrap();
    let data = corpus(dir.path(), 400);
    let majority = config(&data, "name = majority\nmodel = majority\n");
    let tokens = config(&data, "name = tokens\nblock = BASIC:Previous_word,Next_word\n");
    let dataset = Dataset::load(&tokens.paths, 20).unwrap();
    let m = run_experiment(&majority, &dataset).unwrap();
    let t = run_experiment(&tokens, &dataset).unwrap();
    assert!(t.report.weighted_f1 > m.report.weighted_f1);
    assert!(t.report.weighted_f1 > 0.5);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = corpus(&dir.path().join("data"), 150);
    let cfg = config(
        &data,
        "name = combo\nblock = BASIC\ncandidate = GAZE:IT:ALL\ncandidate = GAZE:NEXT:EARLY\ncandidate = LINGUISTIC\nfolds = 5\n",
    );
    let dataset = Dataset::load(&cfg.paths, 20).unwrap();
    let a = write_artifacts(&cfg, &run_experiment(&cfg, &dataset).unwrap(), &dir.path().join("a")).unwrap();
    let b = write_artifacts(&cfg, &run_experiment(&cfg, &dataset).unwrap(), &dir.path().join("b")).unwrap();
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for expected in ["config.txt", "confusion.csv", "features.csv", "folds.csv", "predictions.csv", "report.csv", "report.txt", "trace.csv"] {
        assert!(names.iter().any(|n| n == expected), "missing {expected}");
    }
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?} differs");
    }
}

#[test]
fn ablation_grid_has_reference_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let data = corpus(dir.path(), 150);
    let cfg = config(&data, "name = tokens\nblock = BASIC:Previous_word,Next_word\nfolds = 5\n");
    let dataset = Dataset::load(&cfg.paths, 20).unwrap();
    let grid = run_ablation(&cfg, &dataset).unwrap();
    assert!(grid.cells.iter().flatten().all(|v| *v >= 0.0 && *v <= 100.0));
    let standalone = run_experiment(&cfg, &dataset).unwrap();
    assert_eq!(grid.baseline, 100.0 * standalone.report.weighted_f1);
    assert_eq!(grid.to_csv().lines().count(), 4);
}

#[test]
fn no_retained_instances_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = corpus(dir.path(), 20);
    fs::write(dir.path().join("annotations.tsv"), "token_uid\tannotator1\tannotator2\n").unwrap();
    let cfg = config(&data, "name = empty\nblock = BASIC\n");
    let dataset = Dataset::load(&cfg.paths, 20).unwrap();
    assert!(run_experiment(&cfg, &dataset).is_err());
}

#[test]
fn disagreements_are_excluded() {
    let dir = tempfile::tempdir().unwrap();
    let data = corpus(dir.path(), 100);
    let cfg = config(&data, "name = x\nblock = BASIC\n");
    let dataset = Dataset::load(&cfg.paths, 20).unwrap();
    let agreed = dataset.annotations.iter().filter(|a| a.label_a1 == a.label_a2).count();
    assert_eq!(dataset.retained.len(), agreed);
    assert!(dataset.retained.len() < dataset.annotations.len());
    assert!(dataset.labels().contains(&Label::Clause));
}
