//! Running configured experiments and writing their artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{Block, ExperimentConfig, Granularity, ModelKind};
use super::dataset::{build_features, load_embeddings_for_dataset, Dataset, FeatureTable};
use crate::classifier::{forward_select, Classifier, FeatureGroup, Prediction, Selection};
use crate::error::{Error, Result};
use crate::evaluation::{
    confusion_csv, majority_baseline, majority_class, render_table, report_csv, stratified_kfold,
    CvHarness, EvalReport, Folds, ReportRow,
};
use crate::feature::{FeatureValue, FeatureVector, Region};
use crate::label::Label;
use crate::measure::GazeGroup;

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: EvalReport,
    /// Instance token uids, gold labels and out-of-fold predictions, aligned.
    pub uids: Vec<usize>,
    pub gold: Vec<Label>,
    pub predictions: Vec<Prediction>,
    pub folds: Folds,
    /// Absent for the majority model.
    pub selection: Option<Selection>,
    pub features: FeatureTable,
}

impl ExperimentOutcome {
    pub fn predicted_labels(&self) -> Vec<Label> {
        self.predictions.iter().map(|p| p.label).collect()
    }

    pub fn row(&self, cfg: &ExperimentConfig) -> ReportRow {
        ReportRow::new(cfg.section.clone(), &self.report)
    }
}

fn embeddings_for(cfg: &ExperimentConfig, data: &Dataset, blocks: &[Block]) -> Result<Option<crate::linguistic_features::EmbeddingTable>> {
    if !blocks.iter().any(Block::needs_embeddings) {
        return Ok(None);
    }
    let path = cfg
        .paths
        .embeddings
        .as_deref()
        .ok_or_else(|| Error::invalid("EMBEDDINGS block without an `embeddings` path"))?;
    load_embeddings_for_dataset(path, data).map(Some)
}

/// All feature rows a config can use: its blocks followed by its candidates.
pub fn config_features(cfg: &ExperimentConfig, data: &Dataset) -> Result<FeatureTable> {
    let blocks: Vec<Block> = cfg.all_blocks().cloned().collect();
    let table = embeddings_for(cfg, data, &blocks)?;
    build_features(data, &blocks, cfg.lexical, table.as_ref())
}

fn candidate_groups(cfg: &ExperimentConfig, features: &FeatureTable) -> Vec<FeatureGroup> {
    let mut groups = Vec::new();
    for (block, names) in &features.blocks {
        if !cfg.candidates.contains(block) || cfg.blocks.contains(block) {
            continue;
        }
        match cfg.select {
            Granularity::Block => groups.push(FeatureGroup::new(block.to_string(), names.clone())),
            Granularity::Feature => groups.extend(names.iter().map(FeatureGroup::single)),
        }
    }
    groups
}

fn base_features(cfg: &ExperimentConfig, features: &FeatureTable) -> Vec<String> {
    features.names_of(&cfg.blocks).cloned().collect()
}

/// Ingest → features → stratified CV (with forward selection over the
/// candidates) → pooled metrics.
pub fn run_experiment(cfg: &ExperimentConfig, data: &Dataset) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let gold = data.labels();
    if gold.is_empty() {
        return Err(Error::invalid(format!(
            "{}: no instances left after excluding disagreements",
            cfg.name
        )));
    }
    let folds = stratified_kfold(&gold, cfg.folds, cfg.train.seed)?;

    if cfg.model == ModelKind::Majority {
        let report = majority_baseline(&gold)?.labelled(cfg.title(), "");
        let majority = majority_class(&gold).unwrap_or(Label::Nom);
        let mut probabilities = [0.0; Label::COUNT];
        probabilities[majority.index()] = 1.0;
        let prediction = Prediction {
            probabilities,
            label: majority,
        };
        return Ok(ExperimentOutcome {
            report,
            uids: data.uids(),
            predictions: vec![prediction; gold.len()],
            gold,
            folds,
            selection: None,
            features: FeatureTable {
                rows: Vec::new(),
                blocks: Vec::new(),
            },
        });
    }

    let features = config_features(cfg, data)?;
    let refs: Vec<&FeatureVector> = features.rows.iter().collect();
    let harness = CvHarness::new(&refs, &gold, &folds, cfg.min_level_count, cfg.train)?;
    let base = base_features(cfg, &features);
    let groups = candidate_groups(cfg, &features);
    let selection = forward_select(&groups, &base, cfg.min_gain, |f: &[String]| harness.score(f))?;
    let outcome = harness.evaluate(&selection.features)?;
    let report = outcome
        .report
        .labelled(cfg.title(), describe_features(cfg, &selection));

    Ok(ExperimentOutcome {
        report,
        uids: data.uids(),
        gold,
        predictions: outcome.predictions,
        folds,
        selection: Some(selection),
        features,
    })
}

fn describe_features(cfg: &ExperimentConfig, sel: &Selection) -> String {
    let mut parts: Vec<String> = cfg.blocks.iter().map(Block::to_string).collect();
    parts.extend(sel.groups.iter().map(|g| format!("+{g}")));
    parts.join(" ")
}

/// Fits on every retained instance using the features the experiment
/// retained.
pub fn train_final(cfg: &ExperimentConfig, data: &Dataset, outcome: &ExperimentOutcome) -> Result<Classifier> {
    let Some(sel) = &outcome.selection else {
        return Err(Error::invalid("the majority model has nothing to train"));
    };
    let rows: Vec<FeatureVector> = outcome
        .features
        .rows
        .iter()
        .map(|r| r.project(&sel.features))
        .collect::<Result<_>>()?;
    let refs: Vec<&FeatureVector> = rows.iter().collect();
    Classifier::fit(&refs, &data.labels(), cfg.min_level_count, &cfg.train)
}

fn value_text(v: &FeatureValue) -> String {
    match v {
        FeatureValue::Numeric(x) => format!("{x}"),
        FeatureValue::Categorical(s) => s.clone(),
    }
}

/// `token_uid,final_label,<features…>` for every instance.
pub fn feature_dump(uids: &[usize], gold: &[Label], features: &FeatureTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::invalid(format!("writing feature dump: {e}"));
    let names: Vec<&String> = features.all_names().collect();
    let mut header = vec!["token_uid".to_string(), "final_label".to_string()];
    header.extend(names.iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for ((uid, label), row) in uids.iter().zip(gold).zip(&features.rows) {
        let mut rec = vec![uid.to_string(), label.to_string()];
        for name in &names {
            let v = row.get(name).ok_or_else(|| Error::Schema {
                feature: name.to_string(),
                message: format!("missing for token {uid}"),
            })?;
            rec.push(value_text(v));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(format!("writing feature dump: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
}

fn write(dir: &Path, name: &str, content: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| Error::io(&path, e))
}

/// Writes every artifact under `<root>/<name>-<hash12>/` and returns that
/// directory. Output bytes depend only on the config and the inputs.
pub fn write_artifacts(cfg: &ExperimentConfig, outcome: &ExperimentOutcome, root: &Path) -> Result<PathBuf> {
    let dir = cfg.output_dir(root);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    write(&dir, "config.txt", &cfg.canonical())?;
    if !outcome.features.rows.is_empty() {
        write(&dir, "features.csv", &feature_dump(&outcome.uids, &outcome.gold, &outcome.features)?)?;
    }

    let mut folds = String::from("token_uid,fold\n");
    for (uid, f) in outcome.uids.iter().zip(outcome.folds.assignment()) {
        let _ = writeln!(folds, "{uid},{f}");
    }
    write(&dir, "folds.csv", &folds)?;

    let mut preds = String::from("token_uid,gold,predicted,p_NOM,p_PLEON,p_CLAUSE\n");
    for ((uid, g), p) in outcome.uids.iter().zip(&outcome.gold).zip(&outcome.predictions) {
        let [a, b, c] = p.probabilities;
        let _ = writeln!(preds, "{uid},{g},{},{a:?},{b:?},{c:?}", p.label);
    }
    write(&dir, "predictions.csv", &preds)?;

    let row = outcome.row(cfg);
    write(&dir, "report.csv", &report_csv(std::slice::from_ref(&row)))?;
    write(&dir, "confusion.csv", &confusion_csv(&outcome.report.confusion))?;

    let mut trace = String::from("step,added,weighted_f1\n");
    if let Some(sel) = &outcome.selection {
        let _ = writeln!(trace, "0,{},{:.4}", csv_field(&base_label(cfg)), sel.base_score);
        for (i, s) in sel.trace.iter().enumerate() {
            let _ = writeln!(trace, "{},{},{:.4}", i + 1, csv_field(&s.added), s.score);
        }
    }
    write(&dir, "trace.csv", &trace)?;

    write(&dir, "report.txt", &render_experiment(cfg, outcome))?;
    Ok(dir)
}

fn base_label(cfg: &ExperimentConfig) -> String {
    if cfg.blocks.is_empty() {
        "(empty)".into()
    } else {
        cfg.blocks.iter().map(Block::to_string).collect::<Vec<_>>().join(" ")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_experiment(cfg: &ExperimentConfig, outcome: &ExperimentOutcome) -> String {
    let r = &outcome.report;
    let mut out = render_table(&[outcome.row(cfg)]);
    let _ = writeln!(out);
    let _ = writeln!(out, "instances\t{}", r.n);
    let _ = writeln!(out, "macro F1\t{:.1}", 100.0 * r.macro_f1);
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<8} {:>7} {:>7} {:>7}", "", "P", "R", "F1");
    for l in Label::ALL {
        let c = r.class(l);
        let _ = writeln!(
            out,
            "{:<8} {:>7.1} {:>7.1} {:>7.1}",
            l.as_str(),
            100.0 * c.precision,
            100.0 * c.recall,
            100.0 * c.f1
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "confusion (rows gold, columns predicted)");
    let _ = write!(out, "{:<8}", "");
    for l in Label::ALL {
        let _ = write!(out, " {:>7}", l.as_str());
    }
    let _ = writeln!(out);
    for g in Label::ALL {
        let _ = write!(out, "{:<8}", g.as_str());
        for p in Label::ALL {
            let _ = write!(out, " {:>7}", r.confusion.get(g, p));
        }
        let _ = writeln!(out);
    }
    if let Some(sel) = &outcome.selection {
        let _ = writeln!(out);
        let _ = writeln!(out, "selection: base {:.2}", sel.base_score);
        for s in &sel.trace {
            let _ = writeln!(out, "  + {:<40} {:.2}", s.added, s.score);
        }
    }
    out
}

/// Weighted F1 (points) of the baseline plus each gaze group × region block.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationGrid {
    pub baseline: f64,
    /// Rows EARLY, MEDIUM, LATE; columns PREV, IT, NEXT, IT_PLUS_NEXT.
    pub cells: [[f64; 4]; 3],
}

impl AblationGrid {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("group");
        for r in Region::ALL {
            let _ = write!(out, ",{}", r.prefix());
        }
        out.push('\n');
        for (g, row) in GazeGroup::ALL.iter().zip(&self.cells) {
            let _ = write!(out, "{}", g.name());
            for v in row {
                let _ = write!(out, ",{v:.4}");
            }
            out.push('\n');
        }
        out
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "Weighted F1 over the Previous + Next word baseline ({:.1})\n\n",
            self.baseline
        );
        let _ = write!(out, "{:<8}", "");
        for r in Region::ALL {
            let _ = write!(out, " {:>12}", r.prefix());
        }
        out.push('\n');
        for (g, row) in GazeGroup::ALL.iter().zip(&self.cells) {
            let _ = write!(out, "{:<8}", g.name());
            for v in row {
                let _ = write!(out, " {v:>12.1}");
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the base config's blocks (no selection) alone and with each of the
/// twelve gaze group × region blocks added.
pub fn run_ablation(base: &ExperimentConfig, data: &Dataset) -> Result<AblationGrid> {
    let gold = data.labels();
    if gold.is_empty() {
        return Err(Error::invalid("no instances to evaluate"));
    }
    let mut blocks: Vec<Block> = base.blocks.clone();
    let mut cells_blocks = Vec::new();
    for g in GazeGroup::ALL {
        for r in Region::ALL {
            let b = Block::Gaze {
                region: Some(r),
                group: Some(g),
            };
            if !blocks.contains(&b) {
                blocks.push(b.clone());
            }
            cells_blocks.push(b);
        }
    }
    let table = embeddings_for(base, data, &blocks)?;
    let features = build_features(data, &blocks, base.lexical, table.as_ref())?;
    let folds = stratified_kfold(&gold, base.folds, base.train.seed)?;
    let refs: Vec<&FeatureVector> = features.rows.iter().collect();
    let harness = CvHarness::new(&refs, &gold, &folds, base.min_level_count, base.train)?;
    let base_names: Vec<String> = features.names_of(&base.blocks).cloned().collect();
    let baseline = harness.score(&base_names)?;

    let mut cells = [[0.0; 4]; 3];
    for (i, b) in cells_blocks.iter().enumerate() {
        let mut names = base_names.clone();
        names.extend(features.names_of(std::slice::from_ref(b)).cloned());
        cells[i / 4][i % 4] = harness.score(&names)?;
    }
    Ok(AblationGrid { baseline, cells })
}

/// Reads a `predictions.csv` written by [`write_artifacts`].
pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<(usize, Label, Label)>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::from_csv(path, e))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| Error::from_csv(path, e))?;
        let field = |j: usize| rec.get(j).ok_or_else(|| Error::parse(path, line, "too few fields"));
        let uid = field(0)?
            .parse()
            .map_err(|_| Error::parse(path, line, "bad token_uid"))?;
        let gold = field(1)?.parse().map_err(|e: Error| Error::parse(path, line, e.to_string()))?;
        let pred = field(2)?.parse().map_err(|e: Error| Error::parse(path, line, e.to_string()))?;
        out.push((uid, gold, pred));
    }
    Ok(out)
}

