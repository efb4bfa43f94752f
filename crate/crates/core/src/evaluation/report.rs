//! Report rows as CSV and as an aligned plain-text results table.

use std::fmt::Write as _;
use std::path::Path;

use super::agreement::AgreementReport;
use super::metrics::{ConfusionMatrix, EvalReport};
use crate::error::{Error, Result};
use crate::label::Label;

/// One line of a results table. Metrics are in percentage points.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub section: String,
    pub model_id: String,
    pub feature_set: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub n: u64,
    /// (P, R, F1) per class, canonical order.
    pub per_class: [[f64; 3]; Label::COUNT],
}

impl ReportRow {
    pub fn new(section: impl Into<String>, r: &EvalReport) -> Self {
        ReportRow {
            section: section.into(),
            model_id: r.model_id.clone(),
            feature_set: r.feature_set.clone(),
            precision: 100.0 * r.weighted_precision,
            recall: 100.0 * r.weighted_recall,
            f1: 100.0 * r.weighted_f1,
            accuracy: 100.0 * r.accuracy,
            macro_f1: 100.0 * r.macro_f1,
            n: r.n,
            per_class: r.per_class.map(|c| [100.0 * c.precision, 100.0 * c.recall, 100.0 * c.f1]),
        }
    }
}

fn header() -> Vec<String> {
    let mut h: Vec<String> = [
        "section", "model_id", "feature_set", "P", "R", "F1", "accuracy", "macro_F1", "n",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for l in Label::ALL {
        for m in ["P", "R", "F1"] {
            h.push(format!("{l}_{m}"));
        }
    }
    h
}

fn num(v: f64) -> String {
    format!("{v:.4}")
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut out = || -> std::result::Result<(), csv::Error> {
        w.write_record(header())?;
        for r in rows {
            let mut rec = vec![
                r.section.clone(),
                r.model_id.clone(),
                r.feature_set.clone(),
                num(r.precision),
                num(r.recall),
                num(r.f1),
                num(r.accuracy),
                num(r.macro_f1),
                r.n.to_string(),
            ];
            rec.extend(r.per_class.iter().flatten().map(|v| num(*v)));
            w.write_record(rec)?;
        }
        Ok(())
    };
    // Writing into memory cannot fail.
    out().expect("in-memory CSV write");
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

pub fn read_report_csv(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::from_csv(path, e))?;
    let expected = header();
    let found: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::from_csv(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if found != expected {
        return Err(Error::parse(path, 1, "not a report file (unexpected header)"));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| Error::from_csv(path, e))?;
        let f = |j: usize| -> Result<f64> {
            rec[j]
                .parse()
                .map_err(|_| Error::parse(path, line, format!("`{}` is not a number", &rec[j])))
        };
        let mut per_class = [[0.0; 3]; Label::COUNT];
        for (k, class) in per_class.iter_mut().enumerate() {
            for (m, v) in class.iter_mut().enumerate() {
                *v = f(9 + 3 * k + m)?;
            }
        }
        rows.push(ReportRow {
            section: rec[0].to_string(),
            model_id: rec[1].to_string(),
            feature_set: rec[2].to_string(),
            precision: f(3)?,
            recall: f(4)?,
            f1: f(5)?,
            accuracy: f(6)?,
            macro_f1: f(7)?,
            n: rec[8]
                .parse()
                .map_err(|_| Error::parse(path, line, "bad instance count"))?,
            per_class,
        });
    }
    Ok(rows)
}

/// Rows grouped under their section headings, one decimal place.
pub fn render_table(rows: &[ReportRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.model_id.chars().count() + 2)
        .chain(std::iter::once(5))
        .max()
        .unwrap_or(5);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$} {:>6} {:>6} {:>6} {:>6}", "Model", "P", "R", "F1", "Acc");
    let _ = writeln!(out, "{}", "-".repeat(width + 28));
    let mut section: Option<&str> = None;
    for r in rows {
        if section != Some(r.section.as_str()) {
            let _ = writeln!(out, "{}", r.section);
            section = Some(&r.section);
        }
        let _ = writeln!(
            out,
            "  {:<w$} {:>6.1} {:>6.1} {:>6.1} {:>6.1}",
            r.model_id,
            r.precision,
            r.recall,
            r.f1,
            r.accuracy,
            w = width - 2
        );
    }
    out
}

pub fn confusion_csv(cm: &ConfusionMatrix) -> String {
    let mut out = String::from("gold\\predicted");
    for l in Label::ALL {
        let _ = write!(out, ",{l}");
    }
    out.push('\n');
    for g in Label::ALL {
        let _ = write!(out, "{g}");
        for p in Label::ALL {
            let _ = write!(out, ",{}", cm.get(g, p));
        }
        out.push('\n');
    }
    out
}

/// Per-annotator and retained class counts with percentages, then κ and
/// raw agreement.
pub fn render_agreement(r: &AgreementReport) -> String {
    let retained = r.retained();
    let lines: [(&str, [usize; Label::COUNT]); 3] = [
        ("Annotator 1", r.distribution_a),
        ("Annotator 2", r.distribution_b),
        ("Final", retained),
    ];
    let mut out = String::new();
    let _ = write!(out, "{:<12}", "");
    for l in Label::ALL {
        let _ = write!(out, " {:>12}", l.as_str());
    }
    let _ = writeln!(out, " {:>7}", "Total");
    for (name, counts) in lines {
        let total: usize = counts.iter().sum();
        let _ = write!(out, "{name:<12}");
        for c in counts {
            let pct = if total == 0 { 0.0 } else { 100.0 * c as f64 / total as f64 };
            let _ = write!(out, " {:>12}", format!("{c} ({pct:.0}%)"));
        }
        let _ = writeln!(out, " {total:>7}");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "pairs\t{}", r.n);
    let _ = writeln!(out, "kappa\t{:.4}", r.kappa);
    let _ = writeln!(out, "agreement\t{:.2}", r.percent_agreement);
    let _ = writeln!(out, "disagreements\t{}", r.n - r.agreed());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::metrics::{majority_baseline, weighted_prf};
    use Label::*;

    fn rows() -> Vec<ReportRow> {
        let mut labels = vec![Nom; 9];
        labels.extend([Pleon, Pleon, Clause]);
        let base = majority_baseline(&labels).unwrap();
        let cm = ConfusionMatrix::new([[8, 1, 0], [1, 1, 0], [0, 0, 1]]);
        let m = weighted_prf(&cm).unwrap().labelled("Previous + Next word", "Previous_word,Next_word");
        vec![ReportRow::new("Baselines", &base), ReportRow::new("Baselines", &m)]
    }

    #[test]
    fn csv_round_trip_keeps_text_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        std::fs::write(&path, report_csv(&rows())).unwrap();
        let back = read_report_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].feature_set, "Previous_word,Next_word");
        assert!((back[0].accuracy - 75.0).abs() < 1e-9);
    }

    #[test]
    fn table_groups_sections() {
        let t = render_table(&rows());
        assert_eq!(t.matches("Baselines").count(), 1);
        assert!(t.contains("  majority"));
        assert!(t.contains("75.0"));
    }

    #[test]
    fn confusion_layout() {
        let cm = ConfusionMatrix::new([[1, 2, 3], [4, 5, 6], [7, 8, 9]]);
        assert_eq!(
            confusion_csv(&cm),
            "gold\\predicted,NOM,PLEON,CLAUSE\nNOM,1,2,3\nPLEON,4,5,6\nCLAUSE,7,8,9\n"
        );
    }
}
