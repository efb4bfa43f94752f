//! A small deterministic stand-in for the real gaze export and annotation
//! file, for smoke tests and demos.
//!
//! Sentences come from templates whose wording and reading times depend on
//! the use of "it", so a classifier has something to learn; nothing here is
//! meant to resemble real reading behaviour beyond the file format.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::label::Label;
use crate::measure::Measure;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    /// Sentences, each containing one instance of "it".
    pub sentences: usize,
    pub participants: usize,
    pub sentences_per_trial: usize,
    pub trials_per_paragraph: usize,
    /// Chance that the second annotator picks a different label.
    pub disagreement: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            sentences: 200,
            participants: 4,
            sentences_per_trial: 4,
            trials_per_paragraph: 3,
            disagreement: 0.2,
            seed: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub gaze_csv: String,
    pub annotations_tsv: String,
    pub tokens: usize,
    /// Label the sentence was generated for, per instance uid.
    pub truth: Vec<(usize, Label)>,
}

const NOUNS: [&str; 12] = [
    "dog", "letter", "house", "book", "car", "garden", "window", "door", "ship", "table", "river", "child",
];
const NOUNS2: [&str; 6] = ["table", "floor", "shelf", "box", "bed", "road"];
const ADJS: [&str; 8] = ["clear", "strange", "likely", "odd", "late", "cold", "true", "sad"];
const VERBS: [&str; 6] = ["stopped", "moved", "fell", "broke", "arrived", "waited"];
const PREPS: [&str; 4] = ["on", "under", "near", "by"];

fn template(label: Label, rng: &mut ChaCha8Rng) -> Vec<String> {
    let n = *NOUNS.choose(rng).unwrap();
    let n2 = *NOUNS2.choose(rng).unwrap();
    let a = *ADJS.choose(rng).unwrap();
    let v = *VERBS.choose(rng).unwrap();
    let p = *PREPS.choose(rng).unwrap();
    // Half the time the wording comes from any class, so context alone is
    // an imperfect cue.
    let label = if rng.random::<f64>() < 0.5 {
        *Label::ALL.choose(rng).unwrap()
    } else {
        label
    };
    let s = match (label, rng.random_range(0..3)) {
        (Label::Nom, 0) => format!("The {n} {v} and it rolled {p} the {n2} ."),
        (Label::Nom, 1) => format!("She found the {n} and put it {p} the {n2} ."),
        (Label::Nom, _) => format!("I saw the {n} ; it was very {a} ."),
        (Label::Pleon, 0) => format!("It is {a} that the {n} {v} ."),
        (Label::Pleon, 1) => format!("It was raining when the {n} {v} ."),
        (Label::Pleon, _) => format!("It seemed {a} to leave the {n} ."),
        (Label::Clause, 0) => format!("The {n} {v} {p} the {n2} , and it made her {a} ."),
        (Label::Clause, 1) => format!("He sold the {n} ; it was a {a} surprise ."),
        (Label::Clause, _) => format!("They {v} early , which means it was {a} ."),
    };
    s.split(' ').map(str::to_string).collect()
}

fn draw_label(rng: &mut ChaCha8Rng) -> Label {
    let x: f64 = rng.random();
    if x < 0.56 {
        Label::Nom
    } else if x < 0.89 {
        Label::Pleon
    } else {
        Label::Clause
    }
}

/// Extra reading time on the pronoun and the word after it, by use.
fn shift(label: Label, role: Role) -> f64 {
    match (label, role) {
        (Label::Pleon, Role::Next) => 45.0,
        (Label::Clause, Role::It) => 35.0,
        (Label::Clause, Role::Next) => 20.0,
        (Label::Nom, Role::It) => -10.0,
        _ => 0.0,
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Role {
    It,
    Next,
    Other,
}

struct Row {
    trial: usize,
    sentence: usize,
    paragraph: usize,
    position: usize,
    surface: String,
    punct: bool,
    label: Option<Label>,
    role: Role,
    /// Shared by every reader, so averaging does not remove it.
    item_noise: f64,
}

fn measures(row: &Row, rng: &mut ChaCha8Rng, trial_totals: (f64, f64)) -> [Option<f64>; Measure::COUNT] {
    use Measure::*;
    let mut m = [None; Measure::COUNT];
    let mut set = |k: Measure, v: f64| m[k.index()] = Some(v);
    let len = row.surface.chars().count() as f64;
    let extra = row.label.map_or(0.0, |l| shift(l, row.role)) + row.item_noise;
    let skip_p = if row.punct { 0.9 } else { (0.45 - 0.06 * len).clamp(0.05, 0.5) };
    let skipped = rng.random::<f64>() < skip_p && extra <= 0.0;
    set(Skip, if skipped { 1.0 } else { 0.0 });
    set(TrialFixationCount, trial_totals.0);
    set(TrialTotalReadingTime, trial_totals.1);

    let base = 170.0 + 12.0 * len + extra + rng.random_range(-40.0..40.0);
    let mut total = 0.0;
    let mut count = 0.0;
    if skipped {
        set(FirstRunFixationCount, 0.0);
        set(FirstRunFixationPct, 0.0);
    } else {
        let c = if len > 6.0 || extra > 30.0 { 2.0 } else { 1.0 };
        set(FirstRunFixationCount, c);
        set(FirstFixationDuration, base.max(60.0));
        set(FirstFixationVisitedCount, 1.0);
        set(FirstFixProgressive, 1.0);
        let gaze = (base * c * 0.9).max(60.0);
        set(GazeDuration, gaze);
        set(GoPastTime, gaze + rng.random_range(0.0..60.0) + extra.max(0.0));
        set(SelectiveGoPastTime, gaze);
        total += gaze;
        count += c;
    }
    let second = rng.random::<f64>() < 0.15 + extra.max(0.0) / 150.0;
    if second {
        let d = 150.0 + rng.random_range(0.0..80.0) + extra;
        set(SecondRunFixationCount, 1.0);
        set(SecondFixationDuration, d);
        set(SecondFixationRun, 2.0);
        total += d;
        count += 1.0;
    }
    if second && rng.random::<f64>() < 0.3 {
        let d = 140.0 + rng.random_range(0.0..60.0);
        set(ThirdRunFixationCount, 1.0);
        set(ThirdFixationDuration, d);
        set(ThirdFixationRun, 3.0);
        total += d;
        count += 1.0;
    }
    if count > 0.0 {
        set(LastFixationDuration, base.max(60.0) * 0.8);
        set(LastFixationRun, if second { 2.0 } else { 1.0 });
        set(Spillover, 150.0 + rng.random_range(0.0..50.0));
    }
    let pct = |x: f64, of: f64| (100.0 * x / of).min(100.0);
    set(FixationCount, count);
    set(FixationPct, pct(count, trial_totals.0));
    set(TotalReadingTime, total);
    set(TotalReadingTimePct, pct(total, trial_totals.1));
    if let Some(c) = m[FirstRunFixationCount.index()].filter(|&c| c > 0.0) {
        m[FirstRunFixationPct.index()] = Some(pct(c, count.max(1.0)));
    }
    if m[SecondRunFixationCount.index()].is_some() {
        m[SecondRunFixationPct.index()] = Some(pct(1.0, count.max(1.0)));
    }
    if m[ThirdRunFixationCount.index()].is_some() {
        m[ThirdRunFixationPct.index()] = Some(pct(1.0, count.max(1.0)));
    }
    m
}

pub fn generate(spec: &SyntheticSpec) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows: Vec<Row> = Vec::new();
    let mut truth = Vec::new();
    let per_trial = spec.sentences_per_trial.max(1);
    let per_par = spec.trials_per_paragraph.max(1);
    for s in 0..spec.sentences {
        let label = draw_label(&mut rng);
        let words = template(label, &mut rng);
        let trial = s / per_trial;
        let it_pos = words
            .iter()
            .position(|w| w.eq_ignore_ascii_case("it"))
            .expect("every template contains it");
        for (i, w) in words.into_iter().enumerate() {
            let role = match i {
                _ if i == it_pos => Role::It,
                _ if i == it_pos + 1 => Role::Next,
                _ => Role::Other,
            };
            if role == Role::It {
                truth.push((rows.len(), label));
            }
            rows.push(Row {
                trial,
                sentence: s,
                paragraph: trial / per_par,
                position: i,
                punct: matches!(w.as_str(), "." | "," | ";"),
                surface: w,
                label: (role != Role::Other).then_some(label),
                role,
                item_noise: rng.random_range(-70.0..70.0),
            });
        }
    }

    let mut header = String::from(
        "participant_id,trial_id,token_uid,surface,sentence_id,paragraph_id,position_in_sentence,is_punctuation",
    );
    for m in Measure::ALL {
        let _ = write!(header, ",{}", m.name());
    }
    let mut csv = header + "\n";
    for p in 0..spec.participants {
        let pid = format!("p{:02}", p + 1);
        let mut trial_totals = (0.0, 0.0);
        let mut current_trial = usize::MAX;
        for (uid, row) in rows.iter().enumerate() {
            if row.trial != current_trial {
                current_trial = row.trial;
                trial_totals = (rng.random_range(40.0..80.0f64).round(), rng.random_range(8000.0..16000.0f64).round());
            }
            let _ = write!(
                csv,
                "{pid},{},{uid},\"{}\",{},{},{},{}",
                row.trial,
                row.surface.replace('"', "\"\""),
                row.sentence,
                row.paragraph,
                row.position,
                u8::from(row.punct)
            );
            for v in measures(row, &mut rng, trial_totals) {
                match v {
                    Some(x) => {
                        let _ = write!(csv, ",{}", (x * 100.0).round() / 100.0);
                    }
                    None => csv.push(','),
                }
            }
            csv.push('\n');
        }
    }

    let mut ann = String::from("token_uid\tannotator1\tannotator2\n");
    for (uid, label) in &truth {
        let other = |rng: &mut ChaCha8Rng| *Label::ALL.iter().filter(|l| *l != label).collect::<Vec<_>>().choose(rng).unwrap();
        let a1 = if rng.random::<f64>() < spec.disagreement / 2.0 { *other(&mut rng) } else { *label };
        let a2 = if rng.random::<f64>() < spec.disagreement / 2.0 { *other(&mut rng) } else { *label };
        let _ = writeln!(ann, "{uid}\t{a1}\t{a2}");
    }

    SyntheticCorpus {
        gaze_csv: csv,
        annotations_tsv: ann,
        tokens: rows.len(),
        truth,
    }
}

impl SyntheticCorpus {
    /// Writes `gaze.csv` and `annotations.tsv` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let gaze = dir.join("gaze.csv");
        let ann = dir.join("annotations.tsv");
        fs::write(&gaze, &self.gaze_csv).map_err(|e| Error::io(&gaze, e))?;
        fs::write(&ann, &self.annotations_tsv).map_err(|e| Error::io(&ann, e))?;
        Ok((gaze, ann))
    }
}
