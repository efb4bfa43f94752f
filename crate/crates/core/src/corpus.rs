//! Ingestion of the word-level gaze export and the dual annotation file.
//!
//! The gaze export has one row per (participant, token). Token metadata is
//! repeated on every row and must agree across participants; the reading
//! measures are averaged per token by [`average_gaze`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::label::Label;
use crate::measure::Measure;

const META_COLUMNS: [&str; 8] = [
    "participant_id",
    "trial_id",
    "token_uid",
    "surface",
    "sentence_id",
    "paragraph_id",
    "position_in_sentence",
    "is_punctuation",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub uid: usize,
    pub trial_id: u32,
    pub sentence_id: u32,
    pub paragraph_id: u32,
    pub position_in_sentence: u32,
    pub surface: String,
    pub is_punctuation: bool,
}

/// One participant's measures for one token. `None` marks an empty cell
/// (the measure does not apply, e.g. a third-run duration for a word that was
/// read only once).
#[derive(Debug, Clone, PartialEq)]
pub struct RawGazeRecord {
    pub participant_id: String,
    pub token_uid: usize,
    pub measures: [Option<f64>; Measure::COUNT],
}

impl RawGazeRecord {
    pub fn get(&self, m: Measure) -> Option<f64> {
        self.measures[m.index()]
    }
}

/// Per-token measures averaged over all participants.
#[derive(Debug, Clone, PartialEq)]
pub struct GazeMeasures {
    pub token_uid: usize,
    pub values: [f64; Measure::COUNT],
    pub n_participants: usize,
}

impl GazeMeasures {
    pub fn get(&self, m: Measure) -> f64 {
        self.values[m.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedInstance {
    pub token_uid: usize,
    pub label_a1: Label,
    pub label_a2: Label,
    /// Present only when both annotators agree.
    pub final_label: Option<Label>,
}

impl AnnotatedInstance {
    pub fn new(token_uid: usize, label_a1: Label, label_a2: Label) -> Self {
        AnnotatedInstance {
            token_uid,
            label_a1,
            label_a2,
            final_label: (label_a1 == label_a2).then_some(label_a1),
        }
    }
}

/// Reads the gaze export. Tokens come back ordered by uid; records in file order.
pub fn load_gaze_corpus(path: impl AsRef<Path>) -> Result<(Vec<Token>, Vec<RawGazeRecord>)> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::from_csv(path, e))?;

    let headers = reader
        .headers()
        .map_err(|e| Error::from_csv(path, e))?
        .clone();
    let layout = ColumnLayout::from_headers(path, &headers)?;

    let mut tokens: BTreeMap<usize, Token> = BTreeMap::new();
    let mut records = Vec::new();
    let mut row = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut row) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(Error::from_csv(path, e)),
        }
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let (token, record) = layout.parse_row(&row).map_err(|m| Error::parse(path, line, m))?;
        match tokens.get(&token.uid) {
            Some(seen) if *seen != token => {
                return Err(Error::parse(
                    path,
                    line,
                    format!("token {} metadata disagrees with an earlier row", token.uid),
                ));
            }
            Some(_) => {}
            None => {
                tokens.insert(token.uid, token);
            }
        }
        records.push(record);
    }

    let tokens: Vec<Token> = tokens.into_values().collect();
    validate_token_stream(&tokens)?;
    Ok((tokens, records))
}

struct ColumnLayout {
    meta: [usize; META_COLUMNS.len()],
    measures: [usize; Measure::COUNT],
}

impl ColumnLayout {
    fn from_headers(path: &Path, headers: &csv::StringRecord) -> Result<Self> {
        let mut meta = [usize::MAX; META_COLUMNS.len()];
        let mut measures = [usize::MAX; Measure::COUNT];
        for (i, name) in headers.iter().enumerate() {
            let name = name.trim();
            if let Some(j) = META_COLUMNS.iter().position(|c| *c == name) {
                meta[j] = i;
            } else if let Some(m) = Measure::from_name(name) {
                measures[m.index()] = i;
            } else {
                return Err(Error::UnknownColumn {
                    path: path.to_path_buf(),
                    column: name.to_string(),
                });
            }
        }
        let missing = META_COLUMNS
            .iter()
            .zip(meta.iter())
            .find(|(_, &i)| i == usize::MAX)
            .map(|(c, _)| c.to_string())
            .or_else(|| {
                Measure::ALL
                    .iter()
                    .find(|m| measures[m.index()] == usize::MAX)
                    .map(|m| m.name().to_string())
            });
        if let Some(column) = missing {
            return Err(Error::MissingColumn {
                path: path.to_path_buf(),
                column,
            });
        }
        Ok(ColumnLayout { meta, measures })
    }

    fn parse_row(&self, row: &csv::StringRecord) -> std::result::Result<(Token, RawGazeRecord), String> {
        let field = |j: usize| row.get(self.meta[j]).unwrap_or("").trim();
        let int = |j: usize| -> std::result::Result<u64, String> {
            field(j)
                .parse::<u64>()
                .map_err(|_| format!("{} `{}` is not a non-negative integer", META_COLUMNS[j], field(j)))
        };

        let participant_id = field(0).to_string();
        if participant_id.is_empty() {
            return Err("empty participant_id".into());
        }
        let uid = int(2)? as usize;
        let is_punctuation = match field(7).to_ascii_lowercase().as_str() {
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(format!("is_punctuation `{other}` is not a boolean")),
        };
        let token = Token {
            uid,
            trial_id: int(1)? as u32,
            sentence_id: int(4)? as u32,
            paragraph_id: int(5)? as u32,
            position_in_sentence: int(6)? as u32,
            surface: row.get(self.meta[3]).unwrap_or("").to_string(),
            is_punctuation,
        };

        let mut measures = [None; Measure::COUNT];
        for m in Measure::ALL {
            let cell = row.get(self.measures[m.index()]).unwrap_or("").trim();
            if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| format!("{m} `{cell}` is not a number"))?;
            if !v.is_finite() || v < 0.0 {
                return Err(format!("{m} must be a non-negative number, got {cell}"));
            }
            if m.is_percentage() && v > 100.0 {
                return Err(format!("{m} is a percentage but got {cell}"));
            }
            if m == Measure::Skip && v != 0.0 && v != 1.0 {
                return Err(format!("Skip must be 0 or 1, got {cell}"));
            }
            measures[m.index()] = Some(v);
        }
        if measures[Measure::Skip.index()] == Some(1.0)
            && measures[Measure::FirstRunFixationCount.index()].unwrap_or(0.0) > 0.0
        {
            return Err("Skip = 1 but First_Run_Fixation_Count > 0".into());
        }

        Ok((
            token,
            RawGazeRecord {
                participant_id,
                token_uid: uid,
                measures,
            },
        ))
    }
}

fn validate_token_stream(tokens: &[Token]) -> Result<()> {
    for (i, t) in tokens.iter().enumerate() {
        if t.uid != i {
            return Err(Error::invalid(format!(
                "token uids must be contiguous from 0; expected {i}, found {}",
                t.uid
            )));
        }
        let expected = match i.checked_sub(1).map(|p| &tokens[p]) {
            Some(prev) if prev.sentence_id == t.sentence_id => prev.position_in_sentence + 1,
            _ => 0,
        };
        if t.position_in_sentence != expected {
            return Err(Error::invalid(format!(
                "token {}: position_in_sentence is {}, expected {expected}",
                t.uid, t.position_in_sentence
            )));
        }
    }
    Ok(())
}

/// Averages each measure over participants. Empty cells count as 0, so a
/// skipped word contributes zero durations and Skip averages to the skip rate.
///
/// Participants are summed in ascending id order, which makes the result
/// independent of record order.
pub fn average_gaze(records: &[RawGazeRecord], tokens: &[Token]) -> Result<Vec<GazeMeasures>> {
    let mut by_token: Vec<Vec<&RawGazeRecord>> = vec![Vec::new(); tokens.len()];
    for r in records {
        let slot = by_token.get_mut(r.token_uid).ok_or_else(|| {
            Error::invalid(format!("gaze record refers to unknown token {}", r.token_uid))
        })?;
        slot.push(r);
    }

    by_token
        .into_iter()
        .enumerate()
        .map(|(uid, mut rs)| {
            if rs.is_empty() {
                return Err(Error::invalid(format!("token {uid} has no gaze records")));
            }
            rs.sort_by(|a, b| a.participant_id.cmp(&b.participant_id));
            if let Some(w) = rs.windows(2).find(|w| w[0].participant_id == w[1].participant_id) {
                return Err(Error::invalid(format!(
                    "participant {} has two records for token {uid}",
                    w[0].participant_id
                )));
            }
            let mut values = [0.0; Measure::COUNT];
            for r in &rs {
                for (acc, v) in values.iter_mut().zip(r.measures.iter()) {
                    *acc += v.unwrap_or(0.0);
                }
            }
            let n = rs.len() as f64;
            values.iter_mut().for_each(|v| *v /= n);
            Ok(GazeMeasures {
                token_uid: uid,
                values,
                n_participants: rs.len(),
            })
        })
        .collect()
}

fn is_edge_quote(c: char) -> bool {
    matches!(
        c,
        '"' | '\'' | '\u{2018}' | '\u{2019}' | '\u{201C}' | '\u{201D}' | '(' | ')' | '[' | ']'
    )
}

/// True when a surface is the pronoun "it" or its clitic "it's". Surrounding
/// quotation marks are ignored; any other attached material ("its",
/// "it?..ah,", "it...the") disqualifies the token.
pub fn is_it_surface(surface: &str) -> bool {
    let core = surface.trim().trim_matches(is_edge_quote).to_lowercase();
    matches!(core.as_str(), "it" | "it's" | "it\u{2019}s")
}

pub fn locate_it_instances(tokens: &[Token]) -> Vec<usize> {
    tokens
        .iter()
        .filter(|t| !t.is_punctuation && is_it_surface(&t.surface))
        .map(|t| t.uid)
        .collect()
}

/// Reads the annotation TSV without checking uids against the corpus.
pub fn read_annotations(path: impl AsRef<Path>) -> Result<Vec<AnnotatedInstance>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::from_csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::from_csv(path, e))?.clone();
    let expected = ["token_uid", "annotator1", "annotator2"];
    for (i, want) in expected.iter().enumerate() {
        match headers.get(i).map(str::trim) {
            Some(h) if h == *want => {}
            Some(h) => {
                return Err(Error::UnknownColumn {
                    path: path.to_path_buf(),
                    column: h.to_string(),
                })
            }
            None => {
                return Err(Error::MissingColumn {
                    path: path.to_path_buf(),
                    column: want.to_string(),
                })
            }
        }
    }
    if let Some(extra) = headers.get(expected.len()) {
        return Err(Error::UnknownColumn {
            path: path.to_path_buf(),
            column: extra.to_string(),
        });
    }

    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::from_csv(path, e))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let uid: usize = row[0]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line, format!("token_uid `{}` is not an index", &row[0])))?;
        let a1: Label = row[1].parse().map_err(|e: Error| Error::parse(path, line, e.to_string()))?;
        let a2: Label = row[2].parse().map_err(|e: Error| Error::parse(path, line, e.to_string()))?;
        if !seen.insert(uid) {
            return Err(Error::parse(path, line, format!("token {uid} annotated twice")));
        }
        out.push(AnnotatedInstance::new(uid, a1, a2));
    }
    Ok(out)
}

/// Reads the annotation TSV and checks that every row points at a located
/// instance of "it".
pub fn load_annotations(
    path: impl AsRef<Path>,
    instances: &[usize],
) -> Result<Vec<AnnotatedInstance>> {
    let path = path.as_ref();
    let known: HashSet<usize> = instances.iter().copied().collect();
    let rows = read_annotations(path)?;
    if let Some(bad) = rows.iter().find(|r| !known.contains(&r.token_uid)) {
        return Err(Error::invalid(format!(
            "{}: token {} is not a located instance of \"it\"",
            path.display(),
            bad.token_uid
        )));
    }
    Ok(rows)
}

/// Headline numbers for the `ingest` command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSummary {
    pub tokens: usize,
    pub types: usize,
    pub participants: usize,
    pub trials: usize,
    pub sentences: usize,
    pub paragraphs: usize,
    pub instances: usize,
}

impl CorpusSummary {
    pub fn new(tokens: &[Token], records: &[RawGazeRecord]) -> Self {
        let distinct = |f: &dyn Fn(&Token) -> u32| tokens.iter().map(f).collect::<HashSet<_>>().len();
        let types: HashSet<String> = tokens
            .iter()
            .filter(|t| !t.is_punctuation)
            .map(|t| t.surface.to_lowercase())
            .collect();
        let participants: HashMap<&str, ()> =
            records.iter().map(|r| (r.participant_id.as_str(), ())).collect();
        CorpusSummary {
            tokens: tokens.len(),
            types: types.len(),
            participants: participants.len(),
            trials: distinct(&|t| t.trial_id),
            sentences: distinct(&|t| t.sentence_id),
            paragraphs: distinct(&|t| t.paragraph_id),
            instances: locate_it_instances(tokens).len(),
        }
    }
}
