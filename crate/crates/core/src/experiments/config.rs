//! Flat `key = value` experiment configs.
//!
//! ```text
//! # Select. Gaze + Basic + POS
//! name = gaze-basic-pos
//! section = Gaze-based models
//! include = data.conf
//! block = BASIC
//! block = POS_WINDOW
//! candidate = GAZE:ALL:ALL
//! select = feature
//! ```
//!
//! `block` lines are always used; `candidate` lines go through forward
//! selection. Relative paths resolve against the directory of the file that
//! names them. Later assignments override earlier ones, so an `include` of
//! shared data paths can come first.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::classifier::{TrainConfig, DEFAULT_MIN_GAIN, DEFAULT_MIN_LEVEL_COUNT};
use crate::error::{Error, Result};
use crate::feature::Region;
use crate::linguistic_features::LexicalMode;
use crate::measure::GazeGroup;

const MAX_INCLUDE_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    /// Previous_word, Next_word, Word_length, Punctuation; empty = all.
    Basic(Vec<String>),
    PosWindow,
    /// Evans-style features other than the POS window; empty = all.
    Linguistic(Vec<String>),
    /// `None` means every region / every group. A single group drops the
    /// boundary flags.
    Gaze {
        region: Option<Region>,
        group: Option<GazeGroup>,
    },
    Embeddings,
}

fn subset(list: &[String]) -> String {
    if list.is_empty() {
        String::new()
    } else {
        format!(":{}", list.join(","))
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::Basic(s) => write!(f, "BASIC{}", subset(s)),
            Block::PosWindow => f.write_str("POS_WINDOW"),
            Block::Linguistic(s) => write!(f, "LINGUISTIC{}", subset(s)),
            Block::Gaze { region, group } => write!(
                f,
                "GAZE:{}:{}",
                region.map_or("ALL", Region::prefix),
                group.map_or("ALL", GazeGroup::name)
            ),
            Block::Embeddings => f.write_str("EMBEDDINGS"),
        }
    }
}

impl Block {
    pub fn parse(s: &str) -> Result<Block> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let list = |rest: &str| -> Vec<String> {
            rest.split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(str::to_string)
                .collect()
        };
        let bad = || Error::invalid(format!("unknown feature block `{s}`"));
        match head.to_ascii_uppercase().as_str() {
            "BASIC" => Ok(Block::Basic(list(rest))),
            "POS_WINDOW" if rest.is_empty() => Ok(Block::PosWindow),
            "LINGUISTIC" => Ok(Block::Linguistic(list(rest))),
            "EMBEDDINGS" if rest.is_empty() => Ok(Block::Embeddings),
            "GAZE" => {
                let (r, g) = rest.split_once(':').ok_or_else(bad)?;
                let region = match r.trim() {
                    x if x.eq_ignore_ascii_case("ALL") => None,
                    x => Some(Region::parse(x).ok_or_else(bad)?),
                };
                let group = match g.trim() {
                    x if x.eq_ignore_ascii_case("ALL") => None,
                    x => Some(GazeGroup::parse(x).ok_or_else(bad)?),
                };
                Ok(Block::Gaze { region, group })
            }
            _ => Err(bad()),
        }
    }

    pub fn needs_embeddings(&self) -> bool {
        matches!(self, Block::Embeddings)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelKind {
    #[default]
    Logistic,
    Majority,
}

/// What forward selection adds at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Granularity {
    /// Each candidate block is one group.
    #[default]
    Block,
    /// Each feature of each candidate block is its own group.
    Feature,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataPaths {
    pub gaze: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    /// Pre-tagged corpus aligned with the tokens.
    pub tagged: Option<PathBuf>,
    /// `word<TAB>tag` sentences to train the tagger on.
    pub tagger_train: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub section: String,
    /// Row label in result tables; defaults to the name.
    pub title: String,
    pub model: ModelKind,
    pub blocks: Vec<Block>,
    pub candidates: Vec<Block>,
    pub select: Granularity,
    pub min_gain: f64,
    pub train: TrainConfig,
    pub folds: usize,
    pub min_level_count: usize,
    pub lexical: LexicalMode,
    pub paths: DataPaths,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "experiment".into(),
            section: String::new(),
            title: String::new(),
            model: ModelKind::Logistic,
            blocks: Vec::new(),
            candidates: Vec::new(),
            select: Granularity::Block,
            min_gain: DEFAULT_MIN_GAIN,
            train: TrainConfig::default(),
            folds: 10,
            min_level_count: DEFAULT_MIN_LEVEL_COUNT,
            lexical: LexicalMode::Lexical,
            paths: DataPaths::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_file(path.as_ref(), 0)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses config text; relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(text, base_dir, Path::new("<config>"), 0)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, path: &Path, depth: usize) -> Result<()> {
        if depth > MAX_INCLUDE_DEPTH {
            return Err(Error::invalid(format!("{}: includes nest too deeply", path.display())));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        self.apply_text(&text, base, path, depth)
    }

    fn apply_text(&mut self, text: &str, base: &Path, origin: &Path, depth: usize) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = i as u64 + 1;
            let content = raw.split_once('#').map_or(raw, |(c, _)| c).trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::parse(origin, line, "expected `key = value`"))?;
            let at = |e: Error| match e {
                Error::Invalid(m) => Error::parse(origin, line, m),
                other => other,
            };
            self.apply(key, value, base, depth).map_err(at)?;
        }
        Ok(())
    }

    fn apply(&mut self, key: &str, value: &str, base: &Path, depth: usize) -> Result<()> {
        let path = || Some(base.join(value));
        let number = |what: &str| -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("{what}: `{value}` is not a number")))
        };
        let count = |what: &str| -> Result<usize> {
            value
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("{what}: `{value}` is not a count")))
        };
        match key {
            "include" => self.apply_file(&base.join(value), depth + 1)?,
            "name" => {
                if value.is_empty() || !value.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
                    return Err(Error::invalid(format!("name `{value}` must be [A-Za-z0-9._-]+")));
                }
                self.name = value.to_string();
            }
            "section" => self.section = value.to_string(),
            "title" => self.title = value.to_string(),
            "model" => {
                self.model = match value {
                    "logistic" => ModelKind::Logistic,
                    "majority" => ModelKind::Majority,
                    _ => return Err(Error::invalid(format!("model `{value}`: expected logistic or majority"))),
                }
            }
            "block" => self.blocks.push(Block::parse(value)?),
            "candidate" => self.candidates.push(Block::parse(value)?),
            "select" => {
                self.select = match value {
                    "block" => Granularity::Block,
                    "feature" => Granularity::Feature,
                    _ => return Err(Error::invalid(format!("select `{value}`: expected block or feature"))),
                }
            }
            "min_gain" => self.min_gain = number(key)?,
            "lambda" => self.train.l2_lambda = number(key)?,
            "tolerance" => self.train.tolerance = number(key)?,
            "max_iters" => self.train.max_iters = count(key)?,
            "seed" => {
                self.train.seed = value
                    .parse()
                    .map_err(|_| Error::invalid(format!("seed: `{value}` is not an integer")))?
            }
            "folds" => self.folds = count(key)?,
            "min_level_count" => self.min_level_count = count(key)?,
            "lexical" => {
                self.lexical = match value {
                    "lexical" => LexicalMode::Lexical,
                    "boolean" => LexicalMode::Boolean,
                    _ => return Err(Error::invalid(format!("lexical `{value}`: expected lexical or boolean"))),
                }
            }
            "gaze" => self.paths.gaze = path(),
            "annotations" => self.paths.annotations = path(),
            "tagged" => self.paths.tagged = path(),
            "tagger_train" => self.paths.tagger_train = path(),
            "embeddings" => self.paths.embeddings = path(),
            _ => return Err(Error::invalid(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.model == ModelKind::Logistic && self.blocks.is_empty() && self.candidates.is_empty() {
            return Err(Error::invalid(format!("{}: no feature blocks", self.name)));
        }
        if self.folds < 2 {
            return Err(Error::invalid("folds must be at least 2"));
        }
        if !(self.train.l2_lambda >= 0.0) || !(self.train.tolerance > 0.0) {
            return Err(Error::invalid("lambda must be ≥ 0 and tolerance > 0"));
        }
        let all = self.blocks.iter().chain(&self.candidates);
        if all.clone().any(Block::needs_embeddings) && self.paths.embeddings.is_none() {
            return Err(Error::invalid("EMBEDDINGS block without an `embeddings` path"));
        }
        Ok(())
    }

    pub fn title(&self) -> &str {
        if self.title.is_empty() {
            &self.name
        } else {
            &self.title
        }
    }

    /// Every setting that influences results, one per line, in fixed order.
    pub fn canonical(&self) -> String {
        let opt = |p: &Option<PathBuf>| p.as_ref().map_or("-".to_string(), |p| p.display().to_string());
        let mut out = String::new();
        out += &format!("name = {}\n", self.name);
        out += &format!("model = {:?}\n", self.model);
        for b in &self.blocks {
            out += &format!("block = {b}\n");
        }
        for b in &self.candidates {
            out += &format!("candidate = {b}\n");
        }
        out += &format!("select = {:?}\n", self.select);
        out += &format!("min_gain = {:?}\n", self.min_gain);
        out += &format!("lambda = {:?}\n", self.train.l2_lambda);
        out += &format!("max_iters = {}\n", self.train.max_iters);
        out += &format!("tolerance = {:?}\n", self.train.tolerance);
        out += &format!("seed = {}\n", self.train.seed);
        out += &format!("folds = {}\n", self.folds);
        out += &format!("min_level_count = {}\n", self.min_level_count);
        out += &format!("lexical = {:?}\n", self.lexical);
        out += &format!("gaze = {}\n", opt(&self.paths.gaze));
        out += &format!("annotations = {}\n", opt(&self.paths.annotations));
        out += &format!("tagged = {}\n", opt(&self.paths.tagged));
        out += &format!("tagger_train = {}\n", opt(&self.paths.tagger_train));
        out += &format!("embeddings = {}\n", opt(&self.paths.embeddings));
        out
    }

    /// First 12 hex digits of the SHA-256 of [`canonical`](Self::canonical).
    pub fn hash12(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(digest)[..12].to_string()
    }

    pub fn output_dir(&self, root: &Path) -> PathBuf {
        root.join(format!("{}-{}", self.name, self.hash12()))
    }

    pub fn all_blocks(&self) -> impl Iterator<Item = &Block> {
        self.blocks.iter().chain(&self.candidates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_syntax_round_trips() {
        for s in [
            "BASIC",
            "BASIC:Previous_word,Next_word",
            "POS_WINDOW",
            "LINGUISTIC:Word_position",
            "GAZE:ALL:ALL",
            "GAZE:IT_PLUS_NEXT:EARLY",
            "GAZE:PREV:ALL",
            "EMBEDDINGS",
        ] {
            assert_eq!(Block::parse(s).unwrap().to_string(), s);
        }
        assert!(Block::parse("GAZE:SIDEWAYS:EARLY").is_err());
        assert!(Block::parse("GAZE:IT").is_err());
        assert!(Block::parse("WORDS").is_err());
    }

    #[test]
    fn parses_and_resolves_paths() {
        let cfg = ExperimentConfig::parse(
            "name = base  # comment\nblock = BASIC:Previous_word,Next_word\ngaze = d/g.csv\nseed = 7\nlambda = 0.5\n",
            Path::new("/cfg"),
        )
        .unwrap();
        assert_eq!(cfg.name, "base");
        assert_eq!(cfg.paths.gaze.as_deref(), Some(Path::new("/cfg/d/g.csv")));
        assert_eq!(cfg.train.seed, 7);
        assert_eq!(cfg.train.l2_lambda, 0.5);
        assert_eq!(cfg.folds, 10);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = ExperimentConfig::parse("name = x\nflavour = mint\n", Path::new(".")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e:?}");
        assert!(ExperimentConfig::parse("name = x\n", Path::new(".")).is_err());
        assert!(ExperimentConfig::parse("block = EMBEDDINGS\n", Path::new(".")).is_err());
    }

    #[test]
    fn include_then_override() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("data.conf"), "gaze = corpus.csv\nseed = 3\n").unwrap();
        let main = dir.path().join("main.conf");
        fs::write(&main, "include = data.conf\nseed = 9\nblock = POS_WINDOW\n").unwrap();
        let cfg = ExperimentConfig::load(&main).unwrap();
        assert_eq!(cfg.train.seed, 9);
        assert_eq!(cfg.paths.gaze, Some(dir.path().join("corpus.csv")));
    }

    #[test]
    fn hash_tracks_settings() {
        let a = ExperimentConfig::parse("block = BASIC\n", Path::new(".")).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash12(), b.hash12());
        b.train.seed = 21;
        assert_ne!(a.hash12(), b.hash12());
        assert_eq!(a.hash12().len(), 12);
    }
}
