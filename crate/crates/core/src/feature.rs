//! Named, typed feature vectors shared by every extractor.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::measure::GazeGroup;

/// Sentinel for categorical features that fall outside the sentence or text.
pub const BOUNDARY: &str = "BOUNDARY";
/// Sentinel for a categorical feature with nothing to report (no such word).
pub const NONE: &str = "NONE";
/// Level that collects categorical values too rare to get their own column.
pub const RARE: &str = "RARE";

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureValue {
    Numeric(f64),
    Categorical(String),
}

impl FeatureValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            FeatureValue::Numeric(v) => Some(*v),
            FeatureValue::Categorical(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            FeatureValue::Categorical(s) => Some(s),
            FeatureValue::Numeric(_) => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, FeatureValue::Numeric(_))
    }
}

impl fmt::Display for FeatureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureValue::Numeric(v) => write!(f, "{v}"),
            FeatureValue::Categorical(s) => f.write_str(s),
        }
    }
}

impl From<f64> for FeatureValue {
    fn from(v: f64) -> Self {
        FeatureValue::Numeric(v)
    }
}

impl From<bool> for FeatureValue {
    fn from(v: bool) -> Self {
        FeatureValue::Numeric(if v { 1.0 } else { 0.0 })
    }
}

impl From<usize> for FeatureValue {
    fn from(v: usize) -> Self {
        FeatureValue::Numeric(v as f64)
    }
}

impl From<&str> for FeatureValue {
    fn from(v: &str) -> Self {
        FeatureValue::Categorical(v.to_string())
    }
}

impl From<String> for FeatureValue {
    fn from(v: String) -> Self {
        FeatureValue::Categorical(v)
    }
}

/// Gaze region around the pronoun.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Prev,
    It,
    Next,
    /// Derived by merging the pronoun with the following word.
    ItPlusNext,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Prev, Region::It, Region::Next, Region::ItPlusNext];

    pub fn prefix(self) -> &'static str {
        match self {
            Region::Prev => "PREV",
            Region::It => "IT",
            Region::Next => "NEXT",
            Region::ItPlusNext => "IT_PLUS_NEXT",
        }
    }

    pub fn parse(s: &str) -> Option<Region> {
        Region::ALL
            .into_iter()
            .find(|r| r.prefix().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.prefix())
    }
}

/// Where a feature came from; used for filtering and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Gaze { region: Region, group: GazeGroup },
    /// Region-at-boundary indicator emitted alongside a gaze block.
    Boundary,
    Basic,
    PosWindow,
    Linguistic,
    Embedding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub name: String,
    pub value: FeatureValue,
    pub source: Source,
}

/// Ordered feature map with unique names.
#[derive(Debug, Clone, Default)]
pub struct FeatureVector {
    entries: Vec<Feature>,
    index: HashMap<String, usize>,
}

impl PartialEq for FeatureVector {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a feature. Panics on a duplicate name, which is always an
    /// extractor bug.
    pub fn push(&mut self, name: impl Into<String>, value: impl Into<FeatureValue>, source: Source) {
        let name = name.into();
        assert!(!self.index.contains_key(&name), "duplicate feature `{name}`");
        self.index.insert(name.clone(), self.entries.len());
        self.entries.push(Feature {
            name,
            value: value.into(),
            source,
        });
    }

    /// Concatenates two vectors; fails if a name occurs in both.
    pub fn extend(&mut self, other: FeatureVector) -> Result<()> {
        for f in other.entries {
            if self.index.contains_key(&f.name) {
                return Err(Error::Schema {
                    feature: f.name,
                    message: "feature defined twice".into(),
                });
            }
            self.index.insert(f.name.clone(), self.entries.len());
            self.entries.push(f);
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&FeatureValue> {
        self.index.get(name).map(|&i| &self.entries[i].value)
    }

    pub fn entries(&self) -> &[Feature] {
        &self.entries
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|f| f.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&Feature) -> bool) {
        self.entries.retain(|f| keep(f));
        self.index = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, f)| (f.name.clone(), i))
            .collect();
    }

    /// Keeps only the named features, in the order given. Missing names are
    /// an error.
    pub fn project(&self, names: &[String]) -> Result<FeatureVector> {
        let mut out = FeatureVector::new();
        for n in names {
            let i = *self.index.get(n.as_str()).ok_or_else(|| Error::Schema {
                feature: n.clone(),
                message: "not present in the feature vector".into(),
            })?;
            let f = &self.entries[i];
            out.push(f.name.clone(), f.value.clone(), f.source);
        }
        Ok(out)
    }
}

impl FromIterator<Feature> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = Feature>>(iter: I) -> Self {
        let mut v = FeatureVector::new();
        for f in iter {
            v.push(f.name, f.value, f.source);
        }
        v
    }
}
