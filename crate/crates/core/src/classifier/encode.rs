//! Turning feature vectors into a numeric design matrix.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::feature::{FeatureValue, FeatureVector, RARE};

/// Categorical values seen fewer times than this in the training rows share
/// the `RARE` column.
pub const DEFAULT_MIN_LEVEL_COUNT: usize = 2;

const MIN_SD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnKind {
    /// z-scored with training-fold statistics (population sd).
    Numeric { mean: f64, sd: f64 },
    /// 0/1 indicator for one level of a categorical feature.
    Level(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub feature: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn name(&self) -> String {
        match &self.kind {
            ColumnKind::Numeric { .. } => self.feature.clone(),
            ColumnKind::Level(level) => format!("{}={level}", self.feature),
        }
    }
}

/// The mapping from a feature schema to design-matrix columns, fitted on
/// training rows only.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnPlan {
    pub(crate) schema: Vec<(String, FeatureKind)>,
    pub(crate) columns: Vec<Column>,
    pub(crate) min_level_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    /// rows × columns
    pub x: Array2<f64>,
    pub columns: Vec<Column>,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_columns(&self) -> usize {
        self.x.ncols()
    }
}

fn kind_of(v: &FeatureValue) -> FeatureKind {
    if v.is_numeric() {
        FeatureKind::Numeric
    } else {
        FeatureKind::Categorical
    }
}

fn schema_of(rows: &[&FeatureVector]) -> Result<Vec<(String, FeatureKind)>> {
    let Some(first) = rows.first() else {
        return Err(Error::invalid("cannot fit an encoder on zero rows"));
    };
    let schema: Vec<(String, FeatureKind)> = first
        .entries()
        .iter()
        .map(|f| (f.name.clone(), kind_of(&f.value)))
        .collect();
    for row in &rows[1..] {
        check_row(&schema, row)?;
    }
    Ok(schema)
}

fn check_row(schema: &[(String, FeatureKind)], row: &FeatureVector) -> Result<()> {
    if let Some(extra) = row.names().find(|n| !schema.iter().any(|(s, _)| s == n)) {
        return Err(Error::Schema {
            feature: extra.to_string(),
            message: "not in the fitted schema".into(),
        });
    }
    for (name, kind) in schema {
        match row.get(name) {
            None => {
                return Err(Error::Schema {
                    feature: name.clone(),
                    message: "missing from a row".into(),
                })
            }
            Some(v) if kind_of(v) != *kind => {
                return Err(Error::Schema {
                    feature: name.clone(),
                    message: "numeric in one row, categorical in another".into(),
                })
            }
            Some(FeatureValue::Numeric(x)) if !x.is_finite() => {
                return Err(Error::Schema {
                    feature: name.clone(),
                    message: format!("non-finite value {x}"),
                })
            }
            Some(_) => {}
        }
    }
    Ok(())
}

impl ColumnPlan {
    pub fn fit(rows: &[&FeatureVector], min_level_count: usize) -> Result<Self> {
        let schema = schema_of(rows)?;
        let n = rows.len() as f64;
        let mut columns = Vec::new();
        for (name, kind) in &schema {
            match kind {
                FeatureKind::Numeric => {
                    let values: Vec<f64> = rows
                        .iter()
                        .map(|r| r.get(name).and_then(FeatureValue::as_f64).unwrap_or(0.0))
                        .collect();
                    let mean = values.iter().sum::<f64>() / n;
                    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                    let sd = var.sqrt();
                    if sd > MIN_SD {
                        columns.push(Column {
                            feature: name.clone(),
                            kind: ColumnKind::Numeric { mean, sd },
                        });
                    }
                }
                FeatureKind::Categorical => {
                    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                    for r in rows {
                        if let Some(s) = r.get(name).and_then(FeatureValue::as_str) {
                            *counts.entry(s).or_default() += 1;
                        }
                    }
                    let mut level_counts: BTreeMap<String, usize> = BTreeMap::new();
                    for (level, c) in counts {
                        let key = if c >= min_level_count { level } else { RARE };
                        *level_counts.entry(key.to_string()).or_default() += c;
                    }
                    for (level, c) in level_counts {
                        // A level present in every row is a constant column.
                        if c < rows.len() {
                            columns.push(Column {
                                feature: name.clone(),
                                kind: ColumnKind::Level(level),
                            });
                        }
                    }
                }
            }
        }
        Ok(ColumnPlan {
            schema,
            columns,
            min_level_count,
        })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn schema(&self) -> &[(String, FeatureKind)] {
        &self.schema
    }

    /// The plan a fit on rows projected to `features` (in that order) would
    /// produce, plus the indices of its columns in `self`. Every column
    /// depends on its own feature only, so this equals refitting.
    pub fn restrict(&self, features: &[String]) -> Result<(ColumnPlan, Vec<usize>)> {
        let mut schema = Vec::with_capacity(features.len());
        let mut index = Vec::new();
        for name in features {
            let Some(entry) = self.schema.iter().find(|(s, _)| s == name) else {
                return Err(Error::Schema {
                    feature: name.clone(),
                    message: "not in the fitted schema".into(),
                });
            };
            if schema.iter().any(|(s, _): &(String, FeatureKind)| s == name) {
                return Err(Error::Schema {
                    feature: name.clone(),
                    message: "requested twice".into(),
                });
            }
            schema.push(entry.clone());
            index.extend(
                self.columns
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| &c.feature == name)
                    .map(|(j, _)| j),
            );
        }
        let columns = index.iter().map(|&j| self.columns[j].clone()).collect();
        Ok((
            ColumnPlan {
                schema,
                columns,
                min_level_count: self.min_level_count,
            },
            index,
        ))
    }

    pub fn encode_row(&self, row: &FeatureVector) -> Result<Vec<f64>> {
        check_row(&self.schema, row)?;
        let mut out = vec![0.0; self.columns.len()];
        let mut i = 0;
        while i < self.columns.len() {
            let feature = &self.columns[i].feature;
            match &self.columns[i].kind {
                ColumnKind::Numeric { mean, sd } => {
                    let v = row.get(feature).and_then(FeatureValue::as_f64).unwrap_or(0.0);
                    out[i] = (v - mean) / sd;
                    i += 1;
                }
                ColumnKind::Level(_) => {
                    let value = row.get(feature).and_then(FeatureValue::as_str).unwrap_or("");
                    let end = self.columns[i..]
                        .iter()
                        .position(|c| &c.feature != feature)
                        .map_or(self.columns.len(), |p| i + p);
                    let group = &self.columns[i..end];
                    let hit = group
                        .iter()
                        .position(|c| matches!(&c.kind, ColumnKind::Level(l) if l == value))
                        .or_else(|| {
                            group
                                .iter()
                                .position(|c| matches!(&c.kind, ColumnKind::Level(l) if l == RARE))
                        });
                    if let Some(j) = hit {
                        out[i + j] = 1.0;
                    }
                    i = end;
                }
            }
        }
        Ok(out)
    }

    pub fn encode(&self, rows: &[&FeatureVector]) -> Result<DesignMatrix> {
        let d = self.columns.len();
        let mut x = Array2::zeros((rows.len(), d));
        for (i, row) in rows.iter().enumerate() {
            let encoded = self.encode_row(row)?;
            x.row_mut(i)
                .iter_mut()
                .zip(encoded)
                .for_each(|(dst, v)| *dst = v);
        }
        Ok(DesignMatrix {
            x,
            columns: self.columns.clone(),
        })
    }
}

/// Fits a plan on `rows` and encodes them.
pub fn encode(rows: &[&FeatureVector], min_level_count: usize) -> Result<(ColumnPlan, DesignMatrix)> {
    let plan = ColumnPlan::fit(rows, min_level_count)?;
    let x = plan.encode(rows)?;
    Ok((plan, x))
}
