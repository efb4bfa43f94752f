//! Encoding, softmax-regression training, prediction and feature selection.

mod encode;
mod logistic;
mod select;

pub use encode::{
    encode, Column, ColumnKind, ColumnPlan, DesignMatrix, FeatureKind, DEFAULT_MIN_LEVEL_COUNT,
};
pub use logistic::{
    class_priors, loss_and_gradient, predict, predict_all, softmax_prediction, train,
    train_with_trace, ModelParams, Prediction, TrainConfig, TrainTrace,
};
pub use select::{forward_select, FeatureGroup, Selection, SelectionStep, DEFAULT_MIN_GAIN};

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::feature::FeatureVector;
use crate::label::Label;

const MAGIC: &str = "itgaze-model";
const VERSION: u32 = 1;

/// A trained model together with the column plan that encodes its input.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub plan: ColumnPlan,
    pub params: ModelParams,
}

impl Classifier {
    pub fn fit(
        rows: &[&FeatureVector],
        labels: &[Label],
        min_level_count: usize,
        config: &TrainConfig,
    ) -> Result<Self> {
        let (plan, x) = encode(rows, min_level_count)?;
        let params = train(&x, labels, config)?;
        Ok(Classifier { plan, params })
    }

    pub fn predict(&self, row: &FeatureVector) -> Result<Prediction> {
        predict(&self.params, &self.plan.encode_row(row)?)
    }

    /// Hash of the feature schema and column layout.
    pub fn schema_hash(&self) -> String {
        let mut h = Sha256::new();
        for (name, kind) in &self.plan.schema {
            h.update(format!("{name}\t{}\n", kind_name(*kind)).as_bytes());
        }
        for c in &self.plan.columns {
            h.update(format!("{}\n", c.name()).as_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Serializes to the flat text model format. Floats are written in their
    /// shortest round-trip form, so loading gives back identical bits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = &self.params.weights;
        let d = self.params.n_columns();
        let weights = |j: usize| -> String {
            (0..Label::COUNT)
                .map(|k| format!("{:?}", w[(k, j)]))
                .collect::<Vec<_>>()
                .join("\t")
        };
        let _ = writeln!(out, "{MAGIC}\t{VERSION}");
        let _ = writeln!(out, "schema\t{}", self.schema_hash());
        let classes: Vec<&str> = Label::ALL.iter().map(|l| l.as_str()).collect();
        let _ = writeln!(out, "classes\t{}", classes.join("\t"));
        let _ = writeln!(out, "lambda\t{:?}", self.params.l2_lambda);
        let _ = writeln!(out, "seed\t{}", self.params.seed);
        let _ = writeln!(out, "min_level_count\t{}", self.plan.min_level_count);
        let _ = writeln!(out, "features\t{}", self.plan.schema.len());
        for (name, kind) in &self.plan.schema {
            let _ = writeln!(out, "feature\t{name}\t{}", kind_name(*kind));
        }
        let _ = writeln!(out, "columns\t{d}");
        let _ = writeln!(out, "bias\t{}", weights(d));
        for (j, c) in self.plan.columns.iter().enumerate() {
            match &c.kind {
                ColumnKind::Numeric { mean, sd } => {
                    let _ = writeln!(out, "numeric\t{}\t{mean:?}\t{sd:?}\t{}", c.feature, weights(j));
                }
                ColumnKind::Level(level) => {
                    let _ = writeln!(out, "level\t{}\t{level}\t{}", c.feature, weights(j));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i as u64 + 1, l));
        let mut next = |expect: &str| -> Result<(u64, Vec<String>)> {
            let (n, line) = lines
                .next()
                .ok_or_else(|| Error::parse(path, 0, format!("unexpected end of file, wanted `{expect}`")))?;
            let fields: Vec<String> = line.split('\t').map(str::to_string).collect();
            if fields[0] != expect {
                return Err(Error::parse(path, n, format!("expected `{expect}`, found `{}`", fields[0])));
            }
            Ok((n, fields))
        };
        let float = |n: u64, s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::parse(path, n, format!("`{s}` is not a number")))
        };
        let int = |n: u64, s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| Error::parse(path, n, format!("`{s}` is not a count")))
        };
        let field = |n: u64, f: &[String], i: usize| -> Result<String> {
            f.get(i)
                .cloned()
                .ok_or_else(|| Error::parse(path, n, "line has too few fields"))
        };

        let (n, header) = next(MAGIC)?;
        if field(n, &header, 1)? != VERSION.to_string() {
            return Err(Error::parse(path, n, "unsupported model version"));
        }
        let (_, schema_line) = next("schema")?;
        let (n, classes) = next("classes")?;
        let expected: Vec<&str> = Label::ALL.iter().map(|l| l.as_str()).collect();
        if classes[1..] != expected[..] {
            return Err(Error::parse(path, n, "class order must be NOM PLEON CLAUSE"));
        }
        let (n, f) = next("lambda")?;
        let l2_lambda = float(n, &field(n, &f, 1)?)?;
        let (n, f) = next("seed")?;
        let seed = field(n, &f, 1)?
            .parse::<u64>()
            .map_err(|_| Error::parse(path, n, "bad seed"))?;
        let (n, f) = next("min_level_count")?;
        let min_level_count = int(n, &field(n, &f, 1)?)?;
        let (n, f) = next("features")?;
        let n_features = int(n, &field(n, &f, 1)?)?;
        let mut schema = Vec::with_capacity(n_features);
        for _ in 0..n_features {
            let (n, f) = next("feature")?;
            let kind = match field(n, &f, 2)?.as_str() {
                "numeric" => FeatureKind::Numeric,
                "categorical" => FeatureKind::Categorical,
                other => return Err(Error::parse(path, n, format!("unknown feature kind `{other}`"))),
            };
            schema.push((field(n, &f, 1)?, kind));
        }
        let (n, f) = next("columns")?;
        let d = int(n, &field(n, &f, 1)?)?;
        let mut weights = Array2::zeros((Label::COUNT, d + 1));
        let (n, f) = next("bias")?;
        for k in 0..Label::COUNT {
            weights[(k, d)] = float(n, &field(n, &f, 1 + k)?)?;
        }
        let mut columns = Vec::with_capacity(d);
        for j in 0..d {
            let (n, line) = lines
                .next()
                .ok_or_else(|| Error::parse(path, 0, "model ends before all columns"))?;
            let f: Vec<String> = line.split('\t').map(str::to_string).collect();
            let (kind, first_weight) = match f[0].as_str() {
                "numeric" => (
                    ColumnKind::Numeric {
                        mean: float(n, &field(n, &f, 2)?)?,
                        sd: float(n, &field(n, &f, 3)?)?,
                    },
                    4,
                ),
                "level" => (ColumnKind::Level(field(n, &f, 2)?), 3),
                other => return Err(Error::parse(path, n, format!("unknown column kind `{other}`"))),
            };
            for k in 0..Label::COUNT {
                weights[(k, j)] = float(n, &field(n, &f, first_weight + k)?)?;
            }
            columns.push(Column {
                feature: field(n, &f, 1)?,
                kind,
            });
        }

        let model = Classifier {
            plan: ColumnPlan {
                schema,
                columns: columns.clone(),
                min_level_count,
            },
            params: ModelParams {
                weights,
                columns,
                l2_lambda,
                seed,
            },
        };
        if field(0, &schema_line, 1)? != model.schema_hash() {
            return Err(Error::parse(path, 2, "schema hash does not match the column list"));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, path)
    }
}

fn kind_name(kind: FeatureKind) -> &'static str {
    match kind {
        FeatureKind::Numeric => "numeric",
        FeatureKind::Categorical => "categorical",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature::Source;
    use proptest::prelude::*;

    fn rows(values: &[(f64, &str)]) -> Vec<FeatureVector> {
        values
            .iter()
            .map(|(x, w)| {
                let mut fv = FeatureVector::new();
                fv.push("Word_length", *x, Source::Basic);
                fv.push("Next_word", *w, Source::Basic);
                fv
            })
            .collect()
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let data = rows(&[
            (2.0, "was"),
            (4.0, "is"),
            (2.0, "was"),
            (2.0, "is"),
            (4.0, "of"),
            (2.0, "was"),
        ]);
        let refs: Vec<_> = data.iter().collect();
        let y = [Label::Nom, Label::Pleon, Label::Nom, Label::Clause, Label::Pleon, Label::Nom];
        let model = Classifier::fit(&refs, &y, 1, &TrainConfig::default()).unwrap();
        let text = model.to_text();
        let back = Classifier::from_text(&text, Path::new("m")).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_text(), text);
        for r in &data {
            assert_eq!(back.predict(r).unwrap(), model.predict(r).unwrap());
        }
    }

    #[test]
    fn tampered_schema_rejected() {
        let data = rows(&[(2.0, "was"), (4.0, "is"), (3.0, "was"), (1.0, "is")]);
        let refs: Vec<_> = data.iter().collect();
        let y = [Label::Nom, Label::Pleon, Label::Nom, Label::Pleon];
        let model = Classifier::fit(&refs, &y, 1, &TrainConfig::default()).unwrap();
        let text = model.to_text().replace("level\tNext_word\tis", "level\tNext_word\tIS");
        assert!(Classifier::from_text(&text, Path::new("m")).is_err());
    }

    proptest! {
        #[test]
        fn floats_survive_text(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let s = format!("{v:?}");
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
