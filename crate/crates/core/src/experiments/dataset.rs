//! Loading everything an experiment needs once, and assembling feature rows.

use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;

use super::config::{Block, DataPaths};
use crate::corpus::{
    average_gaze, load_annotations, load_gaze_corpus, locate_it_instances, AnnotatedInstance,
    CorpusSummary, GazeMeasures, Token,
};
use crate::error::{Error, Result};
use crate::evaluation::{cohen_kappa, AgreementReport};
use crate::feature::{FeatureVector, Region, Source};
use crate::gaze_features::{group_filter, region_features};
use crate::label::Label;
use crate::linguistic_features::{
    basic_features, embed_context, evans_features, load_embeddings_for, EmbeddingTable, LexicalMode,
    TaggedText,
};
use crate::tagger::{fallback_model, load_tagged, read_tagged_corpus, tag, train_tagger};

const TAGGER_EPOCHS: usize = 10;

/// Where the POS tags came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TagSource {
    File,
    Trained { sentences: usize },
    Fallback,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub tokens: Vec<Token>,
    pub gaze: Vec<GazeMeasures>,
    pub tags: Vec<String>,
    pub tag_source: TagSource,
    pub summary: CorpusSummary,
    /// Every located instance of "it".
    pub located: Vec<usize>,
    pub annotations: Vec<AnnotatedInstance>,
    /// Instances both annotators agree on, ordered by token uid.
    pub retained: Vec<(usize, Label)>,
}

fn required<'a>(p: &'a Option<std::path::PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::invalid(format!("config has no `{what}` path")))
}

impl Dataset {
    pub fn load(paths: &DataPaths, tagger_seed: u64) -> Result<Self> {
        let (tokens, records) = load_gaze_corpus(required(&paths.gaze, "gaze")?)?;
        let annotations = match &paths.annotations {
            Some(p) => load_annotations(p, &locate_it_instances(&tokens))?,
            None => Vec::new(),
        };
        Self::from_parts(tokens, &records, annotations, paths, tagger_seed)
    }

    pub fn from_parts(
        tokens: Vec<Token>,
        records: &[crate::corpus::RawGazeRecord],
        annotations: Vec<AnnotatedInstance>,
        paths: &DataPaths,
        tagger_seed: u64,
    ) -> Result<Self> {
        let gaze = average_gaze(records, &tokens)?;
        let summary = CorpusSummary::new(&tokens, records);
        let located = locate_it_instances(&tokens);

        let (tags, tag_source) = if let Some(p) = &paths.tagged {
            let tags = load_tagged(p, &tokens)?.into_iter().map(|(_, t)| t).collect();
            (tags, TagSource::File)
        } else if let Some(p) = &paths.tagger_train {
            let sentences = read_tagged_corpus(p)?;
            let model = train_tagger(&sentences, TAGGER_EPOCHS, tagger_seed)?;
            (
                tag(&tokens, &model),
                TagSource::Trained {
                    sentences: sentences.len(),
                },
            )
        } else {
            (tag(&tokens, fallback_model()), TagSource::Fallback)
        };

        let mut retained: Vec<(usize, Label)> = annotations
            .iter()
            .filter_map(|a| a.final_label.map(|l| (a.token_uid, l)))
            .collect();
        retained.sort_unstable_by_key(|(uid, _)| *uid);

        Ok(Dataset {
            tokens,
            gaze,
            tags,
            tag_source,
            summary,
            located,
            annotations,
            retained,
        })
    }

    pub fn labels(&self) -> Vec<Label> {
        self.retained.iter().map(|(_, l)| *l).collect()
    }

    pub fn uids(&self) -> Vec<usize> {
        self.retained.iter().map(|(u, _)| *u).collect()
    }

    pub fn agreement(&self) -> Result<AgreementReport> {
        let a: Vec<Label> = self.annotations.iter().map(|x| x.label_a1).collect();
        let b: Vec<Label> = self.annotations.iter().map(|x| x.label_a2).collect();
        cohen_kappa(&a, &b)
    }

    /// Surfaces adjacent to retained instances, which is all the embedding
    /// table has to cover.
    pub fn neighbour_words(&self) -> HashSet<String> {
        let mut words = HashSet::new();
        for (uid, _) in &self.retained {
            for i in [uid.checked_sub(1), Some(uid + 1)].into_iter().flatten() {
                if let Some(t) = self.tokens.get(i) {
                    words.insert(t.surface.clone());
                    words.insert(t.surface.to_lowercase());
                }
            }
        }
        words
    }
}

/// Feature rows for the retained instances plus the feature names each
/// block contributed, in block order.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub rows: Vec<FeatureVector>,
    pub blocks: Vec<(Block, Vec<String>)>,
}

impl FeatureTable {
    pub fn names_of<'a>(&'a self, blocks: &'a [Block]) -> impl Iterator<Item = &'a String> + 'a {
        self.blocks
            .iter()
            .filter(move |(b, _)| blocks.contains(b))
            .flat_map(|(_, names)| names)
    }

    pub fn all_names(&self) -> impl Iterator<Item = &String> {
        self.blocks.iter().flat_map(|(_, n)| n)
    }
}

fn pick(fv: FeatureVector, names: &[String], block: &Block) -> Result<FeatureVector> {
    if names.is_empty() {
        return Ok(fv);
    }
    fv.project(names).map_err(|e| match e {
        Error::Schema { feature, .. } => Error::Schema {
            message: format!("not produced by block {block}"),
            feature,
        },
        other => other,
    })
}

fn block_features(
    block: &Block,
    uid: usize,
    data: &Dataset,
    text: &TaggedText<'_>,
    lexical: LexicalMode,
    embeddings: Option<&EmbeddingTable>,
) -> Result<FeatureVector> {
    match block {
        Block::Basic(names) => pick(basic_features(uid, &data.tokens)?, names, block),
        Block::PosWindow => {
            let mut fv = evans_features(uid, text, lexical)?;
            fv.retain(|f| f.source == Source::PosWindow);
            Ok(fv)
        }
        Block::Linguistic(names) => {
            let mut fv = evans_features(uid, text, lexical)?;
            fv.retain(|f| f.source == Source::Linguistic);
            pick(fv, names, block)
        }
        Block::Gaze { region, group } => {
            let regions = region.map_or(Region::ALL.to_vec(), |r| vec![r]);
            let mut out = FeatureVector::new();
            for r in regions {
                let fv = region_features(uid, r, &data.tokens, &data.gaze)?;
                out.extend(match group {
                    Some(g) => group_filter(&fv, *g),
                    None => fv,
                })?;
            }
            Ok(out)
        }
        Block::Embeddings => {
            let table = embeddings.ok_or_else(|| Error::invalid("EMBEDDINGS block but no table loaded"))?;
            embed_context(uid, &data.tokens, table)
        }
    }
}

/// Builds one feature vector per retained instance from `blocks`. Rows are
/// computed in parallel and come back in instance order.
pub fn build_features(
    data: &Dataset,
    blocks: &[Block],
    lexical: LexicalMode,
    embeddings: Option<&EmbeddingTable>,
) -> Result<FeatureTable> {
    let text = TaggedText::new(&data.tokens, &data.tags)?;
    let per_instance: Vec<Vec<FeatureVector>> = data
        .retained
        .par_iter()
        .map(|(uid, _)| {
            blocks
                .iter()
                .map(|b| block_features(b, *uid, data, &text, lexical, embeddings))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| match e {
                    Error::Invalid(m) => Error::invalid(format!("instance at token {uid}: {m}")),
                    other => other,
                })
        })
        .collect::<Result<_>>()?;

    let names: Vec<(Block, Vec<String>)> = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let names = per_instance
                .first()
                .map(|row| row[i].names().map(str::to_string).collect())
                .unwrap_or_default();
            (b.clone(), names)
        })
        .collect();

    let rows = per_instance
        .into_iter()
        .map(|parts| {
            let mut fv = FeatureVector::new();
            for p in parts {
                fv.extend(p)?;
            }
            Ok(fv)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureTable { rows, blocks: names })
}

/// Loads only the vectors the retained instances need.
pub fn load_embeddings_for_dataset(path: &Path, data: &Dataset) -> Result<EmbeddingTable> {
    load_embeddings_for(path, &data.neighbour_words())
}
