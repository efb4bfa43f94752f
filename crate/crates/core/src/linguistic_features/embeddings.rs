//! Pretrained word vectors in the common text format: an optional
//! `count dim` header, then `word v1 … vN` per line.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::corpus::Token;
use crate::error::{Error, Result};
use crate::feature::{FeatureVector, Source};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f32>>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Self {
        EmbeddingTable {
            dimension,
            vectors: HashMap::new(),
        }
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f32>) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(Error::invalid(format!(
                "vector of length {} in a table of dimension {}",
                vector.len(),
                self.dimension
            )));
        }
        self.vectors.insert(word.into(), vector);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Exact match first, then the lowercased form.
    pub fn lookup(&self, word: &str) -> Option<&[f32]> {
        self.vectors
            .get(word)
            .or_else(|| self.vectors.get(&word.to_lowercase()))
            .map(Vec::as_slice)
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    read_table(path.as_ref(), None)
}

/// Like [`load_embeddings`] but keeps only the listed words (and their
/// lowercased forms). Full pretrained tables are large; the pipeline only
/// needs the neighbours of each instance.
pub fn load_embeddings_for(path: impl AsRef<Path>, words: &HashSet<String>) -> Result<EmbeddingTable> {
    read_table(path.as_ref(), Some(words))
}

fn read_table(path: &Path, keep: Option<&HashSet<String>>) -> Result<EmbeddingTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut dimension: Option<usize> = None;
    let mut vectors = HashMap::new();

    for (i, line) in reader.lines().enumerate() {
        let lineno = i as u64 + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(' ');
        let word = fields.next().unwrap_or_default();
        let rest: Vec<&str> = fields.collect();

        if i == 0 && rest.len() == 1 {
            if let (Ok(_), Ok(d)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                dimension = Some(d);
                continue;
            }
        }
        let dim = *dimension.get_or_insert(rest.len());
        if rest.len() != dim || dim == 0 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {dim} components, found {}", rest.len()),
            ));
        }
        if let Some(keep) = keep {
            if !keep.contains(word) && !keep.contains(&word.to_lowercase()) {
                continue;
            }
        }
        let vector = rest
            .iter()
            .map(|s| s.parse::<f32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(path, lineno, format!("bad component: {e}")))?;
        vectors.insert(word.to_string(), vector);
    }

    Ok(EmbeddingTable {
        dimension: dimension.unwrap_or(0),
        vectors,
    })
}

/// Vectors of the previous and next word, `EMB_PREV_<i>` then `EMB_NEXT_<i>`.
/// Out-of-vocabulary neighbours and text edges give zeros.
pub fn embed_context(uid: usize, tokens: &[Token], table: &EmbeddingTable) -> Result<FeatureVector> {
    if uid >= tokens.len() {
        return Err(Error::invalid(format!("token {uid} is outside the corpus")));
    }
    let mut fv = FeatureVector::new();
    let neighbours = [("EMB_PREV", uid.checked_sub(1)), ("EMB_NEXT", Some(uid + 1))];
    for (prefix, at) in neighbours {
        let vector = at
            .and_then(|i| tokens.get(i))
            .and_then(|t| table.lookup(&t.surface));
        for d in 0..table.dimension() {
            let v = vector.map_or(0.0, |v| f64::from(v[d]));
            fv.push(format!("{prefix}_{d}"), v, Source::Embedding);
        }
    }
    Ok(fv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_with_and_without_header() {
        let f = file("2 3\ncat 0.5 -1 2\nof 1 1 1\n");
        let t = load_embeddings(f.path()).unwrap();
        assert_eq!(t.dimension(), 3);
        assert_eq!(t.lookup("cat"), Some(&[0.5f32, -1.0, 2.0][..]));
        assert_eq!(t.lookup("Cat"), Some(&[0.5f32, -1.0, 2.0][..]));
        assert_eq!(t.lookup("dog"), None);

        let f = file("cat 0.5 -1 2\n");
        assert_eq!(load_embeddings(f.path()).unwrap().dimension(), 3);
    }

    #[test]
    fn ragged_line_is_named() {
        let f = file("2 3\ncat 0.5 -1 2\nof 1 1\n");
        assert!(matches!(load_embeddings(f.path()), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn filtered_load_keeps_only_requested() {
        let f = file("cat 1 2\ndog 3 4\n");
        let keep: HashSet<String> = ["dog".to_string()].into();
        let t = load_embeddings_for(f.path(), &keep).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.lookup("cat").is_none());
    }

    #[test]
    fn oov_neighbour_is_zero() {
        let mut table = EmbeddingTable::new(2);
        table.insert("of", vec![1.0, 2.0]).unwrap();
        let tokens: Vec<Token> = ["of", "it", "?"]
            .iter()
            .enumerate()
            .map(|(i, w)| Token {
                uid: i,
                trial_id: 0,
                sentence_id: 0,
                paragraph_id: 0,
                position_in_sentence: i as u32,
                surface: w.to_string(),
                is_punctuation: *w == "?",
            })
            .collect();
        let fv = embed_context(1, &tokens, &table).unwrap();
        assert_eq!(fv.len(), 4);
        assert_eq!(fv.get("EMB_PREV_1").unwrap().as_f64(), Some(2.0));
        assert_eq!(fv.get("EMB_NEXT_0").unwrap().as_f64(), Some(0.0));
        assert_eq!(fv.get("EMB_NEXT_1").unwrap().as_f64(), Some(0.0));
    }
}
