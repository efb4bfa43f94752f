//! Part-of-speech tags for the token stream (Penn Treebank tag set).
//!
//! Tags come either from a pre-tagged file aligned to the corpus
//! ([`load_tagged`]) or from the averaged perceptron trained here
//! ([`train_tagger`]). A small model trained on a bundled hand-tagged sample
//! ([`fallback_model`]) keeps the pipeline runnable without any download; it
//! is much weaker than a tagger trained on a real treebank.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Token;
use crate::error::{Error, Result};

pub type TaggedSentence = Vec<(String, String)>;

const START: [&str; 2] = ["-START-", "-START2-"];
const END: [&str; 2] = ["-END-", "-END2-"];

/// Words seen at least this often with one dominant tag skip the perceptron.
const TAGDICT_MIN_FREQ: usize = 20;
const TAGDICT_MIN_SHARE: f64 = 0.97;

const FALLBACK_SAMPLE: &str = include_str!("../data/fallback_tagged.tsv");
const FALLBACK_EPOCHS: usize = 10;
const FALLBACK_SEED: u64 = 20;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TaggerModel {
    /// feature → tag → averaged weight
    weights: HashMap<String, HashMap<String, f64>>,
    tagdict: HashMap<String, String>,
    /// Sorted; ties in scoring go to the earlier tag.
    classes: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Param {
    weight: f64,
    total: f64,
    stamp: u64,
}

#[derive(Default)]
struct Perceptron {
    params: HashMap<String, HashMap<String, Param>>,
    classes: Vec<String>,
    updates: u64,
}

impl Perceptron {
    fn predict(&self, features: &[String]) -> String {
        let mut scores = vec![0.0; self.classes.len()];
        for f in features {
            if let Some(per_class) = self.params.get(f) {
                for (i, c) in self.classes.iter().enumerate() {
                    if let Some(p) = per_class.get(c) {
                        scores[i] += p.weight;
                    }
                }
            }
        }
        argmax_class(&self.classes, &scores)
    }

    fn update(&mut self, truth: &str, guess: &str, features: &[String]) {
        self.updates += 1;
        if truth == guess {
            return;
        }
        let now = self.updates;
        for f in features {
            let per_class = self.params.entry(f.clone()).or_default();
            for (tag, delta) in [(truth, 1.0), (guess, -1.0)] {
                let p = per_class.entry(tag.to_string()).or_default();
                p.total += (now - p.stamp) as f64 * p.weight;
                p.stamp = now;
                p.weight += delta;
            }
        }
    }

    fn average(self) -> HashMap<String, HashMap<String, f64>> {
        let n = self.updates.max(1) as f64;
        let now = self.updates;
        self.params
            .into_iter()
            .filter_map(|(f, per_class)| {
                let avg: HashMap<String, f64> = per_class
                    .into_iter()
                    .map(|(c, p)| (c, (p.total + (now - p.stamp) as f64 * p.weight) / n))
                    .filter(|(_, w)| *w != 0.0)
                    .collect();
                (!avg.is_empty()).then_some((f, avg))
            })
            .collect()
    }
}

fn argmax_class(classes: &[String], scores: &[f64]) -> String {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    classes.get(best).cloned().unwrap_or_default()
}

fn normalize(word: &str) -> String {
    let first = word.chars().next();
    if word.contains('-') && first != Some('-') {
        "!HYPHEN".into()
    } else if word.len() == 4 && word.chars().all(|c| c.is_ascii_digit()) {
        "!YEAR".into()
    } else if first.is_some_and(|c| c.is_ascii_digit()) {
        "!DIGITS".into()
    } else {
        word.to_lowercase()
    }
}

fn suffix(word: &str) -> &str {
    let start = word
        .char_indices()
        .rev()
        .nth(2)
        .map_or(0, |(i, _)| i);
    &word[start..]
}

fn prefix1(word: &str) -> &str {
    word.char_indices().nth(1).map_or(word, |(i, _)| &word[..i])
}

/// Contextual features for position `i` of `raw` (unnormalized words);
/// `context` is the normalized sentence padded with two START and two END
/// markers.
fn features(i: usize, raw: &str, context: &[String], prev: &str, prev2: &str) -> Vec<String> {
    let word = &context[i + 2];
    let mut f = vec![
        "bias".to_string(),
        format!("i suffix {}", suffix(word)),
        format!("i pref1 {}", prefix1(word)),
        format!("i-1 tag {prev}"),
        format!("i-2 tag {prev2}"),
        format!("i tag+i-2 tag {prev} {prev2}"),
        format!("i word {word}"),
        format!("i-1 tag+i word {prev} {word}"),
        format!("i-1 word {}", context[i + 1]),
        format!("i-1 suffix {}", suffix(&context[i + 1])),
        format!("i-2 word {}", context[i]),
        format!("i+1 word {}", context[i + 3]),
        format!("i+1 suffix {}", suffix(&context[i + 3])),
        format!("i+2 word {}", context[i + 4]),
    ];
    if raw.chars().next().is_some_and(char::is_uppercase) {
        f.push("shape capitalized".into());
    }
    if raw.chars().any(|c| c.is_ascii_digit()) {
        f.push("shape digit".into());
    }
    if raw.contains('-') {
        f.push("shape hyphen".into());
    }
    f
}

fn padded_context<'a>(words: impl Iterator<Item = &'a str>) -> Vec<String> {
    START
        .iter()
        .map(|s| s.to_string())
        .chain(words.map(normalize))
        .chain(END.iter().map(|s| s.to_string()))
        .collect()
}

fn build_tagdict(sentences: &[TaggedSentence]) -> HashMap<String, String> {
    let mut counts: HashMap<&str, HashMap<&str, usize>> = HashMap::new();
    for s in sentences {
        for (w, t) in s {
            *counts.entry(w).or_default().entry(t).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .filter_map(|(w, tags)| {
            let n: usize = tags.values().sum();
            // Highest count, then lexically smallest tag, so the choice is deterministic.
            let (tag, k) = tags.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(a.0)))?;
            (n >= TAGDICT_MIN_FREQ && k as f64 / n as f64 >= TAGDICT_MIN_SHARE)
                .then(|| (w.to_string(), tag.to_string()))
        })
        .collect()
}

/// Trains an averaged perceptron. Sentences are reshuffled every epoch with a
/// generator seeded by `seed`; nothing else is random.
pub fn train_tagger(sentences: &[TaggedSentence], epochs: usize, seed: u64) -> Result<TaggerModel> {
    if sentences.iter().all(|s| s.is_empty()) {
        return Err(Error::invalid("cannot train a tagger on an empty corpus"));
    }
    if epochs == 0 {
        return Err(Error::invalid("tagger training needs at least one epoch"));
    }

    let tagdict = build_tagdict(sentences);
    let classes: Vec<String> = sentences
        .iter()
        .flatten()
        .map(|(_, t)| t.clone())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut model = Perceptron {
        classes: classes.clone(),
        ..Default::default()
    };
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..epochs {
        for &si in &order {
            let sentence = &sentences[si];
            let context = padded_context(sentence.iter().map(|(w, _)| w.as_str()));
            let (mut prev, mut prev2) = (START[0].to_string(), START[1].to_string());
            for (i, (word, truth)) in sentence.iter().enumerate() {
                let guess = match tagdict.get(word) {
                    Some(t) => t.clone(),
                    None => {
                        let feats = features(i, word, &context, &prev, &prev2);
                        let guess = model.predict(&feats);
                        model.update(truth, &guess, &feats);
                        guess
                    }
                };
                prev2 = std::mem::replace(&mut prev, guess);
            }
        }
        order.shuffle(&mut rng);
    }

    Ok(TaggerModel {
        weights: model.average(),
        tagdict,
        classes,
    })
}

fn is_punctuation_word(word: &str) -> bool {
    !word.is_empty() && word.chars().all(|c| !c.is_alphanumeric())
}

impl TaggerModel {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    fn score(&self, feats: &[String]) -> String {
        let mut scores = vec![0.0; self.classes.len()];
        for f in feats {
            if let Some(per_class) = self.weights.get(f) {
                for (i, c) in self.classes.iter().enumerate() {
                    if let Some(w) = per_class.get(c) {
                        scores[i] += w;
                    }
                }
            }
        }
        argmax_class(&self.classes, &scores)
    }

    /// Tags one sentence. Punctuation-only words are tagged with themselves.
    pub fn tag_words(&self, words: &[&str]) -> Vec<String> {
        let context = padded_context(words.iter().copied());
        let (mut prev, mut prev2) = (START[0].to_string(), START[1].to_string());
        let mut out = Vec::with_capacity(words.len());
        for (i, word) in words.iter().enumerate() {
            let tag = if is_punctuation_word(word) {
                word.to_string()
            } else if let Some(t) = self.tagdict.get(*word) {
                t.clone()
            } else {
                self.score(&features(i, word, &context, &prev, &prev2))
            };
            prev2 = std::mem::replace(&mut prev, tag.clone());
            out.push(tag);
        }
        out
    }
}

/// One tag per token. Sentences are the maximal runs of equal `sentence_id`;
/// tokens flagged as punctuation are tagged with their surface.
pub fn tag(tokens: &[Token], model: &TaggerModel) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    for sentence in tokens.chunk_by(|a, b| a.sentence_id == b.sentence_id) {
        let words: Vec<&str> = sentence.iter().map(|t| t.surface.as_str()).collect();
        let tags = model.tag_words(&words);
        out.extend(sentence.iter().zip(tags).map(|(t, tag)| {
            if t.is_punctuation {
                t.surface.clone()
            } else {
                tag
            }
        }));
    }
    out
}

/// Model trained on the bundled hand-tagged sample; built once per process.
pub fn fallback_model() -> &'static TaggerModel {
    static MODEL: OnceLock<TaggerModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let sentences = parse_tagged(FALLBACK_SAMPLE, Path::new("<fallback sample>"))
            .expect("bundled tagged sample is well-formed");
        train_tagger(&sentences, FALLBACK_EPOCHS, FALLBACK_SEED)
            .expect("bundled tagged sample is non-empty")
    })
}

fn parse_tagged(text: &str, path: &Path) -> Result<Vec<TaggedSentence>> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let (word, tag) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, i as u64 + 1, "expected `word<TAB>tag`"))?;
        if word.is_empty() || tag.trim().is_empty() || tag.contains('\t') {
            return Err(Error::parse(path, i as u64 + 1, "expected `word<TAB>tag`"));
        }
        current.push((word.to_string(), tag.trim().to_string()));
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

/// Reads a `word<TAB>tag` corpus with blank lines between sentences.
pub fn read_tagged_corpus(path: impl AsRef<Path>) -> Result<Vec<TaggedSentence>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tagged(&text, path)
}

/// Reads a pre-tagged file and aligns it line by line with the corpus
/// tokens. Surfaces must match exactly.
pub fn load_tagged(path: impl AsRef<Path>, tokens: &[Token]) -> Result<Vec<(usize, String)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::with_capacity(tokens.len());
    let mut last_line = 0;
    for (i, line) in text.lines().enumerate() {
        let lineno = i as u64 + 1;
        last_line = lineno;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (word, tag) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, lineno, "expected `word<TAB>tag`"))?;
        let uid = out.len();
        let Some(token) = tokens.get(uid) else {
            return Err(Error::parse(
                path,
                lineno,
                format!("tagged file has more tokens than the corpus ({})", tokens.len()),
            ));
        };
        if token.surface != word {
            return Err(Error::parse(
                path,
                lineno,
                format!("token {uid}: tagged word `{word}` but corpus has `{}`", token.surface),
            ));
        }
        out.push((uid, tag.trim().to_string()));
    }
    if out.len() != tokens.len() {
        return Err(Error::parse(
            path,
            last_line + 1,
            format!(
                "tagged file ends after {} tokens but the corpus has {}",
                out.len(),
                tokens.len()
            ),
        ));
    }
    Ok(out)
}
