//! Linguistic context of each "it": positional, part-of-speech and proximity
//! features in the style of classic pleonastic-pronoun detectors, the basic
//! token features, and optional pretrained word vectors.

mod chunk;
mod embeddings;

pub use chunk::{chunk_nps, chunk_text, NpSpan};
pub use embeddings::{embed_context, load_embeddings, load_embeddings_for, EmbeddingTable};

use std::ops::Range;

use crate::corpus::{is_it_surface, Token};
use crate::error::{Error, Result};
use crate::feature::{FeatureVector, Source, BOUNDARY, NONE};

use chunk::is_adjective;

/// Distance reported when the searched-for word does not follow in the sentence.
pub const DISTANCE_CAP: usize = 50;

pub const POS_OFFSETS: [(&str, isize); 8] = [
    ("POS_L4", -4),
    ("POS_L3", -3),
    ("POS_L2", -2),
    ("POS_L1", -1),
    ("POS_R1", 1),
    ("POS_R2", 2),
    ("POS_R3", 3),
    ("POS_R4", 4),
];

/// Whether the nearest-verb/adjective features carry the word itself or just
/// its presence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LexicalMode {
    #[default]
    Lexical,
    Boolean,
}

const COMPLEMENTISERS: [&str; 3] = ["that", "whether", "if"];

fn is_complementiser(token: &Token, tag: &str) -> bool {
    tag == "IN" && COMPLEMENTISERS.contains(&token.surface.to_lowercase().as_str())
}

fn is_preposition(token: &Token, tag: &str) -> bool {
    tag == "IN" && !is_complementiser(token, tag)
}

fn is_verb(tag: &str) -> bool {
    tag.starts_with("VB")
}

/// Tokens, tags and NP spans of the whole text, with sentence and paragraph
/// lookups.
#[derive(Debug, Clone)]
pub struct TaggedText<'a> {
    pub tokens: &'a [Token],
    pub tags: &'a [String],
    /// Sorted by `start_uid`.
    pub nps: Vec<NpSpan>,
}

impl<'a> TaggedText<'a> {
    pub fn new(tokens: &'a [Token], tags: &'a [String]) -> Result<Self> {
        if tokens.len() != tags.len() {
            return Err(Error::invalid(format!(
                "{} tokens but {} tags",
                tokens.len(),
                tags.len()
            )));
        }
        let nps = chunk_text(tokens, tags);
        Ok(TaggedText { tokens, tags, nps })
    }

    fn span_where(&self, uid: usize, same: impl Fn(&Token, &Token) -> bool) -> Range<usize> {
        let here = &self.tokens[uid];
        let mut start = uid;
        while start > 0 && same(&self.tokens[start - 1], here) {
            start -= 1;
        }
        let mut end = uid + 1;
        while end < self.tokens.len() && same(&self.tokens[end], here) {
            end += 1;
        }
        start..end
    }

    pub fn sentence(&self, uid: usize) -> Range<usize> {
        self.span_where(uid, |a, b| a.sentence_id == b.sentence_id)
    }

    pub fn paragraph(&self, uid: usize) -> Range<usize> {
        self.span_where(uid, |a, b| a.paragraph_id == b.paragraph_id)
    }

    fn nps_within(&self, range: &Range<usize>) -> &[NpSpan] {
        let lo = self.nps.partition_point(|np| np.start_uid < range.start);
        let hi = self.nps.partition_point(|np| np.start_uid < range.end);
        &self.nps[lo..hi]
    }

    fn is_infinitive(&self, i: usize, sentence: &Range<usize>) -> bool {
        self.tags[i] == "TO"
            && self.tokens[i].surface.eq_ignore_ascii_case("to")
            && i + 1 < sentence.end
            && self.tags[i + 1] == "VB"
    }
}

/// The linguistic block for one instance. POS window entries are tagged
/// [`Source::PosWindow`], everything else [`Source::Linguistic`].
pub fn evans_features(uid: usize, text: &TaggedText<'_>, mode: LexicalMode) -> Result<FeatureVector> {
    let token = text
        .tokens
        .get(uid)
        .ok_or_else(|| Error::invalid(format!("token {uid} is outside the corpus")))?;
    if !is_it_surface(&token.surface) {
        return Err(Error::invalid(format!(
            "token {uid} (`{}`) is not an instance of \"it\"",
            token.surface
        )));
    }
    let sentence = text.sentence(uid);
    let paragraph = text.paragraph(uid);
    let after = uid + 1..sentence.end;
    let before = sentence.start..uid;
    let tokens = text.tokens;
    let tags = text.tags;

    let sentence_nps = text.nps_within(&sentence);
    let paragraph_nps = text.nps_within(&paragraph);
    let preceding_in_sentence = sentence_nps.iter().filter(|np| np.end_uid < uid).count();
    let following_in_sentence = sentence_nps.iter().filter(|np| np.start_uid > uid).count();
    let preceding_in_paragraph = paragraph_nps.iter().filter(|np| np.end_uid < uid).count();
    let next_np_start = sentence_nps
        .iter()
        .find(|np| np.start_uid > uid)
        .map_or(sentence.end, |np| np.start_uid);

    let find_after = |pred: &dyn Fn(usize) -> bool| after.clone().find(|&i| pred(i));
    let find_before = |pred: &dyn Fn(usize) -> bool| before.clone().rev().find(|&i| pred(i));
    let distance = |hit: Option<usize>| hit.map_or(DISTANCE_CAP, |i| (i - uid).min(DISTANCE_CAP));
    let lexical = |hit: Option<usize>| -> crate::feature::FeatureValue {
        match (mode, hit) {
            (LexicalMode::Lexical, Some(i)) => tokens[i].surface.to_lowercase().into(),
            (LexicalMode::Lexical, None) => NONE.into(),
            (LexicalMode::Boolean, hit) => hit.is_some().into(),
        }
    };

    let adjective = |i: usize| is_adjective(&tags[i]);
    let verb = |i: usize| is_verb(&tags[i]);
    let complementiser = |i: usize| is_complementiser(&tokens[i], &tags[i]);
    let preposition = |i: usize| is_preposition(&tokens[i], &tags[i]);
    let infinitive = |i: usize| text.is_infinitive(i, &sentence);
    let ing_verb = |i: usize| tags[i] == "VBG";

    let ling = Source::Linguistic;
    let mut fv = FeatureVector::new();
    fv.push("Word_position", uid - sentence.start, ling);
    fv.push("Preceding_NPs_in_sentence", preceding_in_sentence, ling);
    fv.push("Preceding_NPs_in_paragraph", preceding_in_paragraph, ling);
    fv.push("Following_NPs_in_sentence", following_in_sentence, ling);
    fv.push("NPs_in_the_sentence", sentence_nps.len(), ling);
    fv.push("NPs_in_the_paragraph", paragraph_nps.len(), ling);
    fv.push(
        "Following_adjectives_in_sentence",
        after.clone().filter(|&i| adjective(i)).count(),
        ling,
    );
    fv.push("Previous_verb", lexical(find_before(&verb)), ling);
    fv.push("Following_adjective", lexical(find_after(&adjective)), ling);
    fv.push("Following_verb", lexical(find_after(&verb)), ling);
    for (name, offset) in POS_OFFSETS {
        let pos = uid as isize + offset;
        let tag = if pos >= sentence.start as isize && pos < sentence.end as isize {
            tags[pos as usize].clone()
        } else {
            BOUNDARY.to_string()
        };
        fv.push(name, tag, Source::PosWindow);
    }
    fv.push(
        "Following_complementisers",
        after.clone().filter(|&i| complementiser(i)).count(),
        ling,
    );
    fv.push(
        "An_adjective_before_the_next_NP",
        (uid + 1..next_np_start).any(adjective),
        ling,
    );
    fv.push(
        "Words_until_next_complementiser",
        distance(find_after(&complementiser)),
        ling,
    );
    fv.push("Words_until_next_infinitive", distance(find_after(&infinitive)), ling);
    fv.push("Words_until_next_preposition", distance(find_after(&preposition)), ling);
    fv.push("Words_until_next_ing_verb", distance(find_after(&ing_verb)), ling);
    fv.push(
        "A_complementiser_before_the_next_NP",
        (uid + 1..next_np_start).any(complementiser),
        ling,
    );
    fv.push(
        "Immediately_preceding_preposition",
        uid > sentence.start && preposition(uid - 1),
        ling,
    );
    Ok(fv)
}

/// Previous and next word, the instance's length, and whether punctuation
/// follows. Neighbours are taken from the running text, so only the first and
/// last token of the corpus see `BOUNDARY`.
pub fn basic_features(uid: usize, tokens: &[Token]) -> Result<FeatureVector> {
    let token = tokens
        .get(uid)
        .ok_or_else(|| Error::invalid(format!("token {uid} is outside the corpus")))?;
    let word = |i: Option<usize>| {
        i.and_then(|i| tokens.get(i))
            .map_or(BOUNDARY.to_string(), |t| t.surface.to_lowercase())
    };
    let basic = Source::Basic;
    let mut fv = FeatureVector::new();
    fv.push("Previous_word", word(uid.checked_sub(1)), basic);
    fv.push("Next_word", word(Some(uid + 1)), basic);
    fv.push("Word_length", token.surface.chars().count(), basic);
    fv.push(
        "Punctuation",
        tokens.get(uid + 1).is_some_and(|t| t.is_punctuation),
        basic,
    );
    Ok(fv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature::FeatureValue;

    /// Builds a text from `word/TAG` sentences separated by ` | `.
    fn text(s: &str) -> (Vec<Token>, Vec<String>) {
        let mut tokens = Vec::new();
        let mut tags = Vec::new();
        for (sid, sentence) in s.split(" | ").enumerate() {
            for (pos, wt) in sentence.split(' ').enumerate() {
                let (w, t) = wt.rsplit_once('/').unwrap();
                tokens.push(Token {
                    uid: tokens.len(),
                    trial_id: 0,
                    sentence_id: sid as u32,
                    paragraph_id: 0,
                    position_in_sentence: pos as u32,
                    surface: w.into(),
                    is_punctuation: w.chars().all(|c| c.is_ascii_punctuation()),
                });
                tags.push(t.to_string());
            }
        }
        (tokens, tags)
    }

    fn num(fv: &FeatureVector, name: &str) -> f64 {
        fv.get(name).and_then(FeatureValue::as_f64).unwrap_or_else(|| panic!("{name}"))
    }

    fn cat<'a>(fv: &'a FeatureVector, name: &str) -> &'a str {
        fv.get(name).and_then(FeatureValue::as_str).unwrap_or_else(|| panic!("{name}"))
    }

    #[test]
    fn preceding_preposition() {
        let (t, g) = text(
            "When/WRB was/VBD the/DT first/JJ time/NN you/PRP heard/VBD of/IN it/PRP ?/.",
        );
        let tt = TaggedText::new(&t, &g).unwrap();
        let fv = evans_features(8, &tt, LexicalMode::Lexical).unwrap();
        assert_eq!(num(&fv, "Immediately_preceding_preposition"), 1.0);
        assert_eq!(num(&fv, "Word_position"), 8.0);
        assert_eq!(cat(&fv, "Previous_verb"), "heard");
        assert_eq!(cat(&fv, "POS_L1"), "IN");
        assert_eq!(cat(&fv, "POS_R1"), ".");
        assert_eq!(cat(&fv, "POS_R2"), BOUNDARY);
    }

    #[test]
    fn sentence_final_instance() {
        let (t, g) = text("I/PRP saw/VBD it/PRP | It/PRP was/VBD late/JJ");
        let tt = TaggedText::new(&t, &g).unwrap();
        let fv = evans_features(2, &tt, LexicalMode::Lexical).unwrap();
        for (name, offset) in POS_OFFSETS {
            if offset > 0 {
                assert_eq!(cat(&fv, name), BOUNDARY);
            }
        }
        for name in [
            "Words_until_next_complementiser",
            "Words_until_next_infinitive",
            "Words_until_next_preposition",
            "Words_until_next_ing_verb",
        ] {
            assert_eq!(num(&fv, name), DISTANCE_CAP as f64, "{name}");
        }
        assert_eq!(cat(&fv, "Following_verb"), NONE);
    }

    #[test]
    fn extraposed_infinitive() {
        let (t, g) = text("it/PRP is/VBZ nice/JJ to/TO go/VB");
        let tt = TaggedText::new(&t, &g).unwrap();
        let fv = evans_features(0, &tt, LexicalMode::Lexical).unwrap();
        assert_eq!(cat(&fv, "Following_adjective"), "nice");
        assert_eq!(num(&fv, "Words_until_next_infinitive"), 3.0);
        assert_eq!(num(&fv, "An_adjective_before_the_next_NP"), 1.0);
        assert_eq!(num(&fv, "Following_adjectives_in_sentence"), 1.0);

        let fv = evans_features(0, &tt, LexicalMode::Boolean).unwrap();
        assert_eq!(num(&fv, "Following_adjective"), 1.0);
        assert_eq!(num(&fv, "Previous_verb"), 0.0);
    }

    #[test]
    fn complementiser_and_np_counts() {
        let (t, g) = text(
            "The/DT doctor/NN said/VBD it/PRP was/VBD clear/JJ that/IN the/DT poison/NN worked/VBD",
        );
        let tt = TaggedText::new(&t, &g).unwrap();
        let fv = evans_features(3, &tt, LexicalMode::Lexical).unwrap();
        assert_eq!(num(&fv, "Following_complementisers"), 1.0);
        assert_eq!(num(&fv, "Words_until_next_complementiser"), 3.0);
        assert_eq!(num(&fv, "A_complementiser_before_the_next_NP"), 1.0);
        assert_eq!(num(&fv, "Preceding_NPs_in_sentence"), 1.0);
        assert_eq!(num(&fv, "Following_NPs_in_sentence"), 1.0);
        assert_eq!(num(&fv, "NPs_in_the_sentence"), 3.0);
        // "that" is a complementiser here, never a preposition.
        assert_eq!(num(&fv, "Words_until_next_preposition"), DISTANCE_CAP as f64);
    }

    #[test]
    fn paragraph_counts_span_sentences() {
        let (t, g) = text("The/DT man/NN left/VBD | Then/RB it/PRP rained/VBD on/IN the/DT town/NN");
        let tt = TaggedText::new(&t, &g).unwrap();
        let fv = evans_features(4, &tt, LexicalMode::Lexical).unwrap();
        assert_eq!(num(&fv, "Preceding_NPs_in_paragraph"), 1.0);
        assert_eq!(num(&fv, "NPs_in_the_paragraph"), 3.0);
        assert_eq!(num(&fv, "Preceding_NPs_in_sentence"), 0.0);
        assert_eq!(num(&fv, "Word_position"), 1.0);
        assert_eq!(num(&fv, "Words_until_next_preposition"), 2.0);
    }

    #[test]
    fn rejects_non_instance() {
        let (t, g) = text("the/DT cat/NN");
        let tt = TaggedText::new(&t, &g).unwrap();
        assert!(evans_features(1, &tt, LexicalMode::Lexical).is_err());
    }

    #[test]
    fn basic_block() {
        let (t, _) = text("heard/VBD of/IN it/PRP ?/.");
        let fv = basic_features(2, &t).unwrap();
        assert_eq!(cat(&fv, "Previous_word"), "of");
        assert_eq!(cat(&fv, "Next_word"), "?");
        assert_eq!(num(&fv, "Punctuation"), 1.0);
        assert_eq!(num(&fv, "Word_length"), 2.0);

        let (t, _) = text("It's/PRP fine/JJ");
        let fv = basic_features(0, &t).unwrap();
        assert_eq!(cat(&fv, "Previous_word"), BOUNDARY);
        assert_eq!(num(&fv, "Word_length"), 4.0);
        assert_eq!(num(&fv, "Punctuation"), 0.0);
    }
}
