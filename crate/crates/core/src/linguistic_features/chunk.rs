//! Noun-phrase chunking over POS tags.
//!
//! An NP is `(DT|PRP$)? (JJ|JJR|JJS)* (NN|NNS|NNP|NNPS)+` or a bare `PRP`,
//! matched greedily left to right without overlap.

use crate::corpus::Token;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NpSpan {
    /// First token of the span (inclusive).
    pub start_uid: usize,
    /// Last token of the span (inclusive).
    pub end_uid: usize,
    pub head_uid: usize,
}

impl NpSpan {
    pub fn contains(&self, uid: usize) -> bool {
        (self.start_uid..=self.end_uid).contains(&uid)
    }
}

fn is_determiner(tag: &str) -> bool {
    matches!(tag, "DT" | "PRP$")
}

pub(crate) fn is_adjective(tag: &str) -> bool {
    matches!(tag, "JJ" | "JJR" | "JJS")
}

fn is_noun(tag: &str) -> bool {
    matches!(tag, "NN" | "NNS" | "NNP" | "NNPS")
}

/// Chunks one sentence. `tokens` and `tags` are parallel slices.
pub fn chunk_nps(tokens: &[Token], tags: &[String]) -> Vec<NpSpan> {
    debug_assert_eq!(tokens.len(), tags.len());
    let n = tags.len();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < n {
        if tags[i] == "PRP" {
            spans.push(NpSpan {
                start_uid: tokens[i].uid,
                end_uid: tokens[i].uid,
                head_uid: tokens[i].uid,
            });
            i += 1;
            continue;
        }
        let mut j = i;
        if is_determiner(&tags[j]) {
            j += 1;
        }
        while j < n && is_adjective(&tags[j]) {
            j += 1;
        }
        let first_noun = j;
        while j < n && is_noun(&tags[j]) {
            j += 1;
        }
        if j > first_noun {
            spans.push(NpSpan {
                start_uid: tokens[i].uid,
                end_uid: tokens[j - 1].uid,
                head_uid: tokens[j - 1].uid,
            });
            i = j;
        } else {
            i += 1;
        }
    }
    spans
}

/// Chunks every sentence of the text. Spans come back sorted by position.
pub fn chunk_text(tokens: &[Token], tags: &[String]) -> Vec<NpSpan> {
    let mut spans = Vec::new();
    let mut start = 0;
    for sentence in tokens.chunk_by(|a, b| a.sentence_id == b.sentence_id) {
        let end = start + sentence.len();
        spans.extend(chunk_nps(sentence, &tags[start..end]));
        start = end;
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tagged(s: &str) -> (Vec<Token>, Vec<String>) {
        s.split(' ')
            .enumerate()
            .map(|(i, wt)| {
                let (w, t) = wt.rsplit_once('/').unwrap();
                let tok = Token {
                    uid: i,
                    trial_id: 0,
                    sentence_id: 0,
                    paragraph_id: 0,
                    position_in_sentence: i as u32,
                    surface: w.into(),
                    is_punctuation: false,
                };
                (tok, t.to_string())
            })
            .unzip()
    }

    #[test]
    fn determiner_adjective_noun() {
        let (t, g) = tagged("the/DT first/JJ time/NN");
        assert_eq!(
            chunk_nps(&t, &g),
            vec![NpSpan {
                start_uid: 0,
                end_uid: 2,
                head_uid: 2
            }]
        );
    }

    #[test]
    fn no_noun_no_chunk() {
        let (t, g) = tagged("sit/VB down/RP");
        assert!(chunk_nps(&t, &g).is_empty());
    }

    #[test]
    fn bare_pronouns() {
        let (t, g) = tagged("you/PRP heard/VBD of/IN it/PRP");
        let spans = chunk_nps(&t, &g);
        assert_eq!(spans.len(), 2);
        assert_eq!((spans[0].start_uid, spans[1].start_uid), (0, 3));
    }

    #[test]
    fn dangling_determiner_restarts_at_next_token() {
        let (t, g) = tagged("the/DT very/RB old/JJ house/NN");
        let spans = chunk_nps(&t, &g);
        assert_eq!(spans.len(), 1);
        assert_eq!((spans[0].start_uid, spans[0].end_uid), (2, 3));
    }

    #[test]
    fn compound_nouns_are_maximal() {
        let (t, g) = tagged("his/PRP$ dispatch/NN case/NN lay/VBD there/RB");
        let spans = chunk_nps(&t, &g);
        assert_eq!(spans.len(), 1);
        assert_eq!((spans[0].start_uid, spans[0].end_uid, spans[0].head_uid), (0, 2, 2));
    }
}
