//! Concept maps from transcripts.
//!
//! Text is split into sentences, lowercased, stripped of punctuation, filtered
//! through the noise lists and the delete list, and generalized through the
//! thesaurus ([`preprocess`]). A concept map links each concept to every
//! different concept that follows it within a token window, never crossing a
//! stop-unit boundary of consecutive sentences ([`build_map`]). Two maps are
//! compared through their direction-preserving intersection ([`intersect`],
//! [`map_stats`]).

mod betweenness;
mod graph;
pub mod lexicon;

use crate::corpus::LAUGHTER_MARKER;

pub use betweenness::betweenness;
pub use graph::{build_map, intersect, map_stats, worksheet_overlap, ConceptMap, MapStats};
pub use lexicon::{Lexicon, LexiconError, Thesaurus};

/// Default forward window in concept positions.
pub const WINDOW_WORDS: usize = 10;
/// Default stop unit in sentences.
pub const STOP_UNIT_SENTENCES: usize = 10;

/// Sentence spans ending at `.`, `?` or `!`; a period between two digits
/// does not end a sentence. Spans without any alphanumeric character are
/// dropped.
fn sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let decimal = c == '.'
            && i > 0
            && chars[i - 1].is_ascii_digit()
            && chars.get(i + 1).is_some_and(char::is_ascii_digit);
        if matches!(c, '.' | '?' | '!') && !decimal {
            out.push(std::mem::take(&mut current));
        } else {
            current.push(c);
        }
    }
    out.push(current);
    out.retain(|s| s.chars().any(char::is_alphanumeric));
    out
}

fn strip_punctuation(sentence: &str) -> String {
    sentence
        .chars()
        .filter(|c| !matches!(c, '\'' | '\u{2019}'))
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect()
}

/// Sentences of concept tokens. Every sentence with at least one word before
/// filtering is kept, even when filtering empties it.
pub fn preprocess(text: &str, lexicon: &Lexicon) -> Vec<Vec<String>> {
    let text = text.replace(LAUGHTER_MARKER, " ");
    sentences(&text)
        .into_iter()
        .map(|s| {
            strip_punctuation(&s.to_lowercase())
                .split_whitespace()
                .filter(|w| !lexicon.is_noise(w))
                .filter(|w| !lexicon.is_deleted(w))
                .map(|w| lexicon.generalize(w))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn math() -> Lexicon {
        Lexicon::default().with_math_domain(true)
    }

    #[test]
    fn generalizes_operations_and_numbers() {
        assert_eq!(
            preprocess("He adds the numbers.", &math()),
            vec![vec!["add", "number"]]
        );
        assert_eq!(
            preprocess("She added. They were adding!", &math()),
            vec![vec!["add"], vec!["add"]]
        );
    }

    #[test]
    fn delete_listed_sentence_is_empty() {
        assert_eq!(
            preprocess("Yeah okay just...", &Lexicon::default()),
            vec![Vec::<String>::new()]
        );
    }

    #[test]
    fn two_sentences_in_math_mode() {
        assert_eq!(
            preprocess("Divide x by 3. Then subtract 5.", &math()),
            vec![
                vec!["divide", "variable", "number"],
                vec!["subtract", "number"]
            ]
        );
        // outside math mode numerals and letters are kept verbatim
        assert_eq!(
            preprocess("Divide x by 3.", &Lexicon::default()),
            vec![vec!["divide", "x", "3"]]
        );
    }

    #[test]
    fn punctuation_and_markers() {
        assert_eq!(sentences("a 3.5 b. c? d!"), vec!["a 3.5 b", " c", " d"]);
        assert_eq!(
            preprocess("Don't multiply, [laughter] simplify!", &Lexicon::default()),
            vec![vec!["multiply", "simplify"]]
        );
        assert!(preprocess("", &Lexicon::default()).is_empty());
    }
}
