//! Word lists and the generalization thesaurus.
//!
//! Lists are plain text, one entry per line; `#` starts a comment. The
//! thesaurus has one `pattern label` pair per line, where a pattern ending in
//! `*` matches by prefix. Default lists ship with the crate and can be
//! replaced file by file with [`Lexicon::from_dir`].

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

const DEFAULT_PRONOUNS: &str = include_str!("../../lexicon/pronouns.txt");
const DEFAULT_PREPOSITIONS: &str = include_str!("../../lexicon/prepositions.txt");
const DEFAULT_NOISE_VERBS: &str = include_str!("../../lexicon/noise_verbs.txt");
const DEFAULT_DELETE_LIST: &str = include_str!("../../lexicon/delete_list.txt");
const DEFAULT_THESAURUS: &str = include_str!("../../lexicon/thesaurus.txt");

pub const NUMBER_CONCEPT: &str = "number";
pub const VARIABLE_CONCEPT: &str = "variable";

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("thesaurus line {line}: expected `pattern label`, got `{text}`")]
    ThesaurusLine { line: usize, text: String },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

fn entries(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
}

pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    entries(text).map(str::to_lowercase).collect()
}

/// Maps surface forms to canonical concept labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Thesaurus {
    exact: BTreeMap<String, String>,
    /// `(prefix, label)`, longest prefix first.
    prefixes: Vec<(String, String)>,
}

impl Thesaurus {
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut t = Thesaurus::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [pattern, label] = parts[..] else {
                return Err(LexiconError::ThesaurusLine {
                    line: idx + 1,
                    text: raw.to_string(),
                });
            };
            let (pattern, label) = (pattern.to_lowercase(), label.to_lowercase());
            match pattern.strip_suffix('*') {
                Some(prefix) if !prefix.is_empty() => t.prefixes.push((prefix.to_string(), label)),
                _ => {
                    t.exact.insert(pattern, label);
                }
            }
        }
        t.prefixes
            .sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        Ok(t)
    }

    pub fn lookup(&self, word: &str) -> Option<&str> {
        if let Some(label) = self.exact.get(word) {
            return Some(label);
        }
        self.prefixes
            .iter()
            .find(|(p, _)| word.starts_with(p.as_str()))
            .map(|(_, l)| l.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    pub pronouns: BTreeSet<String>,
    pub prepositions: BTreeSet<String>,
    pub noise_verbs: BTreeSet<String>,
    pub delete_list: BTreeSet<String>,
    pub thesaurus: Thesaurus,
    /// Generalize numerals to `number` and single letters to `variable`.
    pub math_domain: bool,
}

impl Default for Lexicon {
    fn default() -> Self {
        Self {
            pronouns: parse_word_list(DEFAULT_PRONOUNS),
            prepositions: parse_word_list(DEFAULT_PREPOSITIONS),
            noise_verbs: parse_word_list(DEFAULT_NOISE_VERBS),
            delete_list: parse_word_list(DEFAULT_DELETE_LIST),
            thesaurus: Thesaurus::parse(DEFAULT_THESAURUS).expect("bundled thesaurus parses"),
            math_domain: false,
        }
    }
}

impl Lexicon {
    pub fn with_math_domain(mut self, on: bool) -> Self {
        self.math_domain = on;
        self
    }

    /// Loads `pronouns.txt`, `prepositions.txt`, `noise_verbs.txt`,
    /// `delete_list.txt` and `thesaurus.txt` from `dir`; absent files keep
    /// the bundled defaults.
    pub fn from_dir(dir: &Path) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::default();
        let read = |name: &str| -> Result<Option<String>, LexiconError> {
            let path = dir.join(name);
            match fs::read_to_string(&path) {
                Ok(t) => Ok(Some(t)),
                Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
                Err(source) => Err(LexiconError::Io {
                    path: path.display().to_string(),
                    source,
                }),
            }
        };
        if let Some(t) = read("pronouns.txt")? {
            lex.pronouns = parse_word_list(&t);
        }
        if let Some(t) = read("prepositions.txt")? {
            lex.prepositions = parse_word_list(&t);
        }
        if let Some(t) = read("noise_verbs.txt")? {
            lex.noise_verbs = parse_word_list(&t);
        }
        if let Some(t) = read("delete_list.txt")? {
            lex.delete_list = parse_word_list(&t);
        }
        if let Some(t) = read("thesaurus.txt")? {
            lex.thesaurus = Thesaurus::parse(&t)?;
        }
        Ok(lex)
    }

    pub fn is_noise(&self, word: &str) -> bool {
        self.pronouns.contains(word)
            || self.prepositions.contains(word)
            || self.noise_verbs.contains(word)
    }

    pub fn is_deleted(&self, word: &str) -> bool {
        self.delete_list.contains(word)
    }

    /// Concept label for a filtered word.
    pub fn generalize(&self, word: &str) -> String {
        if let Some(label) = self.thesaurus.lookup(word) {
            return label.to_string();
        }
        if self.math_domain {
            if word.chars().all(|c| c.is_ascii_digit()) {
                return NUMBER_CONCEPT.to_string();
            }
            let mut chars = word.chars();
            if let (Some(c), None) = (chars.next(), chars.next()) {
                if c.is_alphabetic() {
                    return VARIABLE_CONCEPT.to_string();
                }
            }
        }
        word.to_string()
    }
}
