//! Term lists used by the table rules and the goal/recommendation scorer.
//!
//! Phrase lexicons are plain text, one term per line (`#` starts a comment).
//! The topic lexicon is a JSON map of category to terms, and the asset
//! taxonomy a JSON list of `{name, synonyms}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::LexiconError;
use crate::text::tokenize;

/// A set of (possibly multi-word) terms matched on token boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseLexicon {
    terms: Vec<Vec<String>>,
}

impl PhraseLexicon {
    pub fn new<S: AsRef<str>>(terms: &[S]) -> Self {
        let mut terms: Vec<Vec<String>> =
            terms.iter().map(|t| tokenize(t.as_ref()).tokens).filter(|t| !t.is_empty()).collect();
        terms.sort();
        terms.dedup();
        PhraseLexicon { terms }
    }

    pub fn parse(text: &str) -> Self {
        let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
        Self::new(&lines)
    }

    /// Number of (position, term) pairs where the term matches the token
    /// sequence starting at that position.
    pub fn hits(&self, tokens: &[String]) -> usize {
        (0..tokens.len()).map(|i| self.terms.iter().filter(|t| tokens[i..].starts_with(t)).count()).sum()
    }

    pub fn hits_in(&self, text: &str) -> usize {
        self.hits(&tokenize(text).tokens)
    }

    pub fn matches(&self, text: &str) -> bool {
        self.hits_in(text) > 0
    }

    /// Terms that occur in `text`, as space-joined strings.
    pub fn found_in(&self, text: &str) -> Vec<String> {
        let tokens = tokenize(text).tokens;
        self.terms
            .iter()
            .filter(|t| (0..tokens.len()).any(|i| tokens[i..].starts_with(t)))
            .map(|t| t.join(" "))
            .collect()
    }
}

pub fn default_asset_lexicon() -> PhraseLexicon {
    PhraseLexicon::parse(include_str!("../lexicons/asset.txt"))
}

pub fn default_cashflow_lexicon() -> PhraseLexicon {
    PhraseLexicon::parse(include_str!("../lexicons/cashflow.txt"))
}

pub fn default_projection_lexicon() -> PhraseLexicon {
    PhraseLexicon::parse(include_str!("../lexicons/projection.txt"))
}

pub fn default_net_lexicon() -> PhraseLexicon {
    PhraseLexicon::parse(include_str!("../lexicons/net.txt"))
}

/// Financial topic categories, each with its trigger terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicLexicon {
    categories: Vec<(String, PhraseLexicon)>,
}

impl TopicLexicon {
    pub fn from_map(map: &BTreeMap<String, Vec<String>>) -> Self {
        TopicLexicon { categories: map.iter().map(|(k, v)| (k.clone(), PhraseLexicon::new(v))).collect() }
    }

    pub fn from_json(raw: &str) -> Result<Self, LexiconError> {
        let map: BTreeMap<String, Vec<String>> = serde_json::from_str(raw)?;
        Ok(Self::from_map(&map))
    }

    /// Category names whose terms occur in the token list.
    pub fn topics(&self, tokens: &[String]) -> Vec<&str> {
        self.categories.iter().filter(|(_, lex)| lex.hits(tokens) > 0).map(|(k, _)| k.as_str()).collect()
    }
}

impl Default for TopicLexicon {
    fn default() -> Self {
        Self::from_json(include_str!("../lexicons/topics.json")).expect("shipped topic lexicon parses")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetClass {
    pub name: String,
    pub synonyms: Vec<String>,
}

/// Ordered asset classes. Earlier classes win ties when a row label matches
/// synonyms of equal length from two classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AssetTaxonomy {
    pub classes: Vec<AssetClass>,
}

impl AssetTaxonomy {
    pub fn new(classes: Vec<AssetClass>) -> Result<Self, LexiconError> {
        if classes.len() < 2 {
            return Err(LexiconError::Invalid("at least two asset classes are required".into()));
        }
        for (i, c) in classes.iter().enumerate() {
            if classes[..i].iter().any(|o| o.name == c.name) {
                return Err(LexiconError::Invalid(format!("duplicate asset class {:?}", c.name)));
            }
        }
        Ok(AssetTaxonomy { classes })
    }

    pub fn from_json(raw: &str) -> Result<Self, LexiconError> {
        let classes: Vec<AssetClass> = serde_json::from_str(raw)?;
        Self::new(classes)
    }

    /// Class index for a row label: the class owning the longest synonym
    /// (or class name) that occurs in the label as a token phrase.
    pub fn classify_label(&self, label: &str) -> Option<usize> {
        let tokens = tokenize(label).tokens;
        let mut best: Option<(usize, usize)> = None;
        for (ci, class) in self.classes.iter().enumerate() {
            for term in std::iter::once(&class.name).chain(&class.synonyms) {
                let term_tokens = tokenize(term).tokens;
                if term_tokens.is_empty() {
                    continue;
                }
                let found = tokens.windows(term_tokens.len()).any(|w| w == term_tokens.as_slice());
                if found && best.is_none_or(|(_, len)| term_tokens.len() > len) {
                    best = Some((ci, term_tokens.len()));
                }
            }
        }
        best.map(|(ci, _)| ci)
    }
}

impl Default for AssetTaxonomy {
    fn default() -> Self {
        Self::from_json(include_str!("../lexicons/taxonomy.json")).expect("shipped taxonomy parses")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asset_class_header_hits() {
        let lex = default_asset_lexicon();
        assert!(lex.hits_in("Asset class") >= 1);
        assert_eq!(lex.hits_in("Notes"), 0);
    }

    #[test]
    fn multiword_terms_match_on_token_boundaries() {
        let lex = PhraseLexicon::new(&["net cash flow", "net"]);
        assert_eq!(lex.hits_in("Net cash flow"), 2);
        assert_eq!(lex.hits_in("Internet"), 0);
        assert_eq!(lex.found_in("the net result"), vec!["net".to_string()]);
    }

    #[test]
    fn taxonomy_prefers_longest_synonym() {
        let tax = AssetTaxonomy::default();
        let idx = |name: &str| tax.classes.iter().position(|c| c.name == name).unwrap();
        assert_eq!(tax.classify_label("Cash"), Some(idx("cash")));
        assert_eq!(tax.classify_label("Term Deposit"), Some(idx("cash")));
        assert_eq!(tax.classify_label("Listed property"), Some(idx("property")));
        assert_eq!(tax.classify_label("Australian Equities"), Some(idx("australian equities")));
        assert_eq!(tax.classify_label("Total"), None);
    }

    #[test]
    fn taxonomy_validation() {
        let one = vec![AssetClass { name: "cash".into(), synonyms: vec![] }];
        assert!(AssetTaxonomy::new(one.clone()).is_err());
        let dup = vec![one[0].clone(), one[0].clone()];
        assert!(AssetTaxonomy::new(dup).is_err());
    }

    #[test]
    fn topics_detected() {
        let topics = TopicLexicon::default();
        let toks = tokenize("I want to retire at 60 and leave an inheritance").tokens;
        assert_eq!(topics.topics(&toks), vec!["estate", "retirement"]);
    }
}
