use std::fmt;

use crate::error::{Error, Result};

/// Splits text into canonical tokens: whitespace-separated, lowercased, with
/// leading and trailing punctuation stripped. Inner punctuation survives, so
/// `"E. coli-like"` yields `["e", "coli-like"]`.
///
/// The same function canonicalizes both corpus text and query phrases.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let trimmed = raw.trim_matches(|c: char| !c.is_alphanumeric());
            (!trimmed.is_empty()).then(|| trimmed.to_lowercase())
        })
        .collect()
}

/// An exact-phrase query: an ordered, non-empty sequence of canonical tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhraseQuery {
    terms: Vec<String>,
}

impl PhraseQuery {
    /// Builds a query from surface text.
    pub fn parse(text: &str) -> Result<Self> {
        let terms = tokenize(text);
        if terms.is_empty() {
            return Err(Error::InvalidPhrase(format!("{text:?} has no tokens")));
        }
        Ok(PhraseQuery { terms })
    }

    /// Builds a query from pre-split tokens. Each token is canonicalized; a
    /// token that splits into several pieces or none is rejected.
    pub fn from_terms<S: AsRef<str>>(terms: &[S]) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidPhrase("empty term list".into()));
        }
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            let mut pieces = tokenize(t.as_ref());
            if pieces.len() != 1 {
                return Err(Error::InvalidPhrase(format!(
                    "term {:?} is not a single token",
                    t.as_ref()
                )));
            }
            out.push(pieces.pop().unwrap());
        }
        Ok(PhraseQuery { terms: out })
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Search-engine syntax with phrase and required operators: `+"a b"`.
    pub fn search_syntax(&self) -> String {
        format!("+\"{}\"", self.terms.join(" "))
    }
}

impl fmt::Display for PhraseQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.terms.join(" "))
    }
}

/// Canonical key of a conjunctive two-phrase query, `+"a" +"b"`.
pub fn conjunctive_syntax(a: &PhraseQuery, b: &PhraseQuery) -> String {
    format!("{} {}", a.search_syntax(), b.search_syntax())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_strips_edge_punctuation_and_lowercases() {
        assert_eq!(tokenize("E. coli food-poisoning, (Report)."), ["e", "coli", "food-poisoning", "report"]);
        assert!(tokenize(" -- ... ").is_empty());
    }

    #[test]
    fn parse_rejects_empty() {
        assert!(PhraseQuery::parse("   ").is_err());
        assert!(PhraseQuery::parse("!!").is_err());
    }

    #[test]
    fn from_terms_rejects_embedded_whitespace() {
        assert!(PhraseQuery::from_terms(&["food poisoning"]).is_err());
        assert!(PhraseQuery::from_terms::<&str>(&[]).is_err());
        let q = PhraseQuery::from_terms(&["Food", "Poisoning"]).unwrap();
        assert_eq!(q.terms(), ["food", "poisoning"]);
    }

    #[test]
    fn search_syntax_uses_phrase_and_required_operators() {
        let a = PhraseQuery::parse("E coli").unwrap();
        let b = PhraseQuery::parse("Food Poisoning").unwrap();
        assert_eq!(a.search_syntax(), "+\"e coli\"");
        assert_eq!(conjunctive_syntax(&a, &b), "+\"e coli\" +\"food poisoning\"");
    }
}
