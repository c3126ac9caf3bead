//! Candidate-pair extraction from POS-tagged sentences.
//!
//! Noun phrases of shape `Adj* N+` are chunked left to right, and each
//! consecutive pair of phrases becomes a candidate `(a_x, b, a_y)` when the
//! phrases are adjacent or separated by one preposition or by "and".

use std::collections::HashSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ADJECTIVE_TAGS: [&str; 3] = ["JJ", "JJR", "JJS"];
pub const COMMON_NOUN_TAGS: [&str; 2] = ["NN", "NNS"];
pub const PROPER_NOUN_TAGS: [&str; 2] = ["NNP", "NNPS"];
pub const DEFAULT_PREPOSITIONS: [&str; 8] = ["of", "for", "in", "on", "to", "with", "by", "from"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedToken {
    pub offset: usize,
    pub surface: String,
    pub pos: String,
}

impl TaggedToken {
    pub fn new(offset: usize, surface: impl Into<String>, pos: impl Into<String>) -> Self {
        TaggedToken {
            offset,
            surface: surface.into(),
            pos: pos.into(),
        }
    }

    pub fn is_adjective(&self) -> bool {
        ADJECTIVE_TAGS.contains(&self.pos.as_str())
    }

    pub fn is_noun(&self) -> bool {
        self.is_common_noun() || self.is_proper_noun()
    }

    fn is_common_noun(&self) -> bool {
        COMMON_NOUN_TAGS.contains(&self.pos.as_str())
    }

    fn is_proper_noun(&self) -> bool {
        PROPER_NOUN_TAGS.contains(&self.pos.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub id: String,
    pub tokens: Vec<TaggedToken>,
}

fn finish_sentence(tokens: &mut Vec<TaggedToken>, pending_id: &mut Option<String>, out: &mut Vec<TaggedSentence>) {
    if !tokens.is_empty() {
        let id = pending_id
            .take()
            .unwrap_or_else(|| format!("s{}", out.len() + 1));
        out.push(TaggedSentence {
            id,
            tokens: std::mem::take(tokens),
        });
    }
}

/// Reads tagged input: one token per line as `offset<TAB>surface<TAB>POS`,
/// a blank line ending each sentence, `#` lines as comments.
///
/// Sentences are numbered `s1`, `s2`, ... unless preceded by a comment of
/// the form `# id = <sentence id>`. Lines without tabs are split on runs of
/// whitespace instead.
pub fn parse_tagged_input<R: BufRead>(reader: R) -> Result<Vec<TaggedSentence>> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<TaggedToken> = Vec::new();
    let mut pending_id: Option<String> = None;

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() {
            finish_sentence(&mut tokens, &mut pending_id, &mut sentences);
            continue;
        }
        if let Some(comment) = trimmed.trim_start().strip_prefix('#') {
            if let Some(id) = comment.trim().strip_prefix("id =") {
                pending_id = Some(id.trim().to_string());
            }
            continue;
        }
        let fields: Vec<&str> = if trimmed.contains('\t') {
            trimmed.split('\t').collect()
        } else {
            trimmed.split_whitespace().collect()
        };
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let offset: usize = fields[0].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("offset {:?} is not a non-negative integer", fields[0]),
        })?;
        if offset != tokens.len() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("non-contiguous offset {offset}, expected {}", tokens.len()),
            });
        }
        let surface = fields[1].trim();
        let pos = fields[2].trim();
        if surface.is_empty() || pos.is_empty() || surface.contains(char::is_whitespace) {
            return Err(Error::Parse {
                line: lineno,
                message: "empty or malformed surface/tag".into(),
            });
        }
        tokens.push(TaggedToken::new(offset, surface, pos));
    }
    finish_sentence(&mut tokens, &mut pending_id, &mut sentences);
    Ok(sentences)
}

/// A contiguous span of tokens treated as one lexical unit: a chunked noun
/// phrase, or a pair merged in an earlier round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NounPhrase {
    tokens: Vec<TaggedToken>,
}

impl NounPhrase {
    /// Panics if `tokens` is empty or offsets are not contiguous.
    pub fn new(tokens: Vec<TaggedToken>) -> Self {
        assert!(!tokens.is_empty(), "noun phrase must have tokens");
        assert!(
            tokens.windows(2).all(|w| w[1].offset == w[0].offset + 1),
            "noun phrase offsets must be contiguous"
        );
        NounPhrase { tokens }
    }

    /// The unit spanning `a_x b a_y`.
    pub fn merged(pair: &CandidatePair) -> Self {
        let mut tokens = pair.a_x.tokens.clone();
        tokens.extend(pair.b.iter().cloned());
        tokens.extend(pair.a_y.tokens.iter().cloned());
        NounPhrase::new(tokens)
    }

    pub fn tokens(&self) -> &[TaggedToken] {
        &self.tokens
    }

    pub fn start(&self) -> usize {
        self.tokens[0].offset
    }

    /// Offset of the last token (inclusive).
    pub fn end(&self) -> usize {
        self.tokens[self.tokens.len() - 1].offset
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Surface forms joined by single spaces.
    pub fn text(&self) -> String {
        join_surfaces(&self.tokens)
    }

    /// Whether the tag sequence is `Adj* N+`.
    pub fn matches_adj_noun_pattern(&self) -> bool {
        let adjs = self.tokens.iter().take_while(|t| t.is_adjective()).count();
        adjs < self.tokens.len() && self.tokens[adjs..].iter().all(TaggedToken::is_noun)
    }
}

fn join_surfaces(tokens: &[TaggedToken]) -> String {
    tokens
        .iter()
        .map(|t| t.surface.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Chunking and pairing options.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractConfig {
    /// Lowercased prepositions accepted as connector `b`.
    pub prepositions: HashSet<String>,
    /// End a noun run where it switches between proper and common nouns, so
    /// "E./NNP coli/NNP food/NN poisoning/NN" yields two phrases.
    pub split_proper_common: bool,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            prepositions: DEFAULT_PREPOSITIONS.iter().map(|s| s.to_string()).collect(),
            split_proper_common: true,
        }
    }
}

impl ExtractConfig {
    pub fn with_prepositions<S: AsRef<str>>(mut self, preps: &[S]) -> Self {
        self.prepositions = preps.iter().map(|p| p.as_ref().to_lowercase()).collect();
        self
    }

    fn is_connector(&self, tok: &TaggedToken) -> bool {
        let word = tok.surface.to_lowercase();
        match tok.pos.as_str() {
            // Penn tags "to" as TO rather than IN
            "IN" | "TO" => self.prepositions.contains(&word),
            "CC" => word == "and",
            _ => false,
        }
    }
}

/// Left-to-right maximal, non-overlapping `Adj* N+` chunks.
pub fn extract_noun_phrases(sentence: &TaggedSentence, config: &ExtractConfig) -> Vec<NounPhrase> {
    let toks = &sentence.tokens;
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let mut j = i;
        while j < toks.len() && toks[j].is_adjective() {
            j += 1;
        }
        let noun_start = j;
        while j < toks.len() && toks[j].is_noun() {
            if config.split_proper_common
                && j > noun_start
                && toks[j].is_proper_noun() != toks[j - 1].is_proper_noun()
            {
                break;
            }
            j += 1;
        }
        if j > noun_start {
            out.push(NounPhrase::new(toks[i..j].to_vec()));
            i = j;
        } else {
            // adjectives not followed by a noun: nothing starts inside this run
            i = noun_start.max(i + 1);
        }
    }
    out
}

/// A candidate `(a_x, b, a_y)` with rendered surface form `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePair {
    pub sentence_id: String,
    pub a_x: NounPhrase,
    pub b: Option<TaggedToken>,
    pub a_y: NounPhrase,
    pub s: String,
}

impl CandidatePair {
    pub fn new(
        sentence_id: impl Into<String>,
        a_x: NounPhrase,
        b: Option<TaggedToken>,
        a_y: NounPhrase,
    ) -> Self {
        let mut s = a_x.text();
        if let Some(b) = &b {
            s.push(' ');
            s.push_str(&b.surface);
        }
        s.push(' ');
        s.push_str(&a_y.text());
        CandidatePair {
            sentence_id: sentence_id.into(),
            a_x,
            b,
            a_y,
            s,
        }
    }

    pub fn connector(&self) -> &str {
        self.b.as_ref().map_or("", |t| t.surface.as_str())
    }

    pub fn to_record(&self) -> PairRecord {
        PairRecord {
            sid: self.sentence_id.clone(),
            ax: self.a_x.text(),
            b: self.connector().to_string(),
            ay: self.a_y.text(),
            s: self.s.clone(),
            x: self.a_x.end(),
            y: self.a_y.start(),
        }
    }
}

/// Pairs consecutive units that are adjacent or joined by one connector.
/// `units` must be sorted by start offset and come from `sentence`.
pub fn generate_pairs(
    sentence: &TaggedSentence,
    units: &[NounPhrase],
    config: &ExtractConfig,
) -> Vec<CandidatePair> {
    units
        .windows(2)
        .filter_map(|w| {
            let (ax, ay) = (&w[0], &w[1]);
            let gap = ay.start().checked_sub(ax.end() + 1)?;
            let b = match gap {
                0 => None,
                1 => {
                    let tok = &sentence.tokens[ax.end() + 1];
                    if !config.is_connector(tok) {
                        return None;
                    }
                    Some(tok.clone())
                }
                _ => return None,
            };
            Some(CandidatePair::new(sentence.id.clone(), ax.clone(), b, ay.clone()))
        })
        .collect()
}

/// Replaces accepted pairs by their merged unit. Pairs are applied left to
/// right; a pair whose units were already consumed by an earlier merge is
/// skipped.
pub fn merge_units(units: &[NounPhrase], accepted: &[&CandidatePair]) -> Vec<NounPhrase> {
    let mut accepted: Vec<&CandidatePair> = accepted.to_vec();
    accepted.sort_by_key(|p| (p.a_x.start(), p.a_y.start()));

    let mut out: Vec<NounPhrase> = Vec::with_capacity(units.len());
    let mut i = 0;
    let mut next_pair = accepted.iter().peekable();
    while i < units.len() {
        while next_pair
            .peek()
            .is_some_and(|p| p.a_x.start() < units[i].start())
        {
            next_pair.next();
        }
        let merge = next_pair.peek().is_some_and(|p| {
            p.a_x == units[i] && units.get(i + 1).is_some_and(|u| *u == p.a_y)
        });
        if merge {
            out.push(NounPhrase::merged(next_pair.next().unwrap()));
            i += 2;
        } else {
            out.push(units[i].clone());
            i += 1;
        }
    }
    out
}

/// One line of pair output.
///
/// `x` is the offset of the last token of `a_x` and `y` the offset of the
/// first token of `a_y`, so `y = x + 1` for adjacent units and `y = x + 2`
/// when a connector sits between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub sid: String,
    pub ax: String,
    #[serde(default)]
    pub b: String,
    pub ay: String,
    pub s: String,
    pub x: usize,
    pub y: usize,
}

impl PairRecord {
    /// Canonical `(a_x, b, a_y)` key used to join with gold labels.
    pub fn key(&self) -> String {
        crate::eval::pair_key(&self.ax, &self.b, &self.ay)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(spec: &str) -> TaggedSentence {
        TaggedSentence {
            id: "t".into(),
            tokens: spec
                .split_whitespace()
                .enumerate()
                .map(|(i, wt)| {
                    let (w, t) = wt.rsplit_once('/').unwrap();
                    TaggedToken::new(i, w, t)
                })
                .collect(),
        }
    }

    fn texts(nps: &[NounPhrase]) -> Vec<String> {
        nps.iter().map(NounPhrase::text).collect()
    }

    #[test]
    fn parse_empty_input() {
        assert!(parse_tagged_input("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn parse_one_sentence() {
        let out = parse_tagged_input("0\tfood\tNN\n1\tpoisoning\tNN\n\n".as_bytes()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].id, "s1");
        assert_eq!(out[0].tokens.len(), 2);
        assert_eq!(out[0].tokens[1], TaggedToken::new(1, "poisoning", "NN"));
    }

    #[test]
    fn parse_comments_ids_and_space_separated_lines() {
        let input = "# a comment\n# id = doc7-3\n0 food NN\n1 poisoning NN\n\n\n0\tcases\tNNS";
        let out = parse_tagged_input(input.as_bytes()).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].id, "doc7-3");
        assert_eq!(out[1].id, "s2");
    }

    #[test]
    fn parse_rejects_wrong_field_count() {
        let err = parse_tagged_input("0\tfood\tNN\n1\tpoisoning\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn parse_rejects_gaps_in_offsets() {
        let err = parse_tagged_input("0\tfood\tNN\n2\tpoisoning\tNN\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_tagged_input("1\tfood\tNN\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn no_nouns_no_phrases() {
        let s = sentence("the/DT is/VBZ");
        assert!(extract_noun_phrases(&s, &ExtractConfig::default()).is_empty());
    }

    #[test]
    fn adjective_noun_chunk() {
        let s = sentence("the/DT infectious/JJ diseases/NNS spread/VBD");
        let nps = extract_noun_phrases(&s, &ExtractConfig::default());
        assert_eq!(texts(&nps), ["infectious diseases"]);
        assert_eq!((nps[0].start(), nps[0].end()), (1, 2));
    }

    #[test]
    fn preposition_splits_phrases() {
        let s = sentence("National/NNP Institute/NNP of/IN Allergy/NNP");
        for cfg in [ExtractConfig::default(), ExtractConfig { split_proper_common: false, ..Default::default() }] {
            assert_eq!(texts(&extract_noun_phrases(&s, &cfg)), ["National Institute", "Allergy"]);
        }
    }

    #[test]
    fn trailing_adjectives_without_noun_are_dropped() {
        let s = sentence("new/JJ cases/NNS are/VBP rare/JJ and/CC severe/JJ");
        assert_eq!(texts(&extract_noun_phrases(&s, &ExtractConfig::default())), ["new cases"]);
    }

    #[test]
    fn proper_common_boundary() {
        let s = sentence("E./NNP coli/NNP food/NN poisoning/NN");
        let split = extract_noun_phrases(&s, &ExtractConfig::default());
        assert_eq!(texts(&split), ["E. coli", "food poisoning"]);
        let maximal = extract_noun_phrases(&s, &ExtractConfig { split_proper_common: false, ..Default::default() });
        assert_eq!(texts(&maximal), ["E. coli food poisoning"]);
    }

    #[test]
    fn adjacent_units_pair_without_connector() {
        let s = sentence("E./NNP coli/NNP food/NN poisoning/NN");
        let cfg = ExtractConfig::default();
        let pairs = generate_pairs(&s, &extract_noun_phrases(&s, &cfg), &cfg);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].connector(), "");
        assert_eq!(pairs[0].s, "E. coli food poisoning");
        let rec = pairs[0].to_record();
        assert_eq!((rec.x, rec.y), (1, 2));
    }

    #[test]
    fn verb_gap_yields_no_pair() {
        let s = sentence("the/DT patient/NN eats/VBZ cheese/NN");
        let cfg = ExtractConfig::default();
        assert!(generate_pairs(&s, &extract_noun_phrases(&s, &cfg), &cfg).is_empty());
    }

    #[test]
    fn connector_rules() {
        let cfg = ExtractConfig::default();
        for (text, expect) in [
            ("flu/NN of/IN children/NNS", Some("of")),
            ("flu/NN to/TO children/NNS", Some("to")),
            ("flu/NN and/CC colds/NNS", Some("and")),
            ("flu/NN or/CC colds/NNS", None),
            ("flu/NN because/IN colds/NNS", None),
        ] {
            let s = sentence(text);
            let pairs = generate_pairs(&s, &extract_noun_phrases(&s, &cfg), &cfg);
            assert_eq!(pairs.first().map(|p| p.connector()), expect, "{text}");
        }
        let custom = ExtractConfig::default().with_prepositions(&["Because"]);
        let s = sentence("flu/NN because/IN colds/NNS");
        assert_eq!(generate_pairs(&s, &extract_noun_phrases(&s, &custom), &custom).len(), 1);
    }

    #[test]
    fn merged_unit_pairs_in_next_round() {
        let s = sentence("National/NNP Institute/NNP of/IN Allergy/NNP and/CC Infectious/NNP Diseases/NNPS");
        let cfg = ExtractConfig::default();
        let nps = extract_noun_phrases(&s, &cfg);
        assert_eq!(texts(&nps), ["National Institute", "Allergy", "Infectious Diseases"]);
        let round1 = generate_pairs(&s, &nps, &cfg);
        assert_eq!(round1.len(), 2);
        assert_eq!(round1[1].s, "Allergy and Infectious Diseases");

        let units = merge_units(&nps, &[&round1[1]]);
        assert_eq!(texts(&units), ["National Institute", "Allergy and Infectious Diseases"]);
        let round2 = generate_pairs(&s, &units, &cfg);
        assert_eq!(round2.len(), 1);
        assert_eq!(round2[0].connector(), "of");
        assert_eq!(round2[0].s, "National Institute of Allergy and Infectious Diseases");
    }

    #[test]
    fn overlapping_merges_take_leftmost() {
        let s = sentence("a/NN of/IN b/NN of/IN c/NN");
        let cfg = ExtractConfig::default();
        let nps = extract_noun_phrases(&s, &cfg);
        let pairs = generate_pairs(&s, &nps, &cfg);
        let units = merge_units(&nps, &[&pairs[1], &pairs[0]]);
        assert_eq!(texts(&units), ["a of b", "c"]);
    }
}
