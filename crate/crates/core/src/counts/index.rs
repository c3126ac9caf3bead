//! In-memory positional index over a local corpus.
//!
//! Every document is a token sequence; a phrase matches wherever its tokens
//! appear contiguously. Document frequency counts documents with at least
//! one match, occurrence frequency counts match start offsets (overlapping
//! matches included).

use std::collections::{BTreeMap, HashSet};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::phrase::PhraseQuery;
use crate::error::{Error, Result};

/// File name used when an index is persisted into a directory.
pub const INDEX_FILE: &str = "index.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Posting {
    doc: u32,
    positions: Vec<u32>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LocalIndex {
    doc_ids: Vec<String>,
    // token -> postings sorted by doc ordinal
    postings: BTreeMap<String, Vec<Posting>>,
    #[serde(skip)]
    seen: HashSet<String>,
}

impl LocalIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an index from `(doc_id, tokens)` pairs. Tokens are lowercased;
    /// they are otherwise taken as already tokenized.
    pub fn build<I, S>(documents: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<S>)>,
        S: AsRef<str>,
    {
        let mut index = LocalIndex::new();
        for (id, tokens) in documents {
            index.add_document(id, &tokens)?;
        }
        Ok(index)
    }

    pub fn add_document<S: AsRef<str>>(&mut self, doc_id: String, tokens: &[S]) -> Result<()> {
        if !self.seen.insert(doc_id.clone()) {
            return Err(Error::DuplicateDocId(doc_id));
        }
        let ordinal = self.doc_ids.len() as u32;
        self.doc_ids.push(doc_id);

        let mut local: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        for (pos, tok) in tokens.iter().enumerate() {
            local
                .entry(tok.as_ref().to_lowercase())
                .or_default()
                .push(pos as u32);
        }
        for (term, positions) in local {
            self.postings.entry(term).or_default().push(Posting {
                doc: ordinal,
                positions,
            });
        }
        Ok(())
    }

    /// Number of documents, which is the sample-space size for local counts.
    pub fn doc_count_total(&self) -> u64 {
        self.doc_ids.len() as u64
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    /// Per-document match counts for a phrase, in doc order. Documents
    /// without a match are omitted.
    fn matches(&self, phrase: &PhraseQuery) -> Vec<(u32, u64)> {
        let lists: Option<Vec<&Vec<Posting>>> =
            phrase.terms().iter().map(|t| self.postings.get(t)).collect();
        let Some(lists) = lists else {
            return Vec::new();
        };
        let (head, rest) = lists.split_first().expect("phrase is non-empty");

        let mut out = Vec::new();
        'docs: for first in head.iter() {
            let mut others = Vec::with_capacity(rest.len());
            for list in rest {
                match list.binary_search_by_key(&first.doc, |p| p.doc) {
                    Ok(i) => others.push(&list[i].positions),
                    Err(_) => continue 'docs,
                }
            }
            let hits = first
                .positions
                .iter()
                .filter(|&&start| {
                    others
                        .iter()
                        .enumerate()
                        .all(|(i, pos)| pos.binary_search(&(start + i as u32 + 1)).is_ok())
                })
                .count() as u64;
            if hits > 0 {
                out.push((first.doc, hits));
            }
        }
        out
    }

    /// Ids of the documents containing the phrase.
    pub fn postings(&self, phrase: &PhraseQuery) -> Vec<&str> {
        self.matches(phrase)
            .into_iter()
            .map(|(doc, _)| self.doc_ids[doc as usize].as_str())
            .collect()
    }

    pub fn doc_count(&self, phrase: &PhraseQuery) -> u64 {
        self.matches(phrase).len() as u64
    }

    /// Documents containing both phrases, anywhere and in any order.
    pub fn co_doc_count(&self, a: &PhraseQuery, b: &PhraseQuery) -> u64 {
        let left = self.matches(a);
        let right = self.matches(b);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < left.len() && j < right.len() {
            match left[i].0.cmp(&right[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    /// Total occurrences across the corpus, counting every start offset.
    pub fn occurrence_count(&self, phrase: &PhraseQuery) -> u64 {
        self.matches(phrase).iter().map(|&(_, n)| n).sum()
    }

    /// Writes `index.json` into `dir`, creating the directory if needed.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(INDEX_FILE);
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer(&mut w, self)?;
        w.flush().map_err(|e| Error::io(&path, e))
    }

    /// Loads an index saved by [`LocalIndex::save`]. Accepts either the
    /// directory or the `index.json` path itself.
    pub fn load(path: &Path) -> Result<Self> {
        let path = if path.is_dir() {
            path.join(INDEX_FILE)
        } else {
            path.to_path_buf()
        };
        let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut index: LocalIndex = serde_json::from_reader(BufReader::new(file))?;
        index.seen = index.doc_ids.iter().cloned().collect();
        if index.seen.len() != index.doc_ids.len() {
            return Err(Error::InvalidArgument(format!(
                "{}: index contains duplicate document ids",
                path.display()
            )));
        }
        Ok(index)
    }
}
