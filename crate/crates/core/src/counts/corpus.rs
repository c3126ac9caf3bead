//! Corpus ingestion: a directory of plain-text files or a JSON-lines file.

use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use super::index::LocalIndex;
use super::phrase::tokenize;
use crate::error::{Error, Result};

/// A raw document before tokenization.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

/// Reads a corpus from `path`.
///
/// A directory yields one document per regular file, with the file name as
/// id, sorted by name. A file is read as JSON lines of `{"id", "text"}`;
/// blank lines are skipped.
pub fn load_corpus(path: &Path) -> Result<Vec<Document>> {
    if path.is_dir() {
        load_dir(path)
    } else {
        load_jsonl(path)
    }
}

fn load_dir(dir: &Path) -> Result<Vec<Document>> {
    let mut entries = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_file() {
            entries.push(path);
        }
    }
    entries.sort();
    entries
        .into_iter()
        .map(|path| {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let id = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(Document { id, text })
        })
        .collect()
}

fn load_jsonl(path: &Path) -> Result<Vec<Document>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        docs.push(doc);
    }
    Ok(docs)
}

/// Tokenizes and indexes a list of documents.
pub fn index_documents(docs: &[Document]) -> Result<LocalIndex> {
    LocalIndex::build(docs.iter().map(|d| (d.id.clone(), tokenize(&d.text))))
}
