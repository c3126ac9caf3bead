//! Append-only count cache, one JSON object per line: `{"q", "c", "t"}`.
//!
//! Loading replays the file and the last entry for a key wins. Appends go
//! through a single mutex-guarded writer and are flushed per entry.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    #[serde(rename = "q")]
    pub query_key: String,
    #[serde(rename = "c")]
    pub count: u64,
    #[serde(rename = "t")]
    pub retrieved_at: String,
}

impl CacheEntry {
    pub fn new(query_key: String, count: u64, retrieved_at: DateTime<Utc>) -> Self {
        CacheEntry {
            query_key,
            count,
            retrieved_at: retrieved_at.to_rfc3339_opts(SecondsFormat::Secs, true),
        }
    }
}

#[derive(Debug)]
pub struct CountCache {
    path: Option<PathBuf>,
    entries: RwLock<HashMap<String, u64>>,
    writer: Mutex<Option<BufWriter<File>>>,
}

impl CountCache {
    /// A cache that lives only in memory.
    pub fn in_memory() -> Self {
        CountCache {
            path: None,
            entries: RwLock::new(HashMap::new()),
            writer: Mutex::new(None),
        }
    }

    /// Opens (or creates) the cache file at `path` and replays its entries.
    pub fn open(path: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        if path.exists() {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: CacheEntry = serde_json::from_str(&line).map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("{}: {e}", path.display()),
                })?;
                entries.insert(entry.query_key, entry.count);
            }
        } else if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        Ok(CountCache {
            path: Some(path.to_path_buf()),
            entries: RwLock::new(entries),
            writer: Mutex::new(None),
        })
    }

    pub fn get(&self, key: &str) -> Option<u64> {
        self.entries.read().unwrap().get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Records a count, appending it to the backing file if there is one.
    pub fn insert(&self, key: &str, count: u64) -> Result<()> {
        let mut writer = self.writer.lock().unwrap();
        if let Some(path) = &self.path {
            if writer.is_none() {
                let file = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|e| Error::io(path, e))?;
                *writer = Some(BufWriter::new(file));
            }
            let w = writer.as_mut().unwrap();
            let entry = CacheEntry::new(key.to_string(), count, Utc::now());
            serde_json::to_writer(&mut *w, &entry)?;
            w.write_all(b"\n")
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(path, e))?;
        }
        self.entries.write().unwrap().insert(key.to_string(), count);
        Ok(())
    }
}
