use std::path::Path;

use serde::{Deserialize, Serialize};

use super::index::LocalIndex;
use super::phrase::PhraseQuery;
use super::provider::CountProvider;
use crate::error::{Error, Result};
use crate::extract::CandidatePair;

/// The five document counts behind every probability estimate.
///
/// `n_x`, `n_y`, `n_s` count documents containing `a_x`, `a_y` and `s`;
/// `n_xy` counts documents containing both `a_x` and `a_y`; `n` is the
/// sample-space size. After [`CountSnapshot::normalized`] the subset laws
/// `n_s <= n_xy <= n`, `n_s <= n_x <= n` and `n_s <= n_y <= n` hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSnapshot {
    pub n_x: u64,
    pub n_y: u64,
    pub n_s: u64,
    pub n_xy: u64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(default)]
    pub clamped: bool,
}

impl CountSnapshot {
    /// Builds a snapshot from raw counts and repairs subset-law violations.
    ///
    /// Counts smaller than `n_s` are raised to `n_s`; a sample space smaller
    /// than the largest count is raised to that count. Any repair sets
    /// `clamped`.
    pub fn normalized(n_x: u64, n_y: u64, n_s: u64, n_xy: u64, n: u64) -> Self {
        let mut snap = CountSnapshot {
            n_x,
            n_y,
            n_s,
            n_xy,
            n,
            clamped: false,
        };
        for count in [&mut snap.n_x, &mut snap.n_y, &mut snap.n_xy] {
            if *count < n_s {
                *count = n_s;
                snap.clamped = true;
            }
        }
        let largest = snap.n_x.max(snap.n_y).max(snap.n_xy);
        if snap.n < largest {
            snap.n = largest;
            snap.clamped = true;
        }
        snap
    }

    pub fn is_normalized(&self) -> bool {
        self.n_s <= self.n_xy
            && self.n_s <= self.n_x
            && self.n_s <= self.n_y
            && self.n_x.max(self.n_y).max(self.n_xy) <= self.n
    }
}

/// Queries `a_x`, `a_y`, `s` and the `a_x`/`a_y` conjunction.
pub fn snapshot_phrases(
    provider: &dyn CountProvider,
    a_x: &str,
    a_y: &str,
    s: &str,
) -> Result<CountSnapshot> {
    let qx = PhraseQuery::parse(a_x)?;
    let qy = PhraseQuery::parse(a_y)?;
    let qs = PhraseQuery::parse(s)?;
    let n = provider.sample_space()?;
    if n == 0 {
        return Err(Error::InvalidSampleSpace);
    }
    let n_x = provider.doc_count(&qx)?;
    let n_y = provider.doc_count(&qy)?;
    let n_s = provider.doc_count(&qs)?;
    let n_xy = provider.co_doc_count(&qx, &qy)?;
    Ok(CountSnapshot::normalized(n_x, n_y, n_s, n_xy, n))
}

pub fn snapshot(provider: &dyn CountProvider, pair: &CandidatePair) -> Result<CountSnapshot> {
    snapshot_phrases(provider, &pair.a_x.text(), &pair.a_y.text(), &pair.s)
}

/// Fraction of reference-corpus documents containing a function word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionWordRate {
    pub word: String,
    pub rate: f64,
}

impl FunctionWordRate {
    pub fn new(word: impl Into<String>, rate: f64) -> Self {
        FunctionWordRate {
            word: word.into(),
            rate,
        }
    }
}

/// Estimates the provider's sample-space size from function-word counts:
/// the median over words of `doc_count(word) / rate`, rounded to the
/// nearest integer. Words with a zero count are ignored.
pub fn estimate_index_size(
    provider: &dyn CountProvider,
    rates: &[FunctionWordRate],
) -> Result<u64> {
    if rates.is_empty() {
        return Err(Error::InvalidArgument("function-word list is empty".into()));
    }
    let mut ratios = Vec::with_capacity(rates.len());
    for fw in rates {
        if !(fw.rate > 0.0 && fw.rate <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "rate for {:?} must be in (0, 1], got {}",
                fw.word, fw.rate
            )));
        }
        let count = provider.doc_count(&PhraseQuery::parse(&fw.word)?)?;
        if count > 0 {
            ratios.push(count as f64 / fw.rate);
        }
    }
    if ratios.is_empty() {
        return Err(Error::Estimation(
            "no function word has a non-zero document count".into(),
        ));
    }
    ratios.sort_by(f64::total_cmp);
    let mid = ratios.len() / 2;
    let median = if ratios.len() % 2 == 1 {
        ratios[mid]
    } else {
        (ratios[mid - 1] + ratios[mid]) / 2.0
    };
    Ok(median.round() as u64)
}

/// Measures function-word document rates on a reference corpus. Words that
/// never occur are left out.
pub fn measure_function_word_rates<S: AsRef<str>>(
    index: &LocalIndex,
    words: &[S],
) -> Result<Vec<FunctionWordRate>> {
    let total = index.doc_count_total();
    if total == 0 {
        return Err(Error::InvalidSampleSpace);
    }
    let mut out = Vec::new();
    for w in words {
        let df = index.doc_count(&PhraseQuery::parse(w.as_ref())?);
        if df > 0 {
            out.push(FunctionWordRate::new(w.as_ref(), df as f64 / total as f64));
        }
    }
    Ok(out)
}

/// Reads a JSON array of `{"word", "rate"}` objects.
pub fn load_function_word_rates(path: &Path) -> Result<Vec<FunctionWordRate>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
