//! Unithood measures: mutual information, lexical independence, the UH
//! decision function, C-value, and the odds of unithood (OU).
//!
//! All functions are pure. Counts are used raw, without smoothing.

use serde::{Deserialize, Serialize};

use crate::counts::{CountProvider, CountSnapshot, PhraseQuery};
use crate::error::{Error, Result};
use crate::score::Score;

/// Which count estimates the joint probability `p(a_x, a_y)` in MI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum JointSource {
    /// Documents containing both units anywhere (`n_xy`).
    #[default]
    #[serde(rename = "n_xy")]
    CoOccurrence,
    /// Documents containing the conjoined string `s` (`n_s`).
    #[serde(rename = "n_s")]
    Phrase,
}

/// The five UH thresholds. Defaults are the published values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UhThresholds {
    pub mi_plus: f64,
    pub mi_minus: f64,
    pub id_t: f64,
    pub idr_plus: f64,
    pub idr_minus: f64,
}

impl Default for UhThresholds {
    fn default() -> Self {
        UhThresholds {
            mi_plus: 0.9,
            mi_minus: 0.02,
            id_t: 6.0,
            idr_plus: 1.35,
            idr_minus: 0.93,
        }
    }
}

impl UhThresholds {
    pub fn validate(&self) -> Result<()> {
        if self.mi_plus < self.mi_minus || self.idr_plus < self.idr_minus {
            return Err(Error::InvalidArgument(format!(
                "UH thresholds require MI+ >= MI- and IDR+ >= IDR-, got {self:?}"
            )));
        }
        Ok(())
    }
}

pub const DEFAULT_LOG_BASE: f64 = 10.0;
pub const DEFAULT_OU_THRESHOLD: f64 = -8.39;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OuConfig {
    pub log_base: f64,
    pub ou_threshold: f64,
    pub mi_joint_source: JointSource,
}

impl Default for OuConfig {
    fn default() -> Self {
        OuConfig {
            log_base: DEFAULT_LOG_BASE,
            ou_threshold: DEFAULT_OU_THRESHOLD,
            mi_joint_source: JointSource::CoOccurrence,
        }
    }
}

impl OuConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.log_base > 1.0 && self.log_base.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "log base must be > 1, got {}",
                self.log_base
            )));
        }
        if self.ou_threshold.is_nan() {
            return Err(Error::InvalidArgument("OU threshold is NaN".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub merge: bool,
    pub score: Score,
    pub measure: &'static str,
}

/// `log2(p(a,b) / (p(a) p(b)))` with probabilities `count / N`.
///
/// Returns `-inf` when the joint count is zero. A zero marginal makes the
/// ratio undefined and is an error.
pub fn mutual_information(snap: &CountSnapshot, joint: JointSource) -> Result<Score> {
    if snap.n_x == 0 || snap.n_y == 0 {
        return Err(Error::UndefinedMarginal {
            n_x: snap.n_x,
            n_y: snap.n_y,
        });
    }
    if snap.n == 0 {
        return Err(Error::InvalidSampleSpace);
    }
    let n_joint = match joint {
        JointSource::CoOccurrence => snap.n_xy,
        JointSource::Phrase => snap.n_s,
    };
    if n_joint == 0 {
        return Ok(Score::NegInfinity);
    }
    // N cancels to joint * N / (n_x * n_y); exact integer products keep the
    // independence case at exactly 0
    let num = n_joint as u128 * snap.n as u128;
    let den = snap.n_x as u128 * snap.n_y as u128;
    Ok(Score::Finite((num as f64 / den as f64).log2()))
}

/// Lexical independence of a unit from `s`: `log10(n_z - n_s)` when
/// `n_z > n_s`, else 0.
pub fn lexical_independence(n_z: u64, n_s: u64) -> f64 {
    if n_z > n_s {
        ((n_z - n_s) as f64).log10()
    } else {
        0.0
    }
}

pub fn independence_ratio(id_x: f64, id_y: f64) -> Result<f64> {
    if id_y == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(id_x / id_y)
}

/// Inputs to the UH decision. `None` marks an undefined quantity, which
/// fails the conjunct that uses it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UhEvidence {
    pub mi: Option<Score>,
    pub id_x: f64,
    pub id_y: f64,
    pub idr: Option<f64>,
}

impl UhEvidence {
    pub fn from_snapshot(snap: &CountSnapshot, joint: JointSource) -> Self {
        let id_x = lexical_independence(snap.n_x, snap.n_s);
        let id_y = lexical_independence(snap.n_y, snap.n_s);
        UhEvidence {
            mi: mutual_information(snap, joint).ok(),
            id_x,
            id_y,
            idr: independence_ratio(id_x, id_y).ok(),
        }
    }

    /// Merge iff MI > MI+, or MI lies in [MI-, MI+] and both units are
    /// independent enough of `s` with a balanced ratio.
    pub fn merges(&self, t: &UhThresholds) -> bool {
        let Some(mi) = self.mi else {
            return false;
        };
        let (mi_plus, mi_minus) = (Score::from(t.mi_plus), Score::from(t.mi_minus));
        if mi > mi_plus {
            return true;
        }
        let mi_in_range = mi_plus >= mi && mi >= mi_minus;
        let idr_in_range = self
            .idr
            .is_some_and(|idr| t.idr_plus >= idr && idr >= t.idr_minus);
        mi_in_range && self.id_x >= t.id_t && self.id_y >= t.id_t && idr_in_range
    }
}

/// The UH merge decision. Its score is MI, or `-inf` when MI is undefined.
pub fn unithood_uh(snap: &CountSnapshot, thresholds: &UhThresholds, config: &OuConfig) -> Decision {
    let evidence = UhEvidence::from_snapshot(snap, config.mi_joint_source);
    Decision {
        merge: evidence.merges(thresholds),
        score: evidence.mi.unwrap_or(Score::NegInfinity),
        measure: "uh",
    }
}

/// Exclusivity odds `P(S) / P(X∩Y \ S) = n_s / (n_xy - n_s)`, defined as 1
/// when every co-occurrence is the conjoined form.
pub fn odds_local(snap: &CountSnapshot) -> f64 {
    debug_assert!(snap.n_s <= snap.n_xy, "snapshot not normalized");
    let rest = snap.n_xy.saturating_sub(snap.n_s);
    if rest == 0 {
        1.0
    } else {
        snap.n_s as f64 / rest as f64
    }
}

/// Pervasiveness odds `P(S) / (1 - P(S)) = n_s / (N - n_s)`; `f64::INFINITY`
/// when `n_s = N`.
pub fn odds_global(snap: &CountSnapshot) -> f64 {
    debug_assert!(snap.n > 0, "empty sample space");
    let rest = snap.n.saturating_sub(snap.n_s);
    if rest == 0 {
        f64::INFINITY
    } else {
        snap.n_s as f64 / rest as f64
    }
}

/// `OU(s) = log O_L + log O_G` in the configured base.
///
/// A zero odds gives `-inf`, which wins over an infinite global odds.
pub fn odds_of_unithood(snap: &CountSnapshot, config: &OuConfig) -> Result<Score> {
    if snap.n == 0 {
        return Err(Error::InvalidSampleSpace);
    }
    config.validate()?;
    let local = odds_local(snap);
    let global = odds_global(snap);
    if local == 0.0 || global == 0.0 {
        return Ok(Score::NegInfinity);
    }
    if global.is_infinite() {
        return Ok(Score::PosInfinity);
    }
    Ok(Score::Finite((local.ln() + global.ln()) / config.log_base.ln()))
}

/// Merge when the score reaches the threshold (inclusive).
pub fn decide_merge_ou(score: Score, ou_threshold: f64) -> Decision {
    Decision {
        merge: score >= Score::from(ou_threshold),
        score,
        measure: "ou",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CValueInput {
    pub candidate: Vec<String>,
    /// Occurrence frequency of the candidate.
    pub f_a: u64,
    /// Longer candidates containing this one, with their frequencies.
    pub longer: Vec<(Vec<String>, u64)>,
    /// Longest n-gram length considered.
    pub g: usize,
}

impl CValueInput {
    /// Reads frequencies from an occurrence-capable provider.
    pub fn from_provider(
        provider: &dyn CountProvider,
        candidate: &PhraseQuery,
        longer: &[PhraseQuery],
        g: usize,
    ) -> Result<Self> {
        let longer = longer
            .iter()
            .map(|l| Ok((l.terms().to_vec(), provider.occurrence_count(l)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(CValueInput {
            candidate: candidate.terms().to_vec(),
            f_a: provider.occurrence_count(candidate)?,
            longer,
            g,
        })
    }
}

/// `log2|a| * f_a` for the longest candidates, otherwise
/// `log2|a| * (f_a - mean f_l)` over the longer candidates (mean 0 if none).
pub fn c_value(input: &CValueInput) -> Result<f64> {
    let len = input.candidate.len();
    if len == 0 {
        return Err(Error::InvalidArgument("empty C-value candidate".into()));
    }
    if len > input.g {
        return Err(Error::InvalidArgument(format!(
            "candidate length {len} exceeds longest n-gram {}",
            input.g
        )));
    }
    if input.longer.iter().any(|(l, _)| *l == input.candidate) {
        return Err(Error::InvalidArgument(
            "candidate appears in its own longer set".into(),
        ));
    }
    let weight = (len as f64).log2();
    let f_a = input.f_a as f64;
    if len == input.g || input.longer.is_empty() {
        return Ok(weight * f_a);
    }
    let mean = input.longer.iter().map(|(_, f)| *f as f64).sum::<f64>() / input.longer.len() as f64;
    Ok(weight * (f_a - mean))
}
