//! Batch scoring of candidate pairs.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counts::{snapshot_phrases, CountProvider};
use crate::error::Result;
use crate::eval::pair_key;
use crate::extract::{
    extract_noun_phrases, generate_pairs, merge_units, CandidatePair, ExtractConfig, NounPhrase,
    PairRecord, TaggedSentence,
};
use crate::measures::{decide_merge_ou, mutual_information, odds_of_unithood, unithood_uh, OuConfig, UhThresholds};
use crate::score::Score;

fn default_round() -> usize {
    1
}

/// One line of scored output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRecord {
    pub sid: String,
    pub s: String,
    pub ax: String,
    pub ay: String,
    pub b: String,
    pub n_x: u64,
    pub n_y: u64,
    pub n_s: u64,
    pub n_xy: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub clamped: bool,
    pub ou: Score,
    /// UH function value, 1 or 0.
    pub uh: u8,
    /// `null` when a marginal count is zero.
    pub mi: Option<Score>,
    pub merge_ou: bool,
    pub merge_uh: bool,
    #[serde(default = "default_round")]
    pub round: usize,
}

impl ScoredRecord {
    pub fn key(&self) -> String {
        pair_key(&self.ax, &self.b, &self.ay)
    }
}

/// Measures shared by every scored pair.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScoringConfig {
    pub ou: OuConfig,
    pub uh: UhThresholds,
}

pub fn score_pair(provider: &dyn CountProvider, pair: &PairRecord, cfg: &ScoringConfig) -> Result<ScoredRecord> {
    let snap = snapshot_phrases(provider, &pair.ax, &pair.ay, &pair.s)?;
    let ou = odds_of_unithood(&snap, &cfg.ou)?;
    let uh = unithood_uh(&snap, &cfg.uh, &cfg.ou);
    Ok(ScoredRecord {
        sid: pair.sid.clone(),
        s: pair.s.clone(),
        ax: pair.ax.clone(),
        ay: pair.ay.clone(),
        b: pair.b.clone(),
        n_x: snap.n_x,
        n_y: snap.n_y,
        n_s: snap.n_s,
        n_xy: snap.n_xy,
        n: snap.n,
        clamped: snap.clamped,
        ou,
        uh: uh.merge as u8,
        mi: mutual_information(&snap, cfg.ou.mi_joint_source).ok(),
        merge_ou: decide_merge_ou(ou, cfg.ou.ou_threshold).merge,
        merge_uh: uh.merge,
        round: 1,
    })
}

/// Scores pairs in parallel; output order matches input order.
pub fn score_pairs(provider: &dyn CountProvider, pairs: &[PairRecord], cfg: &ScoringConfig) -> Result<Vec<ScoredRecord>> {
    pairs.par_iter().map(|p| score_pair(provider, p, cfg)).collect()
}

type SpanKey = (usize, usize, usize, usize);

fn span_key(p: &CandidatePair) -> SpanKey {
    (p.a_x.start(), p.a_x.end(), p.a_y.start(), p.a_y.end())
}

/// Extracts and scores pairs over up to `rounds` passes. After each pass,
/// pairs accepted by OU become single units and the new pairs they form are
/// scored in the next pass. Stops early when a pass accepts nothing.
pub fn score_sentences(
    provider: &dyn CountProvider,
    sentences: &[TaggedSentence],
    extract: &ExtractConfig,
    cfg: &ScoringConfig,
    rounds: usize,
) -> Result<Vec<ScoredRecord>> {
    let mut units: Vec<Vec<NounPhrase>> = sentences
        .iter()
        .map(|s| extract_noun_phrases(s, extract))
        .collect();
    let mut seen: Vec<HashSet<SpanKey>> = vec![HashSet::new(); sentences.len()];
    let mut out = Vec::new();

    for round in 1..=rounds.max(1) {
        let candidates: Vec<(usize, CandidatePair)> = sentences
            .iter()
            .enumerate()
            .flat_map(|(i, s)| {
                generate_pairs(s, &units[i], extract)
                    .into_iter()
                    .map(move |p| (i, p))
            })
            .filter(|(i, p)| seen[*i].insert(span_key(p)))
            .collect();
        if candidates.is_empty() {
            break;
        }
        let records: Vec<PairRecord> = candidates.iter().map(|(_, p)| p.to_record()).collect();
        let mut scored = score_pairs(provider, &records, cfg)?;
        scored.iter_mut().for_each(|r| r.round = round);

        let mut accepted: Vec<Vec<&CandidatePair>> = vec![Vec::new(); sentences.len()];
        for ((i, pair), rec) in candidates.iter().zip(&scored) {
            if rec.merge_ou {
                accepted[*i].push(pair);
            }
        }
        let any_accepted = accepted.iter().any(|a| !a.is_empty());
        for (i, acc) in accepted.iter().enumerate() {
            if !acc.is_empty() {
                units[i] = merge_units(&units[i], acc);
            }
        }
        out.extend(scored);
        if !any_accepted {
            break;
        }
    }
    Ok(out)
}
