//! Evaluation of merge decisions against gold labels.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::decide_merge_ou;
use crate::score::Score;

/// Canonical `(a_x, b, a_y)` key: lowercased, whitespace collapsed, fields
/// joined by `|`.
pub fn pair_key(ax: &str, b: &str, ay: &str) -> String {
    let canon = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    format!("{}|{}|{}", canon(ax), canon(b), canon(ay))
}

/// One line of a gold file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub ax: String,
    #[serde(default)]
    pub b: String,
    pub ay: String,
    pub merge: bool,
}

/// Gold merge labels keyed by canonical pair key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldSet {
    labels: HashMap<String, bool>,
}

impl GoldSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: String, should_merge: bool) -> Result<()> {
        if self.labels.contains_key(&key) {
            return Err(Error::DuplicateGold(key));
        }
        self.labels.insert(key, should_merge);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<bool> {
        self.labels.get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Reads JSON lines of `{"ax", "b", "ay", "merge"}`.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut gold = GoldSet::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: GoldRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            gold.insert(pair_key(&rec.ax, &rec.b, &rec.ay), rec.merge)?;
        }
        Ok(gold)
    }
}

impl<K: Into<String>> FromIterator<(K, bool)> for GoldSet {
    /// Later duplicates overwrite earlier ones.
    fn from_iter<T: IntoIterator<Item = (K, bool)>>(iter: T) -> Self {
        GoldSet {
            labels: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ContingencyTable {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Pairs the decision merged.
    pub fn merged(&self) -> u64 {
        self.tp + self.fp
    }
}

/// Tallies decisions against gold labels. Every key must have a label.
pub fn build_contingency<K: AsRef<str>>(decisions: &[(K, bool)], gold: &GoldSet) -> Result<ContingencyTable> {
    let mut table = ContingencyTable::default();
    let mut missing = Vec::new();
    for (key, merge) in decisions {
        let Some(should) = gold.get(key.as_ref()) else {
            missing.push(key.as_ref().to_string());
            continue;
        };
        match (*merge, should) {
            (true, true) => table.tp += 1,
            (true, false) => table.fp += 1,
            (false, true) => table.fn_ += 1,
            (false, false) => table.tn += 1,
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingGold(missing));
    }
    Ok(table)
}

/// Precision, recall and accuracy; `None` where the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub accuracy: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn compute_metrics(table: &ContingencyTable) -> Metrics {
    Metrics {
        precision: ratio(table.tp, table.tp + table.fp),
        recall: ratio(table.tp, table.tp + table.fn_),
        accuracy: ratio(table.tp + table.tn, table.total()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub threshold: f64,
    pub metrics: Metrics,
    pub table: ContingencyTable,
}

/// Evaluates inclusive-threshold merge decisions at each grid point.
pub fn threshold_sweep<K: AsRef<str>>(
    scored: &[(K, Score)],
    gold: &GoldSet,
    grid: &[f64],
) -> Result<Vec<SweepPoint>> {
    if grid.iter().any(|t| t.is_nan()) {
        return Err(Error::InvalidArgument("threshold grid contains NaN".into()));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("threshold grid must be ascending".into()));
    }
    grid.iter()
        .map(|&threshold| {
            let decisions: Vec<(&str, bool)> = scored
                .iter()
                .map(|(k, s)| (k.as_ref(), decide_merge_ou(*s, threshold).merge))
                .collect();
            let table = build_contingency(&decisions, gold)?;
            Ok(SweepPoint {
                threshold,
                metrics: compute_metrics(&table),
                table,
            })
        })
        .collect()
}

/// An evaluation report for one decision run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub accuracy: Option<f64>,
    pub table: ContingencyTable,
}

impl Report {
    pub fn new(table: ContingencyTable) -> Self {
        let m = compute_metrics(&table);
        Report {
            precision: m.precision,
            recall: m.recall,
            accuracy: m.accuracy,
            table,
        }
    }

    /// Plain-text rendering with five decimals; undefined metrics print
    /// `n/a`.
    pub fn to_text(&self, title: &str) -> String {
        let t = &self.table;
        let mut out = String::new();
        let _ = writeln!(out, "{title}");
        let _ = writeln!(out, "                 gold merge  gold keep");
        let _ = writeln!(out, "  decided merge  {:>10}  {:>9}", t.tp, t.fp);
        let _ = writeln!(out, "  decided keep   {:>10}  {:>9}", t.fn_, t.tn);
        let _ = writeln!(out, "  pairs          {:>10}", t.total());
        let _ = writeln!(out, "  precision  {}", fmt_metric(self.precision));
        let _ = writeln!(out, "  recall     {}", fmt_metric(self.recall));
        let _ = writeln!(out, "  accuracy   {}", fmt_metric(self.accuracy));
        out
    }
}

pub fn fmt_metric(value: Option<f64>) -> String {
    value.map_or_else(|| "n/a".to_string(), |v| format!("{v:.5}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gold(entries: &[(&str, bool)]) -> GoldSet {
        entries.iter().map(|(k, v)| (*k, *v)).collect()
    }

    #[test]
    fn keys_are_canonical() {
        assert_eq!(pair_key("E. Coli", "", "Food  poisoning"), "e. coli||food poisoning");
        assert_eq!(pair_key(" National Institute ", "OF", "Allergy"), "national institute|of|allergy");
    }

    #[test]
    fn empty_decisions_give_zero_table() {
        assert_eq!(build_contingency::<&str>(&[], &GoldSet::new()).unwrap(), ContingencyTable::default());
    }

    #[test]
    fn mixed_tally() {
        let g = gold(&[("k1", true), ("k2", true), ("k3", false)]);
        let t = build_contingency(&[("k1", true), ("k2", false), ("k3", true)], &g).unwrap();
        assert_eq!(t, ContingencyTable { tp: 1, fp: 1, fn_: 1, tn: 0 });
    }

    #[test]
    fn all_correct() {
        let g = gold(&[("a", true), ("b", true), ("c", false), ("d", false)]);
        let t = build_contingency(&[("a", true), ("b", true), ("c", false), ("d", false)], &g).unwrap();
        assert_eq!(t, ContingencyTable { tp: 2, fp: 0, fn_: 0, tn: 2 });
    }

    #[test]
    fn missing_gold_lists_offenders() {
        let g = gold(&[("a", true)]);
        let err = build_contingency(&[("a", true), ("x", false), ("y", true)], &g).unwrap_err();
        match err {
            Error::MissingGold(keys) => assert_eq!(keys, ["x", "y"]),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn metrics_examples() {
        let m = compute_metrics(&ContingencyTable { tp: 2, fp: 0, fn_: 1, tn: 3 });
        assert_eq!(m.precision, Some(1.0));
        assert!((m.recall.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.accuracy.unwrap() - 5.0 / 6.0).abs() < 1e-15);

        let m = compute_metrics(&ContingencyTable { tp: 0, fp: 0, fn_: 3, tn: 1 });
        assert_eq!(m.precision, None);
        assert_eq!(m.recall, Some(0.0));

        let m = compute_metrics(&ContingencyTable::default());
        assert_eq!((m.precision, m.recall, m.accuracy), (None, None, None));
    }

    #[test]
    fn sweep_examples() {
        let g = gold(&[("k1", true), ("k2", false)]);
        let scored = [("k1", Score::Finite(2.0)), ("k2", Score::Finite(-1.0))];
        let pts = threshold_sweep(&scored, &g, &[-5.0, 0.0, 5.0]).unwrap();
        assert_eq!(pts[0].metrics.recall, Some(1.0));
        assert_eq!(pts[0].table.merged(), 2);
        assert_eq!(pts[1].table, ContingencyTable { tp: 1, fp: 0, fn_: 0, tn: 1 });
        assert_eq!(pts[1].metrics, Metrics { precision: Some(1.0), recall: Some(1.0), accuracy: Some(1.0) });
        assert_eq!(pts[2].table.merged(), 0);
        assert!(threshold_sweep(&scored, &g, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn gold_file_parsing() {
        let text = "{\"ax\":\"E. coli\",\"b\":\"\",\"ay\":\"food poisoning\",\"merge\":true}\n\n{\"ax\":\"flu\",\"ay\":\"season\",\"merge\":false}\n";
        let g = GoldSet::read(text.as_bytes()).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.get("e. coli||food poisoning"), Some(true));
        assert_eq!(g.get("flu||season"), Some(false));
        let dup = format!("{text}{{\"ax\":\"FLU\",\"ay\":\"season\",\"merge\":true}}\n");
        assert!(matches!(GoldSet::read(dup.as_bytes()), Err(Error::DuplicateGold(_))));
    }

    #[test]
    fn report_text_marks_undefined() {
        let text = Report::new(ContingencyTable { tp: 0, fp: 0, fn_: 2, tn: 1 }).to_text("ou");
        assert!(text.contains("precision  n/a"));
        assert!(text.contains("recall     0.00000"));
        let json = serde_json::to_string(&Report::new(ContingencyTable::default())).unwrap();
        assert_eq!(json, r#"{"precision":null,"recall":null,"accuracy":null,"table":{"tp":0,"fp":0,"fn":0,"tn":0}}"#);
    }

    proptest! {
        #[test]
        fn sweep_is_monotone(
            scores in proptest::collection::vec((-20.0f64..20.0, any::<bool>()), 1..60),
            mut grid in proptest::collection::vec(-25.0f64..25.0, 1..20),
        ) {
            grid.sort_by(f64::total_cmp);
            let keys: Vec<String> = (0..scores.len()).map(|i| format!("k{i}")).collect();
            let g: GoldSet = keys.iter().cloned().zip(scores.iter().map(|s| s.1)).collect();
            let scored: Vec<(String, Score)> = keys.iter().cloned().zip(scores.iter().map(|s| Score::Finite(s.0))).collect();
            let pts = threshold_sweep(&scored, &g, &grid).unwrap();
            for w in pts.windows(2) {
                prop_assert!(w[1].table.merged() <= w[0].table.merged());
                if let (Some(a), Some(b)) = (w[0].metrics.recall, w[1].metrics.recall) {
                    prop_assert!(b <= a);
                }
            }
        }

        #[test]
        fn accuracy_one_iff_no_errors(tp in 0u64..20, fp in 0u64..20, fn_ in 0u64..20, tn in 0u64..20) {
            let t = ContingencyTable { tp, fp, fn_, tn };
            prop_assume!(t.total() > 0);
            let acc = compute_metrics(&t).accuracy.unwrap();
            prop_assert_eq!(acc == 1.0, fp == 0 && fn_ == 0);
        }

        #[test]
        fn contingency_is_order_invariant(
            labels in proptest::collection::vec((any::<bool>(), any::<bool>()), 0..40),
            seed in any::<u64>(),
        ) {
            let keys: Vec<String> = (0..labels.len()).map(|i| format!("k{i}")).collect();
            let g: GoldSet = keys.iter().cloned().zip(labels.iter().map(|l| l.1)).collect();
            let decisions: Vec<(String, bool)> = keys.iter().cloned().zip(labels.iter().map(|l| l.0)).collect();
            let mut shuffled = decisions.clone();
            // deterministic rotation + reversal as the permutation
            if !shuffled.is_empty() {
                let k = (seed % shuffled.len() as u64) as usize;
                shuffled.rotate_left(k);
                shuffled.reverse();
            }
            prop_assert_eq!(build_contingency(&decisions, &g).unwrap(), build_contingency(&shuffled, &g).unwrap());
        }
    }
}
