//! Trial alignment across systems and the average, maximum and minimum
//! fusion rules.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::scores::{Label, ScoreRecord, ScoreSet, TrialKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FusionRule {
    Avg,
    Max,
    Min,
}

impl FusionRule {
    pub const ALL: [FusionRule; 3] = [FusionRule::Avg, FusionRule::Max, FusionRule::Min];

    pub fn as_str(self) -> &'static str {
        match self {
            FusionRule::Avg => "avg",
            FusionRule::Max => "max",
            FusionRule::Min => "min",
        }
    }

    pub fn parse(s: &str) -> Option<FusionRule> {
        match s.trim() {
            "avg" => Some(FusionRule::Avg),
            "max" => Some(FusionRule::Max),
            "min" => Some(FusionRule::Min),
            _ => None,
        }
    }

    /// Combines one row of per-system scores.
    pub fn combine(self, scores: &[f64]) -> f64 {
        let (lo, hi) = scores.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
            (lo.min(s), hi.max(s))
        });
        match self {
            FusionRule::Max => hi,
            FusionRule::Min => lo,
            FusionRule::Avg => {
                if lo == hi {
                    return lo;
                }
                let mean = scores.iter().sum::<f64>() / scores.len() as f64;
                // rounding of the sum can step one ulp outside the row range
                mean.clamp(lo, hi)
            }
        }
    }

    /// Canonical system id of a fused output, independent of input order.
    pub fn fused_system_id(self, systems: &[String]) -> String {
        let mut sorted: Vec<&str> = systems.iter().map(String::as_str).collect();
        sorted.sort_unstable();
        format!("fusion:{}({})", self.as_str(), sorted.join("+"))
    }
}

impl fmt::Display for FusionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub label: Label,
    pub scores: Vec<f64>,
}

/// Trials common to N ≥ 2 systems; columns are sorted by system id.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialMatrix {
    systems: Vec<String>,
    rows: BTreeMap<TrialKey, TrialRow>,
}

impl TrialMatrix {
    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    pub fn rows(&self) -> &BTreeMap<TrialKey, TrialRow> {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Scores of one system in key order.
    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.values().map(|r| r.scores[index]).collect()
    }

    pub fn column_of(&self, system_id: &str) -> Option<Vec<f64>> {
        self.systems.iter().position(|s| s == system_id).map(|i| self.column(i))
    }
}

/// Result of aligning score sets: the matrix and per-system drop counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub matrix: TrialMatrix,
    /// `(system_id, trials not present in every system)`, sorted by system.
    pub dropped: Vec<(String, usize)>,
}

impl Alignment {
    pub fn total_dropped(&self) -> usize {
        self.dropped.iter().map(|(_, n)| n).sum()
    }
}

/// Keeps exactly the trial keys present in all sets.
pub fn align_trials(sets: &[&ScoreSet]) -> Result<Alignment> {
    if sets.len() < 2 {
        return Err(Error::Invalid(format!(
            "fusion requires ≥ 2 systems (got {})",
            sets.len()
        )));
    }
    let mut order: Vec<&ScoreSet> = sets.to_vec();
    order.sort_by(|a, b| a.system_id.cmp(&b.system_id));
    if let Some(w) = order.windows(2).find(|w| w[0].system_id == w[1].system_id) {
        return Err(Error::Invalid(format!(
            "system {} supplied more than once",
            w[0].system_id
        )));
    }

    let maps: Vec<BTreeMap<&TrialKey, &ScoreRecord>> = order
        .iter()
        .map(|s| {
            let mut m = BTreeMap::new();
            for r in s.records() {
                if m.insert(&r.key, r).is_some() {
                    return Err(Error::DuplicateKey(format!("{} in system {}", r.key, s.system_id)));
                }
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;

    let mut rows = BTreeMap::new();
    for (key, first) in &maps[0] {
        let mut scores = Vec::with_capacity(maps.len());
        scores.push(first.score);
        for m in &maps[1..] {
            match m.get(key) {
                Some(r) => scores.push(r.score),
                None => break,
            }
        }
        if scores.len() == maps.len() {
            rows.insert(
                (*key).clone(),
                TrialRow {
                    label: key.label(),
                    scores,
                },
            );
        }
    }
    if rows.is_empty() {
        return Err(Error::Invalid(String::from("no trial is shared by all systems")));
    }
    let dropped = order
        .iter()
        .map(|s| (s.system_id.clone(), s.len() - rows.len()))
        .collect();
    let systems = order.iter().map(|s| s.system_id.clone()).collect();
    Ok(Alignment {
        matrix: TrialMatrix { systems, rows },
        dropped,
    })
}

/// Applies `rule` to every row of `m`.
pub fn fuse(m: &TrialMatrix, rule: FusionRule) -> ScoreSet {
    let system_id = rule.fused_system_id(&m.systems);
    let records: Vec<ScoreRecord> = m
        .rows
        .iter()
        .map(|(key, row)| ScoreRecord {
            system_id: system_id.clone(),
            key: key.clone(),
            label: row.label,
            score: rule.combine(&row.scores),
        })
        .collect();
    // rows come from a BTreeMap so keys are unique and sorted already
    ScoreSet::new(system_id, records).expect("fused rows inherit valid keys and scores")
}

pub fn fuse_avg(m: &TrialMatrix) -> ScoreSet {
    fuse(m, FusionRule::Avg)
}

pub fn fuse_max(m: &TrialMatrix) -> ScoreSet {
    fuse(m, FusionRule::Max)
}

pub fn fuse_min(m: &TrialMatrix) -> ScoreSet {
    fuse(m, FusionRule::Min)
}

/// Distinct keys over a collection of sets; used by callers reporting drops.
pub fn key_union(sets: &[&ScoreSet]) -> BTreeSet<TrialKey> {
    sets.iter()
        .flat_map(|s| s.records().iter().map(|r| r.key.clone()))
        .collect()
}
