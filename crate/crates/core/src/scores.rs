//! Embeddings and the distance-to-probability score model.
//!
//! A trial compares a reference embedding with a probe embedding. The
//! Euclidean distance `d` between them is mapped to `1 / (d + 1)`, which
//! lies in `]0, 1]` and reaches 1 only for identical embeddings.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// One face sample projected into an embedding space.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub subject_id: String,
    pub sample_id: String,
    pub setting_id: Option<String>,
    pub vector: Vec<f64>,
}

impl Embedding {
    pub fn new(
        subject_id: impl Into<String>,
        sample_id: impl Into<String>,
        setting_id: Option<String>,
        vector: Vec<f64>,
    ) -> Result<Self> {
        if vector.is_empty() {
            return Err(Error::Empty("embedding vector"));
        }
        if let Some(&bad) = vector.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidValue {
                what: "embedding component",
                value: bad,
            });
        }
        Ok(Embedding {
            subject_id: subject_id.into(),
            sample_id: sample_id.into(),
            setting_id,
            vector,
        })
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

/// Checks that every embedding in `items` shares one dimension and returns it.
pub fn uniform_dim(items: &[Embedding]) -> Result<usize> {
    let first = items.first().ok_or(Error::Empty("embedding collection"))?.dim();
    for e in items {
        if e.dim() != first {
            return Err(Error::DimensionMismatch {
                left: first,
                right: e.dim(),
            });
        }
    }
    Ok(first)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Genuine,
    Impostor,
}

impl Label {
    pub fn from_subjects(reference: &str, probe: &str) -> Label {
        if reference == probe {
            Label::Genuine
        } else {
            Label::Impostor
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Genuine => "genuine",
            Label::Impostor => "impostor",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "genuine" => Some(Label::Genuine),
            "impostor" => Some(Label::Impostor),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Identifies one verification trial independently of the scoring system.
///
/// Ordering is lexicographic over the fields, which makes alignment and
/// output ordering deterministic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrialKey {
    pub setting_id: String,
    pub reference_subject: String,
    pub probe_subject: String,
    pub probe_sample: String,
}

impl TrialKey {
    pub fn new(
        setting_id: impl Into<String>,
        reference_subject: impl Into<String>,
        probe_subject: impl Into<String>,
        probe_sample: impl Into<String>,
    ) -> Self {
        TrialKey {
            setting_id: setting_id.into(),
            reference_subject: reference_subject.into(),
            probe_subject: probe_subject.into(),
            probe_sample: probe_sample.into(),
        }
    }

    pub fn label(&self) -> Label {
        Label::from_subjects(&self.reference_subject, &self.probe_subject)
    }
}

impl fmt::Display for TrialKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.setting_id, self.reference_subject, self.probe_subject, self.probe_sample
        )
    }
}

/// A single trial's match probability as produced by one system.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub system_id: String,
    pub key: TrialKey,
    pub label: Label,
    pub score: f64,
}

impl ScoreRecord {
    /// Builds a record, deriving the label from the key and checking the
    /// score lies in `]0, 1]`.
    pub fn new(system_id: impl Into<String>, key: TrialKey, score: f64) -> Result<Self> {
        check_score(score)?;
        Ok(ScoreRecord {
            system_id: system_id.into(),
            label: key.label(),
            key,
            score,
        })
    }
}

pub(crate) fn check_score(score: f64) -> Result<()> {
    if score > 0.0 && score <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidValue {
            what: "score (must lie in ]0, 1])",
            value: score,
        })
    }
}

/// All trials scored by one system, in canonical key order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    pub system_id: String,
    pub setting_filter: Option<String>,
    records: Vec<ScoreRecord>,
}

impl ScoreSet {
    /// Sorts `records` by key and rejects duplicates, mismatched labels and
    /// records from a different system.
    pub fn new(system_id: impl Into<String>, mut records: Vec<ScoreRecord>) -> Result<Self> {
        let system_id = system_id.into();
        for r in &records {
            if r.system_id != system_id {
                return Err(Error::Invalid(format!(
                    "record from system {} in score set of {}",
                    r.system_id, system_id
                )));
            }
            if r.label != r.key.label() {
                return Err(Error::Invalid(format!(
                    "label {} inconsistent with key {}",
                    r.label, r.key
                )));
            }
            check_score(r.score)?;
        }
        records.sort_by(|a, b| a.key.cmp(&b.key));
        if let Some(w) = records.windows(2).find(|w| w[0].key == w[1].key) {
            return Err(Error::DuplicateKey(format!("{} in system {}", w[0].key, system_id)));
        }
        Ok(ScoreSet {
            system_id,
            setting_filter: None,
            records,
        })
    }

    pub fn records(&self) -> &[ScoreRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<ScoreRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct setting ids present, sorted.
    pub fn settings(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.records.iter().map(|r| r.key.setting_id.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    /// Restricts the set to one setting.
    pub fn filter_setting(&self, setting_id: &str) -> ScoreSet {
        ScoreSet {
            system_id: self.system_id.clone(),
            setting_filter: Some(String::from(setting_id)),
            records: self
                .records
                .iter()
                .filter(|r| r.key.setting_id == setting_id)
                .cloned()
                .collect(),
        }
    }

    /// Returns a copy with every score passed through `f`.
    pub fn map_scores(&self, f: impl Fn(f64) -> f64) -> Result<ScoreSet> {
        let mut out = self.clone();
        for r in &mut out.records {
            r.score = f(r.score);
            check_score(r.score)?;
        }
        Ok(out)
    }

    pub fn class_scores(&self) -> ClassScores {
        let mut cs = ClassScores::default();
        for r in &self.records {
            match r.label {
                Label::Genuine => cs.genuine.push(r.score),
                Label::Impostor => cs.impostor.push(r.score),
            }
        }
        cs
    }
}

/// Scores split by class; the input of every metric.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassScores {
    pub genuine: Vec<f64>,
    pub impostor: Vec<f64>,
}

impl ClassScores {
    pub fn new(genuine: Vec<f64>, impostor: Vec<f64>) -> Self {
        ClassScores { genuine, impostor }
    }

    pub fn extend(&mut self, other: &ClassScores) {
        self.genuine.extend_from_slice(&other.genuine);
        self.impostor.extend_from_slice(&other.impostor);
    }

    pub fn swapped(&self) -> ClassScores {
        ClassScores {
            genuine: self.impostor.clone(),
            impostor: self.genuine.clone(),
        }
    }

    pub(crate) fn require_both(&self) -> Result<()> {
        if self.genuine.is_empty() || self.impostor.is_empty() {
            return Err(Error::MissingClass {
                genuine: self.genuine.len(),
                impostor: self.impostor.len(),
            });
        }
        if let Some(&bad) = self.genuine.iter().chain(&self.impostor).find(|v| v.is_nan()) {
            return Err(Error::InvalidValue {
                what: "score",
                value: bad,
            });
        }
        Ok(())
    }
}

impl From<&ScoreSet> for ClassScores {
    fn from(s: &ScoreSet) -> Self {
        s.class_scores()
    }
}

/// L2 distance between two embeddings, accumulated in `f64`.
pub fn euclidean_distance(a: &Embedding, b: &Embedding) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let sq: f64 = a.vector.iter().zip(&b.vector).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(libm::sqrt(sq))
}

/// Maps a distance onto `]0, 1]` as `1 / (d + 1)`.
pub fn distance_to_probability(d: f64) -> Result<f64> {
    if !d.is_finite() || d < 0.0 {
        return Err(Error::InvalidValue {
            what: "distance",
            value: d,
        });
    }
    Ok(1.0 / (d + 1.0))
}

/// Scores every reference against every probe.
///
/// The trial key takes the probe's setting when present, else `setting_id`.
/// Labels depend only on subject equality.
pub fn score_trials(
    references: &[Embedding],
    probes: &[Embedding],
    system_id: &str,
    setting_id: &str,
) -> Result<ScoreSet> {
    if references.is_empty() {
        return Err(Error::Empty("reference embeddings"));
    }
    if probes.is_empty() {
        return Err(Error::Empty("probe embeddings"));
    }
    let dr = uniform_dim(references)?;
    let dp = uniform_dim(probes)?;
    if dr != dp {
        return Err(Error::DimensionMismatch { left: dr, right: dp });
    }
    let mut records = Vec::with_capacity(references.len() * probes.len());
    for r in references {
        for p in probes {
            let setting = p.setting_id.as_deref().unwrap_or(setting_id);
            let key = TrialKey::new(
                setting,
                r.subject_id.as_str(),
                p.subject_id.as_str(),
                p.sample_id.as_str(),
            );
            let score = distance_to_probability(euclidean_distance(r, p)?)?;
            records.push(ScoreRecord::new(system_id, key, score)?);
        }
    }
    let mut set = ScoreSet::new(system_id, records)?;
    set.setting_filter = Some(String::from(setting_id));
    Ok(set)
}
