//! Score files:
//! `system_id,setting_id,reference_subject,probe_subject,probe_sample,label,score`.

use std::collections::BTreeMap;
use std::path::Path;

use facefuse_core::scores::{Label, ScoreRecord, ScoreSet, TrialKey};

use crate::error::{Error, Result};
use crate::numfmt;

pub const HEADER: [&str; 7] = [
    "system_id",
    "setting_id",
    "reference_subject",
    "probe_subject",
    "probe_sample",
    "label",
    "score",
];

/// Reads every record, grouped into one set per system id.
pub fn parse(path: &Path, bytes: &[u8]) -> Result<Vec<ScoreSet>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(bytes);
    let header = rdr.headers().map_err(|e| Error::format(path, 1, e.to_string()))?;
    if header.iter().ne(HEADER) {
        return Err(Error::format(path, 1, format!("header must be {}", HEADER.join(","))));
    }
    let mut by_system: BTreeMap<String, Vec<ScoreRecord>> = BTreeMap::new();
    let mut lines: BTreeMap<(String, TrialKey), usize> = BTreeMap::new();
    for (n, rec) in rdr.records().enumerate() {
        let line = n + 2;
        let rec = rec.map_err(|e| Error::format(path, line, e.to_string()))?;
        let key = TrialKey::new(&rec[1], &rec[2], &rec[3], &rec[4]);
        let label = Label::parse(&rec[5]).ok_or_else(|| {
            Error::format(
                path,
                line,
                format!("label must be genuine or impostor, got {:?}", &rec[5]),
            )
        })?;
        if label != key.label() {
            return Err(Error::format(
                path,
                line,
                format!("label {label} contradicts subjects {} / {}", &rec[2], &rec[3]),
            ));
        }
        let score: f64 = rec[6]
            .trim()
            .parse()
            .map_err(|_| Error::format(path, line, format!("bad score {:?}", &rec[6])))?;
        let system = rec[0].to_string();
        if let Some(prev) = lines.insert((system.clone(), key.clone()), line) {
            return Err(Error::format(
                path,
                line,
                format!("duplicate trial {key} for system {system} (first on line {prev})"),
            ));
        }
        let r = ScoreRecord::new(system.as_str(), key, score).map_err(|e| Error::format(path, line, e.to_string()))?;
        by_system.entry(system).or_default().push(r);
    }
    if by_system.is_empty() {
        return Err(Error::format(path, 1, "no score records"));
    }
    by_system
        .into_iter()
        .map(|(sys, recs)| ScoreSet::new(sys, recs).map_err(|e| Error::format(path, 0, e.to_string())))
        .collect()
}

pub fn load(path: &Path) -> Result<Vec<ScoreSet>> {
    parse(path, &crate::fs::read(path)?)
}

pub fn to_csv<'a>(sets: impl IntoIterator<Item = &'a ScoreSet>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).map_err(|e| Error::Internal(e.to_string()))?;
    for set in sets {
        for r in set.records() {
            w.write_record([
                r.system_id.as_str(),
                &r.key.setting_id,
                &r.key.reference_subject,
                &r.key.probe_subject,
                &r.key.probe_sample,
                r.label.as_str(),
                &numfmt::num(r.score),
            ])
            .map_err(|e| Error::Internal(e.to_string()))?;
        }
    }
    w.into_inner().map_err(|e| Error::Internal(e.to_string()))
}
