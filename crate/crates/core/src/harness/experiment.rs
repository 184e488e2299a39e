use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::settings::{classify_cross, cross_pairs, CrossKind, SettingDescriptor};
use crate::error::{Error, Result};
use crate::fusion::{align_trials, fuse, FusionRule};
use crate::metrics::{correlation_matrix, CorrelationMatrix, MetricsReport};
use crate::scores::{ClassScores, ScoreSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Protocol {
    /// Train and test on the same setting.
    Intra,
    /// Train on one setting, test on another.
    Cross,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Intra => "intra",
            Protocol::Cross => "cross",
        }
    }

    pub fn parse(s: &str) -> Option<Protocol> {
        match s.trim() {
            "intra" => Some(Protocol::Intra),
            "cross" => Some(Protocol::Cross),
            _ => None,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Unweighted mean of per-setting metrics.
    #[default]
    Macro,
    /// Metrics recomputed over the concatenated scores.
    Pooled,
}

impl Aggregation {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::Macro => "macro",
            Aggregation::Pooled => "pooled",
        }
    }

    pub fn parse(s: &str) -> Option<Aggregation> {
        match s.trim() {
            "macro" => Some(Aggregation::Macro),
            "pooled" => Some(Aggregation::Pooled),
            _ => None,
        }
    }
}

/// Which trained system produced a score set, and on which test data.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceKey {
    pub system_id: String,
    pub train_setting: String,
    pub test_setting: String,
}

impl SourceKey {
    pub fn new(system_id: &str, train_setting: &str, test_setting: &str) -> Self {
        SourceKey {
            system_id: String::from(system_id),
            train_setting: String::from(train_setting),
            test_setting: String::from(test_setting),
        }
    }
}

impl fmt::Display for SourceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "scores.{}.{}.{}",
            self.system_id, self.train_setting, self.test_setting
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentInputs {
    pub protocol: Option<Protocol>,
    pub scores: BTreeMap<SourceKey, ScoreSet>,
    /// System reported on its own and left out of every fusion.
    pub baseline: Option<String>,
    pub rules: Vec<FusionRule>,
    pub aggregation: Aggregation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MethodKind {
    Baseline,
    System,
    Fusion(FusionRule),
}

/// Metrics of one method on one (train, test) setting pair.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitResult {
    pub protocol: Protocol,
    pub train_setting: String,
    pub test_setting: String,
    pub method: String,
    pub kind: MethodKind,
    pub report: MetricsReport,
    pub scores: ClassScores,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub method: String,
    pub kind: MethodKind,
    pub report: MetricsReport,
}

/// Mean AUC of one method over the settings sharing an acquisition distance.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceGroup {
    pub distance: String,
    pub method: String,
    pub auc_pct: f64,
    pub n_settings: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub protocol: Protocol,
    pub aggregation: Aggregation,
    /// Table row order.
    pub methods: Vec<(String, MethodKind)>,
    pub units: Vec<UnitResult>,
    pub table: Vec<AggregateRow>,
    /// Cross protocol only, when every setting id names a camera and distance.
    pub cross_tables: Vec<(CrossKind, Vec<AggregateRow>)>,
    /// Intra protocol only, when every setting id names a camera and distance.
    pub by_distance: Vec<DistanceGroup>,
    /// Correlation of the fused systems, keyed by `train->test`.
    pub correlations: Vec<(String, CorrelationMatrix)>,
    /// `(train, test, system, trials dropped by alignment)`.
    pub dropped: Vec<(String, String, String, usize)>,
}

/// Aggregates results of one method under one protocol.
pub fn aggregate(units: &[&UnitResult], mode: Aggregation) -> Result<MetricsReport> {
    let first = units.first().ok_or(Error::Empty("reports to aggregate"))?;
    if let Some(u) = units.iter().find(|u| u.protocol != first.protocol) {
        return Err(Error::Invalid(format!(
            "cannot aggregate {} and {} protocol results together",
            first.protocol, u.protocol
        )));
    }
    if let Some(u) = units.iter().find(|u| u.method != first.method) {
        return Err(Error::Invalid(format!(
            "cannot aggregate methods {} and {} together",
            first.method, u.method
        )));
    }
    match mode {
        Aggregation::Pooled => {
            let mut all = ClassScores::default();
            for u in units {
                all.extend(&u.scores);
            }
            MetricsReport::compute(&all)
        }
        Aggregation::Macro => {
            let n = units.len() as f64;
            let mean = |f: fn(&MetricsReport) -> f64| units.iter().map(|u| f(&u.report)).sum::<f64>() / n;
            let cohens_d = units
                .iter()
                .map(|u| u.report.cohens_d)
                .collect::<Option<Vec<f64>>>()
                .map(|d| d.iter().sum::<f64>() / n);
            Ok(MetricsReport {
                auc_pct: mean(|r| r.auc_pct),
                eer_pct: mean(|r| r.eer_pct),
                cohens_d,
                fmr_at_fnmr1_pct: mean(|r| r.fmr_at_fnmr1_pct),
                fnmr_at_fmr1_pct: mean(|r| r.fnmr_at_fmr1_pct),
                fmr_at_fnmr1_degenerate: units.iter().any(|u| u.report.fmr_at_fnmr1_degenerate),
                fnmr_at_fmr1_degenerate: units.iter().any(|u| u.report.fnmr_at_fmr1_degenerate),
                n_genuine: units.iter().map(|u| u.report.n_genuine).sum(),
                n_impostor: units.iter().map(|u| u.report.n_impostor).sum(),
            })
        }
    }
}

pub fn run_intra(inputs: &ExperimentInputs) -> Result<ExperimentOutcome> {
    Runner::new(inputs, Protocol::Intra)?.run()
}

pub fn run_cross(inputs: &ExperimentInputs) -> Result<ExperimentOutcome> {
    Runner::new(inputs, Protocol::Cross)?.run()
}

/// Runs the protocol named in `inputs`.
pub fn run(inputs: &ExperimentInputs) -> Result<ExperimentOutcome> {
    match inputs.protocol {
        Some(Protocol::Intra) => run_intra(inputs),
        Some(Protocol::Cross) => run_cross(inputs),
        None => Err(Error::Invalid(String::from("experiment protocol not set"))),
    }
}

struct Runner<'a> {
    inputs: &'a ExperimentInputs,
    protocol: Protocol,
    systems: Vec<String>,
    fused: Vec<String>,
    pairs: Vec<(String, String)>,
}

impl<'a> Runner<'a> {
    fn new(inputs: &'a ExperimentInputs, protocol: Protocol) -> Result<Self> {
        if let Some(p) = inputs.protocol {
            if p != protocol {
                return Err(Error::Invalid(format!(
                    "configuration declares {p} protocol, not {protocol}"
                )));
            }
        }
        if inputs.scores.is_empty() {
            return Err(Error::Empty("score file list"));
        }
        for key in inputs.scores.keys() {
            let same = key.train_setting == key.test_setting;
            match protocol {
                Protocol::Intra if !same => {
                    return Err(Error::Invalid(format!(
                        "{key}: intra protocol requires train setting = test setting"
                    )))
                }
                Protocol::Cross if same => {
                    return Err(Error::Invalid(format!(
                        "{key}: cross protocol requires train setting ≠ test setting"
                    )))
                }
                _ => {}
            }
        }
        let systems: Vec<String> = inputs
            .scores
            .keys()
            .map(|k| k.system_id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if let Some(b) = &inputs.baseline {
            if !systems.contains(b) {
                return Err(Error::Invalid(format!("baseline system {b} has no score files")));
            }
        }
        let fused: Vec<String> = systems
            .iter()
            .filter(|s| Some(*s) != inputs.baseline.as_ref())
            .cloned()
            .collect();
        if !inputs.rules.is_empty() && fused.len() < 2 {
            return Err(Error::Invalid(format!(
                "fusion requires ≥ 2 systems (got {})",
                fused.len()
            )));
        }

        let settings: BTreeSet<&str> = inputs
            .scores
            .keys()
            .flat_map(|k| [k.train_setting.as_str(), k.test_setting.as_str()])
            .collect();
        let pairs: Vec<(String, String)> = match protocol {
            Protocol::Intra => settings.iter().map(|s| (String::from(*s), String::from(*s))).collect(),
            Protocol::Cross => cross_pairs(&settings.iter().map(|s| String::from(*s)).collect::<Vec<_>>()),
        };
        let missing: Vec<String> = pairs
            .iter()
            .flat_map(|(tr, te)| systems.iter().map(move |s| SourceKey::new(s, tr, te)))
            .filter(|k| !inputs.scores.contains_key(k))
            .map(|k| format!("{k}"))
            .collect();
        if !missing.is_empty() {
            return Err(Error::Invalid(format!("missing score files: {}", missing.join(", "))));
        }
        Ok(Runner {
            inputs,
            protocol,
            systems,
            fused,
            pairs,
        })
    }

    fn methods(&self) -> Vec<(String, MethodKind)> {
        let mut out = Vec::new();
        if let Some(b) = &self.inputs.baseline {
            out.push((b.clone(), MethodKind::Baseline));
        }
        out.extend(self.fused.iter().map(|s| (s.clone(), MethodKind::System)));
        let mut seen = BTreeSet::new();
        for &rule in &self.inputs.rules {
            if seen.insert(rule) {
                out.push((rule.fused_system_id(&self.fused), MethodKind::Fusion(rule)));
            }
        }
        out
    }

    fn run(&self) -> Result<ExperimentOutcome> {
        let methods = self.methods();
        let mut units = Vec::new();
        let mut correlations = Vec::new();
        let mut dropped = Vec::new();

        for (train, test) in &self.pairs {
            let set = |s: &str| &self.inputs.scores[&SourceKey::new(s, train, test)];
            let unit = |method: &str, kind, scores: ClassScores| -> Result<UnitResult> {
                let report = MetricsReport::compute(&scores)
                    .map_err(|e| Error::Invalid(format!("{method} on {train}->{test}: {e}")))?;
                Ok(UnitResult {
                    protocol: self.protocol,
                    train_setting: train.clone(),
                    test_setting: test.clone(),
                    method: String::from(method),
                    kind,
                    report,
                    scores,
                })
            };
            for s in &self.systems {
                let kind = if Some(s) == self.inputs.baseline.as_ref() {
                    MethodKind::Baseline
                } else {
                    MethodKind::System
                };
                units.push(unit(s, kind, set(s).class_scores())?);
            }
            if self.fused.len() >= 2 {
                let sets: Vec<&ScoreSet> = self.fused.iter().map(|s| set(s)).collect();
                let al = align_trials(&sets).map_err(|e| Error::Invalid(format!("{train}->{test}: {e}")))?;
                for (sys, n) in &al.dropped {
                    if *n > 0 {
                        dropped.push((train.clone(), test.clone(), sys.clone(), *n));
                    }
                }
                correlations.push((format!("{train}->{test}"), correlation_matrix(&al.matrix)));
                for (name, kind) in &methods {
                    if let MethodKind::Fusion(rule) = kind {
                        units.push(unit(name, *kind, fuse(&al.matrix, *rule).class_scores())?);
                    }
                }
            }
        }

        let table = self.table(&methods, &units, |_| true)?;
        let cross_tables = match self.protocol {
            Protocol::Cross => self.cross_tables(&methods, &units)?,
            Protocol::Intra => Vec::new(),
        };
        let by_distance = match self.protocol {
            Protocol::Intra => by_distance(&methods, &units),
            Protocol::Cross => Vec::new(),
        };
        Ok(ExperimentOutcome {
            protocol: self.protocol,
            aggregation: self.inputs.aggregation,
            methods,
            units,
            table,
            cross_tables,
            by_distance,
            correlations,
            dropped,
        })
    }

    fn table(
        &self,
        methods: &[(String, MethodKind)],
        units: &[UnitResult],
        keep: impl Fn(&UnitResult) -> bool,
    ) -> Result<Vec<AggregateRow>> {
        let mut rows = Vec::new();
        for (method, kind) in methods {
            let selected: Vec<&UnitResult> = units.iter().filter(|u| &u.method == method && keep(u)).collect();
            if selected.is_empty() {
                continue;
            }
            rows.push(AggregateRow {
                method: method.clone(),
                kind: *kind,
                report: aggregate(&selected, self.inputs.aggregation)?,
            });
        }
        Ok(rows)
    }

    fn cross_tables(
        &self,
        methods: &[(String, MethodKind)],
        units: &[UnitResult],
    ) -> Result<Vec<(CrossKind, Vec<AggregateRow>)>> {
        let mut kinds = BTreeMap::new();
        for (train, test) in &self.pairs {
            match (SettingDescriptor::parse(train), SettingDescriptor::parse(test)) {
                (Some(a), Some(b)) => {
                    if let Some(k) = classify_cross(&a, &b) {
                        kinds.insert((train.clone(), test.clone()), k);
                    }
                }
                _ => return Ok(Vec::new()),
            }
        }
        let mut out = Vec::new();
        for kind in CrossKind::ALL {
            let rows = self.table(methods, units, |u| {
                kinds.get(&(u.train_setting.clone(), u.test_setting.clone())) == Some(&kind)
            })?;
            if !rows.is_empty() {
                out.push((kind, rows));
            }
        }
        Ok(out)
    }
}

fn by_distance(methods: &[(String, MethodKind)], units: &[UnitResult]) -> Vec<DistanceGroup> {
    let mut groups: BTreeMap<(u32, String), (f64, usize)> = BTreeMap::new();
    for u in units {
        let Some(d) = SettingDescriptor::parse(&u.test_setting) else {
            return Vec::new();
        };
        let key = ((d.distance_m * 10.0) as u32, u.method.clone());
        let e = groups.entry(key).or_insert((0.0, 0));
        e.0 += u.report.auc_pct;
        e.1 += 1;
    }
    let mut out = Vec::new();
    let distances: BTreeSet<u32> = groups.keys().map(|(d, _)| *d).collect();
    for d in distances {
        for (method, _) in methods {
            if let Some((sum, n)) = groups.get(&(d, method.clone())) {
                out.push(DistanceGroup {
                    distance: format!("{}.{}m", d / 10, d % 10),
                    method: method.clone(),
                    auc_pct: sum / *n as f64,
                    n_settings: *n,
                });
            }
        }
    }
    out
}
