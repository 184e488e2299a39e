//! Flat `key = value` configuration files.
//!
//! One entry per line; `#` starts a comment; blank lines are ignored; keys
//! may not repeat. Relative paths resolve against the file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use facefuse_core::fusion::FusionRule;
use facefuse_core::harness::{Aggregation, ClassParams, Protocol, SourceKey, SystemParams};

use crate::error::{Error, Result};

/// Ordered `key -> (value, line)` entries of a config file.
#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    pub path: PathBuf,
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValues {
    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| Error::format(path, line, format!("expected `key = value`, got {content:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::format(path, line, "empty key"));
            }
            if let Some((_, prev)) = entries.insert(k.to_string(), (v.to_string(), line)) {
                return Err(Error::format(path, line, format!("key {k} already set on line {prev}")));
            }
        }
        Ok(KeyValues {
            path: path.to_path_buf(),
            entries,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, usize)> {
        self.entries.iter().map(|(k, (v, l))| (k.as_str(), v.as_str(), *l))
    }

    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn dir(&self) -> &Path {
        self.path.parent().unwrap_or(Path::new("."))
    }

    fn parsed<T>(&self, key: &str, f: impl Fn(&str) -> Option<T>, what: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => f(v)
                .map(Some)
                .ok_or_else(|| Error::format(&self.path, line, format!("{key}: expected {what}, got {v:?}"))),
        }
    }
}

fn parse_rules(v: &str) -> Option<Vec<FusionRule>> {
    if v.trim().is_empty() || v.trim() == "none" {
        return Some(Vec::new());
    }
    v.split(',').map(FusionRule::parse).collect()
}

fn valid_id(s: &str) -> bool {
    !s.is_empty() && !s.contains(['.', '=', '#']) && !s.contains(char::is_whitespace)
}

/// Parsed experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    pub aggregation: Aggregation,
    pub rules: Vec<FusionRule>,
    pub baseline: Option<String>,
    pub seed: u64,
    pub output: PathBuf,
    pub scores: BTreeMap<SourceKey, PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let kv = KeyValues::parse(path, text)?;
        let mut scores = BTreeMap::new();
        for (k, v, line) in kv.iter() {
            match k {
                "protocol" | "aggregation" | "fusion" | "baseline" | "seed" | "output" => {}
                _ if k.starts_with("scores.") => {
                    let parts: Vec<&str> = k.split('.').collect();
                    if parts.len() != 4 || !parts[1..].iter().all(|p| valid_id(p)) {
                        return Err(Error::format(
                            path,
                            line,
                            format!("expected scores.<system>.<train_setting>.<test_setting>, got {k}"),
                        ));
                    }
                    scores.insert(
                        SourceKey::new(parts[1], parts[2], parts[3]),
                        crate::fs::resolve(kv.dir(), v),
                    );
                }
                _ => return Err(Error::format(path, line, format!("unknown key {k}"))),
            }
        }
        let protocol = kv
            .parsed("protocol", Protocol::parse, "intra or cross")?
            .ok_or_else(|| Error::format(path, 0, "missing required key protocol"))?;
        if scores.is_empty() {
            return Err(Error::format(path, 0, "no scores.<system>.<train>.<test> entries"));
        }
        Ok(ExperimentConfig {
            protocol,
            aggregation: kv
                .parsed("aggregation", Aggregation::parse, "macro or pooled")?
                .unwrap_or_default(),
            rules: kv
                .parsed("fusion", parse_rules, "comma-separated avg, max, min")?
                .unwrap_or_default(),
            baseline: kv.get("baseline").map(|(v, _)| v.to_string()),
            seed: kv
                .parsed("seed", |v| v.parse().ok(), "an unsigned integer")?
                .unwrap_or(0),
            output: kv
                .get("output")
                .map(|(v, _)| crate::fs::resolve(kv.dir(), v))
                .unwrap_or_else(|| kv.dir().join("report")),
            scores,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(path, &crate::fs::read_to_string(path)?)
    }

    /// Serializes with paths relative to `dir` where possible.
    pub fn to_text(&self, dir: &Path) -> String {
        let rel = |p: &Path| p.strip_prefix(dir).unwrap_or(p).display().to_string();
        let mut s = String::new();
        s.push_str(&format!("protocol = {}\n", self.protocol));
        s.push_str(&format!("aggregation = {}\n", self.aggregation.as_str()));
        let rules: Vec<&str> = self.rules.iter().map(|r| r.as_str()).collect();
        s.push_str(&format!(
            "fusion = {}\n",
            if rules.is_empty() {
                "none".to_string()
            } else {
                rules.join(",")
            }
        ));
        if let Some(b) = &self.baseline {
            s.push_str(&format!("baseline = {b}\n"));
        }
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("output = {}\n", rel(&self.output)));
        for (k, p) in &self.scores {
            s.push_str(&format!("{k} = {}\n", rel(p)));
        }
        s
    }
}

/// Parameters of the `simulate` subcommand.
#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub protocol: Protocol,
    pub settings: Vec<String>,
    pub systems: Vec<SystemParams>,
    pub rho: f64,
    pub n_genuine: usize,
    pub n_impostor: usize,
    pub seed: u64,
    pub rules: Vec<FusionRule>,
    pub aggregation: Aggregation,
}

fn parse_pair(v: &str) -> Option<ClassParams> {
    let (m, s) = v.split_once(',')?;
    Some(ClassParams {
        mean: m.trim().parse().ok()?,
        std: s.trim().parse().ok()?,
    })
}

impl SimulateConfig {
    /// Systems are declared as `system.<id>.impostor = mean, std` plus either
    /// `system.<id>.genuine = mean, std` or `system.<id>.auc = <fraction>`
    /// (genuine spread then equals the impostor spread).
    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let kv = KeyValues::parse(path, text)?;
        let mut systems: BTreeMap<String, BTreeMap<String, (String, usize)>> = BTreeMap::new();
        for (k, v, line) in kv.iter() {
            match k {
                "protocol" | "settings" | "rho" | "n_genuine" | "n_impostor" | "seed" | "fusion" | "aggregation" => {}
                _ if k.starts_with("system.") => {
                    let parts: Vec<&str> = k.split('.').collect();
                    if parts.len() != 3 || !valid_id(parts[1]) || !["genuine", "impostor", "auc"].contains(&parts[2]) {
                        return Err(Error::format(
                            path,
                            line,
                            format!("expected system.<id>.(genuine|impostor|auc), got {k}"),
                        ));
                    }
                    systems
                        .entry(parts[1].to_string())
                        .or_default()
                        .insert(parts[2].to_string(), (v.to_string(), line));
                }
                _ => return Err(Error::format(path, line, format!("unknown key {k}"))),
            }
        }
        let mut parsed = Vec::new();
        for (id, fields) in &systems {
            let field = |name: &str| fields.get(name).map(|(v, l)| (v.as_str(), *l));
            let (imp, line) = field("impostor")
                .ok_or_else(|| Error::format(path, 0, format!("system {id} lacks an impostor entry")))?;
            let impostor = parse_pair(imp).ok_or_else(|| Error::format(path, line, "expected `mean, std`"))?;
            let sys = match (field("genuine"), field("auc")) {
                (Some((g, line)), None) => SystemParams {
                    system_id: id.clone(),
                    genuine: parse_pair(g).ok_or_else(|| Error::format(path, line, "expected `mean, std`"))?,
                    impostor,
                },
                (None, Some((a, line))) => {
                    let auc: f64 = a
                        .parse()
                        .map_err(|_| Error::format(path, line, "expected an AUC fraction"))?;
                    SystemParams::for_auc(id, auc, impostor, impostor.std)
                        .map_err(|e| Error::format(path, line, e.to_string()))?
                }
                _ => {
                    return Err(Error::format(
                        path,
                        0,
                        format!("system {id} needs exactly one of genuine or auc"),
                    ))
                }
            };
            parsed.push(sys);
        }
        let settings: Vec<String> = match kv.get("settings") {
            None => vec!["synth".to_string()],
            Some((v, line)) => {
                let s: Vec<String> = v.split(',').map(|s| s.trim().to_string()).collect();
                if !s.iter().all(|x| valid_id(x)) {
                    return Err(Error::format(
                        path,
                        line,
                        "setting ids must be non-empty and contain no dots",
                    ));
                }
                s
            }
        };
        let usize_of = |v: &str| v.parse::<usize>().ok();
        Ok(SimulateConfig {
            protocol: kv
                .parsed("protocol", Protocol::parse, "intra or cross")?
                .unwrap_or(Protocol::Intra),
            settings,
            systems: parsed,
            rho: kv.parsed("rho", |v| v.parse().ok(), "a real in [0, 1)")?.unwrap_or(0.0),
            n_genuine: kv.parsed("n_genuine", usize_of, "a count")?.unwrap_or(1000),
            n_impostor: kv.parsed("n_impostor", usize_of, "a count")?.unwrap_or(1000),
            seed: kv
                .parsed("seed", |v| v.parse().ok(), "an unsigned integer")?
                .unwrap_or(0),
            rules: kv
                .parsed("fusion", parse_rules, "comma-separated avg, max, min")?
                .unwrap_or_else(|| FusionRule::ALL.to_vec()),
            aggregation: kv
                .parsed("aggregation", Aggregation::parse, "macro or pooled")?
                .unwrap_or_default(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(path, &crate::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CFG: &str = "\
# intra-setting run
protocol = intra
fusion = avg, max,min
baseline = plain
scores.plain.cam1_1m0.cam1_1m0 = plain.csv
scores.eos.cam1_1m0.cam1_1m0 = /abs/eos.csv
";

    #[test]
    fn experiment_config() {
        let c = ExperimentConfig::parse(Path::new("/x/exp.cfg"), CFG).unwrap();
        assert_eq!(c.protocol, Protocol::Intra);
        assert_eq!(c.rules, [FusionRule::Avg, FusionRule::Max, FusionRule::Min]);
        assert_eq!(c.aggregation, Aggregation::Macro);
        assert_eq!(
            c.scores[&SourceKey::new("plain", "cam1_1m0", "cam1_1m0")],
            Path::new("/x/plain.csv")
        );
        assert_eq!(
            c.scores[&SourceKey::new("eos", "cam1_1m0", "cam1_1m0")],
            Path::new("/abs/eos.csv")
        );
        assert_eq!(c.output, Path::new("/x/report"));
        let again = ExperimentConfig::parse(Path::new("/x/exp.cfg"), &c.to_text(Path::new("/x"))).unwrap();
        assert_eq!(again.scores, c.scores);
        assert_eq!(again.rules, c.rules);
    }

    #[test]
    fn experiment_config_errors_cite_lines() {
        let bad = CFG.replace("fusion = avg, max,min", "fusion = avg, median");
        assert!(ExperimentConfig::parse(Path::new("e.cfg"), &bad)
            .unwrap_err()
            .to_string()
            .starts_with("e.cfg:3:"));
        let bad = format!("{CFG}colour = blue\n");
        assert!(ExperimentConfig::parse(Path::new("e.cfg"), &bad)
            .unwrap_err()
            .to_string()
            .contains("unknown key colour"));
        let bad = format!("{CFG}scores.a.b = x.csv\n");
        assert!(ExperimentConfig::parse(Path::new("e.cfg"), &bad).is_err());
        let bad = format!("{CFG}protocol = cross\n");
        assert!(ExperimentConfig::parse(Path::new("e.cfg"), &bad)
            .unwrap_err()
            .to_string()
            .contains("line 2"));
    }

    #[test]
    fn simulate_config() {
        let text = "rho = 0.1\nseed = 4\nn_genuine = 10\nsystem.a.impostor = 0, 1\nsystem.a.auc = 0.8\nsystem.b.impostor = 0, 1\nsystem.b.genuine = 1, 1\n";
        let c = SimulateConfig::parse(Path::new("s.cfg"), text).unwrap();
        assert_eq!(c.systems.len(), 2);
        assert!((facefuse_core::harness::analytic_auc(&c.systems[0]) - 0.8).abs() < 1e-12);
        assert_eq!(c.settings, ["synth"]);
        assert_eq!((c.n_genuine, c.n_impostor), (10, 1000));
        let bad = "system.a.impostor = 0, 1\n";
        assert!(SimulateConfig::parse(Path::new("s.cfg"), bad).is_err());
    }
}
