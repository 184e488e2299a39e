//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write as _;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use facefuse_core::fusion::{align_trials, fuse, FusionRule};
use facefuse_core::harness::{
    cross_pairs, run, ExperimentInputs, ExperimentOutcome, MethodKind, Protocol, SourceKey, SynthGenParams,
};
use facefuse_core::metrics::{correlation_matrix, roc_curve, MetricsReport};
use facefuse_core::scores::{score_trials, ScoreSet};
use facefuse_core::viewsynth::{normalize_mesh, Camera, PoseGridParams, Projection, Shading};

use crate::error::{Error, Result};
use crate::formats::config::{ExperimentConfig, SimulateConfig};
use crate::formats::{embeddings, obj, report, scores};
use crate::fs::{file_stem, write_atomic};
use crate::svg::{bar_chart_svg, bar_table_csv, roc_svg, BarTable};

#[derive(Debug, Parser)]
#[command(name = "facefuse", version, about = "Score-level fusion of face recognition systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for stochastic steps; overrides any seed in a config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<NonZeroUsize>,

    /// Only log errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProjArg {
    Persp,
    Ortho,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShadingArg {
    Flat,
    Lambert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Avg,
    Max,
    Min,
}

impl From<RuleArg> for FusionRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Avg => FusionRule::Avg,
            RuleArg::Max => FusionRule::Max,
            RuleArg::Min => FusionRule::Min,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a pose-enlarged gallery from a textured or plain OBJ mesh.
    Enlarge {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, default_value_t = 30.0)]
        max_az: f64,
        #[arg(long, default_value_t = 30.0)]
        max_el: f64,
        #[arg(long, default_value_t = 10.0)]
        offset: f64,
        /// Square image side in pixels.
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long, value_enum, default_value_t = ProjArg::Persp)]
        proj: ProjArg,
        /// Vertical field of view in degrees.
        #[arg(long, default_value_t = 20.0)]
        fov: f64,
        /// Camera distance in normalized mesh units.
        #[arg(long, default_value_t = 8.0)]
        distance: f64,
        #[arg(long, value_enum, default_value_t = ShadingArg::Lambert)]
        shading: ShadingArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score every probe against every reference.
    Score {
        #[arg(long)]
        references: PathBuf,
        #[arg(long)]
        probes: PathBuf,
        #[arg(long)]
        system: String,
        /// Setting for probes that carry none.
        #[arg(long, default_value = "default")]
        setting: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fuse the systems found in the given score files.
    Fuse {
        #[arg(long, num_args = 1.., required = true)]
        scores: Vec<PathBuf>,
        #[arg(long, value_enum, default_values_t = [RuleArg::Avg])]
        rule: Vec<RuleArg>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute metrics, ROC charts and correlations for score files.
    Eval {
        #[arg(long, num_args = 1.., required = true)]
        scores: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write ROC points as CSV.
        #[arg(long)]
        points: bool,
    },
    /// Run an intra- or cross-setting experiment from a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate synthetic correlated scores and a matching experiment config.
    Simulate {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    }
}

pub fn threads(cli: &Cli) -> NonZeroUsize {
    cli.threads
        .unwrap_or_else(|| std::thread::available_parallelism().unwrap_or(NonZeroUsize::MIN))
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Enlarge {
            mesh,
            max_az,
            max_el,
            offset,
            size,
            proj,
            fov,
            distance,
            shading,
            out,
        } => {
            let projection = match proj {
                ProjArg::Persp => Projection::Perspective,
                ProjArg::Ortho => Projection::Orthographic,
            };
            let shading = match shading {
                ShadingArg::Flat => Shading::Flat,
                ShadingArg::Lambert => Shading::Lambert,
            };
            let cam = Camera::new(projection, *fov, *distance, *size, *size)?;
            let grid = PoseGridParams::new(*max_az, *max_el, *offset)?;
            enlarge(mesh, &grid, &cam, shading, out, threads(cli))
        }
        Command::Score {
            references,
            probes,
            system,
            setting,
            out,
        } => score(references, probes, system, setting, out),
        Command::Fuse { scores, rule, out } => {
            let rules: Vec<FusionRule> = rule.iter().map(|&r| r.into()).collect();
            fuse_files(scores, &rules, out)
        }
        Command::Eval { scores, out, points } => eval(scores, out, *points),
        Command::Experiment { config } => {
            let mut cfg = ExperimentConfig::load(config)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let outcome = experiment(&cfg)?;
            for row in &outcome.table {
                println!(
                    "{}\tAUC={:.2}%\tEER={:.2}%",
                    row.method, row.report.auc_pct, row.report.eer_pct
                );
            }
            Ok(())
        }
        Command::Simulate { params, out } => {
            let mut cfg = SimulateConfig::load(params)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            simulate(&cfg, out).map(|_| ())
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::write(dir, e))
}

pub fn enlarge(
    mesh: &Path,
    grid: &PoseGridParams,
    cam: &Camera,
    shading: Shading,
    out: &Path,
    threads: NonZeroUsize,
) -> Result<()> {
    let m = normalize_mesh(&obj::load(mesh)?)?;
    let views = crate::render::enlarge_gallery_parallel(&m, grid, cam, shading, threads)?;
    ensure_dir(out)?;
    for v in &views {
        write_atomic(
            &out.join(report::view_filename(&v.pose)),
            &crate::image_io::encode_png(v)?,
        )?;
    }
    let poses: Vec<_> = views.iter().map(|v| v.pose).collect();
    write_atomic(&out.join("manifest.csv"), &report::manifest_to_csv(&poses)?)?;
    log::info!("wrote {} views to {}", views.len(), out.display());
    Ok(())
}

pub fn score(references: &Path, probes: &Path, system: &str, setting: &str, out: &Path) -> Result<()> {
    let refs = embeddings::load(references)?;
    let probes = embeddings::load(probes)?;
    let set = score_trials(&refs, &probes, system, setting)?;
    write_atomic(out, &scores::to_csv([&set])?)?;
    log::info!("wrote {} trials to {}", set.len(), out.display());
    Ok(())
}

/// Loads score files, rejecting a system that appears in more than one.
pub fn load_sets(paths: &[PathBuf]) -> Result<Vec<ScoreSet>> {
    let mut by_id: BTreeMap<String, (ScoreSet, &Path)> = BTreeMap::new();
    for p in paths {
        for set in scores::load(p)? {
            if let Some((_, first)) = by_id.get(&set.system_id) {
                return Err(Error::Validation(format!(
                    "system {} appears in both {} and {}",
                    set.system_id,
                    first.display(),
                    p.display()
                )));
            }
            by_id.insert(set.system_id.clone(), (set, p));
        }
    }
    Ok(by_id.into_values().map(|(s, _)| s).collect())
}

pub fn fuse_files(paths: &[PathBuf], rules: &[FusionRule], out: &Path) -> Result<()> {
    let sets = load_sets(paths)?;
    let refs: Vec<&ScoreSet> = sets.iter().collect();
    let al = align_trials(&refs)?;
    for (sys, n) in &al.dropped {
        if *n > 0 {
            log::warn!("{sys}: {n} trials missing from other systems were dropped");
        }
    }
    let mut rules = rules.to_vec();
    rules.sort();
    rules.dedup();
    let fused: Vec<ScoreSet> = rules.iter().map(|&r| fuse(&al.matrix, r)).collect();
    write_atomic(out, &scores::to_csv(&fused)?)?;
    log::info!(
        "fused {} trials of {} systems into {}",
        al.matrix.len(),
        refs.len(),
        out.display()
    );
    Ok(())
}

pub fn eval(paths: &[PathBuf], out: &Path, points: bool) -> Result<()> {
    let sets = load_sets(paths)?;
    ensure_dir(out)?;
    let mut rows = Vec::new();
    let mut stdout = std::io::stdout().lock();
    for set in &sets {
        for setting in set.settings() {
            let sub = set.filter_setting(&setting);
            let cs = sub.class_scores();
            let r = MetricsReport::compute(&cs)
                .map_err(|e| Error::Validation(format!("{} on {setting}: {e}", set.system_id)))?;
            let roc = roc_curve(&cs)?;
            let stem = format!("roc_{}_{}", file_stem(&set.system_id), file_stem(&setting));
            write_atomic(
                &out.join(format!("{stem}.svg")),
                roc_svg(&roc, &format!("{} / {setting}", set.system_id)).as_bytes(),
            )?;
            if points {
                write_atomic(&out.join(format!("{stem}.csv")), &report::roc_to_csv(&roc)?)?;
            }
            let _ = writeln!(stdout, "{}\t{setting}\tAUC={:.2}%", set.system_id, r.auc_pct);
            rows.push((set.system_id.clone(), setting, r));
        }
    }
    write_atomic(&out.join("metrics.csv"), &report::eval_to_csv(&rows)?)?;
    if sets.len() >= 2 {
        let settings: std::collections::BTreeSet<String> = sets.iter().flat_map(|s| s.settings()).collect();
        for setting in settings {
            let subs: Vec<ScoreSet> = sets
                .iter()
                .map(|s| s.filter_setting(&setting))
                .filter(|s| !s.is_empty())
                .collect();
            if subs.len() < 2 {
                continue;
            }
            let refs: Vec<&ScoreSet> = subs.iter().collect();
            match align_trials(&refs) {
                Ok(al) => write_atomic(
                    &out.join(format!("correlation_{}.csv", file_stem(&setting))),
                    &report::correlation_to_csv(&correlation_matrix(&al.matrix))?,
                )?,
                Err(e) => log::warn!("no correlation for {setting}: {e}"),
            }
        }
    }
    Ok(())
}

/// Picks the set for `key` out of a loaded file, restricted to the test setting.
fn select_set(key: &SourceKey, path: &Path, sets: Vec<ScoreSet>) -> Result<ScoreSet> {
    let set = sets.into_iter().find(|s| s.system_id == key.system_id).ok_or_else(|| {
        Error::Validation(format!(
            "{}: no scores for system {} ({key})",
            path.display(),
            key.system_id
        ))
    })?;
    let settings = set.settings();
    if settings.len() == 1 {
        return Ok(set);
    }
    let sub = set.filter_setting(&key.test_setting);
    if sub.is_empty() {
        return Err(Error::Validation(format!(
            "{}: no trials for setting {} ({key})",
            path.display(),
            key.test_setting
        )));
    }
    Ok(sub)
}

fn table_rows(rows: &[facefuse_core::harness::AggregateRow]) -> Vec<report::TableRow> {
    rows.iter().map(report::TableRow::from).collect()
}

fn auc_chart(outcome: &ExperimentOutcome) -> Option<BarTable> {
    let mut series: Vec<String> = outcome
        .units
        .iter()
        .map(|u| match outcome.protocol {
            Protocol::Intra => u.test_setting.clone(),
            Protocol::Cross => format!("{}->{}", u.train_setting, u.test_setting),
        })
        .collect();
    series.sort();
    series.dedup();
    if series.is_empty() || outcome.methods.is_empty() {
        return None;
    }
    let mut values = vec![vec![None; series.len()]; outcome.methods.len()];
    for u in &outcome.units {
        let m = outcome.methods.iter().position(|(name, _)| *name == u.method)?;
        let label = match outcome.protocol {
            Protocol::Intra => u.test_setting.clone(),
            Protocol::Cross => format!("{}->{}", u.train_setting, u.test_setting),
        };
        let s = series.binary_search(&label).ok()?;
        values[m][s] = Some(u.report.auc_pct);
    }
    Some(BarTable {
        title: format!("AUC per setting ({} protocol)", outcome.protocol),
        value_label: "AUC (%)".into(),
        groups: outcome.methods.iter().map(|(n, _)| n.clone()).collect(),
        series,
        values,
    })
}

fn kind_str(k: MethodKind) -> &'static str {
    match k {
        MethodKind::Baseline => "baseline",
        MethodKind::System => "system",
        MethodKind::Fusion(_) => "fusion",
    }
}

/// Loads every score file named in `cfg`, runs the protocol and writes the report directory.
pub fn experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let mut cache: BTreeMap<&Path, Vec<ScoreSet>> = BTreeMap::new();
    let mut inputs = ExperimentInputs {
        protocol: Some(cfg.protocol),
        baseline: cfg.baseline.clone(),
        rules: cfg.rules.clone(),
        aggregation: cfg.aggregation,
        ..Default::default()
    };
    for (key, path) in &cfg.scores {
        if !cache.contains_key(path.as_path()) {
            cache.insert(path, scores::load(path)?);
        }
        let set = select_set(key, path, cache[path.as_path()].clone())?;
        inputs.scores.insert(key.clone(), set);
    }
    let outcome = run(&inputs)?;
    write_outcome(&outcome, cfg)?;
    Ok(outcome)
}

fn write_outcome(o: &ExperimentOutcome, cfg: &ExperimentConfig) -> Result<()> {
    let dir = &cfg.output;
    ensure_dir(dir)?;
    let p = o.protocol.as_str();
    write_atomic(
        &dir.join(format!("table_{p}.csv")),
        &report::table_to_csv(&table_rows(&o.table))?,
    )?;
    write_atomic(
        &dir.join(format!("breakdown_{p}.csv")),
        &report::breakdown_to_csv(&o.units)?,
    )?;
    for (kind, rows) in &o.cross_tables {
        write_atomic(
            &dir.join(format!("table_{}.csv", kind.as_str())),
            &report::table_to_csv(&table_rows(rows))?,
        )?;
    }
    if !o.by_distance.is_empty() {
        write_atomic(
            &dir.join("by_distance.csv"),
            &report::by_distance_to_csv(&o.by_distance)?,
        )?;
    }
    for (label, m) in &o.correlations {
        let name = format!("correlation_{}.csv", file_stem(&label.replace("->", "_to_")));
        write_atomic(&dir.join(name), &report::correlation_to_csv(m)?)?;
    }
    if let Some(chart) = auc_chart(o) {
        write_atomic(&dir.join(format!("auc_{p}.svg")), bar_chart_svg(&chart)?.as_bytes())?;
        write_atomic(&dir.join(format!("auc_{p}.csv")), &bar_table_csv(&chart)?)?;
    }
    let mut meta = String::new();
    meta.push_str(&format!(
        "protocol = {p}\naggregation = {}\nseed = {}\n",
        o.aggregation.as_str(),
        cfg.seed
    ));
    for (name, kind) in &o.methods {
        meta.push_str(&format!("method.{} = {}\n", name, kind_str(*kind)));
    }
    for (train, test, sys, n) in &o.dropped {
        meta.push_str(&format!("dropped.{sys}.{train}.{test} = {n}\n"));
    }
    write_atomic(&dir.join("run.meta"), meta.as_bytes())?;
    log::info!("wrote report to {}", dir.display());
    Ok(())
}

/// Writes one score file per system and setting pair plus `experiment.cfg`;
/// returns the config path.
pub fn simulate(cfg: &SimulateConfig, out: &Path) -> Result<PathBuf> {
    ensure_dir(out)?;
    let pairs: Vec<(String, String)> = match cfg.protocol {
        Protocol::Intra => cfg.settings.iter().map(|s| (s.clone(), s.clone())).collect(),
        Protocol::Cross => cross_pairs(&cfg.settings),
    };
    if pairs.is_empty() {
        return Err(Error::Validation("cross protocol needs at least two settings".into()));
    }
    let mut files = BTreeMap::new();
    for (i, (train, test)) in pairs.iter().enumerate() {
        let p = SynthGenParams {
            systems: cfg.systems.clone(),
            rho: cfg.rho,
            n_genuine: cfg.n_genuine,
            n_impostor: cfg.n_impostor,
            seed: cfg.seed.wrapping_add(i as u64),
            setting_id: test.clone(),
        };
        for set in facefuse_core::harness::synth_scores(&p)? {
            let name = format!(
                "scores_{}_{}_{}.csv",
                file_stem(&set.system_id),
                file_stem(train),
                file_stem(test)
            );
            let path = out.join(&name);
            write_atomic(&path, &scores::to_csv([&set])?)?;
            files.insert(SourceKey::new(&set.system_id, train, test), path);
        }
    }
    let exp = ExperimentConfig {
        protocol: cfg.protocol,
        aggregation: cfg.aggregation,
        rules: cfg.rules.clone(),
        baseline: None,
        seed: cfg.seed,
        output: out.join("report"),
        scores: files,
    };
    let path = out.join("experiment.cfg");
    write_atomic(&path, exp.to_text(out).as_bytes())?;
    log::info!("wrote {} score files and {}", exp.scores.len(), path.display());
    Ok(path)
}
