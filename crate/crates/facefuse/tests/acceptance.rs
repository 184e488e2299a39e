//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::num::NonZeroUsize;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use facefuse::formats::{obj, report};
use facefuse::render::{enlarge_gallery_parallel, rasterize_parallel};
use facefuse_core::fusion::{align_trials, fuse, FusionRule, TrialMatrix};
use facefuse_core::harness::{
    classify_cross, cross_pairs, partition_identities, synth_scores, ClassParams, CrossKind, SettingDescriptor,
    SynthGenParams, SystemParams,
};
use facefuse_core::metrics::{auc, cohens_d, correlation_matrix, eer, error_at_operating_point, FixedRate};
use facefuse_core::scores::{ClassScores, ScoreSet};
use facefuse_core::viewsynth::{
    normalize_mesh, pose_grid, rasterize, Camera, Mesh, Pose, PoseGridParams, Projection, Shading,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    check(t < limit, || format!("took {t:.2?}, limit {limit:?}"))?;
    Ok(t)
}

fn pose_grid_fidelity() -> Outcome {
    let start = Instant::now();
    let grid = pose_grid(&PoseGridParams::default()).map_err(|e| e.to_string())?;
    check(grid.len() == 49, || format!("{} poses", grid.len()))?;
    for (az, el) in [(0.0, 0.0), (-30.0, -30.0), (30.0, 30.0)] {
        check(
            grid.contains(&Pose {
                azimuth_deg: az,
                elevation_deg: el,
            }),
            || format!("missing ({az}, {el})"),
        )?;
    }
    check(
        grid.first()
            == Some(&Pose {
                azimuth_deg: -30.0,
                elevation_deg: -30.0,
            }),
        || "first pose".into(),
    )?;
    check(
        grid[1]
            == Pose {
                azimuth_deg: -20.0,
                elevation_deg: -30.0,
            },
        || "azimuth is not the inner loop".into(),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        // dyadic offsets keep the reference loop's accumulation exact
        let n = rng.random_range(0..=90) as f64;
        let m = rng.random_range(0..=90) as f64;
        let offset = rng.random_range(2..=120) as f64 / 4.0;
        let mut expected = Vec::new();
        let mut el = -m;
        while el <= m {
            let mut az = -n;
            while az <= n {
                expected.push(Pose {
                    azimuth_deg: az,
                    elevation_deg: el,
                });
                az += offset;
            }
            el += offset;
        }
        let got =
            pose_grid(&PoseGridParams::new(n, m, offset).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        check(got == expected, || {
            format!("grid mismatch for N={n} M={m} offset={offset}")
        })?;
    }
    let t = within(start, Duration::from_secs(1))?;
    Ok(format!("49 poses, 100 random grids match loop oracle, {t:.2?}"))
}

fn random_class_scores(rng: &mut ChaCha8Rng, ng: usize, ni: usize, levels: Option<u32>) -> ClassScores {
    let mut draw = |shift: f64| {
        let x: f64 = (rng.random::<f64>() * 0.8 + shift).min(1.0);
        match levels {
            Some(l) => ((x * l as f64).ceil().max(1.0)) / l as f64,
            None => x.max(f64::MIN_POSITIVE),
        }
    };
    let genuine = (0..ng).map(|_| draw(0.2)).collect();
    let impostor = (0..ni).map(|_| draw(0.0)).collect();
    ClassScores::new(genuine, impostor)
}

fn mann_whitney(s: &ClassScores) -> f64 {
    let mut twice = 0u64;
    for &g in &s.genuine {
        for &i in &s.impostor {
            twice += if g > i {
                2
            } else if g == i {
                1
            } else {
                0
            };
        }
    }
    twice as f64 / (2 * s.genuine.len() * s.impostor.len()) as f64
}

fn auc_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let total = rng.random_range(4..=2000);
        let ng = rng.random_range(1..total);
        let levels = match k % 3 {
            0 => None,
            1 => Some(rng.random_range(2..=20)),
            _ => Some(rng.random_range(50..=500)),
        };
        let s = random_class_scores(&mut rng, ng, total - ng, levels);
        let a = auc(&s).map_err(|e| e.to_string())? / 100.0;
        let diff = (a - mann_whitney(&s)).abs();
        worst = worst.max(diff);
        check(diff <= 1e-9, || format!("set {k}: AUC differs by {diff:e}"))?;
    }
    let t = within(start, Duration::from_secs(10))?;
    Ok(format!("200 sets, worst |AUC - MW| = {worst:.1e}, {t:.2?}"))
}

fn sweep_eer(s: &ClassScores, steps: usize) -> f64 {
    let mut g = s.genuine.clone();
    let mut i = s.impostor.clone();
    g.sort_by(f64::total_cmp);
    i.sort_by(f64::total_cmp);
    let (ng, ni) = (g.len() as f64, i.len() as f64);
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..steps {
        let t = k as f64 / (steps - 1) as f64;
        let fnmr = g.partition_point(|&x| x < t) as f64 / ng;
        let fmr = (i.len() - i.partition_point(|&x| x < t)) as f64 / ni;
        let gap = (fmr - fnmr).abs();
        if gap < best.0 {
            best = (gap, 0.5 * (fmr + fnmr));
        }
    }
    best.1 * 100.0
}

fn eer_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let ng = rng.random_range(1000..=2000);
        let ni = rng.random_range(1000..=2000);
        let s = random_class_scores(&mut rng, ng, ni, None);
        let e = eer(&s).map_err(|e| e.to_string())?;
        let diff = (e - sweep_eer(&s, 100_000)).abs();
        worst = worst.max(diff);
        check(diff <= 0.1, || format!("set {k}: EER differs from sweep by {diff} pp"))?;
    }
    let t = within(start, Duration::from_secs(10))?;
    Ok(format!("100 sets, worst deviation {worst:.4} pp, {t:.2?}"))
}

fn calibrated(seed: u64) -> SynthGenParams {
    let impostor = ClassParams { mean: -0.5, std: 1.0 };
    let sys = |id: &str, a: f64| SystemParams::for_auc(id, a, impostor, 1.0).expect("valid AUC");
    SynthGenParams {
        systems: vec![sys("sys_a", 0.74), sys("sys_b", 0.77), sys("sys_c", 0.80)],
        rho: 0.1,
        n_genuine: 2000,
        n_impostor: 2000,
        seed,
        setting_id: "synth".into(),
    }
}

fn align(sets: &[ScoreSet]) -> Result<TrialMatrix, String> {
    let refs: Vec<&ScoreSet> = sets.iter().collect();
    Ok(align_trials(&refs).map_err(|e| e.to_string())?.matrix)
}

fn fusion_ordering() -> Outcome {
    let mut rows = 0usize;
    for seed in 0..100 {
        let m = align(&synth_scores(&calibrated(seed)).map_err(|e| e.to_string())?)?;
        let [avg, max, min] = [FusionRule::Avg, FusionRule::Max, FusionRule::Min].map(|r| fuse(&m, r));
        for ((a, hi), lo) in avg.records().iter().zip(max.records()).zip(min.records()) {
            check(a.key == hi.key && a.key == lo.key, || "fused sets not aligned".into())?;
            check(lo.score <= a.score && a.score <= hi.score, || {
                format!("seed {seed}: min {} avg {} max {}", lo.score, a.score, hi.score)
            })?;
            rows += 1;
        }
    }
    let base = synth_scores(&calibrated(7)).map_err(|e| e.to_string())?.remove(0);
    for n in [2, 3, 5] {
        let copies: Vec<ScoreSet> = (0..n)
            .map(|k| {
                let mut s = base.clone();
                s.system_id = format!("copy{k}");
                s
            })
            .collect();
        let m = align(&copies)?;
        for rule in FusionRule::ALL {
            let f = fuse(&m, rule);
            let same = f
                .records()
                .iter()
                .zip(base.records())
                .all(|(x, y)| x.score.to_bits() == y.score.to_bits());
            check(same && f.len() == base.len(), || {
                format!("{n} identical systems, {} not bit-exact", rule.as_str())
            })?;
        }
    }
    Ok(format!(
        "{rows} fused rows ordered; identical inputs reproduced bit-exactly"
    ))
}

fn rank_invariance() -> Outcome {
    let mut changed_d = 0;
    for seed in 0..20 {
        for set in synth_scores(&calibrated(100 + seed)).map_err(|e| e.to_string())? {
            let cubed = set.map_scores(|x| x * x * x).map_err(|e| e.to_string())?;
            let (a, b) = (set.class_scores(), cubed.class_scores());
            let m = |s: &ClassScores| -> Result<[f64; 4], String> {
                let e = |x: facefuse_core::Result<f64>| x.map_err(|e| e.to_string());
                Ok([
                    e(auc(s))?,
                    e(eer(s))?,
                    error_at_operating_point(s, FixedRate::Fnmr, 1.0)
                        .map_err(|e| e.to_string())?
                        .error_pct,
                    error_at_operating_point(s, FixedRate::Fmr, 1.0)
                        .map_err(|e| e.to_string())?
                        .error_pct,
                ])
            };
            let (ma, mb) = (m(&a)?, m(&b)?);
            check(ma == mb, || format!("seed {seed} {}: {ma:?} vs {mb:?}", set.system_id))?;
            let (da, db) = (
                cohens_d(&a).map_err(|e| e.to_string())?,
                cohens_d(&b).map_err(|e| e.to_string())?,
            );
            if (da - db).abs() > 1e-6 {
                changed_d += 1;
            }
        }
    }
    check(changed_d == 60, || {
        format!("Cohen's d changed in only {changed_d} of 60 sets")
    })?;
    Ok("AUC, EER and both operating points unchanged under x^3 in 60 sets; Cohen's d changed in all".into())
}

fn fusion_gain() -> Outcome {
    let start = Instant::now();
    let (mut beats_best, mut beats_minmax) = (0, 0);
    let mut pcc_sum = 0.0;
    let mut single_range = (f64::INFINITY, f64::NEG_INFINITY);
    for seed in 0..100 {
        let sets = synth_scores(&calibrated(seed)).map_err(|e| e.to_string())?;
        let m = align(&sets)?;
        let c = correlation_matrix(&m);
        let pccs = [(0, 1), (0, 2), (1, 2)].map(|(i, j)| c.values[i][j].unwrap_or(f64::NAN));
        pcc_sum += pccs.iter().sum::<f64>() / 3.0;
        let mut best: f64 = 0.0;
        for s in &sets {
            let a = auc(&s.class_scores()).map_err(|e| e.to_string())?;
            single_range = (single_range.0.min(a), single_range.1.max(a));
            best = best.max(a);
        }
        let f = |r| auc(&fuse(&m, r).class_scores()).map_err(|e| e.to_string());
        let (avg, max, min) = (f(FusionRule::Avg)?, f(FusionRule::Max)?, f(FusionRule::Min)?);
        beats_best += (avg > best) as usize;
        beats_minmax += (avg > max && avg > min) as usize;
    }
    let pcc = pcc_sum / 100.0;
    check((0.25..=0.35).contains(&pcc), || {
        format!("mean pairwise PCC {pcc:.3} not near 0.3")
    })?;
    check(single_range.0 >= 70.0 && single_range.1 <= 84.0, || {
        format!("single AUCs span {single_range:?}")
    })?;
    check(beats_best >= 95, || {
        format!("avg beat best single system in {beats_best}/100 seeds")
    })?;
    check(beats_minmax > 50, || {
        format!("avg beat min and max fusion in {beats_minmax}/100 seeds")
    })?;
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!(
        "avg > best single in {beats_best}/100, > min and max in {beats_minmax}/100, mean PCC {pcc:.3}, {t:.2?}"
    ))
}

/// Height field symmetric in x, triangulated with mirrored diagonals.
fn symmetric_face() -> Mesh {
    let n = 24;
    let mut verts = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            let x = -1.0 + 2.0 * i as f64 / n as f64;
            let y = -1.2 + 2.4 * j as f64 / n as f64;
            let nose = 0.6 * (-(x * x) / 0.02 - (y * y) / 0.15).exp();
            let cheeks = 0.25 * (-((x.abs() - 0.5).powi(2)) / 0.05 - ((y + 0.3).powi(2)) / 0.1).exp();
            verts.push([x, y, 0.4 * (1.0 - 0.5 * x * x) + nose + cheeks]);
        }
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut tris = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            if i < n / 2 {
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            } else {
                tris.push([a, b, d]);
                tris.push([b, c, d]);
            }
        }
    }
    normalize_mesh(&Mesh::new(verts, tris, None).expect("valid mesh")).expect("normalizable")
}

fn rasterizer_geometry() -> Outcome {
    let start = Instant::now();
    let cube = normalize_mesh(&obj::parse(Path::new("cube.obj"), obj::UNIT_CUBE).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let cam = Camera::new(Projection::Orthographic, 20.0, 8.0, 128, 128).map_err(|e| e.to_string())?;
    let img = rasterize(&cube, &Pose::FRONTAL, &cam, Shading::Flat);
    let filled = img.coverage().iter().filter(|&&c| c).count() as f64 / (128.0 * 128.0);
    let side_px = 2.0 / 3f64.sqrt() * cam.focal_px() / cam.subject_distance;
    let analytic = side_px * side_px / (128.0 * 128.0);
    let rel = (filled - analytic).abs() / analytic;
    check(rel <= 0.02, || {
        format!("cube fill {filled:.4} vs analytic {analytic:.4}")
    })?;

    let face = symmetric_face();
    let cam = Camera::default().with_size(128, 128);
    let left = rasterize(
        &face,
        &Pose::new(-30.0, 0.0).map_err(|e| e.to_string())?,
        &cam,
        Shading::Lambert,
    )
    .to_u8();
    let right_img = rasterize(
        &face,
        &Pose::new(30.0, 0.0).map_err(|e| e.to_string())?,
        &cam,
        Shading::Lambert,
    );
    let covered = right_img.coverage().iter().filter(|&&c| c).count();
    check(covered > 128 * 128 / 10, || {
        format!("symmetric mesh covers only {covered} pixels")
    })?;
    let right = right_img.to_u8();
    let mut agree = 0;
    for y in 0..128 {
        for x in 0..128 {
            agree += (left[y * 128 + x].abs_diff(right[y * 128 + 127 - x]) <= 1) as usize;
        }
    }
    let agreement = agree as f64 / (128.0 * 128.0);
    check(agreement >= 0.99, || format!("mirror agreement {agreement:.4}"))?;

    let pose = Pose::new(20.0, -10.0).map_err(|e| e.to_string())?;
    let t = |n| NonZeroUsize::new(n).expect("non-zero");
    let one = rasterize_parallel(&face, &pose, &cam, Shading::Lambert, t(1));
    let grid = PoseGridParams::default();
    let small = cam.with_size(48, 48);
    let gallery = enlarge_gallery_parallel(&face, &grid, &small, Shading::Flat, t(1)).map_err(|e| e.to_string())?;
    for n in [2, 8] {
        check(
            rasterize_parallel(&face, &pose, &cam, Shading::Lambert, t(n)) == one,
            || format!("{n} threads differ"),
        )?;
        let g = enlarge_gallery_parallel(&face, &grid, &small, Shading::Flat, t(n)).map_err(|e| e.to_string())?;
        check(g == gallery, || format!("gallery with {n} threads differs"))?;
    }
    let t = within(start, Duration::from_secs(5))?;
    Ok(format!(
        "cube fill off by {:.2}%, mirror agreement {:.2}%, 1/2/8 threads identical, {t:.2?}",
        rel * 100.0,
        agreement * 100.0
    ))
}

fn cohens_d_checks() -> Outcome {
    let d =
        cohens_d(&ClassScores::new(vec![1.0, 1.0, 2.0, 2.0], vec![0.0, 0.0, 1.0, 1.0])).map_err(|e| e.to_string())?;
    check((d - 1.7320508).abs() <= 1e-7 && (d - 3f64.sqrt()).abs() <= 1e-9, || {
        format!("fixture gave {d}")
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut normal = || -> f64 {
        // Box-Muller
        let (u, v): (f64, f64) = (1.0 - rng.random::<f64>(), rng.random());
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    };
    let genuine: Vec<f64> = (0..10_000).map(|_| 1.2 + 1.0 * normal()).collect();
    let impostor: Vec<f64> = (0..10_000).map(|_| 0.0 + 1.0 * normal()).collect();
    let g = cohens_d(&ClassScores::new(genuine, impostor)).map_err(|e| e.to_string())?;
    check((g - 1.2).abs() <= 0.05, || format!("Gaussian d = {g}, expected 1.2"))?;
    Ok(format!("fixture {d:.9}, Gaussian estimate {g:.4} for true 1.2"))
}

fn protocol_counts() -> Outcome {
    let ids: Vec<String> = (0..130).map(|i| format!("id{i:03}")).collect();
    let p = partition_identities(&ids, 42).map_err(|e| e.to_string())?;
    let sizes = (p.test_ids.len(), p.train_ids.len(), p.val_ids.len());
    check(sizes == (25, 94, 11), || format!("partition sizes {sizes:?}"))?;
    let again = partition_identities(&ids, 42).map_err(|e| e.to_string())?;
    check(
        again.test_ids == p.test_ids && again.train_ids == p.train_ids && again.val_ids == p.val_ids,
        || "partition not deterministic".into(),
    )?;
    let other = partition_identities(&ids, 43).map_err(|e| e.to_string())?;
    check(other.test_ids != p.test_ids, || "seed has no effect".into())?;

    let universe: Vec<String> = SettingDescriptor::universe().iter().map(|s| s.id()).collect();
    let pairs = cross_pairs(&universe);
    check(pairs.len() == 210, || format!("{} cross pairs", pairs.len()))?;
    let mut counts = [0usize; 3];
    for (a, b) in &pairs {
        let (a, b) = (SettingDescriptor::parse(a), SettingDescriptor::parse(b));
        let kind = classify_cross(&a.ok_or("bad id")?, &b.ok_or("bad id")?).ok_or("unclassified pair")?;
        counts[CrossKind::ALL.iter().position(|k| *k == kind).expect("known kind")] += 1;
    }
    check(counts.iter().sum::<usize>() == 210, || {
        format!("filters cover {counts:?}")
    })?;
    Ok(format!("25/94/11 partition, 210 pairs split {counts:?}"))
}

fn report_shape() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let params = dir.path().join("sim.params");
    std::fs::write(
        &params,
        "protocol = intra\nrho = 0.1\nn_genuine = 2000\nn_impostor = 2000\nseed = 5\n\
         system.sys_a.impostor = -0.5, 1\nsystem.sys_a.auc = 0.74\n\
         system.sys_b.impostor = -0.5, 1\nsystem.sys_b.auc = 0.77\n\
         system.sys_c.impostor = -0.5, 1\nsystem.sys_c.auc = 0.80\n",
    )
    .map_err(|e| e.to_string())?;
    let sim = dir.path().join("sim");
    let bin = env!("CARGO_BIN_EXE_facefuse");
    let run = |args: &[&std::ffi::OsStr]| -> Result<(), String> {
        let out = Command::new(bin)
            .args(args)
            .arg("--quiet")
            .output()
            .map_err(|e| e.to_string())?;
        check(out.status.success(), || {
            format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
        })
    };
    run(&[
        "simulate".as_ref(),
        "--params".as_ref(),
        params.as_os_str(),
        "--out".as_ref(),
        sim.as_os_str(),
    ])?;
    run(&[
        "experiment".as_ref(),
        "--config".as_ref(),
        sim.join("experiment.cfg").as_os_str(),
    ])?;

    let table = sim.join("report").join("table_intra.csv");
    let bytes = std::fs::read(&table).map_err(|e| e.to_string())?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| e.to_string())?;
    let header = text.lines().next().unwrap_or_default();
    check(
        header == "method,auc_pct,eer_pct,cohens_d,fmr_at_fnmr1,fnmr_at_fmr1",
        || format!("header {header}"),
    )?;
    let rows = report::parse_table(&table, &bytes).map_err(|e| e.to_string())?;
    let methods: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
    let expected = [
        "sys_a",
        "sys_b",
        "sys_c",
        "fusion:avg(sys_a+sys_b+sys_c)",
        "fusion:max(sys_a+sys_b+sys_c)",
        "fusion:min(sys_a+sys_b+sys_c)",
    ];
    check(methods == expected, || format!("methods {methods:?}"))?;
    let again = report::table_to_csv(&rows).map_err(|e| e.to_string())?;
    check(again == bytes, || "table does not round-trip byte for byte".into())?;
    Ok(format!(
        "{} rows with the expected columns, round-trip identical",
        rows.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("pose-grid fidelity", pose_grid_fidelity),
        ("AUC oracle", auc_oracle),
        ("EER oracle", eer_oracle),
        ("fusion ordering", fusion_ordering),
        ("rank invariance", rank_invariance),
        ("synthetic fusion gain", fusion_gain),
        ("rasterizer geometry", rasterizer_geometry),
        ("Cohen's d", cohens_d_checks),
        ("protocol counts", protocol_counts),
        ("report shape", report_shape),
    ];
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !args.is_empty() && !args.iter().any(|a| name.contains(a.as_str())) {
            continue;
        }
        match f() {
            Ok(detail) => println!("acceptance {:>2} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("acceptance {:>2} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
