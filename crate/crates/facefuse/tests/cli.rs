use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use facefuse::formats::{embeddings, obj, scores};
use facefuse_core::scores::Embedding;

fn facefuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_facefuse"))
        .args(args)
        .arg("--quiet")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn write_embeddings(dir: &Path) -> (PathBuf, PathBuf) {
    let e = |sub: &str, sample: &str, v: [f64; 3]| {
        Embedding::new(sub, sample, Some("cam1_1m0".into()), v.to_vec()).unwrap()
    };
    let refs = vec![
        e("a", "m", [0.0, 0.0, 0.0]),
        e("b", "m", [3.0, 0.0, 0.0]),
        e("c", "m", [0.0, 3.0, 0.0]),
    ];
    let probes = vec![
        e("a", "p", [0.5, 0.0, 0.0]),
        e("b", "p", [2.0, 0.5, 0.0]),
        e("c", "p", [0.0, 2.5, 0.5]),
        e("c", "q", [1.0, 1.0, 0.0]),
    ];
    let (r, p) = (dir.join("refs.csv"), dir.join("probes.bin"));
    std::fs::write(&r, embeddings::to_csv(&refs).unwrap()).unwrap();
    std::fs::write(&p, embeddings::to_binary(&probes).unwrap()).unwrap();
    (r, p)
}

#[test]
fn help_and_bad_flags() {
    assert_eq!(facefuse(&["--help"]).status.code(), Some(0));
    assert_eq!(facefuse(&["fuse", "--bogus"]).status.code(), Some(1));
    assert_eq!(facefuse(&[]).status.code(), Some(1));
}

#[test]
fn enlarge_writes_gallery_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("cube.obj");
    std::fs::write(&mesh, obj::UNIT_CUBE).unwrap();
    let mut outs = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.path().join(format!("views{threads}"));
        let o = facefuse(&[
            "enlarge",
            "--mesh",
            s(&mesh),
            "--size",
            "40",
            "--threads",
            threads,
            "--out",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outs.push(out);
    }
    let manifest = std::fs::read_to_string(outs[0].join("manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 50);
    assert!(manifest.starts_with("pose_index,azimuth_deg,elevation_deg,filename\n0,-30,-30,view_az-30_el-30.png\n"));
    for line in manifest.lines().skip(1) {
        let name = line.rsplit(',').next().unwrap();
        assert_eq!(
            std::fs::read(outs[0].join(name)).unwrap(),
            std::fs::read(outs[1].join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn enlarge_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("bad.obj");
    std::fs::write(&mesh, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n").unwrap();
    let o = facefuse(&["enlarge", "--mesh", s(&mesh), "--out", s(&dir.path().join("v"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.obj:4"));
    let o = facefuse(&[
        "enlarge",
        "--mesh",
        s(&mesh),
        "--offset",
        "0",
        "--out",
        s(&dir.path().join("v")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn score_fuse_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (r, p) = write_embeddings(dir.path());
    let (sa, sb) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for (sys, out) in [("plain", &sa), ("other", &sb)] {
        let o = facefuse(&[
            "score",
            "--references",
            s(&r),
            "--probes",
            s(&p),
            "--system",
            sys,
            "--out",
            s(out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let set = &scores::load(&sa).unwrap()[0];
    assert_eq!(set.len(), 12);
    assert_eq!(set.class_scores().genuine.len(), 4);

    let single = facefuse(&[
        "fuse",
        "--scores",
        s(&sa),
        "--rule",
        "avg",
        "--out",
        s(&dir.path().join("f.csv")),
    ]);
    assert_eq!(single.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&single.stderr).contains("fusion requires ≥ 2 systems"));

    let fused = dir.path().join("fused.csv");
    let o = facefuse(&[
        "fuse",
        "--scores",
        s(&sa),
        s(&sb),
        "--rule",
        "min",
        "--rule",
        "max",
        "--out",
        s(&fused),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ids: Vec<String> = scores::load(&fused).unwrap().into_iter().map(|s| s.system_id).collect();
    assert_eq!(ids, ["fusion:max(other+plain)", "fusion:min(other+plain)"]);

    let report = dir.path().join("eval");
    let o = facefuse(&["eval", "--scores", s(&sa), s(&sb), "--points", "--out", s(&report)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("plain\tcam1_1m0\tAUC="));
    for f in [
        "metrics.csv",
        "roc_plain_cam1_1m0.svg",
        "roc_other_cam1_1m0.csv",
        "correlation_cam1_1m0.csv",
    ] {
        assert!(report.join(f).exists(), "{f}");
    }
    let first = std::fs::read(report.join("metrics.csv")).unwrap();
    facefuse(&["eval", "--scores", s(&sa), s(&sb), "--out", s(&report)]);
    assert_eq!(std::fs::read(report.join("metrics.csv")).unwrap(), first);
}

#[test]
fn experiment_reports_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "protocol = intra\nscores.a.s1.s1 = nowhere.csv\n").unwrap();
    let o = facefuse(&["experiment", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nowhere.csv"));
}

#[test]
fn simulate_then_cross_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.cfg");
    std::fs::write(
        &params,
        "protocol = cross\nsettings = cam1_1m0, cam2_1m0, cam1_2m6\nn_genuine = 200\nn_impostor = 200\nrho = 0.2\n\
         aggregation = pooled\n\
         system.x.impostor = -0.5, 1\nsystem.x.auc = 0.75\nsystem.y.impostor = -0.5, 1\nsystem.y.genuine = 0.5, 1\n",
    )
    .unwrap();
    let sim = dir.path().join("sim");
    assert!(
        facefuse(&["simulate", "--params", s(&params), "--seed", "9", "--out", s(&sim)])
            .status
            .success()
    );
    let o = facefuse(&["experiment", "--config", s(&sim.join("experiment.cfg"))]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = sim.join("report");
    for f in [
        "table_cross.csv",
        "breakdown_cross.csv",
        "table_cross-camera.csv",
        "table_cross-distance.csv",
        "table_cross-both.csv",
        "auc_cross.svg",
        "run.meta",
    ] {
        assert!(report.join(f).exists(), "{f}");
    }
    let meta = std::fs::read_to_string(report.join("run.meta")).unwrap();
    assert!(
        meta.contains("aggregation = pooled") && meta.contains("seed = 9"),
        "{meta}"
    );
    let breakdown = std::fs::read_to_string(report.join("breakdown_cross.csv")).unwrap();
    // 6 ordered pairs, 2 systems + 3 fusions each
    assert_eq!(breakdown.lines().count(), 1 + 6 * 5);
}
