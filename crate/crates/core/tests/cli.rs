use std::path::Path;
use std::process::{Command, Output};

use umereg::io::{load_cloud, read_transform, read_umef};

fn umereg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_umereg")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = umereg(args);
    assert!(
        out.status.success(),
        "umereg {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_register_metrics_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("pair");
    ok(&["synth", "--mesh", "synthetic:blob", "--noise", "vanilla", "--seed", "3", "--n-parent", "1024", "--out-prefix", s(&prefix)]);
    let src = dir.path().join("pair_src.xyz");
    let dst = dir.path().join("pair_dst.xyz");
    let gt = read_transform(dir.path().join("pair_gt.json")).unwrap();
    assert_eq!(load_cloud(&src).unwrap().len(), 1024);

    let est = dir.path().join("est.json");
    let stdout = ok(&["register", "--src", s(&src), "--dst", s(&dst), "--method", "ume", "--out", s(&est)]);
    assert!(stdout.contains("constellation"));
    let t = read_transform(&est).unwrap();
    assert!((t.rotation - gt.rotation).norm() < 1e-9);
    assert!((t.translation - gt.translation).norm() < 1e-9);

    let m = ok(&["metrics", "--src", s(&src), "--dst", s(&dst), "--gt", s(&est)]);
    let chamfer: f64 = m.lines().next().unwrap().split(" = ").nth(1).unwrap().parse().unwrap();
    assert!(chamfer < 1e-6, "{m}");
    let raw = ok(&["metrics", "--src", s(&src), "--dst", s(&dst)]);
    assert!(raw.starts_with("chamfer = "));

    let icp_out = dir.path().join("icp.json");
    let stdout = ok(&["register", "--src", s(&src), "--dst", s(&dst), "--method", "icp", "--out", s(&icp_out)]);
    assert!(stdout.contains("iterations"));
    read_transform(&icp_out).unwrap();
}

#[test]
fn export_canon_feeds_external_registration() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("zi");
    ok(&["synth", "--mesh", "synthetic:blob", "--noise", "zero-intersection", "--seed", "5", "--out-prefix", s(&prefix)]);
    let src = dir.path().join("zi_src.xyz");
    let dst = dir.path().join("zi_dst.xyz");
    assert_eq!(load_cloud(&src).unwrap().len(), 1024);

    let canon = dir.path().join("canon");
    ok(&["export-canon", "--src", s(&src), "--dst", s(&dst), "--out-prefix", s(&canon)]);
    for f in ["canon_1.xyz", "canon_2.xyz", "canon_1.umef", "canon_2.umef", "canon_frames.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let frames: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("canon_frames.json")).unwrap()).unwrap();
    assert_eq!(frames["frame1"]["axes"].as_array().unwrap().len(), 9);
    assert_eq!(read_umef(dir.path().join("canon_1.umef")).unwrap().n_features(), 16);

    let a = dir.path().join("ume.json");
    let b = dir.path().join("ext.json");
    ok(&["register", "--src", s(&src), "--dst", s(&dst), "--out", s(&a)]);
    ok(&[
        "register", "--src", s(&src), "--dst", s(&dst), "--method", "external",
        "--umef-src", s(&dir.path().join("canon_1.umef")),
        "--umef-dst", s(&dir.path().join("canon_2.umef")),
        "--out", s(&b),
    ]);
    let (ta, tb) = (read_transform(&a).unwrap(), read_transform(&b).unwrap());
    assert!((ta.rotation - tb.rotation).norm() < 1e-9);
}

#[test]
fn bench_writes_reproducible_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    std::fs::write(
        &cfg,
        "datasets = synthetic:blob, synthetic:cuboid\nn_parent = 300\ntrials = 3\nseed = 2\nnoise = bernoulli\nmethods = ume, icp\n",
    )
    .unwrap();
    let out = dir.path().join("report.csv");
    let table = ok(&["bench", "--config", s(&cfg), "--out", s(&out)]);
    assert!(table.starts_with("| method |"));
    let first = std::fs::read_to_string(&out).unwrap();
    assert_eq!(first.lines().count(), 1 + 4);
    assert!(first.starts_with("method,scenario,chamfer,hausdorff,rmse_rotation_deg,rmse_translation,trials,failures\n"));
    let trials = std::fs::read_to_string(dir.path().join("report.trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 2 * 3);

    ok(&["bench", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), first);

    let md = dir.path().join("report.md");
    ok(&["bench", "--config", s(&cfg), "--out", s(&md)]);
    assert!(std::fs::read_to_string(&md).unwrap().starts_with("| method |"));
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.xyz");
    std::fs::write(&bad, "0 0 0\n1 0\n").unwrap();
    let out = umereg(&["metrics", "--src", s(&bad), "--dst", s(&bad)]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");

    let out = umereg(&["register", "--src", s(&bad), "--dst", s(&bad), "--method", "external", "--out", "x.json"]);
    assert!(!out.status.success());
    let out = umereg(&["synth", "--mesh", "synthetic:blob", "--noise", "salt", "--out-prefix", "p"]);
    assert!(!out.status.success());
}

#[test]
fn transform_json_layout() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("p");
    ok(&["synth", "--mesh", "synthetic:cuboid", "--seed", "1", "--n-parent", "64", "--out-prefix", s(&prefix)]);
    let text = std::fs::read_to_string(dir.path().join("p_gt.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["rotation"].as_array().unwrap().len(), 9);
    assert_eq!(v["translation"].as_array().unwrap().len(), 3);
    // 17 significant digits
    let first = text.split('[').nth(1).unwrap().split(',').next().unwrap().trim();
    let mantissa = first.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
    assert_eq!(mantissa.len(), 17, "{first}");
}
