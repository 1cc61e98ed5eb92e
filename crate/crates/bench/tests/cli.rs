//! End-to-end runs of the `holoqa` binary.

use std::path::Path;
use std::process::{Command, Output};

fn holoqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holoqa")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_metric_is_a_usage_error_listing_the_registry() {
    let dir = tempfile::tempdir().unwrap();
    let out = holoqa(&["bench", "--metrics", "ssim,psnrx", "--manifest", "m.json", "--mos", "m.csv", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("psnrx"), "{err}");
    for known in ["mse", "ssim", "msssim", "iwssim", "vifp", "nlpd", "ssrm"] {
        assert!(err.contains(known), "{known} missing from {err}");
    }
}

#[test]
fn missing_inputs_are_usage_errors() {
    let out = holoqa(&["bench"]);
    assert_eq!(out.status.code(), Some(2));
    let out = holoqa(&["score", "--reference", "a", "--distorted", "b"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = d.join("data");
    let synth = holoqa(&["synth", "--holograms", "1", "--size", "64", "--out", path(&data)]);
    assert!(synth.status.success(), "{}", stderr(&synth));
    assert!(data.join("manifest.json").exists() && data.join("mos.csv").exists());

    let reference = data.join("h1/ref");
    let distorted = data.join("h1/requant4");
    let score = holoqa(&["score", "--metrics", "mse_C", "--reference", path(&reference), "--distorted", path(&reference)]);
    assert!(score.status.success(), "{}", stderr(&score));
    assert_eq!(stdout(&score).trim(), "mse_C 0");
    let score = holoqa(&["score", "--metrics", "ssim", "--reference", path(&reference), "--distorted", path(&distorted)]);
    let v: f64 = stdout(&score).trim().strip_prefix("ssim ").unwrap().parse().unwrap();
    assert!(v > 0.0 && v < 1.0, "{v}");

    let fresnel = d.join("fresnel");
    let back = d.join("back");
    assert!(holoqa(&["convert", "--input", path(&reference), "--output", path(&fresnel)]).status.success());
    let out = holoqa(&["convert", "--input", path(&fresnel), "--output", path(&back)]);
    assert!(out.status.success(), "{}", stderr(&out));

    let view = d.join("view");
    let out = holoqa(&[
        "reconstruct", "--input", path(&back), "--output", path(&view), "--view", "center", "--aperture-size", "48",
        "--focal-distance", "-0.0005",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let clean = d.join("clean");
    assert!(holoqa(&["denoise", "--input", path(&view), "--output", path(&clean)]).status.success());
    let score = holoqa(&["score", "--metrics", "gmsd", "--reference", path(&view), "--distorted", path(&view)]);
    assert_eq!(stdout(&score).trim(), "gmsd 0");
    let score = holoqa(&["score", "--metrics", "ssim_C", "--reference", path(&view), "--distorted", path(&clean)]);
    assert_eq!(score.status.code(), Some(2));
}

#[test]
fn bench_writes_the_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("out");
    assert!(holoqa(&["synth", "--holograms", "2", "--size", "64", "--out", path(&data)]).status.success());
    let run = holoqa(&[
        "bench", "--track", "qa3", "--metrics", "mse,psnr,ssim,gmsd", "--manifest", path(&data.join("manifest.json")),
        "--mos", path(&data.join("mos.csv")), "--out", path(&out),
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    for name in ["qa3_opt_criteria.csv", "qa3_opt_significance.csv", "qa3_ranksums.csv", "qa3_raw_scores.csv"] {
        assert!(out.join(name).exists(), "{name}");
        assert!(stdout(&run).contains(name));
    }
    // Complex metrics cannot score rendered views.
    let run = holoqa(&[
        "bench", "--track", "qa4", "--metrics", "mse_C", "--manifest", path(&data.join("manifest.json")), "--mos",
        path(&data.join("mos.csv")), "--out", path(&out),
    ]);
    assert_eq!(run.status.code(), Some(2));
}
