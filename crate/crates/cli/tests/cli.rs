//! End-to-end runs of the `bmrisk` binary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bmrisk(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bmrisk"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .env_remove("BMRISK_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> Output {
    let o = bmrisk(args, cwd);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn synth(dir: &Path) {
    ok(
        &["synth", "--out", "cohort", "--seed", "3", "--lesions", "16", "--prevalence", "0.2", "--grid", "12"],
        dir,
    );
}

#[test]
fn empty_manifest_gives_header_only_table() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("m.json"), r#"{"version":1,"patients":[]}"#).unwrap();
    ok(&["extract", "--manifest", "m.json", "--seed", "1", "--out", "o"], tmp.path());
    let text = std::fs::read_to_string(tmp.path().join("o/features.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("# config: {"));
    assert_eq!(lines[1], "sample,label");
}

#[test]
fn exit_codes_follow_error_kinds() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("m.json"), r#"{"version":1,"patients":[]}"#).unwrap();
    std::fs::write(d.join("bad.json"), "{").unwrap();
    let code = |args: &[&str]| bmrisk(args, d).status.code();
    assert_eq!(code(&["extract", "--manifest", "missing.json", "--seed", "1"]), Some(2));
    assert_eq!(code(&["extract", "--manifest", "bad.json", "--seed", "1", "--out", "o"]), Some(3));
    assert_eq!(code(&["run", "--manifest", "m.json", "--out", "o"]), Some(2));
    assert_eq!(code(&["run", "--manifest", "m.json", "--seed", "1", "--set", "0..9", "--out", "o"]), Some(2));
    assert_eq!(code(&["extract"]), Some(2));
    assert_eq!(code(&["extract", "--manifest", "m.json", "--seed", "1", "--wavelet", "db4"]), Some(2));
    assert_eq!(code(&["extract", "--manifest", "m.json", "--seed", "1", "--bins", "1"]), Some(2));
    assert_eq!(code(&["run", "--manifest", "m.json", "--seed", "1", "--c", "0", "--out", "o"]), Some(2));
}

#[test]
fn extraction_and_training_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d);
    let m = "cohort/manifest.json";
    ok(&["extract", "--manifest", m, "--seed", "1", "--out", "a"], d);
    ok(&["extract", "--manifest", m, "--seed", "1", "--out", "b", "--force"], d);
    // a warm rerun reuses the cached rows
    ok(&["extract", "--manifest", m, "--seed", "1", "--out", "a"], d);
    assert_eq!(tree(&d.join("a")), tree(&d.join("b")));

    let csv = std::fs::read_to_string(d.join("a/features.csv")).unwrap();
    let header = csv.lines().nth(1).unwrap();
    assert!(header.starts_with("sample,label,clinical-rpa_class,"));
    assert_eq!(header.split(',').count(), 2 + 12 + 4 * 770);

    ok(&["select", "--manifest", m, "--seed", "1", "--out", "a", "--set", "3"], d);
    ok(&["train", "--manifest", m, "--seed", "1", "--out", "a", "--set", "3"], d);
    ok(&["evaluate", "--out", "a", "--model", "a/model_set3.json"], d);
    let scores = std::fs::read_to_string(d.join("a/scores.csv")).unwrap();
    assert_eq!(scores.lines().nth(1), Some("sample,label,score,predicted"));
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("a/metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["feature_set"]["id"], 3);
}

#[test]
fn run_bundle_does_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d);
    let args = |t: &'static str, out: &'static str| {
        vec![
            "--threads", t, "run", "--manifest", "cohort/manifest.json", "--seed", "11", "--set", "1,7",
            "--repeats", "5", "--pooled-auc", "--out", out,
        ]
    };
    ok(&args("1", "one"), d);
    ok(&args("4", "four"), d);
    let (a, b) = (tree(&d.join("one")), tree(&d.join("four")));
    assert!(a.contains_key(Path::new("table1_auc.csv")));
    assert!(a.contains_key(Path::new("set7/cv_report.json")));
    assert!(a.contains_key(Path::new("samples.csv")));
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    for (k, v) in &a {
        assert!(b[k] == *v, "{} differs", k.display());
    }

    ok(&["km", "--input", "one/samples.csv", "--group", "status", "--out", "km"], d);
    let km: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("km/km.json")).unwrap()).unwrap();
    assert!(km["groups"].get("LRM").is_some());
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("m.json"), r#"{"version":1,"patients":[]}"#).unwrap();
    std::fs::write(
        d.join("p.toml"),
        "manifest = \"m.json\"\nseed = 4\n[classifier]\nc = 3.0\n[extraction]\nwavelet = \"coif1\"\n",
    )
    .unwrap();
    ok(&["extract", "--config", "p.toml", "--out", "a"], d);
    let first = std::fs::read_to_string(d.join("a/features.csv")).unwrap();
    assert!(first.contains(r#""seed":4"#) && first.contains(r#""wavelet":"coif1""#) && first.contains(r#""c":3.0"#));
    ok(
        &[
            "extract", "--config", "p.toml", "--out", "b", "--seed", "9", "--wavelet", "none", "--c", "0.5",
            "--threshold", "-0.25", "--normalization", "white-stripe",
        ],
        d,
    );
    let second = std::fs::read_to_string(d.join("b/features.csv")).unwrap();
    for want in [r#""seed":9"#, r#""wavelet":null"#, r#""c":0.5"#, r#""threshold":-0.25"#, r#""mr_normalization":"white-stripe""#] {
        assert!(second.contains(want), "{want} missing from {second}");
    }
}

#[test]
fn clinical_only_sets_run_without_images() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d);
    ok(
        &["run", "--manifest", "cohort/manifest.json", "--seed", "2", "--set", "1", "--repeats", "3", "--out", "o"],
        d,
    );
    let table = std::fs::read_to_string(d.join("o/table1_auc.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(2).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("1,clinical,"));
    assert!(!d.join("o/image_features.csv").exists());
}

#[test]
fn all_sets_give_a_seven_row_table() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d);
    ok(
        &["run", "--manifest", "cohort/manifest.json", "--seed", "5", "--set", "1..7", "--repeats", "2", "--out", "o"],
        d,
    );
    let table = std::fs::read_to_string(d.join("o/table1_auc.csv")).unwrap();
    let mut lines = table.lines();
    assert!(lines.next().unwrap().starts_with("# config: "));
    assert!(lines.next().unwrap().starts_with("set,blocks,n_samples,"));
    let ids: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids, ["1", "2", "3", "4", "5", "6", "7"]);
    for id in 1..=7 {
        assert!(d.join(format!("o/set{id}/km.svg")).exists());
    }
}
