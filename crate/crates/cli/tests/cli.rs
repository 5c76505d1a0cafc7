use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nonarch(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nonarch"));
    cmd.args(args).env_remove("NONARCH_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.env("NONARCH_CACHE_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

/// The report without its run-dependent parts.
fn stable(mut report: Value) -> Value {
    for o in report["outcomes"].as_array_mut().unwrap() {
        let o = o.as_object_mut().unwrap();
        o.remove("cache_keys");
        o.remove("seconds");
    }
    report
}

#[test]
fn verify_reports_are_reproducible() {
    let args = ["verify", "product-laws", "--q", "2", "--n", "2", "--r", "1"];
    let a = json(&nonarch(&args, None));
    let b = json(&nonarch(&args, None));
    assert_eq!(a, b);
    assert_eq!(a["outcomes"][0]["verdict"], "PASS-EXACT");
    assert_eq!(a["format_version"], 1);
}

#[test]
fn second_run_reads_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "hard-lefschetz", "--q", "2", "--n", "2", "--r", "1"];
    let first = json(&nonarch(&args, Some(dir.path())));
    let written = std::fs::read_dir(dir.path()).unwrap().count();
    assert!(written > 0);
    let second = json(&nonarch(&args, Some(dir.path())));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), written);
    assert_eq!(stable(first.clone()), stable(second.clone()));
    assert_eq!(first["outcomes"][0]["cache_keys"], second["outcomes"][0]["cache_keys"]);
    assert!(second["outcomes"][0].get("warnings").is_none());
}

#[test]
fn tampered_cache_entries_are_rebuilt() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "kernel-equality", "--q", "2", "--n", "2", "--r", "1"];
    let clean = json(&nonarch(&args, Some(dir.path())));
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replacen("1/3", "1/4", 1)).unwrap();
    }
    let again = json(&nonarch(&args, Some(dir.path())));
    assert_eq!(again["outcomes"][0]["verdict"], clean["outcomes"][0]["verdict"]);
    let warnings = again["outcomes"][0]["warnings"].as_array().expect("warnings");
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("checksum")), "{warnings:?}");
}

#[test]
fn op_matrix_emits_exact_entries() {
    let m = json(&nonarch(&["op", "matrix", "--transform", "cosine", "--q", "2", "--n", "2", "--k", "1"], None));
    assert_eq!(m["rows"], 3);
    assert_eq!(m["entries"][0], "1/9");
    let f = json(&nonarch(&["op", "matrix", "--transform", "fourier", "--q", "3", "--n", "2", "--k", "1"], None));
    assert_eq!(f["tag"], "fourier");
    let r = nonarch(&["op", "matrix", "--transform", "radon", "--q", "2", "--n", "3", "--k", "1"], None);
    assert!(!r.status.success());
}

#[test]
fn product_of_spherical_lines_in_the_plane() {
    let dir = tempfile::tempdir().unwrap();
    let v1 = dir.path().join("v1.json");
    std::fs::write(
        &v1,
        r#"{"meta":{"model":{"kind":"equi_char","q":2},"n":2,"k":1,"r":1,"dual":false,"twist":0},"coeffs":["1","1","1"]}"#,
    )
    .unwrap();
    let v = v1.to_str().unwrap();
    let p = json(&nonarch(&["product", "eval", "--phi", v, "--psi", v, "--level", "1"], None));
    assert_eq!(p["exact"][0], "9/7");
    assert_eq!(p["meta"]["k"], 2);

    let map = dir.path().join("swap.json");
    std::fs::write(&map, r#"{"model":{"kind":"equi_char","q":2},"matrix":[["[]","[1]"],["[1]","[]"]]}"#).unwrap();
    let out = json(&nonarch(&["pushforward", "--map", map.to_str().unwrap(), "--val", v], None));
    assert_eq!(out["coeffs"].as_array().unwrap().len(), 3);
}

#[test]
fn pairing_in_the_plane_is_nonsingular() {
    let p = json(&nonarch(&["pairing", "--n", "2", "--i", "1", "--q", "2", "--r", "1"], None));
    assert_eq!(p["verdict"], "nonsingular");
    assert_eq!(p["determinant"], "28/19683");
}

#[test]
fn config_file_sets_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("nonarch.toml");
    std::fs::write(&cfg, "seed = 7\ntrials = 3\n").unwrap();
    let r = json(&nonarch(
        &["--config", cfg.to_str().unwrap(), "verify", "positivity", "--q", "2", "--n", "2", "--r", "1"],
        None,
    ));
    assert_eq!(r["config"]["seed"], 7);
    assert_eq!(r["config"]["trials"], 3);
}
