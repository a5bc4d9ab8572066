//! End-to-end subcommand tests driving the built binary on temporary files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> PathBuf {
    let mut p = PathBuf::from(env!("CARGO_BIN_EXE_orthostab"));
    if !p.exists() {
        p = PathBuf::from("target/debug/orthostab");
    }
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p.to_string_lossy().into_owned()
}

const HERM_SPEC: &str = r#"{"classes":[
  {"kind":"pos","lambda":1.5,"parts":[{"size":1,"mult":2,"signs":[1,1]}]},
  {"kind":"neg_pair","mu":1.0,"parts":[{"size":1,"mult":1}]}
]}"#;

const SYM_SPEC: &str = r#"{"classes":[{"eigenvalue":[1.0,0.0],"parts":[{"size":1,"mult":2}]}]}"#;

#[test]
fn stabdim_sym_o2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.json", SYM_SPEC);
    let out = run(&["stabdim", "--spec", &spec]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["total"], 1, "dim of the plane rotation group");
    assert_eq!(v["total_field"], "complex");
}

#[test]
fn stabdim_with_oracle_and_dim_example() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "h.json", HERM_SPEC);
    let out = run(&["stabdim", "--spec", &spec, "--with-oracle"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["total_real"], 2);
    assert_eq!(v["oracle"], 2);
}

#[test]
fn oracle_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "m.json",
        r#"{"rows":2,"cols":2,"data":[[1.0,0.0],[0.0,0.0],[0.0,0.0],[1.0,0.0]]}"#,
    );
    let out = run(&["oracle", "--matrix", &m, "--action", "herm"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["nullity"], 1);

    // invalid input exits 2
    let bad = write(dir.path(), "bad.json", r#"{"rows":1,"cols":2,"data":[[1.0,0.0]]}"#);
    let out = run(&["oracle", "--matrix", &bad, "--action", "sym"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_emits_verifiable_samples() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "h.json", HERM_SPEC);
    let outdir = dir.path().join("run");
    let out = run(&[
        "solve", "--spec", &spec, "--samples", "2", "--seed", "11",
        "--out", outdir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let certs: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("certificates.json")).unwrap())
            .unwrap();
    assert_eq!(certs.as_array().unwrap().len(), 2);
    assert!(certs[0]["pass"].as_bool().unwrap());
    // verify on the emitted files reproduces the certificate exactly
    let out = run(&[
        "verify",
        "--q", outdir.join("sample_000.json").to_str().unwrap(),
        "--m", outdir.join("matrix.json").to_str().unwrap(),
        "--action", "herm",
        "--tol", "1e-8",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let reproduced = v["orthogonality_residual"].as_f64().unwrap();
    let emitted = certs[0]["orthogonality_residual"].as_f64().unwrap();
    assert!((reproduced - emitted).abs() <= 1e-12);
    assert_eq!(reproduced, emitted, "bit-exact reproduction from emitted files");

    // determinism of solve itself
    let outdir2 = dir.path().join("run2");
    let out = run(&[
        "solve", "--spec", &spec, "--samples", "2", "--seed", "11",
        "--out", outdir2.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let a = std::fs::read(outdir.join("sample_001.json")).unwrap();
    let b = std::fs::read(outdir2.join("sample_001.json")).unwrap();
    assert_eq!(a, b, "same seed, same bytes");
}

#[test]
fn verify_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let q = write(
        dir.path(),
        "q.json",
        r#"{"rows":2,"cols":2,"data":[[2.0,0.0],[0.0,0.0],[0.0,0.0],[2.0,0.0]]}"#,
    );
    let m = write(
        dir.path(),
        "m.json",
        r#"{"rows":2,"cols":2,"data":[[1.0,0.0],[0.0,0.0],[0.0,0.0],[2.0,0.0]]}"#,
    );
    let out = run(&["verify", "--q", &q, "--m", &m, "--action", "sym", "--tol", "1e-8"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn classify_and_reduce() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(
        dir.path(),
        "a.json",
        r#"{"rows":2,"cols":2,"data":[[2.0,0.0],[0.0,0.0],[0.0,0.0],[-3.0,0.0]]}"#,
    );
    let out = run(&["classify", "--matrix", &a]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["classes"].as_array().unwrap().len(), 2);
    assert_eq!(v["inertia"]["n_plus"], 1);

    let b = write(
        dir.path(),
        "b.json",
        r#"{"rows":2,"cols":2,"data":[[4.0,0.0],[0.0,0.0],[0.0,0.0],[4.0,0.0]]}"#,
    );
    let out = run(&["reduce", "--a", &a, "--b", &b]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["c"], 1);
    assert_eq!(v["a_tilde"]["data"][0][0].as_f64().unwrap(), 0.5);
}

#[test]
fn examples_match_fixtures() {
    for name in ["2.7", "3.3"] {
        let out = run(&["example", "--name", name]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["matches_fixture"], true, "example {name}");
    }
}

#[test]
fn suite_is_deterministic_and_green() {
    let dir = tempfile::tempdir().unwrap();
    let f1 = dir.path().join("s1.json");
    let f2 = dir.path().join("s2.json");
    let out = run(&["suite", "--seed", "7", "--out", f1.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["suite", "--seed", "7", "--out", f2.to_str().unwrap()]);
    assert!(out.status.success());
    let a = std::fs::read(&f1).unwrap();
    let b = std::fs::read(&f2).unwrap();
    assert_eq!(a, b, "byte-identical summaries");
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["all_pass"], true);
    assert!(!v["discrepancies"].as_array().unwrap().is_empty(), "ledger is a first-class output");
}
