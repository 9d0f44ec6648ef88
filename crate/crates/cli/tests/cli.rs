//! End-to-end behaviour of the `harmstable` binary.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harmstable"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn single_atom_simulation_has_constant_modulus() {
    let o = run(&["simulate", "--n", "8", "--n-terms", "1", "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
            (f[0], f[1])
        })
        .collect();
    assert_eq!(text.lines().next(), Some("j,re,im"));
    assert_eq!(rows.len(), 8);
    let m0 = rows[0].0.hypot(rows[0].1);
    assert!(rows.iter().all(|(re, im)| (re.hypot(*im) - m0).abs() < 1e-12 * m0));
    assert!(stderr(&o).starts_with("simulate:"));
}

#[test]
fn identity_suite_passes() {
    let o = run(&["check-identities", "--trials", "12", "--n-terms", "300", "--seed", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kind"], "check-identities");
    assert_eq!(v["results"]["passed"], true);
}

#[test]
fn diagnostics_name_the_field() {
    let o = run(&["--alpha", "2.5", "lln"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("alpha"));

    let o = run(&["--hurst", "1.5", "lln"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("hurst"));

    let o = run(&["clt", "--alpha", "1.8", "--hurst", "0.55"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("regime"));

    let o = run(&["kernel-limit", "--s", "1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("missing required field: u"));

    let o = run(&["lln", "--no-such-flag"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--no-such-flag"));
}

#[test]
fn success_prints_no_error() {
    let o = run(&["kernel-limit", "--s", "3", "--u", "1"]);
    assert!(o.status.success());
    assert!(!stderr(&o).contains("error"));
}

#[test]
fn report_embeds_resolved_config_and_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lln.json");
    let args = [
        "lln", "--half-width", "10", "--n-terms", "2000", "--n-list", "8,16,32", "--reps", "50", "--seed", "3",
    ];
    let mut full: Vec<&str> = args.to_vec();
    let out_s = out.to_str().unwrap();
    full.extend(["--out", out_s]);
    let o = run(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("lln: slope"));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let cfg = &report["config"];
    assert_eq!(cfg["half-width"], 10.0);
    assert_eq!(cfg["n-terms"], 2000);
    assert_eq!(cfg["hurst"], 0.75);
    assert_eq!(cfg["resolution-check"], true);
    assert!(report["runtime_seconds"].is_null());
    assert_eq!(report["results"]["per_n"].as_array().unwrap().len(), 3);

    // the embedded config reproduces the report
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, serde_json::to_vec(cfg).unwrap()).unwrap();
    let again = dir.path().join("again.json");
    let o = run(&["lln", "--config", cfg_path.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn clt_csv_writes_samples_and_ecdfs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("clt.csv");
    let o = run(&[
        "clt", "--half-width", "5", "--n-terms", "500", "--n", "16", "--reps", "20", "--format", "csv", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("replication,n,value"));
    assert_eq!(text.lines().count(), 41);
    let ecdf = std::fs::read_to_string(dir.path().join("clt.ecdf-limit.csv")).unwrap();
    assert_eq!(ecdf.lines().next(), Some("x,F"));
    assert_eq!(ecdf.lines().count(), 21);
}

#[test]
fn unwritable_output_fails() {
    let o = run(&["kernel-limit", "--s", "1", "--u", "-1", "--out", "/nonexistent-dir/x.json"]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error:"));
}
