use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nbcm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbcm")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = nbcm(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(rel)
}

#[test]
fn field_check_passes() {
    let out = ok(&["field-check", "--m", "2,4,8"]);
    assert_eq!(out.lines().filter(|l| l.ends_with(": ok")).count(), 3, "{out}");
}

#[test]
fn code_validate_and_encode() {
    let out = ok(&["code", "validate", "builtin:desk"]);
    assert!(out.contains("144 symbols, 576 bits"));
    assert!(out.trim_end().ends_with("valid"));

    let path = data("codes/rate_quarter_gf16.txt");
    ok(&["code", "validate", path.to_str().unwrap()]);

    let a = ok(&["code", "encode", "builtin:desk", "--seed", "5"]);
    assert_eq!(a, ok(&["code", "encode", "builtin:desk", "--seed", "5"]));
    assert_eq!(a.split_whitespace().count(), 144);
    let bits = ok(&["code", "encode", "builtin:desk", "--seed", "5", "--bits"]);
    assert_eq!(bits.trim().len(), 576);
}

#[test]
fn bad_code_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "4 3 1\n0 0 0\n").unwrap();
    let out = nbcm(&["code", "validate", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn map_places_bits() {
    // Symbol 1 = bits 1000: (sign 1, amplitude bit 0) then (0, 0).
    assert_eq!(ok(&["map", "--mapping", "sicm", "--pam", "4", "--m", "4", "--symbols", "1"]).trim(), "3 -3");
    assert_eq!(ok(&["map", "--mapping", "bicm", "--pam", "4", "--m", "2", "--bits", "1011"]).trim(), "3 1");
    let out = nbcm(&["map", "--mapping", "sicm", "--pam", "8", "--m", "4", "--symbols", "1"]);
    assert!(!out.status.success());
}

#[test]
fn bicm_limit_prints_db() {
    let v: f64 = ok(&["bicm-limit", "--pam", "4", "--eff", "1.5"]).trim().parse().unwrap();
    assert!((v - 9.304).abs() < 0.05, "{v}");
}

#[test]
fn appendix_table_has_exact_bicm_rows() {
    let out = ok(&["table", "appendix-c"]);
    assert!(out.contains("1/2 1/3 1/6 | 8 32 72"), "{out}");
    assert!(out.contains("# SICM m=6 8-PAM"));
}

#[test]
fn spectra_and_bound_write_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let ens = data("ensembles/desk.txt");
    let ens = ens.to_str().unwrap();

    let out = ok(&["spectrum", "hamming", "--ensemble", ens, "--binary"]);
    assert_eq!(out.lines().next(), Some("weight,log10_count"));
    assert!(out.lines().nth(1).unwrap().starts_with("0,"));

    let sed = dir.path().join("sed.csv");
    ok(&[
        "spectrum", "sed", "--ensemble", ens, "--mapping", "bicm", "--pam", "4", "--max-delta", "24", "--out",
        sed.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&sed).unwrap();
    assert!(text.starts_with("distance,log10_count\n4.0000,"));
    assert!(dir.path().join("sed.manifest.json").exists());

    let bound = dir.path().join("bound.csv");
    ok(&[
        "bound", "--ensemble", ens, "--mapping", "sicm", "--pam", "4", "--snr", "10:1:14", "--out",
        bound.to_str().unwrap(),
    ]);
    let values: Vec<f64> = std::fs::read_to_string(&bound)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 5);
    assert!(values.windows(2).all(|w| w[1] <= w[0]));
    assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
    let man: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bound.manifest.json")).unwrap()).unwrap();
    assert!(man["config"]["w0"].as_f64().unwrap() > 0.0);
}

#[test]
fn simulate_resumes_and_records_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fer.csv");
    let cfg = data("configs/desk_sicm.txt");
    let args = |snr: &str| -> Vec<String> {
        [
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--set",
            &format!("snr={snr}"),
            "--set",
            "max_frames=30",
            "--out",
            out.to_str().unwrap(),
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    };
    let run = |snr: &str| {
        let a = args(snr);
        ok(&a.iter().map(String::as_str).collect::<Vec<_>>())
    };
    run("40,50");
    let first = std::fs::read_to_string(&out).unwrap();
    let printed = run("40,50,60");
    // Only the new point is simulated.
    assert_eq!(printed.lines().count(), 2, "{printed}");
    let all = std::fs::read_to_string(&out).unwrap();
    assert!(all.starts_with(&first));
    assert_eq!(all.lines().count(), 4);

    let man: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fer.manifest.json")).unwrap()).unwrap();
    assert_eq!(man["seeds"]["master"], 1);
    assert_eq!(man["seeds"]["points"].as_array().unwrap().len(), 3);
    assert!(!man["git_describe"].as_str().unwrap().is_empty());
    assert_eq!(man["config"]["mapping"], "sicm");
}

#[test]
fn simulate_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fer.csv");
    let o = nbcm(&["simulate", "--set", "code=builtin:desk", "--set", "pam=32", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(!out.exists());
}
