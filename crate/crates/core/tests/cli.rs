use std::path::PathBuf;
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("strichlab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn strichlab(out: &PathBuf, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strichlab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn airy_is_byte_identical_on_rerun() {
    let (a, b) = (scratch("airy-a"), scratch("airy-b"));
    assert!(strichlab(&a, &["airy", "--count", "5"]).status.success());
    assert!(strichlab(&b, &["airy", "--count", "5"]).status.success());
    let ta = std::fs::read(a.join("airy_zeros.csv")).unwrap();
    assert_eq!(ta, std::fs::read(b.join("airy_zeros.csv")).unwrap());
    assert_eq!(String::from_utf8(ta).unwrap().lines().count(), 6);
    let ma: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    let mb: serde_json::Value = serde_json::from_slice(&std::fs::read(b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(ma["config_hash"], mb["config_hash"]);
    assert_eq!(ma["outputs"][0], "airy_zeros.csv");
}

#[test]
fn usage_errors_exit_with_2() {
    let d = scratch("usage");
    assert_eq!(strichlab(&d, &["airy", "--count", "0"]).status.code(), Some(2));
    assert_eq!(strichlab(&d, &["cusp"]).status.code(), Some(2));
    assert_eq!(strichlab(&d, &["gallery", "--k", "-1"]).status.code(), Some(2));
    assert_eq!(
        strichlab(&d, &["dispersion", "--lambda-min", "100", "--lambda-max", "10"]).status.code(),
        Some(2)
    );
}

#[test]
fn gliding_billiard_point_is_a_numeric_error() {
    let d = scratch("glide");
    let out = strichlab(&d, &["billiard", "--y", "0", "--t", "0", "--eta", "1", "--tau", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gliding"));
}

#[test]
fn billiard_zero_steps_echoes_input() {
    let d = scratch("echo");
    assert!(strichlab(&d, &["billiard", "--y", "-0.5", "--t", "0.25", "--eta", "1", "--tau", "2", "--n", "0"])
        .status
        .success());
    let csv = std::fs::read_to_string(d.join("billiard.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 2);
    let vals: Vec<f64> = rows[1].split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    assert_eq!(vals, vec![-0.5, 0.25, 1.0, 2.0]);
}

#[test]
fn dispersion_fit_json_has_both_exponents() {
    let d = scratch("disp");
    assert!(strichlab(&d, &["dispersion"]).status.success());
    let fit: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("dispersion_fit.json")).unwrap()).unwrap();
    let l = fit["lambda_exponent"].as_f64().unwrap();
    let h = fit["h_exponent"].as_f64().unwrap();
    assert!((l + 0.5).abs() < 0.1, "{l}");
    assert!((h + 1.0 / 3.0).abs() < 0.1, "{h}");

    assert!(strichlab(&d, &["dispersion", "--flow", "schrodinger"]).status.success());
    let fit: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("dispersion_fit.json")).unwrap()).unwrap();
    assert!(fit["h_exponent"].as_f64().unwrap().abs() < 0.05);
}

#[test]
fn config_file_feeds_the_run_and_flags_win() {
    let d = scratch("config");
    std::fs::create_dir_all(&d).unwrap();
    let cfg = d.join("run.json");
    std::fs::write(&cfg, r#"{"airy": {"count": 3}, "seed": 7}"#).unwrap();
    assert!(strichlab(&d, &["--config", cfg.to_str().unwrap(), "airy"]).status.success());
    assert_eq!(std::fs::read_to_string(d.join("airy_zeros.csv")).unwrap().lines().count(), 4);
    assert!(strichlab(&d, &["--config", cfg.to_str().unwrap(), "airy", "--count", "2"]).status.success());
    assert_eq!(std::fs::read_to_string(d.join("airy_zeros.csv")).unwrap().lines().count(), 3);
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 7);
    assert_eq!(m["config"]["airy"]["count"], 2);
    std::fs::write(&cfg, r#"{"airy": {"cnt": 3}}"#).unwrap();
    assert_eq!(strichlab(&d, &["--config", cfg.to_str().unwrap(), "airy"]).status.code(), Some(2));
}

#[test]
fn cusp_run_writes_csv_and_verdicts() {
    let d = scratch("cusp");
    let out = strichlab(
        &d,
        &["--epsilon", "0.1", "--h-min", "0.0009765625", "--h-max", "0.0009765625", "--h-steps", "1", "--r", "3,6", "cusp", "--t-resolution", "40"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(d.join("cusp_norms.csv")).unwrap();
    assert!(csv.starts_with("h,n,t,r,region,norm\n"));
    assert!(csv.lines().any(|l| l.contains(",middle,")));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("verdict.json")).unwrap()).unwrap();
    assert_eq!(v[0]["verdict"], "NOT-APPLICABLE");
    // one h: norms only, no verdict
    assert!(v[1]["verdict"].is_null());
    let again = scratch("cusp-again");
    strichlab(
        &again,
        &["--epsilon", "0.1", "--h-min", "0.0009765625", "--h-max", "0.0009765625", "--h-steps", "1", "--r", "3,6", "cusp", "--t-resolution", "40"],
    );
    assert_eq!(csv, std::fs::read_to_string(again.join("cusp_norms.csv")).unwrap());
}
