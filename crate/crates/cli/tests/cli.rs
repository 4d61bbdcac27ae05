use std::fs;
use std::path::Path;

use assert_cmd::Command;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::cargo_bin("p4ladder").unwrap()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn verify_algebra_reports_orientation() {
    let tmp = TempDir::new().unwrap();
    let out = bin()
        .args(["verify-algebra", "--n-max", "2", "--out"])
        .arg(tmp.path())
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("b2 = 6, b1 = -4 - 8*alpha, b0 = 2*beta + 2*alpha^2"));
    let s = summary(tmp.path());
    assert_eq!(s["passed"], true);
    assert_eq!(s["bracket"]["orientation"], "[c,c†]");
    assert_eq!(s["bracket"]["sign_vs_reversed_display"], -1);
    assert!(s["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn flipped_w3_fails_with_named_identity() {
    let tmp = TempDir::new().unwrap();
    let out = bin()
        .args(["verify-algebra", "--n-max", "2", "--flip-w3", "--out"])
        .arg(tmp.path())
        .assert()
        .code(1)
        .get_output()
        .stderr
        .clone();
    assert!(String::from_utf8(out).unwrap().contains("failed identity: [H,c] = -2c"));
    assert_eq!(summary(tmp.path())["passed"], false);
}

#[test]
fn build_states_lowest() {
    let tmp = TempDir::new().unwrap();
    bin().args(["build-states", "--kind", "lowest", "--n-max", "2", "--out"]).arg(tmp.path()).assert().success();
    let st = p4ladder::StateExpr::from_json(&fs::read_to_string(tmp.path().join("lowest_2.json")).unwrap()).unwrap();
    assert_eq!(st.level, 2);
    // Highest f power of the displayed polynomial body * f^2.
    let disp = st.display_polynomial();
    assert_eq!(disp.max_f_exponent(), Some(8));
    assert_eq!(disp.coeff(0, 8, 0), p4ladder::ParamScalar::from_int(4));
    let csv = fs::read_to_string(tmp.path().join("lowest_1_support.csv")).unwrap();
    assert!(csv.starts_with("i,fp_exp,parity,max_x_degree\n"));
    let log = fs::read_to_string(tmp.path().join("lowest_eigen.log")).unwrap();
    assert_eq!(log.lines().count(), 3);
    assert!(log.lines().nth(2).unwrap().starts_with("n=2 E=4 "));
}

#[test]
fn build_states_highest_energy() {
    let tmp = TempDir::new().unwrap();
    bin().args(["build-states", "--kind", "highest", "--n-max", "1", "--out"]).arg(tmp.path()).assert().success();
    let log = fs::read_to_string(tmp.path().join("highest_eigen.log")).unwrap();
    assert!(log.contains("n=1 E=-2 - s + alpha residual=exact zero"));
}

#[test]
fn build_states_zero_mode_only() {
    let tmp = TempDir::new().unwrap();
    bin().args(["build-states", "--kind", "lowest", "--n-max", "0", "--out"]).arg(tmp.path()).assert().success();
    assert!(tmp.path().join("lowest_0.json").exists());
    assert!(!tmp.path().join("lowest_1.json").exists());
}

#[test]
fn build_states_resource_ceiling() {
    let tmp = TempDir::new().unwrap();
    let err = bin()
        .args(["build-states", "--kind", "lowest", "--n-max", "3", "--term-limit", "20", "--out"])
        .arg(tmp.path())
        .assert()
        .code(3)
        .get_output()
        .stderr
        .clone();
    assert!(String::from_utf8(err).unwrap().contains("at level 2"));
}

#[test]
fn numeric_run_default() {
    let tmp = TempDir::new().unwrap();
    bin().args(["numeric-run", "--out"]).arg(tmp.path()).assert().success();
    let s = summary(tmp.path());
    let rows = s["residuals"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0]["residual"].as_f64().unwrap() <= 1e-6);
    let csv = fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("x,f,fp,intW3,state_0,state_1,state_2\n"));
    let table = fs::read_to_string(tmp.path().join("residuals.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn numeric_run_highest_negative_beta() {
    let tmp = TempDir::new().unwrap();
    bin()
        .args(["numeric-run", "--beta", "-1", "--kind", "highest", "--n-max", "1", "--out"])
        .arg(tmp.path())
        .assert()
        .success();
    let s = summary(tmp.path());
    assert_eq!(s["s_branch"][0], 1.0);
    assert_eq!(s["s_branch"][1], 0.0);
    assert_eq!(s["residuals"][1]["energy_re"], -3.0);
    let csv = fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("x,f,fp,intW3,intW1,"));
}

#[test]
fn numeric_run_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        bin().args(["numeric-run", "--n-max", "1", "--out"]).arg(d.path()).assert().success();
    }
    for f in ["summary.json", "trajectory.csv", "residuals.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn numeric_run_config_errors() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{\"alpha\": ").unwrap();
    bin().args(["numeric-run", "--config"]).arg(&bad).arg("--out").arg(tmp.path()).assert().code(2);

    fs::write(&bad, "{\"alpha\": 0.0, \"gamma\": 1}").unwrap();
    bin().args(["numeric-run", "--config"]).arg(&bad).arg("--out").arg(tmp.path()).assert().code(2);

    // The W1 prefactor is complex for beta > 0.
    bin().args(["numeric-run", "--kind", "highest", "--out"]).arg(tmp.path()).assert().code(2);
}

#[test]
fn numeric_run_singular_start() {
    let tmp = TempDir::new().unwrap();
    bin().args(["numeric-run", "--f0", "0", "--out"]).arg(tmp.path()).assert().code(3);
}

#[test]
fn multidim_default_and_mixed() {
    let tmp = TempDir::new().unwrap();
    bin().args(["multidim", "--out"]).arg(tmp.path()).assert().success();
    let energies = fs::read_to_string(tmp.path().join("energies.csv")).unwrap();
    assert!(energies.lines().any(|l| l == "1,2,6"));

    let cfg = tmp.path().join("mixed.json");
    fs::write(
        &cfg,
        r#"{"axes": [{"alpha": 0.0, "beta": 2.0}, {"alpha": 1.5, "beta": 3.0}, {"alpha": -0.5, "beta": 1.0}], "n_max": 1}"#,
    )
    .unwrap();
    let out = tmp.path().join("mixed");
    bin().args(["multidim", "--config"]).arg(&cfg).arg("--out").arg(&out).assert().success();
    let s = summary(&out);
    assert_eq!(s["n_axes"], 3);
    assert_eq!(s["weights"].as_array().unwrap().len(), 9);
    assert!(s["weights"].as_array().unwrap().iter().all(|w| w["commutes"] == true));
    assert_eq!(s["energies"].as_array().unwrap().len(), 8);
}

#[test]
fn multidim_needs_two_axes() {
    let tmp = TempDir::new().unwrap();
    bin().args(["multidim", "--axes", "1", "--out"]).arg(tmp.path()).assert().code(2);
}

#[test]
fn unknown_subcommand_is_usage_error() {
    bin().arg("frobnicate").assert().code(2);
}
