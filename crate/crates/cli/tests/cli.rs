use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ham(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ham"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run ham")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn only_subdir(dir: &Path) -> PathBuf {
    let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(entries.len(), 1, "{entries:?}");
    entries.pop().unwrap()
}

#[test]
fn solve_reports_table_one_row() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ham(tmp.path(), &["solve", "--problem", "bsde1d", "--order", "15", "--out", "runs"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("y0 = 5.0000e-1  error = 3.1896e-9"), "{text}");
    assert!(text.contains("error = -8.1927e-9"), "{text}");

    let run = only_subdir(&tmp.path().join("runs"));
    assert_eq!(run.file_name().unwrap(), "bsde1d_15_-1");
    for f in ["series.json", "observables.json", "observables.csv", "timing.json", "manifest.json"] {
        assert!(run.join(f).is_file(), "{f}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["config"]["order"], 15);
}

#[test]
fn solve_matches_the_printed_series() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ham(tmp.path(), &["solve", "--problem", "fbsde", "--order", "3", "--out", "."]);
    assert!(out.status.success());
    let series: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("fbsde_3_-1/series.json")).unwrap()).unwrap();
    let phis = series["components"][0].as_array().unwrap();
    assert_eq!(phis.len(), 4);
    // phi_3 = -1/6 t^3 cos(x)
    let terms = phis[3]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["coeff"], "-1/6");
    assert_eq!(terms[0]["t_pow"], 3);
    assert!(stdout(&out).contains("error = 0.00000e0"));
}

#[test]
fn order_zero_is_the_initial_guess() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ham(tmp.path(), &["solve", "--problem", "bsde1d", "--order", "0", "--format", "csv", "--out", "."]);
    assert!(out.status.success());
    let run = tmp.path().join("bsde1d_0_-1");
    assert!(run.join("observables.csv").is_file());
    assert!(!run.join("observables.json").exists());
    let csv = fs::read_to_string(run.join("observables.csv")).unwrap();
    assert!(csv.starts_with("name,approx,exact,error\n"), "{csv}");
}

#[test]
fn configuration_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ham(tmp.path(), &["table", "--problem", "bsde1d", "--orders", "", "--out", "."]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    fs::write(tmp.path().join("cfg.json"), r#"{"problem": "bsde1d", "order": 2, "colour": "red"}"#).unwrap();
    let out = ham(tmp.path(), &["solve", "--config", "cfg.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    let out = ham(tmp.path(), &["solve", "--problem", "bsde1d", "--order", "2", "--c0", "abc"]);
    assert_eq!(out.status.code(), Some(2));

    let out = ham(tmp.path(), &["solve", "--problem", "fbsdeNd", "--d", "0", "--order", "2"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn term_cap_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["solve", "--problem", "fbsdeNd", "--d", "4", "--order", "6", "--term-cap", "100", "--out", "."];
    let out = ham(tmp.path(), &args);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_and_flags_merge() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"problem": "bsde2d", "orders": [2, 4], "quadrature": "tensor-gauss:16", "out": "from-config"}"#;
    fs::write(tmp.path().join("cfg.json"), cfg).unwrap();
    let out = ham(tmp.path(), &["table", "--config", "cfg.json", "--c0", "-9/10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = tmp.path().join("from-config/bsde2d_4_-9over10");
    let table = fs::read_to_string(run.join("table.csv")).unwrap();
    assert!(table.starts_with("m,E_exact,err_y0_1,err_y0_2\n"), "{table}");
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        let args = [
            "sweep", "--problem", "bsde1d", "--orders", "3,5", "--c0-grid", "-1.2:-0.8:0.1", "--quadrature",
            "quasi-random:256", "--seed", "5", "--out", out,
        ];
        let o = ham(tmp.path(), &args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        only_subdir(&tmp.path().join(out))
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["sweep.csv", "sweep.json", "sweep.dat", "norm.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let table = |out: &str| {
        let o = ham(tmp.path(), &["table", "--problem", "fbsde", "--orders", "2,4", "--out", out]);
        assert!(o.status.success());
        fs::read(only_subdir(&tmp.path().join(out)).join("table.csv")).unwrap()
    };
    assert_eq!(table("c"), table("d"));
}

#[test]
fn seed_requires_quasi_random() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ham(tmp.path(), &["table", "--problem", "bsde1d", "--orders", "2", "--seed", "3", "--out", "."]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_filters_by_prefix() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ham(tmp.path(), &["verify", "--only", "appendix-identity", "--json", "checks.json"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "PASS appendix-identity: phi_0..phi_12 match");
    let checks: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("checks.json")).unwrap()).unwrap();
    assert_eq!(checks.as_array().unwrap().len(), 1);
    assert_eq!(checks[0]["passed"], true);

    let out = ham(tmp.path(), &["verify", "--only", "nothing-by-this-name"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corrupted_fixture_fails_verification() {
    let tmp = tempfile::tempdir().unwrap();
    let bundled = include_str!("../../../fixtures/printed_series.json");
    let mut fixtures: serde_json::Value = serde_json::from_str(bundled).unwrap();
    fixtures["fbsde"]["partial_sums"][1][0] = "sin(x) + t*cos(x) - 1/3*t^2*sin(x)".into();
    fs::write(tmp.path().join("bad.json"), fixtures.to_string()).unwrap();
    let out = ham(tmp.path(), &["verify", "--only", "fixture", "--fixtures", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("FAIL fixture:fbsde"), "{text}");
    assert!(text.contains("PASS fixture:bsde1d"), "{text}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("fixture:fbsde"));

    fs::write(tmp.path().join("junk.json"), "{not json").unwrap();
    let out = ham(tmp.path(), &["verify", "--only", "fixture", "--fixtures", "junk.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn list_shows_registries() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ham(tmp.path(), &["list"]);
    let text = stdout(&out);
    for name in ["bsde1d", "fbsdeNd", "tensor-gauss", "quasi-random", "symbolic"] {
        assert!(text.contains(name), "{name}");
    }
}
