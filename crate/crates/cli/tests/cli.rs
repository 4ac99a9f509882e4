use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn convexa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convexa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_scenario(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

const SMALL: &str = r#"
seed = 7

[fixtures.g1]
kind = "quadratic"
diag = [1.0]

[fixtures.g2]
kind = "quadratic"
diag = [1.0, 4.0]

[[suite]]
name = "asa-duality"
lambdas = [0.25, 0.5, 0.75]
maps = 1
"#;

#[test]
fn list_shows_every_suite() {
    let o = convexa(&["list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for id in ["legendre", "asa-duality", "theorem-norm", "lift-body", "valuation", "gaussian-smoke"] {
        assert!(text.contains(id), "{id} missing from\n{text}");
    }
    let o = convexa(&["list", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 13);
}

#[test]
fn small_scenario_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = convexa(&["run", "--scenario", &scenario, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# generated_at_unix="));
    assert_eq!(lines.next().unwrap(), "suite,fixture,lambda,p,s,lhs,rhs,margin,error_budget,verdict");
    // 3 duality rows, 1 log-convexity row, 3 homogeneity rows per fixture.
    assert_eq!(lines.count(), 14);

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["environment"]["seed"], 7);
    assert_eq!(json["summary"]["fail"], 0);
    assert_eq!(json["integration"]["method"], "lattice");
    assert!(out.join("profiles").join("asa-duality.dat").exists());
}

#[test]
fn no_timestamp_and_seed_flag() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), SMALL);
    let out = dir.path().join("o");
    let o = convexa(&[
        "run",
        "--scenario",
        &scenario,
        "--out",
        out.to_str().unwrap(),
        "--no-timestamp",
        "--seed",
        "99",
        "--fixture",
        "g1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.starts_with("suite,"));
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1).unwrap().starts_with("g1")));
    let json = fs::read_to_string(out.join("report.json")).unwrap();
    assert!(!json.contains("generated_at_unix"));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["environment"]["seed"], 99);
}

#[test]
fn malformed_scenario_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), "seed = 1\n[fixtures.g]\nkind = \"quadratic\"\ndiag = [1.0]\nwidth = 2\n");
    let o = convexa(&["run", "--scenario", &scenario, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("width"), "{}", stderr(&o));

    let scenario = write_scenario(dir.path(), "[fixtures.g]\nkind = \"quadratic\"\ndiag = [1.0]\n");
    let o = convexa(&["run", "--scenario", &scenario]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));

    let scenario = write_scenario(dir.path(), "seed = 1\n[[suite]]\nname = \"bodies\"\nfixtures = [\"ghost\"]\n");
    let o = convexa(&["run", "--scenario", &scenario]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ghost"), "{}", stderr(&o));
}

#[test]
fn bad_flags_exit_with_two() {
    assert_eq!(convexa(&["run", "--bogus"]).status.code(), Some(2));
    assert_eq!(convexa(&["run", "--lambda-grid", "0:1"]).status.code(), Some(2));
    let o = convexa(&["run", "--suite", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gaussian-smoke"), "{}", stderr(&o));
    let o = convexa(&["run", "--scenario", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flagged_rows_keep_exit_zero() {
    // A non-symmetric polygon is outside the isoperimetric hypotheses.
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        r#"
seed = 3

[fixtures.tri]
kind = "polygon"
vertices = [[1.0, 0.0], [-0.5, 0.8], [-0.5, -0.8]]

[[suite]]
name = "bodies"
p = [1.0]
"#,
    );
    let o = convexa(&["run", "--scenario", &scenario, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("0 fail, 1 flagged"), "{stdout}");
}

#[test]
fn lambda_grid_gives_nine_rows_per_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let o = convexa(&[
        "run",
        "--suite",
        "duality",
        "--fixture",
        "smooth-1,smooth-2",
        "--lambda-grid",
        "0.1:0.9:9",
        "--no-timestamp",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    for f in ["smooth-1", "smooth-2"] {
        let n = csv.lines().filter(|l| l.starts_with(&format!("asa-duality,{f},"))).count();
        assert_eq!(n, 9, "{f}");
    }
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",pass")));
}
