//! Command-line behaviour: exit codes, stream discipline, output formats.

use std::path::Path;

use fedosov::jet::rational;
use fedosov::manifold::{build_manifold, ManifoldSpecFile};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fedosov".to_string())
        .chain(args.iter().map(|s| s.to_string()))
        .collect();
    let code = fedosov::cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write_spec(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const CURVED: &str = r#"{
  "dimension": 2,
  "omega": [["0", "1 + x1"], ["-1 - x1", "0"]]
}"#;

#[test]
fn check_valid_darboux() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "darboux.json", r#"{"preset": "darboux"}"#);
    let (code, out, err) = run(&["check", &spec]);
    assert_eq!(code, 0, "stderr: {err}");
    assert!(out.contains("ok: dimension 2"));
    assert!(out.contains("connection: absent"));
    assert!(err.is_empty());
}

#[test]
fn check_invalid_omega_exits_one_with_named_violation() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "bad.json",
        r#"{"dimension": 2, "omega": [["0", "1"], ["1", "0"]]}"#,
    );
    let (code, out, err) = run(&["check", &spec]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("omega[1][2] != -omega[2][1]"));
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, err) = run(&["star", "nonexistent.json", "--order"]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());

    // missing file is an i/o problem
    let (code, _, _) = run(&["check", "/does/not/exist.json"]);
    assert_eq!(code, 2);

    // malformed expression on the command line
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "darboux.json", r#"{"preset": "darboux"}"#);
    let (code, _, err) = run(&["star", &spec, "--order", "1", "-f", "x1 +", "-g", "x2"]);
    assert_eq!(code, 2);
    assert!(err.contains("parse error"));

    // unknown identifier names the culprit
    let (code, _, err) = run(&["star", &spec, "--order", "1", "-f", "x3", "-g", "x2"]);
    assert_eq!(code, 2);
    assert!(err.contains("x3"));
}

#[test]
fn help_goes_to_stdout_with_exit_zero() {
    let (code, out, err) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("star"));
    assert!(err.is_empty());
}

#[test]
fn star_on_darboux_matches_moyal_command() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "darboux.json", r#"{"preset": "darboux"}"#);
    let (code, star_out, _) = run(&["star", &spec, "--order", "1", "-f", "x1", "-g", "x2"]);
    assert_eq!(code, 0);
    // c0 = x1 x2; c1 = -(1/2) omega^{12} i = (1/2) i on the standard chart
    assert_eq!(star_out, "c0 = x1*x2\nc1 = (1/2)*i\n");

    let (code, moyal_out, _) = run(&[
        "moyal", "--order", "1", "-f", "x1", "-g", "x2", "--dim", "2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(moyal_out, star_out);
}

#[test]
fn connection_on_darboux_reports_zero_correction() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "darboux.json", r#"{"preset": "darboux"}"#);
    let (code, out, _) = run(&["connection", &spec, "--order", "6"]);
    assert_eq!(code, 0);
    for degree in 3..=6 {
        assert!(out.contains(&format!("rho[{degree}] = 0")));
    }
}

#[test]
fn curved_chart_requires_symplectize() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "curved.json", CURVED);

    let (code, _, err) = run(&["star", &spec, "--order", "1", "-f", "x1", "-g", "x2"]);
    assert_eq!(code, 1);
    assert!(err.contains("symplectize"));

    let (code, out, _) = run(&[
        "star",
        &spec,
        "--order",
        "1",
        "-f",
        "x1",
        "-g",
        "x2",
        "--symplectize",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("c0 = x1*x2"));
}

#[test]
fn symplectize_output_feeds_back_as_a_valid_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "curved.json", CURVED);
    let (code, out, _) = run(&["symplectize", &spec, "--json", "--jet-order", "8"]);
    assert_eq!(code, 0);
    let value: serde_json::Value = serde_json::from_str(&out).unwrap();

    // rebuild a description with the emitted symbols and validate it
    let mut file: ManifoldSpecFile = serde_json::from_str(CURVED).unwrap();
    file.christoffel = Some(
        value["christoffel"]
            .as_object()
            .unwrap()
            .iter()
            .map(|(k, v)| (k.clone(), v.as_str().unwrap().to_string()))
            .collect(),
    );
    let loaded = build_manifold(file, Some(8), 8).unwrap();
    let connection = loaded.connection.unwrap();
    assert!(connection.is_torsion_free());
    assert!(connection.preserves_omega());

    // frozen leading coefficients: Gamma^1_11 = 2/3 - 2/3 x1 + ...,
    // Gamma^2_12 = 1/3 - 1/3 x1 + ...
    assert_eq!(
        connection.christoffel()[0][0][0].coefficient(&[0, 0]),
        rational(2, 3)
    );
    assert_eq!(
        connection.christoffel()[1][0][1].coefficient(&[1, 0]),
        rational(-1, 3)
    );
}

#[test]
fn flat_section_taylor_output() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "darboux.json", r#"{"preset": "darboux"}"#);
    let (code, out, _) = run(&["flat-section", &spec, "--order", "3", "-f", "x1*x2"]);
    assert_eq!(code, 0);
    assert!(out.contains("A[0] = x1*x2"));
    assert!(out.contains("A[1] = x2*e1 + x1*e2"));
    assert!(out.contains("A[2] = e1*e2"));
    assert!(out.contains("A[3] = 0"));
}

#[test]
fn flat_section_accepts_series_input() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "darboux.json", r#"{"preset": "darboux"}"#);
    let (code, out, _) = run(&["flat-section", &spec, "--order", "4", "-f", "x1,x2"]);
    assert_eq!(code, 0);
    // the t a_1 entry shows up in degree 2 alongside the second Taylor term
    assert!(out.contains("A[2] = x2*t"));
}

#[test]
fn cocycle_exit_code_is_reserved() {
    // no real input can trigger exit 3, so just pin the mapping
    assert_eq!(fedosov::Error::Cocycle { degree: 4 }.exit_code(), 3);
    assert_eq!(fedosov::Error::Internal("x".into()).exit_code(), 3);
}

#[test]
fn json_check_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "curved.json", CURVED);
    let (code, out, _) = run(&["check", &spec, "--json"]);
    assert_eq!(code, 0);
    let value: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(value["valid"], serde_json::Value::Bool(true));
    assert_eq!(value["dimension"], 2);
    assert_eq!(value["omega_constant"], serde_json::Value::Bool(false));
}
