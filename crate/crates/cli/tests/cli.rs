use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semitoric-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

/// Data rows of a CSV report, skipping the `#` header lines and the column row.
fn rows(text: &str) -> Vec<Vec<String>> {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    rdr.records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn csv_starts_with_schema_line() {
    let o = lab(&["transitions"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    assert!(
        first.starts_with("# semitoric-lab/1 transitions {"),
        "{first}"
    );
    assert!(text.contains("which,closed_form,numeric,abs_diff"));
}

#[test]
fn transition_times_for_default_gamma() {
    let o = lab(&["transitions", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["schema"], "semitoric-lab/1");
    let rows = doc["rows"].as_array().unwrap();
    let tm = rows[0][1].as_f64().unwrap();
    let tp = rows[1][1].as_f64().unwrap();
    assert!((tm - 5.0 / 14.0).abs() < 1e-12);
    assert!((tp - 5.0 / 6.0).abs() < 1e-12);
}

#[test]
fn fixed_point_types_at_half() {
    let o = lab(&["fixed-points", "--t", "0.5"]);
    assert!(o.status.success());
    let rows = rows(&stdout(&o));
    assert_eq!(rows.len(), 8);
    for r in &rows {
        let want = if ["A", "B", "C", "D"].contains(&r[0].as_str()) {
            "FocusFocus"
        } else {
            "EllipticElliptic"
        };
        assert_eq!(r[1], want, "{}", r[0]);
    }
}

#[test]
fn reduced_space_singular_levels() {
    let o = lab(&[
        "reduced-space",
        "--j",
        "1",
        "--grid",
        "4x4",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let sing: Vec<f64> = doc["summary"]["singular_h"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(sing.len(), 2);
    assert!(sing[0].abs() < 1e-9 && (sing[1] - 3.0).abs() < 1e-9);
}

#[test]
fn double_pinch_fibre_passes() {
    let o = lab(&[
        "fibre", "--value", "2,0", "--grid", "4x8", "--format", "json",
    ]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["summary"]["mode"], "double-pinch");
    assert_eq!(doc["summary"]["passed"], true);
    let pinches = doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r[0] == "pinch")
        .count();
    assert_eq!(pinches, 2);
}

#[test]
fn output_is_deterministic() {
    let args = [
        "fibre", "--t", "0.2", "--value", "1.5,0.1", "--n", "64", "--seed", "7",
    ];
    let a = lab(&args);
    let b = lab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn svg_carries_schema_comment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("image.svg");
    let o = lab(&[
        "momentum-image",
        "--grid",
        "6x5x6",
        "--svg",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("<!-- semitoric-lab/1 momentum-image {"));
    let inline = lab(&["momentum-image", "--grid", "6x5x6", "--format", "svg"]);
    assert_eq!(stdout(&inline), svg);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fp.csv");
    let o = lab(&["fixed-points", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(rows(&std::fs::read_to_string(&path).unwrap()).len(), 8);
}

#[test]
fn exit_codes() {
    // Invalid parameters and usage errors.
    assert_eq!(
        lab(&["transitions", "--gamma", "0.03"]).status.code(),
        Some(1)
    );
    assert_eq!(lab(&["reduced-space", "--j", "3.5"]).status.code(), Some(1));
    assert_eq!(
        lab(&["fixed-points", "--format", "svg"]).status.code(),
        Some(1)
    );
    assert_eq!(lab(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        lab(&["classify", "--label", "A", "--j", "1"]).status.code(),
        Some(1)
    );
    // A check that runs but misses an unattainable tolerance.
    assert_eq!(
        lab(&["transitions", "--tol", "1e-30"]).status.code(),
        Some(3)
    );
    assert_eq!(lab(&["--help"]).status.code(), Some(0));
}

#[test]
fn empty_fibre_is_not_an_error() {
    let o = lab(&["fibre", "--t", "0.2", "--value", "10,10", "--n", "16"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# samples=0"));
    assert!(rows(&text).is_empty());
}

#[test]
fn verify_quick_suites_pass() {
    for suite in [
        "transitions",
        "fixed-points",
        "classification",
        "identity-x2y2",
    ] {
        let o = lab(&["verify", "--suite", suite, "--n", "50"]);
        assert!(
            o.status.success(),
            "{suite}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let r = rows(&stdout(&o));
        assert_eq!(r.len(), 1);
        assert_eq!(r[0][5], "true");
    }
}
