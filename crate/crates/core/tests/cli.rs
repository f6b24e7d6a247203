mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn pulsenest(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pulsenest"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn phases_of(doc: &Value) -> Vec<f64> {
    doc["phases_radians"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows of a sweep CSV as `[ε, f, F, 1 − F]`.
fn csv_rows(text: &str) -> Vec<[f64; 4]> {
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    assert_eq!(lines.next(), Some("epsilon,f,fidelity,infidelity"));
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3]]
        })
        .collect()
}

#[test]
fn fn1_file_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let o = pulsenest(
        &[
            "sequence", "--family", "fn", "--n", "1", "--sign", "+", "--out", "f1.json",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = read_json(&dir.path().join("f1.json"));
    assert_eq!(doc["frame"], "applied");
    let psi = (-0.25f64).acos();
    let expected = [3.0 * psi, psi, 0.0, -psi, -3.0 * psi];
    let got = phases_of(&doc);
    assert_eq!(got.len(), 5);
    for (a, b) in got.iter().zip(expected) {
        assert!(common::angle_diff(*a, b) < 1e-14, "{got:?}");
    }
    // Writers emit at least 17 significant digits.
    let raw = std::fs::read_to_string(dir.path().join("f1.json")).unwrap();
    assert!(
        raw.contains("5.4704297458109261e+0") || raw.contains("5.4704297458109261e0"),
        "{raw}"
    );
    assert_eq!(doc["config"]["family"], "fn");
}

#[test]
fn fn0_is_a_single_zero_phase() {
    let dir = TempDir::new().unwrap();
    let o = pulsenest(&["sequence", "--family", "fn", "--n", "0"], dir.path());
    assert!(o.status.success());
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(phases_of(&doc), vec![0.0]);
}

#[test]
fn symmetric5_upper_branch_is_a_symmetric_not_gate() {
    let dir = TempDir::new().unwrap();
    let o = pulsenest(&["sequence", "--family", "symmetric5", "--branch", "upper"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let p = phases_of(&serde_json::from_str(&stdout(&o)).unwrap());
    assert_eq!(p.len(), 5);
    // Shape (α, β, 2β − 2α, β, α).
    assert_eq!(p[0], p[4]);
    assert_eq!(p[1], p[3]);
    assert!(common::angle_diff(p[2], 2.0 * p[1] - 2.0 * p[0]) < 1e-14);
    // Exact NOT gate with the first-order term cancelled.
    let not = common::pulse(PI, 0.0, 0.0, 0.0);
    assert!(1.0 - common::fidelity(&not, &common::product(&p, 0.0, 0.0)) < 1e-14);
    let axes = common::toggling_axes(&p);
    let (x, y) = axes.iter().fold((0.0, 0.0), |(x, y), a| (x + a.cos(), y + a.sin()));
    assert!(x.hypot(y) < 1e-13);
    let lower = pulsenest(&["sequence", "--family", "symmetric5", "--branch", "lower"], dir.path());
    let q = phases_of(&serde_json::from_str(&stdout(&lower)).unwrap());
    for (a, b) in p.iter().zip(&q) {
        assert!(common::angle_diff(*a, -b) < 1e-14);
    }
}

#[test]
fn invalid_family_parameters_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["sequence", "--family", "gf"][..],
        &["sequence", "--family", "fn", "--n", "99"],
        &["sequence", "--family", "fn", "--sign", "x"],
        &["sequence", "--family", "fn", "--sign", "+", "--branch", "lower"],
        &["sequence", "--family", "fn", "--precision", "0"],
        &["order"],
        &["frobnicate"],
    ] {
        let o = pulsenest(args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
    assert_eq!(pulsenest(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(pulsenest(&["--version"], dir.path()).status.code(), Some(0));
}

#[test]
fn degrees_change_console_only() {
    let dir = TempDir::new().unwrap();
    let o = pulsenest(
        &["sequence", "--family", "fn", "--degrees", "--out", "f1.json"],
        dir.path(),
    );
    assert!(o.status.success());
    let console = stdout(&o);
    assert!(console.contains("deg"));
    let first_deg: f64 = console
        .lines()
        .nth(1)
        .unwrap()
        .split_whitespace()
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    let first_rad = phases_of(&read_json(&dir.path().join("f1.json")))[0];
    assert!((first_deg - first_rad.to_degrees()).abs() < 1e-12);
    assert!(first_rad < 2.0 * PI);
}

#[test]
fn toggling_round_trip_through_files() {
    let dir = TempDir::new().unwrap();
    pulsenest(
        &["sequence", "--family", "fn", "--n", "2", "--out", "f2.json"],
        dir.path(),
    );
    let o = pulsenest(&["toggling", "--in", "f2.json", "--out", "tog.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let tog = read_json(&dir.path().join("tog.json"));
    assert_eq!(tog["frame"], "toggling");
    assert_eq!(tog["config"]["to"], "toggling");
    let applied = phases_of(&read_json(&dir.path().join("f2.json")));
    for (a, b) in phases_of(&tog).iter().zip(common::toggling_axes(&applied)) {
        assert!(common::angle_diff(*a, b) < 1e-12);
    }
    let o = pulsenest(&["toggling", "--in", "tog.json", "--out", "back.json"], dir.path());
    assert!(o.status.success());
    let back = phases_of(&read_json(&dir.path().join("back.json")));
    for (a, b) in back.iter().zip(&applied) {
        assert!(common::angle_diff(*a, *b) < 1e-12);
    }
}

#[test]
fn sweep_rows_and_reference_values() {
    let dir = TempDir::new().unwrap();
    pulsenest(
        &["sequence", "--family", "fn", "--n", "1", "--out", "f1.json"],
        dir.path(),
    );
    pulsenest(
        &["sequence", "--family", "fn", "--n", "2", "--out", "f2.json"],
        dir.path(),
    );
    std::fs::write(
        dir.path().join("pi.json"),
        r#"{"label": "pi", "frame": "applied", "phases_radians": [0]}"#,
    )
    .unwrap();
    let grid = ["--eps-min", "-1", "--eps-max", "1", "--steps", "401"];

    let o = pulsenest(
        &[&["sweep", "--in", "f1.json", "--out", "f1.csv"][..], &grid].concat(),
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("f1.csv")).unwrap();
    assert!(text.starts_with("# config: {"));
    let f1 = csv_rows(&text);
    assert_eq!(f1.len(), 401);
    assert_eq!(f1[200][0], 0.0);
    assert!((f1[200][2] - 1.0).abs() < 1e-15);

    let o = pulsenest(&[&["sweep", "--in", "pi.json"][..], &grid].concat(), dir.path());
    let single = csv_rows(&stdout(&o));
    let row = single.iter().find(|r| (r[0] - 0.5).abs() < 1e-12).unwrap();
    assert!((row[2] - (PI / 4.0).cos()).abs() < 1e-14, "{row:?}");

    let o = pulsenest(&[&["sweep", "--in", "f2.json"][..], &grid].concat(), dir.path());
    let f2 = csv_rows(&stdout(&o));
    let i = f1.iter().position(|r| (r[0] - 0.3).abs() < 1e-12).unwrap();
    assert!(f2[i][3] < f1[i][3], "F2 {:?} vs F1 {:?}", f2[i], f1[i]);
    // Against the brute-force product.
    let phases = phases_of(&read_json(&dir.path().join("f2.json")));
    let oracle = 1.0 - common::fidelity(&common::pulse(PI, 0.0, 0.0, 0.0), &common::product(&phases, 0.3, 0.0));
    assert!((f2[i][3] - oracle).abs() < 1e-13);
}

#[test]
fn sweep_with_off_resonance_grid_is_epsilon_major() {
    let dir = TempDir::new().unwrap();
    pulsenest(&["sequence", "--family", "fn", "--out", "f1.json"], dir.path());
    let o = pulsenest(
        &[
            "sweep",
            "--in",
            "f1.json",
            "--eps-min",
            "-0.1",
            "--eps-max",
            "0.1",
            "--steps",
            "3",
            "--f",
            "0,0.05,-0.05",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 9);
    assert_eq!([rows[0][0], rows[0][1]], [-0.1, 0.0]);
    assert_eq!([rows[1][0], rows[1][1]], [-0.1, 0.05]);
    assert_eq!([rows[3][0], rows[3][1]], [0.0, 0.0]);
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    pulsenest(
        &["sequence", "--family", "fn", "--n", "2", "--out", "a.json"],
        dir.path(),
    );
    pulsenest(
        &["sequence", "--family", "fn", "--n", "2", "--out", "b.json"],
        dir.path(),
    );
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    assert!(
        a == std::fs::read(dir.path().join("b.json"))
            .unwrap()
            .replace_path("b.json", "a.json")
    );
    let args = ["sweep", "--in", "a.json", "--steps", "51", "--precision", "30"];
    assert_eq!(pulsenest(&args, dir.path()).stdout, pulsenest(&args, dir.path()).stdout);
    let args = ["order", "--in", "a.json", "--json", "--precision", "40"];
    assert_eq!(pulsenest(&args, dir.path()).stdout, pulsenest(&args, dir.path()).stdout);
}

trait ReplacePath {
    fn replace_path(self, from: &str, to: &str) -> Vec<u8>;
}

impl ReplacePath for Vec<u8> {
    fn replace_path(self, from: &str, to: &str) -> Vec<u8> {
        String::from_utf8(self).unwrap().replace(from, to).into_bytes()
    }
}

#[test]
fn high_precision_phase_file_round_trips() {
    let dir = TempDir::new().unwrap();
    pulsenest(
        &[
            "sequence",
            "--family",
            "fn",
            "--n",
            "1",
            "--precision",
            "50",
            "--out",
            "hp.json",
        ],
        dir.path(),
    );
    let raw = std::fs::read_to_string(dir.path().join("hp.json")).unwrap();
    // ψ = arccos(−1/4) to 50 digits appears verbatim as the second phase.
    assert!(
        raw.contains("1.8234765819369752727169791286334624143507784327844"),
        "{raw}"
    );
    let o = pulsenest(&["toggling", "--in", "hp.json", "--precision", "50"], dir.path());
    assert!(o.status.success());
    assert!(stderr(&o).is_empty(), "{}", stderr(&o));
    // Reading a double-precision file at 50 digits warns about the file's resolution.
    pulsenest(&["sequence", "--family", "fn", "--out", "lp.json"], dir.path());
    let o = pulsenest(&["toggling", "--in", "lp.json", "--precision", "50"], dir.path());
    assert!(o.status.success());
    assert!(stderr(&o).contains("significant digits"), "{}", stderr(&o));
}

#[test]
fn order_reports_text_and_json() {
    let dir = TempDir::new().unwrap();
    let o = pulsenest(&["order", "--family", "fn", "--n", "1", "--out", "r.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for key in ["exponent:", "rounded order: 6", "residual:", "window:"] {
        assert!(text.contains(key), "{text}");
    }
    let r = read_json(&dir.path().join("r.json"));
    assert_eq!(r["rounded_order"], 6);
    assert_eq!(r["precision"], 16);
    assert_eq!(r["window"].as_array().unwrap().len(), 2);
    assert_eq!(r["config"]["command"], "order");
}

#[test]
fn order_at_low_precision_warns_and_explains() {
    let dir = TempDir::new().unwrap();
    let o = pulsenest(
        &["order", "--family", "fn", "--n", "3", "--precision", "15"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("warning: 125-pulse sequence"), "{err}");
    assert!(err.contains("raise the working precision"), "{err}");
}

#[test]
fn off_resonance_order_of_f1() {
    let dir = TempDir::new().unwrap();
    let o = pulsenest(
        &[
            "order",
            "--family",
            "fn",
            "--n",
            "1",
            "--kind",
            "offresonance",
            "--json",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["kind"], "offresonance");
    assert_eq!(r["rounded_order"], 2);
}

#[test]
fn io_and_malformed_input_errors() {
    let dir = TempDir::new().unwrap();
    let o = pulsenest(&["sweep", "--in", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    std::fs::write(dir.path().join("bad.json"), "{\"label\": 1}").unwrap();
    assert_eq!(
        pulsenest(&["sweep", "--in", "bad.json"], dir.path()).status.code(),
        Some(1)
    );
    std::fs::write(
        dir.path().join("empty.json"),
        r#"{"label": "e", "frame": "applied", "phases_radians": []}"#,
    )
    .unwrap();
    assert_eq!(
        pulsenest(&["toggling", "--in", "empty.json"], dir.path()).status.code(),
        Some(1)
    );
    pulsenest(&["sequence", "--family", "fn", "--out", "f1.json"], dir.path());
    assert_eq!(
        pulsenest(&["sweep", "--in", "f1.json", "--steps", "1"], dir.path())
            .status
            .code(),
        Some(1)
    );
    let o = pulsenest(
        &["sequence", "--family", "fn", "--out", "no/such/dir/x.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn check_suite_passes_and_flags_a_perturbed_psi() {
    let dir = TempDir::new().unwrap();
    let o = pulsenest(&["check", "--depth", "1"], dir.path());
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("all checks passed"));

    let o = pulsenest(
        &["check", "--depth", "3", "--precision", "15", "--perturb-psi", "1e-3"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.contains("FAIL  delta1_cancellation"), "{out}");
    assert!(out.contains("SKIP  order_F3"), "{out}");
    assert!(!out.contains("FAIL  order_F3"), "{out}");
    assert!(stderr(&o).contains("delta1_cancellation"));
}
