//! End-to-end runs of the `additive-lab` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

const WILD: &str = r#"{
  "basis": [{"label": "e1", "embedding": 1.0}, {"label": "e2", "embedding": 1.4142135623730951}],
  "assignments": {"e2": "1/1"},
  "scale": 6.283185307179586
}"#;

struct Run {
    code: i32,
    json: Value,
}

fn run_in(dir: &Path, args: &[&str], seed: &str) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_additive-lab"))
        .args(args)
        .env("ADDITIVE_LAB_SEED", seed)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    let json = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", String::from_utf8_lossy(&out.stdout)));
    Run {
        code: out.status.code().expect("exit code"),
        json,
    }
}

fn run(dir: &Path, args: &[&str]) -> Run {
    run_in(dir, args, "0")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn assert_contract(r: &Run, command: &str) {
    assert_eq!(r.json["command"], command);
    assert!(r.json["version"].is_string());
    assert!(
        r.json.get("verdict").is_some() || r.json.get("value").is_some(),
        "{}",
        r.json
    );
    assert!(r.json["diagnostics"].is_object());
}

fn midpoint_csv(m: usize, f: impl Fn(f64) -> f64, skip: Option<usize>, extra: &[f64]) -> String {
    let mut s = String::from("x1,value\n");
    for j in (0..m).filter(|j| Some(*j) != skip) {
        let x = (j as f64 + 0.5) / m as f64;
        s += &format!("{x},{}\n", f(x));
    }
    for &x in extra {
        s += &format!("{x},{}\n", f(x));
    }
    s
}

#[test]
fn construct_echoes_canonical_json() {
    let dir = TempDir::new().unwrap();
    let wild = write(&dir, "wild.json", WILD);
    let r = run(dir.path(), &["construct", wild.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    assert_contract(&r, "construct");
    assert_eq!(r.json["value"]["assignments"]["e2"], "1/1");
    assert_eq!(r.json["diagnostics"]["additivity_self_test"]["passed"], true);
    let canonical = r.json["canonical"].as_str().unwrap();
    let again = write(&dir, "again.json", canonical);
    let r2 = run(dir.path(), &["construct", again.to_str().unwrap()]);
    assert_eq!(r2.json["canonical"].as_str().unwrap(), canonical);
}

#[test]
fn construct_rejects_bad_documents() {
    let dir = TempDir::new().unwrap();
    let dup = write(
        &dir,
        "dup.json",
        r#"{"basis": [{"label": "e1", "embedding": 1}, {"label": "e1", "embedding": 2}]}"#,
    );
    let r = run(dir.path(), &["construct", dup.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert_contract(&r, "construct");
    assert!(r.json["error"].as_str().unwrap().contains("e1"), "{}", r.json);

    let zero_den = write(
        &dir,
        "den.json",
        r#"{"basis": [{"label": "e1", "embedding": 1}], "assignments": {"e1": "2/0"}}"#,
    );
    let r = run(dir.path(), &["construct", zero_den.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.json["error"]
        .as_str()
        .unwrap()
        .contains("denominator must be positive"));

    let r = run(dir.path(), &["construct", "does-not-exist.json"]);
    assert_eq!(r.code, 2);
}

#[test]
fn classify_expression_and_hamel() {
    let dir = TempDir::new().unwrap();
    let r = run(dir.path(), &["classify", "--expr", "3*x", "--interval", "0", "1"]);
    assert_eq!(r.code, 0);
    assert_contract(&r, "classify");
    assert_eq!(r.json["verdict"], "linear");
    assert!((r.json["c"][0].as_f64().unwrap() - 3.0).abs() < 1e-9);

    let wild = write(&dir, "wild.json", WILD);
    let r = run(
        dir.path(),
        &[
            "classify",
            "--hamel",
            wild.to_str().unwrap(),
            "--interval",
            "0",
            "1",
            "--probes",
            "auto",
        ],
    );
    assert_eq!(r.code, 1);
    assert_eq!(r.json["verdict"], "nonlinear");
    assert!(r.json["witness"]["phase_defect"].as_f64().unwrap() >= 0.5);

    let r = run(dir.path(), &["classify", "--expr", "x^2", "--interval", "0", "1"]);
    assert_eq!(r.code, 1);
    assert_ne!(r.json["verdict"], "linear");
}

#[test]
fn explicit_hamel_probe_list() {
    let dir = TempDir::new().unwrap();
    let wild = write(&dir, "wild.json", WILD);
    let r = run(
        dir.path(),
        &["classify", "--hamel", wild.to_str().unwrap(), "--probes", "e2;1/7*e2"],
    );
    assert_eq!(r.code, 1);
    assert_eq!(r.json["witness"]["point"], "1/7*e2");
    let r = run(
        dir.path(),
        &["classify", "--hamel", wild.to_str().unwrap(), "--probes", "e9"],
    );
    assert_eq!(r.code, 2);
}

#[test]
fn seed_controls_auto_probes() {
    let dir = TempDir::new().unwrap();
    let wild = write(&dir, "wild.json", WILD);
    let args = ["classify", "--hamel", wild.to_str().unwrap()];
    let a = run_in(dir.path(), &args, "5");
    let b = run_in(dir.path(), &args, "5");
    let c = run_in(dir.path(), &args, "6");
    assert_eq!(a.json, b.json);
    assert_eq!(a.json["diagnostics"]["seed"], 5);
    assert_ne!(a.json["diagnostics"]["phases"], c.json["diagnostics"]["phases"]);
}

#[test]
fn csv_sources() {
    let dir = TempDir::new().unwrap();
    let good = write(
        &dir,
        "good.csv",
        &midpoint_csv(64, |x| -2.5 * x, None, &[1.0, 0.3, 1.0 / 7.0]),
    );
    let r = run(
        dir.path(),
        &["classify", "--csv", good.to_str().unwrap(), "--grid", "64"],
    );
    assert_eq!(r.code, 0, "{}", r.json);
    assert!((r.json["c"][0].as_f64().unwrap() + 2.5).abs() < 1e-9);

    let holey = write(&dir, "holey.csv", &midpoint_csv(64, |x| x, Some(3), &[1.0]));
    let r = run(
        dir.path(),
        &["classify", "--csv", holey.to_str().unwrap(), "--grid", "64"],
    );
    assert_eq!(r.code, 2);
    assert!(
        r.json["error"]
            .as_str()
            .unwrap()
            .contains("missing grid node [0.0546875]"),
        "{}",
        r.json
    );

    let r = run(
        dir.path(),
        &["classify", "--csv", good.to_str().unwrap(), "--grid", "32"],
    );
    assert_eq!(r.code, 2);
}

#[test]
fn exactly_one_source() {
    let dir = TempDir::new().unwrap();
    let r = run(dir.path(), &["classify", "--expr", "x", "--csv", "a.csv"]);
    assert_eq!(r.code, 2);
    let r = run(dir.path(), &["classify"]);
    assert_eq!(r.code, 2);
    let r = run(dir.path(), &["classify", "--expr", "x +"]);
    assert_eq!(r.code, 2);
}

#[test]
fn vector_valued() {
    let dir = TempDir::new().unwrap();
    let wild = write(&dir, "wild.json", WILD);
    let r = run(
        dir.path(),
        &[
            "classify-vec",
            "--component",
            "expr:2*x",
            "--component",
            &format!("hamel:{}", wild.display()),
        ],
    );
    assert_eq!(r.code, 1, "{}", r.json);
    assert_contract(&r, "classify-vec");
    assert_eq!(r.json["verdict"], "nonlinear");
    assert_eq!(r.json["component"], 2);
    let r = run(dir.path(), &["classify-vec", "--component", "sin:x"]);
    assert_eq!(r.code, 2);
}

#[test]
fn density_writes_points() {
    let dir = TempDir::new().unwrap();
    let unit_scale = WILD.replace(",\n  \"scale\": 6.283185307179586", "");
    assert!(!unit_scale.contains("scale"));
    let wild = write(&dir, "wild.json", &unit_scale);
    let r = run(
        dir.path(),
        &[
            "density",
            "--hamel",
            wild.to_str().unwrap(),
            "--window",
            "0",
            "1",
            "-5",
            "5",
            "--cells",
            "10",
            "--height",
            "20",
        ],
    );
    assert_eq!(r.code, 0, "{}", r.json);
    assert_contract(&r, "density");
    let coverage = r.json["value"].as_f64().unwrap();
    assert!(coverage > 0.0 && coverage <= 1.0);
    let text = std::fs::read_to_string(dir.path().join("density.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,cell_i,cell_j"));
    assert_eq!(lines.count(), r.json["covered"].as_u64().unwrap() as usize);

    let r = run(
        dir.path(),
        &[
            "density",
            "--hamel",
            wild.to_str().unwrap(),
            "--window",
            "0",
            "0",
            "-5",
            "5",
        ],
    );
    assert_eq!(r.code, 2);
}

#[test]
fn torus_checks() {
    let dir = TempDir::new().unwrap();
    let mut zero = String::from("x,value\n");
    for k in 0..4 {
        zero += &format!("{k}/4,0\n");
    }
    let zero = write(&dir, "zero.csv", &zero);
    let r = run(
        dir.path(),
        &["torus-check", "--values", zero.to_str().unwrap(), "--q", "4"],
    );
    assert_eq!(r.code, 0, "{}", r.json);
    assert_contract(&r, "torus-check");
    assert_eq!(r.json["verdict"], "zero");

    let bumped = write(&dir, "bumped.csv", "x,value\n0,0\n1/4,0\n1/2,1\n3/4,0\n");
    let r = run(
        dir.path(),
        &["torus-check", "--values", bumped.to_str().unwrap(), "--q", "4"],
    );
    assert_eq!(r.code, 1);
    assert_ne!(r.json["verdict"], "zero");

    let short = write(&dir, "short.csv", "x,value\n0,0\n1/4,0\n");
    let r = run(
        dir.path(),
        &["torus-check", "--values", short.to_str().unwrap(), "--q", "4"],
    );
    assert_eq!(r.code, 2);

    let r = run(
        dir.path(),
        &["torus-check", "--expr", "x", "--grid", "64", "--probes", "1/2;1/3"],
    );
    assert_eq!(r.code, 1);
    assert_eq!(r.json["verdict"], "witness");
}

#[test]
fn axioms_command() {
    let dir = TempDir::new().unwrap();
    let r = run(dir.path(), &["axioms", "--functional", "integral", "--grid", "256"]);
    assert_eq!(r.code, 0, "{}", r.json);
    assert_contract(&r, "axioms");
    assert_eq!(r.json["verdict"], "pass");

    let r = run(dir.path(), &["axioms", "--functional", "point-eval", "--grid", "256"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.json["diagnostics"]["failed"], serde_json::json!(["d"]));
    let d = r.json["axioms"]
        .as_array()
        .unwrap()
        .iter()
        .find(|a| a["status"] == "fail")
        .unwrap();
    assert_eq!(d["witness"]["member"], "sin(2*pi*x)");

    let r = run(dir.path(), &["axioms", "--functional", "zero", "--grid", "256"]);
    assert_eq!(r.json["diagnostics"]["failed"], serde_json::json!(["e"]));
}

#[test]
fn value_commands() {
    let dir = TempDir::new().unwrap();
    let r = run(
        dir.path(),
        &["mean-value", "--expr", "5*x", "--grid", "1024", "--at", "-2.5"],
    );
    assert_eq!(r.code, 0, "{}", r.json);
    assert_contract(&r, "mean-value");
    assert!((r.json["value"].as_f64().unwrap() + 12.5).abs() < 1e-9);

    let r = run(dir.path(), &["exp-integral", "--expr", "2*pi*x", "--alpha", "1"]);
    assert_eq!(r.code, 0);
    assert!(r.json["diagnostics"]["abs"].as_f64().unwrap() < 1e-9);

    let r = run(dir.path(), &["mean-value", "--expr", "x"]);
    assert_eq!(r.code, 2);
}

#[test]
fn help_and_parse_errors() {
    let out = Command::new(env!("CARGO_BIN_EXE_additive-lab"))
        .arg("--help")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("torus-check"));
    let r = run(Path::new("."), &["classify", "--expr", "x", "--bogus"]);
    assert_eq!(r.code, 2);
    assert_eq!(r.json["verdict"], "error");
}
