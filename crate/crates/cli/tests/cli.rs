use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use planar_cocycles::domination::{DominationVerdict, MulticoneCertificate};
use planar_cocycles::linalg::Mat2;
use planar_cocycles::semigroup::MatrixTuple;
use serde_json::Value;
use tempfile::TempDir;

const PAIR: &str = r#"{"matrices": [[2,1,1,1],[2,1,1,2]], "depths": {"enum_depth": 8, "horizon": 12}, "seed": 11}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_planar-workbench"))
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], config: Option<&Path>) -> Output {
    let mut c = bin();
    c.args(args);
    if let Some(p) = config {
        c.arg("--config").arg(p);
    }
    c.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn precondition_failures_exit_with_3() {
    let dir = TempDir::new().unwrap();
    let singular = write_config(&dir, "singular.json", r#"{"matrices": [[1,0,0,1],[1,2,2,4]]}"#);
    let o = run(&["classify"], Some(&singular));
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("matrix 1 is singular"));

    let pair = write_config(&dir, "pair.json", PAIR);
    let o = run(&["pressure", "--s", "-1"], Some(&pair));
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("s must be > 0"));

    assert_eq!(code(&run(&["pressure"], None)), 3);
    assert_eq!(code(&run(&["pressure"], Some(&dir.path().join("missing.json")))), 3);
    let broken = write_config(&dir, "broken.json", "{\"matrices\": [[1,0,0,1]");
    assert_eq!(code(&run(&["pressure"], Some(&broken))), 3);
    assert_eq!(code(&run(&["frobnicate"], None)), 3);
}

#[test]
fn oversized_depth_exits_with_4() {
    let dir = TempDir::new().unwrap();
    let triple = write_config(&dir, "triple.json", r#"{"matrices": [[2,1,1,1],[2,1,1,2],[1,0,0,1]]}"#);
    let o = run(&["pressure", "--depth", "20"], Some(&triple));
    assert_eq!(code(&o), 4);
}

#[test]
fn pressure_of_twice_the_identity_is_log_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "scalar.json", r#"{"matrices": [[2,0,0,2]], "depths": {"enum_depth": 6}}"#);
    let json = dir.path().join("p.json");
    let csv = dir.path().join("p.csv");
    let o = bin()
        .args(["pressure", "--config"])
        .arg(&cfg)
        .arg("--json")
        .arg(&json)
        .arg("--csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let ln2 = 2f64.ln();
    assert!((v["bounds"]["upper"].as_f64().unwrap() - ln2).abs() < 1e-12);
    assert!((v["bounds"]["lower"].as_f64().unwrap() - ln2).abs() < 1e-12);

    let table = fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("depth,value,bound_type"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert!((f[1].parse::<f64>().unwrap() - ln2).abs() < 1e-12, "{row}");
        assert!(["upper", "lower_kappa"].contains(&f[2]), "{row}");
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "pair.json", PAIR);
    let mut outputs = Vec::new();
    for i in 0..2 {
        let json = dir.path().join(format!("e{i}.json"));
        let csv = dir.path().join(format!("e{i}.csv"));
        let o = bin()
            .arg("equilibrium")
            .arg("--config")
            .arg(&cfg)
            .arg("--json")
            .arg(&json)
            .arg("--csv")
            .arg(&csv)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((fs::read(&json).unwrap(), fs::read(&csv).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert!(csv.starts_with("depth,band_min,band_max\n"));
    assert!(csv.lines().count() > 1);
}

#[test]
fn multicone_certificate_survives_a_json_round_trip() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "pair.json", PAIR);
    let json = dir.path().join("m.json");
    let o = bin().arg("multicone").arg("--config").arg(&cfg).arg("--json").arg(&json).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let v: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let verdict: DominationVerdict = serde_json::from_value(v["domination"].clone()).unwrap();
    let DominationVerdict::Dominated(cert) = verdict else {
        panic!("pair should be dominated: {v}")
    };
    let t = MatrixTuple::new(vec![
        Mat2::new(2.0, 1.0, 1.0, 1.0).unwrap(),
        Mat2::new(2.0, 1.0, 1.0, 2.0).unwrap(),
    ])
    .unwrap();
    assert!(cert.verify(&t));
    for arc in cert.cone.arcs() {
        let (a, b) = (arc.start().theta(), arc.start().theta() + arc.length());
        assert!(a >= 0.0 && b <= std::f64::consts::FRAC_PI_2, "[{a}, {b}]");
    }

    let unstable: MulticoneCertificate = serde_json::from_value(v["invariant_unstable"]["Found"].clone()).unwrap();
    assert!(unstable.verify(&t));
}

#[test]
fn example1_reproduces_the_three_classes() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("ex.json");
    let o = bin().args(["example1", "--depth", "8"]).arg("--json").arg(&json).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let classes: Vec<&str> = v["cases"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["report"]["classification"]["class"].as_str().unwrap())
        .collect();
    assert_eq!(classes, ["HolderGibbs", "QuasiBernoulli", "GibbsTypeOnly"]);
    assert_eq!(code(&run(&["example1", "--csv", "x.csv"], None)), 3);
}
