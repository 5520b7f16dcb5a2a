use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lacunary_core::circle::{parse_trig_poly, TrigPoly};
use lacunary_core::extremality::{verify_l1_witness, verify_linf_witness, L1Witness, LinfWitness};
use lacunary_core::spectra::SpectralSet;
use serde_json::Value;

fn lacunary(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lacunary"))
        .args(args)
        .output()
        .expect("run lacunary")
}

fn json_report(args: &[&str]) -> Value {
    let out = lacunary(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lacunary-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn scan(dir: &Path, config: &str) -> (Output, PathBuf) {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("rows.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_lacunary"))
        .args(["scan", "--format", "csv", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    (o, out)
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn witness_l1_on_even_frequencies() {
    let r = json_report(&["witness-l1", "--set", "AP(2,0)", "--f", "z^2"]);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["verdict"], "non-extreme");
    let w: L1Witness = serde_json::from_value(r["result"]["certificate"]["witness"].clone()).unwrap();
    // h = Re(z^2) = (z^2 + zbar^2)/2
    let want = parse_trig_poly("(z^2 + zbar^2)/2").unwrap();
    assert!(w.h.max_coeff_distance(&want) < 1e-15, "{:?}", w.h);
    assert_eq!(r["result"]["verification"]["ok"], true);
}

#[test]
fn toeplitz_kernel_dimension() {
    let r = json_report(&["toeplitz-kernel", "--phi", "zbar^3", "--cap", "5"]);
    assert_eq!(r["result"]["kernel"]["dimension"], 3);
    assert_eq!(r["verdict"], "dimension 3");
    let members = r["result"]["membership"].as_array().unwrap();
    assert!(members.iter().all(|m| m["member"] == true));
}

#[test]
fn outer_h1_function_is_extreme() {
    let r = json_report(&["classify-h1", "--f", "(pi/4)*(1+z)"]);
    assert_eq!(r["verdict"], "extreme");
    let csv = lacunary(&["classify-h1", "--f", "(pi/4)*(1+z)", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("command,verdict,residual,detail,wall_ms\nclassify-h1,extreme,"));
}

#[test]
fn inconclusive_is_exit_zero() {
    // Λ = {0, 1, 3}: no period, not cofinite, so only the bounded search runs.
    let out = lacunary(&["witness-l1", "--set", "{0,1,3}", "--f", "(1 + z + z^3)/3", "--degree", "1", "--normalize"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_input_exits_one() {
    let cases: [&[&str]; 5] = [
        &["set-info", "--set", "Z \\ {0,5"],
        &["classify-h1", "--f", "z^"],
        &["classify-h1", "--f", "zbar"],
        &["witness-linf", "--set", "Zplus", "--f", "z"],
        &["toeplitz-kernel", "--phi", "0", "--cap", "3"],
    ];
    for args in cases {
        let out = lacunary(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.starts_with("error:"), "{args:?}: {err}");
    }
    let located = lacunary(&["set-info", "--set", "Z \\ {0,5"]);
    assert!(String::from_utf8_lossy(&located.stderr).contains("column"));
}

#[test]
fn report_witnesses_reverify_from_the_report_alone() {
    let r = json_report(&["witness-l1", "--set", "Z \\ {0,2}", "--f", "0.3*zbar + 0.5*z - 0.2*z^3", "--normalize"]);
    let f: TrigPoly = serde_json::from_value(r["input"]["f"].clone()).unwrap();
    let set: SpectralSet = r["input"]["set"].as_str().unwrap().parse().unwrap();
    let w: L1Witness = serde_json::from_value(r["result"]["certificate"]["witness"].clone()).unwrap();
    let v = verify_l1_witness(&f, &set, &w, 16).unwrap();
    assert!(v.ok);
    let stored = r["result"]["verification"]["residual"].as_f64().unwrap();
    assert!((v.residual - stored).abs() <= 1e-12);
    assert!((v.norm_u - r["result"]["verification"]["norm_u"].as_f64().unwrap()).abs() <= 1e-12);

    let r = json_report(&["witness-linf", "--set", "Z \\ {0}", "--f", "0.6*z + 0.3*zbar^2", "--normalize"]);
    let f: TrigPoly = serde_json::from_value(r["input"]["f"].clone()).unwrap();
    let set: SpectralSet = "Z \\ {0}".parse().unwrap();
    let w: LinfWitness = serde_json::from_value(r["result"]["certificate"]["witness"].clone()).unwrap();
    let v = verify_linf_witness(&f, &set, &w).unwrap();
    assert!(v.ok);
    let stored = r["result"]["verification"]["max_residual"].as_f64().unwrap();
    assert!((v.max_residual - stored).abs() <= 1e-12);
    assert!((v.sup_plus - r["result"]["verification"]["sup_plus"].as_f64().unwrap()).abs() <= 1e-12);
}

#[test]
fn scan_with_zero_reps_is_refused_before_running() {
    let dir = scratch("zero");
    let (o, out) = scan(
        &dir,
        r#"{"space":{"p":"1","set":"Z \\ {0}"},"task":"witness","function":{"source":"random","sparsity":3,"band":5,"seed":1},"search":{"reps":0}}"#,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    let (o, _) = scan(&dir, r#"{"space":{"p":"1","set":"Z \\ {0"},"task":"witness","function":{"source":"random","sparsity":3,"band":5,"seed":1}}"#);
    assert_eq!(o.status.code(), Some(1));
    let (o, _) = scan(&dir, r#"{"space":{"p":"1","set":"Z"},"task":"witness","function":{"source":"random"}"#);
    assert_eq!(o.status.code(), Some(1));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn cofinite_scan_always_finds_a_witness() {
    let dir = scratch("cofinite");
    let (o, out) = scan(
        &dir,
        r#"{"space":{"p":"1","set":"Z \\ {0}"},"task":"witness","function":{"source":"random","sparsity":4,"band":8,"seed":2024},"search":{"reps":100}}"#,
    );
    assert!(o.status.success());
    let rows = rows(&out);
    assert_eq!(rows.len(), 100);
    let witnessed = rows.iter().filter(|r| &r[5] == "non-extreme").count();
    assert_eq!(witnessed, 100);
    let mut summary = out.clone().into_os_string();
    summary.push(".summary.json");
    let s: Value = serde_json::from_str(&std::fs::read_to_string(summary).unwrap()).unwrap();
    assert_eq!(s["counts"]["non-extreme"], 100);
    std::fs::remove_dir_all(dir).unwrap();
}

/// Zeros of f in the open disk, by the winding number of f around the unit circle.
fn zeros_inside(f: &TrigPoly) -> i64 {
    let n = 1 << 14;
    let mut turn = 0.0;
    let mut prev = f.eval(0.0).arg();
    for j in 1..=n {
        let a = f.eval(TAU * j as f64 / n as f64).arg();
        let mut d = a - prev;
        if d > std::f64::consts::PI {
            d -= TAU;
        } else if d < -std::f64::consts::PI {
            d += TAU;
        }
        turn += d;
        prev = a;
    }
    (turn / TAU).round() as i64
}

#[test]
fn h1_scan_matches_the_argument_principle() {
    let dir = scratch("h1");
    let (o, out) = scan(
        &dir,
        r#"{"space":{"p":"1","set":"Zplus"},"task":"classify-h1","function":{"source":"random","sparsity":3,"band":6,"seed":77},"search":{"reps":50}}"#,
    );
    assert!(o.status.success());
    let rows = rows(&out);
    assert_eq!(rows.len(), 50);
    let mut split = [0usize; 2];
    for r in &rows {
        let f: TrigPoly = serde_json::from_str(&r[4]).unwrap();
        let expected = if zeros_inside(&f) == 0 { "extreme" } else { "non-extreme" };
        assert_eq!(&r[5], expected, "trial {}: {}", &r[0], &r[4]);
        split[(expected == "extreme") as usize] += 1;
    }
    assert!(split[0] > 0 && split[1] > 0, "{split:?}");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn json_scan_carries_the_schema_version() {
    let dir = scratch("json");
    let cfg = dir.join("c.json");
    std::fs::write(
        &cfg,
        r#"{"space":{"p":"inf","set":"Z \\ {0}"},"task":"witness","function":{"source":"explicit","expr":"(z + zbar)/2"},"search":{"reps":2}}"#,
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lacunary"))
        .args(["scan", "--format", "json", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["trials"].as_array().unwrap().len(), 2);
    assert_eq!(v["trials"][0]["verdict"], "non-extreme");
    std::fs::remove_dir_all(dir).unwrap();
}
