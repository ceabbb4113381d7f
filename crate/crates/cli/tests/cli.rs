use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

#[path = "../src/report.rs"]
#[allow(dead_code)]
mod report;

fn qpd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpd"))
        .args(args)
        .env_remove("QPD_SEED")
        .output()
        .expect("run qpd")
}

fn stdout_ok(args: &[&str]) -> Vec<u8> {
    let out = qpd(args);
    assert!(
        out.status.success(),
        "qpd {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn json(args: &[&str]) -> Value {
    serde_json::from_slice(&stdout_ok(args)).unwrap()
}

fn golden(name: &str) -> Vec<u8> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn goldens_match_byte_for_byte() {
    let cases: [(&str, &[&str]); 7] = [
        ("play_q_vs_qd.json", &["play", "--alice", "Q", "--bob", "Q*D"]),
        ("counter_q.json", &["counter", "--against", "Q", "--player", "B"]),
        ("classify_default.json", &["classify", "--table", "5,3,1,0"]),
        ("membership_isx.json", &["membership", "--move", "U(0,pi/2)*U(pi,0)"]),
        ("best_response_q.json", &["best-response", "--against", "Q", "--player", "B"]),
        (
            "nash_scan_ewl_19x10.csv",
            &["nash-scan", "--space", "ewl", "--grid", "19,10", "--format", "csv"],
        ),
        (
            "haar_series_seed42.csv",
            &[
                "haar", "--bob", "U(1.0,0.3)", "--samples", "100000", "--seed", "42", "--series",
                "1000,10000,100000", "--format", "csv",
            ],
        ),
    ];
    for (name, args) in cases {
        assert_eq!(
            String::from_utf8(stdout_ok(args)).unwrap(),
            String::from_utf8(golden(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn play_counter_pays_b_five() {
    let r = json(&["play", "--alice", "Q", "--bob", "Q*D"]);
    let exact = &r["result"]["exact"];
    assert_eq!(num(&exact["distribution"]["CD"]), 1.0);
    assert_eq!(num(&exact["payoffs"][0]), 0.0);
    assert_eq!(num(&exact["payoffs"][1]), 5.0);
}

#[test]
fn counter_is_i_sigma_x() {
    let r = json(&["counter", "--against", "Q", "--player", "B"]);
    let m = &r["result"]["counter"];
    // [[0, i], [i, 0]] as [re, im] pairs
    assert_eq!(num(&m[0][1][1]), 1.0);
    assert_eq!(num(&m[1][0][1]), 1.0);
    assert_eq!(num(&m[0][0][0]).abs() + num(&m[0][0][1]).abs(), 0.0);
}

#[test]
fn classify_reports_between() {
    let r = json(&["classify"]);
    assert_eq!(r["result"]["classification"], "BetweenEquilibriumAndCooperative");
    assert_eq!(num(&r["result"]["qbar"]), 2.25);
}

#[test]
fn reports_embed_effective_config() {
    let r = json(&["nash-scan", "--space", "ewl"]);
    let c = &r["config"];
    assert_eq!(c["command"], "nash-scan");
    assert_eq!(c["format"], "json");
    assert_eq!(c["seed"], 0);
    assert_eq!(c["grid"], serde_json::json!([19, 10]));
    assert_eq!(num(&c["epsilon"]), 0.01);
    assert_eq!(num(&c["gamma"]), std::f64::consts::FRAC_PI_2);
    let table: Vec<f64> = c["table"].as_array().unwrap().iter().map(num).collect();
    assert_eq!(table, vec![5.0, 3.0, 1.0, 0.0]);
    assert!(r["result"]["count"].as_u64().unwrap() >= 1);
}

#[test]
fn json_reports_round_trip_bytes() {
    for args in [
        &["play", "--alice", "haar", "--bob", "mix(0.3:Q, 0.7:U(1,0.2))", "--samples", "5000"][..],
        &["haar", "--samples", "2000", "--series", "100,1000"],
        &["mirror", "--move", "su2(0.6,0,0,0.8)"],
        &["best-response", "--against", "Q", "--space", "ewl", "--grid", "10,5"],
    ] {
        let first = stdout_ok(args);
        let parsed: Value = serde_json::from_slice(&first).unwrap();
        assert_eq!(report::to_json(&parsed).unwrap(), first, "{args:?}");
    }
}

#[test]
fn identical_config_gives_identical_bytes() {
    let args = ["haar", "--bob", "Q", "--samples", "20000", "--seed", "7"];
    let a = stdout_ok(&args);
    let single = Command::new(env!("CARGO_BIN_EXE_qpd"))
        .args(args)
        .env("RAYON_NUM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a, stdout_ok(&args));
    assert_eq!(a, single.stdout);
}

#[test]
fn seed_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qpd"))
        .args(["haar", "--samples", "100"])
        .env("QPD_SEED", "99")
        .output()
        .unwrap();
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["config"]["seed"], 99);
    // an explicit flag wins over the environment
    let out = Command::new(env!("CARGO_BIN_EXE_qpd"))
        .args(["haar", "--samples", "100", "--seed", "3"])
        .env("QPD_SEED", "99")
        .output()
        .unwrap();
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["config"]["seed"], 3);
}

#[test]
fn exit_codes() {
    // domain errors
    for args in [
        &["play", "--alice", "Z", "--bob", "Q"][..],
        &["classify", "--table", "1,3,5,0"],
        &["classify", "--table", "6,3,2,1"],
        &["play", "--alice", "mix(0.5:C, 0.4:D)", "--bob", "Q"],
        &["play", "--alice", "su2(0.9,0,0.1,0)", "--bob", "Q"],
        &["counter", "--against", "haar"],
        &["haar", "--gamma", "0"],
    ] {
        let out = qpd(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty());
    }
    // usage errors
    for args in [
        &["play", "--alice", "Q"][..],
        &["frobnicate"],
        &["classify", "--table", "5,3,1"],
        &["classify", "--gamma", "banana"],
        &["play", "--alice", "Q", "--bob", "Q", "--format", "csv"],
        &["nash-scan", "--space", "ewl", "--grid", "3,3,3"],
    ] {
        assert_eq!(qpd(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("qpd-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = qpd(&["classify", "-o", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), golden("classify_default.json"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn gamma_zero_scan_contains_defect_defect() {
    let out = stdout_ok(&["nash-scan", "--gamma", "0", "--grid", "4,3,4", "--format", "csv"]);
    let text = String::from_utf8(out).unwrap();
    // D = beta pi/2 with alpha = delta = 0
    let hit = text.lines().skip(1).any(|l| {
        let f: Vec<&str> = l.split(',').collect();
        let v = |i: usize| f[i].parse::<f64>().unwrap();
        v(2) == 0.0 && v(3) == std::f64::consts::FRAC_PI_2 && v(4) == 0.0
            && v(5) == 0.0 && v(6) == std::f64::consts::FRAC_PI_2 && v(7) == 0.0
            && v(8) == 1.0 && v(9) == 1.0
    });
    assert!(hit, "{text}");
}
