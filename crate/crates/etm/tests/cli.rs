use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

use etm::validation::synthetic_series;
use etm::EtmParams;

fn etm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etm")).args(args).output().expect("run etm")
}

fn write_series(dir: &Path, days: usize) {
    let p = EtmParams::reference_france();
    let s = synthetic_series(&p, days, 0, 99).unwrap();
    let (mut prices, mut temps) = (String::from("date,value\n"), String::from("date,value\n"));
    for k in 0..s.len() {
        writeln!(prices, "{},{:?}", s.dates[k], s.x[k].exp()).unwrap();
        writeln!(temps, "{},{:?}", s.dates[k], s.temp[k]).unwrap();
    }
    std::fs::write(dir.join("prices.csv"), prices).unwrap();
    std::fs::write(dir.join("temps.csv"), temps).unwrap();
    etm::io::write_params_file(&p, &dir.join("france.toml")).unwrap();
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn estimate_writes_a_readable_parameter_file() {
    let dir = tempfile::tempdir().unwrap();
    write_series(dir.path(), 3_000);
    let out = dir.path().join("fit.toml");
    let o = etm(&[
        "estimate",
        "--prices",
        path_str(&dir.path().join("prices.csv")),
        "--temps",
        path_str(&dir.path().join("temps.csv")),
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["kappa_x"].as_f64().unwrap() > 0.0);
    let fitted = etm::io::read_params_file(&out).unwrap();
    assert!((fitted.kappa_t / 0.254 - 1.0).abs() < 0.15);
}

#[test]
fn price_is_reproducible_under_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    etm::io::write_params_file(&EtmParams::reference_france(), &dir.path().join("france.toml")).unwrap();
    let params = dir.path().join("france.toml");
    let args = ["price", "--params", path_str(&params), "--kind", "ehdd", "--month", "2018-01", "--method", "both", "--n-paths", "5000", "--seed", "3", "--json"];
    let (a, b) = (etm(&args), etm(&args));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["formula"]["daily"].as_array().unwrap().len(), 31);
    let (f, mc) = (v["formula"]["value"].as_f64().unwrap(), v["mc"]["estimate"].as_f64().unwrap());
    assert!((f - mc).abs() < 4.0 * v["mc"]["std_error"].as_f64().unwrap());
    assert_eq!(v["in_ci"].as_bool(), Some(true));
}

#[test]
fn usage_and_data_errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write_series(dir.path(), 200);
    let params = dir.path().join("france.toml");
    let bad_month = etm(&["price", "--params", path_str(&params), "--kind", "ehdd", "--month", "2018-13"]);
    assert_eq!(bad_month.status.code(), Some(2));
    let bad_kind = etm(&["price", "--params", path_str(&params), "--kind", "straddle", "--month", "2018-01"]);
    assert_eq!(bad_kind.status.code(), Some(2));
    let missing = etm(&["price", "--params", path_str(&dir.path().join("nope.toml")), "--kind", "ehdd", "--month", "2018-01"]);
    assert_eq!(missing.status.code(), Some(3));

    let temps = std::fs::read_to_string(dir.path().join("temps.csv")).unwrap();
    let short: String = temps.lines().take(150).map(|l| format!("{l}\n")).collect();
    std::fs::write(dir.path().join("short.csv"), short).unwrap();
    let misaligned = etm(&[
        "estimate",
        "--prices",
        path_str(&dir.path().join("prices.csv")),
        "--temps",
        path_str(&dir.path().join("short.csv")),
        "--out",
        path_str(&dir.path().join("fit.toml")),
    ]);
    assert_eq!(misaligned.status.code(), Some(3), "{}", String::from_utf8_lossy(&misaligned.stderr));
}

#[test]
fn validate_exit_status_agrees_with_its_report() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("france.toml");
    etm::io::write_params_file(&EtmParams::reference_france().with_lambda(0.0), &params).unwrap();
    let o = etm(&["validate", "--params", path_str(&params), "--suite", "quick"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let passed = v["passed"].as_bool().unwrap();
    assert_eq!(o.status.code(), Some(if passed { 0 } else { 5 }), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(passed, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn validate_signals_failure_with_exit_five() {
    // the reference hedging statistics are not reproduced, so the default battery fails
    let o = etm(&["validate", "--suite", "quick"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"].as_bool(), Some(false));
    assert_eq!(o.status.code(), Some(5));
}
