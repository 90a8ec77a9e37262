use std::path::PathBuf;
use std::process::{Command, Output};

use lwchi2::lwdist::LWChiSquared;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lwchi2"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn single_value(text: &str) -> f64 {
    let (header, rows) = csv_rows(text);
    assert_eq!(header, ["point", "value"]);
    assert_eq!(rows.len(), 1);
    rows[0][1].parse().unwrap()
}

const QUANTILES: [[f64; 9]; 10] = [
    [1.4145, 1.2543, 1.1951, 1.1468, 1.1103, 1.0922, 1.0862, 1.0778, 1.0742],
    [1.7308, 1.5426, 1.4713, 1.4124, 1.3677, 1.3454, 1.3380, 1.3277, 1.3233],
    [2.1306, 1.9105, 1.8245, 1.7524, 1.6974, 1.6698, 1.6607, 1.6479, 1.6424],
    [2.6605, 2.4039, 2.2993, 2.2102, 2.1415, 2.1069, 2.0953, 2.0792, 2.0723],
    [3.4254, 3.1259, 2.9968, 2.8840, 2.7956, 2.7506, 2.7356, 2.7146, 2.7055],
    [4.7606, 4.4077, 4.2418, 4.0906, 3.9683, 3.9053, 3.8841, 3.8543, 3.8415],
    [6.1137, 5.7256, 5.5301, 5.3438, 5.1885, 5.1070, 5.0795, 5.0406, 5.0239],
    [7.9162, 7.4984, 7.2734, 7.0470, 6.8499, 6.7441, 6.7081, 6.6570, 6.6349],
    [12.4771, 12.0220, 11.7549, 11.4566, 11.1683, 11.0035, 10.9459, 10.8635, 10.8276],
    [17.0579, 16.5840, 16.2977, 15.9575, 15.5983, 15.3792, 15.3007, 15.1868, 15.1367],
];

#[test]
fn dist_examples() {
    let q = single_value(&ok(&["dist", "qf", "--nu", "1", "--standard", "--p", "0.95"]));
    assert!((q - 4.7606).abs() < 5e-4);
    let c = single_value(&ok(&["dist", "cdf", "--nu", "3", "--standard", "--y", "0"]));
    assert_eq!(c, 0.0);

    let (_, rows) = csv_rows(&ok(&["dist", "cumulants", "--nu", "2", "--standard", "--digits", "12"]));
    let mean: f64 = rows.iter().find(|r| r[0] == "mean").unwrap()[1].parse().unwrap();
    assert!((mean - 1.154_431_329_8).abs() < 1e-9);
}

#[test]
fn dist_cf_and_grid() {
    let (header, rows) = csv_rows(&ok(&["dist", "cf", "--nu", "2", "--standard", "--t", "0,0.5"]));
    assert_eq!(header, ["point", "re", "im"]);
    assert_eq!(rows[0][1..], ["1", "0"]);
    let (_, rows) = csv_rows(&ok(&["dist", "pdf", "--nu", "4", "--theta", "0.5,2,1", "--grid", "1,3,5"]));
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4][0], "3");
}

#[test]
fn table1_matches_reference_and_library() {
    let (header, rows) = csv_rows(&ok(&["table1", "--digits", "15"]));
    assert_eq!(header, ["p", "1", "2", "3", "5", "10", "20", "30", "100", "inf"]);
    assert_eq!(rows.len(), 10);
    let nus = [1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 30.0, 100.0];
    for (i, row) in rows.iter().enumerate() {
        let p: f64 = row[0].parse().unwrap();
        for j in 0..9 {
            let v: f64 = row[j + 1].parse().unwrap();
            assert!((v - QUANTILES[i][j]).abs() <= 5e-4, "p {p} col {j}: {v}");
            if j < 8 {
                let lib = LWChiSquared::standard(nus[j]).unwrap().quantile(p).unwrap();
                assert!((v - lib).abs() <= 1e-14 * lib, "cell differs from library");
            }
        }
    }
    let (_, rows) = csv_rows(&ok(&["table1", "--p", "0.7", "--nu", "inf"]));
    assert_eq!(rows.len(), 1);
    assert!((rows[0][1].parse::<f64>().unwrap() - 1.0742).abs() < 5e-4);
}

#[test]
fn conv_examples() {
    let combo = data("varcomp_null.json");
    let q = single_value(&ok(&["conv", "qf", "--file", combo.to_str().unwrap(), "--p", "0.95"]));
    assert!((q - 22.2689).abs() < 2e-3, "{q}");
    let c10 = data("chi2_10.json");
    let q = single_value(&ok(&["conv", "qf", "--file", c10.to_str().unwrap(), "--p", "0.95"]));
    assert!((q - 18.3070).abs() < 1e-3);
}

#[test]
fn conv_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "[]").unwrap();
    let out = run(&["conv", "cdf", "--file", empty.to_str().unwrap(), "--y", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let hard = dir.path().join("hard.json");
    std::fs::write(&hard, r#"[{"kind":"lw_chi2","nu":0.2,"theta":"standard","lambda":1}]"#).unwrap();
    let out = run(&[
        "conv", "cdf", "--file", hard.to_str().unwrap(), "--y", "1e-6,5", "--max-nodes", "1000", "--abs-tol", "1e-14",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["dist", "qf", "--nu", "1"][..],
        &["dist", "qf", "--nu", "1", "--standard", "--p", "1.5"],
        &["dist", "frobnicate"],
        &["table1", "--p", "0"],
        &["dist", "qf", "--nu", "1", "--standard", "--p", "0.5", "--digits", "16"],
        &["mc", "--count", "10"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

#[test]
fn lrt_canonical_hypotheses() {
    let h01 = data("varcomp_h01.csv");
    let v = json(&["lrt", "canonical", "--file", h01.to_str().unwrap()]);
    assert!((v["statistic"].as_f64().unwrap() - 7.3095).abs() < 0.05);
    assert_eq!(v["decision"], "accept");
    assert!((v["null_quantile"].as_f64().unwrap() - 22.2689).abs() < 2e-3);

    let h02 = data("varcomp_h02.csv");
    let v = json(&["lrt", "canonical", "--file", h02.to_str().unwrap()]);
    assert!((v["statistic"].as_f64().unwrap() - 18.7350).abs() < 0.05);
    assert_eq!(v["decision"], "accept");
    assert_eq!(v["asymptotic"]["decision"], "reject");
}

#[test]
fn lrt_canonical_writes_law() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("law.json");
    let h03 = data("varcomp_h03.csv");
    json(&["lrt", "canonical", "--file", h03.to_str().unwrap(), "--write-combo", out.to_str().unwrap()]);
    let rows = ok(&["conv", "cdf", "--file", out.to_str().unwrap(), "--grid", "0,40,5"]);
    let (_, rows) = csv_rows(&rows);
    let vals: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn lrt_canonical_rejects_bad_header() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.csv");
    std::fs::write(&f, "rho,nu,U\n1,1,1\n").unwrap();
    assert_eq!(run(&["lrt", "canonical", "--file", f.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn lrt_variance_identity() {
    let v = json(&["lrt", "variance", "--s2", "2.5", "--sigma0-sq", "2.5", "--nu", "4"]);
    assert_eq!(v["statistic"].as_f64().unwrap(), 0.0);
    assert_eq!(v["p_value"].as_f64().unwrap(), 1.0);
    assert_eq!(v["decision"], "accept");
    for key in ["ci_lrt", "ci_minlength"] {
        let lo = v[key]["lower"].as_f64().unwrap();
        let hi = v[key]["upper"].as_f64().unwrap();
        assert!(lo < 2.5 && 2.5 < hi);
    }
}

#[test]
fn lrt_regression_hand_example() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("reg.csv");
    std::fs::write(&f, "y,one\n0,1\n0,1\n3,1\n").unwrap();
    let v = json(&[
        "lrt", "regression", "--data", f.to_str().unwrap(), "--beta0", "0", "--sigma0-sq", "1", "--digits", "12",
    ]);
    assert!((v["statistic"].as_f64().unwrap() - 3.920_558_458_3).abs() < 1e-9);
    assert_eq!(v["n"], 3);
    assert_eq!(v["k"], 1);
}

#[test]
fn mc_is_deterministic() {
    let args = ["mc", "--nu", "3", "--standard", "--count", "5000", "--seed", "11"];
    assert_eq!(ok(&args), ok(&args));
    let v: Value = serde_json::from_str(&ok(&["mc", "--chi2", "2", "--count", "5000", "--seed", "1"])).unwrap();
    assert!(v["ks"].as_f64().unwrap() < 0.05);
}

#[test]
fn mc_ks_standard_nu5() {
    let v = json(&["mc", "--nu", "5", "--standard", "--count", "1000000", "--seed", "2024"]);
    assert!(v["ks"].as_f64().unwrap() <= 0.002);
}

#[test]
fn mc_null_combination_quantile() {
    let combo = data("varcomp_null.json");
    let v = json(&["mc", "--combo", combo.to_str().unwrap(), "--count", "1000000", "--seed", "5", "--no-ks"]);
    assert!((v["quantiles"]["0.95"].as_f64().unwrap() - 22.27).abs() < 0.1);
    assert!(v["ks"].is_null());
}
