use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_charmoments")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn q(e: &str, k1: u32, k2: u32, n1: u32, n2: u32) -> Vec<String> {
    ["--ensemble", e, "--k1", &k1.to_string(), "--k2", &k2.to_string(), "--n1", &n1.to_string(), "--n2", &n2.to_string()]
        .map(String::from)
        .to_vec()
}

fn run_with(base: &[&str], query: Vec<String>, extra: &[&str]) -> Output {
    let mut args: Vec<&str> = base.to_vec();
    args.extend(query.iter().map(String::as_str));
    args.extend(extra);
    run(&args)
}

#[test]
fn coeff_both_backends_text() {
    let o = run_with(&["coeff"], q("sp", 1, 1, 0, 2), &["--backend", "both"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1/80 · (2N)^5");
}

#[test]
fn coeff_so_first_moment() {
    let o = run_with(&["coeff"], q("so", 0, 1, 0, 9), &[]);
    assert_eq!(stdout(&o).trim(), "1 · (2N)^9");
}

#[test]
fn coeff_invalid_query_exits_1() {
    let o = run_with(&["coeff"], q("ominus", 0, 1, 0, 1), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n1 >= 1"));
    let o = run_with(&["coeff"], q("sp", 1, 1, 3, 2), &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn coeff_json_round_trips() {
    let o = run_with(&["coeff"], q("sp", 0, 2, 0, 3), &["--format", "json", "--decimal"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], "23/13440");
    assert_eq!(v["factored"], "23/(2^7·3·5·7)");
    assert_eq!(v["exponent"], 9);
    assert!(v["value_f64"].is_f64());
    let parsed = charmoments::exact::parse_rational(v["value"].as_str().unwrap()).unwrap();
    assert_eq!(parsed.to_string(), "23/13440");
}

#[test]
fn coeff_csv_has_header_and_row() {
    let o = run_with(&["coeff"], q("ominus", 2, 0, 1, 2), &["--format", "csv"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("ensemble,k1,k2,n1,n2,value"));
    assert!(lines[1].starts_with("ominus,2,0,1,2,"));
}

#[test]
fn table_reproduces_published_lists() {
    let o = run(&["table", "--ensemble", "so", "--k1-range", "1", "--k2-range", "1", "--n1-range", "0..2", "--n2-range", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let vals: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(7).unwrap()).collect();
    assert_eq!(vals, ["2/3", "1/3", "7/30"]);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",ok")));

    let o = run(&["table", "--ensemble", "sp", "--k1-range", "0", "--k2-range", "1..4", "--n1-range", "0", "--n2-range", "3", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let vals: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["b_comb"].as_str().unwrap()).collect();
    assert_eq!(vals, ["-1/8", "23/13440", "-1/492800", "233/1430618112000"]);
    assert_eq!(v[3]["factored"], "233/(2^18·3^4·5^3·7^2·11)");
}

#[test]
fn table_empty_range_is_header_only() {
    let o = run(&["table", "--ensemble", "sp", "--n2-range", "3..2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "ensemble,k1,k2,n1,n2,exponent,b_det,b_comb,factored,mismatch\n");
}

#[test]
fn table_config_file_and_out_file() {
    let dir = std::env::temp_dir().join(format!("charmoments-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("grid.cfg");
    std::fs::write(&cfg, "# defaults\nensemble = so\nk1-range = 1\nk2_range = 1\nn1-range = 0..1\nn2-range = 1\n").unwrap();
    let out = dir.join("table.csv");
    let o = run(&["table", "--config", cfg.to_str().unwrap(), "--n1-range", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "so,1,1,0,1,2,1,1,1,ok");
    assert_eq!(text.lines().count(), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_closed_and_cross() {
    let o = run(&["verify", "--suite", "closed", "--max-n", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["total"], 40);
    assert_eq!(v["failed"], 0);

    let o = run(&["--threads", "2", "verify", "--suite", "cross", "--max-k", "2", "--max-n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["failed"], 0);
    assert!(v["total"].as_u64().unwrap() > 0);
}

#[test]
fn verify_gamma_and_props() {
    for args in [["verify", "--suite", "gamma", "--max-k", "3"], ["verify", "--suite", "props", "--max-k", "2"]] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["failed"], 0);
    }
}

#[test]
fn mc_with_oracle_small_n() {
    let o = run_with(&["mc", "--N", "1"], q("sp", 0, 1, 0, 0), &["--samples", "20000", "--seed", "7", "--oracle"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["ensemble", "N", "k1", "k2", "n1", "n2", "count", "seed", "mean", "stderr", "predicted", "ratio", "z"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!((v["quadrature"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!(v["quadrature_z"].as_f64().unwrap().abs() <= 4.0);
    assert_eq!(v["count"], 20000);
}

#[test]
fn mc_is_reproducible() {
    let args = |t: &'static str| run_with(&["--threads", t, "mc", "--N", "3"], q("so", 1, 1, 0, 1), &["--samples", "3000", "--seed", "11"]);
    assert_eq!(stdout(&args("1")), stdout(&args("3")));
}

#[test]
fn mc_oracle_rejected_beyond_two() {
    let o = run_with(&["mc", "--N", "3"], q("so", 0, 1, 0, 1), &["--oracle"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn mc_rejects_bad_input() {
    let o = run_with(&["mc", "--N", "3"], q("ominus", 0, 1, 0, 0), &[]);
    assert_eq!(o.status.code(), Some(1));
    let o = run_with(&["mc", "--N", "3"], q("sp", 0, 1, 0, 1), &["--samples", "10"]);
    assert_eq!(o.status.code(), Some(1));
}
