use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const E1: &str = r#"{"streams":[
    {"rate":0.002857142857142857,"mean_exec":600,"mean_deadline":1000,"value":1},
    {"rate":0.002857142857142857,"mean_exec":600,"mean_deadline":1000,"value":1}],
  "horizon":100000,"seed":3}"#;

fn revsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revsched")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn stdout_csv(out: &Output) -> Vec<csv::StringRecord> {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    csv::Reader::from_reader(out.stdout.as_slice()).records().map(Result::unwrap).collect()
}

fn one_line_error(out: &Output) -> String {
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = err.lines().filter(|l| l.starts_with("error:")).collect();
    assert_eq!(lines.len(), 1, "{err}");
    lines[0].to_string()
}

#[test]
fn fap_prints_shares_and_total() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(dir.path(), "e1.json", E1);
    let rows = stdout_csv(&revsched(&["fap", w.to_str().unwrap()]));
    assert_eq!(rows.len(), 3);
    let f1: f64 = rows[0][1].parse().unwrap();
    let f2: f64 = rows[1][1].parse().unwrap();
    assert!((f1 + f2 - 1.0).abs() < 1e-9);
    assert!((f1 - 0.5).abs() < 1e-3);
    assert_eq!(&rows[2][0], "total");
    let total: f64 = rows[2][2].parse().unwrap();
    let parts: f64 = rows[..2].iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
    assert!((total - parts).abs() <= 1e-12 * total);
}

#[test]
fn ztable_rows_are_nondecreasing_per_stream() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(dir.path(), "e1.json", E1);
    let rows = stdout_csv(&revsched(&["ztable", w.to_str().unwrap(), "--lmax", "20", "--f", "0.5,0.5"]));
    assert_eq!(rows.len(), 40);
    for stream in ["0", "1"] {
        let z: Vec<f64> = rows.iter().filter(|r| &r[0] == stream).map(|r| r[2].parse().unwrap()).collect();
        assert_eq!(z.len(), 20);
        assert!(z.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn sdp_reports_gain_and_policy() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(dir.path(), "e1.json", E1);
    let out = revsched(&["sdp", w.to_str().unwrap(), "--cap", "40", "--policy"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gain,iterations,cap"));
    let gain: f64 = lines.next().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((gain / 0.00159905 - 1.0).abs() < 1e-2);
    assert_eq!(lines.next(), Some("l1,l2,action"));
    assert_eq!(lines.next(), Some("0,0,idle"));
    assert_eq!(lines.count(), 41 * 41 - 1);
}

#[test]
fn simulate_writes_report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "e1.json", E1);
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"workload":{"file":"e1.json"},"policy":{"name":"policyz"},"replications":3}"#,
    );
    let csv_path = dir.path().join("out.csv");
    let out = revsched(&["simulate", cfg.to_str().unwrap(), "--out", csv_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "experiment");
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    let rate = rows.iter().find(|r| &r[1] == "policyz" && &r[2] == "revenue_rate").unwrap();
    assert_eq!(&rate[3], "3");
}

#[test]
fn deadline_rule_changes_the_outcome() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "e1.json", E1);
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"workload":{"file":"e1.json"},"policy":{"name":"edf"},"replications":2}"#,
    );
    let cfg = cfg.to_str().unwrap();
    let a = revsched(&["simulate", cfg]);
    let b = revsched(&["--deadline-rule", "proportional", "simulate", cfg]);
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn missing_file_is_a_one_line_error() {
    let line = one_line_error(&revsched(&["fap", "/nonexistent/workload.json"]));
    assert!(line.contains("/nonexistent/workload.json"), "{line}");
}

#[test]
fn malformed_workload_is_a_one_line_error() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(dir.path(), "bad.json", r#"{"streams":[{"rate":-1,"mean_exec":1,"mean_deadline":1,"value":1}],"horizon":10,"seed":1}"#);
    one_line_error(&revsched(&["fap", w.to_str().unwrap()]));
    let w = write(dir.path(), "junk.json", "{ not json");
    one_line_error(&revsched(&["fap", w.to_str().unwrap()]));
}

#[test]
fn sdp_rejects_three_streams() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(
        dir.path(),
        "three.json",
        r#"{"streams":[
            {"rate":0.01,"mean_exec":60,"mean_deadline":100,"value":1},
            {"rate":0.01,"mean_exec":60,"mean_deadline":100,"value":1},
            {"rate":0.01,"mean_exec":60,"mean_deadline":100,"value":1}],"horizon":1000,"seed":1}"#,
    );
    one_line_error(&revsched(&["sdp", w.to_str().unwrap()]));
}

#[test]
fn unknown_experiment_id_fails() {
    one_line_error(&revsched(&["experiment", "table1", "--ids", "E99", "--reps", "1"]));
}

#[test]
fn underloaded_workload_warns() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(
        dir.path(),
        "light.json",
        r#"{"streams":[
            {"rate":0.001,"mean_exec":100,"mean_deadline":200,"value":1},
            {"rate":0.001,"mean_exec":100,"mean_deadline":200,"value":1}],"horizon":1000,"seed":1}"#,
    );
    let out = revsched(&["fap", w.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: utilization"));
}

#[test]
fn experiment_table1_reports_improvement_and_loss() {
    let out = revsched(&["experiment", "table1", "--ids", "E1", "--reps", "3", "--horizon", "100000"]);
    let rows = stdout_csv(&out);
    let kinds: Vec<(String, String)> = rows.iter().map(|r| (r[1].to_string(), r[2].to_string())).collect();
    for (p, k) in [
        ("fap", "revenue_rate"),
        ("policyz", "revenue_rate"),
        ("sdp", "revenue_rate"),
        ("policyz-vs-fap", "improvement_pct"),
    ] {
        assert!(kinds.iter().any(|(a, b)| a == p && b == k), "missing {p} {k}: {kinds:?}");
    }
    assert!(kinds.iter().any(|(_, k)| k == "loss_pct"));
    assert!(kinds.iter().any(|(_, k)| k == "gain"));
}
