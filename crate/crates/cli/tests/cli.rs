use std::path::PathBuf;
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nevanlinna")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn table_then_plotdata_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario("smt_exp.json");
    let csv = dir.path().join("t.csv");
    let o = run(&["table", "--scenario", sc.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let from_csv = dir.path().join("a");
    let direct = dir.path().join("b");
    let o = run(&["plotdata", "--scenario", sc.to_str().unwrap(), "--from-table", csv.to_str().unwrap(), "--out", from_csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["plotdata", "--scenario", sc.to_str().unwrap(), "--out", direct.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mut names: Vec<_> = std::fs::read_dir(&direct).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for n in names {
        assert_eq!(std::fs::read(from_csv.join(&n)).unwrap(), std::fs::read(direct.join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn table_is_deterministic_across_thread_counts() {
    let sc = scenario("fmt_tsuji_exp.json");
    let a = run(&["table", "--scenario", sc.to_str().unwrap(), "--threads", "1"]);
    let b = run(&["table", "--scenario", sc.to_str().unwrap(), "--threads", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("r,T,m.0,N.0"));
    assert_eq!(text.lines().count(), 25);
}

#[test]
fn zeros_command() {
    let sc = scenario("sin_zeros.json");
    let o = run(&["zeros", "--scenario", sc.to_str().unwrap(), "--target", "sin", "--r", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 4);
    let o = run(&["zeros", "--scenario", sc.to_str().unwrap(), "--target", "exp", "--r", "10"]);
    assert_eq!(stdout(&o).lines().count(), 1);
    let o = run(&["zeros", "--scenario", sc.to_str().unwrap(), "--target", "sin", "--r", "10", "--region", "tsuji"]);
    assert!(stdout(&o).lines().count() <= 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"schema\": 1,").unwrap();
    assert_eq!(run(&["verify", "--scenario", bad.to_str().unwrap()]).status.code(), Some(2));

    let sc = scenario("fmt_tsuji_exp.json");
    let o = run(&["table", "--scenario", sc.to_str().unwrap(), "--functionals", "T,Q.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--functionals[1]"));

    let o = run(&["verify", "--scenario", scenario("smt_mixed_negative_control.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert!(stdout(&o).contains("\"verdict\":\"hypothesis-violated\""));

    let carleman = scenario("carleman_quarter.json");
    let o = run(&["verify", "--scenario", carleman.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["verify", "--scenario", carleman.to_str().unwrap(), "--tol-bound-cap", "1e-6"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn empty_checks_list_is_table_only() {
    let sc = scenario("sin_zeros.json");
    let o = run(&["verify", "--scenario", sc.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn reports_carry_scenario_hash() {
    let o = run(&["verify", "--scenario", scenario("wronskian.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    let h = lines[0]["scenario_hash"].as_str().unwrap();
    assert_eq!(h.len(), 64);
    assert_eq!(lines[1]["scenario_hash"].as_str().unwrap(), h);
}
