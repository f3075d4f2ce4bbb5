use std::path::PathBuf;
use std::process::{Command, Output};

fn fairprice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairprice")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fairprice-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn planner_output_is_reproducible() {
    let (a, b) = (scratch("a"), scratch("b"));
    for dir in [&a, &b] {
        let out = fairprice(&[
            "planner", "--config", "credit", "--seed", "0", "--population", "6", "--generations", "2",
            "--out", dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["schedule.csv", "history.csv", "outcome.json"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{file}");
    }
    let schedule = std::fs::read_to_string(a.join("schedule.csv")).unwrap();
    assert_eq!(schedule.lines().next(), Some("bracket_low,bracket_high,rate"));
    assert_eq!(schedule.lines().count(), 21);
}

#[test]
fn compare_prints_one_row_per_regime() {
    let out = fairprice(&[
        "compare", "--config", "insurance", "--regimes", "free-market,linear-sp,collusion", "--seeds", "0,1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    let width = lines[0].split(',').count();
    assert!(lines.iter().all(|l| l.split(',').count() == width));
    assert!(lines[1].starts_with("free-market"));
    assert!(lines[3].starts_with("collusion"));
}

#[test]
fn bench_reports_each_firm_count() {
    let out = fairprice(&["bench", "--firms", "2,20,40", "--rounds", "10", "--seeds", "0,1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn bad_invocations_exit_with_one() {
    assert_eq!(fairprice(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(fairprice(&["run"]).status.code(), Some(1));
    assert_eq!(fairprice(&["run", "--config", "/nonexistent/market.json"]).status.code(), Some(1));
    assert_eq!(fairprice(&["--help"]).status.code(), Some(0));
}
