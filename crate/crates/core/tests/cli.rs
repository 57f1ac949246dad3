use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn ntmflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ntmflow")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn l1() -> String {
    fixture("l1.tm").display().to_string()
}

#[test]
fn decide_accepts_l1_one() {
    let o = ntmflow(&["decide", &l1(), "1", "--step-cap", "16"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().last(), Some("VERDICT accept"));
}

#[test]
fn both_modes_agree_on_l1_zero() {
    let o = ntmflow(&["decide", &l1(), "0", "--step-cap", "16", "--mode", "both"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("VERDICT reject\n"), "{out}");
    assert!(out.contains("ORACLE_VERDICT reject\n"), "{out}");
    assert_eq!(out.lines().last(), Some("AGREE true"));
}

#[test]
fn oracle_mode_prints_no_decider_lines() {
    let o = ntmflow(&["decide", &l1(), "01", "--mode", "oracle"]);
    let out = stdout(&o);
    assert!(out.starts_with("ORACLE_VERDICT accept"), "{out}");
    assert!(!out.contains("\nVERDICT"));
}

#[test]
fn exported_cfg_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("g{k}.dot"));
        let o = ntmflow(&["export-graph", &l1(), "1", "--mu", "3", "--stage", "cfg", "-o", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
        files.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert!(String::from_utf8_lossy(&files[0]).starts_with("digraph cfg"));
}

#[test]
fn seqgraph_export_goes_to_stdout() {
    let o = ntmflow(&["export-graph", &l1(), "10", "--mu", "2", "--stage", "seqgraph"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(q0,1,q0,1,R,1,1)"));
}

#[test]
fn dump_lp_writes_an_lp_file() {
    let o = ntmflow(&["dump-lp", &l1(), "1", "--mu", "3", "--set", "F", "--seg", "1:2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("Subject To"));
    assert!(out.trim_end().ends_with("End"), "{out}");
    // negative cells parse
    let o = ntmflow(&["dump-lp", &l1(), "1", "--mu", "3", "--set", "any", "--seg", "-1:1"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one_with_distinct_messages() {
    let cases: [&[&str]; 5] = [
        &["decide", "/nonexistent.tm", "1"],
        &["decide", &l1(), "1x"],
        &["decide", &l1(), "1", "--frobnicate"],
        &["dump-lp", &l1(), "1", "--mu", "3", "--set", "F", "--seg", "9:10"],
        &["dump-lp", &l1(), "1", "--mu", "3", "--set", "F", "--seg", "2:1"],
    ];
    let mut messages = Vec::new();
    for args in cases {
        let o = ntmflow(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr).into_owned();
        assert!(!err.is_empty(), "{args:?}");
        messages.push(err);
    }
    messages.sort();
    messages.dedup();
    assert_eq!(messages.len(), cases.len());
}

#[test]
fn capacity_error_exits_two() {
    let o = ntmflow(&["decide", &l1(), "1", "--max-vars", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("capacity"));
}

#[test]
fn small_difftest_is_deterministic_and_clean() {
    let args = ["difftest", "--seed", "3", "--machines", "4", "--max-input-len", "2", "--mu", "4"];
    let a = ntmflow(&args);
    let b = ntmflow(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.starts_with("DIFFTEST seed=3 machines=4 max_input_len=2 mu_cap=4\n"), "{out}");
    assert!(out.contains("ALL_AGREE true"));

    let dir = tempfile::tempdir().unwrap();
    let o = ntmflow(&[&args[..], &["-o", dir.path().to_str().unwrap()]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("report.txt")).unwrap(), a.stdout);
}
