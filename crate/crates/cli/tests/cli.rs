use std::process::{Command, Output};

fn latmid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latmid"))
        .args(args)
        .env("LM_COLOR", "0")
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn reduce_s3_ramified() {
    let o = latmid(&["reduce", "tests/data/s3_p3.lm"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("E1: dim 1"));
    assert!(out.contains("E2: dim 1"));
    assert!(!out.contains("FAILED"));
}

#[test]
fn reduce_q8_symplectic() {
    let o = latmid(&["reduce", "tests/data/q8_p3.lm", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("[ok] alternating_rank"));
}

#[test]
fn json_round_trips_and_is_deterministic() {
    let o = latmid(&["reduce", "--json", "tests/data/s3_p3.lm"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&v).unwrap() + "\n", text);
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["asd_basis", "checks", "e1", "e2", "input", "witt"]);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["ok"] == true));
    assert_eq!(v["witt"]["d1"], v["witt"]["e1"]);
    assert_eq!(stdout(&latmid(&["reduce", "--json", "tests/data/s3_p3.lm"])), text);
}

#[test]
fn precondition_violations_exit_3() {
    let o = latmid(&["reduce", "tests/data/not_invariant.lm"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("not invariant"), "{}", stderr(&o));
    let o = latmid(&["reduce", "tests/data/p2_symmetric.lm"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("p != 2"), "{}", stderr(&o));
}

#[test]
fn parse_errors_exit_2() {
    let o = latmid(&["reduce", "tests/data/bad_syntax.lm"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert_eq!(latmid(&["reduce", "tests/data/missing.lm"]).status.code(), Some(2));
}

#[test]
fn middles_example() {
    let o = latmid(&["middles", "tests/data/pair.lm"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("m-   = [[5, 0], [0, 1]]"));
    assert!(out.contains("m+   = [[1, 0], [0, 1/5]]"));
}

#[test]
fn middles_of_equal_lattices() {
    let o = latmid(&["middles", "tests/data/equal.lm", "--verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lines: Vec<String> =
        stdout(&o).lines().take(4).map(|l| l.split_once('=').unwrap().1.trim().to_string()).collect();
    assert!(lines.iter().all(|l| *l == lines[0]), "{lines:?}");
}

#[test]
fn middles_verify_random() {
    let o = latmid(&["middles", "--random", "20", "--seed", "7", "--verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).matches("pair ").count(), 20);
    assert!(!stdout(&o).contains("FAILED"));
}

#[test]
fn selftest_empty() {
    let o = latmid(&["selftest", "--sizes", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("total: 0 cases"));
}

#[test]
fn selftest_small() {
    let o = latmid(&["selftest", "--cases", "3", "--max-dim", "3", "--primes", "3,5", "--seed", "11"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).matches("[PASS]").count(), 9);
}

#[test]
fn selftest_catches_injected_fault() {
    let o = latmid(&["selftest", "--cases", "5", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("[FAIL]"));
    assert!(out.contains("counterexample"));
    assert!(out.contains("gram = "));
}
