use std::process::{Command, Output};

fn cantorflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cantorflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    cantorflow(args).status.code().expect("exit code")
}

#[test]
fn every_subcommand_passes_on_defaults() {
    let runs: &[&[&str]] = &[
        &["system"],
        &[
            "system",
            "--system",
            "substitution a:ab,b:a",
            "--depth",
            "4",
        ],
        &["towers", "--slices", "0,00,000"],
        &[
            "towers",
            "--system",
            "substitution a:ab,b:a",
            "--auto-nest",
            "3",
        ],
        &["k0", "--depth", "5"],
        &["verify", "exact-sequence", "--stages", "4"],
        &[
            "verify",
            "order-iso",
            "--system",
            "odometer base=3",
            "--stages",
            "4",
        ],
        &["suspension", "flow", "--tau", "3/2", "--time", "-7/3"],
        &["suspension", "flowbox", "--stages", "6", "--samples", "20"],
        &["kernels", "check", "--grid", "32"],
        &["bratteli", "--stages", "3"],
    ];
    for args in runs {
        let out = cantorflow(args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}\n{}",
            String::from_utf8_lossy(&out.stdout)
        );
    }
}

#[test]
fn failing_checks_exit_one() {
    assert_eq!(code(&["kernels", "check", "--grid", "4"]), 1);
    assert_eq!(
        code(&["verify", "order-iso", "--stages", "2", "--depth", "5"]),
        1
    );
}

#[test]
fn bad_input_exits_two() {
    assert_eq!(code(&["system", "--system", "odometer base=1"]), 2);
    assert_eq!(code(&["towers", "--slices", "0,2"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
}

#[test]
fn reports_are_deterministic() {
    let args = [
        "verify",
        "exact-sequence",
        "--system",
        "substitution a:ab,b:a",
        "--stages",
        "3",
        "--seed",
        "7",
        "--json",
    ];
    let a = cantorflow(&args);
    let b = cantorflow(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema"], "cantorflow.report.v1");
    assert_eq!(v["passed"], true);
    assert_eq!(v["config"]["seed"], 7);
}

#[test]
fn out_writes_the_report_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k0.json");
    let p = path.to_str().unwrap();
    let stdout = cantorflow(&["k0", "--depth", "3", "--json", "--out", p]).stdout;
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, stdout);
    let again = cantorflow(&["k0", "--depth", "3", "--out", p]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), written);
    let names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names.len(), 1, "{names:?}");
}

#[test]
fn bratteli_out_is_dot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.dot");
    assert_eq!(
        code(&["bratteli", "--stages", "3", "--out", path.to_str().unwrap()]),
        0
    );
    let dot = std::fs::read_to_string(&path).unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("label=\"2\""), "{dot}");
}
