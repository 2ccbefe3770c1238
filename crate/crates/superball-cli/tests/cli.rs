//! Binary-level checks: exit codes, file-format round-trips, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn superball(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superball"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

#[test]
fn density_on_known_bases() {
    let dir = tempfile::tempdir().unwrap();
    let l1 = dir.path().join("l1.txt");
    write(
        &l1,
        "-0.333333333333 0.166666666667 0.5\n0.5 -0.333333333333 0.166666666667\n0.166666666667 0.5 -0.333333333333\n",
    );
    let out = superball(&["density", l1.to_str().unwrap(), "--p", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"density\":0.9473684210"), "{text}");

    let id = dir.path().join("id.json");
    write(&id, r#"{"matrix":[1,0,0,0,1,0,0,0,1],"p":2.0}"#);
    let out = superball(&["density", id.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"density\":0.523598775598"), "{text}");
}

#[test]
fn singular_matrix_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("singular.txt");
    write(&bad, "1 0 0  2 0 0  0 0 1");
    let out = superball(&["density", bad.to_str().unwrap(), "--p", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("determinant too small"), "{err}");
}

#[test]
fn parse_error_names_the_token() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    write(&bad, "1 0 0 0 oops 0 0 0 1");
    let out = superball(&["density", bad.to_str().unwrap(), "--p", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("`oops`"), "{err}");
}

#[test]
fn verify_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // 0.99-scaled circulant optimum at p = 1.2: shrinking breaks the packing
    let shrunk = dir.path().join("shrunk.json");
    let scale = 0.99;
    let m = [
        -0.392613644302,
        0.22381214158,
        0.569113821114,
        0.569113821115,
        -0.392613644298,
        0.223812141583,
        0.223812141575,
        0.569113821114,
        -0.392613644306,
    ];
    let entries: Vec<String> = m.iter().map(|v| format!("{}", v * scale)).collect();
    write(
        &shrunk,
        &format!(r#"{{"matrix":[{}],"p":1.2}}"#, entries.join(",")),
    );
    let out = superball(&["verify", shrunk.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"is_packing\":false"), "{text}");
}

#[test]
fn usage_errors_exit_1() {
    let out = superball(&["search", "--case", "7", "--p", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let out = superball(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));
    let out = superball(&["certify"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn search_roundtrips_through_verify_and_density() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results.json");
    let out = superball(&[
        "search",
        "--case",
        "1",
        "--p",
        "2.0",
        "--restarts",
        "40",
        "--seed",
        "1",
        "--out",
        results.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&results).unwrap();
    assert!(text.starts_with('['));

    // results file feeds straight back into verify and density
    let out = superball(&["verify", results.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "search output must verify");
    let out = superball(&["density", results.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.740480489693"), "{text}");
}

#[test]
fn search_is_byte_identical_across_runs_and_jobs() {
    let run = |jobs: &str| {
        let out = superball(&[
            "search",
            "--case",
            "3",
            "--p",
            "1.2",
            "--restarts",
            "30",
            "--seed",
            "7",
            "--jobs",
            jobs,
        ]);
        assert!(out.status.success());
        out.stdout
    };
    let a = run("1");
    let b = run("1");
    let c = run("4");
    assert_eq!(a, b, "same flags and seed must give identical bytes");
    assert_eq!(a, c, "thread count must not change the output");
}

#[test]
fn family_grid_output() {
    let out = superball(&["family", "--p", "1:0.1:1.5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,x,y,z,det,density,neighbors");
    assert_eq!(lines.len(), 7, "header + six rows");
    assert!(lines[1].starts_with("1.00000000000,"));
    assert!(lines[6].starts_with("1.50000000000,"));
}

#[test]
fn certify_schedule_file_and_gap_detection() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("rows.csv");
    write(
        &sched,
        "p0,x0,y0,z0,eps,peps\n\
         1.0,0.333333333333,0.166666666667,0.5,0.03,0.01\n\
         1.01,0.336543320255,0.169227330456,0.504294897412,0.03,0.01\n",
    );
    let out = superball(&["certify", "--schedule", sched.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.contains("\"all_pass\":true"), "{last}");

    // removing the middle of a three-row chain leaves a gap
    write(
        &sched,
        "1.0,0.333333333333,0.166666666667,0.5,0.03,0.01\n\
         1.02,0.339721855623,0.171809715243,0.508503843298,0.03,0.01\n",
    );
    let out = superball(&["certify", "--schedule", sched.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("gap"), "{err}");
}

#[test]
fn emit_classic_roundtrips_into_certify() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("classic.csv");
    let out = superball(&[
        "certify",
        "--emit-classic",
        "--p",
        "1.0:0.01:1.05",
        "--out",
        sched.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // the early coarse rows all hold, so this prefix certifies cleanly
    let out = superball(&["certify", "--schedule", sched.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().last().unwrap().contains("\"all_pass\":true"));
}

#[test]
fn family_outside_range_exits_3_with_partial_output() {
    // log₂ 3 ends the family's range; the 1.7 row cannot solve
    let out = superball(&["family", "--p", "1.5:0.2:1.7"]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("1.50000000000,")));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("1.7"), "{err}");
}
