use serde_json::Value;
use std::path::PathBuf;
use std::process::Command;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn corpus_file(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "inclusion-logic", "corpus", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn incl(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_incl")).args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn records(stdout: &str) -> Vec<Value> {
    stdout.lines().map(|l| serde_json::from_str(l).expect("one JSON record per line")).collect()
}

const NON_WF: &str = "E x. E y. (y <= x & y < x)";

#[test]
fn cycle_model_is_not_well_founded() {
    let (code, out, _) =
        incl(&["eval", "--model", &data("cyclic3.mod"), "--team", &data("empty.team"), "--formula", NON_WF]);
    assert_eq!((code, out.trim()), (0, "true"));
    let (code, out, _) = incl(&[
        "eval",
        "--model",
        &data("chain3.mod"),
        "--team",
        &data("empty.team"),
        "--formula",
        NON_WF,
        "--engine",
        "both",
    ]);
    assert_eq!((code, out.trim()), (1, "false"));
}

#[test]
fn largest_subteam_record() {
    let (code, out, _) = incl(&[
        "--format",
        "records",
        "eval",
        "--model",
        &data("cyclic3.mod"),
        "--team",
        &data("pairs.team"),
        "--formula",
        "x <= y",
        "--max-subteam",
    ]);
    assert_eq!(code, 1);
    let r = &records(&out)[0];
    assert_eq!(r["value"], false);
    assert_eq!(r["max_subteam"]["rows"], serde_json::json!([["c", "c"]]));
}

#[test]
fn check_reports_acceptance_and_rejection() {
    let (code, out, _) = incl(&["check", &corpus_file("refl.ndp")]);
    assert_eq!(code, 0, "{}", out);
    assert!(out.contains("accepted"));

    let dir = tempdir();
    let bad = dir.join("bad.ndp");
    std::fs::write(&bad, "1: x <= y assume\n2: x <= y |- y <= x by incExc(k=1; l=1) from 1\nqed 2\n").unwrap();
    let (code, out, _) = incl(&["--format", "records", "check", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    let r = &records(&out)[0];
    assert_eq!(r["verdict"], "rejected");
    assert_eq!(r["first_failure"]["line"], "2");
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("incl-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn implication_verdicts_and_exit_codes() {
    let (code, out, _) = incl(&["implies", "--gamma", "x<=y;y<=z", "--phi", "x<=z"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("derivable"));

    let (code, out, _) =
        incl(&["--format", "records", "implies", "--gamma", "x<=y", "--phi", "y<=x", "--rows", "2", "--elems", "2"]);
    assert_eq!(code, 1);
    let r = &records(&out)[0];
    assert_eq!(r["verdict"], "refuted");
    assert_eq!(r["counterexample"]["rows"], serde_json::json!([["1", "1"], ["1", "2"]]));

    let (code, out, _) = incl(&["implies", "--gamma", "x,y<=z,z", "--phi", "x<=y"]);
    assert_eq!(code, 3, "{}", out);
}

#[test]
fn errors_exit_with_two() {
    let (code, _, err) =
        incl(&["eval", "--model", "/nonexistent.mod", "--team", &data("empty.team"), "--formula", "x = x"]);
    assert_eq!(code, 2);
    assert!(err.contains("cannot read"));
    let (code, _, _) = incl(&["parse", "--formula", "x <= "]);
    assert_eq!(code, 2);
    let (code, _, _) = incl(&["implies", "--phi", "x = y"]);
    assert_eq!(code, 2);
    let (code, _, _) =
        incl(&["eval", "--model", &data("cyclic3.mod"), "--team", &data("empty.team"), "--formula", "x = x"]);
    assert_eq!(code, 2, "unbound variable");
    let (code, _, _) = incl(&["approx", "--formula", NON_WF, "--n", "9"]);
    assert_eq!(code, 2, "level above the cap");
}

#[test]
fn parse_nf_and_approx_records() {
    let (code, out, _) = incl(&["--format", "records", "parse", "--formula", "x <= y & P(x)"]);
    assert_eq!(code, 0);
    let r = &records(&out)[0];
    assert_eq!(r["free"], serde_json::json!(["x", "y"]));
    assert_eq!(r["first_order"], false);

    let (_, out, _) = incl(&["nf", "--formula", "x <= y"]);
    assert_eq!(out.trim(), "E w1. E u1. A y1. w1 <= u1 & (w1 = x & u1 = y)");

    for (n, want) in [(1, 0), (2, 1)] {
        let (code, _, _) =
            incl(&["approx", "--formula", NON_WF, "--n", &n.to_string(), "--model", &data("chain3.mod")]);
        assert_eq!(code, want, "level {}", n);
    }
}

#[test]
fn corpus_command_runs_everything() {
    let (code, out, _) = incl(&["--format", "records", "corpus", "--samples", "40"]);
    assert_eq!(code, 0, "{}", out);
    let rs = records(&out);
    assert!(rs.iter().filter(|r| r["command"] == "check").count() >= 15);
    assert!(rs.iter().filter(|r| r["command"] == "suite").all(|r| r["passed"] == true));
}

#[test]
fn any_seed_passes() {
    let run = |seed: &str| incl(&["--seed", seed, "--format", "records", "corpus", "--samples", "10"]).0;
    assert_eq!(run("1"), 0);
    assert_eq!(run("99"), 0);
}
