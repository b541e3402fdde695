use krivine::stdlib::{demo_script, Build};
use serde_json::Value;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::NamedTempFile;

fn krivine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krivine"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn path(f: &NamedTempFile) -> &str {
    f.path().to_str().unwrap()
}

fn demo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts/min_principle.lc")
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).expect("valid JSON")
}

/// First iterate of `x ↦ 2x+1` from 0 with `|x-c| ≤ |2x+1-c|`.
fn oracle(c: u64) -> u64 {
    let mut x = 0u64;
    while x.abs_diff(c) > (2 * x + 1).abs_diff(c) {
        x = 2 * x + 1;
    }
    x
}

#[test]
fn runs_the_demo() {
    let o = krivine(&["run", demo().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(
        out.contains("stop * #1023 . $\nhalt: final stop #1023"),
        "{out}"
    );
    for row in [
        "callcc          1",
        "print          11",
        "test_le        11",
    ] {
        assert!(out.contains(row), "missing `{row}` in\n{out}");
    }
}

#[test]
fn output_is_deterministic() {
    let a = krivine(&["run", demo().to_str().unwrap()]);
    let b = krivine(&["run", demo().to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_document_of_a_run() {
    let o = krivine(&["run", demo().to_str().unwrap(), "--json-like"]);
    let v = json(&o);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["exit_code"], 0);
    let eval = &v["evals"][0];
    assert_eq!(eval["stop_value"], 1023);
    assert_eq!(eval["printed"].as_array().unwrap().len(), 11);
    assert_eq!(eval["stats"]["callcc"], 1);
    assert_eq!(v["extractions"][0]["witness"], 1023);
    assert_eq!(v["extractions"][0]["verified"], true);
}

#[test]
fn stop_alone_fires_no_rule() {
    let s = file("Eval stop * #5 . $;\n");
    let o = krivine(&["run", path(&s)]);
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).contains("halt: final stop #5 after 0 steps"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn simulate_statement() {
    let s = file("Simulate (\\x.x) y * $;\n");
    let o = krivine(&["run", path(&s)]);
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).contains("simulated 2 steps: 0 failed, 0 inconclusive"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn extracts_the_demo_witness() {
    let r = file("realizer\n");
    let demo = demo();
    let args = [
        "extract",
        "--mode",
        "sigma01",
        "--realizer",
        path(&r),
        "--f",
        "goal",
        "--defs",
        demo.to_str().unwrap(),
    ];
    let o = krivine(&args);
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).contains("witness: 1023 (verified)"),
        "{}",
        stdout(&o)
    );
    let mut traced = args.to_vec();
    traced.extend(["--trace-guesses", "--json-like"]);
    let v = json(&krivine(&traced));
    assert_eq!(v["witness"], 1023);
    let guesses: Vec<u64> = v["guesses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g.as_u64().unwrap())
        .collect();
    assert_eq!(guesses, [0, 1, 3, 7, 15, 31, 63, 127, 255, 511, 1023]);
}

#[test]
fn extraction_on_another_stack() {
    let r = file("realizer\n");
    let demo = demo();
    let o = krivine(&[
        "extract",
        "--mode",
        "kamikaze",
        "--realizer",
        path(&r),
        "--f",
        "goal",
        "--defs",
        demo.to_str().unwrap(),
        "--stack",
        "#4 . $",
    ]);
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).contains("witness: 1023 (verified)"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn unverified_witness_exits_2() {
    let defs = file("Prim h(x) = x;\n");
    let r = file("\\u. u #4 (\\z.z)\n");
    let o = krivine(&[
        "extract",
        "--mode",
        "sigma01",
        "--realizer",
        path(&r),
        "--f",
        "h",
        "--defs",
        path(&defs),
    ]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));
    assert!(stdout(&o).contains("witness: 4 (NOT verified)"));
}

#[test]
fn fuel_exhaustion_exits_3() {
    let s = file("Eval fuel 50 (\\x. x x) (\\x. x x) * $;\n");
    let o = krivine(&["run", path(&s)]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("halt: fuel exhausted after 50 steps"));
}

#[test]
fn parse_errors_exit_1_with_a_location() {
    let s = file("Eval stop * #5 . $;\nEval (\\x. * $;\n");
    let o = krivine(&["run", path(&s)]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("2:"), "{err}");
    assert_eq!(code(&krivine(&["frobnicate"])), 1);
}

#[test]
fn translated_demo_yields_the_witness() {
    let defs = file(&demo_script(10, Build::Instructions));
    let o = krivine(&[
        "translate",
        "--process",
        "realizer * (\\x y. y (stop x)) . $",
        "--defs",
        path(&defs),
        "--read-witness",
        "--json-like",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["witness"], oracle(10));
}

#[test]
fn translates_formulas() {
    let o = krivine(&["translate", "--formula", "forall x. null(x)", "--json-like"]);
    let v = json(&o);
    assert_eq!(v["bot"], "exists x. null(neg(x))");
    assert_eq!(v["nn"], "(exists x. null(neg(x))) -> R");
}

#[test]
fn simulate_subcommand() {
    let o = krivine(&[
        "simulate",
        "--process",
        "rec (\\x.x) (\\a b. b) #3 * $",
        "--json-like",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["failed"], 0);
    assert_eq!(v["inconclusive"], 0);
    assert_eq!(v["inner"], 3);
    let print = krivine(&["simulate", "--process", "print #1 (stop #1) * $"]);
    assert_eq!(code(&print), 1);
}

#[test]
fn builds_differ_only_in_bookkeeping() {
    let fixpoint = demo().with_file_name("min_principle_fixpoint.lc");
    let o = krivine(&[
        "stats",
        demo().to_str().unwrap(),
        "--against",
        fixpoint.to_str().unwrap(),
        "--json-like",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["identical_output"], true);
    let delta = &v["evals"][0]["delta"];
    assert_ne!(delta["Grab"], 0);
    for key in ["callcc", "Resume", "print", "test_le", "f", "g"] {
        assert_eq!(delta[key], 0, "{key}");
    }
}
