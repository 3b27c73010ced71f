//! End-to-end tests of the `hml` binary: output text and exit codes are
//! both part of the contract.

use std::process::{Command, Output};

fn hml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hml"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("not killed by a signal")
}

const EDGE: &str = "tests/fixtures/edge.aut";
const CHAIN: &str = "tests/fixtures/chain.aut";
const MACHINE: &str = "tests/fixtures/machine.ccs";

#[test]
fn check_reports_truth_through_the_exit_code() {
    let out = hml(&["check", EDGE, "0", "<a>tt"]);
    assert_eq!(stdout(&out), "true\n");
    assert_eq!(code(&out), 0);

    let out = hml(&["check", EDGE, "1", "<a>tt"]);
    assert_eq!(stdout(&out), "false\n");
    assert_eq!(code(&out), 1);

    let out = hml(&["check", EDGE, "0", "<b>tt"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("label \"b\""), "{}", stderr(&out));
}

#[test]
fn check_verifies_both_semantics_on_request() {
    let out = hml(&[
        "check",
        CHAIN,
        "0",
        "<a>[a]ff",
        "--both-semantics",
        "--records",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "command=check\nsystem=tests/fixtures/chain.aut\nstate=0\n\
         formula=<a>[a]ff\nresult=true\nagreement=ok\n"
    );
}

#[test]
fn check_reads_formula_files() {
    let out = hml(&["check", CHAIN, "1", "@tests/fixtures/props.hml"]);
    assert_eq!(stdout(&out), "<a>tt: false\n[a]ff: true\n");
    // not all formulas hold, so the answer is negative
    assert_eq!(code(&out), 1);

    let out = hml(&["check", CHAIN, "1", "@tests/fixtures/bad.hml"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn denote_prints_sorted_state_sets() {
    let out = hml(&["denote", CHAIN, "<a>tt"]);
    assert_eq!(stdout(&out), "{0, 2, 3}\n");
    assert_eq!(code(&out), 0);

    let out = hml(&["denote", CHAIN, "[a]ff", "<a>tt & [a]<a>tt"]);
    assert_eq!(stdout(&out), "[a]ff: {1}\n<a>tt & [a]<a>tt: {2, 3}\n");
}

#[test]
fn bisim_compares_two_states() {
    let out = hml(&["bisim", CHAIN, "2", "3"]);
    assert_eq!(stdout(&out), "bisimilar\n");
    assert_eq!(code(&out), 0);

    let out = hml(&["bisim", CHAIN, "0", "2"]);
    assert_eq!(stdout(&out), "not-bisimilar\n");
    assert_eq!(code(&out), 1);
}

#[test]
fn bisim_prints_the_partition_without_states() {
    let out = hml(&["bisim", CHAIN]);
    assert_eq!(
        stdout(&out),
        "class 0: {0}\nclass 1: {1}\nclass 2: {2, 3}\n"
    );
    assert_eq!(code(&out), 0);
}

#[test]
fn bisim_rejects_a_single_state() {
    let out = hml(&["bisim", CHAIN, "1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("exactly two"), "{}", stderr(&out));
}

#[test]
fn distinguish_prints_a_verified_formula() {
    let out = hml(&["distinguish", CHAIN, "0", "2"]);
    assert_eq!(
        stdout(&out),
        "<a>[a]ff\nsatisfied by state 0, not by state 2\n"
    );
    assert_eq!(code(&out), 0);

    let out = hml(&["distinguish", CHAIN, "2", "3"]);
    assert_eq!(stdout(&out), "equivalent\n");
    assert_eq!(code(&out), 1);
}

#[test]
fn records_mode_is_stable_and_line_oriented() {
    let out = hml(&["distinguish", CHAIN, "2", "0", "--records"]);
    assert_eq!(
        stdout(&out),
        "command=distinguish\nsystem=tests/fixtures/chain.aut\nleft=2\nright=0\n\
         result=distinguished\nformula=<a><a>tt\nsatisfied_by=2\n"
    );
    assert_eq!(code(&out), 0);
}

#[test]
fn theory_eq_matches_bisimilarity() {
    let out = hml(&["theory-eq", CHAIN, "2", "3"]);
    assert_eq!(stdout(&out), "equal\n");
    assert_eq!(code(&out), 0);

    let out = hml(&["theory-eq", CHAIN, "0", "1"]);
    assert_eq!(stdout(&out), "not-equal\n");
    assert_eq!(code(&out), 1);
}

#[test]
fn theory_eq_oracle_enumerates_and_cross_checks() {
    let out = hml(&[
        "theory-eq",
        CHAIN,
        "0",
        "2",
        "--oracle",
        "6",
        "2",
        "--records",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("method=oracle\n"), "{}", stdout(&out));
    assert!(
        stdout(&out).contains("result=not-equal\n"),
        "{}",
        stdout(&out)
    );

    // bounds beyond the oracle's hard caps are a usage error
    let out = hml(&["theory-eq", CHAIN, "0", "2", "--oracle", "9", "9"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn ccs_compiles_and_prints_the_state_table() {
    let out = hml(&["ccs", MACHINE]);
    assert_eq!(
        stdout(&out),
        "states: 2\ntransitions: 2\nlabels: tau\nroots: 0\n\
         state 0: (M | C) \\ {choc, coin}\nstate 1: (choc.M | 'choc.C) \\ {choc, coin}\n"
    );
    assert_eq!(code(&out), 0);
}

#[test]
fn ccs_emits_aut_files_that_load_back() {
    let emitted = format!("{}/machine.aut", env!("CARGO_TARGET_TMPDIR"));
    let out = hml(&["ccs", MACHINE, "--emit-aut", &emitted]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&emitted).unwrap();
    assert_eq!(text, "des (0,2,2)\n(0,\"tau\",1)\n(1,\"tau\",0)\n");

    let out = hml(&["bisim", &emitted, "0", "1"]);
    assert_eq!(stdout(&out), "bisimilar\n");
    assert_eq!(code(&out), 0);
}

#[test]
fn ccs_state_budget_is_a_resource_error() {
    let out = hml(&["ccs", "tests/fixtures/grow.ccs", "--max-states", "10"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("state budget"), "{}", stderr(&out));
}

#[test]
fn ccs_systems_accept_process_expressions_as_states() {
    let out = hml(&["check", MACHINE, "(M | C) \\ {coin, choc}", "<tau><tau>tt"]);
    assert_eq!(stdout(&out), "true\n");
    assert_eq!(code(&out), 0);

    // an expression that is not already reachable becomes a fresh root
    let out = hml(&["bisim", MACHINE, "(M | C) \\ {coin, choc}", "coin.0"]);
    assert_eq!(stdout(&out), "not-bisimilar\n");
    assert_eq!(code(&out), 1);

    let out = hml(&["check", EDGE, "a.0", "tt"]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("referenced by number"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn timings_are_opt_in() {
    let out = hml(&["check", EDGE, "0", "tt", "--timings"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "true");
    assert!(lines[1].starts_with("time: "), "{text}");

    let out = hml(&["check", EDGE, "0", "tt", "--timings", "--records"]);
    assert!(stdout(&out).lines().last().unwrap().starts_with("time_ms="));

    // without the flag, output is deterministic
    let out = hml(&["check", EDGE, "0", "tt"]);
    assert_eq!(stdout(&out), "true\n");
}

#[test]
fn malformed_inputs_are_usage_errors() {
    let out = hml(&["check", "Cargo.toml", "0", "tt"]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("unsupported extension"),
        "{}",
        stderr(&out)
    );

    let out = hml(&["check", "tests/fixtures/nope.aut", "0", "tt"]);
    assert_eq!(code(&out), 2);

    let out = hml(&["check", EDGE, "7", "tt"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("out of range"), "{}", stderr(&out));

    let out = hml(&["check", EDGE, "0", "<a>"]);
    assert_eq!(code(&out), 2);

    // clap's own usage failures also exit 2
    let out = hml(&[]);
    assert_eq!(code(&out), 2);
}
