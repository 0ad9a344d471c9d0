//! Exit-code and output contract of the binary: 0 valid/ok, 1
//! invalid/refuted/violation, 2 usage or I/O errors, machine-readable first
//! tokens on stdout.

use std::path::PathBuf;
use std::process::Command;

fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn bes(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_bes")).args(args).output().unwrap();
    Run {
        code: out.status.code().expect("no signal"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

#[test]
fn parse_prints_the_canonical_form_and_flags_syntax_errors() {
    let ok = bes(&["parse", "p->q->r"]);
    assert_eq!(ok.code, 0);
    assert!(ok.stdout.contains("p -> (q -> r)"), "{}", ok.stdout);
    assert!(ok.stdout.contains("AST:"));

    let err = bes(&["parse", "p ->"]);
    assert_eq!(err.code, 1);
    assert!(err.stdout.starts_with("PARSE: error"));
}

#[test]
fn universe_dumps_the_rule_list() {
    let run = bes(&["universe", "--atoms", "p,q", "--cap", "1"]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.contains("UNIVERSE: rules=6 bases=64"));
    assert!(run.stdout.contains("atoms: p q"));
    assert!(run.stdout.contains("q => p"));
}

#[test]
fn bes_valid_splits_exit_codes_by_verdict() {
    let valid = bes(&["bes-valid", "[a]p -> p"]);
    assert_eq!(valid.code, 0);
    assert!(valid.stdout.starts_with("VERDICT: valid"));

    let invalid = bes(&["bes-valid", "p"]);
    assert_eq!(invalid.code, 1);
    assert!(invalid.stdout.starts_with("VERDICT: invalid"));
    assert!(invalid.stdout.contains("counterexample base rules:"));

    let five = bes(&[
        "bes-valid",
        "~[a]p -> [a]~[a]p",
        "--atoms",
        "p",
        "--mode",
        "exhaustive",
    ]);
    assert_eq!(five.code, 0, "{}", five.stderr);
    assert!(five.stdout.starts_with("VERDICT: valid"));
}

#[test]
fn bes_holds_reads_the_base_from_a_rule_file() {
    let base = fixture("bases/just_p.rules");
    let holds = bes(&["bes-holds", "p", "--base", &base]);
    assert_eq!(holds.code, 0);
    assert!(holds.stdout.starts_with("VERDICT: holds"));

    let fails = bes(&["bes-holds", "q", "--base", &base]);
    assert_eq!(fails.code, 1);
    assert!(fails.stdout.starts_with("VERDICT: fails"));
}

#[test]
fn kripke_reports_truth_and_rejects_unknown_worlds() {
    let model = fixture("models/universal_2w.model");
    let t = bes(&["kripke", &model, "p", "--world", "w0"]);
    assert_eq!(t.code, 0);
    assert!(t.stdout.starts_with("KRIPKE: true"));

    let f = bes(&["kripke", &model, "[a]p", "--world", "w0"]);
    assert_eq!(f.code, 1);
    assert!(f.stdout.starts_with("KRIPKE: false"));

    let missing = bes(&["kripke", &model, "p", "--world", "w9"]);
    assert_eq!(missing.code, 2);
    assert!(missing.stderr.contains("w9"));
}

#[test]
fn frame_passes_the_fixture_and_exits_nonzero_without_io() {
    let run = bes(&["frame", &fixture("models/universal_2w.model")]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.contains("reflexive=true transitive=true euclidean=true"));
    assert!(run.stdout.contains("FRAME: s5=true"));

    let gone = bes(&["frame", "/nonexistent.model"]);
    assert_eq!(gone.code, 2);
}

#[test]
fn hilbert_accepts_the_corpus_and_reports_failing_steps() {
    let ok = bes(&["hilbert", &fixture("proofs/identity.proof")]);
    assert_eq!(ok.code, 0);
    assert!(ok.stdout.contains("HILBERT: ok steps=5"));

    let bad = bes(&["hilbert", &fixture("proofs/bad/bad_mp.proof")]);
    assert_eq!(bad.code, 1);
    assert!(bad.stdout.contains("step 3"), "{}", bad.stdout);
}

#[test]
fn bridge_exits_one_on_refutation_and_zero_without_countermodel() {
    let refuted = bes(&["bridge", "[a]p", "--max-worlds", "2"]);
    assert_eq!(refuted.code, 1);
    assert!(refuted.stdout.contains("BRIDGE: refuted"), "{}", refuted.stdout);

    let valid = bes(&["bridge", "[a]p -> p", "--max-worlds", "3"]);
    assert_eq!(valid.code, 0);
    assert!(valid.stdout.contains("BRIDGE: no-countermodel"));

    let trivial = bes(&["bridge", "p -> p", "--max-worlds", "2"]);
    assert_eq!(trivial.code, 0);
    assert!(trivial.stdout.contains("BRIDGE: no-countermodel"));
}

#[test]
fn bridge_writes_artifacts_for_an_explicit_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("art");
    let run = bes(&[
        "bridge",
        "[a]p",
        "--model",
        &fixture("models/universal_2w.model"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.code, 1);
    assert!(run.stdout.contains("BRIDGE: refuted world=w0 base=3919"));
    for name in [
        "model.orig",
        "model.prime",
        "universe.rules",
        "base_w0.rules",
        "base_w1.rules",
        "relations.txt",
        "report.txt",
    ] {
        assert!(out.join(name).is_file(), "missing artifact {name}");
    }
}

#[test]
fn suite_rejects_corrupted_relation_files_with_condition_lines() {
    let run = bes(&["suite", "--relations", &fixture("relations/bad_b.rel")]);
    assert_eq!(run.code, 1);
    assert!(run.stdout.contains("CONDITION: family=bad_b agent=a (b) fail"), "{}", run.stdout);
    assert!(run.stdout.contains("SUITE: fail families-rejected=1"));

    let ok = bes(&["suite", "--pool-random", "10"]);
    assert_eq!(ok.code, 0);
    assert!(ok.stdout.contains("SUITE: pass"));
    assert!(ok.stdout.contains("seed=2024"), "default seed is recorded");
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        vec!["suite", "--pool-random", "15"],
        vec!["bes-valid", "[a](p -> q) -> ([a]p -> [a]q)"],
        vec!["bridge", "[a]p", "--max-worlds", "2"],
    ] {
        let first = bes(&args);
        let second = bes(&args);
        assert_eq!(first.stdout, second.stdout, "{args:?} not reproducible");
        assert_eq!(first.code, second.code);
    }
}
