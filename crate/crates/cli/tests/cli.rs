use refine_cli::{run_args, Output, EXIT_DISAGREE, EXIT_INPUT, EXIT_INVALID, EXIT_OK};
use serde_json::Value;
use std::path::PathBuf;
use std::process::Command;

fn corpus(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel).to_string_lossy().into_owned()
}

fn refine(args: &[&str]) -> Output {
    run_args(std::iter::once("refine").chain(args.iter().copied()))
}

fn records(o: &Output) -> Vec<Value> {
    o.stdout.lines().map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("{e}: {l}"))).collect()
}

#[test]
fn binary_matches_library() {
    let path = corpus("triples/nondet_refine.triple");
    let out = Command::new(env!("CARGO_BIN_EXE_refine")).args(["--format", "json", "check", &path]).output().unwrap();
    let lib = refine(&["--format", "json", "check", &path]);
    assert_eq!(out.status.code(), Some(lib.code));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), lib.stdout);
}

#[test]
fn semantics_of_bit_mask() {
    let o = refine(&["--format", "json", "semantics", &corpus("programs/bit_mask.prog")]);
    assert_eq!(o.code, EXIT_OK);
    let rs = records(&o);
    let nrm: Vec<&Value> = rs.iter().filter(|r| r["record"] == "nrm").collect();
    assert_eq!(nrm.len(), 16);
    assert!(nrm.iter().all(|r| r["to"] == "{x=10}"), "{nrm:?}");
    assert!(rs.iter().all(|r| r["record"] != "err"));
}

#[test]
fn semantics_reports_errors() {
    let o = refine(&["semantics", &corpus("programs/assert_false.prog")]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("err"), "{}", o.stdout);
}

#[test]
fn valid_triple_in_all_modes() {
    let path = corpus("triples/nondet_refine.triple");
    for mode in ["rel", "encode-equiv"] {
        let o = refine(&["check", "--mode", mode, &path]);
        assert_eq!(o.code, EXIT_OK, "{mode}: {}", o.stdout);
    }
}

#[test]
fn invalid_triple_has_counterexamples() {
    let path = corpus("triples/nondet_overreach.triple");
    let rel = refine(&["--format", "json", "check", &path]);
    assert_eq!(rel.code, EXIT_INVALID);
    assert!(records(&rel)[0]["counterexample"].is_string());
    let enc = refine(&["--format", "json", "check", "--mode", "encode-equiv", &path]);
    assert_eq!(enc.code, EXIT_INVALID);
    let r = &records(&enc)[0];
    assert_eq!(r["agree"], true);
    assert!(r["encoded_counterexample"].is_string());
}

#[test]
fn encode_output_checks_as_a_standard_triple() {
    let o = refine(&["encode", &corpus("triples/nondet_decomposed.triple")]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("enc.triple");
    std::fs::write(&path, &o.stdout).unwrap();
    let std = refine(&["check", "--mode", "std", path.to_str().unwrap()]);
    assert_eq!(std.code, EXIT_OK, "{}\n{}", o.stdout, std.stdout);
}

#[test]
fn encode_needs_decomposed_form() {
    let o = refine(&["encode", &corpus("triples/nondet_overreach.triple")]);
    assert_eq!(o.code, EXIT_INPUT);
}

#[test]
fn proofs_certify_with_oracle() {
    for p in ["bitmask_straight", "nondet_choice", "bitmask_loop", "array_guarded"] {
        let o = refine(&["--format", "json", "prove", "--oracle", &corpus(&format!("proofs/{p}.proof"))]);
        assert_eq!(o.code, EXIT_OK, "{p}: {}", o.stdout);
        let last = records(&o).pop().unwrap();
        assert_eq!(last["certified"], true);
    }
}

#[test]
fn bad_invariant_names_the_failing_obligation() {
    let o = refine(&["--format", "json", "prove", &corpus("proofs/bitmask_loop_bad_invariant.proof")]);
    assert_eq!(o.code, EXIT_INVALID);
    let failed: Vec<Value> = records(&o).into_iter().filter(|r| r["record"] == "obligation" && r["ok"] == false).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0]["label"].as_str().unwrap().starts_with("invariant holds on entry"));
}

#[test]
fn fuzz_saves_replayable_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = refine(&["fuzz", "--property", "thm4", "--seed", "1", "--count", "100", "--inject-fault", "wlp-ignores-errors", "--out-dir", out]);
    assert_eq!(o.code, EXIT_INVALID);
    let saved: Vec<_> = std::fs::read_dir(out).unwrap().collect();
    assert!(!saved.is_empty());
    let o = refine(&["fuzz", "--property", "enc", "--inject-fault", "wlp-ignores-errors"]);
    assert_eq!(o.code, EXIT_INPUT);
}

#[test]
fn fuzz_passes_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f");
    for p in ["thm4", "decomp", "exec-rules", "vc", "enc"] {
        let o = refine(&["fuzz", "--property", p, "--count", "20", "--out-dir", out.to_str().unwrap()]);
        assert_eq!(o.code, EXIT_OK, "{p}: {}", o.stdout);
    }
    assert!(!out.exists() || std::fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(refine(&["check", "/nonexistent.triple"]).code, EXIT_INPUT);
    assert_eq!(refine(&["--cap", "0", "check", &corpus("triples/bitmask.triple")]).code, EXIT_INPUT);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.triple");
    std::fs::write(&bad, "low var x : int[0..1];\npre: x ==\n").unwrap();
    assert_eq!(refine(&["check", bad.to_str().unwrap()]).code, EXIT_INPUT);
}

#[test]
fn small_cap_samples_and_warns() {
    let o = refine(&["--cap", "2", "--format", "json", "check", "--mode", "encode-equiv", &corpus("triples/nondet_refine.triple")]);
    assert_ne!(o.code, EXIT_DISAGREE);
    assert_eq!(records(&o)[0]["exhaustive"], false);
    assert!(!o.stderr.is_empty());
}

#[test]
fn timing_is_opt_in() {
    let path = corpus("triples/bitmask.triple");
    let plain = refine(&["--format", "json", "check", &path]);
    assert!(!plain.stdout.contains("timing"));
    let timed = refine(&["--timing", "--format", "json", "check", &path]);
    assert_eq!(records(&timed).last().unwrap()["record"], "timing");
}
