use refine_core::prover::{prove_source, ProveOptions, EXIT_CERTIFIED, EXIT_OBLIGATION};
use refine_core::triples::{check_encoding_equiv, parse_triple_file, rel_valid, EncOptions};
use std::path::PathBuf;

fn read(dir: &str, name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(dir).join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn corpus(name: &str) -> String {
    read("proofs", name)
}

fn certified(name: &str) -> refine_core::prover::Report {
    let r = prove_source(&corpus(name), &ProveOptions::default());
    assert_eq!(r.exit_code, EXIT_CERTIFIED, "{name}:\n{}", r.render());
    let o = r.oracle.as_ref().expect("oracle ran");
    assert!(o.valid() && o.consistent(), "{name}: oracle {o:?}");
    r
}

#[test]
fn straight_bitmask_counts() {
    let r = certified("bitmask_straight.proof");
    assert_eq!(r.counts["consequence"], 3);
    assert_eq!(r.counts["axiom"], 3);
}

#[test]
fn nondet_choice() {
    certified("nondet_choice.proof");
}

#[test]
fn bitmask_loop() {
    certified("bitmask_loop.proof");
}

#[test]
fn bitmask_loop_peeled() {
    certified("bitmask_loop_peeled.proof");
}

#[test]
fn bitmask_loop_unrolled() {
    certified("bitmask_loop_unrolled.proof");
}

#[test]
fn array_guarded() {
    certified("array_guarded.proof");
}

#[test]
fn bad_invariant_fails_only_on_entry() {
    let r = prove_source(&corpus("bitmask_loop_bad_invariant.proof"), &ProveOptions::default());
    assert_eq!(r.exit_code, EXIT_OBLIGATION, "{}", r.render());
    let failed = r.failed();
    assert_eq!(failed.len(), 1, "{}", r.render());
    assert!(failed[0].label.starts_with("invariant holds on entry"), "{}", failed[0].label);
}

fn triple_verdict(name: &str) -> bool {
    let f = parse_triple_file(&read("triples", name)).unwrap();
    let rel = rel_valid(&f.setting, &f.triple).unwrap().is_none();
    let enc = check_encoding_equiv(&f.setting, &f.triple, &EncOptions::default()).unwrap();
    assert!(enc.agree(), "{name}: {enc:?}");
    assert_eq!(enc.relational, rel);
    rel
}

#[test]
fn nondet_refinement_holds() {
    assert!(triple_verdict("nondet_refine.triple"));
}

#[test]
fn nondet_overreach_is_refuted() {
    assert!(!triple_verdict("nondet_overreach.triple"));
}

#[test]
fn bitmask_triple_holds() {
    assert!(triple_verdict("bitmask.triple"));
}
