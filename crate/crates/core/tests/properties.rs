//! The property suites at moderate counts, plus algebraic laws of the
//! semantics checked directly.

use proptest::prelude::*;
use refine_core::assertions::wlp;
use refine_core::execpred::RuleKind;
use refine_core::lang::Stmt;
use refine_core::semantics::{Semantics, StateSpace};
use refine_core::testkit::{run_property, FuzzOptions, FuzzSummary, Gen, GenConfig, Property};
use refine_core::triples::EncFault;

fn run(p: Property, seed: u64, count: usize) -> FuzzSummary {
    let s = run_property(p, &FuzzOptions { seed, count, ..FuzzOptions::default() });
    assert!(s.ok(), "{p}: {:#?}", s.failures);
    assert_eq!(s.checked + s.skipped, count);
    s
}

#[test]
fn relational_validity_matches_encoding() {
    let s = run(Property::Thm4, 11, 120);
    assert!(s.stat("valid") > 0 && s.stat("invalid") > 0, "{:?}", s.stats);
}

#[test]
fn decomposition_agrees() {
    run(Property::Decomp, 12, 300);
}

#[test]
fn every_exec_rule_is_sound() {
    let s = run(Property::ExecRules, 13, 11 * 30);
    for k in RuleKind::ALL {
        assert!(s.stat(&format!("accepted_{}", k.name())) > 0, "{k:?} never accepted: {:?}", s.stats);
    }
}

#[test]
fn vertical_composition_is_sound() {
    let s = run(Property::Vc, 14, 90);
    assert!(s.checked > 0);
}

#[test]
fn encoding_laws_hold() {
    run(Property::Enc, 15, 120);
}

#[test]
fn a_broken_wlp_is_caught() {
    let s = run_property(
        Property::Thm4,
        &FuzzOptions { seed: 3, count: 200, fault: Some(EncFault::WlpIgnoresErrors), ..FuzzOptions::default() },
    );
    assert!(!s.failures.is_empty());
}

fn small(seed: u64) -> (Semantics, Stmt, Stmt) {
    let mut g = Gen::new(GenConfig { seed, assert_in_while: true, ..GenConfig::default() });
    let vars = g.vars("x", 12);
    let (a, b) = (g.stmt(&vars, 3), g.stmt(&vars, 3));
    (Semantics::new(StateSpace::new(&vars, &[]).unwrap()), a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn wlp_of_everything_excludes_exactly_errors(seed in any::<u64>()) {
        let (sem, c, _) = small(seed);
        let mut safe = sem.space.full_set();
        safe.difference_with(&sem.denote(&c).err);
        prop_assert_eq!(wlp(&sem, &c, &sem.space.full_set()), safe);
    }

    #[test]
    fn wlp_of_seq_composes(seed in any::<u64>()) {
        let (sem, a, b) = small(seed);
        let mut g = Gen::new(GenConfig { seed: seed ^ 1, ..GenConfig::default() });
        let x = g.subset(sem.space.len(), 0.5);
        let seq = Stmt::Seq(Box::new(a.clone()), Box::new(b.clone()));
        prop_assert_eq!(wlp(&sem, &seq, &x), wlp(&sem, &a, &wlp(&sem, &b, &x)));
    }

    #[test]
    fn wlp_of_choice_intersects(seed in any::<u64>()) {
        let (sem, a, b) = small(seed);
        let mut g = Gen::new(GenConfig { seed: seed ^ 2, ..GenConfig::default() });
        let x = g.subset(sem.space.len(), 0.5);
        let mut both = wlp(&sem, &a, &x);
        both.intersect_with(&wlp(&sem, &b, &x));
        let ch = Stmt::Choice(Box::new(a), Box::new(b));
        prop_assert_eq!(wlp(&sem, &ch, &x), both);
    }

    #[test]
    fn wlp_is_monotone(seed in any::<u64>()) {
        let (sem, c, _) = small(seed);
        let mut g = Gen::new(GenConfig { seed: seed ^ 3, ..GenConfig::default() });
        let x = g.subset(sem.space.len(), 0.4);
        let mut y = x.clone();
        y.union_with(&g.subset(sem.space.len(), 0.4));
        prop_assert!(wlp(&sem, &c, &x).is_subset(&wlp(&sem, &c, &y)));
    }
}
