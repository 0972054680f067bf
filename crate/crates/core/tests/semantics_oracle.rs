//! The denotation agrees with an explicit-state explorer that runs programs
//! one statement at a time over a continuation stack.

use proptest::prelude::*;
use refine_core::lang::{Stmt, Value};
use refine_core::semantics::{Semantics, StateSpace};
use refine_core::testkit::{Gen, GenConfig};
use std::collections::{BTreeSet, HashSet};

struct Explored {
    finals: BTreeSet<usize>,
    err: bool,
}

fn explore(sem: &Semantics, s0: usize, c: &Stmt) -> Explored {
    let sp = &sem.space;
    let mut seen: HashSet<(usize, Vec<Stmt>)> = HashSet::new();
    let mut work = vec![(s0, vec![c.clone()])];
    let mut out = Explored { finals: BTreeSet::new(), err: false };
    while let Some((s, mut k)) = work.pop() {
        if !seen.insert((s, k.clone())) {
            continue;
        }
        let Some(top) = k.pop() else {
            out.finals.insert(s);
            continue;
        };
        match top {
            Stmt::Skip => work.push((s, k)),
            Stmt::Assign(x, e) => {
                let i = sp.var_index(&x).unwrap();
                match sp.eval_expr(s, &e) {
                    Some(v) if sp.sorts()[i].contains(&v) => work.push((sp.update(s, i, &v).unwrap(), k)),
                    _ => out.err = true,
                }
            }
            Stmt::NondetAssign(x, lo, hi) => {
                let i = sp.var_index(&x).unwrap();
                match (sp.eval_expr(s, &lo), sp.eval_expr(s, &hi)) {
                    (Some(Value::Int(a)), Some(Value::Int(b))) => {
                        for v in a..=b {
                            let v = Value::Int(v);
                            if sp.sorts()[i].contains(&v) {
                                work.push((sp.update(s, i, &v).unwrap(), k.clone()));
                            } else {
                                out.err = true;
                            }
                        }
                    }
                    _ => out.err = true,
                }
            }
            Stmt::Test(b) => match sp.eval_bool(s, &b) {
                Some(true) => work.push((s, k)),
                Some(false) => {}
                None => out.err = true,
            },
            Stmt::Assert(b) => match sp.eval_bool(s, &b) {
                Some(true) => work.push((s, k)),
                _ => out.err = true,
            },
            Stmt::Choice(a, b) => {
                let mut k2 = k.clone();
                k.push(*a);
                k2.push(*b);
                work.push((s, k));
                work.push((s, k2));
            }
            Stmt::Seq(a, b) => {
                k.push(*b);
                k.push(*a);
                work.push((s, k));
            }
            Stmt::While(b, body) => match sp.eval_bool(s, &b) {
                Some(true) => {
                    k.push(Stmt::While(b.clone(), body.clone()));
                    k.push(*body);
                    work.push((s, k));
                }
                Some(false) => work.push((s, k)),
                None => out.err = true,
            },
        }
    }
    out
}

fn agree_on(seed: u64, depth: usize) {
    let mut g = Gen::new(GenConfig { seed, max_depth: depth, assert_in_while: true, ..GenConfig::default() });
    let vars = g.vars("x", 12);
    let c = g.stmt(&vars, depth);
    let sem = Semantics::new(StateSpace::new(&vars, &[]).unwrap());
    let d = sem.denote(&c);
    for s in 0..sem.space.len() {
        let e = explore(&sem, s, &c);
        let nrm: BTreeSet<usize> = d.nrm[s].ones().collect();
        assert_eq!(nrm, e.finals, "outcomes of {c} from {}", sem.space.show_state(s));
        assert_eq!(d.err.contains(s), e.err, "errors of {c} from {}", sem.space.show_state(s));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn denotation_matches_explorer(seed in any::<u64>(), depth in 1usize..5) {
        agree_on(seed, depth);
    }
}

#[test]
fn fixed_programs() {
    let vars = vec![("i".to_string(), refine_core::lang::Sort::int(0, 3)), ("s".to_string(), refine_core::lang::Sort::set_over(0..2))];
    let sem = Semantics::new(StateSpace::new(&vars, &[]).unwrap());
    for src in [
        "while (i < 3) { s := s ∪ {i}; i := i + 1 }",
        "i := nondet(2, 4)",
        "choice(assume(i < 1), assert(1 in s)); i := i + 1",
        "while (i < 3) { choice(i := i + 1, skip) }",
        "while (true) { skip }",
    ] {
        let c = refine_core::lang::parse_stmt(src).unwrap();
        let d = sem.denote(&c);
        for s in 0..sem.space.len() {
            let e = explore(&sem, s, &c);
            assert_eq!(d.nrm[s].ones().collect::<BTreeSet<_>>(), e.finals, "{src}");
            assert_eq!(d.err.contains(s), e.err, "{src}");
        }
    }
}
