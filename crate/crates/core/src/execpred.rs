//! `Exec` predicates over the high-level program and the rules that rewrite
//! them. A predicate `Exec(P̌, c)` holds for a set `X` when some state of `P̌`
//! runs `c` without error and with every outcome in `X`. Each rule turns a
//! predicate into one implied by it for every `X`.
//!
//! The assertion `P̌` is kept as the set of high states it denotes, so the
//! assignment rule yields the exact image of that set.

use crate::lang::{Sort, Stmt, Value};
use crate::semantics::Semantics;
use crate::StateSet;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecPred {
    pub states: StateSet,
    pub prog: Stmt,
}

/// Certificate for replacing the head of a program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PureCert {
    /// Every state of the predicate refines from the old head to the new one.
    Semantic,
    /// A chain rewriting the old head into the new one without growing the state set.
    Chain(Vec<RuleApp>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleApp {
    Assign,
    /// Pick the given value for a `nondet` assignment.
    Nondet(Value),
    ChoiceL,
    ChoiceR,
    Assume,
    /// Replace the head of the program by `replacement`.
    Pure { replacement: Stmt, cert: PureCert },
    WhileEnd,
    WhileUnroll,
    /// Run a chain on the head of a sequence until it reaches `skip`.
    SeqStep(Vec<RuleApp>),
    /// Consume an `assert`, strengthening the predicate with its condition.
    AssertStep,
    /// Step over the head using an angelic triple with the given postcondition.
    Focus { post: StateSet },
}

/// Rule kinds, for reporting and coverage counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Assign,
    Nondet,
    ChoiceL,
    ChoiceR,
    Assume,
    Pure,
    WhileEnd,
    WhileUnroll,
    Seq,
    Assert,
    Focus,
}

impl RuleKind {
    pub const ALL: [RuleKind; 11] = [
        RuleKind::Assign,
        RuleKind::Nondet,
        RuleKind::ChoiceL,
        RuleKind::ChoiceR,
        RuleKind::Assume,
        RuleKind::Pure,
        RuleKind::WhileEnd,
        RuleKind::WhileUnroll,
        RuleKind::Seq,
        RuleKind::Assert,
        RuleKind::Focus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Assign => "assign",
            RuleKind::Nondet => "nondet",
            RuleKind::ChoiceL => "choice-left",
            RuleKind::ChoiceR => "choice-right",
            RuleKind::Assume => "assume",
            RuleKind::Pure => "pure",
            RuleKind::WhileEnd => "while-end",
            RuleKind::WhileUnroll => "while-unroll",
            RuleKind::Seq => "seq",
            RuleKind::Assert => "assert",
            RuleKind::Focus => "focus",
        }
    }
}

impl RuleApp {
    pub fn kind(&self) -> RuleKind {
        match self {
            RuleApp::Assign => RuleKind::Assign,
            RuleApp::Nondet(_) => RuleKind::Nondet,
            RuleApp::ChoiceL => RuleKind::ChoiceL,
            RuleApp::ChoiceR => RuleKind::ChoiceR,
            RuleApp::Assume => RuleKind::Assume,
            RuleApp::Pure { .. } => RuleKind::Pure,
            RuleApp::WhileEnd => RuleKind::WhileEnd,
            RuleApp::WhileUnroll => RuleKind::WhileUnroll,
            RuleApp::SeqStep(_) => RuleKind::Seq,
            RuleApp::AssertStep => RuleKind::Assert,
            RuleApp::Focus { .. } => RuleKind::Focus,
        }
    }
}

impl fmt::Display for RuleApp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleApp::Nondet(v) => write!(f, "nondet {v}"),
            RuleApp::Pure { replacement, cert } => {
                write!(f, "pure -> {replacement}")?;
                if let PureCert::Chain(c) = cert {
                    write!(f, " by [{}]", join(c))?;
                }
                Ok(())
            }
            RuleApp::SeqStep(c) => write!(f, "seq [{}]", join(c)),
            RuleApp::Focus { post } => write!(f, "focus ({} states)", post.count_ones(..)),
            r => write!(f, "{}", r.kind().name()),
        }
    }
}

fn join(c: &[RuleApp]) -> String {
    c.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule {rule} does not apply to `{prog}`")]
    HeadMismatch { rule: &'static str, prog: String },
    #[error("side condition of {rule} fails at high state {state}")]
    SideConditionFails { rule: &'static str, state: String },
    #[error("value {value} is outside the sort {sort} of the nondet target")]
    NondetOutOfRange { value: String, sort: String },
    #[error("chain ends at `{0}` instead of skip")]
    ChainDoesNotFinish(String),
    #[error("pure certificate ends at `{got}` instead of `{want}`")]
    PureMismatch { want: String, got: String },
    #[error("pure certificate chain enlarges the predicate")]
    PureGrows,
}

/// Whether `Exec(p.states, p.prog)` holds for `X`.
pub fn exec_holds(high: &Semantics, p: &ExecPred, x: &StateSet) -> bool {
    !p.states.is_disjoint(&high.denote(&p.prog).wlp(x))
}

/// The angelic triple: every state of `pre` runs `c` without error and has
/// some outcome in `post`. Returns a failing state otherwise.
pub fn angelic_valid(high: &Semantics, pre: &StateSet, c: &Stmt, post: &StateSet) -> Result<(), usize> {
    let d = high.denote(c);
    for s in pre.ones() {
        if d.err.contains(s) || d.nrm[s].is_disjoint(post) {
            return Err(s);
        }
    }
    Ok(())
}

fn mismatch(rule: &'static str, prog: &Stmt) -> RuleError {
    RuleError::HeadMismatch { rule, prog: prog.to_string() }
}

fn side(high: &Semantics, rule: &'static str, states: &StateSet, ok: impl Fn(usize) -> bool) -> Result<(), RuleError> {
    match states.ones().find(|s| !ok(*s)) {
        None => Ok(()),
        Some(s) => Err(RuleError::SideConditionFails { rule, state: high.space.show_state(s) }),
    }
}

fn then(c: Stmt, rest: Option<Stmt>) -> Stmt {
    match rest {
        Some(r) => Stmt::seq(c, r),
        None => c,
    }
}

/// Applies a rule to the program as a whole.
pub fn apply_rule(high: &Semantics, p: &ExecPred, r: &RuleApp) -> Result<ExecPred, RuleError> {
    let sp = &high.space;
    let name = r.kind().name();
    match r {
        RuleApp::Assign => match &p.prog {
            Stmt::Assign(..) => {
                let d = high.denote(&p.prog);
                Ok(ExecPred { states: d.image(&p.states), prog: Stmt::Skip })
            }
            c => Err(mismatch(name, c)),
        },
        RuleApp::Nondet(v) => match &p.prog {
            Stmt::NondetAssign(x, lo, hi) => {
                let k = sp.var_index(x).expect("declared target");
                let sort: &Sort = &sp.sorts()[k];
                let n = match v {
                    Value::Int(n) if sort.contains(v) => *n,
                    _ => return Err(RuleError::NondetOutOfRange { value: v.to_string(), sort: sort.to_string() }),
                };
                side(high, name, &p.states, |s| {
                    matches!((sp.eval_expr(s, lo), sp.eval_expr(s, hi)), (Some(Value::Int(a)), Some(Value::Int(b))) if a <= n && n <= b)
                })?;
                let mut out = sp.empty_set();
                for s in p.states.ones() {
                    out.insert(sp.update(s, k, v).expect("in sort"));
                }
                Ok(ExecPred { states: out, prog: Stmt::Skip })
            }
            c => Err(mismatch(name, c)),
        },
        RuleApp::ChoiceL | RuleApp::ChoiceR => match &p.prog {
            Stmt::Choice(a, b) => {
                let c = if matches!(r, RuleApp::ChoiceL) { a } else { b };
                Ok(ExecPred { states: p.states.clone(), prog: (**c).clone() })
            }
            c => Err(mismatch(name, c)),
        },
        RuleApp::Assume => match &p.prog {
            Stmt::Test(b) => {
                side(high, name, &p.states, |s| sp.eval_bool(s, b) == Some(true))?;
                Ok(ExecPred { states: p.states.clone(), prog: Stmt::Skip })
            }
            c => Err(mismatch(name, c)),
        },
        RuleApp::WhileEnd => match &p.prog {
            Stmt::While(b, _) => {
                side(high, name, &p.states, |s| sp.eval_bool(s, b) == Some(false))?;
                Ok(ExecPred { states: p.states.clone(), prog: Stmt::Skip })
            }
            c => Err(mismatch(name, c)),
        },
        RuleApp::WhileUnroll => match &p.prog {
            Stmt::While(b, body) => {
                side(high, name, &p.states, |s| sp.eval_bool(s, b) == Some(true))?;
                Ok(ExecPred { states: p.states.clone(), prog: Stmt::seq((**body).clone(), p.prog.clone()) })
            }
            c => Err(mismatch(name, c)),
        },
        RuleApp::AssertStep => match &p.prog {
            Stmt::Assert(b) => {
                let mut states = p.states.clone();
                states.intersect_with(&sp.extension(b));
                Ok(ExecPred { states, prog: Stmt::Skip })
            }
            c => Err(mismatch(name, c)),
        },
        RuleApp::SeqStep(chain) => {
            let (head, rest) = match p.prog.split_head() {
                (h, Some(r)) => (h, r),
                _ => return Err(mismatch(name, &p.prog)),
            };
            let done = apply_chain(high, &ExecPred { states: p.states.clone(), prog: head }, chain)?;
            if done.prog != Stmt::Skip {
                return Err(RuleError::ChainDoesNotFinish(done.prog.to_string()));
            }
            Ok(ExecPred { states: done.states, prog: rest })
        }
        RuleApp::Pure { replacement, cert } => {
            let (head, rest) = p.prog.split_head();
            match cert {
                PureCert::Semantic => {
                    side(high, name, &p.states, |s| high.config_refines(s, &head, s, replacement))?;
                }
                PureCert::Chain(chain) => {
                    let got = apply_chain(high, &ExecPred { states: p.states.clone(), prog: head }, chain)?;
                    if &got.prog != replacement {
                        return Err(RuleError::PureMismatch { want: replacement.to_string(), got: got.prog.to_string() });
                    }
                    if !got.states.is_subset(&p.states) {
                        return Err(RuleError::PureGrows);
                    }
                }
            }
            Ok(ExecPred { states: p.states.clone(), prog: then(replacement.clone(), rest) })
        }
        RuleApp::Focus { post } => {
            let (head, rest) = p.prog.split_head();
            angelic_valid(high, &p.states, &head, post)
                .map_err(|s| RuleError::SideConditionFails { rule: name, state: sp.show_state(s) })?;
            Ok(ExecPred { states: post.clone(), prog: rest.unwrap_or(Stmt::Skip) })
        }
    }
}

pub fn apply_chain(high: &Semantics, p: &ExecPred, chain: &[RuleApp]) -> Result<ExecPred, RuleError> {
    let mut cur = p.clone();
    for r in chain {
        cur = apply_rule(high, &cur, r)?;
    }
    Ok(cur)
}

/// Applies a rule, lifting it to the head of a sequence when it does not
/// match the whole program. A lifted rule that ends in `skip` becomes a
/// [`RuleApp::SeqStep`]; one that keeps the state set becomes a
/// [`RuleApp::Pure`] step certified by the rule. Returns the rule actually used.
pub fn apply_lifted(high: &Semantics, p: &ExecPred, r: &RuleApp) -> Result<(ExecPred, RuleApp), RuleError> {
    let direct = apply_rule(high, p, r);
    let lifted_ok = matches!(direct, Err(RuleError::HeadMismatch { .. }))
        && matches!(p.prog, Stmt::Seq(..))
        && !matches!(r, RuleApp::SeqStep(_) | RuleApp::Pure { .. } | RuleApp::Focus { .. });
    if !lifted_ok {
        return direct.map(|q| (q, r.clone()));
    }
    let (head, _) = p.prog.split_head();
    let inner = apply_rule(high, &ExecPred { states: p.states.clone(), prog: head }, r)?;
    let used = if inner.prog == Stmt::Skip {
        RuleApp::SeqStep(vec![r.clone()])
    } else if inner.states == p.states {
        RuleApp::Pure { replacement: inner.prog, cert: PureCert::Chain(vec![r.clone()]) }
    } else {
        return direct.map(|q| (q, r.clone()));
    };
    let q = apply_rule(high, p, &used)?;
    Ok((q, used))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assertions::all_subsets;
    use crate::lang::{parse_stmt, BoolExpr, Expr};
    use crate::semantics::StateSpace;

    fn sem() -> Semantics {
        let vars = vec![("s".to_string(), Sort::set_over(0..2)), ("j".to_string(), Sort::int(0, 2))];
        Semantics::new(StateSpace::new(&vars, &[]).unwrap())
    }

    fn pred(h: &Semantics, b: &str, c: &str) -> ExecPred {
        ExecPred { states: h.space.extension(&crate::lang::parse_bool(b).unwrap()), prog: parse_stmt(c).unwrap() }
    }

    fn sound(h: &Semantics, p: &ExecPred, q: &ExecPred) -> bool {
        all_subsets(h.space.len(), 16).unwrap().all(|x| !exec_holds(h, p, &x) || exec_holds(h, q, &x))
    }

    #[test]
    fn assignment_image_through_sequence() {
        let h = sem();
        let p = pred(&h, "true", "s := {}; s := s ∪ {1}");
        let (q, used) = apply_lifted(&h, &p, &RuleApp::Assign).unwrap();
        assert_eq!(used, RuleApp::SeqStep(vec![RuleApp::Assign]));
        assert_eq!(q, pred(&h, "s == {}", "s := s ∪ {1}"));
        assert!(sound(&h, &p, &q));
    }

    #[test]
    fn nondet_side_condition() {
        let h = sem();
        let p = pred(&h, "s == {}", "j := nondet(0, 1)");
        let q = apply_rule(&h, &p, &RuleApp::Nondet(Value::Int(1))).unwrap();
        assert_eq!(q, pred(&h, "s == {} && j == 1", "skip"));
        assert!(sound(&h, &p, &q));
        assert!(matches!(
            apply_rule(&h, &p, &RuleApp::Nondet(Value::Int(2))),
            Err(RuleError::SideConditionFails { .. })
        ));
        assert!(matches!(
            apply_rule(&h, &p, &RuleApp::Nondet(Value::Int(7))),
            Err(RuleError::NondetOutOfRange { .. })
        ));
    }

    #[test]
    fn loop_rules() {
        let h = sem();
        let p = pred(&h, "j == 1", "while (j < 2) { j := j + 1 }");
        let q = apply_rule(&h, &p, &RuleApp::WhileUnroll).unwrap();
        assert!(matches!(q.prog, Stmt::Seq(..)));
        assert!(sound(&h, &p, &q));
        assert!(apply_rule(&h, &p, &RuleApp::WhileEnd).is_err());
        let q = apply_chain(&h, &q, &[RuleApp::SeqStep(vec![RuleApp::Assign]), RuleApp::WhileEnd]).unwrap();
        assert_eq!(q, pred(&h, "j == 2", "skip"));
    }

    #[test]
    fn assert_strengthens() {
        let h = sem();
        let p = pred(&h, "true", "assert(j < 1)");
        let q = apply_rule(&h, &p, &RuleApp::AssertStep).unwrap();
        assert_eq!(q.states, h.space.extension(&BoolExpr::lt(Expr::var("j"), Expr::int(1))));
        assert!(sound(&h, &p, &q));
    }

    #[test]
    fn focus_and_pure() {
        let h = sem();
        let p = pred(&h, "j == 0", "j := nondet(0, 2); assume(j == 2)");
        let post = pred(&h, "j == 2", "skip").states;
        let q = apply_rule(&h, &p, &RuleApp::Focus { post: post.clone() }).unwrap();
        assert_eq!(q.prog, parse_stmt("assume(j == 2)").unwrap());
        assert!(sound(&h, &p, &q));
        let r = RuleApp::Pure { replacement: parse_stmt("j := 2").unwrap(), cert: PureCert::Semantic };
        let q = apply_rule(&h, &p, &r).unwrap();
        assert!(sound(&h, &p, &q));
        let bad = RuleApp::Pure { replacement: parse_stmt("j := 3").unwrap(), cert: PureCert::Semantic };
        assert!(apply_rule(&h, &p, &bad).is_err());
    }

    #[test]
    fn choice_lifts_as_pure() {
        let h = sem();
        let p = pred(&h, "true", "choice(j := 1, j := 2); skip");
        let (q, used) = apply_lifted(&h, &p, &RuleApp::ChoiceR).unwrap();
        assert!(matches!(used, RuleApp::Pure { .. }));
        assert_eq!(q.prog, parse_stmt("j := 2; skip").unwrap());
        assert!(sound(&h, &p, &q));
    }
}
