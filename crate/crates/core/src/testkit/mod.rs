//! Seeded generators for programs, assertions, configurations and triples
//! over tiny state spaces, and the property suites built on them.
//!
//! Every generator draws from a single ChaCha8 stream, so the same seed and
//! configuration always yield the same artifacts.

mod examples;
mod props;

pub use examples::bitmask_vertical;
pub use props::{case_seed, run_property, FuzzCase, FuzzOptions, FuzzSummary, Property};

use crate::assertions::{Assertion, ProgTable};
use crate::execpred::{ExecPred, PureCert, RuleApp, RuleKind};
use crate::lang::{BoolExpr, Expr, Header, Sort, Stmt, Value};
use crate::semantics::{Semantics, StateSpace};
use crate::triples::{parse_triple_file, TripleFile};
use crate::StateSet;
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write;

/// Relative frequencies of statement constructors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights {
    pub skip: u32,
    pub assign: u32,
    pub nondet: u32,
    pub assume: u32,
    pub assert: u32,
    pub choice: u32,
    pub seq: u32,
    pub while_: u32,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { skip: 1, assign: 6, nondet: 3, assume: 2, assert: 1, choice: 3, seq: 4, while_: 2 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub max_depth: usize,
    pub max_vars: usize,
    /// Bound on the size of each generated state space.
    pub max_states: usize,
    /// Sorts variables are drawn from. Integer and set sorts only.
    pub sorts: Vec<Sort>,
    pub weights: Weights,
    /// Allow `assert` inside loop bodies.
    pub assert_in_while: bool,
    /// Fraction of generated triples whose low program is mutated.
    pub perturb: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_depth: 3,
            max_vars: 2,
            max_states: 12,
            sorts: vec![Sort::int(0, 1), Sort::int(0, 2), Sort::int(0, 3), Sort::set_over(0..2)],
            weights: Weights::default(),
            assert_in_while: false,
            perturb: 0.25,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_vars == 0 {
            return Err("max_vars must be at least 1".into());
        }
        let fits: Vec<&Sort> = self.sorts.iter().filter(|s| s.cardinality() as usize <= self.max_states).collect();
        if fits.is_empty() {
            return Err(format!("no sort fits in {} states", self.max_states));
        }
        if self.sorts.iter().any(|s| matches!(s, Sort::ArrayOf(..))) {
            return Err("array sorts are not generated".into());
        }
        if !(0.0..=1.0).contains(&self.perturb) {
            return Err("perturb must lie in [0, 1]".into());
        }
        Ok(())
    }
}

pub type Vars = Vec<(String, Sort)>;

/// A generated relational triple with the source text it was parsed from.
pub struct GeneratedTriple {
    pub text: String,
    pub file: TripleFile,
    pub perturbed: bool,
}

/// A pair of high configurations over one space.
pub struct ConfigPair {
    pub sem: Semantics,
    pub s1: usize,
    pub c1: Stmt,
    pub s2: usize,
    pub c2: Stmt,
}

/// An `Exec` predicate and a rule aimed at its head.
pub struct ExecCase {
    pub sem: Semantics,
    pub pred: ExecPred,
    pub rule: RuleApp,
    pub kind: RuleKind,
}

pub struct Gen {
    cfg: GenConfig,
    rng: ChaCha8Rng,
}

fn int_bounds(s: &Sort) -> Option<(i64, i64)> {
    match s {
        Sort::IntRange(lo, hi) => Some((*lo, *hi)),
        _ => None,
    }
}

impl Gen {
    pub fn new(cfg: GenConfig) -> Gen {
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Gen { cfg, rng }
    }

    pub fn config(&self) -> &GenConfig {
        &self.cfg
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// Between one and `max_vars` sorts whose product stays within `max_states`.
    pub fn sorts(&mut self, max_states: usize) -> Vec<Sort> {
        let pool: Vec<Sort> =
            self.cfg.sorts.iter().filter(|s| s.cardinality() as usize <= max_states).cloned().collect();
        assert!(!pool.is_empty(), "no sort fits in {max_states} states");
        let want = self.rng.gen_range(1..=self.cfg.max_vars);
        let mut out = Vec::new();
        let mut size = 1usize;
        for _ in 0..want {
            let fits: Vec<&Sort> = pool.iter().filter(|s| size * s.cardinality() as usize <= max_states).collect();
            match fits.choose(&mut self.rng) {
                Some(s) => {
                    size *= s.cardinality() as usize;
                    out.push((*s).clone());
                }
                None => break,
            }
        }
        out
    }

    pub fn vars(&mut self, prefix: &str, max_states: usize) -> Vars {
        self.sorts(max_states).into_iter().enumerate().map(|(i, s)| (format!("{prefix}{i}"), s)).collect()
    }

    fn lit_for(&mut self, vars: &Vars) -> i64 {
        let bounds: Vec<(i64, i64)> = vars.iter().filter_map(|(_, s)| int_bounds(s)).collect();
        match bounds.choose(&mut self.rng) {
            Some((lo, hi)) => self.rng.gen_range(*lo..=*hi),
            None => self.rng.gen_range(0..=2),
        }
    }

    pub fn int_expr(&mut self, vars: &Vars, depth: usize) -> Expr {
        let ints: Vec<&String> = vars.iter().filter(|(_, s)| int_bounds(s).is_some()).map(|(n, _)| n).collect();
        let sets: Vec<&String> = vars.iter().filter(|(_, s)| matches!(s, Sort::SetOver(_))).map(|(n, _)| n).collect();
        if depth > 0 && self.chance(0.3) {
            return match self.rng.gen_range(0..3) {
                0 => Expr::add(self.int_expr(vars, depth - 1), Expr::int(1)),
                1 => Expr::sub(self.int_expr(vars, depth - 1), Expr::int(1)),
                _ => match sets.choose(&mut self.rng) {
                    Some(s) => Expr::Sum2(Box::new(Expr::var(s))),
                    None => Expr::add(self.int_expr(vars, depth - 1), self.int_expr(vars, depth - 1)),
                },
            };
        }
        if !ints.is_empty() && self.chance(0.6) {
            Expr::var(ints.choose(&mut self.rng).unwrap())
        } else {
            Expr::int(self.lit_for(vars))
        }
    }

    fn elem(&mut self, universe: &[i64], vars: &Vars) -> Expr {
        if self.chance(0.7) {
            Expr::int(*universe.choose(&mut self.rng).unwrap_or(&0))
        } else {
            self.int_expr(vars, 0)
        }
    }

    /// A set expression over the universe of `sort`.
    pub fn set_expr(&mut self, sort: &Sort, vars: &Vars, depth: usize) -> Expr {
        let universe = match sort {
            Sort::SetOver(u) => u.clone(),
            _ => vec![0],
        };
        let same: Vec<&String> = vars.iter().filter(|(_, s)| s == sort).map(|(n, _)| n).collect();
        match self.rng.gen_range(0..4) {
            0 => Expr::SetLit(vec![]),
            1 if universe.len() >= 2 => {
                let a = self.elem(&universe, vars);
                let b = self.elem(&universe, vars);
                Expr::SetLit(vec![a, b])
            }
            2 if depth > 0 => {
                let a = self.set_expr(sort, vars, depth - 1);
                Expr::union(a, Expr::singleton(self.elem(&universe, vars)))
            }
            _ => match same.choose(&mut self.rng) {
                Some(s) => Expr::var(s),
                None => Expr::singleton(self.elem(&universe, vars)),
            },
        }
    }

    pub fn bool_expr(&mut self, vars: &Vars, depth: usize) -> BoolExpr {
        if depth > 0 && self.chance(0.25) {
            return match self.rng.gen_range(0..3) {
                0 => BoolExpr::not(self.bool_expr(vars, depth - 1)),
                1 => BoolExpr::and(self.bool_expr(vars, depth - 1), self.bool_expr(vars, depth - 1)),
                _ => BoolExpr::or(self.bool_expr(vars, depth - 1), self.bool_expr(vars, depth - 1)),
            };
        }
        let sets: Vec<&String> = vars.iter().filter(|(_, s)| matches!(s, Sort::SetOver(_))).map(|(n, _)| n).collect();
        match self.rng.gen_range(0..10) {
            0 => BoolExpr::True,
            1 if !sets.is_empty() => {
                let s = Expr::var(sets.choose(&mut self.rng).unwrap());
                BoolExpr::member(self.int_expr(vars, 0), s)
            }
            2..=4 => BoolExpr::eq(self.int_expr(vars, 1), self.int_expr(vars, 0)),
            5 | 6 => BoolExpr::le(self.int_expr(vars, 1), self.int_expr(vars, 0)),
            _ => BoolExpr::lt(self.int_expr(vars, 1), self.int_expr(vars, 0)),
        }
    }

    fn assign(&mut self, vars: &Vars) -> Stmt {
        let (x, s) = vars.choose(&mut self.rng).expect("at least one variable").clone();
        let e = match &s {
            Sort::SetOver(_) => self.set_expr(&s, vars, 1),
            _ => self.int_expr(vars, 1),
        };
        Stmt::Assign(x, e)
    }

    fn nondet(&mut self, vars: &Vars) -> Option<Stmt> {
        let ints: Vec<(String, (i64, i64))> =
            vars.iter().filter_map(|(n, s)| int_bounds(s).map(|b| (n.clone(), b))).collect();
        let (x, (lo, hi)) = ints.choose(&mut self.rng)?.clone();
        let a = if self.chance(0.9) { self.rng.gen_range(lo..=hi) } else { hi };
        let b = a + self.rng.gen_range(0..=2);
        Some(Stmt::nondet(&x, Expr::int(a), Expr::int(b)))
    }

    /// A statement without control flow.
    pub fn basic_stmt(&mut self, vars: &Vars, allow_assert: bool) -> Stmt {
        let w = self.cfg.weights.clone();
        let table = [w.skip, w.assign, w.nondet, w.assume, if allow_assert { w.assert } else { 0 }];
        let k = WeightedIndex::new(table).map(|d| d.sample(&mut self.rng)).unwrap_or(1);
        match k {
            0 => Stmt::Skip,
            1 => self.assign(vars),
            2 => self.nondet(vars).unwrap_or_else(|| self.assign(vars)),
            3 => Stmt::Test(self.bool_expr(vars, 1)),
            _ => Stmt::Assert(self.bool_expr(vars, 1)),
        }
    }

    /// `while (k < hi) { body; k := k + 1 }` over an integer counter the body
    /// leaves alone, so every run is bounded.
    pub fn while_stmt(&mut self, vars: &Vars, depth: usize) -> Option<Stmt> {
        let ints: Vec<(String, (i64, i64))> =
            vars.iter().filter_map(|(n, s)| int_bounds(s).map(|b| (n.clone(), b))).collect();
        let (k, (_, hi)) = ints.choose(&mut self.rng)?.clone();
        let mut guard = BoolExpr::lt(Expr::var(&k), Expr::int(hi));
        let rest: Vars = vars.iter().filter(|(n, _)| *n != k).cloned().collect();
        if !rest.is_empty() && self.chance(0.3) {
            guard = BoolExpr::and(guard, self.bool_expr(&rest, 0));
        }
        let step = Stmt::assign(&k, Expr::add(Expr::var(&k), Expr::int(1)));
        let body = if rest.is_empty() || depth == 0 {
            step
        } else {
            let allow = self.cfg.assert_in_while;
            Stmt::seq(self.stmt_in(&rest, depth, allow), step)
        };
        Some(Stmt::while_(guard, body))
    }

    fn stmt_in(&mut self, vars: &Vars, depth: usize, allow_assert: bool) -> Stmt {
        if depth == 0 {
            return Stmt::Skip;
        }
        if depth == 1 {
            return self.basic_stmt(vars, allow_assert);
        }
        let w = self.cfg.weights.clone();
        let basic = w.skip + w.assign + w.nondet + w.assume + if allow_assert { w.assert } else { 0 };
        let k = WeightedIndex::new([basic, w.choice, w.seq, w.while_]).map(|d| d.sample(&mut self.rng)).unwrap_or(0);
        match k {
            0 => self.basic_stmt(vars, allow_assert),
            1 => Stmt::choice(self.stmt_in(vars, depth - 1, allow_assert), self.stmt_in(vars, depth - 1, allow_assert)),
            2 => Stmt::seq(self.stmt_in(vars, depth - 1, allow_assert), self.stmt_in(vars, depth - 1, allow_assert)),
            _ => match self.while_stmt(vars, depth - 1) {
                Some(s) => s,
                None => Stmt::seq(self.basic_stmt(vars, allow_assert), self.basic_stmt(vars, allow_assert)),
            },
        }
    }

    /// A statement of depth at most `depth`; depth 0 is `skip`.
    pub fn stmt(&mut self, vars: &Vars, depth: usize) -> Stmt {
        self.stmt_in(vars, depth, true)
    }

    /// A random subset of `0..n`.
    pub fn subset(&mut self, n: usize, p: f64) -> StateSet {
        let mut s = StateSet::with_capacity(n);
        for i in 0..n {
            if self.rng.gen_bool(p) {
                s.insert(i);
            }
        }
        s
    }

    /// Replaces one basic statement of `c` by a fresh one.
    pub fn mutate(&mut self, c: &Stmt, vars: &Vars) -> Stmt {
        let n = count_leaves(c);
        let target = self.rng.gen_range(0..n);
        let fresh = self.basic_stmt(vars, true);
        replace_leaf(c, &mut (target as isize), &fresh)
    }

    /// A relational triple in decomposed form. Unperturbed instances mirror the
    /// high program on the low side, so linked pre/postconditions tend to hold.
    pub fn rel_triple(&mut self) -> GeneratedTriple {
        let sorts = self.sorts(self.cfg.max_states);
        let low: Vars = sorts.iter().enumerate().map(|(i, s)| (format!("x{i}"), s.clone())).collect();
        let high: Vars = sorts.iter().enumerate().map(|(i, s)| (format!("h{i}"), s.clone())).collect();
        let depth = self.cfg.max_depth;
        let ch = self.stmt(&high, depth);
        let mut cl = if self.chance(0.8) {
            rename_stmt(&ch, &|x| x.replacen('h', "x", 1))
        } else {
            self.stmt(&low, depth)
        };
        let perturbed = self.chance(self.cfg.perturb);
        if perturbed {
            cl = self.mutate(&cl, &low);
        }
        let linked = |binder: &str, upto: usize| {
            let mut parts = Vec::new();
            for (i, s) in sorts.iter().enumerate().take(upto) {
                let v = Expr::var(&format!("{binder}{i}"));
                parts.push((format!("{binder}{i}"), s.clone(), v));
            }
            parts
        };
        let link_assertion = |parts: &[(String, Sort, Expr)], prog: Stmt| {
            let mut conj = Vec::new();
            for (i, (_, _, v)) in parts.iter().enumerate() {
                conj.push(Assertion::Pred(BoolExpr::eq(Expr::var(&low[i].0), v.clone())));
                conj.push(Assertion::Pred(BoolExpr::eq(Expr::var(&high[i].0), v.clone())));
            }
            conj.push(Assertion::Prog(prog));
            let mut a = Assertion::and_all(conj);
            for (n, s, _) in parts.iter().rev() {
                a = Assertion::exists(n, s.clone(), a);
            }
            a
        };
        let pre = match self.rng.gen_range(0..20) {
            0 => Assertion::and(Assertion::Pred(BoolExpr::False), Assertion::Prog(ch.clone())),
            1..=5 => Assertion::and_all(vec![
                Assertion::Pred(self.bool_expr(&low, 1)),
                Assertion::Pred(self.bool_expr(&high, 1)),
                Assertion::Prog(ch.clone()),
            ]),
            _ => link_assertion(&linked("v", sorts.len()), ch.clone()),
        };
        let post = match self.rng.gen_range(0..20) {
            0..=9 => link_assertion(&linked("w", sorts.len()), Stmt::Skip),
            10..=13 => link_assertion(&linked("w", 1), Stmt::Skip),
            14..=16 => Assertion::and(Assertion::Pred(self.bool_expr(&low, 0)), Assertion::Prog(ch.clone())),
            _ => Assertion::or(link_assertion(&linked("w", sorts.len()), Stmt::Skip), Assertion::Prog(ch.clone())),
        };
        let mut text = String::new();
        let header = Header { low_vars: low.clone(), high_vars: high.clone(), ..Header::default() };
        text.push_str(&render_header(&header));
        let _ = writeln!(text, "pre: {pre}");
        let _ = writeln!(text, "low {{ {cl} }}");
        let _ = writeln!(text, "post: {post}");
        let file = parse_triple_file(&text).unwrap_or_else(|e| panic!("generated triple does not parse: {e}\n{text}"));
        GeneratedTriple { text, file, perturbed }
    }

    fn semantics(&mut self, prefix: &str, max_states: usize) -> (Vars, Semantics) {
        let vars = self.vars(prefix, max_states);
        let sem = Semantics::new(StateSpace::new(&vars, &[]).expect("small space"));
        (vars, sem)
    }

    /// Two configurations over one space. Most pairs are related by taking
    /// a step or a branch, so refinement holds often enough to exercise both
    /// directions.
    pub fn config_pair(&mut self) -> ConfigPair {
        let (vars, sem) = self.semantics("h", self.cfg.max_states);
        let n = sem.space.len();
        let depth = self.cfg.max_depth;
        let c1 = self.stmt(&vars, depth);
        let s1 = self.rng.gen_range(0..n);
        let (s2, c2) = match self.rng.gen_range(0..10) {
            0..=2 => (s1, c1.clone()),
            3..=5 => {
                let (head, rest) = c1.split_head();
                let succ: Vec<usize> = sem.denote(&head).nrm[s1].ones().collect();
                match (succ.choose(&mut self.rng), rest) {
                    (Some(s), Some(r)) => (*s, r),
                    (Some(s), None) => (*s, Stmt::Skip),
                    _ => (s1, c1.clone()),
                }
            }
            6 | 7 => match &c1 {
                Stmt::Choice(a, b) => (s1, if self.chance(0.5) { (**a).clone() } else { (**b).clone() }),
                _ => (s1, self.mutate(&c1, &vars)),
            },
            _ => (self.rng.gen_range(0..n), self.stmt(&vars, depth)),
        };
        ConfigPair { sem, s1, c1, s2, c2 }
    }

    fn states_where(&mut self, sem: &Semantics, keep: &StateSet) -> StateSet {
        let mut s = self.subset(sem.space.len(), 0.5);
        if self.chance(0.7) {
            s.intersect_with(keep);
        }
        s
    }

    /// A predicate whose program starts with a statement shaped for `kind`,
    /// and a rule of that kind.
    pub fn exec_case(&mut self, kind: RuleKind) -> ExecCase {
        let (vars, sem) = self.semantics("h", self.cfg.max_states);
        let n = sem.space.len();
        let full = sem.space.full_set();
        let d = self.cfg.max_depth.max(2);
        let (head, states, rule) = match kind {
            RuleKind::Assign => (self.assign(&vars), self.subset(n, 0.5), RuleApp::Assign),
            RuleKind::Nondet => match self.nondet(&vars) {
                Some(Stmt::NondetAssign(x, lo, hi)) => {
                    let (a, b) = match (&lo, &hi) {
                        (Expr::IntLit(a), Expr::IntLit(b)) => (*a, *b),
                        _ => unreachable!(),
                    };
                    let v = if self.chance(0.8) { self.rng.gen_range(a..=b) } else { self.rng.gen_range(a - 1..=b + 1) };
                    let head = Stmt::NondetAssign(x, lo, hi);
                    (head, self.subset(n, 0.5), RuleApp::Nondet(Value::Int(v)))
                }
                _ => (self.assign(&vars), self.subset(n, 0.5), RuleApp::Assign),
            },
            RuleKind::ChoiceL | RuleKind::ChoiceR => {
                let c = Stmt::choice(self.stmt(&vars, d - 1), self.stmt(&vars, d - 1));
                let r = if kind == RuleKind::ChoiceL { RuleApp::ChoiceL } else { RuleApp::ChoiceR };
                (c, self.subset(n, 0.5), r)
            }
            RuleKind::Assume => {
                let b = self.bool_expr(&vars, 1);
                let keep = sem.space.extension(&b);
                (Stmt::Test(b), self.states_where(&sem, &keep), RuleApp::Assume)
            }
            RuleKind::Assert => (Stmt::Assert(self.bool_expr(&vars, 1)), self.subset(n, 0.5), RuleApp::AssertStep),
            RuleKind::WhileEnd | RuleKind::WhileUnroll => {
                let w = self.while_stmt(&vars, d - 1).unwrap_or_else(|| {
                    Stmt::while_(self.bool_expr(&vars, 0), self.basic_stmt(&vars, false))
                });
                let b = match &w {
                    Stmt::While(b, _) => b.clone(),
                    _ => unreachable!(),
                };
                let mut keep = sem.space.extension(&b);
                let rule = if kind == RuleKind::WhileEnd {
                    keep.toggle_range(..);
                    RuleApp::WhileEnd
                } else {
                    RuleApp::WhileUnroll
                };
                (w.clone(), self.states_where(&sem, &keep), rule)
            }
            RuleKind::Pure => {
                let a = self.stmt(&vars, d - 1);
                let b = self.stmt(&vars, d - 1);
                let head = Stmt::choice(a.clone(), b.clone());
                let rule = match self.rng.gen_range(0..4) {
                    0 => RuleApp::Pure { replacement: a, cert: PureCert::Semantic },
                    1 => RuleApp::Pure { replacement: b, cert: PureCert::Chain(vec![RuleApp::ChoiceR]) },
                    2 => RuleApp::Pure { replacement: self.stmt(&vars, d - 1), cert: PureCert::Semantic },
                    _ => RuleApp::Pure { replacement: head.clone(), cert: PureCert::Semantic },
                };
                (head, self.subset(n, 0.5), rule)
            }
            RuleKind::Seq => {
                let head = self.basic_stmt(&vars, true);
                let chain = match &head {
                    Stmt::Skip => vec![],
                    Stmt::Assign(..) => vec![RuleApp::Assign],
                    Stmt::NondetAssign(_, Expr::IntLit(a), _) => vec![RuleApp::Nondet(Value::Int(*a))],
                    Stmt::Test(_) => vec![RuleApp::Assume],
                    _ => vec![RuleApp::AssertStep],
                };
                let keep = match &head {
                    Stmt::Test(b) => sem.space.extension(b),
                    _ => full.clone(),
                };
                let rest = self.stmt(&vars, d - 1);
                let states = self.states_where(&sem, &keep);
                return ExecCase { sem, pred: ExecPred { states, prog: Stmt::seq(head, rest) }, rule: RuleApp::SeqStep(chain), kind };
            }
            RuleKind::Focus => {
                let prog = self.stmt(&vars, d);
                let prog = if self.chance(0.5) { Stmt::seq(prog, self.stmt(&vars, 1)) } else { prog };
                let den = sem.denote(&prog.split_head().0);
                let mut states = self.subset(n, 0.4);
                if self.chance(0.7) {
                    for s in 0..n {
                        if den.nrm[s].is_clear() {
                            states.set(s, false);
                        }
                    }
                }
                let image = den.image(&states);
                let post = match self.rng.gen_range(0..4) {
                    0 | 1 => image,
                    2 => self.subset(n, 0.5),
                    _ => {
                        let mut p = self.subset(n, 0.6);
                        p.intersect_with(&image);
                        p
                    }
                };
                return ExecCase { sem, pred: ExecPred { states, prog }, rule: RuleApp::Focus { post }, kind };
            }
        };
        let prog = if self.chance(0.5) { Stmt::seq(head, self.stmt(&vars, 1)) } else { head };
        ExecCase { sem, pred: ExecPred { states, prog }, rule, kind }
    }

    /// One decomposed disjunct `∃a. B(a) ∧ ⌊L(a)⌋ ∧ ⌈H(a)⌉ ∧ ⌜c⌝`, returned
    /// without its binder so that callers can instantiate `a`.
    pub fn decomposed_body(&mut self, low: &Vars, high: &Vars, binder: &(String, Sort)) -> (BoolExpr, BoolExpr, BoolExpr, Stmt) {
        let with = |vs: &Vars| {
            let mut v = vs.clone();
            v.push(binder.clone());
            v
        };
        let only = vec![binder.clone()];
        let pure = self.bool_expr(&only, 0);
        let lp = self.bool_expr(&with(low), 1);
        let hp = self.bool_expr(&with(high), 1);
        let c = self.stmt(high, 2);
        (pure, lp, hp, c)
    }
}

fn count_leaves(c: &Stmt) -> usize {
    match c {
        Stmt::Seq(a, b) | Stmt::Choice(a, b) => count_leaves(a) + count_leaves(b),
        Stmt::While(_, b) => count_leaves(b),
        _ => 1,
    }
}

fn replace_leaf(c: &Stmt, k: &mut isize, fresh: &Stmt) -> Stmt {
    match c {
        Stmt::Seq(a, b) => {
            let a = replace_leaf(a, k, fresh);
            Stmt::seq(a, replace_leaf(b, k, fresh))
        }
        Stmt::Choice(a, b) => {
            let a = replace_leaf(a, k, fresh);
            Stmt::choice(a, replace_leaf(b, k, fresh))
        }
        Stmt::While(g, b) => Stmt::while_(g.clone(), replace_leaf(b, k, fresh)),
        _ => {
            *k -= 1;
            if *k == -1 {
                fresh.clone()
            } else {
                c.clone()
            }
        }
    }
}

/// Renames every program variable of a statement.
pub fn rename_stmt(c: &Stmt, f: &dyn Fn(&str) -> String) -> Stmt {
    let e = |x: &Expr| x.subst(&|v| Some(Expr::Var(f(v))));
    let b = |x: &BoolExpr| x.subst(&|v| Some(Expr::Var(f(v))));
    match c {
        Stmt::Skip => Stmt::Skip,
        Stmt::Assign(x, v) => Stmt::Assign(f(x), e(v)),
        Stmt::NondetAssign(x, lo, hi) => Stmt::NondetAssign(f(x), e(lo), e(hi)),
        Stmt::Test(g) => Stmt::Test(b(g)),
        Stmt::Assert(g) => Stmt::Assert(b(g)),
        Stmt::Choice(x, y) => Stmt::choice(rename_stmt(x, f), rename_stmt(y, f)),
        Stmt::Seq(x, y) => Stmt::seq(rename_stmt(x, f), rename_stmt(y, f)),
        Stmt::While(g, x) => Stmt::while_(b(g), rename_stmt(x, f)),
    }
}

/// Replaces a logical variable by a value in the predicates of an assertion.
pub fn subst_assertion(a: &Assertion, x: &str, v: &Expr) -> Assertion {
    let s = |p: &BoolExpr| p.subst(&|n| (n == x).then(|| v.clone()));
    match a {
        Assertion::Pred(p) => Assertion::Pred(s(p)),
        Assertion::And(l, r) => Assertion::and(subst_assertion(l, x, v), subst_assertion(r, x, v)),
        Assertion::Or(l, r) => Assertion::or(subst_assertion(l, x, v), subst_assertion(r, x, v)),
        Assertion::Exists(y, _, _) if y == x => a.clone(),
        Assertion::Exists(y, sort, body) => Assertion::exists(y, sort.clone(), subst_assertion(body, x, v)),
        Assertion::Exec(p, c) => Assertion::exec(subst_assertion(p, x, v), c.clone()),
        Assertion::Prog(_) => a.clone(),
    }
}

/// `skip` and every subterm of the given programs.
pub fn universe_of(progs: &[&Stmt]) -> ProgTable {
    let mut t = ProgTable::default();
    t.intern(&Stmt::Skip);
    for c in progs {
        for s in c.subterms() {
            t.intern(&s);
        }
    }
    t
}

/// Declarations in concrete syntax, one per line.
pub fn render_header(h: &Header) -> String {
    let mut out = String::new();
    for (scope, vars) in [("var", &h.vars), ("low var", &h.low_vars), ("high var", &h.high_vars)] {
        for (x, s) in vars.iter() {
            let _ = writeln!(out, "{scope} {x} : {s};");
        }
    }
    for k in &h.consts {
        let _ = writeln!(out, "const {} : {} = {};", k.name, k.sort, k.value);
    }
    for (name, body) in &h.programs {
        let _ = writeln!(out, "program {name} {{ {body} }}");
    }
    out
}

/// `gen_stmt` over a fresh space drawn from the configuration.
pub fn gen_stmt(cfg: &GenConfig) -> (Vars, Stmt) {
    let mut g = Gen::new(cfg.clone());
    let vars = g.vars("x", cfg.max_states);
    let c = g.stmt(&vars, cfg.max_depth);
    (vars, c)
}

pub fn gen_rel_triple(cfg: &GenConfig) -> GeneratedTriple {
    Gen::new(cfg.clone()).rel_triple()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_stmt, Checker};
    use crate::triples::rel_valid;

    fn check(vars: &Vars, c: &Stmt) -> bool {
        let mut ch = Checker::new();
        for (x, s) in vars {
            ch.declare_var(x, s).unwrap();
        }
        ch.check_stmt(c).is_ok()
    }

    #[test]
    fn depth_zero_is_skip() {
        let cfg = GenConfig { max_depth: 0, ..GenConfig::default() };
        for seed in 0..20 {
            assert_eq!(gen_stmt(&GenConfig { seed, ..cfg.clone() }).1, Stmt::Skip);
        }
    }

    #[test]
    fn generated_statements_sort_check_and_reparse() {
        let cfg = GenConfig::default();
        let mut g = Gen::new(cfg);
        for _ in 0..1000 {
            let vars = g.vars("x", 12);
            let c = g.stmt(&vars, 3);
            assert!(check(&vars, &c), "{c}");
            assert_eq!(parse_stmt(&c.to_string()).unwrap(), c, "{c}");
        }
    }

    #[test]
    fn no_assert_in_loops_by_default() {
        fn loop_has_assert(c: &Stmt, inside: bool) -> bool {
            match c {
                Stmt::Assert(_) => inside,
                Stmt::Seq(a, b) | Stmt::Choice(a, b) => loop_has_assert(a, inside) || loop_has_assert(b, inside),
                Stmt::While(_, b) => loop_has_assert(b, true),
                _ => false,
            }
        }
        let mut g = Gen::new(GenConfig { weights: Weights { assert: 10, while_: 10, ..Weights::default() }, ..GenConfig::default() });
        for _ in 0..300 {
            let vars = g.vars("x", 12);
            assert!(!loop_has_assert(&g.stmt(&vars, 4), false));
        }
    }

    #[test]
    fn same_seed_same_triple() {
        for seed in 0..10 {
            let cfg = GenConfig { seed, ..GenConfig::default() };
            assert_eq!(gen_rel_triple(&cfg).text, gen_rel_triple(&cfg).text);
        }
    }

    #[test]
    fn unperturbed_triples_are_mostly_valid() {
        let mut g = Gen::new(GenConfig { seed: 3, perturb: 0.0, ..GenConfig::default() });
        let total = 200;
        let valid = (0..total)
            .filter(|_| {
                let t = g.rel_triple();
                rel_valid(&t.file.setting, &t.file.triple).unwrap().is_none()
            })
            .count();
        assert!(valid * 2 >= total, "{valid}/{total}");
    }

    #[test]
    fn false_precondition_always_valid() {
        let mut g = Gen::new(GenConfig { seed: 11, ..GenConfig::default() });
        for _ in 0..50 {
            let t = g.rel_triple();
            let f = &t.file;
            let mut tr = f.triple.clone();
            tr.pre = Assertion::Pred(BoolExpr::False);
            assert!(rel_valid(&f.setting, &tr).unwrap().is_none());
        }
    }

    #[test]
    fn mutation_changes_one_leaf() {
        let mut g = Gen::new(GenConfig::default());
        let vars = vec![("x0".to_string(), Sort::int(0, 3))];
        let c = parse_stmt("x0 := 1; choice(x0 := 2, skip)").unwrap();
        for _ in 0..20 {
            let m = g.mutate(&c, &vars);
            assert_eq!(count_leaves(&m), 3);
        }
    }
}
