//! Finite state spaces and the big-step denotation of statements: a normal
//! transition relation `nrm` and a set `err` of states that can go wrong.

use crate::lang::{eval_bool, eval_expr, BoolExpr, Const, Expr, Frame, Frames, Sort, Stmt, Value};
use crate::StateSet;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// Largest state space that will be enumerated.
pub const MAX_STATES: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("state space has {0} states, more than the supported {MAX_STATES}")]
    SpaceTooLarge(u64),
    #[error("{size} states exceed the exhaustive-X cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("variable `{0}` is declared twice")]
    Duplicate(String),
}

/// All states over a list of typed variables, in lexicographic order with the
/// last variable varying fastest.
#[derive(Debug)]
pub struct StateSpace {
    names: Vec<String>,
    sorts: Vec<Sort>,
    strides: Vec<usize>,
    states: Vec<Vec<Value>>,
    const_names: Vec<String>,
    const_values: Vec<Value>,
}

fn value_digit(sort: &Sort, v: &Value) -> Option<usize> {
    match (sort, v) {
        (Sort::IntRange(lo, hi), Value::Int(i)) if lo <= i && i <= hi => Some((i - lo) as usize),
        (Sort::SetOver(u), Value::Set(s)) => {
            let mut mask = 0usize;
            for x in s {
                mask |= 1 << u.binary_search(x).ok()?;
            }
            Some(mask)
        }
        (Sort::ArrayOf(n, e), Value::Array(a)) if a.len() == *n => {
            let (lo, hi) = match **e {
                Sort::IntRange(lo, hi) => (lo, hi),
                _ => return None,
            };
            let base = (hi - lo + 1) as usize;
            let mut d = 0usize;
            for x in a {
                if *x < lo || *x > hi {
                    return None;
                }
                d = d * base + (*x - lo) as usize;
            }
            Some(d)
        }
        _ => None,
    }
}

impl StateSpace {
    pub fn new(vars: &[(String, Sort)], consts: &[Const]) -> Result<StateSpace, SemanticsError> {
        let mut total: u64 = 1;
        for (i, (x, s)) in vars.iter().enumerate() {
            if vars[..i].iter().any(|(y, _)| y == x) || consts.iter().any(|c| &c.name == x) {
                return Err(SemanticsError::Duplicate(x.clone()));
            }
            total = total.saturating_mul(s.cardinality());
            if total > MAX_STATES {
                return Err(SemanticsError::SpaceTooLarge(total));
            }
        }
        let n = vars.len();
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * vars[k + 1].1.cardinality() as usize;
        }
        let mut states: Vec<Vec<Value>> = vec![Vec::new()];
        for (_, s) in vars {
            let vals = s.values();
            let mut next = Vec::with_capacity(states.len() * vals.len());
            for p in &states {
                for v in &vals {
                    let mut q = p.clone();
                    q.push(v.clone());
                    next.push(q);
                }
            }
            states = next;
        }
        Ok(StateSpace {
            names: vars.iter().map(|(x, _)| x.clone()).collect(),
            sorts: vars.iter().map(|(_, s)| s.clone()).collect(),
            strides,
            states,
            const_names: consts.iter().map(|c| c.name.clone()).collect(),
            const_values: consts.iter().map(|c| c.value.clone()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn vars(&self) -> Vec<(String, Sort)> {
        self.names.iter().cloned().zip(self.sorts.iter().cloned()).collect()
    }

    pub fn consts(&self) -> Vec<Const> {
        self.const_names
            .iter()
            .zip(&self.const_values)
            .map(|(n, v)| Const { name: n.clone(), sort: value_sort(v), value: v.clone() })
            .collect()
    }

    pub fn var_index(&self, x: &str) -> Option<usize> {
        self.names.iter().position(|n| n == x)
    }

    pub fn state(&self, idx: usize) -> &[Value] {
        &self.states[idx]
    }

    /// Index of the state with the given values, if they are all in sort.
    pub fn index_of(&self, values: &[Value]) -> Option<usize> {
        if values.len() != self.sorts.len() {
            return None;
        }
        let mut idx = 0;
        for (k, v) in values.iter().enumerate() {
            idx += value_digit(&self.sorts[k], v)? * self.strides[k];
        }
        Some(idx)
    }

    /// Index of `idx` with variable `var` set to `v`, if `v` is in sort.
    pub fn update(&self, idx: usize, var: usize, v: &Value) -> Option<usize> {
        let new = value_digit(&self.sorts[var], v)?;
        let old = value_digit(&self.sorts[var], &self.states[idx][var]).expect("stored value in sort");
        Some(idx - old * self.strides[var] + new * self.strides[var])
    }

    /// Evaluation frames for a state: constants, then variables.
    pub fn frames(&self, idx: usize) -> [Frame<'_>; 2] {
        [
            Frame { names: &self.const_names, values: &self.const_values },
            Frame { names: &self.names, values: &self.states[idx] },
        ]
    }

    /// Frames for the constants only.
    pub fn const_frame(&self) -> Frame<'_> {
        Frame { names: &self.const_names, values: &self.const_values }
    }

    pub fn var_frame(&self, idx: usize) -> Frame<'_> {
        Frame { names: &self.names, values: &self.states[idx] }
    }

    pub fn eval_bool(&self, idx: usize, b: &BoolExpr) -> Option<bool> {
        let fr = self.frames(idx);
        eval_bool(b, &Frames(&fr)).ok()
    }

    pub fn eval_expr(&self, idx: usize, e: &Expr) -> Option<Value> {
        let fr = self.frames(idx);
        eval_expr(e, &Frames(&fr)).ok()
    }

    pub fn show_state(&self, idx: usize) -> String {
        let mut s = String::from("{");
        for (k, (n, v)) in self.names.iter().zip(&self.states[idx]).enumerate() {
            if k > 0 {
                s.push_str(", ");
            }
            let _ = write!(s, "{n}={v}");
        }
        s.push('}');
        s
    }

    pub fn empty_set(&self) -> StateSet {
        StateSet::with_capacity(self.len())
    }

    pub fn full_set(&self) -> StateSet {
        let mut s = self.empty_set();
        s.insert_range(..);
        s
    }

    /// States satisfying `b`; states where `b` faults are excluded.
    pub fn extension(&self, b: &BoolExpr) -> StateSet {
        let mut s = self.empty_set();
        for i in 0..self.len() {
            if self.eval_bool(i, b) == Some(true) {
                s.insert(i);
            }
        }
        s
    }
}

/// The smallest sort containing a value, used for constants.
fn value_sort(v: &Value) -> Sort {
    match v {
        Value::Int(i) => Sort::IntRange(*i, *i),
        Value::Set(s) => Sort::SetOver(s.clone()),
        Value::Array(a) => {
            let lo = a.iter().copied().min().unwrap_or(0);
            let hi = a.iter().copied().max().unwrap_or(0);
            Sort::array(a.len(), Sort::IntRange(lo, hi))
        }
    }
}

/// Normal transitions (successor set per state) and error states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Denotation {
    pub nrm: Vec<StateSet>,
    pub err: StateSet,
}

impl Denotation {
    fn empty(n: usize) -> Denotation {
        Denotation { nrm: vec![StateSet::with_capacity(n); n], err: StateSet::with_capacity(n) }
    }

    fn identity_on(n: usize, keep: impl Fn(usize) -> bool) -> Denotation {
        let mut d = Denotation::empty(n);
        for i in 0..n {
            if keep(i) {
                d.nrm[i].insert(i);
            }
        }
        d
    }

    pub fn terminal(&self, idx: usize) -> &StateSet {
        &self.nrm[idx]
    }

    pub fn errs(&self, idx: usize) -> bool {
        self.err.contains(idx)
    }

    /// `wlp(c, X)`: states that cannot go wrong and only reach `X`.
    pub fn wlp(&self, x: &StateSet) -> StateSet {
        let mut out = StateSet::with_capacity(self.nrm.len());
        for (i, succ) in self.nrm.iter().enumerate() {
            if !self.err.contains(i) && succ.is_subset(x) {
                out.insert(i);
            }
        }
        out
    }

    /// `wlp` with errors ignored.
    pub fn wlp_ignoring_errors(&self, x: &StateSet) -> StateSet {
        let mut out = StateSet::with_capacity(self.nrm.len());
        for (i, succ) in self.nrm.iter().enumerate() {
            if succ.is_subset(x) {
                out.insert(i);
            }
        }
        out
    }

    /// States with at least one successor in `x`.
    pub fn pre_image(&self, x: &StateSet) -> StateSet {
        let mut out = StateSet::with_capacity(self.nrm.len());
        for (i, succ) in self.nrm.iter().enumerate() {
            if !succ.is_disjoint(x) {
                out.insert(i);
            }
        }
        out
    }

    /// Successors of any state in `from`.
    pub fn image(&self, from: &StateSet) -> StateSet {
        let mut out = StateSet::with_capacity(self.nrm.len());
        for i in from.ones() {
            out.union_with(&self.nrm[i]);
        }
        out
    }
}

fn seq(a: &Denotation, b: &Denotation) -> Denotation {
    let n = a.nrm.len();
    let mut d = Denotation::empty(n);
    for i in 0..n {
        let mut err = a.err.contains(i);
        for j in a.nrm[i].ones() {
            d.nrm[i].union_with(&b.nrm[j]);
            err |= b.err.contains(j);
        }
        d.err.set(i, err);
    }
    d
}

fn denote_uncached(space: &StateSpace, s: &Stmt, sub: &mut dyn FnMut(&Stmt) -> Arc<Denotation>) -> Denotation {
    let n = space.len();
    match s {
        Stmt::Skip => Denotation::identity_on(n, |_| true),
        Stmt::Assign(x, e) => {
            let k = space.var_index(x).expect("assignment target declared");
            let mut d = Denotation::empty(n);
            for i in 0..n {
                match space.eval_expr(i, e).and_then(|v| space.update(i, k, &v)) {
                    Some(j) => d.nrm[i].insert(j),
                    None => d.err.insert(i),
                }
            }
            d
        }
        Stmt::NondetAssign(x, lo, hi) => {
            let k = space.var_index(x).expect("nondet target declared");
            let (slo, shi) = match space.sorts()[k] {
                Sort::IntRange(a, b) => (a, b),
                _ => unreachable!("nondet target is an integer"),
            };
            let mut d = Denotation::empty(n);
            for i in 0..n {
                let (l, h) = match (space.eval_expr(i, lo), space.eval_expr(i, hi)) {
                    (Some(Value::Int(l)), Some(Value::Int(h))) => (l, h),
                    _ => {
                        d.err.insert(i);
                        continue;
                    }
                };
                if l > h {
                    continue;
                }
                if l < slo || h > shi {
                    d.err.insert(i);
                }
                for v in l.max(slo)..=h.min(shi) {
                    let j = space.update(i, k, &Value::Int(v)).expect("in sort");
                    d.nrm[i].insert(j);
                }
            }
            d
        }
        Stmt::Test(b) => {
            let mut d = Denotation::empty(n);
            for i in 0..n {
                match space.eval_bool(i, b) {
                    Some(true) => d.nrm[i].insert(i),
                    Some(false) => {}
                    None => d.err.insert(i),
                }
            }
            d
        }
        Stmt::Assert(b) => {
            let mut d = Denotation::empty(n);
            for i in 0..n {
                match space.eval_bool(i, b) {
                    Some(true) => d.nrm[i].insert(i),
                    _ => d.err.insert(i),
                }
            }
            d
        }
        Stmt::Choice(a, b) => {
            let (da, db) = (sub(a), sub(b));
            let mut d = (*da).clone();
            for i in 0..n {
                d.nrm[i].union_with(&db.nrm[i]);
            }
            d.err.union_with(&db.err);
            d
        }
        Stmt::Seq(a, b) => {
            let (da, db) = (sub(a), sub(b));
            seq(&da, &db)
        }
        Stmt::While(b, body) => {
            let db = sub(body);
            let guard: Vec<Option<bool>> = (0..n).map(|i| space.eval_bool(i, b)).collect();
            let mut cur = Denotation::empty(n);
            loop {
                let mut next = Denotation::empty(n);
                for (i, g) in guard.iter().enumerate() {
                    match g {
                        None => next.err.insert(i),
                        Some(false) => next.nrm[i].insert(i),
                        Some(true) => {
                            let mut err = db.err.contains(i);
                            for j in db.nrm[i].ones() {
                                next.nrm[i].union_with(&cur.nrm[j]);
                                err |= cur.err.contains(j);
                            }
                            next.err.set(i, err);
                        }
                    }
                }
                if next == cur {
                    return cur;
                }
                cur = next;
            }
        }
    }
}

/// A state space together with memoized denotations of statements over it.
#[derive(Debug)]
pub struct Semantics {
    pub space: StateSpace,
    cache: Mutex<HashMap<Stmt, Arc<Denotation>>>,
}

impl Semantics {
    pub fn new(space: StateSpace) -> Semantics {
        Semantics { space, cache: Mutex::new(HashMap::new()) }
    }

    pub fn denote(&self, s: &Stmt) -> Arc<Denotation> {
        if let Some(d) = self.cache.lock().expect("cache lock").get(s) {
            return d.clone();
        }
        let d = Arc::new(denote_uncached(&self.space, s, &mut |t| self.denote(t)));
        self.cache.lock().expect("cache lock").insert(s.clone(), d.clone());
        d
    }

    pub fn terminal_set(&self, idx: usize, s: &Stmt) -> StateSet {
        self.denote(s).nrm[idx].clone()
    }

    /// `(σ1, c1) ↪ (σ2, c2)`: every terminal state of the second
    /// configuration is one of the first, and the second errs only if the
    /// first does.
    pub fn config_refines(&self, s1: usize, c1: &Stmt, s2: usize, c2: &Stmt) -> bool {
        let (d1, d2) = (self.denote(c1), self.denote(c2));
        d2.nrm[s2].is_subset(&d1.nrm[s1]) && (!d2.err.contains(s2) || d1.err.contains(s1))
    }

    /// Renders the denotation one transition per line, followed by an
    /// `err:` block listing error states.
    pub fn dump(&self, s: &Stmt) -> String {
        let d = self.denote(s);
        let mut out = String::new();
        for i in 0..self.space.len() {
            for j in d.nrm[i].ones() {
                let _ = writeln!(out, "{} -> {}", self.space.show_state(i), self.space.show_state(j));
            }
        }
        out.push_str("err:\n");
        for i in d.err.ones() {
            let _ = writeln!(out, "  {}", self.space.show_state(i));
        }
        out
    }
}

/// How errors enter the decomposition check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorMode {
    /// Only normal transitions count; `err` is ignored on both sides.
    Ignore,
    /// Refinement includes the error clause and `wlp` excludes error states.
    Track,
}

/// Outcome of comparing configuration refinement with the `wlp` implication.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionReport {
    /// `(σ1, c1) ↪ (σ2, c2)`.
    pub refines: bool,
    /// `σ1 ∈ wlp(c1, X) ⇒ σ2 ∈ wlp(c2, X)` for every `X`.
    pub wlp_implication: bool,
    /// When refinement fails: whether `X = term(σ1, c1)` refutes the implication.
    pub witness_refutes: Option<bool>,
    /// Whether `σ1` can go wrong under `c1`.
    pub initial_error: bool,
}

impl DecompositionReport {
    pub fn agree(&self) -> bool {
        self.refines == self.wlp_implication
    }
}

/// Compares `(σ1, c1) ↪ (σ2, c2)` with the implication between `wlp`
/// memberships over every subset `X` of the state space.
pub fn check_decomposition(
    sem: &Semantics,
    s1: usize,
    c1: &Stmt,
    s2: usize,
    c2: &Stmt,
    mode: ErrorMode,
    cap: usize,
) -> Result<DecompositionReport, SemanticsError> {
    let n = sem.space.len();
    if n > cap {
        return Err(SemanticsError::CapExceeded { size: n, cap });
    }
    let (d1, d2) = (sem.denote(c1), sem.denote(c2));
    let track = mode == ErrorMode::Track;
    let refines = d2.nrm[s2].is_subset(&d1.nrm[s1]) && (!track || !d2.err.contains(s2) || d1.err.contains(s1));
    let in_wlp = |d: &Denotation, s: usize, x: &StateSet| (!track || !d.err.contains(s)) && d.nrm[s].is_subset(x);
    let mut x = StateSet::with_capacity(n);
    let mut wlp_implication = true;
    for mask in 0u64..(1u64 << n) {
        x.clear();
        for b in 0..n {
            if mask >> b & 1 == 1 {
                x.insert(b);
            }
        }
        if in_wlp(&d1, s1, &x) && !in_wlp(&d2, s2, &x) {
            wlp_implication = false;
            break;
        }
    }
    let witness_refutes = if refines {
        None
    } else {
        let w = d1.nrm[s1].clone();
        Some(in_wlp(&d1, s1, &w) && !in_wlp(&d2, s2, &w))
    };
    Ok(DecompositionReport { refines, wlp_implication, witness_refutes, initial_error: d1.err.contains(s1) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_stmt;

    fn space(vars: &[(&str, Sort)]) -> Semantics {
        let vars: Vec<(String, Sort)> = vars.iter().map(|(n, s)| (n.to_string(), s.clone())).collect();
        Semantics::new(StateSpace::new(&vars, &[]).unwrap())
    }

    fn st(sem: &Semantics, vals: &[Value]) -> usize {
        sem.space.index_of(vals).unwrap()
    }

    fn pairs(sem: &Semantics, src: &str) -> (Vec<(usize, usize)>, Vec<usize>) {
        let d = sem.denote(&parse_stmt(src).unwrap());
        let mut p = Vec::new();
        for i in 0..sem.space.len() {
            for j in d.nrm[i].ones() {
                p.push((i, j));
            }
        }
        (p, d.err.ones().collect())
    }

    #[test]
    fn state_indexing_is_lexicographic() {
        let sem = space(&[("x", Sort::int(0, 2)), ("s", Sort::set_over(0..2))]);
        assert_eq!(sem.space.len(), 12);
        for i in 0..12 {
            assert_eq!(sem.space.index_of(sem.space.state(i)), Some(i));
        }
        assert_eq!(st(&sem, &[Value::Int(1), Value::set([0, 1])]), 7);
        assert_eq!(sem.space.show_state(7), "{x=1, s={0,1}}");
    }

    #[test]
    fn union_assignment_on_sets() {
        let sem = space(&[("s", Sort::set_over(0..4))]);
        let (p, e) = pairs(&sem, "s := s ∪ {2}");
        assert_eq!(p.len(), 16);
        assert!(e.is_empty());
        let from = st(&sem, &[Value::set([1])]);
        let to = st(&sem, &[Value::set([1, 2])]);
        assert!(p.contains(&(from, to)));
    }

    #[test]
    fn nondet_bounds_inclusive_and_errors_out_of_sort() {
        let sem = space(&[("x", Sort::int(0, 3))]);
        let (p, e) = pairs(&sem, "x := nondet(1, 2)");
        assert_eq!(p.len(), 8);
        assert!(e.is_empty());
        let (p, e) = pairs(&sem, "x := nondet(2, 5)");
        assert_eq!(p.len(), 8);
        assert_eq!(e.len(), 4);
        let (p, e) = pairs(&sem, "x := nondet(2, 1)");
        assert!(p.is_empty() && e.is_empty());
    }

    #[test]
    fn assignment_out_of_sort_errs() {
        let sem = space(&[("x", Sort::int(0, 2))]);
        let (p, e) = pairs(&sem, "x := x + 1");
        assert_eq!(p, vec![(0, 1), (1, 2)]);
        assert_eq!(e, vec![2]);
    }

    #[test]
    fn assert_and_assume() {
        let sem = space(&[("x", Sort::int(0, 2))]);
        assert_eq!(pairs(&sem, "assume(x < 1)"), (vec![(0, 0)], vec![]));
        assert_eq!(pairs(&sem, "assert(x < 1)"), (vec![(0, 0)], vec![1, 2]));
    }

    #[test]
    fn sequence_errors_propagate() {
        let sem = space(&[("x", Sort::int(0, 2))]);
        let (p, e) = pairs(&sem, "x := nondet(0, 1); assert(x == 0)");
        assert_eq!(p, vec![(0, 0), (1, 0), (2, 0)]);
        assert_eq!(e, vec![0, 1, 2]);
    }

    #[test]
    fn while_loop_fixpoint() {
        let sem = space(&[("x", Sort::int(0, 3))]);
        let (p, e) = pairs(&sem, "while (x < 3) { x := x + 1 }");
        assert_eq!(p, vec![(0, 3), (1, 3), (2, 3), (3, 3)]);
        assert!(e.is_empty());
        let (p, _) = pairs(&sem, "while (x < 3) { skip }");
        assert_eq!(p, vec![(3, 3)]);
        let (p, _) = pairs(&sem, "while (x < 3) { x := nondet(0, 3) }");
        assert_eq!(p, vec![(0, 3), (1, 3), (2, 3), (3, 3)]);
    }

    #[test]
    fn guard_faults_are_errors() {
        let vars = vec![("i".to_string(), Sort::int(0, 3))];
        let consts = vec![Const { name: "a".into(), sort: Sort::array(2, Sort::int(0, 1)), value: Value::Array(vec![1, 0]) }];
        let sem = Semantics::new(StateSpace::new(&vars, &consts).unwrap());
        let (_, e) = pairs(&sem, "assume(a[i] == 1)");
        assert_eq!(e, vec![2, 3]);
    }

    #[test]
    fn refinement_example() {
        let sem = space(&[("x", Sort::int(0, 2))]);
        let c = parse_stmt("x := x - 1").unwrap();
        assert!(sem.config_refines(0, &Stmt::Skip, 1, &c));
        assert!(!sem.config_refines(0, &Stmt::Skip, 2, &c));
    }

    #[test]
    fn decomposition_on_error_free_configurations() {
        let sem = space(&[("x", Sort::int(0, 2))]);
        let c1 = parse_stmt("x := nondet(0, 1)").unwrap();
        let c2 = parse_stmt("x := 1").unwrap();
        let r = check_decomposition(&sem, 2, &c1, 0, &c2, ErrorMode::Track, 16).unwrap();
        assert!(r.refines && r.wlp_implication);
        let r = check_decomposition(&sem, 0, &c2, 2, &c1, ErrorMode::Track, 16).unwrap();
        assert!(!r.refines && !r.wlp_implication && r.witness_refutes == Some(true));
    }

    #[test]
    fn tracked_errors_in_initial_configuration() {
        let sem = space(&[("x", Sort::int(0, 2))]);
        let bad = parse_stmt("assert(false)").unwrap();
        let r = check_decomposition(&sem, 0, &bad, 1, &Stmt::Skip, ErrorMode::Track, 16).unwrap();
        assert!(r.initial_error);
        assert!(!r.refines);
        assert!(r.wlp_implication);
        let r = check_decomposition(&sem, 0, &bad, 1, &Stmt::Skip, ErrorMode::Ignore, 16).unwrap();
        assert!(r.agree());
    }

    #[test]
    fn cap_is_enforced() {
        let sem = space(&[("x", Sort::int(0, 20))]);
        let e = check_decomposition(&sem, 0, &Stmt::Skip, 0, &Stmt::Skip, ErrorMode::Track, 16).unwrap_err();
        assert_eq!(e, SemanticsError::CapExceeded { size: 21, cap: 16 });
    }
}
