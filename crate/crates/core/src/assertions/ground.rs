use super::{normalize, valuations, Assertion, AssertionError, NormalForm};
use crate::lang::{eval_bool, BoolExpr, Frame, Frames, Stmt, Value};
use crate::semantics::{Semantics, StateSpace};
use crate::StateSet;

/// Interned programs, compared structurally.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProgTable {
    pub progs: Vec<Stmt>,
}

impl ProgTable {
    pub fn intern(&mut self, s: &Stmt) -> usize {
        match self.progs.iter().position(|p| p == s) {
            Some(i) => i,
            None => {
                self.progs.push(s.clone());
                self.progs.len() - 1
            }
        }
    }

    pub fn find(&self, s: &Stmt) -> Option<usize> {
        self.progs.iter().position(|p| p == s)
    }

    pub fn get(&self, i: usize) -> &Stmt {
        &self.progs[i]
    }

    pub fn len(&self) -> usize {
        self.progs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.progs.is_empty()
    }
}

/// One disjunct instantiated at one valuation of its binders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundEntry {
    pub disjunct: usize,
    pub valuation: Vec<Value>,
    /// Low states satisfying the predicates of the disjunct.
    pub low: StateSet,
    /// `Exec` atoms as (high states, program index).
    pub execs: Vec<(StateSet, usize)>,
}

/// A low-level assertion grounded over a state space.
#[derive(Clone, Debug)]
pub struct Grounded {
    pub nf: NormalForm,
    pub entries: Vec<GroundEntry>,
    pub progs: ProgTable,
    /// Number of low states.
    pub width: usize,
}

/// States of `space` satisfying all of `preds` under the logical frame.
/// Predicates that fault count as false.
pub(crate) fn pred_set(space: &StateSpace, preds: &[BoolExpr], logical: Frame<'_>) -> StateSet {
    let mut out = space.empty_set();
    let mut state_free = Vec::new();
    let mut state_dep = Vec::new();
    for p in preds {
        let mut vs = Vec::new();
        p.vars(&mut vs);
        if vs.iter().any(|v| space.var_index(v).is_some()) {
            state_dep.push(p);
        } else {
            state_free.push(p);
        }
    }
    if !state_free.is_empty() {
        let fr = [space.const_frame(), logical];
        if !state_free.iter().all(|p| eval_bool(p, &Frames(&fr)) == Ok(true)) {
            return out;
        }
    }
    for i in 0..space.len() {
        let fr = [space.const_frame(), logical, space.var_frame(i)];
        if state_dep.iter().all(|p| eval_bool(p, &Frames(&fr)) == Ok(true)) {
            out.insert(i);
        }
    }
    out
}

/// Extension of an Exec-free assertion over the high-level space, with the
/// given logical variables in scope.
pub fn ground_high(a: &Assertion, high: &Semantics, logical: &[(String, Value)]) -> Result<StateSet, AssertionError> {
    if a.has_exec() {
        return Err(AssertionError::Misplaced("an Exec atom inside Exec"));
    }
    if a.has_prog() {
        return Err(AssertionError::Misplaced("a prog atom"));
    }
    let nf = normalize(a);
    let mut out = high.space.empty_set();
    for d in &nf.disjuncts {
        let mut names: Vec<String> = logical.iter().map(|(n, _)| n.clone()).collect();
        names.extend(d.binders.iter().map(|(n, _)| n.clone()));
        for val in valuations(&d.binders)? {
            let mut values: Vec<Value> = logical.iter().map(|(_, v)| v.clone()).collect();
            values.extend(val);
            out.union_with(&pred_set(&high.space, &d.preds, Frame { names: &names, values: &values }));
        }
    }
    Ok(out)
}

/// Grounds a low-level assertion. `free` gives values for logical variables
/// that are free in the assertion.
pub fn ground_low(
    a: &Assertion,
    low: &Semantics,
    high: Option<&Semantics>,
    free: &[(String, Value)],
) -> Result<Grounded, AssertionError> {
    if a.has_prog() {
        return Err(AssertionError::Misplaced("a prog atom in a low-level assertion"));
    }
    let nf = normalize(a);
    let mut progs = ProgTable::default();
    let mut entries = Vec::new();
    for (k, d) in nf.disjuncts.iter().enumerate() {
        if !d.execs.is_empty() && high.is_none() {
            return Err(AssertionError::NoHighSpace);
        }
        let prog_ids: Vec<usize> = d.execs.iter().map(|(_, c)| progs.intern(c)).collect();
        let mut names: Vec<String> = free.iter().map(|(n, _)| n.clone()).collect();
        names.extend(d.binders.iter().map(|(n, _)| n.clone()));
        for val in valuations(&d.binders)? {
            let mut values: Vec<Value> = free.iter().map(|(_, v)| v.clone()).collect();
            values.extend(val.iter().cloned());
            let lowset = pred_set(&low.space, &d.preds, Frame { names: &names, values: &values });
            if lowset.is_clear() {
                continue;
            }
            let logical: Vec<(String, Value)> = names.iter().cloned().zip(values.iter().cloned()).collect();
            let mut execs = Vec::with_capacity(d.execs.len());
            for ((p, _), id) in d.execs.iter().zip(&prog_ids) {
                let h = high.expect("checked above");
                execs.push((ground_high(p, h, &logical)?, *id));
            }
            entries.push(GroundEntry { disjunct: k, valuation: val, low: lowset, execs });
        }
    }
    Ok(Grounded { nf, entries, progs, width: low.space.len() })
}

impl Grounded {
    pub fn has_exec(&self) -> bool {
        self.entries.iter().any(|e| !e.execs.is_empty())
    }

    /// `wlp(c, X)` for each interned program.
    pub fn wlps(&self, high: &Semantics, x: &StateSet) -> Vec<StateSet> {
        self.progs.progs.iter().map(|c| high.denote(c).wlp(x)).collect()
    }

    /// Extension given precomputed `wlp` sets, one per interned program.
    pub fn extension_with(&self, wlps: &[StateSet]) -> StateSet {
        let mut out = StateSet::with_capacity(self.width);
        for e in &self.entries {
            if e.execs.iter().all(|(s, p)| !s.is_disjoint(&wlps[*p])) {
                out.union_with(&e.low);
            }
        }
        out
    }

    /// Extension; `X` is required when Exec atoms are present.
    pub fn extension_at(&self, high: Option<&Semantics>, x: Option<&StateSet>) -> Result<StateSet, AssertionError> {
        if !self.has_exec() {
            return Ok(self.extension_with(&[]));
        }
        let x = x.ok_or(AssertionError::MissingX)?;
        let high = high.ok_or(AssertionError::NoHighSpace)?;
        Ok(self.extension_with(&self.wlps(high, x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{Parser, Sort};

    fn sem(vars: &[(&str, Sort)]) -> Semantics {
        let v: Vec<(String, Sort)> = vars.iter().map(|(n, s)| (n.to_string(), s.clone())).collect();
        Semantics::new(StateSpace::new(&v, &[]).unwrap())
    }

    fn parse(s: &str) -> Assertion {
        Parser::new(s, false).unwrap().parse_assertion().unwrap()
    }

    #[test]
    fn exec_free_extension() {
        let low = sem(&[("x", Sort::int(0, 3))]);
        let g = ground_low(&parse("exists n : int[0..1]. x == n + 2"), &low, None, &[]).unwrap();
        assert_eq!(g.extension_at(None, None).unwrap().ones().collect::<Vec<_>>(), vec![2, 3]);
    }

    #[test]
    fn exec_needs_x() {
        let low = sem(&[("x", Sort::int(0, 1))]);
        let high = sem(&[("y", Sort::int(0, 1))]);
        let g = ground_low(&parse("Exec[ y == 0 ; y := 1 ]"), &low, Some(&high), &[]).unwrap();
        assert_eq!(g.extension_at(Some(&high), None), Err(AssertionError::MissingX));
        let mut x = high.space.empty_set();
        assert!(g.extension_at(Some(&high), Some(&x)).unwrap().is_clear());
        x.insert(1);
        assert_eq!(g.extension_at(Some(&high), Some(&x)).unwrap().count_ones(..), 2);
    }

    #[test]
    fn exec_binds_logical_variables() {
        let low = sem(&[("x", Sort::int(0, 2))]);
        let high = sem(&[("y", Sort::int(0, 2))]);
        let a = parse("exists n : int[0..2]. Exec[ y == n ; skip ] && x == n");
        let g = ground_low(&a, &low, Some(&high), &[]).unwrap();
        let mut x = high.space.empty_set();
        x.insert(2);
        assert_eq!(g.extension_at(Some(&high), Some(&x)).unwrap().ones().collect::<Vec<_>>(), vec![2]);
    }
}
