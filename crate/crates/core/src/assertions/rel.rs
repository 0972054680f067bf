use super::ground::pred_set;
use super::{normalize, valuations, Assertion, AssertionError, ProgTable};
use crate::lang::{eval_bool, BoolExpr, Frame, Frames, Sort, Stmt};
use crate::semantics::Semantics;
use crate::StateSet;

/// A binary relation between low states (rows) and high states (columns).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinRel {
    pub rows: Vec<StateSet>,
    pub cols: usize,
}

impl BinRel {
    pub fn empty(rows: usize, cols: usize) -> BinRel {
        BinRel { rows: vec![StateSet::with_capacity(cols); rows], cols }
    }

    pub fn product(low: &StateSet, high: &StateSet) -> BinRel {
        let mut r = BinRel::empty(low.len(), high.len());
        for i in low.ones() {
            r.rows[i] = high.clone();
        }
        r
    }

    pub fn contains(&self, l: usize, h: usize) -> bool {
        self.rows[l].contains(h)
    }

    pub fn insert(&mut self, l: usize, h: usize) {
        self.rows[l].insert(h);
    }

    pub fn union_with(&mut self, other: &BinRel) {
        for (a, b) in self.rows.iter_mut().zip(&other.rows) {
            a.union_with(b);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|r| r.is_clear())
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum()
    }

    /// Linking `ℙ ⊙ P̌`: low states related to some high state in `p`.
    pub fn link(&self, p: &StateSet) -> StateSet {
        let mut out = StateSet::with_capacity(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            if !r.is_disjoint(p) {
                out.insert(i);
            }
        }
        out
    }

    /// Relational composition `self ∘ other`.
    pub fn compose(&self, other: &BinRel) -> BinRel {
        let mut out = BinRel::empty(self.rows.len(), other.cols);
        for (i, r) in self.rows.iter().enumerate() {
            for j in r.ones() {
                out.rows[i].union_with(&other.rows[j]);
            }
        }
        out
    }
}

/// Extension of a relational assertion: for each program of a fixed
/// universe, the related (low, high) state pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelExt {
    pub progs: ProgTable,
    pub rels: Vec<BinRel>,
}

impl RelExt {
    pub fn empty(progs: ProgTable, rows: usize, cols: usize) -> RelExt {
        let rels = vec![BinRel::empty(rows, cols); progs.len()];
        RelExt { progs, rels }
    }

    /// A single lifted binary relation paired with one program.
    pub fn single(progs: ProgTable, prog: usize, rel: BinRel) -> RelExt {
        let (r, c) = (rel.rows.len(), rel.cols);
        let mut e = RelExt::empty(progs, r, c);
        e.rels[prog] = rel;
        e
    }

    pub fn union_with(&mut self, other: &RelExt) {
        for (a, b) in self.rels.iter_mut().zip(&other.rels) {
            a.union_with(b);
        }
    }

    pub fn contains(&self, l: usize, h: usize, prog: usize) -> bool {
        self.rels[prog].contains(l, h)
    }
}

fn classify(p: &BoolExpr, low: &Semantics, high: &Semantics) -> (bool, bool) {
    let mut vs = Vec::new();
    p.vars(&mut vs);
    (
        vs.iter().any(|v| low.space.var_index(v).is_some()),
        vs.iter().any(|v| high.space.var_index(v).is_some()),
    )
}

/// Grounds a relational assertion over a program universe. Disjuncts without
/// a `prog` atom range over every program of the universe.
pub fn ground_rel(
    a: &Assertion,
    low: &Semantics,
    high: &Semantics,
    universe: &ProgTable,
) -> Result<RelExt, AssertionError> {
    if a.has_exec() {
        return Err(AssertionError::Misplaced("an Exec atom in a relational assertion"));
    }
    let nf = normalize(a);
    let (nl, nh) = (low.space.len(), high.space.len());
    let mut out = RelExt::empty(universe.clone(), nl, nh);
    for d in &nf.disjuncts {
        let targets: Vec<usize> = match d.progs.first() {
            None => (0..universe.len()).collect(),
            Some(c) if d.progs.iter().all(|p| p == c) => match universe.find(c) {
                Some(i) => vec![i],
                None => return Err(AssertionError::NotDecomposed(format!("program `{c}` outside the universe"))),
            },
            Some(_) => vec![],
        };
        if targets.is_empty() {
            continue;
        }
        let (mut lp, mut hp, mut bp, mut pure) = (vec![], vec![], vec![], vec![]);
        for p in &d.preds {
            match classify(p, low, high) {
                (true, true) => bp.push(p.clone()),
                (true, false) => lp.push(p.clone()),
                (false, true) => hp.push(p.clone()),
                (false, false) => pure.push(p.clone()),
            }
        }
        let names: Vec<String> = d.binders.iter().map(|(n, _)| n.clone()).collect();
        for val in valuations(&d.binders)? {
            let logical = Frame { names: &names, values: &val };
            let cf = [low.space.const_frame(), logical];
            if !pure.iter().all(|p| eval_bool(p, &Frames(&cf)) == Ok(true)) {
                continue;
            }
            let ls = pred_set(&low.space, &lp, logical);
            if ls.is_clear() {
                continue;
            }
            let hs = pred_set(&high.space, &hp, logical);
            if hs.is_clear() {
                continue;
            }
            let rel = if bp.is_empty() {
                BinRel::product(&ls, &hs)
            } else {
                let mut r = BinRel::empty(nl, nh);
                for i in ls.ones() {
                    for j in hs.ones() {
                        let fr = [low.space.const_frame(), logical, low.space.var_frame(i), high.space.var_frame(j)];
                        if bp.iter().all(|p| eval_bool(p, &Frames(&fr)) == Ok(true)) {
                            r.insert(i, j);
                        }
                    }
                }
                r
            };
            for t in &targets {
                out.rels[*t].union_with(&rel);
            }
        }
    }
    Ok(out)
}

/// Semantic encoding: low states related to some `(σH, c)` with `σH ∈ wlp(c, X)`.
pub fn enc(p: &RelExt, high: &Semantics, x: &StateSet) -> StateSet {
    let rows = p.rels.first().map(|r| r.rows.len()).unwrap_or(0);
    let mut out = StateSet::with_capacity(rows);
    for (k, c) in p.progs.progs.iter().enumerate() {
        let w = high.denote(c).wlp(x);
        out.union_with(&p.rels[k].link(&w));
    }
    out
}

/// `∃ binders. pure ∧ ⌊low⌋ ∧ ⌈high⌉ ∧ ⌜prog⌝`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecomposedDisjunct {
    pub binders: Vec<(String, Sort)>,
    pub pure: Vec<BoolExpr>,
    pub low: Vec<BoolExpr>,
    pub high: Assertion,
    pub prog: Stmt,
}

/// A disjunction of decomposed disjuncts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposed {
    pub disjuncts: Vec<DecomposedDisjunct>,
}

impl DecomposedDisjunct {
    fn wrap(&self, mut body: Assertion) -> Assertion {
        for (x, s) in self.binders.iter().rev() {
            body = Assertion::exists(x, s.clone(), body);
        }
        body
    }

    fn prefix(&self) -> Vec<Assertion> {
        self.pure.iter().chain(&self.low).cloned().map(Assertion::Pred).collect()
    }

    pub fn to_rel_assertion(&self) -> Assertion {
        let mut parts = self.prefix();
        parts.push(self.high.clone());
        parts.push(Assertion::Prog(self.prog.clone()));
        self.wrap(Assertion::and_all(parts))
    }

    pub fn encode(&self) -> Assertion {
        let mut parts = self.prefix();
        parts.push(Assertion::exec(self.high.clone(), self.prog.clone()));
        self.wrap(Assertion::and_all(parts))
    }
}

impl Decomposed {
    pub fn to_rel_assertion(&self) -> Assertion {
        Assertion::or_all(self.disjuncts.iter().map(DecomposedDisjunct::to_rel_assertion).collect())
    }

    pub fn programs(&self) -> Vec<Stmt> {
        let mut out: Vec<Stmt> = Vec::new();
        for d in &self.disjuncts {
            if !out.contains(&d.prog) {
                out.push(d.prog.clone());
            }
        }
        out
    }
}

/// Syntactic encoding: `⌈P̌⌉ ∧ ⌜c⌝` becomes `Exec[P̌ ; c]`, distributed over
/// the disjuncts.
pub fn enc_syntactic(p: &Decomposed) -> Assertion {
    Assertion::or_all(p.disjuncts.iter().map(DecomposedDisjunct::encode).collect())
}

fn mentions(p: &BoolExpr, names: &[String]) -> bool {
    let mut vs = Vec::new();
    p.vars(&mut vs);
    vs.iter().any(|v| names.contains(v))
}

/// Splits a relational assertion into decomposed disjuncts. Each disjunct
/// needs exactly one program and no predicate relating low and high states.
pub fn decompose(a: &Assertion, low_names: &[String], high_names: &[String]) -> Result<Decomposed, AssertionError> {
    let nf = normalize(a);
    let mut out = Vec::new();
    for d in &nf.disjuncts {
        if !d.execs.is_empty() {
            return Err(AssertionError::Misplaced("an Exec atom in a relational assertion"));
        }
        let prog = match d.progs.first() {
            None => return Err(AssertionError::NotDecomposed("a disjunct has no prog atom".into())),
            Some(c) => c.clone(),
        };
        if d.progs.iter().any(|p| *p != prog) {
            continue;
        }
        let (mut pure, mut low, mut high) = (vec![], vec![], vec![]);
        for p in &d.preds {
            match (mentions(p, low_names), mentions(p, high_names)) {
                (true, true) => {
                    return Err(AssertionError::NotDecomposed(format!("`{p}` relates low and high states")))
                }
                (true, false) => low.push(p.clone()),
                (false, true) => high.push(Assertion::Pred(p.clone())),
                (false, false) => pure.push(p.clone()),
            }
        }
        out.push(DecomposedDisjunct { binders: d.binders.clone(), pure, low, high: Assertion::and_all(high), prog });
    }
    Ok(Decomposed { disjuncts: out })
}

/// Reads a low-level assertion whose disjuncts each carry one `Exec` atom
/// back as a decomposed relational assertion.
pub fn decode(a: &Assertion, low_names: &[String]) -> Result<Decomposed, AssertionError> {
    let nf = normalize(a);
    let mut out = Vec::new();
    for d in &nf.disjuncts {
        if d.execs.len() != 1 {
            return Err(AssertionError::NotDecomposed(format!(
                "a disjunct has {} Exec atoms instead of one",
                d.execs.len()
            )));
        }
        let (high, prog) = d.execs[0].clone();
        let (mut pure, mut low) = (vec![], vec![]);
        for p in &d.preds {
            if mentions(p, low_names) {
                low.push(p.clone())
            } else {
                pure.push(p.clone())
            }
        }
        out.push(DecomposedDisjunct { binders: d.binders.clone(), pure, low, high, prog });
    }
    Ok(Decomposed { disjuncts: out })
}

#[cfg(test)]
mod tests {
    use super::super::ground_low;
    use super::*;
    use crate::lang::Parser;
    use crate::semantics::StateSpace;

    fn sem(vars: &[(&str, Sort)]) -> Semantics {
        let v: Vec<(String, Sort)> = vars.iter().map(|(n, s)| (n.to_string(), s.clone())).collect();
        Semantics::new(StateSpace::new(&v, &[]).unwrap())
    }

    fn parse(s: &str) -> Assertion {
        Parser::new(s, false).unwrap().parse_assertion().unwrap()
    }

    #[test]
    fn link_and_compose() {
        let mut r = BinRel::empty(2, 3);
        r.insert(0, 1);
        r.insert(1, 2);
        let mut p = StateSet::with_capacity(3);
        p.insert(2);
        assert_eq!(r.link(&p).ones().collect::<Vec<_>>(), vec![1]);
        let mut q = BinRel::empty(3, 2);
        q.insert(1, 0);
        let c = r.compose(&q);
        assert!(c.contains(0, 0) && c.len() == 1);
    }

    #[test]
    fn binary_predicates_ground_pairwise() {
        let low = sem(&[("x", Sort::int(0, 2))]);
        let high = sem(&[("y", Sort::int(0, 2))]);
        let mut u = ProgTable::default();
        u.intern(&Stmt::Skip);
        let e = ground_rel(&parse("x == y && prog[skip]"), &low, &high, &u).unwrap();
        assert_eq!(e.rels[0].len(), 3);
        assert!(e.contains(2, 2, 0));
    }

    #[test]
    fn syntactic_and_semantic_encodings_agree() {
        let low = sem(&[("x", Sort::int(0, 2))]);
        let high = sem(&[("y", Sort::int(0, 2))]);
        let a = parse("exists n : int[0..2]. x == n && y == n && prog[skip] || x == 0 && prog[ y := 1 ]");
        let names = |s: &Semantics| s.space.names().to_vec();
        let d = decompose(&a, &names(&low), &names(&high)).unwrap();
        assert_eq!(d.disjuncts.len(), 2);
        let mut u = ProgTable::default();
        for c in d.programs() {
            u.intern(&c);
        }
        let ext = ground_rel(&a, &low, &high, &u).unwrap();
        let syn = ground_low(&enc_syntactic(&d), &low, Some(&high), &[]).unwrap();
        for x in super::super::all_subsets(3, 16).unwrap() {
            assert_eq!(enc(&ext, &high, &x), syn.extension_at(Some(&high), Some(&x)).unwrap());
        }
        let back = decode(&enc_syntactic(&d), &names(&low)).unwrap();
        assert_eq!(back.disjuncts.len(), 2);
        assert_eq!(back.disjuncts[1].prog, d.disjuncts[1].prog);
    }

    #[test]
    fn binary_conjunct_is_not_decomposed() {
        let a = parse("x == y && prog[skip]");
        let e = decompose(&a, &["x".into()], &["y".into()]).unwrap_err();
        assert!(matches!(e, AssertionError::NotDecomposed(_)));
    }
}
