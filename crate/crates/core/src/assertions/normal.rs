use super::Assertion;
use crate::lang::{BoolExpr, Sort, Stmt};

/// One disjunct: existential binders over a conjunction of predicates,
/// `Exec` atoms and `prog` atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disjunct {
    pub binders: Vec<(String, Sort)>,
    pub preds: Vec<BoolExpr>,
    pub execs: Vec<(Assertion, Stmt)>,
    pub progs: Vec<Stmt>,
}

/// Disjunctive normal form with binders pulled to the front of each disjunct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub disjuncts: Vec<Disjunct>,
}

impl Disjunct {
    fn unit() -> Disjunct {
        Disjunct { binders: vec![], preds: vec![], execs: vec![], progs: vec![] }
    }

    fn rename(&mut self, from: &str, to: &str) {
        let f = |n: &str| (n == from).then(|| crate::lang::Expr::var(to));
        for p in &mut self.preds {
            *p = p.subst(&f);
        }
        for (a, _) in &mut self.execs {
            *a = a.rename(from, to);
        }
        for (x, _) in &mut self.binders {
            if x == from {
                *x = to.to_string();
            }
        }
    }

    pub fn to_assertion(&self) -> Assertion {
        let mut parts: Vec<Assertion> = self.preds.iter().cloned().map(Assertion::Pred).collect();
        parts.extend(self.execs.iter().map(|(a, c)| Assertion::exec(a.clone(), c.clone())));
        parts.extend(self.progs.iter().cloned().map(Assertion::Prog));
        let mut body = Assertion::and_all(parts);
        for (x, s) in self.binders.iter().rev() {
            body = Assertion::exists(x, s.clone(), body);
        }
        body
    }
}

fn fresh(base: &str, taken: &[String]) -> String {
    let root = base.trim_end_matches('\'');
    let mut k = 1;
    loop {
        let cand = format!("{root}{}", "'".repeat(k));
        if !taken.contains(&cand) {
            return cand;
        }
        k += 1;
    }
}

fn names(d: &Disjunct) -> Vec<String> {
    let mut out: Vec<String> = d.binders.iter().map(|(x, _)| x.clone()).collect();
    for p in &d.preds {
        p.vars(&mut out);
    }
    for (a, _) in &d.execs {
        a.free_vars(&mut out);
    }
    out
}

fn conj(a: &Disjunct, b: &Disjunct) -> Disjunct {
    let (mut a, mut b) = (a.clone(), b.clone());
    let mut taken = names(&a);
    taken.extend(names(&b));
    for (x, _) in b.binders.clone() {
        if names(&a).contains(&x) {
            let y = fresh(&x, &taken);
            taken.push(y.clone());
            b.rename(&x, &y);
        }
    }
    for (x, _) in a.binders.clone() {
        if names(&b).contains(&x) {
            let y = fresh(&x, &taken);
            taken.push(y.clone());
            a.rename(&x, &y);
        }
    }
    a.binders.extend(b.binders);
    a.preds.extend(b.preds);
    a.execs.extend(b.execs);
    a.progs.extend(b.progs);
    a
}

fn nf(a: &Assertion) -> Vec<Disjunct> {
    match a {
        Assertion::Pred(BoolExpr::True) => vec![Disjunct::unit()],
        Assertion::Pred(BoolExpr::False) => vec![],
        Assertion::Pred(b) => vec![Disjunct { preds: vec![b.clone()], ..Disjunct::unit() }],
        Assertion::Exec(p, c) => vec![Disjunct { execs: vec![((**p).clone(), c.clone())], ..Disjunct::unit() }],
        Assertion::Prog(c) => vec![Disjunct { progs: vec![c.clone()], ..Disjunct::unit() }],
        Assertion::Or(x, y) => {
            let mut v = nf(x);
            v.extend(nf(y));
            v
        }
        Assertion::And(x, y) => {
            let (dx, dy) = (nf(x), nf(y));
            let mut v = Vec::with_capacity(dx.len() * dy.len());
            for a in &dx {
                for b in &dy {
                    v.push(conj(a, b));
                }
            }
            v
        }
        Assertion::Exists(x, s, body) => nf(body)
            .into_iter()
            .map(|mut d| {
                if d.binders.iter().any(|(y, _)| y == x) {
                    let taken = names(&d);
                    let y = fresh(x, &taken);
                    d.rename(x, &y);
                }
                d.binders.insert(0, (x.clone(), s.clone()));
                d
            })
            .collect(),
    }
}

/// Computes the normal form of an assertion.
pub fn normalize(a: &Assertion) -> NormalForm {
    NormalForm { disjuncts: nf(a) }
}

impl NormalForm {
    pub fn to_assertion(&self) -> Assertion {
        Assertion::or_all(self.disjuncts.iter().map(Disjunct::to_assertion).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::Parser;

    fn parse(s: &str) -> Assertion {
        Parser::new(s, false).unwrap().parse_assertion().unwrap()
    }

    #[test]
    fn distributes_and_over_or() {
        let n = normalize(&parse("(x == 0 || x == 1) && (y == 0 || y == 1)"));
        assert_eq!(n.disjuncts.len(), 4);
        assert!(n.disjuncts.iter().all(|d| d.preds.len() == 2));
    }

    #[test]
    fn binders_are_prenexed_and_renamed_apart() {
        let n = normalize(&parse("(exists n : int[0..1]. x == n) && exists n : int[0..1]. y == n"));
        let d = &n.disjuncts[0];
        assert_eq!(d.binders.len(), 2);
        assert_ne!(d.binders[0].0, d.binders[1].0);
        assert_eq!(d.preds[1].to_string(), format!("y == {}", d.binders[1].0));
    }

    #[test]
    fn inner_binder_does_not_capture_outer_occurrence() {
        let n = normalize(&parse("exists x : int[0..1]. x == 1 && exists x : int[0..1]. y == x"));
        let d = &n.disjuncts[0];
        assert_eq!(d.binders.len(), 2);
        assert_eq!(d.preds[0].to_string(), format!("{} == 1", d.binders[0].0));
        assert_eq!(d.preds[1].to_string(), format!("y == {}", d.binders[1].0));
        assert_ne!(d.binders[0].0, d.binders[1].0);
    }

    #[test]
    fn exec_atoms_are_collected() {
        let n = normalize(&parse("exists l : set{0..1}. Exec[ s == l ; skip ] && x == sum2(l)"));
        assert_eq!(n.disjuncts.len(), 1);
        assert_eq!(n.disjuncts[0].execs.len(), 1);
        assert_eq!(n.disjuncts[0].preds.len(), 1);
    }

    #[test]
    fn false_drops_disjuncts() {
        let n = normalize(&parse("false || x == 1"));
        assert_eq!(n.disjuncts.len(), 1);
        let n = normalize(&parse("false && x == 1"));
        assert!(n.disjuncts.is_empty());
    }
}
