use serde::Serialize;
use std::collections::BTreeSet;

/// The sort of a variable: a finite set of admissible values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sort {
    /// Integers in an inclusive range.
    IntRange(i64, i64),
    /// Subsets of the given universe.
    SetOver(Vec<i64>),
    /// Fixed-length arrays whose elements have an integer sort.
    ArrayOf(usize, Box<Sort>),
}

/// A runtime value. Sets are kept sorted without duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Value<Z = i64> {
    Int(Z),
    Set(Vec<Z>),
    Array(Vec<Z>),
}

impl Sort {
    pub fn int(lo: i64, hi: i64) -> Sort {
        Sort::IntRange(lo, hi)
    }

    pub fn set_over(universe: impl IntoIterator<Item = i64>) -> Sort {
        let u: BTreeSet<i64> = universe.into_iter().collect();
        Sort::SetOver(u.into_iter().collect())
    }

    pub fn array(len: usize, elem: Sort) -> Sort {
        Sort::ArrayOf(len, Box::new(elem))
    }

    /// Number of values of this sort, saturating at `u64::MAX`.
    pub fn cardinality(&self) -> u64 {
        match self {
            Sort::IntRange(lo, hi) => {
                if hi < lo {
                    0
                } else {
                    (*hi as i128 - *lo as i128 + 1).min(u64::MAX as i128) as u64
                }
            }
            Sort::SetOver(u) => {
                if u.len() >= 64 {
                    u64::MAX
                } else {
                    1u64 << u.len()
                }
            }
            Sort::ArrayOf(n, e) => {
                let base = e.cardinality();
                let mut acc: u64 = 1;
                for _ in 0..*n {
                    acc = acc.saturating_mul(base);
                }
                acc
            }
        }
    }

    /// All values of the sort in canonical order.
    pub fn values(&self) -> Vec<Value> {
        match self {
            Sort::IntRange(lo, hi) => (*lo..=*hi).map(Value::Int).collect(),
            Sort::SetOver(u) => {
                let n = u.len();
                (0u64..(1u64 << n))
                    .map(|mask| {
                        Value::Set((0..n).filter(|i| mask >> i & 1 == 1).map(|i| u[i]).collect())
                    })
                    .collect()
            }
            Sort::ArrayOf(n, e) => {
                let elems: Vec<i64> = e
                    .values()
                    .into_iter()
                    .filter_map(|v| match v {
                        Value::Int(i) => Some(i),
                        _ => None,
                    })
                    .collect();
                let mut out = vec![Vec::with_capacity(*n)];
                for _ in 0..*n {
                    let mut next = Vec::with_capacity(out.len() * elems.len());
                    for prefix in &out {
                        for x in &elems {
                            let mut p = prefix.clone();
                            p.push(*x);
                            next.push(p);
                        }
                    }
                    out = next;
                }
                out.into_iter().map(Value::Array).collect()
            }
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (Sort::IntRange(lo, hi), Value::Int(i)) => lo <= i && i <= hi,
            (Sort::SetOver(u), Value::Set(s)) => s.iter().all(|x| u.binary_search(x).is_ok()),
            (Sort::ArrayOf(n, e), Value::Array(a)) => {
                a.len() == *n && a.iter().all(|x| e.contains(&Value::Int(*x)))
            }
            _ => false,
        }
    }
}

impl<Z: Ord> Value<Z> {
    /// Builds a set value, sorting and removing duplicates.
    pub fn set(elems: impl IntoIterator<Item = Z>) -> Self {
        let s: BTreeSet<Z> = elems.into_iter().collect();
        Value::Set(s.into_iter().collect())
    }
}

/// Integer and set expressions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Expr {
    IntLit(i64),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    BitOr(Box<Expr>, Box<Expr>),
    Shl(Box<Expr>, Box<Expr>),
    /// `{}` or a literal with at least two elements.
    SetLit(Vec<Expr>),
    SetSingleton(Box<Expr>),
    SetUnion(Box<Expr>, Box<Expr>),
    ArrayIndex(Box<Expr>, Box<Expr>),
    Length(Box<Expr>),
    /// Sum of `2^a` over the elements `a` of a set.
    Sum2(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BoolExpr {
    True,
    False,
    Eq(Box<Expr>, Box<Expr>),
    Lt(Box<Expr>, Box<Expr>),
    Le(Box<Expr>, Box<Expr>),
    Member(Box<Expr>, Box<Expr>),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Stmt {
    Skip,
    Assign(String, Expr),
    /// `x := nondet(lo, hi)` with inclusive bounds.
    NondetAssign(String, Expr, Expr),
    /// `assume(b)`.
    Test(BoolExpr),
    Choice(Box<Stmt>, Box<Stmt>),
    While(BoolExpr, Box<Stmt>),
    Seq(Box<Stmt>, Box<Stmt>),
    Assert(BoolExpr),
}

/// A named constant shared by both programs of a relational problem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Const {
    pub name: String,
    pub sort: Sort,
    pub value: Value,
}

/// A program with its variable and constant declarations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramDecl {
    pub vars: Vec<(String, Sort)>,
    pub consts: Vec<Const>,
    pub body: Stmt,
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn int(v: i64) -> Expr {
        Expr::IntLit(v)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn bitor(a: Expr, b: Expr) -> Expr {
        Expr::BitOr(Box::new(a), Box::new(b))
    }

    pub fn shl(a: Expr, b: Expr) -> Expr {
        Expr::Shl(Box::new(a), Box::new(b))
    }

    pub fn union(a: Expr, b: Expr) -> Expr {
        Expr::SetUnion(Box::new(a), Box::new(b))
    }

    pub fn singleton(a: Expr) -> Expr {
        Expr::SetSingleton(Box::new(a))
    }

    pub fn index(a: Expr, i: Expr) -> Expr {
        Expr::ArrayIndex(Box::new(a), Box::new(i))
    }

    /// Free variable names, in order of first occurrence.
    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::IntLit(_) => {}
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::BitOr(a, b)
            | Expr::Shl(a, b)
            | Expr::SetUnion(a, b)
            | Expr::ArrayIndex(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Expr::SetLit(es) => es.iter().for_each(|e| e.vars(out)),
            Expr::SetSingleton(a) | Expr::Length(a) | Expr::Sum2(a) => a.vars(out),
        }
    }

    /// Replaces variables by expressions.
    pub fn subst(&self, f: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        let s = |e: &Expr| Box::new(e.subst(f));
        match self {
            Expr::IntLit(_) => self.clone(),
            Expr::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Expr::Add(a, b) => Expr::Add(s(a), s(b)),
            Expr::Sub(a, b) => Expr::Sub(s(a), s(b)),
            Expr::Mul(a, b) => Expr::Mul(s(a), s(b)),
            Expr::BitOr(a, b) => Expr::BitOr(s(a), s(b)),
            Expr::Shl(a, b) => Expr::Shl(s(a), s(b)),
            Expr::SetUnion(a, b) => Expr::SetUnion(s(a), s(b)),
            Expr::ArrayIndex(a, b) => Expr::ArrayIndex(s(a), s(b)),
            Expr::SetLit(es) => Expr::SetLit(es.iter().map(|e| e.subst(f)).collect()),
            Expr::SetSingleton(a) => Expr::SetSingleton(s(a)),
            Expr::Length(a) => Expr::Length(s(a)),
            Expr::Sum2(a) => Expr::Sum2(s(a)),
        }
    }
}

impl BoolExpr {
    pub fn eq(a: Expr, b: Expr) -> BoolExpr {
        BoolExpr::Eq(Box::new(a), Box::new(b))
    }

    pub fn lt(a: Expr, b: Expr) -> BoolExpr {
        BoolExpr::Lt(Box::new(a), Box::new(b))
    }

    pub fn le(a: Expr, b: Expr) -> BoolExpr {
        BoolExpr::Le(Box::new(a), Box::new(b))
    }

    pub fn member(a: Expr, b: Expr) -> BoolExpr {
        BoolExpr::Member(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(b: BoolExpr) -> BoolExpr {
        BoolExpr::Not(Box::new(b))
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            BoolExpr::True | BoolExpr::False => {}
            BoolExpr::Eq(a, b) | BoolExpr::Lt(a, b) | BoolExpr::Le(a, b) | BoolExpr::Member(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            BoolExpr::Not(a) => a.vars(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    pub fn subst(&self, f: &dyn Fn(&str) -> Option<Expr>) -> BoolExpr {
        let e = |x: &Expr| Box::new(x.subst(f));
        let b = |x: &BoolExpr| Box::new(x.subst(f));
        match self {
            BoolExpr::True | BoolExpr::False => self.clone(),
            BoolExpr::Eq(x, y) => BoolExpr::Eq(e(x), e(y)),
            BoolExpr::Lt(x, y) => BoolExpr::Lt(e(x), e(y)),
            BoolExpr::Le(x, y) => BoolExpr::Le(e(x), e(y)),
            BoolExpr::Member(x, y) => BoolExpr::Member(e(x), e(y)),
            BoolExpr::Not(x) => BoolExpr::Not(b(x)),
            BoolExpr::And(x, y) => BoolExpr::And(b(x), b(y)),
            BoolExpr::Or(x, y) => BoolExpr::Or(b(x), b(y)),
        }
    }
}

impl Stmt {
    pub fn assign(x: &str, e: Expr) -> Stmt {
        Stmt::Assign(x.to_string(), e)
    }

    pub fn nondet(x: &str, lo: Expr, hi: Expr) -> Stmt {
        Stmt::NondetAssign(x.to_string(), lo, hi)
    }

    pub fn seq(a: Stmt, b: Stmt) -> Stmt {
        Stmt::Seq(Box::new(a), Box::new(b))
    }

    pub fn choice(a: Stmt, b: Stmt) -> Stmt {
        Stmt::Choice(Box::new(a), Box::new(b))
    }

    pub fn while_(b: BoolExpr, body: Stmt) -> Stmt {
        Stmt::While(b, Box::new(body))
    }

    /// `if b then c1 else c2` as `choice(assume(b); c1, assume(!b); c2)`.
    pub fn if_then_else(b: BoolExpr, c1: Stmt, c2: Stmt) -> Stmt {
        Stmt::choice(
            Stmt::seq(Stmt::Test(b.clone()), c1),
            Stmt::seq(Stmt::Test(BoolExpr::not(b)), c2),
        )
    }

    /// Right-nested sequence of the given statements; `skip` when empty.
    pub fn seq_all(mut stmts: Vec<Stmt>) -> Stmt {
        let mut acc = match stmts.pop() {
            Some(s) => s,
            None => return Stmt::Skip,
        };
        while let Some(s) = stmts.pop() {
            acc = Stmt::seq(s, acc);
        }
        acc
    }

    /// First basic step of a sequence and what remains, flattening left-nested
    /// sequences. `None` as the rest means the head is the whole statement.
    pub fn split_head(&self) -> (Stmt, Option<Stmt>) {
        match self {
            Stmt::Seq(a, b) => {
                let (h, r) = a.split_head();
                match r {
                    None => (h, Some((**b).clone())),
                    Some(r) => (h, Some(Stmt::seq_right(r, (**b).clone()))),
                }
            }
            _ => (self.clone(), None),
        }
    }

    /// `a; b` with the left operand's sequences re-associated to the right,
    /// matching how the parser nests them.
    pub fn seq_right(a: Stmt, b: Stmt) -> Stmt {
        match a {
            Stmt::Seq(x, y) => Stmt::seq(*x, Stmt::seq_right(*y, b)),
            a => Stmt::seq(a, b),
        }
    }

    /// Variables assigned anywhere in the statement.
    pub fn assigned(&self, out: &mut Vec<String>) {
        match self {
            Stmt::Assign(x, _) | Stmt::NondetAssign(x, _, _) => {
                if !out.contains(x) {
                    out.push(x.clone())
                }
            }
            Stmt::Choice(a, b) | Stmt::Seq(a, b) => {
                a.assigned(out);
                b.assigned(out);
            }
            Stmt::While(_, c) => c.assigned(out),
            Stmt::Skip | Stmt::Test(_) | Stmt::Assert(_) => {}
        }
    }

    /// All variables mentioned by the statement.
    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            Stmt::Skip => {}
            Stmt::Assign(x, e) => {
                if !out.contains(x) {
                    out.push(x.clone())
                }
                e.vars(out)
            }
            Stmt::NondetAssign(x, a, b) => {
                if !out.contains(x) {
                    out.push(x.clone())
                }
                a.vars(out);
                b.vars(out)
            }
            Stmt::Test(b) | Stmt::Assert(b) => b.vars(out),
            Stmt::Choice(a, b) | Stmt::Seq(a, b) => {
                a.vars(out);
                b.vars(out)
            }
            Stmt::While(b, c) => {
                b.vars(out);
                c.vars(out)
            }
        }
    }

    /// Syntactic subterms, including the statement itself.
    pub fn subterms(&self) -> Vec<Stmt> {
        let mut out = Vec::new();
        self.collect_subterms(&mut out);
        out
    }

    fn collect_subterms(&self, out: &mut Vec<Stmt>) {
        if !out.contains(self) {
            out.push(self.clone());
        }
        match self {
            Stmt::Choice(a, b) | Stmt::Seq(a, b) => {
                a.collect_subterms(out);
                b.collect_subterms(out);
            }
            Stmt::While(_, c) => c.collect_subterms(out),
            _ => {}
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Stmt::Choice(a, b) | Stmt::Seq(a, b) => 1 + a.size() + b.size(),
            Stmt::While(_, c) => 1 + c.size(),
            _ => 1,
        }
    }
}
