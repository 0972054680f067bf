use super::AssertionError;
use crate::lang::{BoolExpr, Checker, Const, Sort, Stmt};
use std::fmt;

/// Assertion syntax shared by low-level and relational assertions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Assertion {
    /// A predicate over program variables, constants and logical variables.
    Pred(BoolExpr),
    And(Box<Assertion>, Box<Assertion>),
    Or(Box<Assertion>, Box<Assertion>),
    Exists(String, Sort, Box<Assertion>),
    /// `Exec[P ; c]`: some high state satisfying `P` runs `c` safely into `X`.
    Exec(Box<Assertion>, Stmt),
    /// The high-level program component equals `c` (relational only).
    Prog(Stmt),
}

impl Assertion {
    pub fn tt() -> Assertion {
        Assertion::Pred(BoolExpr::True)
    }

    pub fn and(a: Assertion, b: Assertion) -> Assertion {
        Assertion::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Assertion, b: Assertion) -> Assertion {
        Assertion::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(x: &str, s: Sort, body: Assertion) -> Assertion {
        Assertion::Exists(x.to_string(), s, Box::new(body))
    }

    pub fn exec(p: Assertion, c: Stmt) -> Assertion {
        Assertion::Exec(Box::new(p), c)
    }

    /// Conjunction of a list; `true` when empty.
    pub fn and_all(parts: Vec<Assertion>) -> Assertion {
        parts.into_iter().reduce(Assertion::and).unwrap_or_else(Assertion::tt)
    }

    /// Disjunction of a list; `false` when empty.
    pub fn or_all(parts: Vec<Assertion>) -> Assertion {
        parts.into_iter().reduce(Assertion::or).unwrap_or(Assertion::Pred(BoolExpr::False))
    }

    pub fn has_exec(&self) -> bool {
        match self {
            Assertion::Exec(..) => true,
            Assertion::And(a, b) | Assertion::Or(a, b) => a.has_exec() || b.has_exec(),
            Assertion::Exists(_, _, a) => a.has_exec(),
            Assertion::Pred(_) | Assertion::Prog(_) => false,
        }
    }

    pub fn has_prog(&self) -> bool {
        match self {
            Assertion::Prog(_) => true,
            Assertion::And(a, b) | Assertion::Or(a, b) => a.has_prog() || b.has_prog(),
            Assertion::Exists(_, _, a) | Assertion::Exec(a, _) => a.has_prog(),
            Assertion::Pred(_) => false,
        }
    }

    /// Programs appearing in `Exec` and `prog` atoms.
    pub fn programs(&self, out: &mut Vec<Stmt>) {
        match self {
            Assertion::Exec(a, c) => {
                if !out.contains(c) {
                    out.push(c.clone());
                }
                a.programs(out)
            }
            Assertion::Prog(c) => {
                if !out.contains(c) {
                    out.push(c.clone())
                }
            }
            Assertion::And(a, b) | Assertion::Or(a, b) => {
                a.programs(out);
                b.programs(out)
            }
            Assertion::Exists(_, _, a) => a.programs(out),
            Assertion::Pred(_) => {}
        }
    }

    /// Free variable names (program, constant and logical).
    pub fn free_vars(&self, out: &mut Vec<String>) {
        match self {
            Assertion::Pred(b) => b.vars(out),
            Assertion::And(a, b) | Assertion::Or(a, b) => {
                a.free_vars(out);
                b.free_vars(out)
            }
            Assertion::Exists(x, _, a) => {
                let mut inner = Vec::new();
                a.free_vars(&mut inner);
                for v in inner {
                    if &v != x && !out.contains(&v) {
                        out.push(v)
                    }
                }
            }
            Assertion::Exec(a, _) => a.free_vars(out),
            Assertion::Prog(_) => {}
        }
    }

    /// Renames free occurrences of a logical variable.
    pub fn rename(&self, from: &str, to: &str) -> Assertion {
        let f = |n: &str| (n == from).then(|| crate::lang::Expr::var(to));
        match self {
            Assertion::Pred(b) => Assertion::Pred(b.subst(&f)),
            Assertion::And(a, b) => Assertion::and(a.rename(from, to), b.rename(from, to)),
            Assertion::Or(a, b) => Assertion::or(a.rename(from, to), b.rename(from, to)),
            Assertion::Exists(x, s, a) if x == from => Assertion::Exists(x.clone(), s.clone(), a.clone()),
            Assertion::Exists(x, s, a) => Assertion::Exists(x.clone(), s.clone(), Box::new(a.rename(from, to))),
            Assertion::Exec(a, c) => Assertion::Exec(Box::new(a.rename(from, to)), c.clone()),
            Assertion::Prog(c) => Assertion::Prog(c.clone()),
        }
    }
}

fn prec(a: &Assertion) -> u8 {
    match a {
        Assertion::Or(..) => 1,
        Assertion::And(..) => 2,
        Assertion::Exists(..) => 0,
        Assertion::Pred(b) => match b {
            BoolExpr::Or(..) => 1,
            BoolExpr::And(..) => 2,
            _ => 3,
        },
        _ => 3,
    }
}

fn write_a(f: &mut fmt::Formatter<'_>, a: &Assertion, min: u8) -> fmt::Result {
    if prec(a) < min {
        write!(f, "(")?;
        write_a(f, a, 0)?;
        return write!(f, ")");
    }
    match a {
        Assertion::Pred(b) => write!(f, "{b}"),
        Assertion::And(x, y) => {
            write_a(f, x, 2)?;
            write!(f, " && ")?;
            write_a(f, y, 3)
        }
        Assertion::Or(x, y) => {
            write_a(f, x, 1)?;
            write!(f, " || ")?;
            write_a(f, y, 2)
        }
        Assertion::Exists(x, s, body) => {
            write!(f, "exists {x} : {s}. ")?;
            write_a(f, body, 0)
        }
        Assertion::Exec(p, c) => {
            write!(f, "Exec[ ")?;
            write_a(f, p, 0)?;
            write!(f, " ; {c} ]")
        }
        Assertion::Prog(c) => write!(f, "prog[ {c} ]"),
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_a(f, self, 0)
    }
}

fn base_checker(vars: &[&[(String, Sort)]], consts: &[Const], free: &[(String, Sort)]) -> Result<Checker, AssertionError> {
    let mut c = Checker::new();
    for k in consts {
        c.declare_const(&k.name, &k.sort)?;
    }
    for vs in vars {
        for (x, s) in *vs {
            c.declare_var(x, s)?;
        }
    }
    for (x, s) in free {
        c.push_logical(x, s)?;
    }
    Ok(c)
}

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Low,
    High,
    Rel,
}

fn check_in(
    a: &Assertion,
    ctx: Ctx,
    here: &mut Checker,
    logical: &mut Vec<(String, Sort)>,
    high_vars: &[(String, Sort)],
    consts: &[Const],
) -> Result<(), AssertionError> {
    match a {
        Assertion::Pred(b) => Ok(here.check_bool(b)?),
        Assertion::And(x, y) | Assertion::Or(x, y) => {
            check_in(x, ctx, here, logical, high_vars, consts)?;
            check_in(y, ctx, here, logical, high_vars, consts)
        }
        Assertion::Exists(x, s, body) => {
            here.push_logical(x, s)?;
            logical.push((x.clone(), s.clone()));
            let r = check_in(body, ctx, here, logical, high_vars, consts);
            here.pop();
            logical.pop();
            r
        }
        Assertion::Exec(p, c) => {
            if ctx != Ctx::Low {
                return Err(AssertionError::Misplaced("an Exec atom"));
            }
            let mut hc = base_checker(&[high_vars], consts, logical)?;
            let mut lg = logical.clone();
            check_in(p, Ctx::High, &mut hc, &mut lg, high_vars, consts)?;
            let prog_checker = base_checker(&[high_vars], consts, &[])?;
            Ok(prog_checker.check_stmt(c)?)
        }
        Assertion::Prog(c) => {
            if ctx != Ctx::Rel {
                return Err(AssertionError::Misplaced("a prog atom"));
            }
            let prog_checker = base_checker(&[high_vars], consts, &[])?;
            Ok(prog_checker.check_stmt(c)?)
        }
    }
}

/// Kind-checks a low-level assertion; `free` lists logical variables in scope.
pub fn check_low(
    a: &Assertion,
    low_vars: &[(String, Sort)],
    high_vars: &[(String, Sort)],
    consts: &[Const],
    free: &[(String, Sort)],
) -> Result<(), AssertionError> {
    let mut c = base_checker(&[low_vars], consts, free)?;
    check_in(a, Ctx::Low, &mut c, &mut free.to_vec(), high_vars, consts)
}

/// Kind-checks a high-level assertion (no Exec or prog atoms).
pub fn check_high(
    a: &Assertion,
    high_vars: &[(String, Sort)],
    consts: &[Const],
    free: &[(String, Sort)],
) -> Result<(), AssertionError> {
    let mut c = base_checker(&[high_vars], consts, free)?;
    check_in(a, Ctx::High, &mut c, &mut free.to_vec(), high_vars, consts)
}

/// Kind-checks a relational assertion over low and high variables.
pub fn check_rel(
    a: &Assertion,
    low_vars: &[(String, Sort)],
    high_vars: &[(String, Sort)],
    consts: &[Const],
) -> Result<(), AssertionError> {
    let mut c = base_checker(&[low_vars, high_vars], consts, &[])?;
    check_in(a, Ctx::Rel, &mut c, &mut Vec::new(), high_vars, consts)
}
