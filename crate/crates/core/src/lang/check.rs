use super::ast::*;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Int,
    Set,
    Array,
}

impl Kind {
    pub fn of(sort: &Sort) -> Kind {
        match sort {
            Sort::IntRange(..) => Kind::Int,
            Sort::SetOver(_) => Kind::Set,
            Sort::ArrayOf(..) => Kind::Array,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SortError {
    #[error("unknown variable `{0}`")]
    Unknown(String),
    #[error("`{0}` is not an assignable program variable")]
    NotAssignable(String),
    #[error("{ctx}: expected {expected:?}, found {found:?}")]
    Mismatch { ctx: String, expected: Kind, found: Kind },
    #[error("`{0}` declared twice")]
    Duplicate(String),
}

#[derive(Clone, Debug)]
struct Entry {
    name: String,
    kind: Kind,
    assignable: bool,
}

/// Kind checker with a scope stack of program variables, constants and
/// logical variables.
#[derive(Clone, Debug, Default)]
pub struct Checker {
    entries: Vec<Entry>,
}

impl Checker {
    pub fn new() -> Checker {
        Checker::default()
    }

    fn add(&mut self, name: &str, sort: &Sort, assignable: bool) -> Result<(), SortError> {
        if self.entries.iter().any(|e| e.name == name) {
            return Err(SortError::Duplicate(name.to_string()));
        }
        self.entries.push(Entry { name: name.to_string(), kind: Kind::of(sort), assignable });
        Ok(())
    }

    pub fn declare_var(&mut self, name: &str, sort: &Sort) -> Result<(), SortError> {
        self.add(name, sort, true)
    }

    pub fn declare_const(&mut self, name: &str, sort: &Sort) -> Result<(), SortError> {
        self.add(name, sort, false)
    }

    /// Opens a logical-variable scope; close it with [`Checker::pop`].
    pub fn push_logical(&mut self, name: &str, sort: &Sort) -> Result<(), SortError> {
        self.add(name, sort, false)
    }

    pub fn pop(&mut self) {
        self.entries.pop();
    }

    pub fn lookup(&self, name: &str) -> Option<Kind> {
        self.entries.iter().rev().find(|e| e.name == name).map(|e| e.kind)
    }

    fn expect(&self, e: &Expr, k: Kind, ctx: &str) -> Result<(), SortError> {
        let found = self.kind(e)?;
        if found == k {
            Ok(())
        } else {
            Err(SortError::Mismatch { ctx: ctx.to_string(), expected: k, found })
        }
    }

    pub fn kind(&self, e: &Expr) -> Result<Kind, SortError> {
        Ok(match e {
            Expr::IntLit(_) => Kind::Int,
            Expr::Var(x) => self.lookup(x).ok_or_else(|| SortError::Unknown(x.clone()))?,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::BitOr(a, b) | Expr::Shl(a, b) => {
                self.expect(a, Kind::Int, "arithmetic operand")?;
                self.expect(b, Kind::Int, "arithmetic operand")?;
                Kind::Int
            }
            Expr::SetLit(es) => {
                for x in es {
                    self.expect(x, Kind::Int, "set element")?;
                }
                Kind::Set
            }
            Expr::SetSingleton(a) => {
                self.expect(a, Kind::Int, "set element")?;
                Kind::Set
            }
            Expr::SetUnion(a, b) => {
                self.expect(a, Kind::Set, "union operand")?;
                self.expect(b, Kind::Set, "union operand")?;
                Kind::Set
            }
            Expr::ArrayIndex(a, i) => {
                self.expect(a, Kind::Array, "indexed expression")?;
                self.expect(i, Kind::Int, "index")?;
                Kind::Int
            }
            Expr::Length(a) => {
                self.expect(a, Kind::Array, "len argument")?;
                Kind::Int
            }
            Expr::Sum2(a) => {
                self.expect(a, Kind::Set, "sum2 argument")?;
                Kind::Int
            }
        })
    }

    pub fn check_bool(&self, b: &BoolExpr) -> Result<(), SortError> {
        match b {
            BoolExpr::True | BoolExpr::False => Ok(()),
            BoolExpr::Eq(x, y) => {
                let k = self.kind(x)?;
                self.expect(y, k, "equality operand")
            }
            BoolExpr::Lt(x, y) | BoolExpr::Le(x, y) => {
                self.expect(x, Kind::Int, "comparison operand")?;
                self.expect(y, Kind::Int, "comparison operand")
            }
            BoolExpr::Member(x, y) => {
                self.expect(x, Kind::Int, "member")?;
                self.expect(y, Kind::Set, "membership set")
            }
            BoolExpr::Not(x) => self.check_bool(x),
            BoolExpr::And(x, y) | BoolExpr::Or(x, y) => {
                self.check_bool(x)?;
                self.check_bool(y)
            }
        }
    }

    fn target(&self, x: &str) -> Result<Kind, SortError> {
        match self.entries.iter().rev().find(|e| e.name == x) {
            Some(e) if e.assignable => Ok(e.kind),
            Some(_) => Err(SortError::NotAssignable(x.to_string())),
            None => Err(SortError::Unknown(x.to_string())),
        }
    }

    pub fn check_stmt(&self, s: &Stmt) -> Result<(), SortError> {
        match s {
            Stmt::Skip => Ok(()),
            Stmt::Assign(x, e) => {
                let k = self.target(x)?;
                self.expect(e, k, &format!("assignment to `{x}`"))
            }
            Stmt::NondetAssign(x, a, b) => {
                let k = self.target(x)?;
                if k != Kind::Int {
                    return Err(SortError::Mismatch { ctx: format!("nondet target `{x}`"), expected: Kind::Int, found: k });
                }
                self.expect(a, Kind::Int, "nondet bound")?;
                self.expect(b, Kind::Int, "nondet bound")
            }
            Stmt::Test(b) | Stmt::Assert(b) => self.check_bool(b),
            Stmt::Choice(a, b) | Stmt::Seq(a, b) => {
                self.check_stmt(a)?;
                self.check_stmt(b)
            }
            Stmt::While(b, c) => {
                self.check_bool(b)?;
                self.check_stmt(c)
            }
        }
    }
}
