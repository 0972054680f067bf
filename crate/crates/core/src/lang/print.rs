//! Concrete syntax output. Printing then parsing yields the same tree.

use super::ast::*;
use std::fmt;

impl<Z: fmt::Display> fmt::Display for Value<Z> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, xs: &[Z]| -> fmt::Result {
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            Ok(())
        };
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Set(s) => {
                write!(f, "{{")?;
                list(f, s)?;
                write!(f, "}}")
            }
            Value::Array(a) => {
                write!(f, "[")?;
                list(f, a)?;
                write!(f, "]")
            }
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::IntRange(lo, hi) => write!(f, "int[{lo}..{hi}]"),
            Sort::SetOver(u) => {
                let contiguous = u.len() > 1 && u.windows(2).all(|w| w[1] == w[0] + 1);
                if contiguous {
                    write!(f, "set{{{}..{}}}", u[0], u[u.len() - 1])
                } else {
                    let parts: Vec<String> = u.iter().map(|x| x.to_string()).collect();
                    write!(f, "set{{{}}}", parts.join(", "))
                }
            }
            Sort::ArrayOf(n, e) => write!(f, "array[{n}] of {e}"),
        }
    }
}

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::BitOr(..) => 1,
        Expr::Shl(..) => 2,
        Expr::Add(..) | Expr::Sub(..) | Expr::SetUnion(..) => 3,
        Expr::Mul(..) => 4,
        _ => 5,
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    let p = expr_prec(e);
    if p < min {
        write!(f, "(")?;
        write_expr(f, e, 0)?;
        return write!(f, ")");
    }
    let bin = |f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr| -> fmt::Result {
        write_expr(f, a, p)?;
        write!(f, " {op} ")?;
        write_expr(f, b, p + 1)
    };
    match e {
        Expr::IntLit(v) => write!(f, "{v}"),
        Expr::Var(x) => write!(f, "{x}"),
        Expr::Add(a, b) => bin(f, a, "+", b),
        Expr::Sub(a, b) => bin(f, a, "-", b),
        Expr::Mul(a, b) => bin(f, a, "*", b),
        Expr::BitOr(a, b) => bin(f, a, "|", b),
        Expr::Shl(a, b) => bin(f, a, "<<", b),
        Expr::SetUnion(a, b) => bin(f, a, "∪", b),
        Expr::SetLit(es) => {
            write!(f, "{{")?;
            for (i, x) in es.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_expr(f, x, 0)?;
            }
            write!(f, "}}")
        }
        Expr::SetSingleton(a) => {
            write!(f, "{{")?;
            write_expr(f, a, 0)?;
            write!(f, "}}")
        }
        Expr::ArrayIndex(a, i) => {
            write_expr(f, a, 5)?;
            write!(f, "[")?;
            write_expr(f, i, 0)?;
            write!(f, "]")
        }
        Expr::Length(a) => {
            write!(f, "len(")?;
            write_expr(f, a, 0)?;
            write!(f, ")")
        }
        Expr::Sum2(a) => {
            write!(f, "sum2(")?;
            write_expr(f, a, 0)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

fn bool_prec(b: &BoolExpr) -> u8 {
    match b {
        BoolExpr::Or(..) => 1,
        BoolExpr::And(..) => 2,
        BoolExpr::Not(..) => 3,
        _ => 4,
    }
}

fn write_bool(f: &mut fmt::Formatter<'_>, b: &BoolExpr, min: u8) -> fmt::Result {
    let p = bool_prec(b);
    if p < min {
        write!(f, "(")?;
        write_bool(f, b, 0)?;
        return write!(f, ")");
    }
    match b {
        BoolExpr::True => write!(f, "true"),
        BoolExpr::False => write!(f, "false"),
        BoolExpr::Eq(a, c) => write!(f, "{a} == {c}"),
        BoolExpr::Lt(a, c) => write!(f, "{a} < {c}"),
        BoolExpr::Le(a, c) => write!(f, "{a} <= {c}"),
        BoolExpr::Member(a, c) => write!(f, "{a} in {c}"),
        BoolExpr::Not(a) => match &**a {
            BoolExpr::Eq(x, y) => write!(f, "{x} != {y}"),
            _ => {
                write!(f, "!")?;
                if bool_prec(a) == 4 && !matches!(**a, BoolExpr::True | BoolExpr::False) {
                    write!(f, "(")?;
                    write_bool(f, a, 0)?;
                    write!(f, ")")
                } else {
                    write_bool(f, a, 3)
                }
            }
        },
        BoolExpr::And(a, c) => {
            write_bool(f, a, 2)?;
            write!(f, " && ")?;
            write_bool(f, c, 3)
        }
        BoolExpr::Or(a, c) => {
            write_bool(f, a, 1)?;
            write!(f, " || ")?;
            write_bool(f, c, 2)
        }
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bool(f, self, 0)
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Skip => write!(f, "skip"),
            Stmt::Assign(x, e) => write!(f, "{x} := {e}"),
            Stmt::NondetAssign(x, a, b) => write!(f, "{x} := nondet({a}, {b})"),
            Stmt::Test(b) => write!(f, "assume({b})"),
            Stmt::Assert(b) => write!(f, "assert({b})"),
            Stmt::Choice(a, b) => write!(f, "choice({a}, {b})"),
            Stmt::While(b, c) => write!(f, "while ({b}) {{ {c} }}"),
            Stmt::Seq(a, b) => {
                if matches!(**a, Stmt::Seq(..)) {
                    write!(f, "{{ {a} }}; {b}")
                } else {
                    write!(f, "{a}; {b}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse_bool, parse_expr, parse_stmt};
    use super::*;

    #[test]
    fn minimal_parentheses() {
        let e = parse_expr("x | (1 << a[i])").unwrap();
        assert_eq!(e.to_string(), "x | 1 << a[i]");
        let e = parse_expr("(x - 1) - (y - 2)").unwrap();
        assert_eq!(e.to_string(), "x - 1 - (y - 2)");
    }

    #[test]
    fn negation_forms() {
        for src in ["x != 3", "!(x < 3)", "!(a && b == 1) || true", "!true"] {
            let src = src.replace("a && b == 1", "x == 0 && y == 1");
            let b = parse_bool(&src).unwrap();
            assert_eq!(parse_bool(&b.to_string()).unwrap(), b, "{src}");
        }
    }

    #[test]
    fn left_nested_sequence_round_trips() {
        let s = Stmt::seq(Stmt::seq(Stmt::Skip, Stmt::Skip), Stmt::Skip);
        assert_eq!(s.to_string(), "{ skip; skip }; skip");
        assert_eq!(parse_stmt(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn sorts_and_values() {
        assert_eq!(Sort::set_over(0..4).to_string(), "set{0..3}");
        assert_eq!(Sort::array(2, Sort::int(0, 1)).to_string(), "array[2] of int[0..1]");
        assert_eq!(Value::set([2, 1]).to_string(), "{1,2}");
    }
}
