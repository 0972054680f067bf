use super::ast::*;
use crate::scalar::Scalar;
use crate::ExactInt;
use thiserror::Error;

/// Largest shift amount accepted by exact evaluation.
const MAX_SHIFT: u32 = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalFault {
    #[error("arithmetic overflow")]
    Overflow,
    #[error("index {index} out of bounds for length {len}")]
    IndexOutOfBounds { index: String, len: usize },
    #[error("negative shift amount")]
    NegativeShift,
    #[error("shift amount {0} exceeds {MAX_SHIFT}")]
    ShiftTooLarge(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("ill-kinded operand for {0}")]
    Kind(&'static str),
    #[error("value does not fit a machine word")]
    Unrepresentable,
}

/// Variable lookup during evaluation.
pub trait Env {
    fn lookup(&self, name: &str) -> Option<&Value>;
}

/// Parallel slices of names and values.
#[derive(Clone, Copy)]
pub struct Frame<'a> {
    pub names: &'a [String],
    pub values: &'a [Value],
}

/// A stack of frames; later frames shadow earlier ones.
pub struct Frames<'a>(pub &'a [Frame<'a>]);

impl Env for Frames<'_> {
    fn lookup(&self, name: &str) -> Option<&Value> {
        for fr in self.0.iter().rev() {
            if let Some(i) = fr.names.iter().rposition(|n| n == name) {
                return fr.values.get(i);
            }
        }
        None
    }
}

impl Env for [(String, Value)] {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

impl Env for Vec<(String, Value)> {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.as_slice().lookup(name)
    }
}

fn lift<Z: Scalar>(v: &Value) -> Value<Z> {
    match v {
        Value::Int(i) => Value::Int(Z::from_i64(*i)),
        Value::Set(s) => Value::Set(s.iter().map(|x| Z::from_i64(*x)).collect()),
        Value::Array(a) => Value::Array(a.iter().map(|x| Z::from_i64(*x)).collect()),
    }
}

fn lower<Z: Scalar>(v: Value<Z>) -> Result<Value, EvalFault> {
    let w = |z: &Z| z.to_i64().ok_or(EvalFault::Unrepresentable);
    Ok(match v {
        Value::Int(i) => Value::Int(w(&i)?),
        Value::Set(s) => Value::Set(s.iter().map(w).collect::<Result<_, _>>()?),
        Value::Array(a) => Value::Array(a.iter().map(w).collect::<Result<_, _>>()?),
    })
}

fn int<Z: Scalar>(v: Value<Z>, what: &'static str) -> Result<Z, EvalFault> {
    match v {
        Value::Int(i) => Ok(i),
        _ => Err(EvalFault::Kind(what)),
    }
}

fn shift_amount<Z: Scalar>(z: &Z) -> Result<u32, EvalFault> {
    if *z < Z::zero() {
        return Err(EvalFault::NegativeShift);
    }
    match z.to_u32() {
        Some(s) if s <= MAX_SHIFT => Ok(s),
        _ => Err(EvalFault::ShiftTooLarge(z.to_string())),
    }
}

/// Evaluates an expression in the integer domain `Z`.
pub fn eval_expr_in<Z: Scalar, E: Env + ?Sized>(e: &Expr, env: &E) -> Result<Value<Z>, EvalFault> {
    let i = |x: &Expr, what| -> Result<Z, EvalFault> { int(eval_expr_in::<Z, E>(x, env)?, what) };
    Ok(match e {
        Expr::IntLit(v) => Value::Int(Z::from_i64(*v)),
        Expr::Var(x) => lift(env.lookup(x).ok_or_else(|| EvalFault::Unbound(x.clone()))?),
        Expr::Add(a, b) => Value::Int(i(a, "+")?.checked_add(&i(b, "+")?).ok_or(EvalFault::Overflow)?),
        Expr::Sub(a, b) => Value::Int(i(a, "-")?.checked_sub(&i(b, "-")?).ok_or(EvalFault::Overflow)?),
        Expr::Mul(a, b) => Value::Int(i(a, "*")?.checked_mul(&i(b, "*")?).ok_or(EvalFault::Overflow)?),
        Expr::BitOr(a, b) => Value::Int(i(a, "|")?.bit_or(&i(b, "|")?)),
        Expr::Shl(a, b) => {
            let base = i(a, "<<")?;
            let s = shift_amount(&i(b, "<<")?)?;
            Value::Int(base.shl_checked(s).ok_or(EvalFault::Overflow)?)
        }
        Expr::SetLit(es) => {
            let mut v = es.iter().map(|x| i(x, "set literal")).collect::<Result<Vec<_>, _>>()?;
            v.sort();
            v.dedup();
            Value::Set(v)
        }
        Expr::SetSingleton(a) => Value::Set(vec![i(a, "set literal")?]),
        Expr::SetUnion(a, b) => match (eval_expr_in::<Z, E>(a, env)?, eval_expr_in::<Z, E>(b, env)?) {
            (Value::Set(mut x), Value::Set(y)) => {
                x.extend(y);
                x.sort();
                x.dedup();
                Value::Set(x)
            }
            _ => return Err(EvalFault::Kind("∪")),
        },
        Expr::ArrayIndex(a, ix) => match eval_expr_in::<Z, E>(a, env)? {
            Value::Array(arr) => {
                let k = i(ix, "index")?;
                match k.to_usize() {
                    Some(u) if u < arr.len() => Value::Int(arr[u].clone()),
                    _ => return Err(EvalFault::IndexOutOfBounds { index: k.to_string(), len: arr.len() }),
                }
            }
            _ => return Err(EvalFault::Kind("index")),
        },
        Expr::Length(a) => match eval_expr_in::<Z, E>(a, env)? {
            Value::Array(arr) => Value::Int(Z::from_i64(arr.len() as i64)),
            _ => return Err(EvalFault::Kind("len")),
        },
        Expr::Sum2(a) => match eval_expr_in::<Z, E>(a, env)? {
            Value::Set(s) => {
                let mut acc = Z::zero();
                for x in &s {
                    let p = Z::one().shl_checked(shift_amount(x)?).ok_or(EvalFault::Overflow)?;
                    acc = acc.checked_add(&p).ok_or(EvalFault::Overflow)?;
                }
                Value::Int(acc)
            }
            _ => return Err(EvalFault::Kind("sum2")),
        },
    })
}

/// Evaluates an expression to a stored value. Word overflow is retried with
/// exact integers; results that still do not fit a word are reported as
/// [`EvalFault::Unrepresentable`].
pub fn eval_expr<E: Env + ?Sized>(e: &Expr, env: &E) -> Result<Value, EvalFault> {
    match eval_expr_in::<i64, E>(e, env) {
        Err(EvalFault::Overflow) => lower(eval_expr_in::<ExactInt, E>(e, env)?),
        r => r,
    }
}

fn bool_in<Z: Scalar, E: Env + ?Sized>(b: &BoolExpr, env: &E) -> Result<bool, EvalFault> {
    let ints = |x: &Expr, y: &Expr, what| -> Result<(Z, Z), EvalFault> {
        Ok((int(eval_expr_in::<Z, E>(x, env)?, what)?, int(eval_expr_in::<Z, E>(y, env)?, what)?))
    };
    Ok(match b {
        BoolExpr::True => true,
        BoolExpr::False => false,
        BoolExpr::Eq(x, y) => eval_expr_in::<Z, E>(x, env)? == eval_expr_in::<Z, E>(y, env)?,
        BoolExpr::Lt(x, y) => {
            let (a, c) = ints(x, y, "<")?;
            a < c
        }
        BoolExpr::Le(x, y) => {
            let (a, c) = ints(x, y, "<=")?;
            a <= c
        }
        BoolExpr::Member(x, y) => {
            let a = int(eval_expr_in::<Z, E>(x, env)?, "in")?;
            match eval_expr_in::<Z, E>(y, env)? {
                Value::Set(s) => s.binary_search(&a).is_ok(),
                _ => return Err(EvalFault::Kind("in")),
            }
        }
        BoolExpr::Not(x) => !bool_in::<Z, E>(x, env)?,
        BoolExpr::And(x, y) => bool_in::<Z, E>(x, env)? && bool_in::<Z, E>(y, env)?,
        BoolExpr::Or(x, y) => bool_in::<Z, E>(x, env)? || bool_in::<Z, E>(y, env)?,
    })
}

/// Evaluates a boolean expression with exact integer comparisons.
pub fn eval_bool<E: Env + ?Sized>(b: &BoolExpr, env: &E) -> Result<bool, EvalFault> {
    match bool_in::<i64, E>(b, env) {
        Err(EvalFault::Overflow) => bool_in::<ExactInt, E>(b, env),
        r => r,
    }
}


#[cfg(test)]
mod tests {
    use super::super::parser::{parse_bool, parse_expr};
    use super::*;

    fn env() -> Vec<(String, Value)> {
        vec![
            ("x".into(), Value::Int(5)),
            ("s".into(), Value::set([1, 2])),
            ("a".into(), Value::Array(vec![3, 0, 2])),
        ]
    }

    fn ev(src: &str) -> Result<Value, EvalFault> {
        eval_expr(&parse_expr(src).unwrap(), &env())
    }

    #[test]
    fn arithmetic_and_sets() {
        assert_eq!(ev("x | 1 << a[0]"), Ok(Value::Int(13)));
        assert_eq!(ev("s ∪ {a[0]}"), Ok(Value::set([1, 2, 3])));
        assert_eq!(ev("sum2(s)"), Ok(Value::Int(6)));
        assert_eq!(ev("len(a)"), Ok(Value::Int(3)));
        assert_eq!(ev("{x, 1, x}"), Ok(Value::set([1, 5])));
    }

    #[test]
    fn faults() {
        assert!(matches!(ev("a[3]"), Err(EvalFault::IndexOutOfBounds { len: 3, .. })));
        assert!(matches!(ev("a[0 - 1]"), Err(EvalFault::IndexOutOfBounds { .. })));
        assert_eq!(ev("1 << (0 - 1)"), Err(EvalFault::NegativeShift));
        assert_eq!(ev("y"), Err(EvalFault::Unbound("y".into())));
    }

    #[test]
    fn overflow_is_exact_in_comparisons() {
        let b = parse_bool("(1 << 70) - (1 << 70) + x == 5").unwrap();
        assert_eq!(eval_bool(&b, &env()), Ok(true));
        let b = parse_bool("9223372036854775807 + 1 > 9223372036854775807").unwrap();
        assert_eq!(eval_bool(&b, &env()), Ok(true));
        assert_eq!(ev("1 << 70"), Err(EvalFault::Unrepresentable));
        assert_eq!(ev("(1 << 70) - (1 << 70) + 2"), Ok(Value::Int(2)));
    }
}
