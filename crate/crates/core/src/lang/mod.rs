//! Syntax of the nondeterministic imperative language: sorts, values,
//! expressions and statements, together with a parser, a printer, a sort
//! checker and an expression evaluator.

mod ast;
mod check;
mod eval;
mod lexer;
mod parser;
mod print;

pub use ast::*;
pub use check::{Checker, Kind, SortError};
pub use eval::{eval_bool, eval_expr, eval_expr_in, Env, EvalFault, Frame, Frames};
pub use lexer::{lex, Pos, Tok, Token};
pub use parser::{parse_bool, parse_expr, parse_program, parse_stmt, Header, ParseError, ParseResult, Parser};
