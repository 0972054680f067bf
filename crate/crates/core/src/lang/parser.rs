use super::ast::*;
use super::lexer::{lex, Pos, Tok, Token};
use crate::assertions::Assertion;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: expected {expected}, found {found}")]
    Unexpected { pos: Pos, expected: String, found: String },
}

pub type ParseResult<T> = Result<T, ParseError>;

const RESERVED: &[&str] = &[
    "skip", "nondet", "assume", "assert", "choice", "while", "if", "then", "else", "in", "len", "sum2", "true",
    "false", "exists", "Exec", "prog", "var", "const", "program", "of",
];

/// Declarations shared by program, triple and proof files.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Header {
    /// Variables declared with plain `var`.
    pub vars: Vec<(String, Sort)>,
    pub low_vars: Vec<(String, Sort)>,
    pub high_vars: Vec<(String, Sort)>,
    pub consts: Vec<Const>,
    pub programs: Vec<(String, Stmt)>,
}

/// Recursive-descent parser over a token vector.
pub struct Parser {
    toks: Vec<Token>,
    i: usize,
    programs: HashMap<String, Stmt>,
}

impl Parser {
    pub fn new(src: &str, directives: bool) -> ParseResult<Parser> {
        Ok(Parser { toks: lex(src, directives)?, i: 0, programs: HashMap::new() })
    }

    /// Makes `name` usable as a statement that expands to `body`.
    pub fn define_program(&mut self, name: &str, body: Stmt) {
        self.programs.insert(name.to_string(), body);
    }

    pub fn programs(&self) -> &HashMap<String, Stmt> {
        &self.programs
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    pub fn advance(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    pub fn at_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == k)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn eat_kw(&mut self, k: &str) -> bool {
        if self.at_kw(k) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn error<T>(&self, expected: &str) -> ParseResult<T> {
        Err(ParseError::Unexpected { pos: self.pos(), expected: expected.to_string(), found: self.peek().to_string() })
    }

    pub fn expect_sym(&mut self, s: &str) -> ParseResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(&format!("`{s}`"))
        }
    }

    pub fn expect_kw(&mut self, k: &str) -> ParseResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.error(&format!("`{k}`"))
        }
    }

    pub fn expect_ident(&mut self) -> ParseResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.advance();
                Ok(s)
            }
            _ => self.error("identifier"),
        }
    }

    pub fn expect_eof(&mut self) -> ParseResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            self.error("end of input")
        }
    }

    fn signed_int(&mut self) -> ParseResult<i64> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(if neg { -v } else { v })
            }
            _ => self.error("integer"),
        }
    }

    pub fn parse_sort(&mut self) -> ParseResult<Sort> {
        if self.eat_kw("int") {
            self.expect_sym("[")?;
            let lo = self.signed_int()?;
            self.expect_sym("..")?;
            let hi = self.signed_int()?;
            self.expect_sym("]")?;
            if hi < lo {
                return Err(ParseError::Syntax { pos: self.pos(), msg: format!("empty range int[{lo}..{hi}]") });
            }
            Ok(Sort::IntRange(lo, hi))
        } else if self.eat_kw("set") {
            self.expect_sym("{")?;
            let mut elems = Vec::new();
            if !self.at_sym("}") {
                let first = self.signed_int()?;
                if self.eat_sym("..") {
                    let hi = self.signed_int()?;
                    elems.extend(first..=hi);
                } else {
                    elems.push(first);
                    while self.eat_sym(",") {
                        elems.push(self.signed_int()?);
                    }
                }
            }
            self.expect_sym("}")?;
            if elems.len() > 20 {
                return Err(ParseError::Syntax { pos: self.pos(), msg: "set universe larger than 20".into() });
            }
            Ok(Sort::set_over(elems))
        } else if self.eat_kw("array") {
            self.expect_sym("[")?;
            let n = self.signed_int()?;
            self.expect_sym("]")?;
            self.expect_kw("of")?;
            let elem = self.parse_sort()?;
            if !matches!(elem, Sort::IntRange(..)) || n < 0 {
                return Err(ParseError::Syntax {
                    pos: self.pos(),
                    msg: "arrays need a non-negative length and integer elements".into(),
                });
            }
            Ok(Sort::array(n as usize, elem))
        } else {
            self.error("sort")
        }
    }

    pub fn parse_value(&mut self) -> ParseResult<Value> {
        if self.eat_sym("{") {
            let mut v = Vec::new();
            if !self.at_sym("}") {
                v.push(self.signed_int()?);
                while self.eat_sym(",") {
                    v.push(self.signed_int()?);
                }
            }
            self.expect_sym("}")?;
            Ok(Value::set(v))
        } else if self.eat_sym("[") {
            let mut v = Vec::new();
            if !self.at_sym("]") {
                v.push(self.signed_int()?);
                while self.eat_sym(",") {
                    v.push(self.signed_int()?);
                }
            }
            self.expect_sym("]")?;
            Ok(Value::Array(v))
        } else if self.eat_sym("∅") {
            Ok(Value::Set(vec![]))
        } else {
            Ok(Value::Int(self.signed_int()?))
        }
    }

    pub fn parse_expr(&mut self) -> ParseResult<Expr> {
        let mut l = self.shift_expr()?;
        while self.at_sym("|") {
            self.advance();
            l = Expr::bitor(l, self.shift_expr()?);
        }
        Ok(l)
    }

    fn shift_expr(&mut self) -> ParseResult<Expr> {
        let mut l = self.add_expr()?;
        while self.eat_sym("<<") {
            l = Expr::shl(l, self.add_expr()?);
        }
        Ok(l)
    }

    fn add_expr(&mut self) -> ParseResult<Expr> {
        let mut l = self.mul_expr()?;
        loop {
            if self.eat_sym("+") {
                l = Expr::add(l, self.mul_expr()?);
            } else if self.eat_sym("-") {
                l = Expr::sub(l, self.mul_expr()?);
            } else if self.eat_sym("\\/") {
                l = Expr::union(l, self.mul_expr()?);
            } else {
                return Ok(l);
            }
        }
    }

    fn mul_expr(&mut self) -> ParseResult<Expr> {
        let mut l = self.primary_expr()?;
        while self.eat_sym("*") {
            l = Expr::mul(l, self.primary_expr()?);
        }
        Ok(l)
    }

    fn primary_expr(&mut self) -> ParseResult<Expr> {
        let mut e = match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Expr::IntLit(v)
            }
            Tok::Sym("-") => Expr::IntLit(self.signed_int()?),
            Tok::Sym("(") => {
                self.advance();
                let e = self.parse_expr()?;
                self.expect_sym(")")?;
                e
            }
            Tok::Sym("∅") => {
                self.advance();
                Expr::SetLit(vec![])
            }
            Tok::Sym("{") => {
                self.advance();
                let mut elems = Vec::new();
                if !self.at_sym("}") {
                    elems.push(self.parse_expr()?);
                    while self.eat_sym(",") {
                        elems.push(self.parse_expr()?);
                    }
                }
                self.expect_sym("}")?;
                if elems.len() == 1 {
                    Expr::SetSingleton(Box::new(elems.pop().unwrap()))
                } else {
                    Expr::SetLit(elems)
                }
            }
            Tok::Ident(k) if k == "len" || k == "sum2" => {
                self.advance();
                self.expect_sym("(")?;
                let a = Box::new(self.parse_expr()?);
                self.expect_sym(")")?;
                if k == "len" {
                    Expr::Length(a)
                } else {
                    Expr::Sum2(a)
                }
            }
            Tok::Ident(_) => Expr::Var(self.expect_ident()?),
            _ => return self.error("expression"),
        };
        while self.eat_sym("[") {
            let i = self.parse_expr()?;
            self.expect_sym("]")?;
            e = Expr::index(e, i);
        }
        Ok(e)
    }

    pub fn parse_bool(&mut self) -> ParseResult<BoolExpr> {
        let mut l = self.bool_and()?;
        while self.eat_sym("||") {
            l = BoolExpr::or(l, self.bool_and()?);
        }
        Ok(l)
    }

    fn bool_and(&mut self) -> ParseResult<BoolExpr> {
        let mut l = self.bool_not()?;
        while self.eat_sym("&&") || self.eat_sym("/\\") {
            l = BoolExpr::and(l, self.bool_not()?);
        }
        Ok(l)
    }

    fn bool_not(&mut self) -> ParseResult<BoolExpr> {
        if self.eat_sym("!") {
            Ok(BoolExpr::not(self.bool_not()?))
        } else {
            self.bool_atom()
        }
    }

    fn at_expr_continuation(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Sym("==" | "=" | "!=" | "<" | "<=" | ">" | ">=" | "+" | "-" | "*" | "|" | "<<" | "\\/" | "[")
        ) || self.at_kw("in")
    }

    fn bool_atom(&mut self) -> ParseResult<BoolExpr> {
        if self.eat_kw("true") {
            return Ok(BoolExpr::True);
        }
        if self.eat_kw("false") {
            return Ok(BoolExpr::False);
        }
        if self.at_sym("(") {
            let save = self.i;
            self.advance();
            if let Ok(b) = self.parse_bool() {
                if self.eat_sym(")") && !self.at_expr_continuation() {
                    return Ok(b);
                }
            }
            self.i = save;
        }
        self.comparison()
    }

    fn comparison(&mut self) -> ParseResult<BoolExpr> {
        let a = self.parse_expr()?;
        let op = match self.peek().clone() {
            Tok::Sym(s @ ("==" | "=" | "!=" | "<" | "<=" | ">" | ">=")) => s,
            Tok::Ident(k) if k == "in" => "in",
            _ => return self.error("comparison operator"),
        };
        self.advance();
        let b = self.parse_expr()?;
        Ok(match op {
            "==" | "=" => BoolExpr::eq(a, b),
            "!=" => BoolExpr::not(BoolExpr::eq(a, b)),
            "<" => BoolExpr::lt(a, b),
            "<=" => BoolExpr::le(a, b),
            ">" => BoolExpr::lt(b, a),
            ">=" => BoolExpr::le(b, a),
            _ => BoolExpr::member(a, b),
        })
    }

    fn at_stmts_end(&self) -> bool {
        matches!(self.peek(), Tok::Sym("}" | ")" | "," | "]") | Tok::Eof | Tok::Directive(_))
    }

    /// A `;`-separated statement list, right-nested; `skip` when empty.
    pub fn parse_stmts(&mut self) -> ParseResult<Stmt> {
        let mut v = Vec::new();
        while !self.at_stmts_end() {
            v.push(self.parse_stmt()?);
            if self.eat_sym(";") {
                continue;
            }
            let closed_by_brace = matches!(self.toks[self.i.saturating_sub(1)].tok, Tok::Sym("}"));
            if !closed_by_brace {
                break;
            }
        }
        Ok(Stmt::seq_all(v))
    }

    pub fn parse_block(&mut self) -> ParseResult<Stmt> {
        self.expect_sym("{")?;
        let s = self.parse_stmts()?;
        self.expect_sym("}")?;
        Ok(s)
    }

    pub fn parse_paren_bool(&mut self) -> ParseResult<BoolExpr> {
        self.expect_sym("(")?;
        let b = self.parse_bool()?;
        self.expect_sym(")")?;
        Ok(b)
    }

    pub fn parse_stmt(&mut self) -> ParseResult<Stmt> {
        let kw = match self.peek() {
            Tok::Ident(k) => k.clone(),
            Tok::Sym("{") => return self.parse_block(),
            _ => return self.error("statement"),
        };
        match kw.as_str() {
            "skip" => {
                self.advance();
                Ok(Stmt::Skip)
            }
            "assume" => {
                self.advance();
                Ok(Stmt::Test(self.parse_paren_bool()?))
            }
            "assert" => {
                self.advance();
                Ok(Stmt::Assert(self.parse_paren_bool()?))
            }
            "choice" => {
                self.advance();
                self.expect_sym("(")?;
                let a = self.parse_stmts()?;
                self.expect_sym(",")?;
                let b = self.parse_stmts()?;
                self.expect_sym(")")?;
                Ok(Stmt::choice(a, b))
            }
            "while" => {
                self.advance();
                let b = self.parse_paren_bool()?;
                let body = self.parse_block()?;
                Ok(Stmt::while_(b, body))
            }
            "if" => {
                self.advance();
                let b = self.parse_paren_bool()?;
                self.eat_kw("then");
                let c1 = self.parse_block()?;
                let c2 = if self.eat_kw("else") { self.parse_block()? } else { Stmt::Skip };
                Ok(Stmt::if_then_else(b, c1, c2))
            }
            _ => {
                let pos = self.pos();
                let x = self.expect_ident()?;
                if self.eat_sym(":=") || self.eat_sym("=") {
                    if self.at_kw("nondet") && matches!(self.peek_at(1), Tok::Sym("(")) {
                        self.advance();
                        self.advance();
                        let lo = self.parse_expr()?;
                        self.expect_sym(",")?;
                        let hi = self.parse_expr()?;
                        self.expect_sym(")")?;
                        Ok(Stmt::NondetAssign(x, lo, hi))
                    } else {
                        Ok(Stmt::Assign(x, self.parse_expr()?))
                    }
                } else if let Some(body) = self.programs.get(&x) {
                    Ok(body.clone())
                } else {
                    Err(ParseError::Syntax { pos, msg: format!("unknown program `{x}`") })
                }
            }
        }
    }

    /// `name : sort (, name : sort)*`
    pub fn parse_binders(&mut self) -> ParseResult<Vec<(String, Sort)>> {
        let mut out = Vec::new();
        loop {
            let x = self.expect_ident()?;
            self.expect_sym(":")?;
            out.push((x, self.parse_sort()?));
            if !self.eat_sym(",") {
                return Ok(out);
            }
        }
    }

    pub fn parse_assertion(&mut self) -> ParseResult<Assertion> {
        let mut l = self.assertion_and()?;
        while self.eat_sym("||") {
            l = Assertion::Or(Box::new(l), Box::new(self.assertion_and()?));
        }
        Ok(l)
    }

    fn assertion_and(&mut self) -> ParseResult<Assertion> {
        let mut l = self.assertion_not()?;
        while self.eat_sym("&&") || self.eat_sym("/\\") {
            l = Assertion::And(Box::new(l), Box::new(self.assertion_not()?));
        }
        Ok(l)
    }

    fn assertion_not(&mut self) -> ParseResult<Assertion> {
        let pos = self.pos();
        if self.eat_sym("!") {
            match self.assertion_not()? {
                Assertion::Pred(b) => Ok(Assertion::Pred(BoolExpr::not(b))),
                _ => Err(ParseError::Syntax { pos, msg: "negation applies only to predicates".into() }),
            }
        } else {
            self.assertion_atom()
        }
    }

    fn assertion_atom(&mut self) -> ParseResult<Assertion> {
        if self.eat_kw("exists") {
            let binders = self.parse_binders()?;
            self.expect_sym(".")?;
            let mut body = self.parse_assertion()?;
            for (x, s) in binders.into_iter().rev() {
                body = Assertion::Exists(x, s, Box::new(body));
            }
            return Ok(body);
        }
        if self.at_kw("Exec") && matches!(self.peek_at(1), Tok::Sym("[")) {
            self.advance();
            self.advance();
            let high = self.parse_assertion()?;
            self.expect_sym(";")?;
            let prog = self.parse_stmts()?;
            self.expect_sym("]")?;
            return Ok(Assertion::Exec(Box::new(high), prog));
        }
        if self.at_kw("prog") && matches!(self.peek_at(1), Tok::Sym("[")) {
            self.advance();
            self.advance();
            let prog = self.parse_stmts()?;
            self.expect_sym("]")?;
            return Ok(Assertion::Prog(prog));
        }
        if self.at_sym("(") {
            let save = self.i;
            self.advance();
            if let Ok(a) = self.parse_assertion() {
                if self.eat_sym(")") && !self.at_expr_continuation() {
                    return Ok(a);
                }
            }
            self.i = save;
        }
        Ok(Assertion::Pred(self.bool_atom()?))
    }

    /// Parses one header declaration if present; returns whether one was consumed.
    pub fn parse_header_item(&mut self, h: &mut Header) -> ParseResult<bool> {
        let scope = if (self.at_kw("low") || self.at_kw("high")) && matches!(self.peek_at(1), Tok::Ident(k) if k == "var") {
            let s = if self.at_kw("low") { 1 } else { 2 };
            self.advance();
            s
        } else {
            0
        };
        if self.eat_kw("var") {
            let x = self.expect_ident()?;
            self.expect_sym(":")?;
            let s = self.parse_sort()?;
            self.expect_sym(";")?;
            match scope {
                0 => h.vars.push((x, s)),
                1 => h.low_vars.push((x, s)),
                _ => h.high_vars.push((x, s)),
            }
            return Ok(true);
        }
        if self.eat_kw("const") {
            let pos = self.pos();
            let x = self.expect_ident()?;
            self.expect_sym(":")?;
            let sort = self.parse_sort()?;
            self.expect_sym("=")?;
            let value = self.parse_value()?;
            self.expect_sym(";")?;
            if !sort.contains(&value) {
                return Err(ParseError::Syntax { pos, msg: format!("constant `{x}` is outside its sort") });
            }
            h.consts.push(Const { name: x, sort, value });
            return Ok(true);
        }
        if self.eat_kw("program") {
            let x = self.expect_ident()?;
            let body = self.parse_block()?;
            self.define_program(&x, body.clone());
            h.programs.push((x, body));
            return Ok(true);
        }
        Ok(false)
    }

    pub fn parse_header(&mut self) -> ParseResult<Header> {
        let mut h = Header::default();
        while self.parse_header_item(&mut h)? {}
        Ok(h)
    }
}

pub fn parse_expr(src: &str) -> ParseResult<Expr> {
    let mut p = Parser::new(src, false)?;
    let e = p.parse_expr()?;
    p.expect_eof()?;
    Ok(e)
}

pub fn parse_bool(src: &str) -> ParseResult<BoolExpr> {
    let mut p = Parser::new(src, false)?;
    let b = p.parse_bool()?;
    p.expect_eof()?;
    Ok(b)
}

pub fn parse_stmt(src: &str) -> ParseResult<Stmt> {
    let mut p = Parser::new(src, false)?;
    let s = p.parse_stmts()?;
    p.expect_eof()?;
    Ok(s)
}

/// Parses a program file: `var`/`const`/`program` declarations, then statements.
pub fn parse_program(src: &str) -> ParseResult<ProgramDecl> {
    let mut p = Parser::new(src, false)?;
    let h = p.parse_header()?;
    let body = p.parse_stmts()?;
    p.expect_eof()?;
    Ok(ProgramDecl { vars: h.vars, consts: h.consts, body })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignment_with_union() {
        let s = parse_stmt("s := s ∪ {2}").unwrap();
        assert_eq!(
            s,
            Stmt::assign("s", Expr::union(Expr::var("s"), Expr::singleton(Expr::int(2))))
        );
        assert_eq!(parse_stmt("s = s \\/ {2}").unwrap(), s);
    }

    #[test]
    fn sequences_nest_to_the_right() {
        let s = parse_stmt("x := 1; y := 2; skip").unwrap();
        assert_eq!(
            s,
            Stmt::seq(
                Stmt::assign("x", Expr::int(1)),
                Stmt::seq(Stmt::assign("y", Expr::int(2)), Stmt::Skip)
            )
        );
    }

    #[test]
    fn if_desugars_to_guarded_choice() {
        let s = parse_stmt("if (x < 1) then { x := 1 } else { skip }").unwrap();
        let b = BoolExpr::lt(Expr::var("x"), Expr::int(1));
        assert_eq!(s, Stmt::if_then_else(b, Stmt::assign("x", Expr::int(1)), Stmt::Skip));
    }

    #[test]
    fn while_needs_no_semicolon() {
        let s = parse_stmt("while (i < 8) { i := i + 1 } x := 0").unwrap();
        assert!(matches!(s, Stmt::Seq(..)));
    }

    #[test]
    fn parenthesised_arithmetic_in_guards() {
        let b = parse_bool("(x + 1) < 3 && (y == 2)").unwrap();
        assert_eq!(
            b,
            BoolExpr::and(
                BoolExpr::lt(Expr::add(Expr::var("x"), Expr::int(1)), Expr::int(3)),
                BoolExpr::eq(Expr::var("y"), Expr::int(2))
            )
        );
    }

    #[test]
    fn precedence_of_bit_operators() {
        let e = parse_expr("x | 1 << a[i] + 1").unwrap();
        assert_eq!(
            e,
            Expr::bitor(
                Expr::var("x"),
                Expr::shl(Expr::int(1), Expr::add(Expr::index(Expr::var("a"), Expr::var("i")), Expr::int(1)))
            )
        );
    }

    #[test]
    fn assertion_with_exec_and_binders() {
        let mut p = Parser::new("exists l : set{0..3}. x == sum2(l) && Exec[ s == l ; skip ]", false).unwrap();
        let a = p.parse_assertion().unwrap();
        match a {
            Assertion::Exists(x, Sort::SetOver(u), body) => {
                assert_eq!(x, "l");
                assert_eq!(u, vec![0, 1, 2, 3]);
                assert!(matches!(*body, Assertion::And(_, _)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn program_file_with_declarations() {
        let d = parse_program(
            "var x : int[0..7]; var s : set{0..3};\nconst a : array[3] of int[0..3] = [1,2,3];\nx := a[1]; s := {}",
        )
        .unwrap();
        assert_eq!(d.vars.len(), 2);
        assert_eq!(d.consts[0].value, Value::Array(vec![1, 2, 3]));
    }

    #[test]
    fn named_programs_expand() {
        let mut p = Parser::new("program inc { x := x + 1 } inc; inc", false).unwrap();
        p.parse_header().unwrap();
        let s = p.parse_stmts().unwrap();
        let inc = Stmt::assign("x", Expr::add(Expr::var("x"), Expr::int(1)));
        assert_eq!(s, Stmt::seq(inc.clone(), inc));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_stmt("x := ;").unwrap_err();
        assert!(e.to_string().starts_with("1:6"), "{e}");
    }
}
