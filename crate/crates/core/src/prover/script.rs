//! Proof files: declarations, `pre:`/`post:` and an annotated low-level
//! program in `proof { .. }` with `// @` directives.

use crate::assertions::Assertion;
use crate::lang::{BoolExpr, Expr, Header, ParseError, Parser, Pos, Stmt, Tok};
use crate::triples::{Setting, TripleError};
use std::collections::HashMap;

/// A rule named by an `@exec` directive, before its arguments are evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleSpec {
    Assign,
    Nondet(Expr),
    ChoiceL,
    ChoiceR,
    Assume,
    WhileEnd,
    WhileUnroll,
    Assert,
    Focus(Assertion),
    /// Replace the head; without a chain the refinement is checked on states.
    Pure { replacement: Stmt, by: Option<Vec<RuleSpec>> },
    Seq(Vec<RuleSpec>),
}

impl std::fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let list = |v: &[RuleSpec]| v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ");
        match self {
            RuleSpec::Assign => write!(f, "assign"),
            RuleSpec::Nondet(e) => write!(f, "nondet {e}"),
            RuleSpec::ChoiceL => write!(f, "choice-left"),
            RuleSpec::ChoiceR => write!(f, "choice-right"),
            RuleSpec::Assume => write!(f, "assume"),
            RuleSpec::WhileEnd => write!(f, "while-end"),
            RuleSpec::WhileUnroll => write!(f, "while-unroll"),
            RuleSpec::Assert => write!(f, "assert"),
            RuleSpec::Focus(a) => write!(f, "focus {{ {a} }}"),
            RuleSpec::Pure { replacement, by: None } => write!(f, "pure -> {replacement}"),
            RuleSpec::Pure { replacement, by: Some(c) } => write!(f, "pure -> {replacement} by {}", list(c)),
            RuleSpec::Seq(c) => write!(f, "seq [{}]", list(c)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Assert(Assertion),
    Invariant(Assertion),
    Exec(RuleSpec),
    ExIntro(String),
    Basic(Stmt),
    While(BoolExpr, Vec<Located>),
    If(BoolExpr, Vec<Located>, Vec<Located>),
    Choice(Vec<Located>, Vec<Located>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Located {
    pub pos: Pos,
    pub item: Item,
}

#[derive(Debug)]
pub struct ProofFile {
    pub setting: Setting,
    pub pre: Assertion,
    pub post: Assertion,
    pub body: Vec<Located>,
    /// The low-level program with annotations erased.
    pub program: Stmt,
}

pub fn parse_proof_file(src: &str) -> Result<ProofFile, TripleError> {
    let mut p = Parser::new(src, true)?;
    let mut h = Header::default();
    let (mut pre, mut post, mut body) = (None, None, None);
    loop {
        if matches!(p.peek(), Tok::Directive(_)) {
            return Err(ParseError::Syntax { pos: p.pos(), msg: "directive outside the proof block".into() }.into());
        }
        if p.parse_header_item(&mut h)? {
            continue;
        }
        if p.eat_kw("high") {
            let b = p.parse_block()?;
            p.define_program("high", b);
        } else if p.eat_kw("pre") {
            p.expect_sym(":")?;
            pre = Some(p.parse_assertion()?);
            p.eat_sym(";");
        } else if p.eat_kw("post") {
            p.expect_sym(":")?;
            post = Some(p.parse_assertion()?);
            p.eat_sym(";");
        } else if p.eat_kw("proof") {
            p.expect_sym("{")?;
            let progs = p.programs().clone();
            body = Some(parse_items(&mut p, &progs)?);
            p.expect_sym("}")?;
        } else {
            break;
        }
    }
    p.expect_eof()?;
    let body = body.ok_or(TripleError::Missing("proof"))?;
    let program = erase(&body);
    Ok(ProofFile {
        setting: Setting::new(h)?,
        pre: pre.ok_or(TripleError::Missing("pre"))?,
        post: post.ok_or(TripleError::Missing("post"))?,
        body,
        program,
    })
}

/// The program a list of items denotes.
pub fn erase(items: &[Located]) -> Stmt {
    Stmt::seq_all(
        items
            .iter()
            .filter_map(|l| match &l.item {
                Item::Basic(s) => Some(s.clone()),
                Item::While(b, body) => Some(Stmt::while_(b.clone(), erase(body))),
                Item::If(b, t, e) => Some(Stmt::if_then_else(b.clone(), erase(t), erase(e))),
                Item::Choice(a, b) => Some(Stmt::choice(erase(a), erase(b))),
                _ => None,
            })
            .collect(),
    )
}

fn items_of(s: &Stmt, pos: Pos, out: &mut Vec<Located>) {
    match s {
        Stmt::Seq(a, b) => {
            items_of(a, pos, out);
            items_of(b, pos, out);
        }
        Stmt::While(b, c) => {
            let mut body = Vec::new();
            items_of(c, pos, &mut body);
            out.push(Located { pos, item: Item::While(b.clone(), body) });
        }
        Stmt::Choice(a, b) => {
            let (mut l, mut r) = (Vec::new(), Vec::new());
            items_of(a, pos, &mut l);
            items_of(b, pos, &mut r);
            out.push(Located { pos, item: Item::Choice(l, r) });
        }
        s => out.push(Located { pos, item: Item::Basic(s.clone()) }),
    }
}

fn parse_items(p: &mut Parser, progs: &HashMap<String, Stmt>) -> Result<Vec<Located>, ParseError> {
    let mut out = Vec::new();
    loop {
        let pos = p.pos();
        match p.peek().clone() {
            Tok::Sym("}" | ")" | ",") | Tok::Eof => return Ok(out),
            Tok::Sym(";") => {
                p.advance();
            }
            Tok::Sym("{") => {
                p.advance();
                out.extend(parse_items(p, progs)?);
                p.expect_sym("}")?;
            }
            Tok::Directive(text) => {
                p.advance();
                out.push(Located { pos, item: parse_directive(&text, pos, progs)? });
            }
            Tok::Ident(k) if k == "while" => {
                p.advance();
                let b = p.parse_paren_bool()?;
                let body = braced(p, progs)?;
                out.push(Located { pos, item: Item::While(b, body) });
            }
            Tok::Ident(k) if k == "if" => {
                p.advance();
                let b = p.parse_paren_bool()?;
                p.eat_kw("then");
                let t = braced(p, progs)?;
                let e = if p.eat_kw("else") { braced(p, progs)? } else { Vec::new() };
                out.push(Located { pos, item: Item::If(b, t, e) });
            }
            Tok::Ident(k) if k == "choice" => {
                p.advance();
                p.expect_sym("(")?;
                let l = parse_items(p, progs)?;
                p.expect_sym(",")?;
                let r = parse_items(p, progs)?;
                p.expect_sym(")")?;
                out.push(Located { pos, item: Item::Choice(l, r) });
            }
            _ => {
                let s = p.parse_stmt()?;
                items_of(&s, pos, &mut out);
            }
        }
    }
}

fn braced(p: &mut Parser, progs: &HashMap<String, Stmt>) -> Result<Vec<Located>, ParseError> {
    p.expect_sym("{")?;
    let v = parse_items(p, progs)?;
    p.expect_sym("}")?;
    Ok(v)
}

/// Shifts positions reported by a parser over directive text to the file.
fn relocate(e: ParseError, at: Pos) -> ParseError {
    let msg = e.to_string();
    let tail = msg.split_once(": ").map(|(_, t)| t.to_string()).unwrap_or(msg);
    ParseError::Syntax { pos: at, msg: format!("in directive: {tail}") }
}

fn parse_directive(text: &str, pos: Pos, progs: &HashMap<String, Stmt>) -> Result<Item, ParseError> {
    let (kw, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
    let mut q = Parser::new(rest, false).map_err(|e| relocate(e, pos))?;
    for (n, b) in progs {
        q.define_program(n, b.clone());
    }
    let r: Result<Item, ParseError> = (|| {
        let item = match kw {
            "assert" => Item::Assert(q.parse_assertion()?),
            "invariant" => Item::Invariant(q.parse_assertion()?),
            "exintro" => Item::ExIntro(q.expect_ident()?),
            "exec" => Item::Exec(parse_rule(&mut q)?),
            _ => return Err(ParseError::Syntax { pos, msg: format!("unknown directive `@{kw}`") }),
        };
        q.expect_eof()?;
        Ok(item)
    })();
    r.map_err(|e| match e {
        ParseError::Syntax { msg, .. } if msg.starts_with("unknown directive") => ParseError::Syntax { pos, msg },
        e => relocate(e, pos),
    })
}

fn rule_name(q: &mut Parser) -> Result<String, ParseError> {
    let mut name = match q.advance() {
        Tok::Ident(s) => s,
        t => return Err(ParseError::Unexpected { pos: q.pos(), expected: "rule name".into(), found: t.to_string() }),
    };
    while matches!(q.peek(), Tok::Sym("-")) && matches!(q.peek_at(1), Tok::Ident(_)) {
        q.advance();
        if let Tok::Ident(s) = q.advance() {
            name = format!("{name}-{s}");
        }
    }
    Ok(name)
}

fn parse_rule_list(q: &mut Parser) -> Result<Vec<RuleSpec>, ParseError> {
    let bracket = q.eat_sym("[");
    let mut v = vec![parse_rule(q)?];
    while q.eat_sym(",") {
        v.push(parse_rule(q)?);
    }
    if bracket {
        q.expect_sym("]")?;
    }
    Ok(v)
}

pub fn parse_rule(q: &mut Parser) -> Result<RuleSpec, ParseError> {
    let pos = q.pos();
    let name = rule_name(q)?;
    Ok(match name.as_str() {
        "assign" => RuleSpec::Assign,
        "nondet" => RuleSpec::Nondet(q.parse_expr()?),
        "choice-left" => RuleSpec::ChoiceL,
        "choice-right" => RuleSpec::ChoiceR,
        "assume" => RuleSpec::Assume,
        "while-end" => RuleSpec::WhileEnd,
        "while-unroll" => RuleSpec::WhileUnroll,
        "assert" => RuleSpec::Assert,
        "focus" => {
            q.expect_sym("{")?;
            let a = q.parse_assertion()?;
            q.expect_sym("}")?;
            RuleSpec::Focus(a)
        }
        "pure" => {
            q.expect_sym("->")?;
            let replacement = q.parse_stmts()?;
            let by = if q.eat_kw("by") { Some(parse_rule_list(q)?) } else { None };
            RuleSpec::Pure { replacement, by }
        }
        "seq" => RuleSpec::Seq(parse_rule_list(q)?),
        _ => return Err(ParseError::Syntax { pos, msg: format!("unknown rule `{name}`") }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = "low var x : int[0..3]; high var y : int[0..3];
        pre: Exec[true ; y := 1]
        post: Exec[y == 1 ; skip] && x == 1
        proof {
          // @exec assign
          // @assert Exec[y == 1 ; skip]
          x := 1;
        }";

    #[test]
    fn parses_directives_and_statements() {
        let f = parse_proof_file(SRC).unwrap();
        assert_eq!(f.body.len(), 3);
        assert_eq!(f.body[0].item, Item::Exec(RuleSpec::Assign));
        assert!(matches!(f.body[1].item, Item::Assert(_)));
        assert_eq!(f.program, crate::lang::parse_stmt("x := 1").unwrap());
    }

    #[test]
    fn rule_syntax() {
        let r = |s: &str| parse_rule(&mut Parser::new(s, false).unwrap()).unwrap();
        assert_eq!(r("choice-left"), RuleSpec::ChoiceL);
        assert_eq!(r("while-unroll"), RuleSpec::WhileUnroll);
        assert_eq!(r("nondet n + 1").to_string(), "nondet n + 1");
        assert!(matches!(r("pure -> y := 2 by assign"), RuleSpec::Pure { by: Some(_), .. }));
        assert!(matches!(r("seq [assign, assume]"), RuleSpec::Seq(v) if v.len() == 2));
        assert!(matches!(r("focus { y == 2 }"), RuleSpec::Focus(_)));
    }

    #[test]
    fn malformed_directive_is_a_parse_error() {
        let bad = SRC.replace("@exec assign", "@exec teleport");
        assert!(matches!(parse_proof_file(&bad), Err(TripleError::Parse(_))));
        let bad = SRC.replace("@exec assign", "@frobnicate");
        assert!(matches!(parse_proof_file(&bad), Err(TripleError::Parse(_))));
    }
}
