use super::parser::{ParseError, ParseResult};
use std::fmt;

/// Line and column, both starting at 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    /// Text of a `// @...` comment line, without the marker.
    Directive(String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Directive(d) => write!(f, "directive `@{d}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

const SYMBOLS: &[&str] = &[
    ":=", "==", "!=", "<=", ">=", "<<", "&&", "||", "..", "\\/", "/\\", "->", "<", ">", "=", "+", "-", "*",
    "|", "!", "(", ")", "{", "}", "[", "]", ",", ";", ":", ".",
];

fn unicode_symbol(c: char) -> Option<Tok> {
    let t = match c {
        '∪' => Tok::Sym("\\/"),
        '∧' => Tok::Sym("&&"),
        '∨' => Tok::Sym("||"),
        '¬' => Tok::Sym("!"),
        '≤' => Tok::Sym("<="),
        '≥' => Tok::Sym(">="),
        '≠' => Tok::Sym("!="),
        '∅' => Tok::Sym("∅"),
        '→' => Tok::Sym("->"),
        '∈' => Tok::Ident("in".into()),
        '∃' => Tok::Ident("exists".into()),
        _ => return None,
    };
    Some(t)
}

/// Splits source text into tokens. With `directives` set, `// @...` comment
/// lines become [`Tok::Directive`] tokens; otherwise all comments are skipped.
pub fn lex(src: &str, directives: bool) -> ParseResult<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            let start = i + 2;
            let mut end = start;
            while end < chars.len() && chars[end] != '\n' {
                end += 1;
            }
            let text: String = chars[start..end].iter().collect();
            let trimmed = text.trim_start();
            if directives && trimmed.starts_with('@') {
                out.push(Token { tok: Tok::Directive(trimmed[1..].trim().to_string()), pos });
            }
            col += end - i;
            i = end;
            continue;
        }
        if c.is_ascii_digit() {
            let mut end = i;
            while end < chars.len() && chars[end].is_ascii_digit() {
                end += 1;
            }
            let text: String = chars[i..end].iter().collect();
            let v: i64 = text
                .parse()
                .map_err(|_| ParseError::Syntax { pos, msg: format!("integer literal `{text}` out of range") })?;
            out.push(Token { tok: Tok::Int(v), pos });
            col += end - i;
            i = end;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut end = i;
            while end < chars.len() && (chars[end].is_alphanumeric() || chars[end] == '_' || chars[end] == '\'') {
                end += 1;
            }
            let text: String = chars[i..end].iter().collect();
            out.push(Token { tok: Tok::Ident(text), pos });
            col += end - i;
            i = end;
            continue;
        }
        if let Some(t) = unicode_symbol(c) {
            out.push(Token { tok: t, pos });
            i += 1;
            col += 1;
            continue;
        }
        let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                out.push(Token { tok: Tok::Sym(s), pos });
                i += s.len();
                col += s.len();
            }
            None => return Err(ParseError::Syntax { pos, msg: format!("unexpected character `{c}`") }),
        }
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s, true).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn longest_symbol_wins() {
        assert_eq!(
            toks("x := x || y | 1 << 2"),
            vec![
                Tok::Ident("x".into()),
                Tok::Sym(":="),
                Tok::Ident("x".into()),
                Tok::Sym("||"),
                Tok::Ident("y".into()),
                Tok::Sym("|"),
                Tok::Int(1),
                Tok::Sym("<<"),
                Tok::Int(2),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn unicode_operators_map_to_ascii() {
        assert_eq!(toks("s ∪ {1}")[1], Tok::Sym("\\/"));
        assert_eq!(toks("a ∧ b")[1], Tok::Sym("&&"));
        assert_eq!(toks("a ∈ s")[1], Tok::Ident("in".into()));
    }

    #[test]
    fn directives_and_comments() {
        let t = toks("// plain\n// @assert x == 0\nskip");
        assert_eq!(t[0], Tok::Directive("assert x == 0".into()));
        assert_eq!(t[1], Tok::Ident("skip".into()));
        let t = lex("// @assert x\nskip", false).unwrap();
        assert_eq!(t[0].tok, Tok::Ident("skip".into()));
        assert_eq!(t[0].pos, Pos { line: 2, col: 1 });
    }
}
