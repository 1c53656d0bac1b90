//! Text form of path expressions: `p`, `^p`, `a/b`, `a|b`, `p*`, `p+` and parentheses.

use super::PathExpr;
use crate::graphstore::{resolve_name, Model};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("path expression at offset {offset}: {reason}")]
pub struct PathSyntaxError {
    pub offset: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, PathSyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (off, c) = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' | ')' | '|' | '/' | '^' | '*' | '+' => {
                out.push((off, Tok::Sym(c)));
                i += 1;
            }
            '<' => {
                let start = i;
                while i < chars.len() && chars[i].1 != '>' {
                    i += 1;
                }
                if i == chars.len() {
                    return Err(PathSyntaxError { offset: off, reason: "unterminated <iri>".into() });
                }
                i += 1;
                let s: String = chars[start..i].iter().map(|(_, c)| c).collect();
                out.push((off, Tok::Name(s)));
            }
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].1.is_whitespace() && !"()|/^*+<".contains(chars[i].1) {
                    i += 1;
                }
                let s: String = chars[start..i].iter().map(|(_, c)| c).collect();
                out.push((off, Tok::Name(s)));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    prefixes: &'a Model,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn err(&self, reason: impl Into<String>) -> PathSyntaxError {
        PathSyntaxError { offset: self.offset(), reason: reason.into() }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn alt(&mut self) -> Result<PathExpr, PathSyntaxError> {
        let mut parts = vec![self.seq()?];
        while self.eat('|') {
            parts.push(self.seq()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { PathExpr::Alt(parts) })
    }

    fn seq(&mut self) -> Result<PathExpr, PathSyntaxError> {
        let mut parts = vec![self.unary()?];
        while self.eat('/') {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { PathExpr::Seq(parts) })
    }

    fn unary(&mut self) -> Result<PathExpr, PathSyntaxError> {
        if self.eat('^') {
            return Ok(PathExpr::Inverse(Box::new(self.unary()?)));
        }
        let mut e = self.primary()?;
        loop {
            if self.eat('*') {
                e = PathExpr::Star(Box::new(e));
            } else if self.eat('+') {
                e = PathExpr::Plus(Box::new(e));
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> Result<PathExpr, PathSyntaxError> {
        if self.eat('(') {
            let e = self.alt()?;
            if !self.eat(')') {
                return Err(self.err("expected ')'"));
            }
            return Ok(e);
        }
        match self.peek().cloned() {
            Some(Tok::Name(name)) => {
                let iri = resolve_name(&name, self.prefixes).map_err(|e| self.err(e.to_string()))?;
                self.pos += 1;
                Ok(PathExpr::Pred(iri))
            }
            Some(Tok::Sym(c)) => Err(self.err(format!("unexpected '{c}'"))),
            None => Err(self.err("unexpected end of expression")),
        }
    }
}

/// Parses the text form, resolving CURIEs against `prefixes`.
pub fn parse_path(text: &str, prefixes: &Model) -> Result<PathExpr, PathSyntaxError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), prefixes };
    let e = p.alt()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}
