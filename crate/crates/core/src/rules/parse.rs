//! Text syntax for violation rules.
//!
//! ```text
//! @prefix topo: <http://geni-orca.renci.org/owl/topology.owl#> .
//! violation("message", ?X) <- (?X rdf:type topo:NetworkConnection), (?X topo:hasInterface ?I), notEqual(?X, ?I) .
//! (?Z rb:violation error("message", ?X)) <- ... .
//! ```
//!
//! `#` starts a comment outside strings and IRIs.

use crate::graphstore::{resolve_name, Iri, Literal, Model, Term};
use crate::vocab::ns;

use super::{Builtin, BuiltinKind, ClassAtom, Rule, RuleTerm, TripleAtom};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleParseError {
    #[error("rule syntax error at line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("unsafe rule at line {line}: variable ?{variable} is not bound by any triple or class atom")]
    Unsafe { line: usize, variable: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Comma,
    Dot,
    Arrow,
    Str(String),
    Var(String),
    /// IRI in angle brackets, CURIE, keyword or bare name.
    Name(String),
    /// `^^` followed by a datatype name.
    Datatype(String),
}

fn err(line: usize, reason: impl Into<String>) -> RuleParseError {
    RuleParseError::Syntax { line, reason: reason.into() }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, RuleParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let is_delim = |c: char| c.is_whitespace() || "(),".contains(c);
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                out.push((Tok::Open, line));
                i += 1;
            }
            ')' => {
                out.push((Tok::Close, line));
                i += 1;
            }
            ',' => {
                out.push((Tok::Comma, line));
                i += 1;
            }
            '.' if chars.get(i + 1).is_none_or(|n| n.is_whitespace()) => {
                out.push((Tok::Dot, line));
                i += 1;
            }
            '<' if chars.get(i + 1) == Some(&'-') => {
                out.push((Tok::Arrow, line));
                i += 2;
            }
            '"' => {
                let start_line = line;
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(err(start_line, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => {
                            let esc = chars.get(i + 1).ok_or_else(|| err(line, "dangling escape"))?;
                            s.push(match esc {
                                'n' => '\n',
                                't' => '\t',
                                other => *other,
                            });
                            i += 2;
                        }
                        Some(ch) => {
                            if *ch == '\n' {
                                line += 1;
                            }
                            s.push(*ch);
                            i += 1;
                        }
                    }
                }
                i += 1;
                out.push((Tok::Str(s), start_line));
                if chars.get(i) == Some(&'^') && chars.get(i + 1) == Some(&'^') {
                    i += 2;
                    let start = i;
                    while i < chars.len() && !is_delim(chars[i]) {
                        i += 1;
                    }
                    let mut name: String = chars[start..i].iter().collect();
                    if name.ends_with('.') && !name.ends_with('>') {
                        name.pop();
                        i -= 1;
                    }
                    if name.is_empty() {
                        return Err(err(line, "missing datatype after ^^"));
                    }
                    out.push((Tok::Datatype(name), line));
                }
            }
            '<' => {
                let start = i;
                while i < chars.len() && chars[i] != '>' {
                    if chars[i] == '\n' {
                        return Err(err(line, "unterminated IRI"));
                    }
                    i += 1;
                }
                if i == chars.len() {
                    return Err(err(line, "unterminated IRI"));
                }
                i += 1;
                out.push((Tok::Name(chars[start..i].iter().collect()), line));
            }
            '?' => {
                let start = i + 1;
                i += 1;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                if i == start {
                    return Err(err(line, "empty variable name"));
                }
                out.push((Tok::Var(chars[start..i].iter().collect()), line));
            }
            _ => {
                let start = i;
                while i < chars.len() && !is_delim(chars[i]) {
                    i += 1;
                }
                let mut name: String = chars[start..i].iter().collect();
                // A trailing '.' followed by whitespace ends the statement.
                if name.len() > 1 && name.ends_with('.') {
                    name.pop();
                    i -= 1;
                }
                out.push((Tok::Name(name), line));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    prefixes: Model,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map(|t| t.1).unwrap_or(1)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Result<Tok, RuleParseError> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone()).ok_or_else(|| err(self.line(), "unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), RuleParseError> {
        let line = self.line();
        let got = self.next()?;
        if got == want {
            Ok(())
        } else {
            Err(err(line, format!("expected {what}, found {got:?}")))
        }
    }

    fn resolve(&self, name: &str) -> Result<Iri, RuleParseError> {
        resolve_name(name, &self.prefixes).map_err(|e| err(self.line(), e.to_string()))
    }

    fn term(&mut self) -> Result<RuleTerm, RuleParseError> {
        let line = self.line();
        match self.next()? {
            Tok::Var(v) => Ok(RuleTerm::Var(v)),
            Tok::Str(s) => {
                if let Some(Tok::Datatype(_)) = self.peek() {
                    let Tok::Datatype(dt) = self.next()? else { unreachable!() };
                    let dt = self.resolve(&dt)?;
                    Ok(RuleTerm::Const(Term::Literal(Literal { lexical: s, datatype: dt })))
                } else {
                    Ok(RuleTerm::Const(Term::Literal(Literal::string(s))))
                }
            }
            Tok::Name(n) if n.chars().all(|c| c.is_ascii_digit() || c == '-') && n != "-" => {
                let v: i64 = n.parse().map_err(|_| err(line, format!("bad integer {n}")))?;
                Ok(RuleTerm::Const(Term::Literal(Literal::integer(v))))
            }
            Tok::Name(n) => Ok(RuleTerm::Const(Term::Iri(self.resolve(&n)?))),
            other => Err(err(line, format!("expected a term, found {other:?}"))),
        }
    }

    fn prefix_directive(&mut self) -> Result<(), RuleParseError> {
        let line = self.line();
        self.next()?;
        let name = match self.next()? {
            Tok::Name(n) if n.ends_with(':') => n[..n.len() - 1].to_string(),
            other => return Err(err(line, format!("expected prefix name, found {other:?}"))),
        };
        let iri = match self.next()? {
            Tok::Name(n) if n.starts_with('<') => self.resolve(&n)?,
            other => return Err(err(line, format!("expected <iri>, found {other:?}"))),
        };
        self.expect(Tok::Dot, "'.'")?;
        self.prefixes.set_prefix(name, iri);
        Ok(())
    }

    fn message_and_subject(&mut self) -> Result<(String, String), RuleParseError> {
        let line = self.line();
        self.expect(Tok::Open, "'('")?;
        let msg = match self.next()? {
            Tok::Str(s) => s,
            other => return Err(err(line, format!("expected message string, found {other:?}"))),
        };
        self.expect(Tok::Comma, "','")?;
        let var = match self.next()? {
            Tok::Var(v) => v,
            other => return Err(err(line, format!("violation subject must be a variable, found {other:?}"))),
        };
        self.expect(Tok::Close, "')'")?;
        Ok((msg, var))
    }

    fn head(&mut self) -> Result<(String, String), RuleParseError> {
        let line = self.line();
        match self.next()? {
            Tok::Name(n) if n == "violation" => self.message_and_subject(),
            Tok::Open => {
                // (?Z rb:violation error("msg", ?X))
                let _ = self.term()?;
                match self.next()? {
                    Tok::Name(n) if n == "rb:violation" || n.ends_with("violation>") => {}
                    other => return Err(err(line, format!("expected rb:violation, found {other:?}"))),
                }
                match self.next()? {
                    Tok::Name(n) if n == "error" => {}
                    other => return Err(err(line, format!("expected error(...), found {other:?}"))),
                }
                let r = self.message_and_subject()?;
                self.expect(Tok::Close, "')'")?;
                Ok(r)
            }
            other => Err(err(line, format!("expected a violation head, found {other:?}"))),
        }
    }

    fn rule(&mut self) -> Result<Rule, RuleParseError> {
        let line = self.line();
        let (message, subject) = self.head()?;
        self.expect(Tok::Arrow, "'<-'")?;
        let mut rule = Rule {
            message,
            subject,
            triples: Vec::new(),
            classes: Vec::new(),
            builtins: Vec::new(),
            line,
        };
        loop {
            let aline = self.line();
            match self.next()? {
                Tok::Open => {
                    let s = self.term()?;
                    let p = match self.term()? {
                        RuleTerm::Const(Term::Iri(p)) => p,
                        _ => return Err(err(aline, "predicate must be a constant IRI")),
                    };
                    let o = self.term()?;
                    self.expect(Tok::Close, "')'")?;
                    match o {
                        RuleTerm::Const(Term::Iri(class)) if p == ns::terms().rdf_type => {
                            rule.classes.push(ClassAtom { subject: s, class })
                        }
                        o => rule.triples.push(TripleAtom { subject: s, predicate: p, object: o }),
                    }
                }
                Tok::Name(n) if n == "equal" || n == "notEqual" => {
                    let kind = if n == "equal" { BuiltinKind::Equal } else { BuiltinKind::NotEqual };
                    self.expect(Tok::Open, "'('")?;
                    let a = self.term()?;
                    self.expect(Tok::Comma, "','")?;
                    let b = self.term()?;
                    self.expect(Tok::Close, "')'")?;
                    rule.builtins.push(Builtin { kind, a, b });
                }
                Tok::Name(n) => {
                    return Err(err(aline, format!("unknown atom {n}: only triple, class, equal and notEqual atoms are allowed")))
                }
                other => return Err(err(aline, format!("expected an atom, found {other:?}"))),
            }
            match self.next()? {
                Tok::Comma => continue,
                Tok::Dot => break,
                other => return Err(err(self.line(), format!("expected ',' or '.', found {other:?}"))),
            }
        }
        if let Some(v) = rule.unsafe_variable() {
            return Err(RuleParseError::Unsafe { line, variable: v });
        }
        Ok(rule)
    }
}

/// Parses a ruleset. Names resolve against the prefixes of `prefixes`
/// extended by any `@prefix` lines in the text.
pub fn parse_ruleset(text: &str, prefixes: &Model) -> Result<Vec<Rule>, RuleParseError> {
    let mut pm = Model::new();
    for (k, v) in prefixes.prefixes() {
        pm.set_prefix(k.clone(), v.clone());
    }
    let mut p = Parser { toks: tokenize(text)?, pos: 0, prefixes: pm };
    let mut rules = Vec::new();
    while let Some(t) = p.peek() {
        if matches!(t, Tok::Name(n) if n == "@prefix") {
            p.prefix_directive()?;
        } else {
            rules.push(p.rule()?);
        }
    }
    Ok(rules)
}
