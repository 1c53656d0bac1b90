//! NDL-Lite: a line-oriented Turtle subset used for every document the engine
//! reads or writes.
//!
//! ```text
//! @prefix topo: <http://geni-orca.renci.org/owl/topology.owl#> .
//! <urn:a> topo:hasInterface <urn:a-if0> .
//! <urn:a-if0> topo:availableBandwidth "10000"^^xsd:integer .   # comment
//! ```
//!
//! One statement per line. Terms are `<iri>`, `prefix:local`, `"lexical"` or
//! `"lexical"^^datatype`; `a` abbreviates `rdf:type` on input.

use std::collections::BTreeMap;

use super::model::Model;
use super::term::{escape, xsd, Iri, Literal, Term, Triple};
use crate::vocab::ns;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {col}: {reason}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Iri(String),
    Bare(String),
    Literal { lexical: String, datatype: Option<Box<Token>> },
    Dot,
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(line: &'a str, line_no: usize) -> Self {
        Lexer { chars: line.chars().collect(), pos: 0, line: line_no, _src: line }
    }

    fn err(&self, col: usize, reason: impl Into<String>) -> SyntaxError {
        SyntaxError { line: self.line, col: col + 1, reason: reason.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    /// Returns `(column, token)` pairs for the whole line, stopping at a comment.
    fn tokens(mut self) -> Result<Vec<(usize, Token)>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let start = self.pos;
            let Some(c) = self.peek() else { break };
            match c {
                '#' => break,
                '<' => {
                    let iri = self.read_iri()?;
                    out.push((start, Token::Iri(iri)));
                }
                '"' => {
                    let lexical = self.read_string()?;
                    let mut datatype = None;
                    if self.chars.get(self.pos) == Some(&'^') && self.chars.get(self.pos + 1) == Some(&'^') {
                        self.pos += 2;
                        let dt = match self.peek() {
                            Some('<') => Token::Iri(self.read_iri()?),
                            Some(c) if !c.is_whitespace() => Token::Bare(self.read_bare()),
                            _ => return Err(self.err(self.pos, "expected datatype after ^^")),
                        };
                        datatype = Some(Box::new(dt));
                    } else if self.peek() == Some('@') {
                        return Err(self.err(self.pos, "language-tagged literals are not supported"));
                    }
                    out.push((start, Token::Literal { lexical, datatype }));
                }
                '.' if self.chars.get(self.pos + 1).is_none_or(|c| c.is_whitespace() || *c == '#') => {
                    self.pos += 1;
                    out.push((start, Token::Dot));
                }
                _ => {
                    let bare = self.read_bare();
                    out.push((start, Token::Bare(bare)));
                }
            }
        }
        Ok(out)
    }

    fn read_iri(&mut self) -> Result<String, SyntaxError> {
        let start = self.pos;
        self.pos += 1;
        let mut s = String::new();
        loop {
            match self.peek() {
                None => return Err(self.err(start, "unterminated IRI")),
                Some('>') => {
                    self.pos += 1;
                    return Ok(s);
                }
                Some(c) if c.is_whitespace() => return Err(self.err(self.pos, "whitespace inside IRI")),
                Some(c) => {
                    s.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn read_string(&mut self) -> Result<String, SyntaxError> {
        let start = self.pos;
        self.pos += 1;
        let mut s = String::new();
        loop {
            match self.peek() {
                None => return Err(self.err(start, "unterminated string literal")),
                Some('"') => {
                    self.pos += 1;
                    return Ok(s);
                }
                Some('\\') => {
                    let esc = self.chars.get(self.pos + 1).copied();
                    let c = match esc {
                        Some('"') => '"',
                        Some('\\') => '\\',
                        Some('n') => '\n',
                        Some('t') => '\t',
                        Some('r') => '\r',
                        _ => return Err(self.err(self.pos, "invalid escape sequence")),
                    };
                    s.push(c);
                    self.pos += 2;
                }
                Some(c) => {
                    s.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    /// Reads a bare token. A trailing `.` that ends the line is left for the terminator.
    fn read_bare(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(|c| !c.is_whitespace()) {
            self.pos += 1;
        }
        let mut end = self.pos;
        if end - start > 1 && self.chars[end - 1] == '.' {
            let rest_empty = self.chars[end..].iter().all(|c| c.is_whitespace());
            if rest_empty {
                end -= 1;
                self.pos = end;
            }
        }
        self.chars[start..end].iter().collect()
    }
}

/// Parses an NDL-Lite document.
pub fn parse_document(text: &str) -> Result<Model, SyntaxError> {
    let mut model = Model::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let lexer = Lexer::new(raw, line_no);
        let err = |col: usize, reason: &str| SyntaxError { line: line_no, col: col + 1, reason: reason.into() };
        let tokens = lexer.tokens()?;
        if tokens.is_empty() {
            continue;
        }
        if let (_, Token::Bare(kw)) = &tokens[0] {
            if kw == "@prefix" {
                parse_prefix(&mut model, &tokens, line_no)?;
                continue;
            }
        }
        let eol = raw.chars().count();
        let (scol, s) = &tokens[0];
        let Some((pcol, p)) = tokens.get(1) else { return Err(err(eol, "missing predicate")) };
        let Some((ocol, o)) = tokens.get(2) else { return Err(err(eol, "missing object")) };
        if matches!(o, Token::Dot) {
            return Err(err(*ocol, "missing object"));
        }
        match tokens.get(3) {
            Some((_, Token::Dot)) => {}
            Some((c, _)) => return Err(err(*c, "expected '.' after object")),
            None => return Err(err(eol, "missing terminating '.'")),
        }
        if let Some((c, _)) = tokens.get(4) {
            return Err(err(*c, "trailing content after statement"));
        }
        let subject = match s {
            Token::Literal { .. } => return Err(err(*scol, "literal in subject position")),
            Token::Dot => return Err(err(*scol, "missing subject")),
            t => resolve_iri(&model, t).map_err(|r| err(*scol, &r))?,
        };
        let predicate = match p {
            Token::Bare(b) if b == "a" => Iri::from_static(&format!("{}type", ns::RDF)),
            Token::Literal { .. } => return Err(err(*pcol, "literal in predicate position")),
            Token::Dot => return Err(err(*pcol, "missing predicate")),
            t => resolve_iri(&model, t).map_err(|r| err(*pcol, &r))?,
        };
        let object = match o {
            Token::Literal { lexical, datatype } => {
                let datatype = match datatype {
                    None => xsd("string"),
                    Some(dt) => resolve_iri(&model, dt).map_err(|r| err(*ocol, &r))?,
                };
                Term::Literal(Literal { lexical: lexical.clone(), datatype })
            }
            t => Term::Iri(resolve_iri(&model, t).map_err(|r| err(*ocol, &r))?),
        };
        model.insert(Triple { subject, predicate, object });
    }
    Ok(model)
}

fn parse_prefix(model: &mut Model, tokens: &[(usize, Token)], line: usize) -> Result<(), SyntaxError> {
    let err = |col: usize, reason: &str| SyntaxError { line, col: col + 1, reason: reason.into() };
    let name = match tokens.get(1) {
        Some((c, Token::Bare(b))) => b.strip_suffix(':').ok_or_else(|| err(*c, "prefix name must end with ':'"))?,
        Some((c, _)) => return Err(err(*c, "expected prefix name")),
        None => return Err(err(tokens[0].0, "expected prefix name")),
    };
    if !valid_prefix_name(name) {
        return Err(err(tokens[1].0, "invalid prefix name"));
    }
    let iri = match tokens.get(2) {
        Some((c, Token::Iri(i))) => Iri::new(i).map_err(|e| err(*c, &e.to_string()))?,
        Some((c, _)) => return Err(err(*c, "expected <iri> in prefix declaration")),
        None => return Err(err(tokens[1].0, "expected <iri> in prefix declaration")),
    };
    match tokens.get(3) {
        Some((_, Token::Dot)) if tokens.len() == 4 => {}
        Some((c, _)) => return Err(err(*c, "expected '.' ending prefix declaration")),
        None => return Err(err(tokens[2].0, "missing terminating '.'")),
    }
    model.set_prefix(name, iri);
    Ok(())
}

fn valid_prefix_name(name: &str) -> bool {
    name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        && name.chars().next().is_none_or(|c| c.is_ascii_alphabetic())
}

fn resolve_iri(model: &Model, token: &Token) -> Result<Iri, String> {
    match token {
        Token::Iri(i) => Iri::new(i).map_err(|e| e.to_string()),
        Token::Bare(b) => {
            let Some((prefix, _)) = b.split_once(':') else {
                return Err(format!("expected <iri> or prefix:local, found {b:?}"));
            };
            model.expand_curie(b).ok_or_else(|| format!("undeclared prefix {prefix:?}"))
        }
        _ => Err("expected IRI".into()),
    }
}

/// Compacts IRIs against a prefix map, choosing the longest matching namespace.
pub struct Compactor<'a> {
    by_len: Vec<(&'a str, &'a str)>,
}

impl<'a> Compactor<'a> {
    pub fn new(prefixes: &'a BTreeMap<String, Iri>) -> Self {
        let mut by_len: Vec<(&str, &str)> = prefixes.iter().map(|(n, i)| (n.as_str(), i.as_str())).collect();
        by_len.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
        Compactor { by_len }
    }

    pub fn iri(&self, iri: &Iri) -> String {
        let s = iri.as_str();
        for (name, ns) in &self.by_len {
            if let Some(local) = s.strip_prefix(ns) {
                if valid_local(local) {
                    return format!("{name}:{local}");
                }
            }
        }
        format!("<{s}>")
    }

    pub fn term(&self, term: &Term) -> String {
        match term {
            Term::Iri(i) => self.iri(i),
            Term::Literal(l) if l.is_plain_string() => format!("\"{}\"", escape(&l.lexical)),
            Term::Literal(l) => format!("\"{}\"^^{}", escape(&l.lexical), self.iri(&l.datatype)),
        }
    }
}

fn valid_local(local: &str) -> bool {
    !local.is_empty()
        && !local.ends_with('.')
        && !local.contains(['<', '>', '"', '\\'])
        && !local.chars().any(char::is_whitespace)
}

/// Canonical serialization: sorted prefix header, then statements sorted by
/// their compacted `(subject, predicate, object)` text.
pub fn serialize_document(model: &Model) -> String {
    let compactor = Compactor::new(model.prefixes());
    let mut out = String::new();
    for (name, iri) in model.prefixes() {
        out.push_str(&format!("@prefix {name}: <{iri}> .\n"));
    }
    let mut rows: Vec<(String, String, String)> = model
        .iter()
        .map(|t| (compactor.iri(&t.subject), compactor.iri(&t.predicate), compactor.term(&t.object)))
        .collect();
    rows.sort();
    if !out.is_empty() && !rows.is_empty() {
        out.push('\n');
    }
    for (s, p, o) in rows {
        out.push_str(&s);
        out.push(' ');
        out.push_str(&p);
        out.push(' ');
        out.push_str(&o);
        out.push_str(" .\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_statement_document() {
        let m = parse_document(
            "@prefix t: <http://geni-orca.renci.org/owl/topology.owl#> .\n<urn:a> t:hasInterface <urn:a-if0> .",
        )
        .unwrap();
        assert_eq!(m.len(), 1);
        let t = m.iter().next().unwrap();
        assert_eq!(t.predicate.as_str(), "http://geni-orca.renci.org/owl/topology.owl#hasInterface");
    }

    #[test]
    fn missing_object_is_an_error() {
        let e = parse_document("<urn:a> <urn:p> .").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.reason.contains("missing object"), "{e}");
    }

    #[test]
    fn undeclared_prefix_is_an_error() {
        let e = parse_document("\n<urn:a> x:p <urn:b> .").unwrap_err();
        assert_eq!((e.line, e.col), (2, 9));
        assert!(e.reason.contains("undeclared prefix"));
    }

    #[test]
    fn literal_subject_is_an_error() {
        let e = parse_document("\"x\" <urn:p> <urn:b> .").unwrap_err();
        assert!(e.reason.contains("literal in subject"));
    }

    #[test]
    fn comments_and_hash_iris() {
        let m = parse_document("# header\n<urn:a#x> <urn:p> \"v # not a comment\" . # trailing\n\n").unwrap();
        assert_eq!(m.len(), 1);
        let t = m.iter().next().unwrap();
        assert_eq!(t.subject.as_str(), "urn:a#x");
        assert_eq!(t.object.as_literal().unwrap().lexical, "v # not a comment");
    }

    #[test]
    fn attached_terminator_after_curie() {
        let m = parse_document("@prefix e: <urn:e#> .\ne:a e:p e:b.").unwrap();
        let t = m.iter().next().unwrap();
        assert_eq!(t.object, Term::Iri(Iri::from_static("urn:e#b")));
    }

    #[test]
    fn empty_model_serializes_to_empty_string() {
        assert_eq!(serialize_document(&Model::new()), "");
    }

    #[test]
    fn literal_escapes_round_trip() {
        let mut m = Model::new();
        m.add(&Iri::from_static("urn:a"), &Iri::from_static("urn:p"), Literal::string("a \"q\"\n\\b"));
        let text = serialize_document(&m);
        assert_eq!(parse_document(&text).unwrap(), m);
    }

    #[test]
    fn typed_literals_compact_datatype() {
        let mut m = Model::new();
        m.set_prefix("xsd", Iri::from_static(super::super::term::XSD));
        m.add(&Iri::from_static("urn:a"), &Iri::from_static("urn:p"), Literal::integer(5));
        assert_eq!(
            serialize_document(&m),
            "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n\n<urn:a> <urn:p> \"5\"^^xsd:integer .\n"
        );
    }
}
