//! Basic graph pattern matching.

use std::collections::BTreeMap;
use std::fmt;

use super::model::Model;
use super::term::{xsd, Iri, Literal, Term};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternTerm {
    Var(String),
    Const(Term),
}

impl PatternTerm {
    pub fn var(name: &str) -> Self {
        PatternTerm::Var(name.trim_start_matches('?').to_string())
    }

    pub fn iri(iri: &Iri) -> Self {
        PatternTerm::Const(Term::Iri(iri.clone()))
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Var(v) => write!(f, "?{v}"),
            PatternTerm::Const(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(subject: PatternTerm, predicate: PatternTerm, object: PatternTerm) -> Self {
        TriplePattern { subject, predicate, object }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        [&self.subject, &self.predicate, &self.object].into_iter().filter_map(|t| match t {
            PatternTerm::Var(v) => Some(v.as_str()),
            PatternTerm::Const(_) => None,
        })
    }
}

/// Variable name (without `?`) to bound term.
pub type Binding = BTreeMap<String, Term>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("empty pattern")]
    EmptyPattern,
    #[error("pattern syntax: {0}")]
    Syntax(String),
}

/// All solutions of a conjunctive triple pattern, sorted by bound values.
pub fn query_bgp(m: &Model, patterns: &[TriplePattern]) -> Result<Vec<Binding>, QueryError> {
    if patterns.is_empty() {
        return Err(QueryError::EmptyPattern);
    }
    let mut results = Vec::new();
    let mut remaining: Vec<&TriplePattern> = patterns.iter().collect();
    solve(m, &mut remaining, &mut Binding::new(), &mut results);
    results.sort_by(|a, b| a.values().cmp(b.values()));
    results.dedup();
    Ok(results)
}

fn resolve<'a>(t: &'a PatternTerm, b: &'a Binding) -> Option<&'a Term> {
    match t {
        PatternTerm::Const(c) => Some(c),
        PatternTerm::Var(v) => b.get(v),
    }
}

fn bound_count(p: &TriplePattern, b: &Binding) -> usize {
    [&p.subject, &p.predicate, &p.object].iter().filter(|t| resolve(t, b).is_some()).count()
}

fn solve(m: &Model, remaining: &mut Vec<&TriplePattern>, binding: &mut Binding, out: &mut Vec<Binding>) {
    if remaining.is_empty() {
        out.push(binding.clone());
        return;
    }
    // Most-bound pattern first.
    let (idx, _) = remaining
        .iter()
        .enumerate()
        .max_by_key(|(i, p)| (bound_count(p, binding), std::cmp::Reverse(*i)))
        .expect("non-empty");
    let pat = remaining.remove(idx);

    let s = resolve(&pat.subject, binding).cloned();
    let p = resolve(&pat.predicate, binding).cloned();
    let o = resolve(&pat.object, binding).cloned();
    let s_iri = match &s {
        Some(Term::Iri(i)) => Some(i.clone()),
        Some(Term::Literal(_)) => None,
        None => None,
    };
    let p_iri = match &p {
        Some(Term::Iri(i)) => Some(i.clone()),
        _ => None,
    };
    let impossible = matches!(s, Some(Term::Literal(_))) || matches!(p, Some(Term::Literal(_)));
    if !impossible {
        for t in m.matching(s_iri.as_ref(), p_iri.as_ref(), o.as_ref()) {
            let mut added = Vec::new();
            let ok = bind(&pat.subject, Term::Iri(t.subject), binding, &mut added)
                && bind(&pat.predicate, Term::Iri(t.predicate), binding, &mut added)
                && bind(&pat.object, t.object, binding, &mut added);
            if ok {
                solve(m, remaining, binding, out);
            }
            for v in added {
                binding.remove(&v);
            }
        }
    }
    remaining.insert(idx, pat);
}

fn bind(t: &PatternTerm, value: Term, b: &mut Binding, added: &mut Vec<String>) -> bool {
    match t {
        PatternTerm::Const(_) => true,
        PatternTerm::Var(v) => match b.get(v) {
            Some(existing) => *existing == value,
            None => {
                b.insert(v.clone(), value);
                added.push(v.clone());
                true
            }
        },
    }
}

/// Parses `?s prefix:p ?o . <iri> ?p "lit"` style pattern text against a prefix map.
pub fn parse_bgp(text: &str, prefixes: &Model) -> Result<Vec<TriplePattern>, QueryError> {
    let mut patterns = Vec::new();
    let mut terms = Vec::new();
    for tok in tokenize(text)? {
        if tok == "." {
            if terms.is_empty() {
                continue;
            }
            patterns.push(close(&mut terms)?);
            continue;
        }
        terms.push(parse_term(&tok, prefixes)?);
    }
    if !terms.is_empty() {
        patterns.push(close(&mut terms)?);
    }
    if patterns.is_empty() {
        return Err(QueryError::EmptyPattern);
    }
    Ok(patterns)
}

fn close(terms: &mut Vec<PatternTerm>) -> Result<TriplePattern, QueryError> {
    if terms.len() != 3 {
        return Err(QueryError::Syntax(format!("expected 3 terms per pattern, found {}", terms.len())));
    }
    let o = terms.pop().unwrap();
    let p = terms.pop().unwrap();
    let s = terms.pop().unwrap();
    Ok(TriplePattern::new(s, p, o))
}

fn tokenize(text: &str) -> Result<Vec<String>, QueryError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            let mut s = String::from("\"");
            chars.next();
            let mut closed = false;
            for c in chars.by_ref() {
                s.push(c);
                if c == '"' {
                    closed = true;
                    break;
                }
            }
            if !closed {
                return Err(QueryError::Syntax("unterminated literal".into()));
            }
            out.push(s);
        } else {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                s.push(c);
                chars.next();
            }
            if s.len() > 1 && s.ends_with('.') && !s.starts_with('<') {
                s.pop();
                out.push(s);
                out.push(".".into());
            } else {
                out.push(s);
            }
        }
    }
    Ok(out)
}

fn parse_term(tok: &str, prefixes: &Model) -> Result<PatternTerm, QueryError> {
    if let Some(v) = tok.strip_prefix('?') {
        if v.is_empty() {
            return Err(QueryError::Syntax("empty variable name".into()));
        }
        return Ok(PatternTerm::Var(v.to_string()));
    }
    if let Some(lex) = tok.strip_prefix('"').and_then(|t| t.strip_suffix('"')) {
        return Ok(PatternTerm::Const(Term::Literal(Literal { lexical: lex.into(), datatype: xsd("string") })));
    }
    resolve_name(tok, prefixes).map(|i| PatternTerm::Const(Term::Iri(i)))
}

/// Resolves `<iri>`, `prefix:local`, or a bare absolute IRI.
pub fn resolve_name(tok: &str, prefixes: &Model) -> Result<Iri, QueryError> {
    if let Some(inner) = tok.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
        return Iri::new(inner).map_err(|e| QueryError::Syntax(e.to_string()));
    }
    if tok == "a" {
        return Ok(crate::vocab::ns::rdf("type"));
    }
    if let Some(i) = prefixes.expand_curie(tok) {
        return Ok(i);
    }
    if tok.contains("://") || tok.starts_with("urn:") {
        return Iri::new(tok).map_err(|e| QueryError::Syntax(e.to_string()));
    }
    Err(QueryError::Syntax(format!("cannot resolve {tok:?}")))
}
