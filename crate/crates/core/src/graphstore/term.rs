//! RDF term model: IRIs, literals and triples.

use std::fmt;
use std::sync::Arc;

/// XML Schema datatype namespace.
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// An absolute IRI. Cheap to clone; compared by exact bytes.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(Arc<str>);

impl Iri {
    /// Builds an IRI, rejecting empty strings and strings containing whitespace.
    pub fn new(value: impl AsRef<str>) -> Result<Self, InvalidIri> {
        let value = value.as_ref();
        if value.is_empty() || value.chars().any(char::is_whitespace) || value.contains(['<', '>', '"']) {
            return Err(InvalidIri(value.to_string()));
        }
        Ok(Iri(Arc::from(value)))
    }

    /// Builds an IRI from a string the caller knows to be valid.
    ///
    /// Panics on an invalid value; intended for vocabulary constants.
    pub fn from_static(value: &str) -> Self {
        Self::new(value).expect("invalid IRI constant")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Portion after the last `#` or `/`, or the whole IRI if neither occurs.
    pub fn local_name(&self) -> &str {
        let s = self.as_str();
        match s.rfind(['#', '/']) {
            Some(i) if i + 1 < s.len() => &s[i + 1..],
            _ => s,
        }
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid IRI {0:?}")]
pub struct InvalidIri(pub String);

/// A typed literal. Plain strings carry `xsd:string`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub lexical: String,
    pub datatype: Iri,
}

impl Literal {
    pub fn string(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), datatype: xsd("string") }
    }

    pub fn integer(value: i64) -> Self {
        Literal { lexical: value.to_string(), datatype: xsd("integer") }
    }

    pub fn boolean(value: bool) -> Self {
        Literal { lexical: value.to_string(), datatype: xsd("boolean") }
    }

    pub fn date_time(value: chrono::DateTime<chrono::Utc>) -> Self {
        Literal {
            lexical: value.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            datatype: xsd("dateTime"),
        }
    }

    /// Integer value, if the lexical form parses as one. The datatype is not
    /// required to be `xsd:integer` so that plain literals like `"5"` work.
    pub fn as_integer(&self) -> Option<i64> {
        self.lexical.trim().parse().ok()
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.lexical.as_str() {
            "true" | "1" => Some(true),
            "false" | "0" => Some(false),
            _ => None,
        }
    }

    pub fn as_date_time(&self) -> Option<chrono::DateTime<chrono::Utc>> {
        chrono::DateTime::parse_from_rfc3339(&self.lexical)
            .ok()
            .map(|t| t.with_timezone(&chrono::Utc))
    }

    pub fn is_plain_string(&self) -> bool {
        self.datatype.as_str() == format!("{XSD}string")
    }
}

pub(crate) fn xsd(local: &str) -> Iri {
    Iri::from_static(&format!("{XSD}{local}"))
}

/// An object-position term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(i) => Some(i),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            Term::Iri(_) => None,
        }
    }
}

impl From<Iri> for Term {
    fn from(i: Iri) -> Self {
        Term::Iri(i)
    }
}

impl From<&Iri> for Term {
    fn from(i: &Iri) -> Self {
        Term::Iri(i.clone())
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "<{i}>"),
            Term::Literal(l) => write!(f, "\"{}\"^^<{}>", escape(&l.lexical), l.datatype),
        }
    }
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// A statement. Subjects are always IRIs (no blank nodes, no literal subjects).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple { subject, predicate, object: object.into() }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}> <{}> {} .", self.subject, self.predicate, self.object)
    }
}
