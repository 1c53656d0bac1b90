//! In-memory triple store, NDL-Lite text format, pattern queries and entailment.

mod entail;
mod format;
mod model;
mod query;
mod term;

pub use entail::{entail, entail_with, EntailError, EntailmentRuleset, DEFAULT_CLOSURE_BUDGET};
pub use format::{parse_document, serialize_document, Compactor, SyntaxError};
pub use model::Model;
pub use query::{parse_bgp, query_bgp, resolve_name, Binding, PatternTerm, QueryError, TriplePattern};
pub use term::{InvalidIri, Iri, Literal, Term, Triple, XSD};

/// Union of several models. On a prefix-name clash the later model wins and
/// a warning is logged.
pub fn merge<'a>(models: impl IntoIterator<Item = &'a Model>) -> Model {
    let mut out = Model::new();
    for m in models {
        for (name, iri) in m.prefixes() {
            if let Some(old) = out.set_prefix(name.clone(), iri.clone()) {
                if old != *iri {
                    log::warn!("prefix {name}: rebound from <{old}> to <{iri}>");
                }
            }
        }
        out.extend_triples(m);
    }
    out
}
