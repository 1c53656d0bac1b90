//! Forward-chaining entailment over a fixed RDFS subset plus inverse properties.
//!
//! Rules:
//! - `A ⊑ B, B ⊑ C  ⟹  A ⊑ C`
//! - `x : A, A ⊑ B  ⟹  x : B`
//! - `p ⊑ q, x p y  ⟹  x q y`
//! - `p inverseOf q, x p y  ⟹  y q x` (and the mirrored direction)
//! - `p domain C, x p y  ⟹  x : C`; `p range C, x p y  ⟹  y : C` for IRI `y`
//!
//! Evaluation is worklist-driven: each newly derived triple is joined only
//! against the current closure, so every rule instance fires once.

use std::collections::VecDeque;

use super::model::Model;
use super::term::{Iri, Term, Triple};
use crate::vocab::ns;

/// Default cap on the number of derived triples.
pub const DEFAULT_CLOSURE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EntailError {
    #[error("entailment derived more than {budget} triples")]
    ClosureBudgetExceeded { budget: usize },
}

/// The schema vocabulary the rules key on.
#[derive(Debug, Clone)]
pub struct EntailmentRuleset {
    pub rdf_type: Iri,
    pub sub_class_of: Iri,
    pub sub_property_of: Iri,
    pub inverse_of: Iri,
    pub domain: Iri,
    pub range: Iri,
}

impl Default for EntailmentRuleset {
    fn default() -> Self {
        EntailmentRuleset {
            rdf_type: ns::rdf("type"),
            sub_class_of: ns::rdfs("subClassOf"),
            sub_property_of: ns::rdfs("subPropertyOf"),
            inverse_of: ns::owl("inverseOf"),
            domain: ns::rdfs("domain"),
            range: ns::rdfs("range"),
        }
    }
}

/// Closure of `m` under the default ruleset and budget.
pub fn entail(m: &Model) -> Result<Model, EntailError> {
    entail_with(m, &EntailmentRuleset::default(), DEFAULT_CLOSURE_BUDGET)
}

pub fn entail_with(m: &Model, rules: &EntailmentRuleset, budget: usize) -> Result<Model, EntailError> {
    let mut closure = m.clone();
    let mut queue: VecDeque<Triple> = m.iter().collect();
    let mut derived = 0usize;
    let mut out = Vec::new();
    while let Some(t) = queue.pop_front() {
        out.clear();
        consequences(&closure, rules, &t, &mut out);
        for new in out.drain(..) {
            if closure.insert(new.clone()) {
                derived += 1;
                if derived > budget {
                    return Err(EntailError::ClosureBudgetExceeded { budget });
                }
                queue.push_back(new);
            }
        }
    }
    Ok(closure)
}

fn consequences(m: &Model, r: &EntailmentRuleset, t: &Triple, out: &mut Vec<Triple>) {
    let Triple { subject: x, predicate: p, object: y } = t;
    let yi = y.as_iri();

    // The triple as schema: it may be the left or right premise of a rule.
    if *p == r.sub_class_of {
        if let Some(b) = yi {
            for c in m.object_iris(b, &r.sub_class_of) {
                out.push(Triple::new(x.clone(), r.sub_class_of.clone(), c));
            }
            for z in m.subjects(&r.sub_class_of, &Term::Iri(x.clone())) {
                out.push(Triple::new(z.clone(), r.sub_class_of.clone(), b));
            }
            for inst in m.subjects(&r.rdf_type, &Term::Iri(x.clone())) {
                out.push(Triple::new(inst.clone(), r.rdf_type.clone(), b));
            }
        }
    } else if *p == r.sub_property_of {
        if let Some(q) = yi {
            for (s, o) in m.pairs(x) {
                out.push(Triple::new(s.clone(), q.clone(), o.clone()));
            }
        }
    } else if *p == r.inverse_of {
        if let Some(q) = yi {
            for (s, o) in m.pairs(x) {
                if let Term::Iri(o) = o {
                    out.push(Triple::new(o.clone(), q.clone(), s));
                }
            }
            for (s, o) in m.pairs(q) {
                if let Term::Iri(o) = o {
                    out.push(Triple::new(o.clone(), x.clone(), s));
                }
            }
        }
    } else if *p == r.domain {
        if let Some(c) = yi {
            for (s, _) in m.pairs(x) {
                out.push(Triple::new(s.clone(), r.rdf_type.clone(), c));
            }
        }
    } else if *p == r.range {
        if let Some(c) = yi {
            for (_, o) in m.pairs(x) {
                if let Term::Iri(o) = o {
                    out.push(Triple::new(o.clone(), r.rdf_type.clone(), c));
                }
            }
        }
    }

    if *p == r.rdf_type {
        if let Some(a) = yi {
            for b in m.object_iris(a, &r.sub_class_of) {
                out.push(Triple::new(x.clone(), r.rdf_type.clone(), b));
            }
        }
    }

    // The triple as data: join with schema statements about its predicate.
    for q in m.object_iris(p, &r.sub_property_of) {
        out.push(Triple::new(x.clone(), q.clone(), y.clone()));
    }
    if let Some(yi) = yi {
        for q in m.object_iris(p, &r.inverse_of) {
            out.push(Triple::new(yi.clone(), q.clone(), x));
        }
        for q in m.subjects(&r.inverse_of, &Term::Iri(p.clone())) {
            out.push(Triple::new(yi.clone(), q.clone(), x));
        }
        for c in m.object_iris(p, &r.range) {
            out.push(Triple::new(yi.clone(), r.rdf_type.clone(), c));
        }
    }
    for c in m.object_iris(p, &r.domain) {
        out.push(Triple::new(x.clone(), r.rdf_type.clone(), c));
    }
}
