//! Delegation documents: the abstract, privacy-preserving summary of a
//! substrate that an aggregate manager hands to a broker.

use std::collections::{BTreeMap, BTreeSet};

use crate::graphstore::{merge, EntailError, Iri, Literal, Model, Term};
use crate::vocab::ns::terms;
use crate::vocab::{self, layer_spec, LabelDomain};

use super::substrate::{interface_pool, SubstrateGraph};

/// IRI of the aggregate pool for `class` in `domain`.
pub fn pool_iri(domain: &Iri, class: &Iri) -> Iri {
    Iri::from_static(&format!("{domain}/pool/{}", class.local_name()))
}

fn label_iri(border: &Iri, value: i64) -> Iri {
    Iri::from_static(&format!("{border}/label/{value}"))
}

/// Summarizes a substrate as one NetworkDomain node with its border interfaces
/// and aggregate compute units.
pub fn build_delegation(s: &SubstrateGraph) -> Model {
    let t = terms();
    let mut out = vocab::prefixed_model();
    for (name, iri) in &s.prefixes {
        if out.prefixes().get(name).is_none() {
            out.set_prefix(name.clone(), iri.clone());
        }
    }
    let d = &s.domain;
    out.add(d, &t.rdf_type, t.network_domain.clone());
    out.add(d, &t.label_translation, Literal::boolean(true));

    for b in &s.border_interfaces {
        let Some(link) = s.link_at(b) else { continue };
        out.add(d, &t.has_interface, b.clone());
        out.add(b, &t.rdf_type, t.border_interface.clone());
        out.add(b, &t.at_layer, link.layer.clone());
        out.add(b, &t.available_bandwidth, Literal::integer(link.capacity.max(0)));
        out.add(b, &t.linked_to, link.other_end(b).clone());
        let spec = layer_spec(&link.layer).filter(|l| matches!(l.labels, LabelDomain::IntRange(..)));
        if let (Some(pool), Some(spec)) = (&link.labels.pool, spec) {
            for &v in pool {
                let l = label_iri(b, v);
                out.add(b, &t.has_label, l.clone());
                out.add(&l, &t.rdf_type, spec.label_class.clone());
                out.add(&l, &t.label_value, Literal::integer(v));
            }
        }
    }

    for (i, b1) in s.border_interfaces.iter().enumerate() {
        let reach = s.reachable_devices(&s.owner[b1]);
        for b2 in &s.border_interfaces[i + 1..] {
            if reach.contains(&s.owner[b2]) {
                out.add(b1, &t.reaches, b2.clone());
                out.add(b2, &t.reaches, b1.clone());
            }
        }
    }

    for (class, units) in s.units_by_class() {
        let p = pool_iri(d, &class);
        out.add(&p, &t.rdf_type, t.server_cloud.clone());
        out.add(&p, &t.offers_class, class);
        out.add(&p, &t.available_units, Literal::integer(units));
        out.add(&p, &t.in_domain, d.clone());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelegatedBorder {
    pub iri: Iri,
    pub peer: Option<Iri>,
    pub layer: Option<Iri>,
    pub bandwidth: i64,
    pub labels: BTreeSet<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelegatedPool {
    pub iri: Iri,
    pub class: Iri,
    pub units: i64,
    pub used: i64,
}

/// Typed view of one delegated domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelegationModel {
    pub domain: Iri,
    pub borders: Vec<DelegatedBorder>,
    pub pools: Vec<DelegatedPool>,
    /// Unordered border pairs with internal connectivity, stored with the smaller IRI first.
    pub reaches: BTreeSet<(Iri, Iri)>,
}

impl DelegationModel {
    /// Free units offered for classes at or below `class`, summed.
    pub fn free_units_for(&self, m: &Model, class: &Iri) -> i64 {
        self.pools.iter().filter(|p| vocab::is_subclass(m, &p.class, class)).map(|p| p.units - p.used).sum()
    }
}

/// Reads every delegated domain from a (possibly merged) entailed delegation view.
pub fn parse_delegations(m: &Model) -> Vec<DelegationModel> {
    let t = terms();
    let mut out = Vec::new();
    for d in vocab::instances_of(m, &t.network_domain) {
        if vocab::is_schema_entity(m, d) {
            continue;
        }
        let borders = m
            .object_iris(d, &t.has_interface)
            .map(|b| DelegatedBorder {
                iri: b.clone(),
                peer: m.object_iris(b, &t.linked_to).min().cloned(),
                layer: m.object_iris(b, &t.at_layer).min().cloned(),
                bandwidth: m.integer(b, &t.available_bandwidth).unwrap_or(0),
                labels: interface_pool(m, b).unwrap_or_default(),
            })
            .collect::<Vec<_>>();
        let mut reaches = BTreeSet::new();
        for b in &borders {
            for r in m.object_iris(&b.iri, &t.reaches) {
                let pair = if b.iri <= *r { (b.iri.clone(), r.clone()) } else { (r.clone(), b.iri.clone()) };
                reaches.insert(pair);
            }
        }
        let pools = m
            .subjects(&t.in_domain, &Term::Iri(d.clone()))
            .filter(|p| m.objects(p, &t.offers_class).next().is_some())
            .flat_map(|p| {
                let units = m.integer(p, &t.available_units).unwrap_or(0);
                let used = m.integer(p, &t.used_units).unwrap_or(0);
                m.object_iris(p, &t.offers_class)
                    .map(move |c| DelegatedPool { iri: p.clone(), class: c.clone(), units, used })
            })
            .collect();
        out.push(DelegationModel { domain: d.clone(), borders, pools, reaches });
    }
    out
}

/// Aggregate delegated units per class, for comparisons against a substrate.
pub fn delegated_units(d: &DelegationModel) -> BTreeMap<Iri, i64> {
    let mut out = BTreeMap::new();
    for p in &d.pools {
        *out.entry(p.class.clone()).or_insert(0) += p.units;
    }
    out
}

/// Merges delegation documents with the schema and entails the result: the
/// broker's view.
pub fn delegation_view<'a>(delegations: impl IntoIterator<Item = &'a Model>) -> Result<Model, EntailError> {
    let merged = merge(delegations);
    vocab::closure_with_schema(&merged, std::iter::empty())
}
