//! The built-in T-box: a reduced NDL-OWL core covering topology, layers,
//! compute, request, time and manifest terms, plus A-box conformance checks.

pub mod ns;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use crate::graphstore::{Iri, Model, Term};
use ns::terms;

/// Label value domain for a layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelDomain {
    /// Inclusive integer range.
    IntRange(i64, i64),
    DottedQuad,
}

impl LabelDomain {
    pub fn admits(&self, lexical: &str) -> bool {
        match self {
            LabelDomain::IntRange(lo, hi) => lexical.trim().parse::<i64>().is_ok_and(|v| *lo <= v && v <= *hi),
            LabelDomain::DottedQuad => lexical.parse::<std::net::Ipv4Addr>().is_ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSpec {
    pub layer: Iri,
    pub label_class: Iri,
    pub labels: LabelDomain,
}

/// Built-in layers: Ethernet (VLAN 2–4094), DWDM (lambda 1–80), IPv4 (dotted quad).
pub fn builtin_layers() -> &'static [LayerSpec] {
    static LAYERS: OnceLock<Vec<LayerSpec>> = OnceLock::new();
    LAYERS.get_or_init(|| {
        let t = terms();
        vec![
            LayerSpec { layer: t.ethernet.clone(), label_class: t.vlan.clone(), labels: LabelDomain::IntRange(2, 4094) },
            LayerSpec { layer: t.dwdm.clone(), label_class: t.lambda.clone(), labels: LabelDomain::IntRange(1, 80) },
            LayerSpec { layer: t.ip_layer.clone(), label_class: t.ip_address.clone(), labels: LabelDomain::DottedQuad },
        ]
    })
}

pub fn layer_spec(layer: &Iri) -> Option<&'static LayerSpec> {
    builtin_layers().iter().find(|l| l.layer == *layer)
}

/// A device capability multiplexing client-layer connections onto one
/// server-layer connection.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AdaptationSpec {
    pub client: Iri,
    pub server: Iri,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdaptationError {
    #[error("adaptation client and server layer are both {0}")]
    SameLayer(Iri),
    #[error("adaptation capacity must be at least 1")]
    ZeroCapacity,
}

impl AdaptationSpec {
    pub fn new(client: Iri, server: Iri, capacity: u32) -> Result<Self, AdaptationError> {
        if client == server {
            return Err(AdaptationError::SameLayer(client));
        }
        if capacity == 0 {
            return Err(AdaptationError::ZeroCapacity);
        }
        Ok(AdaptationSpec { client, server, capacity })
    }

    /// True if this adaptation joins the two layers in either direction.
    pub fn joins(&self, a: &Iri, b: &Iri) -> bool {
        (self.client == *a && self.server == *b) || (self.client == *b && self.server == *a)
    }
}

enum PropKind {
    Object,
    Data,
}

/// The built-in schema, constructed once.
pub fn builtin_schema() -> Model {
    static SCHEMA: OnceLock<Model> = OnceLock::new();
    SCHEMA.get_or_init(build_schema).clone()
}

/// A model carrying the standard prefix map and no triples.
pub fn prefixed_model() -> Model {
    let mut m = Model::new();
    for (name, iri) in ns::PREFIXES {
        m.set_prefix(*name, Iri::from_static(iri));
    }
    m
}

fn build_schema() -> Model {
    let t = terms();
    let mut m = prefixed_model();

    let classes: &[(&Iri, Option<&Iri>)] = &[
        (&t.network_element, None),
        (&t.network_domain, Some(&t.network_element)),
        (&t.device, Some(&t.network_element)),
        (&t.transport_element, Some(&t.network_element)),
        (&t.interface, Some(&t.transport_element)),
        (&t.border_interface, Some(&t.interface)),
        (&t.network_connection, Some(&t.transport_element)),
        (&t.broadcast_connection, Some(&t.transport_element)),
        (&t.switch_matrix, Some(&t.network_element)),
        (&t.ethernet, Some(&t.network_element)),
        (&t.ip_layer, Some(&t.network_element)),
        (&t.dwdm, Some(&t.network_element)),
        (&t.layer, None),
        (&t.label, None),
        (&t.vlan, Some(&t.label)),
        (&t.ip_address, Some(&t.label)),
        (&t.lambda, Some(&t.label)),
        (&t.adaptation, None),
        (&t.compute_element, Some(&t.network_element)),
        (&t.server_cloud, Some(&t.compute_element)),
        (&t.testbed, Some(&t.compute_element)),
        (&t.classified_ce, Some(&t.compute_element)),
        (&t.bare_metal, Some(&t.classified_ce)),
        (&t.vm, Some(&t.classified_ce)),
        (&t.reservation, None),
        (&t.interval, None),
        (&t.path, Some(&t.network_element)),
        (&t.hop, Some(&t.network_element)),
        (&t.link_hub, Some(&t.network_element)),
    ];
    for (class, parent) in classes {
        m.add(class, &t.rdf_type, &t.owl_class);
        if let Some(parent) = parent {
            m.add(class, &t.sub_class_of, *parent);
        }
    }
    for layer in [&t.ethernet, &t.ip_layer, &t.dwdm] {
        m.add(layer, &t.rdf_type, &t.layer);
    }
    let disjoint_roots = [&t.network_element, &t.reservation, &t.interval, &t.label, &t.adaptation];
    for (i, a) in disjoint_roots.iter().enumerate() {
        for b in &disjoint_roots[i + 1..] {
            m.add(a, &t.disjoint_with, *b);
        }
    }

    use PropKind::*;
    let props: &[(&Iri, PropKind, &Iri, &Iri)] = &[
        (&t.has_interface, Object, &t.network_element, &t.interface),
        (&t.interface_of, Object, &t.interface, &t.network_element),
        (&t.linked_to, Object, &t.interface, &t.interface),
        (&t.connected_to, Object, &t.network_element, &t.network_element),
        (&t.at_layer, Object, &t.network_element, &t.layer),
        (&t.in_domain, Object, &t.network_element, &t.network_domain),
        (&t.has_label, Object, &t.network_element, &t.label),
        (&t.has_switch_matrix, Object, &t.device, &t.switch_matrix),
        (&t.has_adaptation, Object, &t.device, &t.adaptation),
        (&t.client_layer, Object, &t.adaptation, &t.layer),
        (&t.server_layer, Object, &t.adaptation, &t.layer),
        (&t.reaches, Object, &t.interface, &t.interface),
        (&t.offers_class, Object, &t.compute_element, &t.rdfs_class),
        (&t.element, Object, &t.reservation, &t.network_element),
        (&t.req_in_domain, Object, &t.network_element, &t.network_domain),
        (&t.has_term, Object, &t.reservation, &t.interval),
        (&t.provisioned_from, Object, &t.network_element, &t.network_element),
        (&t.hop_element, Object, &t.hop, &t.network_element),
        (&t.on_path, Object, &t.hop, &t.path),
        (&t.next_hop, Object, &t.network_element, &t.network_element),
        (&t.hosted_on, Object, &t.network_element, &t.network_element),
        (&t.label_value, Data, &t.label, &t.rdfs_literal),
        (&t.available_bandwidth, Data, &t.network_element, &t.xsd_integer),
        (&t.used_bandwidth, Data, &t.interface, &t.xsd_integer),
        (&t.used_label, Data, &t.interface, &t.xsd_integer),
        (&t.available_units, Data, &t.network_element, &t.xsd_integer),
        (&t.used_units, Data, &t.network_element, &t.xsd_integer),
        (&t.multiplex_capacity, Data, &t.adaptation, &t.xsd_integer),
        (&t.used_client_slots, Data, &t.adaptation, &t.xsd_integer),
        (&t.label_translation, Data, &t.network_element, &t.xsd_boolean),
        (&t.bandwidth, Data, &t.network_element, &t.xsd_integer),
        (&t.disk_image, Data, &t.compute_element, &t.xsd_string),
        (&t.post_boot_script, Data, &t.compute_element, &t.xsd_string),
        (&t.has_beginning, Data, &t.interval, &t.xsd_date_time),
        (&t.has_duration_seconds, Data, &t.interval, &t.xsd_integer),
        (&t.hop_index, Data, &t.hop, &t.xsd_integer),
        (&t.management_address, Data, &t.network_element, &t.xsd_string),
        (&t.allocated_label, Data, &t.path, &t.xsd_integer),
    ];
    for (p, kind, domain, range) in props {
        let kind_class = match kind {
            Object => &t.owl_object_property,
            Data => &t.owl_datatype_property,
        };
        m.add(p, &t.rdf_type, kind_class);
        m.add(p, &t.domain, *domain);
        m.add(p, &t.range, *range);
    }
    m.add(&t.has_interface, &t.inverse_of, &t.interface_of);
    for symmetric in [&t.linked_to, &t.connected_to, &t.reaches] {
        m.add(symmetric, &t.inverse_of, symmetric);
    }
    m.add(&t.req_in_domain, &t.sub_property_of, &t.in_domain);
    m
}

/// Property IRIs declared by the built-in schema.
pub fn schema_properties() -> BTreeSet<Iri> {
    let t = terms();
    let s = builtin_schema();
    let mut out: BTreeSet<Iri> = s.subjects(&t.rdf_type, &Term::Iri(t.owl_object_property.clone())).cloned().collect();
    out.extend(s.subjects(&t.rdf_type, &Term::Iri(t.owl_datatype_property.clone())).cloned());
    out
}

/// `rdf:type` objects of `x`.
pub fn types_of<'a>(m: &'a Model, x: &Iri) -> impl Iterator<Item = &'a Iri> + 'a {
    m.object_iris(x, &terms().rdf_type)
}

pub fn has_type(m: &Model, x: &Iri, class: &Iri) -> bool {
    m.contains_parts(x, &terms().rdf_type, &Term::Iri(class.clone()))
}

/// Instances of `class` in sorted order (direct typing; run on an entailed model for closure).
pub fn instances_of<'a>(m: &'a Model, class: &Iri) -> impl Iterator<Item = &'a Iri> + 'a {
    m.subjects(&terms().rdf_type, &Term::Iri(class.clone()))
}

/// `a ⊑ b` on an entailed model (reflexive).
pub fn is_subclass(m: &Model, a: &Iri, b: &Iri) -> bool {
    a == b || m.contains_parts(a, &terms().sub_class_of, &Term::Iri(b.clone()))
}

/// Most specific class of `x` among those below `root`: deepest by superclass
/// count, ties broken by IRI.
pub fn most_specific_type(m: &Model, x: &Iri, root: &Iri) -> Option<Iri> {
    let t = terms();
    types_of(m, x)
        .filter(|c| is_subclass(m, c, root))
        .map(|c| (m.object_iris(c, &t.sub_class_of).filter(|s| *s != c).count(), c))
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(a.1)))
        .map(|(_, c)| c.clone())
}

/// Schema-level entities: classes, properties and anything defined by schema axioms.
pub fn is_schema_entity(m: &Model, x: &Iri) -> bool {
    let t = terms();
    let kinds = [&t.owl_class, &t.rdfs_class, &t.rdf_property, &t.owl_object_property, &t.owl_datatype_property];
    if kinds.iter().any(|k| has_type(m, x, k)) {
        return true;
    }
    let axioms = [&t.sub_class_of, &t.sub_property_of, &t.domain, &t.range, &t.inverse_of, &t.disjoint_with];
    axioms.iter().any(|p| m.objects(x, p).next().is_some())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConformanceIssue {
    /// An instance with no type known to the schema.
    Untyped { subject: Iri },
    /// A property used on a subject whose types are disjoint with the property's domain.
    DomainViolation { subject: Iri, property: Iri, domain: Iri },
    /// A label whose value lies outside its layer's label domain.
    LabelOutOfDomain { label: Iri, class: Iri, value: String },
    /// An interface that is not attached to any element.
    DetachedInterface { interface: Iri },
}

impl fmt::Display for ConformanceIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConformanceIssue::Untyped { subject } => write!(f, "UNTYPED {subject}"),
            ConformanceIssue::DomainViolation { subject, property, domain } => {
                write!(f, "DOMAIN {subject} {property} expects {domain}")
            }
            ConformanceIssue::LabelOutOfDomain { label, class, value } => {
                write!(f, "LABEL {label} value {value:?} outside {class} domain")
            }
            ConformanceIssue::DetachedInterface { interface } => write!(f, "DETACHED {interface}"),
        }
    }
}

/// Checks an A-box merged with the schema and entailed. Issues are sorted.
pub fn validate_conformance(m: &Model) -> Vec<ConformanceIssue> {
    let t = terms();
    let mut issues = BTreeSet::new();

    let mut known_classes: BTreeSet<&Iri> = instances_of(m, &t.owl_class).collect();
    known_classes.extend(instances_of(m, &t.rdfs_class));

    let abox: Vec<&Iri> = m.subject_iris().filter(|s| !is_schema_entity(m, s)).collect();

    for &x in &abox {
        if !types_of(m, x).any(|c| known_classes.contains(c)) {
            issues.insert(ConformanceIssue::Untyped { subject: x.clone() });
        }
        let types: Vec<&Iri> = types_of(m, x).collect();
        for p in m.predicates_of(x) {
            if *p == t.rdf_type {
                continue;
            }
            for d in m.object_iris(p, &t.domain) {
                let supers = std::iter::once(d).chain(m.object_iris(d, &t.sub_class_of));
                let violated = supers.into_iter().any(|ds| {
                    types.iter().any(|ty| {
                        m.contains_parts(ty, &t.disjoint_with, &Term::Iri(ds.clone()))
                            || m.contains_parts(ds, &t.disjoint_with, &Term::Iri((*ty).clone()))
                    })
                });
                if violated {
                    issues.insert(ConformanceIssue::DomainViolation {
                        subject: x.clone(),
                        property: p.clone(),
                        domain: d.clone(),
                    });
                }
            }
        }
    }

    for spec in builtin_layers() {
        for label in instances_of(m, &spec.label_class) {
            for value in m.objects(label, &t.label_value).filter_map(Term::as_literal) {
                if !spec.labels.admits(&value.lexical) {
                    issues.insert(ConformanceIssue::LabelOutOfDomain {
                        label: label.clone(),
                        class: spec.label_class.clone(),
                        value: value.lexical.clone(),
                    });
                }
            }
        }
    }

    for i in instances_of(m, &t.interface) {
        if is_schema_entity(m, i) || m.objects(i, &t.interface_of).next().is_some() {
            continue;
        }
        let remote_peer = m.object_iris(i, &t.linked_to).any(|peer| has_type(m, peer, &t.border_interface));
        if !remote_peer {
            issues.insert(ConformanceIssue::DetachedInterface { interface: i.clone() });
        }
    }

    issues.into_iter().collect()
}

/// Convenience: merges `doc` with the built-in schema and any extensions, then entails.
pub fn closure_with_schema<'a>(
    doc: &Model,
    extensions: impl IntoIterator<Item = &'a Model>,
) -> Result<Model, crate::graphstore::EntailError> {
    let schema = builtin_schema();
    let mut merged = crate::graphstore::merge([&schema]);
    for ext in extensions {
        merged = crate::graphstore::merge([&merged, ext]);
    }
    merged = crate::graphstore::merge([&merged, doc]);
    crate::graphstore::entail(&merged)
}
