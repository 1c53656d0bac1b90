//! Typed view of a slice request.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};

use crate::graphstore::{EntailError, Iri, Model};
use crate::vocab::ns::terms;
use crate::vocab::{self};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestNode {
    pub iri: Iri,
    /// Most specific class at or below ComputeElement.
    pub class: Iri,
    pub domain: Option<Iri>,
    pub image: Option<String>,
    pub post_boot_script: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestLink {
    pub iri: Iri,
    /// Interface stubs, sorted.
    pub interfaces: Vec<Iri>,
    /// Owning request nodes of the stubs, sorted and deduplicated.
    pub endpoints: Vec<Iri>,
    pub layer: Iri,
    pub bandwidth: i64,
    pub broadcast: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub begin: DateTime<Utc>,
    pub duration_seconds: i64,
}

impl Term {
    pub fn end(&self) -> DateTime<Utc> {
        self.begin + chrono::Duration::seconds(self.duration_seconds)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceRequest {
    pub reservation: Iri,
    pub nodes: Vec<RequestNode>,
    pub links: Vec<RequestLink>,
    pub term: Term,
    /// The request document as submitted; manifests start from these triples.
    pub source: Model,
}

impl SliceRequest {
    pub fn node(&self, iri: &Iri) -> Option<&RequestNode> {
        self.nodes.iter().find(|n| n.iri == *iri)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RequestError {
    #[error("expected exactly one Reservation, found {0}")]
    ReservationCount(usize),
    #[error("request element {0} is neither a compute element nor a connection")]
    UntypedElement(Iri),
    #[error("reservation has no term with a beginning and a duration")]
    MissingTerm,
    #[error("term duration must be positive, got {0}")]
    NonPositiveDuration(i64),
    #[error(transparent)]
    Entailment(#[from] EntailError),
}

/// Reads a request from a model already merged with the schema and entailed.
pub fn parse_request(m: &Model) -> Result<SliceRequest, RequestError> {
    parse_with_source(m, m.clone())
}

/// Merges `doc` with the built-in schema (plus `extensions`), entails, and
/// parses, keeping `doc` itself as the request source.
pub fn parse_request_document<'a>(
    doc: &Model,
    extensions: impl IntoIterator<Item = &'a Model>,
) -> Result<SliceRequest, RequestError> {
    let closed = vocab::closure_with_schema(doc, extensions)?;
    parse_with_source(&closed, doc.clone())
}

fn parse_with_source(m: &Model, source: Model) -> Result<SliceRequest, RequestError> {
    let t = terms();
    let reservations: Vec<&Iri> =
        vocab::instances_of(m, &t.reservation).filter(|r| !vocab::is_schema_entity(m, r)).collect();
    if reservations.len() != 1 {
        return Err(RequestError::ReservationCount(reservations.len()));
    }
    let reservation = reservations[0].clone();

    let interval = m.object_iris(&reservation, &t.has_term).min().ok_or(RequestError::MissingTerm)?;
    let begin = m
        .first_literal(interval, &t.has_beginning)
        .and_then(|l| l.as_date_time())
        .ok_or(RequestError::MissingTerm)?;
    let duration_seconds = m.integer(interval, &t.has_duration_seconds).ok_or(RequestError::MissingTerm)?;
    if duration_seconds <= 0 {
        return Err(RequestError::NonPositiveDuration(duration_seconds));
    }

    let elements: BTreeSet<&Iri> = m.object_iris(&reservation, &t.element).collect();
    let mut nodes = Vec::new();
    let mut link_iris = Vec::new();
    for &e in &elements {
        if vocab::has_type(m, e, &t.compute_element) {
            nodes.push(RequestNode {
                iri: e.clone(),
                class: vocab::most_specific_type(m, e, &t.compute_element).unwrap_or_else(|| t.compute_element.clone()),
                domain: m.object_iris(e, &t.in_domain).min().cloned(),
                image: m.first_literal(e, &t.disk_image).map(|l| l.lexical.clone()),
                post_boot_script: m.first_literal(e, &t.post_boot_script).map(|l| l.lexical.clone()),
            });
        } else if vocab::has_type(m, e, &t.network_connection) || vocab::has_type(m, e, &t.broadcast_connection) {
            link_iris.push(e);
        } else {
            return Err(RequestError::UntypedElement(e.clone()));
        }
    }

    let node_set: BTreeSet<&Iri> = nodes.iter().map(|n| &n.iri).collect();
    let links = link_iris
        .into_iter()
        .map(|l| {
            let interfaces: Vec<Iri> = m.object_iris(l, &t.has_interface).cloned().collect();
            let endpoints: BTreeSet<Iri> = interfaces
                .iter()
                .flat_map(|i| m.object_iris(i, &t.interface_of))
                .filter(|o| node_set.contains(o))
                .cloned()
                .collect();
            RequestLink {
                iri: l.clone(),
                interfaces,
                endpoints: endpoints.into_iter().collect(),
                layer: m.object_iris(l, &t.at_layer).min().cloned().unwrap_or_else(|| t.ethernet.clone()),
                bandwidth: m.integer(l, &t.bandwidth).unwrap_or(0),
                broadcast: vocab::has_type(m, l, &t.broadcast_connection),
            }
        })
        .collect();

    Ok(SliceRequest {
        reservation,
        nodes,
        links,
        term: Term { begin, duration_seconds },
        source,
    })
}
