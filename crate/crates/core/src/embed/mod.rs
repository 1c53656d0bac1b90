//! Topology embedding: domain binding, inter-domain routing over the
//! delegation view, per-domain expansion over detailed substrates, and
//! atomic resource allocation.

mod alloc;
mod path;

use std::collections::{BTreeMap, BTreeSet};

use crate::graphstore::{Iri, Model};
use crate::models::delegation::{parse_delegations, pool_iri};
use crate::models::request::{RequestLink, SliceRequest};
use crate::models::substrate::{element_pools, interface_owners};
use crate::vocab::{self, ns::terms};

pub use alloc::{
    allocate, check_conservation, path_reservations, release, AllocError, ConservationIssue, Reservation,
};
pub use path::{
    link_labels, shortest_valid_path, shortest_valid_path_traced, simple_paths, validate_candidate, Constraints,
    ExclusionSet, Hop, LabelScope, PathRequest, PathResult, Rejection, DEFAULT_ATTEMPT_LIMIT,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmbedError {
    #[error("insufficient resources for {node}: no domain offers {class}")]
    InsufficientResources { node: Iri, class: Iri },
    #[error("embedding failed at {element}: {reason}")]
    EmbeddingFailed { element: Iri, reason: String },
    #[error("domain {domain} cannot realize {element}: {reason}")]
    InfeasibleDetail { domain: Iri, element: Iri, reason: String },
}

/// Domain and concrete compute class chosen for a request node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Binding {
    pub domain: Iri,
    pub class: Iri,
}

/// Assigns every request node a domain. Bound nodes keep their domain; the
/// rest go first-fit over domains in IRI order. A node requesting class C
/// is satisfied only by units of C or a subclass of C.
pub fn bind_domains(req: &SliceRequest, view: &Model) -> Result<BTreeMap<Iri, Binding>, EmbedError> {
    let delegations = parse_delegations(view);
    let mut free: BTreeMap<(Iri, Iri), i64> = BTreeMap::new();
    for d in &delegations {
        for p in &d.pools {
            *free.entry((d.domain.clone(), p.class.clone())).or_default() += p.units - p.used;
        }
    }
    let mut domains: Vec<&Iri> = delegations.iter().map(|d| &d.domain).collect();
    domains.sort();

    let mut take = |domain: &Iri, requested: &Iri| -> Option<Iri> {
        let class = free
            .iter()
            .find(|((d, c), n)| d == domain && **n > 0 && vocab::is_subclass(view, c, requested))
            .map(|((_, c), _)| c.clone())?;
        *free.get_mut(&(domain.clone(), class.clone())).unwrap() -= 1;
        Some(class)
    };

    let mut out = BTreeMap::new();
    let (bound, unbound): (Vec<_>, Vec<_>) = req.nodes.iter().partition(|n| n.domain.is_some());
    for n in bound {
        let d = n.domain.as_ref().unwrap();
        let class = take(d, &n.class)
            .ok_or_else(|| EmbedError::InsufficientResources { node: n.iri.clone(), class: n.class.clone() })?;
        out.insert(n.iri.clone(), Binding { domain: d.clone(), class });
    }
    for n in unbound {
        let found = domains.iter().find_map(|d| take(d, &n.class).map(|c| ((*d).clone(), c)));
        let (domain, class) =
            found.ok_or_else(|| EmbedError::InsufficientResources { node: n.iri.clone(), class: n.class.clone() })?;
        out.insert(n.iri.clone(), Binding { domain, class });
    }
    Ok(out)
}

/// Where a segment starts or ends inside a domain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Attachment {
    /// The host chosen for a request node.
    Node(Iri),
    /// The owner of a border interface.
    Border(Iri),
}

/// One intra-domain piece of a request link.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SegmentOrder {
    pub link: Iri,
    /// Spoke number: 0 for point-to-point links, one per non-hub member for broadcast links.
    pub spoke: usize,
    /// Position along the spoke's inter-domain route.
    pub seq: usize,
    pub from: Attachment,
    pub to: Attachment,
    pub layer: Iri,
    pub bandwidth: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NodeOrder {
    pub node: Iri,
    pub class: Iri,
}

/// Bandwidth and label to hold on a border interface for an inter-domain crossing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BorderReservation {
    pub iface: Iri,
    pub bandwidth: i64,
    pub label: Option<i64>,
}

/// Everything one domain must provision for a slice.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorkOrder {
    pub nodes: Vec<NodeOrder>,
    pub segments: Vec<SegmentOrder>,
    pub borders: Vec<BorderReservation>,
}

impl WorkOrder {
    pub fn units_by_class(&self) -> BTreeMap<Iri, i64> {
        let mut out = BTreeMap::new();
        for n in &self.nodes {
            *out.entry(n.class.clone()).or_insert(0) += 1;
        }
        out
    }
}

/// A crossing between two domains chosen at the inter-domain level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crossing {
    pub link: Iri,
    pub spoke: usize,
    pub egress: Iri,
    pub ingress: Iri,
    pub label: Option<i64>,
}

/// Result of the broker-level planning step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterDomainPlan {
    pub bindings: BTreeMap<Iri, Binding>,
    pub orders: BTreeMap<Iri, WorkOrder>,
    pub crossings: Vec<Crossing>,
    /// Reservations against the delegation view (units and border resources).
    pub broker_reservations: Vec<Reservation>,
}

fn failed(element: &Iri, reason: impl Into<String>) -> EmbedError {
    EmbedError::EmbeddingFailed { element: element.clone(), reason: reason.into() }
}

/// Spokes of a link as (from node, to node) pairs. A broadcast link is a star
/// whose hub is the member with the smallest (domain, IRI); `domain_of`
/// supplies each member's domain.
pub fn link_spokes(
    link: &RequestLink,
    domain_of: impl Fn(&Iri) -> Option<Iri>,
) -> Result<Vec<(Iri, Iri)>, EmbedError> {
    if !link.broadcast {
        return match link.endpoints.as_slice() {
            [u, v] => Ok(vec![(u.clone(), v.clone())]),
            other => Err(failed(&link.iri, format!("point-to-point link has {} endpoints", other.len()))),
        };
    }
    if link.endpoints.len() < 2 {
        return Err(failed(&link.iri, "broadcast link has fewer than 2 endpoints"));
    }
    let hub = broadcast_hub(link, domain_of).expect("non-empty endpoints");
    Ok(link.endpoints.iter().filter(|m| **m != hub).map(|m| (hub.clone(), m.clone())).collect())
}

/// Hub member of a broadcast link: the first member, by IRI, in the
/// lexicographically first participating domain.
pub fn broadcast_hub(link: &RequestLink, domain_of: impl Fn(&Iri) -> Option<Iri>) -> Option<Iri> {
    link.endpoints.iter().map(|m| (domain_of(m), m)).min().map(|(_, m)| m.clone())
}

/// Binds nodes, routes every link over the delegation view, and splits the
/// result into per-domain work orders. `view` is not modified.
pub fn plan_interdomain(req: &SliceRequest, view: &Model, limit: usize) -> Result<InterDomainPlan, EmbedError> {
    let bindings = bind_domains(req, view)?;
    let mut work = view.clone();
    let mut orders: BTreeMap<Iri, WorkOrder> = BTreeMap::new();
    let mut broker = Vec::new();
    let mut crossings = Vec::new();

    for (node, b) in &bindings {
        orders.entry(b.domain.clone()).or_default().nodes.push(NodeOrder { node: node.clone(), class: b.class.clone() });
        broker.push(Reservation::Units { pool: pool_iri(&b.domain, &b.class), units: 1 });
    }
    allocate(&mut work, &broker).map_err(|e| failed(&req.reservation, e.to_string()))?;

    let mut links: Vec<&RequestLink> = req.links.iter().collect();
    links.sort_by(|a, b| a.iri.cmp(&b.iri));
    for link in links {
        for (spoke, (u, v)) in link_spokes(link, |n| bindings.get(n).map(|b| b.domain.clone()))?.into_iter().enumerate() {
            let (du, dv) = (&bindings[&u].domain, &bindings[&v].domain);
            let segment = |seq, from, to| SegmentOrder {
                link: link.iri.clone(),
                spoke,
                seq,
                from,
                to,
                layer: link.layer.clone(),
                bandwidth: link.bandwidth,
            };
            if du == dv {
                orders.entry(du.clone()).or_default().segments.push(segment(
                    0,
                    Attachment::Node(u.clone()),
                    Attachment::Node(v.clone()),
                ));
                continue;
            }
            let c = Constraints { layer: link.layer.clone(), bandwidth: link.bandwidth, required_label: None };
            let p = PathRequest { source: du.clone(), dest: dv.clone(), constraints: c };
            let route = shortest_valid_path(&work, &p, limit)
                .ok_or_else(|| failed(&link.iri, format!("no inter-domain route from {du} to {dv}")))?;
            let rs = path_reservations(&route);
            allocate(&mut work, &rs).map_err(|e| failed(&link.iri, e.to_string()))?;
            broker.extend(rs);

            let mut from = Attachment::Node(u.clone());
            for (seq, hop) in route.hops.iter().enumerate() {
                let to = match &hop.egress {
                    Some(e) => Attachment::Border(e.clone()),
                    None => Attachment::Node(v.clone()),
                };
                let order = orders.entry(hop.element.clone()).or_default();
                order.segments.push(segment(seq, from, to));
                if let Some(e) = &hop.egress {
                    let label = route.label_of_link(seq);
                    order.borders.push(BorderReservation { iface: e.clone(), bandwidth: link.bandwidth, label });
                    let ingress = route.hops[seq + 1].ingress.clone().expect("next hop has ingress");
                    orders.entry(route.hops[seq + 1].element.clone()).or_default().borders.push(
                        BorderReservation { iface: ingress.clone(), bandwidth: link.bandwidth, label },
                    );
                    crossings.push(Crossing { link: link.iri.clone(), spoke, egress: e.clone(), ingress: ingress.clone(), label });
                    from = Attachment::Border(ingress);
                } else {
                    from = Attachment::Node(v.clone());
                }
            }
        }
    }
    for o in orders.values_mut() {
        o.nodes.sort();
        o.segments.sort();
        o.borders.sort();
    }
    Ok(InterDomainPlan { bindings, orders, crossings, broker_reservations: broker })
}

/// Host chosen for a request node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub node: Iri,
    pub domain: Iri,
    pub class: Iri,
    pub host: Iri,
}

/// A realized intra-domain segment. `path` is `None` when both ends sit on the same device.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentRealization {
    pub link: Iri,
    pub spoke: usize,
    pub seq: usize,
    pub domain: Iri,
    pub from_device: Iri,
    pub to_device: Iri,
    pub path: Option<PathResult>,
}

impl SegmentRealization {
    /// Devices traversed, in order.
    pub fn devices(&self) -> Vec<Iri> {
        match &self.path {
            Some(p) => p.elements().cloned().collect(),
            None => vec![self.from_device.clone()],
        }
    }

    pub fn label(&self, layer: &Iri) -> Option<i64> {
        self.path.as_ref().and_then(|p| p.allocated_label(layer))
    }
}

/// Detailed realization of one domain's work order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainPlan {
    pub domain: Iri,
    pub placements: Vec<Placement>,
    pub segments: Vec<SegmentRealization>,
    pub reservations: Vec<Reservation>,
}

fn infeasible(domain: &Iri, element: &Iri, reason: impl Into<String>) -> EmbedError {
    EmbedError::InfeasibleDetail { domain: domain.clone(), element: element.clone(), reason: reason.into() }
}

/// Realizes a work order against a domain's detailed, entailed substrate
/// model: hosts from first-fit pools, border resources, then one constrained
/// path per segment. Allocation is tentative on a copy; `m` is not modified.
pub fn expand_domain(m: &Model, domain: &Iri, order: &WorkOrder, limit: usize) -> Result<DomainPlan, EmbedError> {
    let t = terms();
    let mut work = m.clone();
    let mut reservations = Vec::new();
    let mut hold = |work: &mut Model, rs: Vec<Reservation>, element: &Iri| -> Result<(), EmbedError> {
        allocate(work, &rs).map_err(|e| infeasible(domain, element, e.to_string()))?;
        reservations.extend(rs);
        Ok(())
    };

    let mut hosts: Vec<Iri> = vocab::instances_of(m, &t.compute_element)
        .chain(vocab::instances_of(m, &t.device))
        .filter(|e| !vocab::is_schema_entity(m, e))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    hosts.sort();

    let mut placements = Vec::new();
    for n in &order.nodes {
        let host = hosts
            .iter()
            .find(|h| element_pools(&work, h).iter().any(|p| p.class == n.class && p.free() >= 1))
            .cloned()
            .ok_or_else(|| infeasible(domain, &n.node, format!("no free {} unit", n.class)))?;
        hold(&mut work, vec![Reservation::Units { pool: host.clone(), units: 1 }], &n.node)?;
        placements.push(Placement { node: n.node.clone(), domain: domain.clone(), class: n.class.clone(), host });
    }

    for b in &order.borders {
        let mut rs = vec![Reservation::Bandwidth { iface: b.iface.clone(), mbps: b.bandwidth }];
        if let Some(v) = b.label {
            rs.push(Reservation::Label { iface: b.iface.clone(), value: v });
        }
        hold(&mut work, rs, &b.iface)?;
    }

    let attach = |a: &Attachment, placements: &[Placement]| -> Result<Iri, EmbedError> {
        match a {
            Attachment::Node(n) => placements
                .iter()
                .find(|p| p.node == *n)
                .map(|p| p.host.clone())
                .ok_or_else(|| infeasible(domain, n, "node is not placed in this domain")),
            Attachment::Border(i) => interface_owners(m, i)
                .min()
                .cloned()
                .ok_or_else(|| infeasible(domain, i, "border interface has no owner")),
        }
    };

    let mut segments = Vec::new();
    for s in &order.segments {
        let from_device = attach(&s.from, &placements)?;
        let to_device = attach(&s.to, &placements)?;
        let path = if from_device == to_device {
            None
        } else {
            let c = Constraints { layer: s.layer.clone(), bandwidth: s.bandwidth, required_label: None };
            let req = PathRequest { source: from_device.clone(), dest: to_device.clone(), constraints: c };
            let p = shortest_valid_path(&work, &req, limit)
                .ok_or_else(|| infeasible(domain, &s.link, format!("no path from {from_device} to {to_device}")))?;
            hold(&mut work, path_reservations(&p), &s.link)?;
            Some(p)
        };
        segments.push(SegmentRealization {
            link: s.link.clone(),
            spoke: s.spoke,
            seq: s.seq,
            domain: domain.clone(),
            from_device,
            to_device,
            path,
        });
    }
    Ok(DomainPlan { domain: domain.clone(), placements, segments, reservations })
}

/// The complete embedding of a request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingPlan {
    pub placements: BTreeMap<Iri, Placement>,
    /// Realized segments per request link, ordered by (spoke, seq).
    pub links: BTreeMap<Iri, Vec<SegmentRealization>>,
    pub crossings: Vec<Crossing>,
    pub broker_reservations: Vec<Reservation>,
    pub domain_reservations: BTreeMap<Iri, Vec<Reservation>>,
}

impl EmbeddingPlan {
    pub fn from_parts(inter: InterDomainPlan, domains: Vec<DomainPlan>) -> Self {
        let mut placements = BTreeMap::new();
        let mut links: BTreeMap<Iri, Vec<SegmentRealization>> = BTreeMap::new();
        let mut domain_reservations = BTreeMap::new();
        for d in domains {
            for p in d.placements {
                placements.insert(p.node.clone(), p);
            }
            for s in d.segments {
                links.entry(s.link.clone()).or_default().push(s);
            }
            domain_reservations.insert(d.domain, d.reservations);
        }
        for segs in links.values_mut() {
            segs.sort_by_key(|s| (s.spoke, s.seq));
        }
        EmbeddingPlan {
            placements,
            links,
            crossings: inter.crossings,
            broker_reservations: inter.broker_reservations,
            domain_reservations,
        }
    }
}

/// Plans and expands a request against a delegation view and detailed
/// substrates (keyed by domain). Nothing is modified.
pub fn embed_request(
    req: &SliceRequest,
    view: &Model,
    substrates: &BTreeMap<Iri, Model>,
    limit: usize,
) -> Result<EmbeddingPlan, EmbedError> {
    let inter = plan_interdomain(req, view, limit)?;
    let mut domains = Vec::new();
    for (d, order) in &inter.orders {
        let m = substrates
            .get(d)
            .ok_or_else(|| infeasible(d, d, "no detailed substrate registered for this domain"))?;
        domains.push(expand_domain(m, d, order, limit)?);
    }
    Ok(EmbeddingPlan::from_parts(inter, domains))
}

/// Applies a plan to the view and every substrate, all or nothing.
pub fn apply_plan(view: &mut Model, substrates: &mut BTreeMap<Iri, Model>, plan: &EmbeddingPlan) -> Result<(), AllocError> {
    let mut new_view = view.clone();
    allocate(&mut new_view, &plan.broker_reservations)?;
    let mut staged = Vec::new();
    for (d, rs) in &plan.domain_reservations {
        let mut m = substrates.get(d).cloned().unwrap_or_default();
        allocate(&mut m, rs)?;
        staged.push((d.clone(), m));
    }
    *view = new_view;
    for (d, m) in staged {
        substrates.insert(d, m);
    }
    Ok(())
}

/// Releases a previously applied plan, all or nothing.
pub fn release_plan(view: &mut Model, substrates: &mut BTreeMap<Iri, Model>, plan: &EmbeddingPlan) -> Result<(), AllocError> {
    let mut new_view = view.clone();
    release(&mut new_view, &plan.broker_reservations)?;
    let mut staged = Vec::new();
    for (d, rs) in &plan.domain_reservations {
        let mut m = substrates.get(d).cloned().unwrap_or_default();
        release(&mut m, rs)?;
        staged.push((d.clone(), m));
    }
    *view = new_view;
    for (d, m) in staged {
        substrates.insert(d, m);
    }
    Ok(())
}
