//! Typed view of a provider's substrate description and the residual-state
//! readers shared with the pathfinder and the allocator.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::graphstore::{Iri, Model, Term};
use crate::vocab::ns::terms;
use crate::vocab::{self, layer_spec, AdaptationSpec, LabelDomain};

/// Owners of an interface via `interfaceOf`.
pub fn interface_owners<'a>(m: &'a Model, iface: &Iri) -> impl Iterator<Item = &'a Iri> + 'a {
    m.object_iris(iface, &terms().interface_of)
}

pub fn interface_capacity(m: &Model, iface: &Iri) -> Option<i64> {
    m.integer(iface, &terms().available_bandwidth)
}

pub fn interface_used_bandwidth(m: &Model, iface: &Iri) -> i64 {
    m.integer(iface, &terms().used_bandwidth).unwrap_or(0)
}

/// Integer label values attached through `hasLabel`, or `None` when the
/// interface declares no labels at all.
pub fn interface_pool(m: &Model, iface: &Iri) -> Option<BTreeSet<i64>> {
    let t = terms();
    let labels: Vec<&Iri> = m.object_iris(iface, &t.has_label).collect();
    if labels.is_empty() {
        return None;
    }
    Some(labels.into_iter().filter_map(|l| m.integer(l, &t.label_value)).collect())
}

pub fn interface_used_labels(m: &Model, iface: &Iri) -> BTreeSet<i64> {
    m.objects(iface, &terms().used_label)
        .filter_map(Term::as_literal)
        .filter_map(|l| l.as_integer())
        .collect()
}

/// Layer of a device's switch matrix, if any.
pub fn device_layer(m: &Model, dev: &Iri) -> Option<Iri> {
    let t = terms();
    m.object_iris(dev, &t.has_switch_matrix)
        .flat_map(|sm| m.object_iris(sm, &t.at_layer))
        .min()
        .cloned()
}

pub fn translates_labels(m: &Model, dev: &Iri) -> bool {
    m.first_literal(dev, &terms().label_translation).and_then(|l| l.as_bool()).unwrap_or(false)
}

/// Link layer: `atLayer` of either interface, else the switch-matrix layer of
/// either owner, else Ethernet.
pub fn link_layer(m: &Model, a: &Iri, b: &Iri) -> Iri {
    let t = terms();
    let explicit = [a, b].into_iter().flat_map(|i| m.object_iris(i, &t.at_layer)).min();
    if let Some(l) = explicit {
        return l.clone();
    }
    [a, b]
        .into_iter()
        .flat_map(|i| interface_owners(m, i))
        .filter_map(|d| device_layer(m, d))
        .min()
        .unwrap_or_else(|| t.ethernet.clone())
}

/// Free labels on a link: the pool (if any endpoint restricts it) minus labels in use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeLabels {
    /// `None` means the layer's whole label domain.
    pub pool: Option<BTreeSet<i64>>,
    pub used: BTreeSet<i64>,
}

impl FreeLabels {
    pub fn contains(&self, v: i64, domain: Option<&LabelDomain>) -> bool {
        if self.used.contains(&v) {
            return false;
        }
        match (&self.pool, domain) {
            (Some(p), _) => p.contains(&v),
            (None, Some(LabelDomain::IntRange(lo, hi))) => *lo <= v && v <= *hi,
            (None, _) => true,
        }
    }
}

/// Lowest label free on every link of a scope; with `required`, only that value qualifies.
pub fn lowest_common_label(links: &[&FreeLabels], domain: Option<&LabelDomain>, required: Option<i64>) -> Option<i64> {
    if let Some(r) = required {
        return links.iter().all(|l| l.contains(r, domain)).then_some(r);
    }
    let smallest = links.iter().filter_map(|l| l.pool.as_ref()).min_by_key(|p| p.len());
    let candidates: Box<dyn Iterator<Item = i64>> = match (smallest, domain) {
        (Some(p), _) => Box::new(p.iter().copied().collect::<Vec<_>>().into_iter()),
        (None, Some(LabelDomain::IntRange(lo, hi))) => Box::new(*lo..=*hi),
        (None, _) => return None,
    };
    let mut candidates = candidates;
    candidates.find(|v| links.iter().all(|l| l.contains(*v, domain)))
}

/// Current state of the link joining interfaces `a` and `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkState {
    pub a: Iri,
    pub b: Iri,
    pub layer: Iri,
    /// Minimum of the endpoints' declared capacities; 0 when neither declares one.
    pub capacity: i64,
    /// Minimum of the endpoints' remaining capacities.
    pub residual: i64,
    pub labels: FreeLabels,
}

impl LinkState {
    pub fn read(m: &Model, a: &Iri, b: &Iri) -> Self {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let caps: Vec<(i64, i64)> = [a, b]
            .into_iter()
            .filter_map(|i| interface_capacity(m, i).map(|c| (c, c - interface_used_bandwidth(m, i))))
            .collect();
        let capacity = caps.iter().map(|c| c.0).min().unwrap_or(0);
        let residual = caps.iter().map(|c| c.1).min().unwrap_or(0);
        let pool = match (interface_pool(m, a), interface_pool(m, b)) {
            (Some(x), Some(y)) => Some(x.intersection(&y).copied().collect()),
            (x, y) => x.or(y),
        };
        let mut used = interface_used_labels(m, a);
        used.extend(interface_used_labels(m, b));
        LinkState {
            a: a.clone(),
            b: b.clone(),
            layer: link_layer(m, a, b),
            capacity,
            residual,
            labels: FreeLabels { pool, used },
        }
    }

    pub fn other_end(&self, iface: &Iri) -> &Iri {
        if *iface == self.a {
            &self.b
        } else {
            &self.a
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptationState {
    pub iri: Iri,
    pub spec: AdaptationSpec,
    pub used_slots: u32,
}

impl AdaptationState {
    pub fn spare(&self) -> u32 {
        self.spec.capacity.saturating_sub(self.used_slots)
    }
}

/// Adaptations offered by a device, sorted by IRI. Malformed ones are skipped.
pub fn device_adaptations(m: &Model, dev: &Iri) -> Vec<AdaptationState> {
    let t = terms();
    let mut out: Vec<AdaptationState> = m
        .object_iris(dev, &t.has_adaptation)
        .filter_map(|ad| {
            let client = m.object_iris(ad, &t.client_layer).min()?.clone();
            let server = m.object_iris(ad, &t.server_layer).min()?.clone();
            let capacity = u32::try_from(m.integer(ad, &t.multiplex_capacity)?).ok()?;
            let spec = AdaptationSpec::new(client, server, capacity).ok()?;
            let used_slots = u32::try_from(m.integer(ad, &t.used_client_slots).unwrap_or(0)).unwrap_or(u32::MAX);
            Some(AdaptationState { iri: ad.clone(), spec, used_slots })
        })
        .collect();
    out.sort_by(|a, b| a.iri.cmp(&b.iri));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Device {
    pub iri: Iri,
    /// Most specific class below NetworkElement.
    pub class: Iri,
    pub interfaces: Vec<Iri>,
    pub layer: Option<Iri>,
    pub adaptations: Vec<AdaptationState>,
    pub label_translation: bool,
}

/// Compute capacity of one class offered by one element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComputePool {
    pub iri: Iri,
    pub class: Iri,
    pub units: i64,
    pub used: i64,
}

impl ComputePool {
    pub fn free(&self) -> i64 {
        self.units - self.used
    }
}

/// Compute pools advertised by `element`: one per `offersClass`, or a single
/// unit of the element's own class for classified compute elements.
pub fn element_pools(m: &Model, element: &Iri) -> Vec<ComputePool> {
    let t = terms();
    let units = m.integer(element, &t.available_units);
    let used = m.integer(element, &t.used_units).unwrap_or(0);
    let offered: Vec<&Iri> = m.object_iris(element, &t.offers_class).collect();
    if !offered.is_empty() {
        return offered
            .into_iter()
            .map(|c| ComputePool { iri: element.clone(), class: c.clone(), units: units.unwrap_or(1), used })
            .collect();
    }
    match vocab::most_specific_type(m, element, &t.classified_ce) {
        Some(c) if c != t.classified_ce => {
            vec![ComputePool { iri: element.clone(), class: c, units: units.unwrap_or(1), used }]
        }
        _ => Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstrateGraph {
    pub domain: Iri,
    pub devices: Vec<Device>,
    pub links: Vec<LinkState>,
    pub pools: Vec<ComputePool>,
    /// Locally owned interfaces typed BorderInterface, sorted.
    pub border_interfaces: Vec<Iri>,
    /// Owner device of every locally owned interface.
    pub owner: BTreeMap<Iri, Iri>,
    pub prefixes: BTreeMap<String, Iri>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SubstrateProblem {
    DomainCount(usize),
    DanglingInterface(Iri),
    SharedInterface(Iri),
    NegativeCapacity(Iri),
    LabelOutsideDomain { interface: Iri, value: i64 },
}

impl fmt::Display for SubstrateProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubstrateProblem::DomainCount(n) => write!(f, "expected exactly one NetworkDomain, found {n}"),
            SubstrateProblem::DanglingInterface(i) => write!(f, "interface {i} belongs to no device"),
            SubstrateProblem::SharedInterface(i) => write!(f, "interface {i} belongs to several devices"),
            SubstrateProblem::NegativeCapacity(i) => write!(f, "interface {i} has negative capacity"),
            SubstrateProblem::LabelOutsideDomain { interface, value } => {
                write!(f, "label {value} on {interface} lies outside its layer's domain")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid substrate: {}", .problems.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct SubstrateError {
    pub problems: Vec<SubstrateProblem>,
}

/// Builds the typed view of an entailed substrate model.
pub fn parse_substrate(m: &Model) -> Result<SubstrateGraph, SubstrateError> {
    let t = terms();
    let mut problems = BTreeSet::new();

    let domains: Vec<&Iri> =
        vocab::instances_of(m, &t.network_domain).filter(|d| !vocab::is_schema_entity(m, d)).collect();
    if domains.len() != 1 {
        return Err(SubstrateError { problems: vec![SubstrateProblem::DomainCount(domains.len())] });
    }
    let domain = domains[0].clone();

    let mut device_iris: BTreeSet<&Iri> = vocab::instances_of(m, &t.device).collect();
    device_iris.extend(vocab::instances_of(m, &t.compute_element));
    device_iris.retain(|d| !vocab::is_schema_entity(m, d));

    let mut owner = BTreeMap::new();
    let interfaces: Vec<&Iri> =
        vocab::instances_of(m, &t.interface).filter(|i| !vocab::is_schema_entity(m, i)).collect();
    for &i in &interfaces {
        let owners: Vec<&Iri> = interface_owners(m, i).filter(|o| device_iris.contains(o)).collect();
        match owners.as_slice() {
            [o] => {
                owner.insert(i.clone(), (*o).clone());
            }
            [] => {
                let foreign = vocab::has_type(m, i, &t.border_interface)
                    || m.object_iris(i, &t.linked_to).any(|p| vocab::has_type(m, p, &t.border_interface));
                if !foreign {
                    problems.insert(SubstrateProblem::DanglingInterface(i.clone()));
                }
            }
            _ => {
                problems.insert(SubstrateProblem::SharedInterface(i.clone()));
            }
        }
    }

    let devices: Vec<Device> = device_iris
        .iter()
        .map(|&d| Device {
            iri: d.clone(),
            class: vocab::most_specific_type(m, d, &t.network_element).unwrap_or_else(|| t.network_element.clone()),
            interfaces: owner.iter().filter(|(_, o)| *o == d).map(|(i, _)| i.clone()).collect(),
            layer: device_layer(m, d),
            adaptations: device_adaptations(m, d),
            label_translation: translates_labels(m, d),
        })
        .collect();

    let mut links = Vec::new();
    let mut seen = BTreeSet::new();
    for i in owner.keys() {
        for peer in m.object_iris(i, &t.linked_to) {
            let key = if i <= peer { (i.clone(), peer.clone()) } else { (peer.clone(), i.clone()) };
            if seen.insert(key.clone()) {
                links.push(LinkState::read(m, &key.0, &key.1));
            }
        }
    }
    links.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));

    for l in &links {
        for i in [&l.a, &l.b] {
            if interface_capacity(m, i).is_some_and(|c| c < 0) {
                problems.insert(SubstrateProblem::NegativeCapacity(i.clone()));
            }
            if let (Some(pool), Some(spec)) = (interface_pool(m, i), layer_spec(&l.layer)) {
                for v in pool {
                    if !spec.labels.admits(&v.to_string()) {
                        problems.insert(SubstrateProblem::LabelOutsideDomain { interface: i.clone(), value: v });
                    }
                }
            }
        }
    }

    if !problems.is_empty() {
        return Err(SubstrateError { problems: problems.into_iter().collect() });
    }

    let pools = device_iris.iter().flat_map(|d| element_pools(m, d)).collect();
    let border_interfaces =
        owner.keys().filter(|i| vocab::has_type(m, i, &t.border_interface)).cloned().collect();

    Ok(SubstrateGraph {
        domain,
        devices,
        links,
        pools,
        border_interfaces,
        owner,
        prefixes: m.prefixes().clone(),
    })
}

impl SubstrateGraph {
    pub fn device(&self, iri: &Iri) -> Option<&Device> {
        self.devices.iter().find(|d| d.iri == *iri)
    }

    /// The link with `iface` as one endpoint.
    pub fn link_at(&self, iface: &Iri) -> Option<&LinkState> {
        self.links.iter().find(|l| l.a == *iface || l.b == *iface)
    }

    /// Links with both endpoints owned inside this domain.
    pub fn internal_links(&self) -> impl Iterator<Item = &LinkState> {
        self.links.iter().filter(|l| self.owner.contains_key(&l.a) && self.owner.contains_key(&l.b))
    }

    /// Devices reachable from `start` over internal links.
    pub fn reachable_devices(&self, start: &Iri) -> BTreeSet<Iri> {
        let mut adj: BTreeMap<&Iri, Vec<&Iri>> = BTreeMap::new();
        for l in self.internal_links() {
            let (x, y) = (&self.owner[&l.a], &self.owner[&l.b]);
            adj.entry(x).or_default().push(y);
            adj.entry(y).or_default().push(x);
        }
        let mut seen = BTreeSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(d) = queue.pop_front() {
            for n in adj.get(d).into_iter().flatten() {
                if seen.insert((*n).clone()) {
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    /// Total free units per compute class.
    pub fn units_by_class(&self) -> BTreeMap<Iri, i64> {
        let mut out = BTreeMap::new();
        for p in &self.pools {
            *out.entry(p.class.clone()).or_insert(0) += p.units;
        }
        out
    }
}
