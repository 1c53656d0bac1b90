//! Constrained shortest-path search with validate-and-retry.
//!
//! Candidates come out in order of hop count, ties broken by the sequence
//! of (neighbor, via-interfaces) keys. Each candidate is validated for
//! endpoint layer, bandwidth, adaptations, transit reachability and label
//! continuity; an invalid candidate joins the exclusion set and the search
//! runs again, up to `limit` attempts.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, VecDeque};
use std::fmt;

use crate::graphstore::{Iri, Model, Term};
use crate::models::substrate::{device_adaptations, lowest_common_label, translates_labels, LinkState};
use crate::pathquery::{adjacent, sub_graph, HopWitness, PathExpr};
use crate::vocab::ns::terms;
use crate::vocab::{self, layer_spec, LabelDomain};

pub const DEFAULT_ATTEMPT_LIMIT: usize = 10;

/// Upper bound on partial paths expanded by one search, guarding against
/// pathological dense graphs.
const EXPANSION_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraints {
    pub layer: Iri,
    pub bandwidth: i64,
    pub required_label: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathRequest {
    pub source: Iri,
    pub dest: Iri,
    pub constraints: Constraints,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hop {
    pub element: Iri,
    pub ingress: Option<Iri>,
    pub egress: Option<Iri>,
    /// Layer of the link entering this hop (leaving it, for the first hop).
    pub layer: Iri,
}

/// A maximal run of links sharing one label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelScope {
    pub layer: Iri,
    /// Indexes into [`PathResult::links`], inclusive.
    pub first_link: usize,
    pub last_link: usize,
    /// `None` for layers without integer labels.
    pub label: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathResult {
    pub hops: Vec<Hop>,
    pub links: Vec<LinkState>,
    pub scopes: Vec<LabelScope>,
    /// Adaptations consumed at layer changes, one slot each.
    pub adaptations: Vec<Iri>,
    pub bandwidth: i64,
    pub internal_elements: Vec<Iri>,
    /// Candidates examined, including the accepted one.
    pub attempts: usize,
}

impl PathResult {
    /// Label of the first scope at the requested layer.
    pub fn allocated_label(&self, layer: &Iri) -> Option<i64> {
        self.scopes.iter().find(|s| s.layer == *layer).and_then(|s| s.label)
    }

    pub fn hop_count(&self) -> usize {
        self.links.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = &Iri> {
        self.hops.iter().map(|h| &h.element)
    }

    /// Label carried by link `i`.
    pub fn label_of_link(&self, i: usize) -> Option<i64> {
        self.scopes.iter().find(|s| s.first_link <= i && i <= s.last_link).and_then(|s| s.label)
    }

    /// Line-oriented rendering: `HOP n element ingress egress` per hop (`-`
    /// for an absent interface), then `INTERNAL e` lines, then `LABEL n` when
    /// `layer` carries one.
    pub fn listing(&self, layer: &Iri) -> String {
        let opt = |i: &Option<Iri>| i.as_ref().map(|i| i.to_string()).unwrap_or_else(|| "-".into());
        let mut out = String::new();
        for (n, h) in self.hops.iter().enumerate() {
            out += &format!("HOP {n} {} {} {}\n", h.element, opt(&h.ingress), opt(&h.egress));
        }
        for e in &self.internal_elements {
            out += &format!("INTERNAL {e}\n");
        }
        if let Some(l) = self.allocated_label(layer) {
            out += &format!("LABEL {l}\n");
        }
        out
    }
}

/// Why a candidate was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    EndpointLayer,
    Bandwidth { link: usize },
    Adaptation { hop: usize },
    Transit { hop: usize },
    Label { scope: usize },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::EndpointLayer => f.write_str("end links not at the requested layer"),
            Rejection::Bandwidth { link } => write!(f, "insufficient bandwidth on link {link}"),
            Rejection::Adaptation { hop } => write!(f, "no spare adaptation at hop {hop}"),
            Rejection::Transit { hop } => write!(f, "hop {hop} cannot connect its ingress to its egress"),
            Rejection::Label { scope } => write!(f, "no common free label in scope {scope}"),
        }
    }
}

type EdgeKey = (Iri, Vec<Iri>);

/// Hop sequences already found invalid in one search.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExclusionSet {
    paths: BTreeSet<Vec<EdgeKey>>,
}

impl ExclusionSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    fn insert(&mut self, chain: &[HopWitness]) -> bool {
        self.paths.insert(keys(chain))
    }

    fn contains(&self, chain: &[EdgeKey]) -> bool {
        self.paths.contains(chain)
    }
}

fn keys(chain: &[HopWitness]) -> Vec<EdgeKey> {
    chain.iter().map(|w| (w.neighbor.clone(), w.via.clone())).collect()
}

/// Device adjacency with memoized witnesses.
pub(crate) struct Adjacency<'m> {
    m: &'m Model,
    conn: PathExpr,
    reverse: PathExpr,
    cache: HashMap<Iri, Vec<HopWitness>>,
}

impl<'m> Adjacency<'m> {
    pub(crate) fn new(m: &'m Model) -> Self {
        let t = terms();
        let reverse = PathExpr::Seq(vec![
            PathExpr::inverse(PathExpr::pred(&t.interface_of)),
            PathExpr::inverse(PathExpr::pred(&t.linked_to)),
            PathExpr::inverse(PathExpr::pred(&t.has_interface)),
        ]);
        Adjacency { m, conn: PathExpr::device_adjacency(), reverse, cache: HashMap::new() }
    }

    pub(crate) fn next(&mut self, n: &Iri) -> &[HopWitness] {
        if !self.cache.contains_key(n) {
            let hops = adjacent(self.m, n, &self.conn);
            self.cache.insert(n.clone(), hops);
        }
        &self.cache[n]
    }

    /// Hop distances to `target` ignoring simplicity; a lower bound for any simple path.
    fn distances_to(&self, target: &Iri) -> HashMap<Iri, usize> {
        let mut dist = HashMap::from([(target.clone(), 0)]);
        let mut queue = VecDeque::from([target.clone()]);
        while let Some(n) = queue.pop_front() {
            let d = dist[&n];
            for w in adjacent(self.m, &n, &self.reverse) {
                if !dist.contains_key(&w.neighbor) {
                    dist.insert(w.neighbor.clone(), d + 1);
                    queue.push_back(w.neighbor);
                }
            }
        }
        dist
    }
}

/// The next shortest simple path from `s` to `d` whose hop sequence is not excluded.
fn next_shortest(
    adj: &mut Adjacency<'_>,
    dist: &HashMap<Iri, usize>,
    s: &Iri,
    d: &Iri,
    excluded: &ExclusionSet,
) -> Option<Vec<HopWitness>> {
    struct Partial {
        chain: Vec<HopWitness>,
    }
    let h0 = *dist.get(s)?;
    // Heap key: (f = g + h, key sequence, insertion counter); payload kept in a side table.
    let mut heap: BinaryHeap<Reverse<(usize, Vec<EdgeKey>, usize)>> = BinaryHeap::new();
    let mut store: Vec<Option<Partial>> = vec![Some(Partial { chain: Vec::new() })];
    heap.push(Reverse((h0, Vec::new(), 0)));
    let mut expanded = 0;
    while let Some(Reverse((_, key, idx))) = heap.pop() {
        let partial = store[idx].take().expect("each entry popped once");
        let at = partial.chain.last().map_or(s, |w| &w.neighbor).clone();
        if at == *d {
            if !excluded.contains(&key) {
                return Some(partial.chain);
            }
            continue;
        }
        expanded += 1;
        if expanded > EXPANSION_CAP {
            log::warn!("path search from {s} to {d} exceeded {EXPANSION_CAP} expansions");
            return None;
        }
        let visited: BTreeSet<&Iri> = std::iter::once(s).chain(partial.chain.iter().map(|w| &w.neighbor)).collect();
        let g = partial.chain.len() + 1;
        for w in adj.next(&at).to_vec() {
            if visited.contains(&w.neighbor) {
                continue;
            }
            let Some(h) = dist.get(&w.neighbor) else { continue };
            let mut chain = partial.chain.clone();
            let mut k = key.clone();
            k.push((w.neighbor.clone(), w.via.clone()));
            chain.push(w);
            store.push(Some(Partial { chain }));
            heap.push(Reverse((g + h, k, store.len() - 1)));
        }
    }
    None
}

/// Finds a feasible path of minimal hop count among candidates not yet
/// excluded, trying at most `limit` candidates.
pub fn shortest_valid_path(m: &Model, p: &PathRequest, limit: usize) -> Option<PathResult> {
    shortest_valid_path_traced(m, p, limit, |_, _| {})
}

/// As [`shortest_valid_path`], reporting each rejected candidate to `on_reject`.
pub fn shortest_valid_path_traced(
    m: &Model,
    p: &PathRequest,
    limit: usize,
    mut on_reject: impl FnMut(&[HopWitness], &Rejection),
) -> Option<PathResult> {
    if p.source == p.dest || p.constraints.bandwidth < 0 {
        return None;
    }
    let mut adj = Adjacency::new(m);
    let dist = adj.distances_to(&p.dest);
    let mut excluded = ExclusionSet::default();
    let mut attempts = 0;
    while attempts < limit {
        attempts += 1;
        let chain = next_shortest(&mut adj, &dist, &p.source, &p.dest, &excluded)?;
        match validate_candidate(m, &p.constraints, &chain) {
            Ok(mut result) => {
                result.attempts = attempts;
                return Some(result);
            }
            Err(why) => {
                log::debug!("candidate {attempts} rejected: {why}");
                on_reject(&chain, &why);
                excluded.insert(&chain);
            }
        }
    }
    None
}

/// Checks one candidate hop chain against the constraints and, if feasible,
/// assigns labels and adaptations.
pub fn validate_candidate(m: &Model, c: &Constraints, chain: &[HopWitness]) -> Result<PathResult, Rejection> {
    let t = terms();
    let links: Vec<LinkState> = chain
        .iter()
        .map(|w| {
            let a = w.via.first().unwrap_or(&w.origin);
            let b = w.via.last().unwrap_or(&w.neighbor);
            LinkState::read(m, a, b)
        })
        .collect();
    let n = links.len();
    if n == 0 || links[0].layer != c.layer || links[n - 1].layer != c.layer {
        return Err(Rejection::EndpointLayer);
    }
    if let Some(i) = links.iter().position(|l| l.residual < c.bandwidth) {
        return Err(Rejection::Bandwidth { link: i });
    }

    let mut hops = Vec::with_capacity(n + 1);
    hops.push(Hop {
        element: chain[0].origin.clone(),
        ingress: None,
        egress: chain[0].via.first().cloned(),
        layer: links[0].layer.clone(),
    });
    for (i, w) in chain.iter().enumerate() {
        hops.push(Hop {
            element: w.neighbor.clone(),
            ingress: w.via.last().cloned(),
            egress: chain.get(i + 1).and_then(|next| next.via.first().cloned()),
            layer: links[i].layer.clone(),
        });
    }

    let mut adaptations = Vec::new();
    for i in 1..n {
        let (hop, l_in, l_out) = (&hops[i], &links[i - 1].layer, &links[i].layer);
        if vocab::has_type(m, &hop.element, &t.network_domain) {
            let (ing, eg) = (hop.ingress.as_ref().unwrap(), hop.egress.as_ref().unwrap());
            if ing != eg && !m.contains_parts(ing, &t.reaches, &Term::Iri(eg.clone())) {
                return Err(Rejection::Transit { hop: i });
            }
        }
        if l_in != l_out {
            let ad = device_adaptations(m, &hop.element)
                .into_iter()
                .find(|a| a.spec.joins(l_in, l_out) && a.spare() >= 1)
                .ok_or(Rejection::Adaptation { hop: i })?;
            adaptations.push(ad.iri);
        }
    }

    let mut scopes: Vec<LabelScope> = Vec::new();
    for (i, l) in links.iter().enumerate() {
        let split = i == 0 || links[i - 1].layer != l.layer || translates_labels(m, &hops[i].element);
        if split {
            scopes.push(LabelScope { layer: l.layer.clone(), first_link: i, last_link: i, label: None });
        } else {
            scopes.last_mut().unwrap().last_link = i;
        }
    }
    for (k, s) in scopes.iter_mut().enumerate() {
        let domain = layer_spec(&s.layer).map(|spec| &spec.labels);
        if !matches!(domain, Some(LabelDomain::IntRange(..))) {
            continue;
        }
        let free: Vec<_> = links[s.first_link..=s.last_link].iter().map(|l| &l.labels).collect();
        let required = if s.layer == c.layer { c.required_label } else { None };
        s.label = Some(lowest_common_label(&free, domain, required).ok_or(Rejection::Label { scope: k })?);
    }

    Ok(PathResult {
        hops,
        links,
        scopes,
        adaptations,
        bandwidth: c.bandwidth,
        internal_elements: sub_graph(chain),
        attempts: 0,
    })
}

/// Every simple path from `s` to `d` in hop order, capped at `max` paths.
/// Exposed for diagnostics and exhaustive comparisons.
pub fn simple_paths(m: &Model, s: &Iri, d: &Iri, max: usize) -> Vec<Vec<HopWitness>> {
    let mut adj = Adjacency::new(m);
    let dist = adj.distances_to(d);
    let mut excluded = ExclusionSet::default();
    let mut out = Vec::new();
    while out.len() < max {
        let Some(chain) = next_shortest(&mut adj, &dist, s, d, &excluded) else { break };
        excluded.insert(&chain);
        out.push(chain);
    }
    out
}

/// Per-link label assignment as (link index, label) pairs.
pub fn link_labels(p: &PathResult) -> BTreeMap<usize, i64> {
    (0..p.links.len()).filter_map(|i| p.label_of_link(i).map(|l| (i, l))).collect()
}
