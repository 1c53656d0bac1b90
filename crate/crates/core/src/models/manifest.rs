//! Slice manifests: the request plus the provisioned entities, each linked
//! back to the request element it realizes.

use std::collections::{BTreeMap, BTreeSet};

use crate::embed::{link_spokes, EmbeddingPlan};
use crate::graphstore::{merge, Iri, Literal, Model, Term};
use crate::vocab::{self, ns::terms};

use super::request::SliceRequest;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ManifestError {
    #[error("plan has no allocation for {0}")]
    PlanIncomplete(Iri),
    #[error("slice id {0:?} must be non-empty and use only letters, digits, '-', '_' or '.'")]
    BadSliceId(String),
}

pub fn valid_slice_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
}

/// Short, IRI-safe names for request elements, unique within the request.
fn element_tags(req: &SliceRequest) -> BTreeMap<Iri, String> {
    let mut iris: Vec<&Iri> = req.nodes.iter().map(|n| &n.iri).chain(req.links.iter().map(|l| &l.iri)).collect();
    iris.sort();
    let mut used = BTreeSet::new();
    let mut out = BTreeMap::new();
    for iri in iris {
        let s = iri.as_str();
        let tail = s.rsplit_once('#').map(|(_, t)| t).or_else(|| s.rsplit_once(':').map(|(_, t)| t)).unwrap_or(s);
        let base: String =
            tail.chars().map(|c| if c.is_ascii_alphanumeric() || "-_./".contains(c) { c } else { '-' }).collect();
        let base = if base.is_empty() { "element".to_string() } else { base };
        let mut tag = base.clone();
        let mut k = 1;
        while !used.insert(tag.clone()) {
            tag = format!("{base}~{k}");
            k += 1;
        }
        out.insert(iri.clone(), tag);
    }
    out
}

fn mk(slice: &str, tail: &str) -> Iri {
    Iri::from_static(&format!("urn:slice:{slice}/{tail}"))
}

/// IRI of the provisioned entity for a request element.
pub fn provisioned_iri(slice: &str, tag: &str, ordinal: usize) -> Iri {
    mk(slice, &format!("{tag}/{ordinal}"))
}

pub fn management_address(slice: &str, tag: &str, domain: &Iri) -> String {
    format!("{}.{slice}.{}", tag.replace('/', "-"), domain.local_name()).to_lowercase()
}

/// Builds the manifest for slice `slice` from a request and a complete plan.
pub fn build_manifest(req: &SliceRequest, plan: &EmbeddingPlan, slice: &str) -> Result<Model, ManifestError> {
    if !valid_slice_id(slice) {
        return Err(ManifestError::BadSliceId(slice.to_string()));
    }
    let t = terms();
    let tags = element_tags(req);
    let mut m = merge([&vocab::prefixed_model(), &req.source]);

    let mut vm_of = BTreeMap::new();
    for n in &req.nodes {
        let p = plan.placements.get(&n.iri).ok_or_else(|| ManifestError::PlanIncomplete(n.iri.clone()))?;
        let tag = &tags[&n.iri];
        let vm = provisioned_iri(slice, tag, 0);
        m.add(&vm, &t.rdf_type, p.class.clone());
        m.add(&vm, &t.provisioned_from, n.iri.clone());
        m.add(&vm, &t.hosted_on, p.host.clone());
        m.add(&vm, &t.in_domain, p.domain.clone());
        m.add(&vm, &t.management_address, Literal::string(management_address(slice, tag, &p.domain)));
        vm_of.insert(n.iri.clone(), vm);
    }

    for link in &req.links {
        let segs = plan.links.get(&link.iri).filter(|s| !s.is_empty());
        let segs = segs.ok_or_else(|| ManifestError::PlanIncomplete(link.iri.clone()))?;
        let tag = &tags[&link.iri];
        let domain_of = |n: &Iri| plan.placements.get(n).map(|p| p.domain.clone());
        let spokes = link_spokes(link, domain_of).map_err(|_| ManifestError::PlanIncomplete(link.iri.clone()))?;

        let hub = if link.broadcast {
            let hub = mk(slice, &format!("{tag}/hub"));
            m.add(&hub, &t.rdf_type, t.link_hub.clone());
            m.add(&hub, &t.provisioned_from, link.iri.clone());
            let hub_member = &spokes.first().map(|s| s.0.clone()).unwrap_or_else(|| link.endpoints[0].clone());
            m.add(&hub, &t.next_hop, vm_of[hub_member].clone());
            Some(hub)
        } else {
            None
        };

        for (spoke, (u, v)) in spokes.iter().enumerate() {
            let start = hub.clone().unwrap_or_else(|| vm_of[u].clone());
            let mut prev = start;
            let mut index = 0;
            let mut last_device: Option<Iri> = None;
            let spoke_segs = segs.iter().filter(|s| s.spoke == spoke);
            let mut any = false;
            for s in spoke_segs {
                any = true;
                let path = mk(slice, &format!("{tag}/{spoke}/seg/{}", s.seq));
                m.add(&path, &t.rdf_type, t.path.clone());
                m.add(&path, &t.provisioned_from, link.iri.clone());
                m.add(&path, &t.in_domain, s.domain.clone());
                if let Some(l) = s.label(&link.layer) {
                    m.add(&path, &t.allocated_label, Literal::integer(l));
                }
                for dev in s.devices() {
                    if last_device.as_ref() == Some(&dev) {
                        continue;
                    }
                    let hop = mk(slice, &format!("{tag}/{spoke}/hop/{index}"));
                    m.add(&hop, &t.rdf_type, t.hop.clone());
                    m.add(&hop, &t.hop_element, dev.clone());
                    m.add(&hop, &t.hop_index, Literal::integer(index as i64));
                    m.add(&hop, &t.on_path, path.clone());
                    m.add(&prev, &t.next_hop, hop.clone());
                    prev = hop;
                    index += 1;
                    last_device = Some(dev);
                }
            }
            if !any {
                return Err(ManifestError::PlanIncomplete(link.iri.clone()));
            }
            m.add(&prev, &t.next_hop, vm_of[v].clone());
        }
    }
    Ok(m)
}

/// True iff contracting the manifest's degree-2 hop chains yields the request
/// topology under the `provisionedFrom` correspondence. Point-to-point links
/// are edges; a broadcast link is a hub node joined to each member.
pub fn check_homeomorphic(req: &SliceRequest, manifest: &Model) -> bool {
    let t = terms();
    let is_a = |x: &Iri, c: &Iri| manifest.contains_parts(x, &t.rdf_type, &Term::Iri(c.clone()));

    let mut corr: BTreeMap<Iri, Iri> = BTreeMap::new();
    let mut realized = BTreeSet::new();
    for (x, r) in manifest.pairs(&t.provisioned_from) {
        let Some(r) = r.as_iri() else { return false };
        realized.insert(r.clone());
        if !is_a(x, &t.path) && !is_a(x, &t.hop) && corr.insert(x.clone(), r.clone()).is_some() {
            return false;
        }
    }
    let elements = req.nodes.iter().map(|n| &n.iri).chain(req.links.iter().map(|l| &l.iri));
    if elements.into_iter().any(|e| !realized.contains(e)) {
        return false;
    }

    let mut adj: BTreeMap<Iri, Vec<Iri>> = BTreeMap::new();
    for (a, b) in manifest.pairs(&t.next_hop) {
        let Some(b) = b.as_iri() else { return false };
        adj.entry(a.clone()).or_default().push(b.clone());
        adj.entry(b.clone()).or_default().push(a.clone());
    }
    for (n, nbrs) in &adj {
        if !corr.contains_key(n) && nbrs.len() != 2 {
            return false;
        }
    }

    let mut found: Vec<(Iri, Iri)> = Vec::new();
    for (start, nbrs) in &adj {
        let Some(from) = corr.get(start) else { continue };
        for first in nbrs {
            let (mut prev, mut cur) = (start.clone(), first.clone());
            let mut steps = 0;
            while !corr.contains_key(&cur) {
                let next = adj[&cur].iter().find(|n| **n != prev).cloned();
                let Some(next) = next else { return false };
                prev = std::mem::replace(&mut cur, next);
                steps += 1;
                if steps > adj.len() {
                    return false;
                }
            }
            let to = &corr[&cur];
            found.push(if from <= to { (from.clone(), to.clone()) } else { (to.clone(), from.clone()) });
        }
    }
    found.sort();
    // Every contracted edge is discovered once from each end.
    let mut contracted = Vec::new();
    for pair in found.chunks(2) {
        if pair.len() != 2 || pair[0] != pair[1] {
            return false;
        }
        contracted.push(pair[0].clone());
    }

    let mut expected: Vec<(Iri, Iri)> = Vec::new();
    for l in &req.links {
        if l.broadcast {
            for m in &l.endpoints {
                expected.push(if l.iri <= *m { (l.iri.clone(), m.clone()) } else { (m.clone(), l.iri.clone()) });
            }
        } else if let [u, v] = l.endpoints.as_slice() {
            expected.push(if u <= v { (u.clone(), v.clone()) } else { (v.clone(), u.clone()) });
        } else {
            return false;
        }
    }
    expected.sort();
    contracted == expected
}
