//! Residual-state bookkeeping. In-use amounts live in the model itself as
//! `usedBandwidth`, `usedLabel`, `usedUnits` and `usedClientSlots` facts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::graphstore::{Iri, Literal, Model, Term, Triple};
use crate::models::substrate::{interface_capacity, interface_pool, interface_used_labels, link_layer};
use crate::vocab::layer_spec;
use crate::vocab::ns::terms;

use super::path::PathResult;

/// One unit of resource consumption against a single entity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Reservation {
    Bandwidth { iface: Iri, mbps: i64 },
    Label { iface: Iri, value: i64 },
    Units { pool: Iri, units: i64 },
    Adaptation { adaptation: Iri, slots: i64 },
}

impl fmt::Display for Reservation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reservation::Bandwidth { iface, mbps } => write!(f, "bandwidth {mbps} on {iface}"),
            Reservation::Label { iface, value } => write!(f, "label {value} on {iface}"),
            Reservation::Units { pool, units } => write!(f, "{units} units of {pool}"),
            Reservation::Adaptation { adaptation, slots } => write!(f, "{slots} slots of {adaptation}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AllocError {
    #[error("over-allocation: {0}")]
    OverAllocation(Reservation),
    #[error("double release: {0}")]
    DoubleRelease(Reservation),
}

fn other_end(m: &Model, iface: &Iri) -> Option<Iri> {
    m.object_iris(iface, &terms().linked_to).min().cloned()
}

fn apply_one(m: &mut Model, r: &Reservation) -> Result<(), AllocError> {
    let t = terms();
    let over = || AllocError::OverAllocation(r.clone());
    match r {
        Reservation::Bandwidth { iface, mbps } => {
            let used = m.integer(iface, &t.used_bandwidth).unwrap_or(0) + mbps;
            if *mbps < 0 || interface_capacity(m, iface).is_some_and(|cap| used > cap) {
                return Err(over());
            }
            m.set_integer(iface, &t.used_bandwidth, used, true);
        }
        Reservation::Label { iface, value } => {
            if interface_used_labels(m, iface).contains(value) {
                return Err(over());
            }
            let admitted = match interface_pool(m, iface) {
                Some(pool) => pool.contains(value),
                None => {
                    let layer = match other_end(m, iface) {
                        Some(peer) => link_layer(m, iface, &peer),
                        None => t.ethernet.clone(),
                    };
                    layer_spec(&layer).is_none_or(|s| s.labels.admits(&value.to_string()))
                }
            };
            if !admitted {
                return Err(over());
            }
            m.add(iface, &t.used_label, Literal::integer(*value));
        }
        Reservation::Units { pool, units } => {
            let used = m.integer(pool, &t.used_units).unwrap_or(0) + units;
            let available = m.integer(pool, &t.available_units).unwrap_or(1);
            if *units < 0 || used > available {
                return Err(over());
            }
            m.set_integer(pool, &t.used_units, used, true);
        }
        Reservation::Adaptation { adaptation, slots } => {
            let used = m.integer(adaptation, &t.used_client_slots).unwrap_or(0) + slots;
            let cap = m.integer(adaptation, &t.multiplex_capacity).unwrap_or(0);
            if *slots < 0 || used > cap {
                return Err(over());
            }
            m.set_integer(adaptation, &t.used_client_slots, used, true);
        }
    }
    Ok(())
}

fn release_one(m: &mut Model, r: &Reservation) -> Result<(), AllocError> {
    let t = terms();
    let double = || AllocError::DoubleRelease(r.clone());
    let decrement = |m: &mut Model, s: &Iri, p: &Iri, amount: i64| {
        let used = m.integer(s, p).unwrap_or(0);
        if used < amount {
            return Err(double());
        }
        m.set_integer(s, p, used - amount, true);
        Ok(())
    };
    match r {
        Reservation::Bandwidth { iface, mbps } => decrement(m, iface, &t.used_bandwidth, *mbps),
        Reservation::Units { pool, units } => decrement(m, pool, &t.used_units, *units),
        Reservation::Adaptation { adaptation, slots } => decrement(m, adaptation, &t.used_client_slots, *slots),
        Reservation::Label { iface, value } => {
            let triple = Triple::new(iface.clone(), t.used_label.clone(), Literal::integer(*value));
            if m.remove(&triple) {
                Ok(())
            } else {
                Err(double())
            }
        }
    }
}

fn nonzero(r: &Reservation) -> bool {
    !matches!(
        r,
        Reservation::Bandwidth { mbps: 0, .. } | Reservation::Units { units: 0, .. } | Reservation::Adaptation { slots: 0, .. }
    )
}

/// Prior objects of every (subject, predicate) pair a batch has touched, so a
/// failed batch can be undone without copying the whole model.
#[derive(Default)]
struct Journal {
    saved: BTreeMap<(Iri, Iri), Vec<Term>>,
}

impl Journal {
    fn record(&mut self, m: &Model, r: &Reservation) {
        let t = terms();
        let key = match r {
            Reservation::Bandwidth { iface, .. } => (iface.clone(), t.used_bandwidth.clone()),
            Reservation::Label { iface, .. } => (iface.clone(), t.used_label.clone()),
            Reservation::Units { pool, .. } => (pool.clone(), t.used_units.clone()),
            Reservation::Adaptation { adaptation, .. } => (adaptation.clone(), t.used_client_slots.clone()),
        };
        if let std::collections::btree_map::Entry::Vacant(slot) = self.saved.entry(key) {
            let (s, p) = slot.key();
            let prior = m.objects(s, p).cloned().collect();
            slot.insert(prior);
        }
    }

    fn rollback(self, m: &mut Model) {
        for ((s, p), prior) in self.saved {
            let now: Vec<Term> = m.objects(&s, &p).cloned().collect();
            for o in now {
                m.remove(&Triple::new(s.clone(), p.clone(), o));
            }
            for o in prior {
                m.add(&s, &p, o);
            }
        }
    }
}

/// Applies every reservation or none of them.
pub fn allocate(state: &mut Model, reservations: &[Reservation]) -> Result<(), AllocError> {
    let mut journal = Journal::default();
    for r in reservations.iter().filter(|r| nonzero(r)) {
        journal.record(state, r);
        if let Err(e) = apply_one(state, r) {
            journal.rollback(state);
            return Err(e);
        }
    }
    Ok(())
}

/// Undoes every reservation or none of them.
pub fn release(state: &mut Model, reservations: &[Reservation]) -> Result<(), AllocError> {
    let mut journal = Journal::default();
    for r in reservations.iter().rev().filter(|r| nonzero(r)) {
        journal.record(state, r);
        if let Err(e) = release_one(state, r) {
            journal.rollback(state);
            return Err(e);
        }
    }
    Ok(())
}

/// Reservations needed to carry `p` with its assigned labels and adaptations.
pub fn path_reservations(p: &PathResult) -> Vec<Reservation> {
    let mut out = Vec::new();
    for (i, l) in p.links.iter().enumerate() {
        for iface in [&l.a, &l.b] {
            out.push(Reservation::Bandwidth { iface: iface.clone(), mbps: p.bandwidth });
            if let Some(v) = p.label_of_link(i) {
                out.push(Reservation::Label { iface: iface.clone(), value: v });
            }
        }
    }
    for a in &p.adaptations {
        out.push(Reservation::Adaptation { adaptation: a.clone(), slots: 1 });
    }
    out
}

/// A violated bookkeeping invariant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConservationIssue {
    Bandwidth { iface: Iri, recorded: i64, expected: i64 },
    OverCapacity { entity: Iri },
    Labels { iface: Iri },
    Units { pool: Iri, recorded: i64, expected: i64 },
    Slots { adaptation: Iri, recorded: i64, expected: i64 },
}

/// Compares the in-use facts of `state` with the sum of `active` reservations
/// and checks that nothing exceeds its capacity or pool.
pub fn check_conservation<'a>(
    state: &Model,
    active: impl IntoIterator<Item = &'a Reservation>,
) -> Vec<ConservationIssue> {
    let t = terms();
    let mut bw: BTreeMap<Iri, i64> = BTreeMap::new();
    let mut labels: BTreeMap<Iri, BTreeSet<i64>> = BTreeMap::new();
    let mut units: BTreeMap<Iri, i64> = BTreeMap::new();
    let mut slots: BTreeMap<Iri, i64> = BTreeMap::new();
    let mut label_clash = BTreeSet::new();
    for r in active {
        match r {
            Reservation::Bandwidth { iface, mbps } => *bw.entry(iface.clone()).or_default() += mbps,
            Reservation::Label { iface, value } => {
                if !labels.entry(iface.clone()).or_default().insert(*value) {
                    label_clash.insert(iface.clone());
                }
            }
            Reservation::Units { pool, units: u } => *units.entry(pool.clone()).or_default() += u,
            Reservation::Adaptation { adaptation, slots: s } => *slots.entry(adaptation.clone()).or_default() += s,
        }
    }
    let mut issues = BTreeSet::new();

    let mut ifaces: BTreeSet<Iri> = state.subjects_with(&t.used_bandwidth).cloned().collect();
    ifaces.extend(bw.keys().cloned());
    for i in ifaces {
        let recorded = state.integer(&i, &t.used_bandwidth).unwrap_or(0);
        let expected = bw.get(&i).copied().unwrap_or(0);
        if recorded != expected {
            issues.insert(ConservationIssue::Bandwidth { iface: i.clone(), recorded, expected });
        }
        if interface_capacity(state, &i).is_some_and(|cap| recorded > cap) {
            issues.insert(ConservationIssue::OverCapacity { entity: i });
        }
    }

    let mut label_ifaces: BTreeSet<Iri> = state.subjects_with(&t.used_label).cloned().collect();
    label_ifaces.extend(labels.keys().cloned());
    for i in label_ifaces {
        let in_use = interface_used_labels(state, &i);
        let expected = labels.get(&i).cloned().unwrap_or_default();
        let outside_pool = interface_pool(state, &i).is_some_and(|pool| !in_use.is_subset(&pool));
        if in_use != expected || outside_pool || label_clash.contains(&i) {
            issues.insert(ConservationIssue::Labels { iface: i });
        }
    }

    let mut pools: BTreeSet<Iri> = state.subjects_with(&t.used_units).cloned().collect();
    pools.extend(units.keys().cloned());
    for p in pools {
        let recorded = state.integer(&p, &t.used_units).unwrap_or(0);
        let expected = units.get(&p).copied().unwrap_or(0);
        if recorded != expected {
            issues.insert(ConservationIssue::Units { pool: p.clone(), recorded, expected });
        }
        if recorded > state.integer(&p, &t.available_units).unwrap_or(1) {
            issues.insert(ConservationIssue::OverCapacity { entity: p });
        }
    }

    let mut ads: BTreeSet<Iri> = state.subjects_with(&t.used_client_slots).cloned().collect();
    ads.extend(slots.keys().cloned());
    for a in ads {
        let recorded = state.integer(&a, &t.used_client_slots).unwrap_or(0);
        let expected = slots.get(&a).copied().unwrap_or(0);
        if recorded != expected {
            issues.insert(ConservationIssue::Slots { adaptation: a.clone(), recorded, expected });
        }
        if recorded > state.integer(&a, &t.multiplex_capacity).unwrap_or(0) {
            issues.insert(ConservationIssue::OverCapacity { entity: a });
        }
    }
    issues.into_iter().collect()
}
