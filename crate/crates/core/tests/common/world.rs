//! Randomized event scenarios against a [`World`] with per-event invariant checks.

use chrono::{DateTime, Duration, SecondsFormat, Utc};
use rand::seq::SliceRandom;
use rand::Rng;

use niaas::actors::{SliceState, World};
use niaas::graphstore::{parse_document, Iri, Model};

use super::gen::{self, Rand};
use super::oracles::bound_violations;

pub fn start_time() -> DateTime<Utc> {
    DateTime::parse_from_rfc3339("2012-12-31T00:00:00Z").unwrap().with_timezone(&Utc)
}

pub fn world_with(substrates: &[Model]) -> World {
    let mut w = World::new();
    w.advance_time(start_time()).unwrap();
    for s in substrates {
        w.load_substrate(s).unwrap();
    }
    w
}

#[derive(Debug, Default)]
pub struct Report {
    pub events: usize,
    pub created: usize,
    pub rejected: usize,
    pub adversarial: usize,
    pub deleted: usize,
    pub expired: usize,
    /// Every invariant failure, with the event that exposed it.
    pub failures: Vec<String>,
}

/// Invariant failures visible in the current state of `w`.
pub fn invariant_failures(w: &World) -> Vec<String> {
    let mut out = w.conservation_issues();
    out.extend(bound_violations(w.broker().view()).into_iter().map(|v| format!("broker view: {v}")));
    for am in w.ams() {
        out.extend(bound_violations(am.substrate()).into_iter().map(|v| format!("{}: {v}", am.id)));
    }
    out
}

fn history_is_legal(h: &[SliceState]) -> bool {
    h.first() == Some(&SliceState::Requested) && h.windows(2).all(|p| p[0].can_move_to(p[1]))
}

/// Request text for `nodes` (a domain per node) joined by point-to-point
/// links in a chain, or by one broadcast link.
pub fn request_text(
    tag: &str,
    begin: DateTime<Utc>,
    seconds: i64,
    domains: &[Iri],
    broadcast: bool,
    bandwidth: i64,
) -> String {
    let nodes: Vec<(String, Iri)> = domains.iter().enumerate().map(|(i, d)| (format!("n{i}"), d.clone())).collect();
    let links: Vec<(String, Vec<usize>, i64)> = if broadcast && nodes.len() >= 3 {
        vec![("bus".into(), (0..nodes.len()).collect(), bandwidth)]
    } else {
        (1..nodes.len()).map(|i| (format!("l{i}"), vec![i - 1, i], bandwidth)).collect()
    };
    let begin = begin.to_rfc3339_opts(SecondsFormat::Secs, true);
    gen::request_doc(&format!("http://example.net/{tag}#"), &begin, seconds, &nodes, &links)
}

/// Drives `events` random events: creates (some adversarial), deletes and
/// clock advances. After every event the conservation and bound invariants
/// are checked; a failed create must leave every actor state unchanged.
pub fn random_scenario(r: &mut Rand, w: &mut World, domains: &[Iri], events: usize) -> Report {
    let mut rep = Report::default();
    let mut live: Vec<String> = Vec::new();
    let mut next = 0usize;
    for e in 0..events {
        rep.events += 1;
        let roll = r.gen_range(0..100);
        let label;
        if roll < 55 {
            next += 1;
            let id = format!("s{next}");
            let adversarial = r.gen_bool(0.3);
            let n = r.gen_range(2..=4);
            let mut picks: Vec<Iri> = (0..n).map(|_| domains.choose(r).unwrap().clone()).collect();
            let mut broadcast = n >= 3 && r.gen_bool(0.4);
            let mut bandwidth = *[100, 500, 1000].choose(r).unwrap();
            let mut seconds = r.gen_range(1..=48) * 3600;
            let mut slice_id = id.clone();
            if adversarial {
                rep.adversarial += 1;
                match r.gen_range(0..5) {
                    0 => bandwidth = 1_000_000,
                    1 => picks = vec![domains[0].clone(); 6],
                    2 => {
                        // Repeated domain in a broadcast link.
                        picks = vec![domains[0].clone(), domains[1 % domains.len()].clone(), domains[0].clone()];
                        broadcast = true;
                    }
                    3 => seconds = 400 * 86_400,
                    _ => slice_id = live.first().cloned().unwrap_or_else(|| "bad id!".into()),
                }
            }
            let text = request_text(&format!("req{next}"), w.now(), seconds, &picks, broadcast, bandwidth);
            let doc = parse_document(&text).expect("generated request parses");
            let before = w.serialize_states();
            match w.create_slice(&slice_id, &doc) {
                Ok(_) => {
                    rep.created += 1;
                    live.push(slice_id.clone());
                }
                Err(err) => {
                    rep.rejected += 1;
                    if w.serialize_states() != before {
                        rep.failures.push(format!("event {e}: failed create ({err}) changed actor state"));
                    }
                }
            }
            label = format!("create {slice_id}");
        } else if roll < 75 && !live.is_empty() {
            let id = live.remove(r.gen_range(0..live.len()));
            if let Err(err) = w.delete_slice(&id) {
                rep.failures.push(format!("event {e}: delete {id}: {err}"));
            }
            rep.deleted += 1;
            label = format!("delete {id}");
        } else {
            let to = w.now() + Duration::minutes(r.gen_range(10..=12 * 60));
            match w.advance_time(to) {
                Ok(expired) => {
                    rep.expired += expired.len();
                    live.retain(|s| !expired.contains(s));
                }
                Err(err) => rep.failures.push(format!("event {e}: advance: {err}")),
            }
            label = "advance".to_string();
        }
        for f in invariant_failures(w) {
            rep.failures.push(format!("event {e} ({label}): {f}"));
        }
        for id in &live {
            if w.slice_state(id) != Some(SliceState::Provisioned) {
                rep.failures.push(format!("event {e}: live slice {id} is {:?}", w.slice_state(id)));
            }
        }
    }
    for id in live {
        let _ = w.delete_slice(&id);
    }
    for k in 1..=next {
        if let Some(s) = w.slice(&format!("s{k}")) {
            if !history_is_legal(&s.history) {
                rep.failures.push(format!("slice s{k}: illegal history {:?}", s.history));
            }
        }
    }
    rep
}

pub fn ring_substrates() -> Vec<Model> {
    ["ring_a_substrate.ndl", "ring_b_substrate.ndl", "ring_c_substrate.ndl"].iter().map(|n| super::fixture(n)).collect()
}

pub fn ring_domains() -> Vec<Iri> {
    ["A", "B", "C"].iter().map(|d| super::iri(&format!("http://example.net/ring#{d}"))).collect()
}

/// Actor states with every slice closed: broker and AM serializations only.
pub fn resource_states(w: &World) -> String {
    let mut out = w.broker().serialize();
    for am in w.ams() {
        out += &am.serialize();
    }
    out
}
