mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use common::gen::{self, device_iri, fed_domain, layer_iri, rng, Layered};
use common::oracles::{check_path, label_allowed, path_oracle, Check};
use niaas::embed::{
    allocate, apply_plan, check_conservation, embed_request, path_reservations, release, shortest_valid_path, Constraints, PathRequest, PathResult,
    Reservation, DEFAULT_ATTEMPT_LIMIT,
};
use niaas::graphstore::{parse_document, serialize_document, Iri, Model};
use niaas::models::substrate::{interface_capacity, interface_pool};
use niaas::models::{
    build_delegation, build_manifest, check_homeomorphic, delegated_units, delegation_view, parse_delegations,
    parse_request_document, parse_substrate, SliceRequest,
};
use niaas::vocab;

fn closed(g: &Layered) -> Model {
    vocab::closure_with_schema(&g.to_model(), []).unwrap()
}

fn request_for(g: &Layered, source: usize, dest: usize) -> PathRequest {
    PathRequest {
        source: device_iri(source),
        dest: device_iri(dest),
        constraints: Constraints { layer: layer_iri(g.layer), bandwidth: g.bandwidth, required_label: None },
    }
}

/// Generator link indexes traversed by a path result.
fn link_indexes(g: &Layered, p: &PathResult) -> Vec<usize> {
    p.links
        .iter()
        .map(|l| {
            let (ka, _) = g.end_of(&l.a).expect("generated interface");
            let (kb, _) = g.end_of(&l.b).expect("generated interface");
            assert_eq!(ka, kb, "link joins interfaces of different links");
            ka
        })
        .collect()
}

/// Zeroes every in-use amount so reservations alone account for usage.
fn pristine(mut g: Layered) -> Layered {
    for l in &mut g.links {
        for e in &mut l.ends {
            e.used = 0;
            e.used_labels.clear();
        }
    }
    for d in &mut g.devices {
        if let Some((cap, _)) = d.adaptation {
            d.adaptation = Some((cap, 0));
        }
    }
    g
}

fn small_federation(seed: u64) -> (common::Testbed, usize) {
    let mut r = rng(seed);
    let domains = r.gen_range(2..=4);
    let docs: Vec<Model> =
        gen::federation(&mut r, domains, 3, 4, domains + 1).iter().map(|d| parse_document(d).unwrap()).collect();
    (common::testbed(&docs), domains)
}

fn random_request(r: &mut gen::Rand, domains: usize, tag: usize) -> SliceRequest {
    let n = r.gen_range(2..=3);
    let nodes: Vec<(String, Iri)> = (0..n).map(|i| (format!("vm{i}"), fed_domain(r.gen_range(0..domains)))).collect();
    let bw = *[100, 1000, 9000, 20000].choose(r).unwrap();
    let links = if n == 3 && r.gen_bool(0.5) {
        vec![("bus".to_string(), vec![0, 1, 2], bw)]
    } else {
        (1..n).map(|i| (format!("l{i}"), vec![i - 1, i], bw)).collect()
    };
    let doc = gen::request_doc(&format!("http://example.net/req{tag}#"), "2013-01-01T00:00:00Z", 3600, &nodes, &links);
    parse_request_document(&parse_document(&doc).unwrap(), []).unwrap()
}

fn snapshot(tb: &common::Testbed) -> (String, Vec<String>) {
    (serialize_document(&tb.view), tb.substrates.values().map(serialize_document).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn found_paths_are_feasible(seed in any::<u64>()) {
        let g = gen::random_layered(&mut rng(seed));
        let m = closed(&g);
        let Some(p) = shortest_valid_path(&m, &request_for(&g, g.source, g.dest), DEFAULT_ATTEMPT_LIMIT) else {
            return Ok(());
        };
        let ks = link_indexes(&g, &p);
        prop_assert_eq!(p.hops.first().map(|h| h.element.clone()), Some(device_iri(g.source)));
        prop_assert_eq!(p.hops.last().map(|h| h.element.clone()), Some(device_iri(g.dest)));
        match check_path(&g, &ks) {
            Check::Feasible { labels } => {
                for (i, &k) in ks.iter().enumerate() {
                    let got = p.label_of_link(i);
                    prop_assert!(got.is_some_and(|v| label_allowed(&g, k, v)), "link {} label {:?}", k, got);
                    prop_assert_eq!(got, labels[i], "lowest common label on link {}", k);
                }
            }
            Check::Infeasible(why) => prop_assert!(false, "returned path fails {}: {:?}", why, ks),
        }
    }

    #[test]
    fn found_paths_are_shortest(seed in any::<u64>()) {
        let g = gen::random_layered(&mut rng(seed));
        let m = closed(&g);
        let got = shortest_valid_path(&m, &request_for(&g, g.source, g.dest), DEFAULT_ATTEMPT_LIMIT);
        let o = path_oracle(&g);
        match (got, o.optimum) {
            (Some(p), Some(best)) => prop_assert_eq!(p.hop_count(), best),
            (Some(p), None) => prop_assert!(false, "path of {} hops where none is feasible", p.hop_count()),
            (None, None) => {}
            (None, Some(best)) => prop_assert!(
                o.shorter_infeasible + o.tied_infeasible >= DEFAULT_ATTEMPT_LIMIT,
                "missed a {}-hop path with only {:?} infeasible rivals", best, o
            ),
        }
    }

    #[test]
    fn reservations_are_conserved(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = pristine(gen::random_layered(&mut r));
        let initial = closed(&g);
        let mut state = initial.clone();
        let mut active: Vec<Vec<Reservation>> = Vec::new();
        for _ in 0..12 {
            if !active.is_empty() && r.gen_bool(0.35) {
                let i = r.gen_range(0..active.len());
                let rs = active.remove(i);
                prop_assert!(release(&mut state, &rs).is_ok());
                // A second release of the same reservations is refused without effect.
                let before = serialize_document(&state);
                if rs.iter().any(|x| !matches!(x, Reservation::Bandwidth { mbps: 0, .. })) {
                    prop_assert!(release(&mut state, &rs).is_err());
                }
                prop_assert_eq!(serialize_document(&state), before);
            } else {
                let s = r.gen_range(0..g.devices.len());
                let mut d = r.gen_range(0..g.devices.len() - 1);
                if d >= s { d += 1; }
                if let Some(p) = shortest_valid_path(&state, &request_for(&g, s, d), DEFAULT_ATTEMPT_LIMIT) {
                    let rs = path_reservations(&p);
                    prop_assert!(allocate(&mut state, &rs).is_ok(), "planned path does not fit");
                    active.push(rs);
                }
            }
            let issues = check_conservation(&state, active.iter().flatten());
            prop_assert!(issues.is_empty(), "{:?}", issues);
        }
        for rs in active.iter().rev() {
            prop_assert!(release(&mut state, rs).is_ok());
        }
        prop_assert_eq!(serialize_document(&state), serialize_document(&initial));
    }

    #[test]
    fn failed_allocation_changes_nothing(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = gen::random_layered(&mut r);
        let mut state = closed(&g);
        let Some(p) = shortest_valid_path(&state, &request_for(&g, g.source, g.dest), DEFAULT_ATTEMPT_LIMIT) else {
            return Ok(());
        };
        let rs = path_reservations(&p);
        let mut twice = rs.clone();
        twice.extend(rs.iter().cloned());
        let before = serialize_document(&state);
        if allocate(&mut state, &twice).is_err() {
            prop_assert_eq!(serialize_document(&state), before);
        }
    }

    #[test]
    fn embedding_is_atomic_and_manifests_are_faithful(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (mut tb, domains) = small_federation(r.gen());
        for k in 0..6 {
            let req = random_request(&mut r, domains, k);
            let before = snapshot(&tb);
            match embed_request(&req, &tb.view, &tb.substrates, DEFAULT_ATTEMPT_LIMIT) {
                Ok(plan) => {
                    let slice = format!("s{k}");
                    let manifest = build_manifest(&req, &plan, &slice).unwrap();
                    prop_assert!(req.source.is_subset_of(&manifest));
                    prop_assert!(check_homeomorphic(&req, &manifest));
                    let again = build_manifest(&req, &plan, &slice).unwrap();
                    prop_assert_eq!(serialize_document(&manifest), serialize_document(&again));
                    prop_assert!(apply_plan(&mut tb.view, &mut tb.substrates, &plan).is_ok());
                    // The same plan again either fits or leaves everything untouched.
                    let applied = snapshot(&tb);
                    if apply_plan(&mut tb.view, &mut tb.substrates, &plan).is_err() {
                        prop_assert_eq!(snapshot(&tb), applied);
                    } else {
                        niaas::embed::release_plan(&mut tb.view, &mut tb.substrates, &plan).unwrap();
                        prop_assert_eq!(snapshot(&tb), applied);
                    }
                }
                Err(_) => prop_assert_eq!(snapshot(&tb), before),
            }
        }
    }

    #[test]
    fn delegations_abstract_their_substrates_soundly(seed in any::<u64>()) {
        let mut r = rng(seed);
        let domains = r.gen_range(2..=4);
        for doc in gen::federation(&mut r, domains, 3, 4, domains + 1) {
            let detailed = vocab::closure_with_schema(&parse_document(&doc).unwrap(), []).unwrap();
            let g = parse_substrate(&detailed).unwrap();
            let delegation = build_delegation(&g);
            let reparsed = parse_document(&serialize_document(&delegation)).unwrap();
            prop_assert!(reparsed.same_triples(&delegation));
            let view = delegation_view([&reparsed]).unwrap();
            prop_assert!(vocab::validate_conformance(&view).is_empty(), "{:?}", vocab::validate_conformance(&view));
            let parsed = parse_delegations(&view);
            prop_assert_eq!(parsed.len(), 1);
            let d = &parsed[0];
            prop_assert_eq!(&d.domain, &g.domain);
            let borders: Vec<Iri> = d.borders.iter().map(|b| b.iri.clone()).collect();
            prop_assert_eq!(&borders, &g.border_interfaces);
            for b in &d.borders {
                let pool = interface_pool(&detailed, &b.iri).unwrap_or_default();
                prop_assert!(b.labels.is_subset(&pool));
                prop_assert!(interface_capacity(&detailed, &b.iri).is_some_and(|c| b.bandwidth <= c));
            }
            for (a, b) in &d.reaches {
                prop_assert!(g.border_interfaces.contains(a) && g.border_interfaces.contains(b));
            }
            let offered: BTreeMap<Iri, i64> = delegated_units(d);
            let real = g.units_by_class();
            for (class, units) in offered {
                prop_assert!(units <= real.get(&class).copied().unwrap_or(0), "{} over-advertised", class);
            }
        }
    }
}
