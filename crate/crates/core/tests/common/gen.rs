//! Seeded random generators for documents, schemas, graphs, substrates,
//! rule sets and federations.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use niaas::graphstore::{Iri, Literal, Model, Term, Triple};
use niaas::pathquery::PathExpr;
use niaas::rules::{Builtin, BuiltinKind, ClassAtom, Rule, RuleTerm, TripleAtom};
use niaas::vocab::ns::{self, terms};

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn iri(s: impl AsRef<str>) -> Iri {
    Iri::new(s).unwrap()
}

// ---------------------------------------------------------------- documents

const LOCAL_CHARS: &[char] = &['a', 'b', 'z', 'Q', '0', '7', '-', '_', '.', '/', '#', ':', '%', '~', '(', ',', '\'', 'é', '+'];
const LITERAL_CHARS: &[char] = &['a', 'Z', '3', ' ', '"', '\\', '\n', '\t', '\r', '#', '.', '<', '>', '^', 'ü', '@', ':'];

fn word(r: &mut Rand, alphabet: &[char], min: usize, max: usize) -> String {
    let n = r.gen_range(min..=max);
    (0..n).map(|_| *alphabet.choose(r).unwrap()).collect()
}

/// A random document exercising prefix compaction, awkward local names,
/// escapes in literals and custom datatypes.
pub fn random_document(r: &mut Rand) -> Model {
    let namespaces = ["http://ex.org/a#", "http://ex.org/b/", "urn:x:", "http://ex.org/a#deep/", "tag:q,2024:"];
    let mut m = Model::new();
    for (i, ns) in namespaces.iter().enumerate() {
        if r.gen_bool(0.6) {
            m.set_prefix(format!("p{i}"), iri(ns));
        }
    }
    if r.gen_bool(0.5) {
        m.set_prefix("topo", iri(ns::TOPO));
    }
    let name = |r: &mut Rand| {
        let ns = namespaces.choose(r).unwrap();
        let mut local = word(r, LOCAL_CHARS, 0, 8);
        if local.is_empty() && r.gen_bool(0.5) {
            local.push('x');
        }
        iri(format!("{ns}{local}"))
    };
    let n = r.gen_range(0..25);
    for _ in 0..n {
        let s = name(r);
        let p = if r.gen_bool(0.2) { terms().rdf_type.clone() } else { name(r) };
        let o: Term = match r.gen_range(0..5) {
            0 | 1 => Term::Iri(name(r)),
            2 => Literal::string(word(r, LITERAL_CHARS, 0, 10)).into(),
            3 => Literal::integer(r.gen_range(-1000..1000)).into(),
            _ => Literal { lexical: word(r, LITERAL_CHARS, 0, 6), datatype: name(r) }.into(),
        };
        m.insert(Triple::new(s, p, o));
    }
    m
}

// ---------------------------------------------------------------- schemas

/// A random T-box over at most 30 classes and 15 properties, plus instance data.
pub fn random_schema(r: &mut Rand) -> Model {
    let t = terms();
    let nc = r.gen_range(1..=30);
    let np = r.gen_range(1..=15);
    let class = |i: usize| iri(format!("urn:s:C{i}"));
    let prop = |i: usize| iri(format!("urn:s:p{i}"));
    let inst = |i: usize| iri(format!("urn:s:x{i}"));
    let mut m = Model::new();
    for _ in 0..r.gen_range(0..nc * 2) {
        m.add(&class(r.gen_range(0..nc)), &t.sub_class_of, class(r.gen_range(0..nc)));
    }
    for _ in 0..r.gen_range(0..np) {
        m.add(&prop(r.gen_range(0..np)), &t.sub_property_of, prop(r.gen_range(0..np)));
    }
    for _ in 0..r.gen_range(0..=np / 2) {
        m.add(&prop(r.gen_range(0..np)), &t.inverse_of, prop(r.gen_range(0..np)));
    }
    for _ in 0..r.gen_range(0..=np) {
        let pred = if r.gen_bool(0.5) { &t.domain } else { &t.range };
        m.add(&prop(r.gen_range(0..np)), pred, class(r.gen_range(0..nc)));
    }
    let ni = r.gen_range(1..12);
    for _ in 0..r.gen_range(0..20) {
        m.add(&inst(r.gen_range(0..ni)), &t.rdf_type, class(r.gen_range(0..nc)));
    }
    for _ in 0..r.gen_range(0..25) {
        let s = inst(r.gen_range(0..ni));
        let p = prop(r.gen_range(0..np));
        if r.gen_bool(0.2) {
            m.add(&s, &p, Literal::integer(r.gen_range(0..5)));
        } else {
            m.add(&s, &p, inst(r.gen_range(0..ni)));
        }
    }
    // Occasionally schema statements about schema terms, and literal objects
    // on schema predicates.
    if r.gen_bool(0.2) {
        m.add(&t.sub_class_of, &t.sub_property_of, prop(0));
    }
    if r.gen_bool(0.2) {
        m.add(&class(0), &t.sub_class_of, Literal::string("C"));
    }
    m
}

// ---------------------------------------------------------------- path graphs

pub fn graph_node(i: usize) -> Iri {
    iri(format!("urn:g:n{i:02}"))
}

pub fn graph_pred(i: usize) -> Iri {
    iri(format!("urn:g:p{i}"))
}

/// Random directed multigraph over at most 15 nodes and 3 predicates, with a
/// few literal-valued edges.
pub fn random_graph(r: &mut Rand) -> (Model, usize) {
    let n = r.gen_range(1..=15);
    let mut m = Model::new();
    for _ in 0..r.gen_range(0..n * 3) {
        let a = r.gen_range(0..n);
        let b = r.gen_range(0..n);
        m.add(&graph_node(a), &graph_pred(r.gen_range(0..3)), graph_node(b));
    }
    for _ in 0..r.gen_range(0..3) {
        m.add(&graph_node(r.gen_range(0..n)), &graph_pred(r.gen_range(0..3)), Literal::integer(1));
    }
    (m, n)
}

pub fn random_expr(r: &mut Rand, depth: usize) -> PathExpr {
    if depth <= 1 || r.gen_bool(0.3) {
        return PathExpr::pred(&graph_pred(r.gen_range(0..3)));
    }
    let sub = |r: &mut Rand| random_expr(r, depth - 1);
    match r.gen_range(0..5) {
        0 => PathExpr::inverse(sub(r)),
        1 => PathExpr::Seq((0..r.gen_range(2..=3)).map(|_| sub(r)).collect()),
        2 => PathExpr::Alt((0..r.gen_range(2..=3)).map(|_| sub(r)).collect()),
        3 => PathExpr::star(sub(r)),
        _ => PathExpr::plus(sub(r)),
    }
}

// ---------------------------------------------------------------- layered substrates

pub const ETH: usize = 0;
pub const DWDM: usize = 1;

pub fn layer_iri(layer: usize) -> Iri {
    if layer == ETH {
        terms().ethernet.clone()
    } else {
        terms().dwdm.clone()
    }
}

/// Inclusive label range of a layer.
pub fn layer_range(layer: usize) -> (i64, i64) {
    if layer == ETH {
        (2, 4094)
    } else {
        (1, 80)
    }
}

#[derive(Debug, Clone)]
pub struct GenEnd {
    pub device: usize,
    pub capacity: i64,
    pub used: i64,
    pub pool: Option<BTreeSet<i64>>,
    pub used_labels: BTreeSet<i64>,
}

#[derive(Debug, Clone)]
pub struct GenLink {
    pub ends: [GenEnd; 2],
    pub layer: usize,
}

#[derive(Debug, Clone)]
pub struct GenDevice {
    pub translates: bool,
    /// Ethernet-over-DWDM adaptation: (capacity, used slots).
    pub adaptation: Option<(u32, u32)>,
}

/// A layered substrate in abstract form, with one path request.
#[derive(Debug, Clone)]
pub struct Layered {
    pub devices: Vec<GenDevice>,
    pub links: Vec<GenLink>,
    pub source: usize,
    pub dest: usize,
    pub layer: usize,
    pub bandwidth: i64,
}

pub fn device_iri(i: usize) -> Iri {
    iri(format!("urn:ls:d{i:02}"))
}

pub fn end_iri(link: usize, side: usize) -> Iri {
    iri(format!("urn:ls:l{link:02}/{side}"))
}

fn random_end(r: &mut Rand, device: usize, layer: usize) -> GenEnd {
    let values: Vec<i64> = if layer == ETH { (100..106).collect() } else { (1..7).collect() };
    let pool: Option<BTreeSet<i64>> =
        if r.gen_bool(0.7) {
            let k = r.gen_range(1..=4);
            Some(values.choose_multiple(r, k).copied().collect())
        } else {
            None
        };
    let mut used_labels = BTreeSet::new();
    for v in &values {
        if r.gen_bool(0.2) {
            used_labels.insert(*v);
        }
    }
    if pool.is_none() && r.gen_bool(0.1) {
        // A label outside the small window, to exercise "whole range" pools.
        used_labels.insert(layer_range(layer).0);
    }
    GenEnd {
        device,
        capacity: *[500, 1000, 10000].choose(r).unwrap(),
        used: *[0, 0, 200, 600].choose(r).unwrap(),
        pool,
        used_labels,
    }
}

pub fn random_layered(r: &mut Rand) -> Layered {
    let n = r.gen_range(2..=12);
    let devices = (0..n)
        .map(|_| GenDevice {
            translates: r.gen_bool(0.25),
            adaptation: r.gen_bool(0.35).then(|| {
                let cap = r.gen_range(1..=3);
                (cap, r.gen_range(0..=cap))
            }),
        })
        .collect();
    let nl = r.gen_range(n - 1..=20).max(1);
    let links = (0..nl)
        .map(|_| {
            let a = r.gen_range(0..n);
            let mut b = r.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let layer = if r.gen_bool(0.7) { ETH } else { DWDM };
            GenLink { ends: [random_end(r, a, layer), random_end(r, b, layer)], layer }
        })
        .collect();
    let source = r.gen_range(0..n);
    let mut dest = r.gen_range(0..n - 1);
    if dest >= source {
        dest += 1;
    }
    Layered {
        devices,
        links,
        source,
        dest,
        layer: if r.gen_bool(0.8) { ETH } else { DWDM },
        bandwidth: *[0, 100, 500, 1000].choose(r).unwrap(),
    }
}

impl Layered {
    pub fn to_model(&self) -> Model {
        let t = terms();
        let mut m = Model::new();
        for (i, d) in self.devices.iter().enumerate() {
            let dev = device_iri(i);
            m.add(&dev, &t.rdf_type, &t.device);
            if d.translates {
                m.add(&dev, &t.label_translation, Literal::boolean(true));
            }
            if let Some((cap, used)) = d.adaptation {
                let ad = iri(format!("{dev}/adapt"));
                m.add(&dev, &t.has_adaptation, &ad);
                m.add(&ad, &t.rdf_type, &t.adaptation);
                m.add(&ad, &t.client_layer, &t.ethernet);
                m.add(&ad, &t.server_layer, &t.dwdm);
                m.add(&ad, &t.multiplex_capacity, Literal::integer(cap as i64));
                if used > 0 {
                    m.add(&ad, &t.used_client_slots, Literal::integer(used as i64));
                }
            }
        }
        for (k, l) in self.links.iter().enumerate() {
            let label_class = if l.layer == ETH { &t.vlan } else { &t.lambda };
            for (side, e) in l.ends.iter().enumerate() {
                let ifc = end_iri(k, side);
                m.add(&device_iri(e.device), &t.has_interface, &ifc);
                m.add(&ifc, &t.rdf_type, &t.interface);
                m.add(&ifc, &t.at_layer, layer_iri(l.layer));
                m.add(&ifc, &t.available_bandwidth, Literal::integer(e.capacity));
                if e.used > 0 {
                    m.add(&ifc, &t.used_bandwidth, Literal::integer(e.used));
                }
                for v in e.pool.iter().flatten() {
                    let lbl = iri(format!("urn:ls:label/{}/{v}", l.layer));
                    m.add(&ifc, &t.has_label, &lbl);
                    m.add(&lbl, &t.rdf_type, label_class);
                    m.add(&lbl, &t.label_value, Literal::integer(*v));
                }
                for v in &e.used_labels {
                    m.add(&ifc, &t.used_label, Literal::integer(*v));
                }
            }
            m.add(&end_iri(k, 0), &t.linked_to, end_iri(k, 1));
        }
        m
    }

    /// Link index and side owning an interface IRI produced by [`Layered::to_model`].
    pub fn end_of(&self, ifc: &Iri) -> Option<(usize, usize)> {
        let rest = ifc.as_str().strip_prefix("urn:ls:l")?;
        let (k, side) = rest.split_once('/')?;
        Some((k.parse().ok()?, side.parse().ok()?))
    }
}

// ---------------------------------------------------------------- rule models

pub fn rule_node(i: usize) -> Iri {
    iri(format!("urn:r:n{i}"))
}

fn rule_domain(i: usize) -> Iri {
    iri(format!("urn:r:dom{i}"))
}

fn rule_class(i: usize) -> Iri {
    iri(format!("urn:r:C{i}"))
}

fn rule_pred(i: usize) -> Iri {
    iri(format!("urn:r:p{i}"))
}

/// Predicates a random rule may use.
pub fn rule_predicates() -> Vec<Iri> {
    let t = terms();
    vec![t.has_interface.clone(), t.req_in_domain.clone(), rule_pred(0), rule_pred(1)]
}

pub fn rule_classes() -> Vec<Iri> {
    let t = terms();
    vec![t.compute_element.clone(), t.broadcast_connection.clone(), t.network_connection.clone(), rule_class(0)]
}

fn rule_universe(r: &mut Rand) -> Term {
    match r.gen_range(0..10) {
        0..=5 => Term::Iri(rule_node(r.gen_range(0..10))),
        6 | 7 => Term::Iri(rule_domain(r.gen_range(0..3))),
        8 => Literal::integer(r.gen_range(0..3)).into(),
        _ => Literal::string(["a", "b"][r.gen_range(0..2)]).into(),
    }
}

/// A random request-shaped model of at most 40 triples: some links with
/// member nodes in random domains, then noise.
pub fn random_rule_model(r: &mut Rand) -> Model {
    let t = terms();
    let mut m = Model::new();
    let mut next = 0usize;
    let mut fresh = || {
        next += 1;
        iri(format!("urn:r:e{next}"))
    };
    for _ in 0..r.gen_range(0..=2) {
        let link = fresh();
        let class = if r.gen_bool(0.7) { &t.broadcast_connection } else { &t.network_connection };
        m.add(&link, &t.rdf_type, class);
        for _ in 0..r.gen_range(1..=4) {
            let node = if r.gen_bool(0.8) { fresh() } else { rule_node(r.gen_range(0..10)) };
            let ifc = fresh();
            m.add(&link, &t.has_interface, &ifc);
            m.add(&node, &t.has_interface, &ifc);
            if r.gen_bool(0.9) {
                m.add(&node, &t.rdf_type, &t.compute_element);
            }
            if r.gen_bool(0.9) {
                m.add(&node, &t.req_in_domain, rule_domain(r.gen_range(0..3)));
            }
            if m.len() >= 32 {
                break;
            }
        }
    }
    let preds = rule_predicates();
    let classes = rule_classes();
    let target = r.gen_range(m.len()..=40);
    let mut guard = 0;
    while m.len() < target && guard < 200 {
        guard += 1;
        let s = rule_node(r.gen_range(0..10));
        if r.gen_bool(0.3) {
            m.add(&s, &t.rdf_type, classes.choose(r).unwrap());
        } else {
            m.add(&s, preds.choose(r).unwrap(), rule_universe(r));
        }
    }
    m
}

const RULE_VARS: &[&str] = &["X", "Y", "Z", "W"];

fn rule_term(r: &mut Rand, subject: bool) -> RuleTerm {
    if r.gen_bool(0.75) {
        RuleTerm::Var(RULE_VARS.choose(r).unwrap().to_string())
    } else if subject {
        RuleTerm::Const(Term::Iri(rule_node(r.gen_range(0..10))))
    } else {
        RuleTerm::Const(rule_universe(r))
    }
}

/// A random safe rule with up to 4 binary atoms, 2 class atoms and 2 builtins.
pub fn random_rule(r: &mut Rand, message: String) -> Rule {
    let preds = rule_predicates();
    let classes = rule_classes();
    loop {
        let triples: Vec<TripleAtom> = (0..r.gen_range(1..=4))
            .map(|_| TripleAtom {
                subject: rule_term(r, true),
                predicate: preds.choose(r).unwrap().clone(),
                object: rule_term(r, false),
            })
            .collect();
        let classes: Vec<ClassAtom> = (0..r.gen_range(0..=2))
            .map(|_| ClassAtom { subject: rule_term(r, true), class: classes.choose(r).unwrap().clone() })
            .collect();
        let mut rule = Rule { message: message.clone(), subject: String::new(), triples, classes, builtins: vec![], line: 0 };
        let vars: Vec<String> = rule.positive_variables().into_iter().collect();
        let Some(subject) = vars.choose(r) else { continue };
        rule.subject = subject.clone();
        for _ in 0..r.gen_range(0..=2) {
            let arg = |r: &mut Rand| {
                if r.gen_bool(0.8) {
                    RuleTerm::Var(vars.choose(r).unwrap().clone())
                } else {
                    RuleTerm::Const(rule_universe(r))
                }
            };
            let kind = if r.gen_bool(0.7) { BuiltinKind::NotEqual } else { BuiltinKind::Equal };
            let (a, b) = (arg(r), arg(r));
            rule.builtins.push(Builtin { kind, a, b });
        }
        assert!(rule.unsafe_variable().is_none());
        return rule;
    }
}

// ---------------------------------------------------------------- requests and federations

/// A request document. `nodes` lists (name, domain IRI); `links` lists
/// (name, member node indexes, bandwidth). Two members make a point-to-point
/// link, more make a broadcast link.
pub fn request_doc(
    ns: &str,
    begin: &str,
    duration_s: i64,
    nodes: &[(String, Iri)],
    links: &[(String, Vec<usize>, i64)],
) -> String {
    let mut doc = format!(
        "@prefix comp: <{}> .\n@prefix eth: <{}> .\n@prefix req: <{}> .\n@prefix time: <{}> .\n@prefix topo: <{}> .\n@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n@prefix r: <{ns}> .\n",
        ns::COMP,
        ns::ETH,
        ns::REQ,
        ns::TIME,
        ns::TOPO
    );
    doc += &format!(
        "r:Reservation a req:Reservation .\nr:Reservation req:hasTerm r:Term .\nr:Term a time:Interval .\n\
         r:Term time:hasBeginning \"{begin}\"^^xsd:dateTime .\nr:Term time:hasDurationSeconds \"{duration_s}\"^^xsd:integer .\n"
    );
    for (name, dom) in nodes {
        doc += &format!("r:Reservation req:element r:{name} .\nr:{name} a comp:ComputeElement .\nr:{name} req:inDomain <{dom}> .\n");
    }
    for (name, members, bw) in links {
        let class = if members.len() == 2 { "NetworkConnection" } else { "BroadcastConnection" };
        doc += &format!(
            "r:Reservation req:element r:{name} .\nr:{name} a topo:{class} .\nr:{name} topo:atLayer eth:EthernetNetworkElement .\nr:{name} topo:bandwidth \"{bw}\"^^xsd:integer .\n"
        );
        for &k in members {
            let node = &nodes[k].0;
            doc += &format!("r:{name} topo:hasInterface r:{node}/{name} .\nr:{node} topo:hasInterface r:{node}/{name} .\n");
        }
    }
    doc
}

pub fn fed_domain(i: usize) -> Iri {
    iri(format!("http://example.net/fed{i:02}#Domain"))
}

/// Substrate documents for a generated federation: `domains` domains of one
/// server and `switches` switches each, a switch ring with chords inside each
/// domain, and `border_links` inter-domain links (a ring first, then random
/// chords).
pub fn federation(r: &mut Rand, domains: usize, switches: usize, intra_links: usize, border_links: usize) -> Vec<String> {
    let mut docs: Vec<String> = Vec::new();
    let base = |d: usize| format!("http://example.net/fed{d:02}#");
    let mut borders: Vec<Vec<String>> = vec![Vec::new(); domains];
    let mut pairs: Vec<(usize, usize)> = (0..domains).map(|i| (i, (i + 1) % domains)).take(border_links).collect();
    while pairs.len() < border_links {
        let a = r.gen_range(0..domains);
        let b = r.gen_range(0..domains);
        if a != b {
            pairs.push((a, b));
        }
    }
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let sa = r.gen_range(0..switches);
        let sb = r.gen_range(0..switches);
        let ia = format!("{}b{k}", base(a));
        let ib = format!("{}b{k}", base(b));
        for (d, sw, me, peer) in [(a, sa, &ia, &ib), (b, sb, &ib, &ia)] {
            let mut s = format!("<{}sw{sw}> topo:hasInterface <{me}> .\n<{me}> a topo:BorderInterface .\n<{me}> topo:atLayer eth:EthernetNetworkElement .\n<{me}> topo:availableBandwidth \"10000\"^^xsd:integer .\n<{me}> topo:linkedTo <{peer}> .\n", base(d));
            for v in 200..240 {
                s += &format!("<{me}> topo:hasLabel <{}bvlan/{v}> .\n", base(d));
            }
            borders[d].push(s);
        }
    }
    for (d, border_text) in borders.iter().enumerate() {
        let b = base(d);
        let mut doc = format!(
            "@prefix comp: <{}> .\n@prefix eth: <{}> .\n@prefix topo: <{}> .\n@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n",
            ns::COMP,
            ns::ETH,
            ns::TOPO
        );
        doc += &format!("<{b}Domain> a topo:NetworkDomain .\n");
        doc += &format!(
            "<{b}server> a comp:ComputeElement .\n<{b}server> topo:inDomain <{b}Domain> .\n<{b}server> comp:offersClass comp:VM .\n<{b}server> topo:availableUnits \"40\"^^xsd:integer .\n"
        );
        for v in 200..240 {
            doc += &format!("<{b}bvlan/{v}> a eth:VLAN .\n<{b}bvlan/{v}> topo:labelValue \"{v}\"^^xsd:integer .\n");
        }
        for s in 0..switches {
            doc += &format!(
                "<{b}sw{s}> a topo:Device .\n<{b}sw{s}> topo:inDomain <{b}Domain> .\n<{b}sw{s}> topo:hasSwitchMatrix <{b}sw{s}/matrix> .\n<{b}sw{s}/matrix> a topo:SwitchMatrix .\n<{b}sw{s}/matrix> topo:atLayer eth:EthernetNetworkElement .\n"
            );
        }
        let link = |doc: &mut String, k: usize, x: &str, y: &str| {
            let (ix, iy) = (format!("{b}{x}/i{k}"), format!("{b}{y}/i{k}"));
            for (dev, ifc) in [(x, &ix), (y, &iy)] {
                *doc += &format!("<{b}{dev}> topo:hasInterface <{ifc}> .\n<{ifc}> a topo:Interface .\n<{ifc}> topo:availableBandwidth \"100000\"^^xsd:integer .\n");
            }
            *doc += &format!("<{ix}> topo:linkedTo <{iy}> .\n");
        };
        link(&mut doc, 0, "server", "sw0");
        let mut k = 1;
        for s in 0..switches {
            if k >= intra_links {
                break;
            }
            if switches > 1 && (switches > 2 || s == 0) {
                link(&mut doc, k, &format!("sw{s}"), &format!("sw{}", (s + 1) % switches));
                k += 1;
            }
        }
        while k < intra_links && switches > 2 {
            let x = r.gen_range(0..switches);
            let y = r.gen_range(0..switches);
            if x != y {
                link(&mut doc, k, &format!("sw{x}"), &format!("sw{y}"));
                k += 1;
            }
        }
        for s in border_text {
            doc += s;
        }
        docs.push(doc);
    }
    docs
}
