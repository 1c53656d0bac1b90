//! Brute-force reference implementations. Each one is written against the
//! plain triple set (or the generator's abstract form) and shares no search
//! code with the library.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use niaas::graphstore::{Iri, Model, Term, Triple};
use niaas::pathquery::PathExpr;
use niaas::rules::{BuiltinKind, Rule, RuleTerm, Violation};
use niaas::vocab::ns::terms;

use super::gen::{layer_range, Layered, DWDM, ETH};

// ---------------------------------------------------------------- entailment

/// Naive fixpoint: apply every rule to every pair of triples until nothing changes.
pub fn naive_entail(m: &Model) -> BTreeSet<Triple> {
    let t = terms();
    let (ty, sc, sp, inv, dom, rng) = (&t.rdf_type, &t.sub_class_of, &t.sub_property_of, &t.inverse_of, &t.domain, &t.range);
    let mut all: BTreeSet<Triple> = m.iter().collect();
    loop {
        let snapshot: Vec<Triple> = all.iter().cloned().collect();
        let mut new = Vec::new();
        for a in &snapshot {
            let Some(ao) = a.object.as_iri() else { continue };
            for b in &snapshot {
                // a is the schema statement, b the one it applies to.
                if a.predicate == *sc && b.predicate == *sc && b.object.as_iri() == Some(&a.subject) {
                    new.push(Triple::new(b.subject.clone(), sc.clone(), ao.clone()));
                }
                if a.predicate == *sc && b.predicate == *ty && b.object.as_iri() == Some(&a.subject) {
                    new.push(Triple::new(b.subject.clone(), ty.clone(), ao.clone()));
                }
                if a.predicate == *sp && b.predicate == a.subject {
                    new.push(Triple::new(b.subject.clone(), ao.clone(), b.object.clone()));
                }
                if a.predicate == *inv {
                    if let Some(bo) = b.object.as_iri() {
                        if b.predicate == a.subject {
                            new.push(Triple::new(bo.clone(), ao.clone(), b.subject.clone()));
                        }
                        if b.predicate == *ao {
                            new.push(Triple::new(bo.clone(), a.subject.clone(), b.subject.clone()));
                        }
                    }
                }
                if a.predicate == *dom && b.predicate == a.subject {
                    new.push(Triple::new(b.subject.clone(), ty.clone(), ao.clone()));
                }
                if a.predicate == *rng && b.predicate == a.subject {
                    if let Some(bo) = b.object.as_iri() {
                        new.push(Triple::new(bo.clone(), ty.clone(), ao.clone()));
                    }
                }
            }
        }
        let before = all.len();
        all.extend(new);
        if all.len() == before {
            return all;
        }
    }
}

// ---------------------------------------------------------------- path expressions

enum Edge {
    Eps,
    Step(Iri, bool),
}

#[derive(Default)]
struct Nfa {
    edges: Vec<Vec<(Edge, usize)>>,
}

impl Nfa {
    fn state(&mut self) -> usize {
        self.edges.push(Vec::new());
        self.edges.len() - 1
    }

    fn eps(&mut self, a: usize, b: usize) {
        self.edges[a].push((Edge::Eps, b));
    }

    /// Thompson construction of `e` (read backwards when `inv`) between `s` and `f`.
    fn build(&mut self, e: &PathExpr, inv: bool, s: usize, f: usize) {
        match e {
            PathExpr::Pred(p) => self.edges[s].push((Edge::Step(p.clone(), inv), f)),
            PathExpr::Inverse(x) => self.build(x, !inv, s, f),
            PathExpr::Seq(v) => {
                let order: Vec<&PathExpr> = if inv { v.iter().rev().collect() } else { v.iter().collect() };
                let mut cur = s;
                for (i, x) in order.iter().enumerate() {
                    let next = if i + 1 == order.len() { f } else { self.state() };
                    self.build(x, inv, cur, next);
                    cur = next;
                }
            }
            PathExpr::Alt(v) => {
                for x in v {
                    let (a, b) = (self.state(), self.state());
                    self.eps(s, a);
                    self.build(x, inv, a, b);
                    self.eps(b, f);
                }
            }
            PathExpr::Star(x) | PathExpr::Plus(x) => {
                let (a, b) = (self.state(), self.state());
                self.eps(s, a);
                self.build(x, inv, a, b);
                self.eps(b, a);
                self.eps(b, f);
                if matches!(e, PathExpr::Star(_)) {
                    self.eps(s, f);
                }
            }
        }
    }
}

/// Reachable set by breadth-first search over (node, automaton state) pairs.
pub fn nfa_eval(m: &Model, start: &Iri, expr: &PathExpr) -> BTreeSet<Iri> {
    let mut fwd: HashMap<(Iri, Iri), Vec<Iri>> = HashMap::new();
    let mut back: HashMap<(Iri, Iri), Vec<Iri>> = HashMap::new();
    for t in m.iter() {
        if let Term::Iri(o) = &t.object {
            fwd.entry((t.subject.clone(), t.predicate.clone())).or_default().push(o.clone());
            back.entry((o.clone(), t.predicate.clone())).or_default().push(t.subject.clone());
        }
    }
    let mut nfa = Nfa::default();
    let (s, f) = (nfa.state(), nfa.state());
    nfa.build(expr, false, s, f);
    let mut seen = BTreeSet::from([(start.clone(), s)]);
    let mut queue = VecDeque::from([(start.clone(), s)]);
    let mut out = BTreeSet::new();
    while let Some((n, q)) = queue.pop_front() {
        if q == f {
            out.insert(n.clone());
        }
        for (edge, to) in &nfa.edges[q] {
            let targets: Vec<Iri> = match edge {
                Edge::Eps => vec![n.clone()],
                Edge::Step(p, false) => fwd.get(&(n.clone(), p.clone())).cloned().unwrap_or_default(),
                Edge::Step(p, true) => back.get(&(n.clone(), p.clone())).cloned().unwrap_or_default(),
            };
            for x in targets {
                if seen.insert((x.clone(), *to)) {
                    queue.push_back((x, *to));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------- layered pathfinding

/// Outcome of checking one link sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Check {
    Feasible { labels: Vec<Option<i64>> },
    Infeasible(&'static str),
}

fn free_labels(g: &Layered, link: usize) -> (Option<BTreeSet<i64>>, BTreeSet<i64>) {
    let l = &g.links[link];
    let pool = match (&l.ends[0].pool, &l.ends[1].pool) {
        (Some(a), Some(b)) => Some(a.intersection(b).copied().collect()),
        (Some(a), None) | (None, Some(a)) => Some(a.clone()),
        (None, None) => None,
    };
    let used = l.ends[0].used_labels.union(&l.ends[1].used_labels).copied().collect();
    (pool, used)
}

fn label_free(g: &Layered, link: usize, v: i64) -> bool {
    let (lo, hi) = layer_range(g.links[link].layer);
    let (pool, used) = free_labels(g, link);
    lo <= v && v <= hi && pool.is_none_or(|p| p.contains(&v)) && !used.contains(&v)
}

/// Feasibility of the path `source -> ... -> dest` along `links` (each link
/// traversed from the device reached so far to its other end).
pub fn check_path(g: &Layered, links: &[usize]) -> Check {
    let n = links.len();
    if n == 0 {
        return Check::Infeasible("empty");
    }
    let layer = |k: usize| g.links[links[k]].layer;
    if layer(0) != g.layer || layer(n - 1) != g.layer {
        return Check::Infeasible("endpoint layer");
    }
    for &l in links {
        let e = &g.links[l].ends;
        let residual = (e[0].capacity - e[0].used).min(e[1].capacity - e[1].used);
        if residual < g.bandwidth {
            return Check::Infeasible("bandwidth");
        }
    }
    // Devices between consecutive links.
    let mut at = g.source;
    let mut inner = Vec::new();
    for &l in links {
        let e = &g.links[l].ends;
        at = if e[0].device == at { e[1].device } else { e[0].device };
        inner.push(at);
    }
    for k in 1..n {
        if layer(k - 1) != layer(k) {
            let ok = g.devices[inner[k - 1]].adaptation.is_some_and(|(cap, used)| used < cap);
            if !ok {
                return Check::Infeasible("adaptation");
            }
        }
    }
    // Label continuity scopes.
    let mut scopes: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        let split = k == 0 || layer(k - 1) != layer(k) || g.devices[inner[k - 1]].translates;
        if split {
            scopes.push(vec![k]);
        } else {
            scopes.last_mut().unwrap().push(k);
        }
    }
    let mut labels = vec![None; n];
    for s in &scopes {
        let (lo, hi) = layer_range(layer(s[0]));
        // A label must lie in every declared pool, so one pool bounds the search.
        let pooled = s.iter().find_map(|&k| free_labels(g, links[k]).0);
        let candidates: Vec<i64> = match pooled {
            Some(p) => p.into_iter().collect(),
            None => (lo..=hi).collect(),
        };
        let found = candidates.into_iter().find(|&v| s.iter().all(|&k| label_free(g, links[k], v)));
        let Some(v) = found else { return Check::Infeasible("labels") };
        for &k in s {
            labels[k] = Some(v);
        }
    }
    Check::Feasible { labels }
}

/// Every simple path from source to destination, as link sequences.
pub fn all_simple_paths(g: &Layered) -> Vec<Vec<usize>> {
    fn go(g: &Layered, at: usize, visited: &mut Vec<bool>, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if at == g.dest {
            out.push(path.clone());
            return;
        }
        for (k, l) in g.links.iter().enumerate() {
            let next = if l.ends[0].device == at {
                l.ends[1].device
            } else if l.ends[1].device == at {
                l.ends[0].device
            } else {
                continue;
            };
            if visited[next] {
                continue;
            }
            visited[next] = true;
            path.push(k);
            go(g, next, visited, path, out);
            path.pop();
            visited[next] = false;
        }
    }
    let mut visited = vec![false; g.devices.len()];
    visited[g.source] = true;
    let mut out = Vec::new();
    go(g, g.source, &mut visited, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathOracle {
    /// Minimal hop count over feasible simple paths.
    pub optimum: Option<usize>,
    /// Infeasible paths strictly shorter than the optimum.
    pub shorter_infeasible: usize,
    /// Infeasible paths exactly as long as the optimum.
    pub tied_infeasible: usize,
    pub candidates: usize,
}

pub fn path_oracle(g: &Layered) -> PathOracle {
    let paths = all_simple_paths(g);
    let checked: Vec<(usize, bool)> =
        paths.iter().map(|p| (p.len(), matches!(check_path(g, p), Check::Feasible { .. }))).collect();
    let optimum = checked.iter().filter(|c| c.1).map(|c| c.0).min();
    let bound = optimum.unwrap_or(usize::MAX);
    PathOracle {
        optimum,
        shorter_infeasible: checked.iter().filter(|c| !c.1 && c.0 < bound).count(),
        tied_infeasible: checked.iter().filter(|c| !c.1 && c.0 == bound).count(),
        candidates: checked.len(),
    }
}

/// True if `label` may be carried on `link`.
pub fn label_allowed(g: &Layered, link: usize, label: i64) -> bool {
    label_free(g, link, label)
}

pub fn layer_name(l: usize) -> &'static str {
    match l {
        ETH => "ethernet",
        DWDM => "dwdm",
        _ => "?",
    }
}

// ---------------------------------------------------------------- rules

fn value(t: &RuleTerm, env: &BTreeMap<String, Term>) -> Option<Term> {
    match t {
        RuleTerm::Var(v) => env.get(v).cloned(),
        RuleTerm::Const(c) => Some(c.clone()),
    }
}

/// Extends `env` so that `pattern` equals `actual`, or fails.
fn unify(pattern: &RuleTerm, actual: &Term, env: &mut BTreeMap<String, Term>) -> bool {
    match pattern {
        RuleTerm::Const(c) => c == actual,
        RuleTerm::Var(v) => match env.get(v) {
            Some(bound) => bound == actual,
            None => {
                env.insert(v.clone(), actual.clone());
                true
            }
        },
    }
}

/// Exhaustive substitution: every atom, in textual order, is matched against
/// every triple of the model; builtins are checked on complete assignments.
pub fn datalog_oracle(m: &Model, rules: &[Rule]) -> Vec<Violation> {
    let triples: Vec<Triple> = m.iter().collect();
    let rdf_type = terms().rdf_type.clone();
    let mut out: BTreeMap<(String, Iri), BTreeMap<String, Term>> = BTreeMap::new();
    for rule in rules {
        let mut atoms: Vec<(RuleTerm, Iri, RuleTerm)> =
            rule.triples.iter().map(|a| (a.subject.clone(), a.predicate.clone(), a.object.clone())).collect();
        atoms.extend(
            rule.classes.iter().map(|c| (c.subject.clone(), rdf_type.clone(), RuleTerm::Const(Term::Iri(c.class.clone())))),
        );
        let mut solutions = Vec::new();
        fn go(
            atoms: &[(RuleTerm, Iri, RuleTerm)],
            triples: &[Triple],
            env: BTreeMap<String, Term>,
            out: &mut Vec<BTreeMap<String, Term>>,
        ) {
            let Some(((s, p, o), rest)) = atoms.split_first() else {
                out.push(env);
                return;
            };
            for t in triples {
                if t.predicate != *p {
                    continue;
                }
                let mut e = env.clone();
                if unify(s, &Term::Iri(t.subject.clone()), &mut e) && unify(o, &t.object, &mut e) {
                    go(rest, triples, e, out);
                }
            }
        }
        go(&atoms, &triples, BTreeMap::new(), &mut solutions);
        for env in solutions {
            let ok = rule.builtins.iter().all(|b| match (value(&b.a, &env), value(&b.b, &env)) {
                (Some(x), Some(y)) => (x == y) == (b.kind == BuiltinKind::Equal),
                _ => false,
            });
            if !ok {
                continue;
            }
            let Some(Term::Iri(subject)) = env.get(&rule.subject).cloned() else { continue };
            let key = (rule.message.clone(), subject);
            match out.get(&key) {
                Some(existing) if *existing <= env => {}
                _ => {
                    out.insert(key, env);
                }
            }
        }
    }
    out.into_iter().map(|((message, subject), bindings)| Violation { message, subject, bindings }).collect()
}

// ---------------------------------------------------------------- residual state bounds

/// Reads resource facts straight from the triples and reports any in-use
/// amount outside its advertised bounds.
pub fn bound_violations(m: &Model) -> Vec<String> {
    let t = terms();
    let mut index: HashMap<(Iri, Iri), Vec<Term>> = HashMap::new();
    for x in m.iter() {
        index.entry((x.subject, x.predicate)).or_default().push(x.object);
    }
    let objects = |s: &Iri, p: &Iri| index.get(&(s.clone(), p.clone())).cloned().unwrap_or_default();
    let int = |s: &Iri, p: &Iri| -> Option<i64> { objects(s, p).first()?.as_literal()?.lexical.parse().ok() };
    let mut out = Vec::new();
    let subjects: BTreeSet<Iri> = index.keys().map(|k| k.0.clone()).collect();
    for s in &subjects {
        for (used_p, cap_p, what, default_cap) in [
            (&t.used_bandwidth, &t.available_bandwidth, "bandwidth", i64::MAX),
            (&t.used_units, &t.available_units, "units", 0),
            (&t.used_client_slots, &t.multiplex_capacity, "slots", 0),
        ] {
            if let Some(used) = int(s, used_p) {
                let cap = int(s, cap_p).unwrap_or(default_cap);
                if used < 0 || used > cap {
                    out.push(format!("{s}: used {what} {used} outside 0..={cap}"));
                }
            }
        }
        let pool: BTreeSet<i64> = objects(s, &t.has_label)
            .iter()
            .filter_map(|l| l.as_iri())
            .filter_map(|l| int(l, &t.label_value))
            .collect();
        if !pool.is_empty() {
            for o in objects(s, &t.used_label) {
                let v: Option<i64> = o.as_literal().and_then(|l| l.lexical.parse().ok());
                if !v.is_some_and(|v| pool.contains(&v)) {
                    out.push(format!("{s}: used label {o} outside its pool"));
                }
            }
        }
    }
    out
}
