//! Violation rules: a Datalog subset with unary and binary predicates plus
//! `equal`/`notEqual`, evaluated as a join over an entailed model.
//!
//! Every rule derives only `violation(message, ?X)`; there are no derived
//! facts, so a single join per rule is the fixpoint.

mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use crate::graphstore::{Iri, Model, Term};
use crate::vocab::{self, ns::terms};

pub use parse::{parse_ruleset, RuleParseError};

pub const BROADCAST_REPEATED_DOMAIN: &str = "Domains in broadcast link can't be repeated";
pub const BROADCAST_TOO_FEW_INTERFACES: &str = "Broadcast link must have at least 3 interfaces";
pub const POINT_TO_POINT_INTERFACES: &str = "Point-to-point link must have exactly 2 interfaces";
pub const UNREACHABLE_ELEMENT: &str = "Request element is not reachable from the reservation";

/// Default cap on candidate bindings examined per evaluation.
pub const DEFAULT_JOIN_BUDGET: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleTerm {
    Var(String),
    Const(Term),
}

impl RuleTerm {
    fn var(&self) -> Option<&str> {
        match self {
            RuleTerm::Var(v) => Some(v),
            RuleTerm::Const(_) => None,
        }
    }
}

/// Binary atom `(s p o)` with a constant predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleAtom {
    pub subject: RuleTerm,
    pub predicate: Iri,
    pub object: RuleTerm,
}

/// Unary atom: `(s rdf:type Class)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassAtom {
    pub subject: RuleTerm,
    pub class: Iri,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinKind {
    Equal,
    NotEqual,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Builtin {
    pub kind: BuiltinKind,
    pub a: RuleTerm,
    pub b: RuleTerm,
}

/// `violation(message, ?subject) <- body`.
///
/// The body keeps binary atoms, class atoms and builtins apart; only binary
/// atoms count towards [`Rule::body_len`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub message: String,
    pub subject: String,
    pub triples: Vec<TripleAtom>,
    pub classes: Vec<ClassAtom>,
    pub builtins: Vec<Builtin>,
    /// Line of the rule head in its source text.
    pub line: usize,
}

impl Rule {
    pub fn body_len(&self) -> usize {
        self.triples.len()
    }

    /// Variables bound by positive atoms, sorted.
    pub fn positive_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in &self.triples {
            out.extend(t.subject.var().map(str::to_string));
            out.extend(t.object.var().map(str::to_string));
        }
        for c in &self.classes {
            out.extend(c.subject.var().map(str::to_string));
        }
        out
    }

    /// A head or builtin variable missing from every positive atom.
    pub fn unsafe_variable(&self) -> Option<String> {
        let bound = self.positive_variables();
        std::iter::once(self.subject.as_str())
            .chain(self.builtins.iter().flat_map(|b| [b.a.var(), b.b.var()]).flatten())
            .find(|v| !bound.contains(*v))
            .map(str::to_string)
    }

    /// True iff the body holds in `m` under `bindings` (which must cover every variable).
    pub fn holds(&self, m: &Model, bindings: &BTreeMap<String, Term>) -> bool {
        let value = |t: &RuleTerm| match t {
            RuleTerm::Var(v) => bindings.get(v).cloned(),
            RuleTerm::Const(c) => Some(c.clone()),
        };
        let rdf_type = &terms().rdf_type;
        let triple_ok = |s: Option<Term>, p: &Iri, o: Option<Term>| match (s, o) {
            (Some(Term::Iri(s)), Some(o)) => m.contains_parts(&s, p, &o),
            _ => false,
        };
        self.triples.iter().all(|a| triple_ok(value(&a.subject), &a.predicate, value(&a.object)))
            && self.classes.iter().all(|c| triple_ok(value(&c.subject), rdf_type, Some(Term::Iri(c.class.clone()))))
            && self.builtins.iter().all(|b| match (value(&b.a), value(&b.b)) {
                (Some(x), Some(y)) => (x == y) == (b.kind == BuiltinKind::Equal),
                _ => false,
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub message: String,
    pub subject: Iri,
    /// Variable assignment that fired the rule (the smallest one, when several did).
    pub bindings: BTreeMap<String, Term>,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "VIOLATION {} {}", self.message, self.subject)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("rule at line {line} exceeded the join budget of {budget} candidate bindings")]
    EvaluationBudgetExceeded { line: usize, budget: u64 },
}

/// A compiled positive atom: slots are variable indexes or constants.
#[derive(Debug)]
enum Slot {
    Var(usize),
    Const(Term),
}

struct Compiled<'r> {
    rule: &'r Rule,
    vars: Vec<String>,
    atoms: Vec<(Slot, Iri, Slot)>,
    builtins: Vec<(BuiltinKind, Slot, Slot)>,
    subject: usize,
}

fn compile(rule: &Rule) -> Compiled<'_> {
    let mut vars: Vec<String> = rule.positive_variables().into_iter().collect();
    if !vars.contains(&rule.subject) {
        vars.push(rule.subject.clone());
    }
    let slot = |t: &RuleTerm, vars: &Vec<String>| match t {
        RuleTerm::Var(v) => Slot::Var(vars.iter().position(|x| x == v).expect("safe rule")),
        RuleTerm::Const(c) => Slot::Const(c.clone()),
    };
    let rdf_type = terms().rdf_type.clone();
    let mut atoms: Vec<(Slot, Iri, Slot)> =
        rule.triples.iter().map(|a| (slot(&a.subject, &vars), a.predicate.clone(), slot(&a.object, &vars))).collect();
    atoms.extend(
        rule.classes.iter().map(|c| (slot(&c.subject, &vars), rdf_type.clone(), Slot::Const(Term::Iri(c.class.clone())))),
    );
    let builtins = rule.builtins.iter().map(|b| (b.kind, slot(&b.a, &vars), slot(&b.b, &vars))).collect();
    let subject = vars.iter().position(|x| *x == rule.subject).unwrap();
    Compiled { rule, vars, atoms, builtins, subject }
}

struct Search<'a, 'r> {
    m: &'a Model,
    c: &'a Compiled<'r>,
    env: Vec<Option<Term>>,
    done: Vec<bool>,
    spent: u64,
    budget: u64,
    out: &'a mut BTreeMap<(String, Iri), BTreeMap<String, Term>>,
}

impl Search<'_, '_> {
    fn get(&self, s: &Slot) -> Option<Term> {
        match s {
            Slot::Var(i) => self.env[*i].clone(),
            Slot::Const(t) => Some(t.clone()),
        }
    }

    fn builtins_ok(&self) -> bool {
        self.c.builtins.iter().all(|(k, a, b)| match (self.get(a), self.get(b)) {
            (Some(x), Some(y)) => (x == y) == (*k == BuiltinKind::Equal),
            _ => true,
        })
    }

    /// Picks the pending atom with the most bound positions.
    fn next_atom(&self) -> Option<usize> {
        let bound = |s: &Slot| usize::from(self.get(s).is_some());
        (0..self.c.atoms.len())
            .filter(|i| !self.done[*i])
            .max_by_key(|i| {
                let (s, _, o) = &self.c.atoms[*i];
                (bound(s) * 2 + bound(o), std::cmp::Reverse(*i))
            })
    }

    fn run(&mut self) -> Result<(), RuleError> {
        let Some(i) = self.next_atom() else {
            self.emit();
            return Ok(());
        };
        let (s, p, o) = &self.c.atoms[i];
        let sv = match self.get(s) {
            Some(Term::Iri(x)) => Some(x),
            Some(_) => return Ok(()),
            None => None,
        };
        let ov = self.get(o);
        let candidates = self.m.matching(sv.as_ref(), Some(p), ov.as_ref());
        self.done[i] = true;
        for t in candidates {
            self.spent += 1;
            if self.spent > self.budget {
                return Err(RuleError::EvaluationBudgetExceeded { line: self.c.rule.line, budget: self.budget });
            }
            let saved = self.env.clone();
            if self.bind(s, Term::Iri(t.subject.clone())) && self.bind(o, t.object.clone()) && self.builtins_ok() {
                self.run()?;
            }
            self.env = saved;
        }
        self.done[i] = false;
        Ok(())
    }

    fn bind(&mut self, slot: &Slot, value: Term) -> bool {
        match slot {
            Slot::Const(c) => *c == value,
            Slot::Var(i) => match &self.env[*i] {
                Some(v) => *v == value,
                None => {
                    self.env[*i] = Some(value);
                    true
                }
            },
        }
    }

    fn emit(&mut self) {
        let Some(Term::Iri(subject)) = self.env[self.c.subject].clone() else { return };
        let bindings: BTreeMap<String, Term> = self
            .c
            .vars
            .iter()
            .zip(&self.env)
            .filter_map(|(v, t)| t.clone().map(|t| (v.clone(), t)))
            .collect();
        let key = (self.c.rule.message.clone(), subject);
        match self.out.get(&key) {
            Some(existing) if *existing <= bindings => {}
            _ => {
                self.out.insert(key, bindings);
            }
        }
    }
}

/// Evaluates `rules` against an entailed model with the default join budget.
pub fn evaluate(m: &Model, rules: &[Rule]) -> Result<Vec<Violation>, RuleError> {
    evaluate_with_budget(m, rules, DEFAULT_JOIN_BUDGET)
}

/// Violations of `rules` in `m`, one per (message, subject), sorted.
pub fn evaluate_with_budget(m: &Model, rules: &[Rule], budget: u64) -> Result<Vec<Violation>, RuleError> {
    let mut out = BTreeMap::new();
    for rule in rules {
        let c = compile(rule);
        let mut s = Search {
            m,
            c: &c,
            env: vec![None; c.vars.len()],
            done: vec![false; c.atoms.len()],
            spent: 0,
            budget,
            out: &mut out,
        };
        s.run()?;
    }
    Ok(collect(out))
}

fn collect(out: BTreeMap<(String, Iri), BTreeMap<String, Term>>) -> Vec<Violation> {
    out.into_iter().map(|((message, subject), bindings)| Violation { message, subject, bindings }).collect()
}

const BUILTIN_RULES: &str = r#"
# Repeated domain among the members of a broadcast link.
(?Z rb:violation error("Domains in broadcast link can't be repeated", ?X)) <-
    (?X rdf:type topo:BroadcastConnection), (?X topo:hasInterface ?I1),
    (?X topo:hasInterface ?I2), notEqual(?I1, ?I2), (?A topo:hasInterface ?I1),
    (?B topo:hasInterface ?I2), (?A rdf:type comp:ComputeElement),
    (?B rdf:type comp:ComputeElement), notEqual(?A, ?B),
    (?A req:inDomain ?D1), (?B req:inDomain ?D2), equal(?D1, ?D2),
    (?X topo:hasInterface ?I3), notEqual(?I1, ?I3), notEqual(?I2, ?I3),
    (?C topo:hasInterface ?I3), (?C rdf:type comp:ComputeElement),
    (?C req:inDomain ?D3), notEqual(?D3, ?D1) .

# A point-to-point link with three or more interfaces.
violation("Point-to-point link must have exactly 2 interfaces", ?X) <-
    (?X rdf:type topo:NetworkConnection), (?X topo:hasInterface ?I1),
    (?X topo:hasInterface ?I2), (?X topo:hasInterface ?I3),
    notEqual(?I1, ?I2), notEqual(?I1, ?I3), notEqual(?I2, ?I3) .
"#;

/// The Datalog part of the built-in request ruleset.
pub fn builtin_rules() -> &'static [Rule] {
    static RULES: OnceLock<Vec<Rule>> = OnceLock::new();
    RULES.get_or_init(|| parse_ruleset(BUILTIN_RULES, &vocab::prefixed_model()).expect("built-in rules parse"))
}

fn structural(message: &str, subject: &Iri) -> Violation {
    let bindings = BTreeMap::from([("X".to_string(), Term::Iri(subject.clone()))]);
    Violation { message: message.to_string(), subject: subject.clone(), bindings }
}

/// Built-in checks that need counting or absence, which the rule language
/// cannot state: too few interfaces on a link, and request elements that no
/// reservation lists.
pub fn structural_violations(m: &Model) -> Vec<Violation> {
    let t = terms();
    let mut out = Vec::new();
    let real = |c: &Iri| -> Vec<Iri> {
        vocab::instances_of(m, c).filter(|x| !vocab::is_schema_entity(m, x)).cloned().collect()
    };
    for l in real(&t.broadcast_connection) {
        if m.object_iris(&l, &t.has_interface).count() < 3 {
            out.push(structural(BROADCAST_TOO_FEW_INTERFACES, &l));
        }
    }
    for l in real(&t.network_connection) {
        if m.object_iris(&l, &t.has_interface).count() < 2 {
            out.push(structural(POINT_TO_POINT_INTERFACES, &l));
        }
    }
    if !real(&t.reservation).is_empty() {
        let listed: BTreeSet<Iri> = m.pairs(&t.element).filter_map(|(_, e)| e.as_iri().cloned()).collect();
        let mut elements: BTreeSet<Iri> = BTreeSet::new();
        for c in [&t.compute_element, &t.network_connection, &t.broadcast_connection] {
            elements.extend(real(c));
        }
        for e in elements.difference(&listed) {
            out.push(structural(UNREACHABLE_ELEMENT, e));
        }
    }
    out
}

/// Built-in rules, `extra` rules and structural checks, merged and sorted.
pub fn validate_request(m: &Model, extra: &[Rule]) -> Result<Vec<Violation>, RuleError> {
    let rules: Vec<Rule> = builtin_rules().iter().chain(extra).cloned().collect();
    let mut all: BTreeMap<(String, Iri), BTreeMap<String, Term>> = BTreeMap::new();
    for v in evaluate(m, &rules)?.into_iter().chain(structural_violations(m)) {
        all.entry((v.message, v.subject)).or_insert(v.bindings);
    }
    Ok(collect(all))
}
