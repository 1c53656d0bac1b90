//! Indexed in-memory triple set.

use std::collections::{BTreeMap, BTreeSet};

use super::term::{Iri, Literal, Term, Triple};

type Index<A, B, C> = BTreeMap<A, BTreeMap<B, BTreeSet<C>>>;

/// A set of triples with a prefix map and SPO/POS/OSP indexes.
///
/// Equality compares prefixes and triples; the indexes are derived data.
#[derive(Clone, Default)]
pub struct Model {
    prefixes: BTreeMap<String, Iri>,
    spo: Index<Iri, Iri, Term>,
    pos: Index<Iri, Term, Iri>,
    osp: Index<Term, Iri, Iri>,
    len: usize,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.prefixes == other.prefixes && self.spo == other.spo
    }
}

impl Eq for Model {}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model")
            .field("prefixes", &self.prefixes)
            .field("triples", &self.len)
            .finish()
    }
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn prefixes(&self) -> &BTreeMap<String, Iri> {
        &self.prefixes
    }

    /// Binds `name` to `iri`, returning the previous binding if any.
    pub fn set_prefix(&mut self, name: impl Into<String>, iri: Iri) -> Option<Iri> {
        self.prefixes.insert(name.into(), iri)
    }

    /// Expands `prefix:local` against the prefix map.
    pub fn expand_curie(&self, curie: &str) -> Option<Iri> {
        let (prefix, local) = curie.split_once(':')?;
        let base = self.prefixes.get(prefix)?;
        Iri::new(format!("{base}{local}")).ok()
    }

    /// Inserts a triple. Returns `false` if it was already present.
    pub fn insert(&mut self, t: Triple) -> bool {
        let Triple { subject, predicate, object } = t;
        let fresh = self
            .spo
            .entry(subject.clone())
            .or_default()
            .entry(predicate.clone())
            .or_default()
            .insert(object.clone());
        if !fresh {
            return false;
        }
        self.pos
            .entry(predicate.clone())
            .or_default()
            .entry(object.clone())
            .or_default()
            .insert(subject.clone());
        self.osp.entry(object).or_default().entry(subject).or_default().insert(predicate);
        self.len += 1;
        true
    }

    pub fn add(&mut self, s: &Iri, p: &Iri, o: impl Into<Term>) -> bool {
        self.insert(Triple::new(s.clone(), p.clone(), o))
    }

    /// Removes a triple. Returns `false` if it was not present.
    pub fn remove(&mut self, t: &Triple) -> bool {
        if !remove_nested(&mut self.spo, &t.subject, &t.predicate, &t.object) {
            return false;
        }
        remove_nested(&mut self.pos, &t.predicate, &t.object, &t.subject);
        remove_nested(&mut self.osp, &t.object, &t.subject, &t.predicate);
        self.len -= 1;
        true
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.contains_parts(&t.subject, &t.predicate, &t.object)
    }

    pub fn contains_parts(&self, s: &Iri, p: &Iri, o: &Term) -> bool {
        self.spo.get(s).and_then(|m| m.get(p)).is_some_and(|os| os.contains(o))
    }

    /// All triples in (subject, predicate, object) order.
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().flat_map(|(s, pm)| {
            pm.iter().flat_map(move |(p, os)| {
                os.iter().map(move |o| Triple::new(s.clone(), p.clone(), o.clone()))
            })
        })
    }

    /// Triples matching a pattern; `None` positions are wildcards.
    pub fn matching(&self, s: Option<&Iri>, p: Option<&Iri>, o: Option<&Term>) -> Vec<Triple> {
        let mut out = Vec::new();
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                if self.contains_parts(s, p, o) {
                    out.push(Triple::new(s.clone(), p.clone(), o.clone()));
                }
            }
            (Some(s), Some(p), None) => {
                for o in self.objects(s, p) {
                    out.push(Triple::new(s.clone(), p.clone(), o.clone()));
                }
            }
            (Some(s), None, o) => {
                if let Some(pm) = self.spo.get(s) {
                    for (p, os) in pm {
                        for obj in os {
                            if o.is_none_or(|o| o == obj) {
                                out.push(Triple::new(s.clone(), p.clone(), obj.clone()));
                            }
                        }
                    }
                }
            }
            (None, Some(p), Some(o)) => {
                for s in self.subjects(p, o) {
                    out.push(Triple::new(s.clone(), p.clone(), o.clone()));
                }
            }
            (None, Some(p), None) => {
                if let Some(om) = self.pos.get(p) {
                    for (o, ss) in om {
                        for s in ss {
                            out.push(Triple::new(s.clone(), p.clone(), o.clone()));
                        }
                    }
                }
            }
            (None, None, Some(o)) => {
                if let Some(sm) = self.osp.get(o) {
                    for (s, ps) in sm {
                        for p in ps {
                            out.push(Triple::new(s.clone(), p.clone(), o.clone()));
                        }
                    }
                }
            }
            (None, None, None) => out.extend(self.iter()),
        }
        out
    }

    /// Objects of `(s, p, ?)` in sorted order.
    pub fn objects<'a>(&'a self, s: &Iri, p: &Iri) -> impl Iterator<Item = &'a Term> + 'a {
        self.spo.get(s).and_then(|m| m.get(p)).into_iter().flatten()
    }

    /// IRI objects of `(s, p, ?)` in sorted order.
    pub fn object_iris<'a>(&'a self, s: &Iri, p: &Iri) -> impl Iterator<Item = &'a Iri> + 'a {
        self.objects(s, p).filter_map(Term::as_iri)
    }

    /// Subjects of `(?, p, o)` in sorted order.
    pub fn subjects<'a>(&'a self, p: &Iri, o: &Term) -> impl Iterator<Item = &'a Iri> + 'a {
        self.pos.get(p).and_then(|m| m.get(o)).into_iter().flatten()
    }

    /// Subjects having any value for `p`, in sorted order.
    pub fn subjects_with<'a>(&'a self, p: &Iri) -> impl Iterator<Item = &'a Iri> + 'a {
        let set: BTreeSet<&Iri> = self.pos.get(p).into_iter().flat_map(|m| m.values().flatten()).collect();
        set.into_iter()
    }

    /// All `(s, o)` pairs for predicate `p`.
    pub fn pairs<'a>(&'a self, p: &Iri) -> impl Iterator<Item = (&'a Iri, &'a Term)> + 'a {
        self.pos
            .get(p)
            .into_iter()
            .flat_map(|m| m.iter().flat_map(|(o, ss)| ss.iter().map(move |s| (s, o))))
    }

    /// Distinct subjects in sorted order.
    pub fn subject_iris(&self) -> impl Iterator<Item = &Iri> + '_ {
        self.spo.keys()
    }

    /// Distinct predicates in sorted order.
    pub fn predicates(&self) -> impl Iterator<Item = &Iri> + '_ {
        self.pos.keys()
    }

    /// Predicates used from subject `s`.
    pub fn predicates_of<'a>(&'a self, s: &Iri) -> impl Iterator<Item = &'a Iri> + 'a {
        self.spo.get(s).into_iter().flat_map(|m| m.keys())
    }

    /// Every term appearing anywhere in the model, sorted.
    pub fn terms(&self) -> BTreeSet<Term> {
        let mut out: BTreeSet<Term> = self.osp.keys().cloned().collect();
        out.extend(self.spo.keys().cloned().map(Term::Iri));
        out.extend(self.pos.keys().cloned().map(Term::Iri));
        out
    }

    pub fn first_object(&self, s: &Iri, p: &Iri) -> Option<&Term> {
        self.objects(s, p).next()
    }

    pub fn first_literal(&self, s: &Iri, p: &Iri) -> Option<&Literal> {
        self.objects(s, p).find_map(Term::as_literal)
    }

    /// First integer-valued literal for `(s, p)`.
    pub fn integer(&self, s: &Iri, p: &Iri) -> Option<i64> {
        self.objects(s, p).filter_map(Term::as_literal).find_map(Literal::as_integer)
    }

    /// Replaces all values of `(s, p)` with a single integer, or removes them when `value` is zero
    /// and `drop_zero` is set.
    pub fn set_integer(&mut self, s: &Iri, p: &Iri, value: i64, drop_zero: bool) {
        let old: Vec<Term> = self.objects(s, p).cloned().collect();
        for o in old {
            self.remove(&Triple::new(s.clone(), p.clone(), o));
        }
        if !(drop_zero && value == 0) {
            self.add(s, p, Literal::integer(value));
        }
    }

    /// Adds every triple of `other`. Prefixes are not touched.
    pub fn extend_triples(&mut self, other: &Model) {
        for t in other.iter() {
            self.insert(t);
        }
    }

    /// True if both models hold the same triple set, ignoring prefixes.
    pub fn same_triples(&self, other: &Model) -> bool {
        self.spo == other.spo
    }

    /// True if every triple of `self` is in `other`.
    pub fn is_subset_of(&self, other: &Model) -> bool {
        self.len <= other.len && self.iter().all(|t| other.contains(&t))
    }

    /// Rebuilds all indexes from the SPO set and checks they agree with the live ones.
    pub fn check_indexes(&self) -> bool {
        let mut rebuilt = Model::new();
        for t in self.iter() {
            rebuilt.insert(t);
        }
        rebuilt.len == self.len
            && rebuilt.pos == self.pos
            && rebuilt.osp == self.osp
            && self.spo.values().all(|m| !m.is_empty() && m.values().all(|s| !s.is_empty()))
    }
}

impl FromIterator<Triple> for Model {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut m = Model::new();
        for t in iter {
            m.insert(t);
        }
        m
    }
}

impl Extend<Triple> for Model {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        for t in iter {
            self.insert(t);
        }
    }
}

fn remove_nested<A: Ord, B: Ord, C: Ord>(idx: &mut Index<A, B, C>, a: &A, b: &B, c: &C) -> bool {
    let Some(inner) = idx.get_mut(a) else { return false };
    let Some(leaf) = inner.get_mut(b) else { return false };
    if !leaf.remove(c) {
        return false;
    }
    if leaf.is_empty() {
        inner.remove(b);
    }
    if inner.is_empty() {
        idx.remove(a);
    }
    true
}
