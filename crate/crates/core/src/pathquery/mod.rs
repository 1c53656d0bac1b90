//! Regular path expressions over a [`Model`]: reachability, next-hop
//! discovery with witnesses, and internal-element listing.

mod parse;

use std::collections::BTreeSet;
use std::fmt;

use crate::graphstore::{Iri, Model, Term};

pub use parse::{parse_path, PathSyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathExpr {
    Pred(Iri),
    Inverse(Box<PathExpr>),
    /// At least two steps.
    Seq(Vec<PathExpr>),
    /// At least two alternatives.
    Alt(Vec<PathExpr>),
    Star(Box<PathExpr>),
    Plus(Box<PathExpr>),
}

impl PathExpr {
    pub fn pred(p: &Iri) -> Self {
        PathExpr::Pred(p.clone())
    }

    pub fn inverse(e: PathExpr) -> Self {
        PathExpr::Inverse(Box::new(e))
    }

    pub fn star(e: PathExpr) -> Self {
        PathExpr::Star(Box::new(e))
    }

    pub fn plus(e: PathExpr) -> Self {
        PathExpr::Plus(Box::new(e))
    }

    /// Checks the arity rules recursively.
    pub fn is_well_formed(&self) -> bool {
        match self {
            PathExpr::Pred(_) => true,
            PathExpr::Inverse(e) | PathExpr::Star(e) | PathExpr::Plus(e) => e.is_well_formed(),
            PathExpr::Seq(v) | PathExpr::Alt(v) => v.len() >= 2 && v.iter().all(PathExpr::is_well_formed),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            PathExpr::Pred(_) => 1,
            PathExpr::Inverse(e) | PathExpr::Star(e) | PathExpr::Plus(e) => 1 + e.depth(),
            PathExpr::Seq(v) | PathExpr::Alt(v) => 1 + v.iter().map(PathExpr::depth).max().unwrap_or(0),
        }
    }

    /// The device-adjacency expression `hasInterface/linkedTo/interfaceOf`.
    pub fn device_adjacency() -> Self {
        let t = crate::vocab::ns::terms();
        PathExpr::Seq(vec![
            PathExpr::pred(&t.has_interface),
            PathExpr::pred(&t.linked_to),
            PathExpr::pred(&t.interface_of),
        ])
    }
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrapped(f: &mut fmt::Formatter<'_>, e: &PathExpr, wrap: bool) -> fmt::Result {
            if wrap {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            PathExpr::Pred(p) => write!(f, "<{p}>"),
            PathExpr::Inverse(e) => {
                f.write_str("^")?;
                wrapped(f, e, matches!(**e, PathExpr::Seq(_) | PathExpr::Alt(_)))
            }
            PathExpr::Star(e) | PathExpr::Plus(e) => {
                wrapped(f, e, matches!(**e, PathExpr::Seq(_) | PathExpr::Alt(_) | PathExpr::Inverse(_)))?;
                f.write_str(if matches!(self, PathExpr::Star(_)) { "*" } else { "+" })
            }
            PathExpr::Seq(v) | PathExpr::Alt(v) => {
                let is_seq = matches!(self, PathExpr::Seq(_));
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(if is_seq { "/" } else { "|" })?;
                    }
                    let wrap = match e {
                        PathExpr::Alt(_) => true,
                        PathExpr::Seq(_) => is_seq,
                        _ => false,
                    };
                    wrapped(f, e, wrap)?;
                }
                Ok(())
            }
        }
    }
}

/// One step along a single predicate edge in either direction.
fn step_pred(m: &Model, from: &Iri, p: &Iri, inverted: bool) -> Vec<Iri> {
    if inverted {
        m.subjects(p, &Term::Iri(from.clone())).cloned().collect()
    } else {
        m.object_iris(from, p).cloned().collect()
    }
}

fn eval_set(m: &Model, from: BTreeSet<Iri>, expr: &PathExpr, inverted: bool) -> BTreeSet<Iri> {
    match expr {
        PathExpr::Pred(p) => from.iter().flat_map(|n| step_pred(m, n, p, inverted)).collect(),
        PathExpr::Inverse(e) => eval_set(m, from, e, !inverted),
        PathExpr::Seq(steps) => {
            let mut cur = from;
            let ordered: Box<dyn Iterator<Item = &PathExpr>> =
                if inverted { Box::new(steps.iter().rev()) } else { Box::new(steps.iter()) };
            for s in ordered {
                if cur.is_empty() {
                    break;
                }
                cur = eval_set(m, cur, s, inverted);
            }
            cur
        }
        PathExpr::Alt(alts) => alts.iter().flat_map(|a| eval_set(m, from.clone(), a, inverted)).collect(),
        PathExpr::Star(e) => closure(m, from, e, inverted),
        PathExpr::Plus(e) => {
            let first = eval_set(m, from, e, inverted);
            closure(m, first, e, inverted)
        }
    }
}

/// Breadth-first closure: every node is expanded at most once.
fn closure(m: &Model, from: BTreeSet<Iri>, e: &PathExpr, inverted: bool) -> BTreeSet<Iri> {
    let mut seen = from.clone();
    let mut frontier = from;
    while !frontier.is_empty() {
        let next = eval_set(m, frontier, e, inverted);
        frontier = next.into_iter().filter(|n| seen.insert(n.clone())).collect();
    }
    seen
}

/// Nodes reachable from `start` by a walk whose predicate sequence matches `expr`.
pub fn eval_path(m: &Model, start: &Iri, expr: &PathExpr) -> BTreeSet<Iri> {
    eval_set(m, BTreeSet::from([start.clone()]), expr, false)
}

/// A discovered next hop together with the intermediate nodes of the walk.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HopWitness {
    pub origin: Iri,
    pub neighbor: Iri,
    /// Nodes between `origin` and `neighbor`, in walk order.
    pub via: Vec<Iri>,
}

impl HopWitness {
    /// `origin`, `via`, `neighbor` in order.
    pub fn elements(&self) -> impl Iterator<Item = &Iri> {
        std::iter::once(&self.origin).chain(self.via.iter()).chain(std::iter::once(&self.neighbor))
    }
}

fn steps_of(conn: &PathExpr) -> &[PathExpr] {
    match conn {
        PathExpr::Seq(steps) => steps,
        other => std::slice::from_ref(other),
    }
}

/// Successors of `n` under a single step. Atomic steps follow one edge;
/// composite steps fall back to [`eval_path`] and contribute no intermediates.
fn step(m: &Model, n: &Iri, s: &PathExpr) -> Vec<Iri> {
    match s {
        PathExpr::Pred(p) => step_pred(m, n, p, false),
        PathExpr::Inverse(inner) => match &**inner {
            PathExpr::Pred(p) => step_pred(m, n, p, true),
            _ => eval_path(m, n, s).into_iter().collect(),
        },
        _ => eval_path(m, n, s).into_iter().collect(),
    }
}

/// Next hops of `node` under `conn`, one witness per distinct (neighbor, via),
/// sorted by (neighbor, via).
pub fn adjacent(m: &Model, node: &Iri, conn: &PathExpr) -> Vec<HopWitness> {
    let steps = steps_of(conn);
    let mut out = BTreeSet::new();
    let mut walk = Vec::new();
    walk_steps(m, node, node, steps, &mut walk, &mut out);
    let mut v: Vec<HopWitness> = out.into_iter().collect();
    v.sort_by(|a, b| (&a.neighbor, &a.via).cmp(&(&b.neighbor, &b.via)));
    v
}

fn walk_steps(
    m: &Model,
    origin: &Iri,
    at: &Iri,
    steps: &[PathExpr],
    walk: &mut Vec<Iri>,
    out: &mut BTreeSet<HopWitness>,
) {
    let Some((first, rest)) = steps.split_first() else {
        if at != origin {
            out.insert(HopWitness { origin: origin.clone(), neighbor: at.clone(), via: walk.clone() });
        }
        return;
    };
    for next in step(m, at, first) {
        if rest.is_empty() {
            walk_steps(m, origin, &next, rest, walk, out);
        } else {
            walk.push(next.clone());
            walk_steps(m, origin, &next, rest, walk, out);
            walk.pop();
        }
    }
}

/// Ordered elements of a contiguous witness chain with consecutive duplicates removed.
pub fn sub_graph(chain: &[HopWitness]) -> Vec<Iri> {
    let mut out: Vec<Iri> = Vec::new();
    for w in chain {
        for e in w.elements() {
            if out.last() != Some(e) {
                out.push(e.clone());
            }
        }
    }
    out
}
