//! Broker: merges delegations into one view and issues tickets against it.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, Utc};

use crate::embed::{allocate, check_conservation, release, AllocError, ConservationIssue, InterDomainPlan, Reservation, WorkOrder};
use crate::graphstore::{parse_document, serialize_document, EntailError, Iri, Model, SyntaxError};
use crate::models::request::Term as LeaseTerm;
use crate::models::{delegation_view, parse_delegations};
use crate::vocab;

pub const DEFAULT_VALIDITY_DAYS: i64 = 365;

/// Permission to instantiate one domain's share of a slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ticket {
    pub id: String,
    pub slice: String,
    pub domain: Iri,
    pub order: WorkOrder,
    pub term: LeaseTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BrokerError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Entailment(#[from] EntailError),
    #[error("a delegation must describe exactly one domain, found {0}")]
    DomainCount(usize),
    #[error("re-delegation of {domain} falls below outstanding commitments: {cause}")]
    BelowCommitments { domain: Iri, cause: AllocError },
    #[error("no delegation registered for {0}")]
    UnknownDomain(Iri),
    #[error("term {begin}..{end} lies outside the delegation window of {domain}")]
    OutsideWindow { domain: Iri, begin: DateTime<Utc>, end: DateTime<Utc> },
    #[error(transparent)]
    Allocation(#[from] AllocError),
    #[error("slice {0} already holds tickets")]
    DuplicateSlice(String),
}

#[derive(Debug, Clone)]
pub struct Broker {
    pub id: String,
    validity: Duration,
    delegations: BTreeMap<Iri, Model>,
    windows: BTreeMap<Iri, (DateTime<Utc>, DateTime<Utc>)>,
    view: Model,
    /// Reservations against the view, per slice.
    commitments: BTreeMap<String, Vec<Reservation>>,
    tickets: BTreeMap<String, Ticket>,
}

impl Default for Broker {
    fn default() -> Self {
        Self::new(Duration::days(DEFAULT_VALIDITY_DAYS))
    }
}

impl Broker {
    pub fn new(validity: Duration) -> Self {
        Broker {
            id: "broker".into(),
            validity,
            delegations: BTreeMap::new(),
            windows: BTreeMap::new(),
            view: vocab::closure_with_schema(&Model::new(), []).expect("schema entails"),
            commitments: BTreeMap::new(),
            tickets: BTreeMap::new(),
        }
    }

    /// Registers (or replaces) a domain's delegation, given as NDL-Lite text.
    pub fn register(&mut self, text: &str, now: DateTime<Utc>) -> Result<Iri, BrokerError> {
        let doc = parse_document(text)?;
        let closed = vocab::closure_with_schema(&doc, [])?;
        let found = parse_delegations(&closed);
        if found.len() != 1 {
            return Err(BrokerError::DomainCount(found.len()));
        }
        let domain = found[0].domain.clone();
        let mut delegations = self.delegations.clone();
        delegations.insert(domain.clone(), doc);
        let mut view = delegation_view(delegations.values())?;
        let held: Vec<Reservation> = self.commitments.values().flatten().cloned().collect();
        allocate(&mut view, &held).map_err(|cause| BrokerError::BelowCommitments { domain: domain.clone(), cause })?;
        self.delegations = delegations;
        self.view = view;
        self.windows.insert(domain.clone(), (now, now + self.validity));
        Ok(domain)
    }

    pub fn view(&self) -> &Model {
        &self.view
    }

    pub fn domains(&self) -> impl Iterator<Item = &Iri> {
        self.delegations.keys()
    }

    pub fn tickets(&self) -> impl Iterator<Item = &Ticket> {
        self.tickets.values()
    }

    /// Commits the plan's broker-level reservations and issues one ticket per
    /// participating domain, in domain order.
    pub fn issue(&mut self, slice: &str, plan: &InterDomainPlan, term: LeaseTerm) -> Result<Vec<Ticket>, BrokerError> {
        if self.commitments.contains_key(slice) {
            return Err(BrokerError::DuplicateSlice(slice.to_string()));
        }
        for d in plan.orders.keys() {
            let &(from, to) = self.windows.get(d).ok_or_else(|| BrokerError::UnknownDomain(d.clone()))?;
            if term.begin < from || term.end() > to {
                return Err(BrokerError::OutsideWindow { domain: d.clone(), begin: term.begin, end: term.end() });
            }
        }
        allocate(&mut self.view, &plan.broker_reservations)?;
        self.commitments.insert(slice.to_string(), plan.broker_reservations.clone());
        let mut out = Vec::new();
        for (d, order) in &plan.orders {
            let t = Ticket {
                id: format!("{slice}/{}", d.local_name()),
                slice: slice.to_string(),
                domain: d.clone(),
                order: order.clone(),
                term,
            };
            self.tickets.insert(t.id.clone(), t.clone());
            out.push(t);
        }
        Ok(out)
    }

    /// Returns a slice's committed resources to the pool and drops its tickets.
    pub fn refund(&mut self, slice: &str) -> Result<bool, AllocError> {
        let Some(rs) = self.commitments.get(slice) else { return Ok(false) };
        release(&mut self.view, rs)?;
        self.commitments.remove(slice);
        self.tickets.retain(|_, t| t.slice != slice);
        Ok(true)
    }

    pub fn conservation_issues(&self) -> Vec<ConservationIssue> {
        check_conservation(&self.view, self.commitments.values().flatten())
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("# {}\n", self.id);
        for (d, (a, b)) in &self.windows {
            out += &format!("# window {d} {} {}\n", a.to_rfc3339(), b.to_rfc3339());
        }
        for t in self.tickets.values() {
            out += &format!("# ticket {} {} {}\n", t.id, t.domain, t.term.end().to_rfc3339());
        }
        out + &serialize_document(&self.view)
    }
}
