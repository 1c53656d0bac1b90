//! Aggregate manager: owns one domain's detailed substrate and its leases.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use crate::embed::{allocate, check_conservation, expand_domain, release, AllocError, ConservationIssue, DomainPlan, EmbedError, Reservation};
use crate::graphstore::{serialize_document, EntailError, Iri, Model};
use crate::models::{build_delegation, parse_delegations, parse_substrate, delegated_units, SubstrateError};
use crate::vocab::{self, ConformanceIssue};

use super::broker::Ticket;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AmError {
    #[error(transparent)]
    Entailment(#[from] EntailError),
    #[error("substrate does not conform: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Conformance(Vec<ConformanceIssue>),
    #[error(transparent)]
    Substrate(#[from] SubstrateError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RedeemError {
    #[error("ticket {ticket} expired at {end}")]
    Expired { ticket: String, end: DateTime<Utc> },
    #[error("ticket {ticket} asks for {requested} units of {class} but only {available} remain delegated")]
    OverDelegated { ticket: String, class: Iri, requested: i64, available: i64 },
    #[error("ticket {ticket} is for domain {domain}")]
    WrongDomain { ticket: String, domain: Iri },
    #[error("ticket {ticket} was already redeemed")]
    AlreadyRedeemed { ticket: String },
    #[error(transparent)]
    InfeasibleDetail(EmbedError),
}

impl RedeemError {
    pub fn kind(&self) -> &'static str {
        match self {
            RedeemError::Expired { .. } => "expired",
            RedeemError::OverDelegated { .. } => "over-delegated",
            RedeemError::WrongDomain { .. } | RedeemError::AlreadyRedeemed { .. } => "invalid-ticket",
            RedeemError::InfeasibleDetail(_) => "infeasible-detail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lease {
    pub ticket: String,
    pub slice: String,
    pub end: DateTime<Utc>,
    pub units: BTreeMap<Iri, i64>,
    pub reservations: Vec<Reservation>,
}

#[derive(Debug, Clone)]
pub struct AggregateManager {
    pub id: String,
    pub domain: Iri,
    state: Model,
    /// Units per class in the most recent delegation.
    delegated: BTreeMap<Iri, i64>,
    leases: BTreeMap<String, Lease>,
}

impl AggregateManager {
    /// Builds an AM from a substrate document: schema closure, conformance
    /// check, then structural parsing.
    pub fn new(doc: &Model, extensions: &[Model]) -> Result<Self, AmError> {
        let state = vocab::closure_with_schema(doc, extensions)?;
        let issues = vocab::validate_conformance(&state);
        if !issues.is_empty() {
            return Err(AmError::Conformance(issues));
        }
        let g = parse_substrate(&state)?;
        Ok(AggregateManager {
            id: format!("am:{}", g.domain.local_name()),
            domain: g.domain,
            state,
            delegated: BTreeMap::new(),
            leases: BTreeMap::new(),
        })
    }

    /// Summarizes the substrate for a broker and remembers what was offered.
    pub fn delegate(&mut self) -> Model {
        let g = parse_substrate(&self.state).expect("substrate parsed at construction");
        let doc = build_delegation(&g);
        let closed = vocab::closure_with_schema(&doc, []).expect("delegation entails");
        self.delegated = parse_delegations(&closed).iter().map(delegated_units).next().unwrap_or_default();
        doc
    }

    fn leased_units(&self, class: &Iri) -> i64 {
        self.leases.values().map(|l| l.units.get(class).copied().unwrap_or(0)).sum()
    }

    /// Realizes a ticket against the detailed substrate and records the lease.
    pub fn redeem(&mut self, ticket: &Ticket, now: DateTime<Utc>, limit: usize) -> Result<DomainPlan, RedeemError> {
        if ticket.domain != self.domain {
            return Err(RedeemError::WrongDomain { ticket: ticket.id.clone(), domain: ticket.domain.clone() });
        }
        if self.leases.contains_key(&ticket.id) {
            return Err(RedeemError::AlreadyRedeemed { ticket: ticket.id.clone() });
        }
        let end = ticket.term.end();
        if end <= now {
            return Err(RedeemError::Expired { ticket: ticket.id.clone(), end });
        }
        let units = ticket.order.units_by_class();
        for (class, &requested) in &units {
            let available = self.delegated.get(class).copied().unwrap_or(0) - self.leased_units(class);
            if requested > available {
                return Err(RedeemError::OverDelegated {
                    ticket: ticket.id.clone(),
                    class: class.clone(),
                    requested,
                    available,
                });
            }
        }
        let plan = expand_domain(&self.state, &self.domain, &ticket.order, limit).map_err(RedeemError::InfeasibleDetail)?;
        allocate(&mut self.state, &plan.reservations).map_err(|e| {
            RedeemError::InfeasibleDetail(EmbedError::InfeasibleDetail {
                domain: self.domain.clone(),
                element: self.domain.clone(),
                reason: e.to_string(),
            })
        })?;
        self.leases.insert(
            ticket.id.clone(),
            Lease { ticket: ticket.id.clone(), slice: ticket.slice.clone(), end, units, reservations: plan.reservations.clone() },
        );
        Ok(plan)
    }

    /// Releases a lease; unknown tickets are ignored and reported as `false`.
    pub fn release(&mut self, ticket: &str) -> Result<bool, AllocError> {
        let Some(lease) = self.leases.get(ticket) else { return Ok(false) };
        release(&mut self.state, &lease.reservations)?;
        self.leases.remove(ticket);
        Ok(true)
    }

    pub fn leases(&self) -> impl Iterator<Item = &Lease> {
        self.leases.values()
    }

    pub fn substrate(&self) -> &Model {
        &self.state
    }

    /// Direct access to the detailed model, for operators editing the substrate
    /// outside the protocol.
    pub fn substrate_mut(&mut self) -> &mut Model {
        &mut self.state
    }

    pub fn conservation_issues(&self) -> Vec<ConservationIssue> {
        check_conservation(&self.state, self.leases.values().flat_map(|l| &l.reservations))
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("# {} {}\n", self.id, self.domain);
        for l in self.leases.values() {
            out += &format!("# lease {} {} {}\n", l.ticket, l.slice, l.end.to_rfc3339());
        }
        out + &serialize_document(&self.state)
    }
}
