//! Deterministic in-process simulation of the provisioning actors.
//!
//! A [`World`] holds one broker, one controller and one aggregate manager
//! per substrate. Every interaction between actors is delivered through a
//! single sequenced channel and recorded in the event log as
//! `seq <n> <actor> <event-kind> <subject> <outcome>`.

mod am;
mod broker;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};

pub use am::{AggregateManager, AmError, Lease, RedeemError};
pub use broker::{Broker, BrokerError, Ticket, DEFAULT_VALIDITY_DAYS};

use crate::embed::{bind_domains, plan_interdomain, AllocError, DomainPlan, EmbedError, EmbeddingPlan, DEFAULT_ATTEMPT_LIMIT};
use crate::graphstore::{serialize_document, Iri, Model};
use crate::models::{build_manifest, parse_request, SliceRequest};
use crate::models::manifest::valid_slice_id;
use crate::rules::{self, Rule, Violation};
use crate::vocab;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SliceState {
    Requested,
    Validated,
    Ticketed,
    Provisioned,
    Closed,
}

impl SliceState {
    /// The declared arcs: forward one step, or to Closed from anywhere.
    pub fn can_move_to(self, next: SliceState) -> bool {
        use SliceState::*;
        matches!(
            (self, next),
            (Requested, Validated) | (Validated, Ticketed) | (Ticketed, Provisioned) | (Requested | Validated | Ticketed | Provisioned, Closed)
        )
    }
}

impl fmt::Display for SliceState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SliceState::Requested => "Requested",
            SliceState::Validated => "Validated",
            SliceState::Ticketed => "Ticketed",
            SliceState::Provisioned => "Provisioned",
            SliceState::Closed => "Closed",
        })
    }
}

impl FromStr for SliceState {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "Requested" => SliceState::Requested,
            "Validated" => SliceState::Validated,
            "Ticketed" => SliceState::Ticketed,
            "Provisioned" => SliceState::Provisioned,
            "Closed" => SliceState::Closed,
            other => return Err(format!("unknown slice state {other}")),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SliceRecord {
    pub id: String,
    pub state: SliceState,
    pub history: Vec<SliceState>,
    pub request: Option<SliceRequest>,
    /// (domain, ticket id) pairs redeemed for this slice.
    pub leases: Vec<(Iri, String)>,
    pub manifest: Option<Model>,
    pub end: Option<DateTime<Utc>>,
}

impl SliceRecord {
    fn move_to(&mut self, next: SliceState) {
        assert!(self.state.can_move_to(next), "illegal slice transition {} -> {next}", self.state);
        self.state = next;
        self.history.push(next);
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SliceError {
    #[error("slice {slice}: validation failed: {}", describe_validation(.issues, .violations))]
    Validation { slice: String, issues: Vec<String>, violations: Vec<Violation> },
    #[error("slice {slice}: binding failed: {cause}")]
    Binding { slice: String, cause: EmbedError },
    #[error("slice {slice}: embedding failed: {cause}")]
    Embedding { slice: String, cause: String },
    #[error("slice {slice}: ticketing failed: {cause}")]
    Ticketing { slice: String, cause: BrokerError },
    #[error("slice {slice}: redeem at {domain} failed: {cause}")]
    Redeem { slice: String, domain: Iri, cause: RedeemError },
    #[error("slice id {0:?} is invalid or already in use")]
    BadSliceId(String),
}

fn describe_validation(issues: &[String], violations: &[Violation]) -> String {
    issues.iter().cloned().chain(violations.iter().map(|v| v.to_string())).collect::<Vec<_>>().join("; ")
}

impl SliceError {
    pub fn step(&self) -> &'static str {
        match self {
            SliceError::Validation { .. } | SliceError::BadSliceId(_) => "validation",
            SliceError::Binding { .. } => "binding",
            SliceError::Embedding { .. } => "embedding",
            SliceError::Ticketing { .. } => "ticketing",
            SliceError::Redeem { .. } => "redeem",
        }
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            SliceError::Validation { violations, .. } => violations,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorldError {
    #[error(transparent)]
    Substrate(#[from] AmError),
    #[error(transparent)]
    Broker(#[from] BrokerError),
    #[error("unknown slice {0}")]
    UnknownSlice(String),
    #[error("clock cannot move back from {now} to {to}")]
    ClockRegression { now: DateTime<Utc>, to: DateTime<Utc> },
    #[error(transparent)]
    Release(#[from] AllocError),
}

/// One broker, one controller and any number of aggregate managers sharing a
/// virtual clock and a sequenced event log.
#[derive(Debug, Clone)]
pub struct World {
    now: DateTime<Utc>,
    seq: u64,
    log: Vec<String>,
    broker: Broker,
    ams: BTreeMap<Iri, AggregateManager>,
    slices: BTreeMap<String, SliceRecord>,
    rules: Vec<Rule>,
    extensions: Vec<Model>,
    pub attempt_limit: usize,
}

impl Default for World {
    fn default() -> Self {
        Self::new()
    }
}

const CONTROLLER: &str = "controller";

impl World {
    /// A world whose clock reads 1970-01-01T00:00:00Z.
    pub fn new() -> Self {
        World {
            now: DateTime::<Utc>::UNIX_EPOCH,
            seq: 0,
            log: Vec::new(),
            broker: Broker::default(),
            ams: BTreeMap::new(),
            slices: BTreeMap::new(),
            rules: Vec::new(),
            extensions: Vec::new(),
            attempt_limit: DEFAULT_ATTEMPT_LIMIT,
        }
    }

    pub fn with_broker(broker: Broker) -> Self {
        World { broker, ..Self::new() }
    }

    /// Schema extensions merged into every document the world entails.
    pub fn add_schema_extension(&mut self, m: Model) {
        self.extensions.push(m);
    }

    pub fn add_rules(&mut self, rules: impl IntoIterator<Item = Rule>) {
        self.rules.extend(rules);
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.now
    }

    pub fn log(&self) -> &[String] {
        &self.log
    }

    pub fn log_text(&self) -> String {
        self.log.iter().map(|l| format!("{l}\n")).collect()
    }

    fn event(&mut self, actor: &str, kind: &str, subject: &str, outcome: &str) {
        self.seq += 1;
        let line = format!("seq {} {actor} {kind} {subject} {outcome}", self.seq);
        log::debug!("{line}");
        self.log.push(line);
    }

    /// Records an event on behalf of an outside party such as a script driver.
    pub fn note(&mut self, actor: &str, kind: &str, subject: &str, outcome: &str) {
        self.event(actor, kind, subject, outcome);
    }

    pub fn broker(&self) -> &Broker {
        &self.broker
    }

    pub fn am(&self, domain: &Iri) -> Option<&AggregateManager> {
        self.ams.get(domain)
    }

    pub fn am_mut(&mut self, domain: &Iri) -> Option<&mut AggregateManager> {
        self.ams.get_mut(domain)
    }

    pub fn ams(&self) -> impl Iterator<Item = &AggregateManager> {
        self.ams.values()
    }

    pub fn slice(&self, id: &str) -> Option<&SliceRecord> {
        self.slices.get(id)
    }

    pub fn slice_state(&self, id: &str) -> Option<SliceState> {
        self.slices.get(id).map(|s| s.state)
    }

    pub fn manifest(&self, id: &str) -> Option<&Model> {
        self.slices.get(id).and_then(|s| s.manifest.as_ref())
    }

    /// Creates an AM for a substrate document and delegates it to the broker.
    pub fn load_substrate(&mut self, doc: &Model) -> Result<Iri, WorldError> {
        let mut am = match AggregateManager::new(doc, &self.extensions) {
            Ok(am) => am,
            Err(e) => {
                self.event("world", "load-substrate", "-", "failed");
                return Err(e.into());
            }
        };
        let domain = am.domain.clone();
        let text = serialize_document(&am.delegate());
        self.event(&am.id.clone(), "delegate", domain.as_str(), "ok");
        match self.broker.register(&text, self.now) {
            Ok(_) => {
                self.event("broker", "register", domain.as_str(), "ok");
                self.ams.insert(domain.clone(), am);
                Ok(domain)
            }
            Err(e) => {
                self.event("broker", "register", domain.as_str(), "rejected");
                Err(e.into())
            }
        }
    }

    /// Re-delegates an existing AM's current substrate to the broker.
    pub fn redelegate(&mut self, domain: &Iri) -> Result<(), WorldError> {
        let am = self.ams.get_mut(domain).ok_or_else(|| BrokerError::UnknownDomain(domain.clone()))?;
        let id = am.id.clone();
        let text = serialize_document(&am.delegate());
        self.event(&id, "delegate", domain.as_str(), "ok");
        let r = self.broker.register(&text, self.now);
        self.event("broker", "register", domain.as_str(), if r.is_ok() { "ok" } else { "rejected" });
        r.map(|_| ()).map_err(Into::into)
    }

    /// Runs the full creation protocol. On failure every actor is returned to
    /// its prior state and the slice is recorded as Closed.
    pub fn create_slice(&mut self, id: &str, doc: &Model) -> Result<&Model, SliceError> {
        if !valid_slice_id(id) || self.slices.contains_key(id) {
            self.event(CONTROLLER, "submit", id, "rejected");
            return Err(SliceError::BadSliceId(id.to_string()));
        }
        self.slices.insert(
            id.to_string(),
            SliceRecord {
                id: id.to_string(),
                state: SliceState::Requested,
                history: vec![SliceState::Requested],
                request: None,
                leases: Vec::new(),
                manifest: None,
                end: None,
            },
        );
        self.event(CONTROLLER, "submit", id, "ok");
        match self.provision(id, doc) {
            Ok(()) => Ok(self.slices[id].manifest.as_ref().expect("provisioned slice has a manifest")),
            Err(e) => {
                self.unwind(id);
                let rec = self.slices.get_mut(id).unwrap();
                rec.move_to(SliceState::Closed);
                self.event(CONTROLLER, "close", id, &format!("failed:{}", e.step()));
                Err(e)
            }
        }
    }

    fn validate(&self, id: &str, doc: &Model) -> Result<SliceRequest, SliceError> {
        let fail = |issues: Vec<String>, violations: Vec<Violation>| SliceError::Validation {
            slice: id.to_string(),
            issues,
            violations,
        };
        let closed = vocab::closure_with_schema(doc, &self.extensions).map_err(|e| fail(vec![e.to_string()], vec![]))?;
        let issues: Vec<String> = vocab::validate_conformance(&closed).iter().map(|i| i.to_string()).collect();
        let violations = rules::validate_request(&closed, &self.rules).map_err(|e| fail(vec![e.to_string()], vec![]))?;
        if !issues.is_empty() || !violations.is_empty() {
            return Err(fail(issues, violations));
        }
        let mut req = parse_request(&closed).map_err(|e| fail(vec![e.to_string()], vec![]))?;
        req.source = doc.clone();
        if req.term.begin < self.now {
            return Err(fail(vec![format!("term begins at {} before the current time {}", req.term.begin, self.now)], vec![]));
        }
        Ok(req)
    }

    fn provision(&mut self, id: &str, doc: &Model) -> Result<(), SliceError> {
        let slice = id.to_string();
        let req = self.validate(id, doc);
        self.event(CONTROLLER, "validate", id, if req.is_ok() { "ok" } else { "failed" });
        let req = req?;
        let rec = self.slices.get_mut(id).unwrap();
        rec.move_to(SliceState::Validated);
        rec.request = Some(req.clone());
        rec.end = Some(req.term.end());

        let bound = bind_domains(&req, self.broker.view());
        self.event(CONTROLLER, "bind", id, if bound.is_ok() { "ok" } else { "failed" });
        bound.map_err(|cause| SliceError::Binding { slice: slice.clone(), cause })?;

        let inter = plan_interdomain(&req, self.broker.view(), self.attempt_limit);
        self.event(CONTROLLER, "embed", id, if inter.is_ok() { "ok" } else { "failed" });
        let inter = inter.map_err(|e| SliceError::Embedding { slice: slice.clone(), cause: e.to_string() })?;

        let tickets = self.broker.issue(id, &inter, req.term);
        self.event("broker", "ticket", id, if tickets.is_ok() { "ok" } else { "failed" });
        let tickets = tickets.map_err(|cause| SliceError::Ticketing { slice: slice.clone(), cause })?;
        self.slices.get_mut(id).unwrap().move_to(SliceState::Ticketed);

        let mut plans: Vec<DomainPlan> = Vec::new();
        for t in &tickets {
            let now = self.now;
            let limit = self.attempt_limit;
            let (am_id, r) = match self.ams.get_mut(&t.domain) {
                Some(am) => (am.id.clone(), am.redeem(t, now, limit)),
                None => (
                    "world".to_string(),
                    Err(RedeemError::WrongDomain { ticket: t.id.clone(), domain: t.domain.clone() }),
                ),
            };
            match r {
                Ok(p) => {
                    self.event(&am_id, "redeem", &t.id, "ok");
                    self.slices.get_mut(id).unwrap().leases.push((t.domain.clone(), t.id.clone()));
                    plans.push(p);
                }
                Err(cause) => {
                    self.event(&am_id, "redeem", &t.id, &format!("failed:{}", cause.kind()));
                    return Err(SliceError::Redeem { slice, domain: t.domain.clone(), cause });
                }
            }
        }

        let plan = EmbeddingPlan::from_parts(inter, plans);
        let manifest = build_manifest(&req, &plan, id)
            .map_err(|e| SliceError::Embedding { slice: slice.clone(), cause: e.to_string() })?;
        let rec = self.slices.get_mut(id).unwrap();
        rec.manifest = Some(manifest);
        rec.move_to(SliceState::Provisioned);
        self.event(CONTROLLER, "provision", id, "ok");
        Ok(())
    }

    /// Releases every lease and broker commitment held by a slice.
    fn unwind(&mut self, id: &str) {
        let leases = std::mem::take(&mut self.slices.get_mut(id).unwrap().leases);
        for (domain, ticket) in leases {
            if let Some(am) = self.ams.get_mut(&domain) {
                let id = am.id.clone();
                let r = am.release(&ticket);
                self.event(&id, "release", &ticket, if r.is_ok() { "ok" } else { "failed" });
            }
        }
        if let Ok(true) = self.broker.refund(id) {
            self.event("broker", "refund", id, "ok");
        }
    }

    pub fn delete_slice(&mut self, id: &str) -> Result<(), WorldError> {
        let state = self.slices.get(id).map(|s| s.state);
        match state {
            None => {
                self.event(CONTROLLER, "delete", id, "unknown");
                Err(WorldError::UnknownSlice(id.to_string()))
            }
            Some(SliceState::Closed) => {
                self.event(CONTROLLER, "delete", id, "already-closed");
                Ok(())
            }
            Some(_) => {
                self.event(CONTROLLER, "delete", id, "ok");
                self.unwind(id);
                self.slices.get_mut(id).unwrap().move_to(SliceState::Closed);
                self.event(CONTROLLER, "close", id, "deleted");
                Ok(())
            }
        }
    }

    /// Moves the clock forward and closes every slice whose lease has ended.
    /// Returns the expired slice ids.
    pub fn advance_time(&mut self, to: DateTime<Utc>) -> Result<Vec<String>, WorldError> {
        if to < self.now {
            return Err(WorldError::ClockRegression { now: self.now, to });
        }
        self.now = to;
        self.event("clock", "advance", &to.to_rfc3339(), "ok");
        let expired: Vec<String> = self
            .slices
            .values()
            .filter(|s| s.state != SliceState::Closed && s.end.is_some_and(|e| e <= to))
            .map(|s| s.id.clone())
            .collect();
        for id in &expired {
            self.unwind(id);
            self.slices.get_mut(id).unwrap().move_to(SliceState::Closed);
            self.event(CONTROLLER, "close", id, "expired");
        }
        Ok(expired)
    }

    /// Conservation problems at the broker and every AM, as readable lines.
    pub fn conservation_issues(&self) -> Vec<String> {
        let mut out: Vec<String> =
            self.broker.conservation_issues().into_iter().map(|i| format!("broker: {i:?}")).collect();
        for am in self.ams.values() {
            out.extend(am.conservation_issues().into_iter().map(|i| format!("{}: {i:?}", am.id)));
        }
        out
    }

    pub fn serialize_controller(&self) -> String {
        let mut out = String::from("# controller\n");
        for s in self.slices.values().filter(|s| s.state != SliceState::Closed) {
            out += &format!("# slice {} {}\n", s.id, s.state);
            if let Some(m) = &s.manifest {
                out += &serialize_document(m);
            }
        }
        out
    }

    /// Serialized state of every actor, in a fixed order.
    pub fn serialize_states(&self) -> String {
        let mut out = self.broker.serialize();
        for am in self.ams.values() {
            out += &am.serialize();
        }
        out + &self.serialize_controller()
    }
}
