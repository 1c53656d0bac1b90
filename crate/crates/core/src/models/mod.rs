//! Typed readers over substrate, delegation, request and manifest graphs.
//!
//! Every model here is still a plain [`Model`](crate::graphstore::Model);
//! the structs are read-only projections rebuilt on demand.

pub mod delegation;
pub mod manifest;
pub mod request;
pub mod substrate;

pub use delegation::{build_delegation, delegated_units, delegation_view, parse_delegations, pool_iri, DelegationModel};
pub use manifest::{build_manifest, check_homeomorphic, ManifestError};
pub use request::{parse_request, parse_request_document, RequestError, RequestLink, RequestNode, SliceRequest};
pub use substrate::{parse_substrate, SubstrateError, SubstrateGraph, SubstrateProblem};
