#![allow(dead_code)]

pub mod gen;
pub mod oracles;
pub mod world;

use std::collections::BTreeMap;
use std::path::PathBuf;

use niaas::graphstore::{parse_document, Iri, Model};
use niaas::models::{build_delegation, delegation_view, parse_request_document, parse_substrate, SliceRequest};
use niaas::vocab;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture(name: &str) -> Model {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap();
    parse_document(&text).unwrap()
}

pub fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

/// Detailed entailed substrates keyed by domain, plus the broker view.
pub struct Testbed {
    pub substrates: BTreeMap<Iri, Model>,
    pub view: Model,
}

pub fn testbed(docs: &[Model]) -> Testbed {
    let mut substrates = BTreeMap::new();
    let mut delegations = Vec::new();
    for d in docs {
        let closed = vocab::closure_with_schema(d, []).unwrap();
        let g = parse_substrate(&closed).unwrap();
        delegations.push(build_delegation(&g));
        substrates.insert(g.domain.clone(), closed);
    }
    let view = delegation_view(&delegations).unwrap();
    Testbed { substrates, view }
}

pub fn testbed_from(names: &[&str]) -> Testbed {
    testbed(&names.iter().map(|n| fixture(n)).collect::<Vec<_>>())
}

pub fn request(name: &str) -> SliceRequest {
    parse_request_document(&fixture(name), []).unwrap()
}
