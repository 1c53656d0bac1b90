//! Namespace IRIs and term constants.

use std::sync::OnceLock;

use crate::graphstore::{Iri, XSD};

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
pub const TOPO: &str = "http://geni-orca.renci.org/owl/topology.owl#";
pub const COMP: &str = "http://geni-orca.renci.org/owl/compute.owl#";
pub const ETH: &str = "http://geni-orca.renci.org/owl/ethernet.owl#";
pub const IP4: &str = "http://geni-orca.renci.org/owl/ip4.owl#";
pub const DTN: &str = "http://geni-orca.renci.org/owl/dtn.owl#";
pub const REQ: &str = "http://geni-orca.renci.org/owl/request.owl#";
pub const MAN: &str = "http://geni-orca.renci.org/owl/manifest.owl#";
pub const TIME: &str = "http://www.w3.org/2006/time#";

/// Standard prefix bindings used by every document the engine writes.
pub const PREFIXES: &[(&str, &str)] = &[
    ("comp", COMP),
    ("dtn", DTN),
    ("eth", ETH),
    ("ip4", IP4),
    ("man", MAN),
    ("owl", OWL),
    ("rdf", RDF),
    ("rdfs", RDFS),
    ("req", REQ),
    ("time", TIME),
    ("topo", TOPO),
    ("xsd", XSD),
];

fn mk(ns: &str, local: &str) -> Iri {
    Iri::from_static(&format!("{ns}{local}"))
}

pub fn rdf(local: &str) -> Iri {
    mk(RDF, local)
}
pub fn rdfs(local: &str) -> Iri {
    mk(RDFS, local)
}
pub fn owl(local: &str) -> Iri {
    mk(OWL, local)
}
pub fn topo(local: &str) -> Iri {
    mk(TOPO, local)
}
pub fn comp(local: &str) -> Iri {
    mk(COMP, local)
}
pub fn eth(local: &str) -> Iri {
    mk(ETH, local)
}
pub fn ip4(local: &str) -> Iri {
    mk(IP4, local)
}
pub fn dtn(local: &str) -> Iri {
    mk(DTN, local)
}
pub fn req(local: &str) -> Iri {
    mk(REQ, local)
}
pub fn man(local: &str) -> Iri {
    mk(MAN, local)
}
pub fn time(local: &str) -> Iri {
    mk(TIME, local)
}
pub fn xsd(local: &str) -> Iri {
    mk(XSD, local)
}

macro_rules! terms {
    ($( $field:ident = $ns:ident ( $local:literal ) ),* $(,)?) => {
        /// Pre-built IRIs for the vocabulary terms the engine reads and writes.
        #[derive(Debug)]
        pub struct Terms {
            $( pub $field: Iri, )*
        }

        fn build() -> Terms {
            Terms { $( $field: $ns($local), )* }
        }
    };
}

terms! {
    rdf_type = rdf("type"),
    sub_class_of = rdfs("subClassOf"),
    sub_property_of = rdfs("subPropertyOf"),
    domain = rdfs("domain"),
    range = rdfs("range"),
    rdfs_class = rdfs("Class"),
    rdfs_literal = rdfs("Literal"),
    rdf_property = rdf("Property"),
    owl_class = owl("Class"),
    owl_object_property = owl("ObjectProperty"),
    owl_datatype_property = owl("DatatypeProperty"),
    inverse_of = owl("inverseOf"),
    disjoint_with = owl("disjointWith"),

    network_element = topo("NetworkElement"),
    network_domain = topo("NetworkDomain"),
    device = topo("Device"),
    transport_element = topo("NetworkTransportElement"),
    interface = topo("Interface"),
    border_interface = topo("BorderInterface"),
    network_connection = topo("NetworkConnection"),
    broadcast_connection = topo("BroadcastConnection"),
    switch_matrix = topo("SwitchMatrix"),
    layer = topo("Layer"),
    label = topo("Label"),
    adaptation = topo("Adaptation"),

    has_interface = topo("hasInterface"),
    interface_of = topo("interfaceOf"),
    linked_to = topo("linkedTo"),
    connected_to = topo("connectedTo"),
    at_layer = topo("atLayer"),
    in_domain = topo("inDomain"),
    has_label = topo("hasLabel"),
    label_value = topo("labelValue"),
    has_switch_matrix = topo("hasSwitchMatrix"),
    has_adaptation = topo("hasAdaptation"),
    client_layer = topo("clientLayer"),
    server_layer = topo("serverLayer"),
    multiplex_capacity = topo("multiplexCapacity"),
    used_client_slots = topo("usedClientSlots"),
    label_translation = topo("labelTranslation"),
    available_bandwidth = topo("availableBandwidth"),
    used_bandwidth = topo("usedBandwidth"),
    used_label = topo("usedLabel"),
    available_units = topo("availableUnits"),
    used_units = topo("usedUnits"),
    reaches = topo("reaches"),
    bandwidth = topo("bandwidth"),

    ethernet = eth("EthernetNetworkElement"),
    vlan = eth("VLAN"),
    ip_layer = ip4("IPNetworkElement"),
    ip_address = ip4("IPAddress"),
    dwdm = dtn("DWDMNetworkElement"),
    lambda = dtn("Lambda"),

    compute_element = comp("ComputeElement"),
    server_cloud = comp("ServerCloud"),
    testbed = comp("Testbed"),
    classified_ce = comp("ClassifiedComputeElement"),
    bare_metal = comp("BareMetalCE"),
    vm = comp("VM"),
    offers_class = comp("offersClass"),

    reservation = req("Reservation"),
    element = req("element"),
    req_in_domain = req("inDomain"),
    has_term = req("hasTerm"),
    disk_image = req("diskImage"),
    post_boot_script = req("postBootScript"),

    interval = time("Interval"),
    has_beginning = time("hasBeginning"),
    has_duration_seconds = time("hasDurationSeconds"),

    provisioned_from = man("provisionedFrom"),
    path = man("Path"),
    hop = man("Hop"),
    link_hub = man("LinkHub"),
    hop_element = man("hopElement"),
    hop_index = man("hopIndex"),
    on_path = man("onPath"),
    next_hop = man("nextHop"),
    hosted_on = man("hostedOn"),
    management_address = man("managementAddress"),
    allocated_label = man("allocatedLabel"),

    xsd_integer = xsd("integer"),
    xsd_string = xsd("string"),
    xsd_boolean = xsd("boolean"),
    xsd_date_time = xsd("dateTime"),
}

/// Shared vocabulary constants.
pub fn terms() -> &'static Terms {
    static TERMS: OnceLock<Terms> = OnceLock::new();
    TERMS.get_or_init(build)
}
