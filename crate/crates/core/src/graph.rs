//! Flat attributed port graphs: nodes carry ports, edges connect ports, and
//! every element carries a record. Multigraph semantics — two ports may be
//! connected by any number of edges, including loops on a single port.
//!
//! Element ids are engine-assigned opaque numbers, distinct from the `Name`
//! attribute; names are labels and need not be unique. The node `Interface`
//! (its port-name list in attachment order) is derived from structure and is
//! never stored in records.

use crate::record::{AttrValue, Record, INTERFACE_ATTR, ORIENTED_ATTR};
use crate::signature::Signature;
use crate::validate::{Violation, ViolationKind};
use crate::value::BaseValue;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

macro_rules! id_type {
    ($name:ident, $prefix:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(NodeId, "n");
id_type!(PortId, "p");
id_type!(EdgeId, "e");

/// Allocates element ids from a single monotone counter, so ids are unique
/// across element kinds and across every component graph built from one
/// generator.
#[derive(Debug, Clone, Default)]
pub struct IdGen {
    next: u64,
}

impl IdGen {
    pub fn new() -> IdGen {
        IdGen { next: 0 }
    }

    /// A generator whose ids start strictly above `floor`.
    pub fn starting_after(floor: u64) -> IdGen {
        IdGen { next: floor + 1 }
    }

    fn fresh(&mut self) -> u64 {
        let id = self.next;
        self.next += 1;
        id
    }

    pub fn node(&mut self) -> NodeId {
        NodeId(self.fresh())
    }

    pub fn port(&mut self) -> PortId {
        PortId(self.fresh())
    }

    pub fn edge(&mut self) -> EdgeId {
        EdgeId(self.fresh())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NodeEntry {
    pub record: Record,
    /// Attachment order; determines the node interface.
    pub ports: Vec<PortId>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PortEntry {
    pub record: Record,
    pub node: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EdgeEntry {
    pub record: Record,
    /// Unordered pair unless the record marks the edge oriented, in which
    /// case `.0` is the source.
    pub ends: (PortId, PortId),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct PortGraph {
    nodes: BTreeMap<NodeId, NodeEntry>,
    ports: BTreeMap<PortId, PortEntry>,
    edges: BTreeMap<EdgeId, EdgeEntry>,
}

impl PortGraph {
    pub fn new() -> PortGraph {
        PortGraph::default()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.ports.is_empty() && self.edges.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn port_count(&self) -> usize {
        self.ports.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn element_count(&self) -> usize {
        self.nodes.len() + self.ports.len() + self.edges.len()
    }

    // -- construction ------------------------------------------------------

    pub fn add_node(&mut self, ids: &mut IdGen, record: Record) -> NodeId {
        let id = ids.node();
        self.nodes.insert(
            id,
            NodeEntry {
                record,
                ports: Vec::new(),
            },
        );
        id
    }

    /// Attaches a fresh port to `node`; panics if the node does not exist.
    pub fn add_port(&mut self, ids: &mut IdGen, node: NodeId, record: Record) -> PortId {
        let id = ids.port();
        self.ports.insert(id, PortEntry { record, node });
        self.nodes
            .get_mut(&node)
            .unwrap_or_else(|| panic!("add_port: no node {node}"))
            .ports
            .push(id);
        id
    }

    /// Connects two existing ports; panics if either port does not exist.
    pub fn add_edge(&mut self, ids: &mut IdGen, a: PortId, b: PortId, record: Record) -> EdgeId {
        assert!(self.ports.contains_key(&a), "add_edge: no port {a}");
        assert!(self.ports.contains_key(&b), "add_edge: no port {b}");
        let id = ids.edge();
        self.edges.insert(
            id,
            EdgeEntry {
                record,
                ends: (a, b),
            },
        );
        id
    }

    pub(crate) fn insert_node_raw(&mut self, id: NodeId, entry: NodeEntry) {
        self.nodes.insert(id, entry);
    }

    pub(crate) fn insert_port_raw(&mut self, id: PortId, entry: PortEntry) {
        self.ports.insert(id, entry);
    }

    pub(crate) fn insert_edge_raw(&mut self, id: EdgeId, entry: EdgeEntry) {
        self.edges.insert(id, entry);
    }

    pub(crate) fn node_ports_push(&mut self, node: NodeId, port: PortId) {
        if let Some(entry) = self.nodes.get_mut(&node) {
            entry.ports.push(port);
        }
    }

    pub fn remove_edge(&mut self, id: EdgeId) -> Option<EdgeEntry> {
        self.edges.remove(&id)
    }

    /// Removes a node together with its ports and all incident edges.
    pub fn remove_node_cascade(&mut self, id: NodeId) {
        let Some(entry) = self.nodes.remove(&id) else {
            return;
        };
        let ports: BTreeSet<PortId> = entry.ports.iter().copied().collect();
        for p in &ports {
            self.ports.remove(p);
        }
        self.edges
            .retain(|_, e| !ports.contains(&e.ends.0) && !ports.contains(&e.ends.1));
    }

    // -- access ------------------------------------------------------------

    pub fn node(&self, id: NodeId) -> Option<&NodeEntry> {
        self.nodes.get(&id)
    }

    pub fn port(&self, id: PortId) -> Option<&PortEntry> {
        self.ports.get(&id)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&EdgeEntry> {
        self.edges.get(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &NodeEntry)> {
        self.nodes.iter().map(|(id, e)| (*id, e))
    }

    pub fn ports(&self) -> impl Iterator<Item = (PortId, &PortEntry)> {
        self.ports.iter().map(|(id, e)| (*id, e))
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &EdgeEntry)> {
        self.edges.iter().map(|(id, e)| (*id, e))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn port_ids(&self) -> impl Iterator<Item = PortId> + '_ {
        self.ports.keys().copied()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.keys().copied()
    }

    pub fn node_record_mut(&mut self, id: NodeId) -> Option<&mut Record> {
        self.nodes.get_mut(&id).map(|e| &mut e.record)
    }

    pub fn port_record_mut(&mut self, id: PortId) -> Option<&mut Record> {
        self.ports.get_mut(&id).map(|e| &mut e.record)
    }

    pub fn edge_record_mut(&mut self, id: EdgeId) -> Option<&mut Record> {
        self.edges.get_mut(&id).map(|e| &mut e.record)
    }

    /// The node a port is attached to; panics on unknown port.
    pub fn attach(&self, port: PortId) -> NodeId {
        self.ports[&port].node
    }

    /// The pair of ports an edge connects; ordered when the edge is oriented.
    pub fn connect(&self, edge: EdgeId) -> (PortId, PortId) {
        self.edges[&edge].ends
    }

    pub fn node_port_ids(&self, node: NodeId) -> &[PortId] {
        self.nodes
            .get(&node)
            .map(|e| e.ports.as_slice())
            .unwrap_or(&[])
    }

    /// The derived Interface of a node: its port Names in attachment order.
    pub fn node_interface(&self, node: NodeId) -> Vec<&AttrValue> {
        self.node_port_ids(node)
            .iter()
            .filter_map(|p| self.ports.get(p).and_then(|e| e.record.name()))
            .collect()
    }

    pub fn edges_at(&self, port: PortId) -> Vec<EdgeId> {
        self.edges
            .iter()
            .filter(|(_, e)| e.ends.0 == port || e.ends.1 == port)
            .map(|(id, _)| *id)
            .collect()
    }

    /// Number of edge endpoints at the port; a loop counts twice.
    pub fn degree(&self, port: PortId) -> usize {
        self.edges
            .values()
            .map(|e| (e.ends.0 == port) as usize + (e.ends.1 == port) as usize)
            .sum()
    }

    /// The graph interface: its free ports (no incident edge), ordered
    /// lexicographically by port Name and then by id.
    pub fn interface(&self) -> Vec<PortId> {
        let mut bound: BTreeSet<PortId> = BTreeSet::new();
        for e in self.edges.values() {
            bound.insert(e.ends.0);
            bound.insert(e.ends.1);
        }
        let mut free: Vec<PortId> = self
            .ports
            .keys()
            .copied()
            .filter(|p| !bound.contains(p))
            .collect();
        free.sort_by(|a, b| {
            self.port_name_key(*a)
                .cmp(&self.port_name_key(*b))
                .then(a.cmp(b))
        });
        free
    }

    pub fn port_name_key(&self, port: PortId) -> String {
        self.ports
            .get(&port)
            .and_then(|e| e.record.name())
            .map(|n| n.name_key())
            .unwrap_or_default()
    }

    pub fn max_element_id(&self) -> u64 {
        let n = self.nodes.keys().map(|id| id.0).max().unwrap_or(0);
        let p = self.ports.keys().map(|id| id.0).max().unwrap_or(0);
        let e = self.edges.keys().map(|id| id.0).max().unwrap_or(0);
        n.max(p).max(e)
    }

    /// True if any record anywhere in the graph mentions a variable.
    pub fn has_variables(&self) -> bool {
        self.records().any(|(_, r)| r.has_variables())
    }

    pub(crate) fn records(&self) -> impl Iterator<Item = (String, &Record)> {
        let nodes = self
            .nodes
            .iter()
            .map(|(id, e)| (format!("node {id}"), &e.record));
        let ports = self
            .ports
            .iter()
            .map(|(id, e)| (format!("port {id}"), &e.record));
        let edges = self
            .edges
            .iter()
            .map(|(id, e)| (format!("edge {id}"), &e.record));
        nodes.chain(ports).chain(edges)
    }

    // -- validation --------------------------------------------------------

    /// Checks all structural and record invariants. When `allow_vars` is
    /// false the graph must be fully concrete (subject graphs); rule graphs
    /// validate with `allow_vars` set.
    pub fn validate(&self, sig: &Signature, allow_vars: bool) -> Vec<Violation> {
        let mut out = Vec::new();
        self.validate_records(sig, allow_vars, &mut out);
        self.validate_structure(&mut out);
        self.validate_schemas(&mut out);
        out
    }

    fn validate_records(&self, sig: &Signature, allow_vars: bool, out: &mut Vec<Violation>) {
        for (loc, record) in self.records() {
            if record.name().is_none() {
                out.push(Violation::new(
                    ViolationKind::MissingName,
                    format!("{loc} record {record} has no Name"),
                ));
            }
            if record.get(INTERFACE_ATTR).is_some() {
                out.push(Violation::new(
                    ViolationKind::StoredInterface,
                    format!("{loc} stores the derived Interface attribute"),
                ));
            }
            if let Some(v) = record.get(ORIENTED_ATTR) {
                if !matches!(v, AttrValue::Lit(BaseValue::Bool(_))) {
                    out.push(Violation::new(
                        ViolationKind::BadOriented,
                        format!("{loc} Oriented = {v}"),
                    ));
                }
            }
            let mut value_vars = BTreeSet::new();
            let mut attr_vars = BTreeSet::new();
            record.collect_variables(&mut value_vars, &mut attr_vars);
            if !allow_vars && (!value_vars.is_empty() || !attr_vars.is_empty()) {
                out.push(Violation::new(
                    ViolationKind::VariableNotAllowed,
                    format!("{loc} record {record} uses variables in a concrete graph"),
                ));
            } else {
                for v in &value_vars {
                    if !sig.is_value_var(v) {
                        out.push(Violation::new(
                            ViolationKind::UndeclaredVariable,
                            format!("{loc} references value variable {v}"),
                        ));
                    }
                }
                for v in &attr_vars {
                    if !sig.is_attr_var(v) {
                        out.push(Violation::new(
                            ViolationKind::UndeclaredVariable,
                            format!("{loc} references attribute variable {v}"),
                        ));
                    }
                }
            }
            for key in record.keys() {
                if let Some(name) = key.as_concrete() {
                    if !sig.allows_attr(name) {
                        out.push(Violation::new(
                            ViolationKind::UndeclaredAttribute,
                            format!("{loc} uses attribute {name}"),
                        ));
                    }
                }
            }
        }
    }

    fn validate_structure(&self, out: &mut Vec<Violation>) {
        for (id, e) in &self.ports {
            match self.nodes.get(&e.node) {
                Some(n) if n.ports.contains(id) => {}
                Some(_) => out.push(Violation::new(
                    ViolationKind::DanglingAttach,
                    format!("port {id} not listed by its node {}", e.node),
                )),
                None => out.push(Violation::new(
                    ViolationKind::DanglingAttach,
                    format!("port {id} attached to missing node {}", e.node),
                )),
            }
        }
        for (id, n) in &self.nodes {
            for p in &n.ports {
                match self.ports.get(p) {
                    Some(e) if e.node == *id => {}
                    _ => out.push(Violation::new(
                        ViolationKind::DanglingAttach,
                        format!("node {id} lists foreign or missing port {p}"),
                    )),
                }
            }
        }
        for (id, e) in &self.edges {
            for end in [e.ends.0, e.ends.1] {
                if !self.ports.contains_key(&end) {
                    out.push(Violation::new(
                        ViolationKind::DanglingConnect,
                        format!("edge {id} endpoint {end} missing"),
                    ));
                }
            }
        }
    }

    pub(crate) fn validate_schemas_only(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        self.validate_schemas(&mut out);
        out
    }

    /// Name determines schema: equal concrete Names imply equal key sets,
    /// and on nodes additionally equal derived Interfaces.
    fn validate_schemas(&self, out: &mut Vec<Violation>) {
        let mut schema_by_name: BTreeMap<BaseValue, (String, Vec<String>)> = BTreeMap::new();
        for (loc, record) in self.records() {
            let Some(name) = record.concrete_name() else {
                continue;
            };
            let keys: Vec<String> = record.keys().map(|k| k.to_string()).collect();
            match schema_by_name.get(name) {
                None => {
                    schema_by_name.insert(name.clone(), (loc, keys));
                }
                Some((first_loc, first_keys)) => {
                    if first_keys != &keys {
                        out.push(Violation::new(
                            ViolationKind::NameSchemaMismatch,
                            format!(
                                "{loc} Name {name} has attributes {{{}}} but {first_loc} has {{{}}}",
                                keys.join(", "),
                                first_keys.join(", ")
                            ),
                        ));
                    }
                }
            }
        }

        let mut iface_by_name: BTreeMap<BaseValue, (NodeId, Vec<String>)> = BTreeMap::new();
        for (id, n) in &self.nodes {
            let Some(name) = n.record.concrete_name() else {
                continue;
            };
            let iface: Vec<String> = self
                .node_interface(*id)
                .iter()
                .map(|v| v.name_key())
                .collect();
            match iface_by_name.get(name) {
                None => {
                    iface_by_name.insert(name.clone(), (*id, iface));
                }
                Some((first, first_iface)) => {
                    if first_iface != &iface {
                        out.push(Violation::new(
                            ViolationKind::InterfaceMismatch,
                            format!(
                                "nodes {first} and {id} share Name {name} but have interfaces [{}] and [{}]",
                                first_iface.join(", "),
                                iface.join(", ")
                            ),
                        ));
                    }
                }
            }
        }
    }
}
