//! Hierarchical port graphs: a top-level port graph whose nodes may carry
//! ladders to lower-level graphs, plus the flattening function that unfolds
//! the hierarchy into an ordinary port graph.
//!
//! Component graphs never share element ids, and edges never cross level
//! boundaries (each component owns its edges; an endpoint outside the
//! component is a dangling-connect violation).

use crate::graph::{EdgeEntry, EdgeId, IdGen, NodeEntry, NodeId, PortEntry, PortGraph, PortId};
use crate::record::Record;
use crate::signature::Signature;
use crate::validate::{Violation, ViolationKind};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// What a node's ladder points at: a concrete lower-level graph, or a graph
/// variable standing for an unknown one (rule graphs only).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum LadderValue {
    Concrete(AhpGraph),
    Var(String),
}

impl LadderValue {
    pub fn level(&self) -> u32 {
        match self {
            LadderValue::Concrete(g) => g.level(),
            LadderValue::Var(_) => 0,
        }
    }

    pub fn as_concrete(&self) -> Option<&AhpGraph> {
        match self {
            LadderValue::Concrete(g) => Some(g),
            LadderValue::Var(_) => None,
        }
    }
}

/// An attributed hierarchical port graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct AhpGraph {
    top: PortGraph,
    ladders: BTreeMap<NodeId, LadderValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    #[error("cannot flatten abstract ladder: node {node} has graph variable {var}")]
    AbstractLadder { node: NodeId, var: String },
    #[error("node {node}: ladder has no free port named {name}")]
    MissingInterfacePort { node: NodeId, name: String },
    #[error("node {node}: several free ladder ports named {name}")]
    AmbiguousInterfacePort { node: NodeId, name: String },
}

/// Per-kind element id sets of a graph and all its ladders.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct IdSets {
    pub nodes: BTreeSet<NodeId>,
    pub ports: BTreeSet<PortId>,
    pub edges: BTreeSet<EdgeId>,
}

impl IdSets {
    pub fn is_disjoint(&self, other: &IdSets) -> bool {
        self.nodes.is_disjoint(&other.nodes)
            && self.ports.is_disjoint(&other.ports)
            && self.edges.is_disjoint(&other.edges)
    }

    pub fn len(&self) -> usize {
        self.nodes.len() + self.ports.len() + self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Old id → new id maps produced by [`AhpGraph::fresh_copy`]. Ids are unique
/// across levels, so one flat map per kind covers the whole hierarchy.
#[derive(Debug, Clone, Default)]
pub struct CopyMaps {
    pub nodes: BTreeMap<NodeId, NodeId>,
    pub ports: BTreeMap<PortId, PortId>,
    pub edges: BTreeMap<EdgeId, EdgeId>,
}

impl AhpGraph {
    pub fn new() -> AhpGraph {
        AhpGraph::default()
    }

    pub fn flat(top: PortGraph) -> AhpGraph {
        AhpGraph {
            top,
            ladders: BTreeMap::new(),
        }
    }

    pub fn top(&self) -> &PortGraph {
        &self.top
    }

    pub fn top_mut(&mut self) -> &mut PortGraph {
        &mut self.top
    }

    pub fn ladder(&self, node: NodeId) -> Option<&LadderValue> {
        self.ladders.get(&node)
    }

    pub fn ladders(&self) -> impl Iterator<Item = (NodeId, &LadderValue)> {
        self.ladders.iter().map(|(id, v)| (*id, v))
    }

    pub fn has_ladders(&self) -> bool {
        !self.ladders.is_empty()
    }

    pub fn set_ladder(&mut self, node: NodeId, value: LadderValue) {
        self.ladders.insert(node, value);
    }

    /// Removes a top-level node along with its ports, incident edges and its
    /// entire ladder tree.
    pub fn remove_node_cascade(&mut self, node: NodeId) {
        self.ladders.remove(&node);
        self.top.remove_node_cascade(node);
    }

    /// Grafts an id-disjoint graph into this one at top level.
    pub(crate) fn merge_disjoint(&mut self, other: AhpGraph) {
        let AhpGraph { top, ladders } = other;
        for (id, n) in top.nodes() {
            self.top.insert_node_raw(id, n.clone());
        }
        for (id, p) in top.ports() {
            self.top.insert_port_raw(id, p.clone());
        }
        for (id, e) in top.edges() {
            self.top.insert_edge_raw(id, e.clone());
        }
        self.ladders.extend(ladders);
    }

    /// Inductive nesting depth: 0 for a flat graph, else one more than the
    /// deepest ladder.
    pub fn level(&self) -> u32 {
        self.ladders
            .values()
            .map(|v| 1 + v.level())
            .max()
            .unwrap_or(0)
    }

    /// True if any record anywhere uses value or attribute variables, or any
    /// ladder is a graph variable.
    pub fn has_variables(&self) -> bool {
        self.top.has_variables()
            || self.ladders.values().any(|v| match v {
                LadderValue::Var(_) => true,
                LadderValue::Concrete(g) => g.has_variables(),
            })
    }

    pub fn has_graph_vars(&self) -> bool {
        self.ladders.values().any(|v| match v {
            LadderValue::Var(_) => true,
            LadderValue::Concrete(g) => g.has_graph_vars(),
        })
    }

    /// Graph variables referenced anywhere in the hierarchy.
    pub fn graph_vars(&self, out: &mut BTreeSet<String>) {
        for v in self.ladders.values() {
            match v {
                LadderValue::Var(name) => {
                    out.insert(name.clone());
                }
                LadderValue::Concrete(g) => g.graph_vars(out),
            }
        }
    }

    /// Value and attribute variables referenced by records at any level.
    pub fn record_vars(&self, values: &mut BTreeSet<String>, attrs: &mut BTreeSet<String>) {
        for (_, r) in self.top.records() {
            r.collect_variables(values, attrs);
        }
        for v in self.ladders.values() {
            if let LadderValue::Concrete(g) = v {
                g.record_vars(values, attrs);
            }
        }
    }

    pub fn collect_ids(&self, into: &mut IdSets) {
        into.nodes.extend(self.top.node_ids());
        into.ports.extend(self.top.port_ids());
        into.edges.extend(self.top.edge_ids());
        for v in self.ladders.values() {
            if let LadderValue::Concrete(g) = v {
                g.collect_ids(into);
            }
        }
    }

    pub fn element_count(&self) -> usize {
        self.top.element_count()
            + self
                .ladders
                .values()
                .map(|v| match v {
                    LadderValue::Concrete(g) => g.element_count(),
                    LadderValue::Var(_) => 0,
                })
                .sum::<usize>()
    }

    /// Nodes without a ladder, at every depth — exactly the nodes a full
    /// flattening keeps.
    pub fn plain_node_count(&self) -> usize {
        let top_plain = self
            .top
            .node_ids()
            .filter(|n| !self.ladders.contains_key(n))
            .count();
        top_plain
            + self
                .ladders
                .values()
                .filter_map(|v| v.as_concrete())
                .map(|g| g.plain_node_count())
                .sum::<usize>()
    }

    /// Total number of edges at every depth.
    pub fn total_edge_count(&self) -> usize {
        self.top.edge_count()
            + self
                .ladders
                .values()
                .filter_map(|v| v.as_concrete())
                .map(|g| g.total_edge_count())
                .sum::<usize>()
    }

    pub fn max_element_id(&self) -> u64 {
        let mut max = self.top.max_element_id();
        for v in self.ladders.values() {
            if let LadderValue::Concrete(g) = v {
                max = max.max(g.max_element_id());
            }
        }
        max
    }

    // -- validation --------------------------------------------------------

    /// Validates every component port graph and the hierarchy invariants at
    /// every depth.
    pub fn validate(&self, sig: &Signature, allow_vars: bool) -> Vec<Violation> {
        let mut out = Vec::new();
        self.validate_at(sig, allow_vars, "top", &mut out);
        self.validate_disjointness(&mut out);
        out
    }

    fn validate_at(&self, sig: &Signature, allow_vars: bool, path: &str, out: &mut Vec<Violation>) {
        for v in self.top.validate(sig, allow_vars) {
            out.push(Violation::new(v.kind, format!("{path}: {}", v.detail)));
        }
        for (node, value) in &self.ladders {
            let here = format!("{path}/{node}");
            if self.top.node(*node).is_none() {
                out.push(Violation::new(
                    ViolationKind::LadderUnknownNode,
                    format!("{here}: ladder on node absent from this level"),
                ));
                continue;
            }
            match value {
                LadderValue::Var(var) => {
                    if !allow_vars {
                        out.push(Violation::new(
                            ViolationKind::VariableNotAllowed,
                            format!("{here}: graph variable {var} in a concrete graph"),
                        ));
                    }
                    match sig.graph_var_interface(var) {
                        None => out.push(Violation::new(
                            ViolationKind::GraphVarUnknown,
                            format!("{here}: graph variable {var} not declared"),
                        )),
                        Some(declared) => {
                            let node_names: Vec<String> = self
                                .top
                                .node_interface(*node)
                                .iter()
                                .map(|v| v.name_key())
                                .collect();
                            if declared != node_names.as_slice() {
                                out.push(Violation::new(
                                    ViolationKind::GraphVarInterfaceMismatch,
                                    format!(
                                        "{here}: {var} declares [{}] but node has [{}]",
                                        declared.join(", "),
                                        node_names.join(", ")
                                    ),
                                ));
                            }
                        }
                    }
                }
                LadderValue::Concrete(w) => {
                    self.validate_ladder_interface(*node, w, &here, out);
                    w.validate_at(sig, allow_vars, &here, out);
                }
            }
        }
    }

    /// The ladder graph must offer the same free ports as its node: same
    /// arity, same (unique) Names, and pairwise-equal port records.
    fn validate_ladder_interface(
        &self,
        node: NodeId,
        ladder: &AhpGraph,
        path: &str,
        out: &mut Vec<Violation>,
    ) {
        let node_ports = self.top.node_port_ids(node);
        let ladder_iface = ladder.top.interface();
        if node_ports.len() != ladder_iface.len() {
            out.push(Violation::new(
                ViolationKind::LadderArityMismatch,
                format!(
                    "{path}: node has {} ports but ladder has {} free ports",
                    node_ports.len(),
                    ladder_iface.len()
                ),
            ));
            return;
        }

        let mut node_by_name: BTreeMap<String, &Record> = BTreeMap::new();
        for p in node_ports {
            let record = &self.top.port(*p).unwrap().record;
            let name = self.top.port_name_key(*p);
            if node_by_name.insert(name.clone(), record).is_some() {
                out.push(Violation::new(
                    ViolationKind::DuplicatePortName,
                    format!("{path}: laddered node repeats port name {name}"),
                ));
                return;
            }
        }
        let mut ladder_by_name: BTreeMap<String, &Record> = BTreeMap::new();
        for p in &ladder_iface {
            let record = &ladder.top.port(*p).unwrap().record;
            let name = ladder.top.port_name_key(*p);
            if ladder_by_name.insert(name.clone(), record).is_some() {
                out.push(Violation::new(
                    ViolationKind::DuplicatePortName,
                    format!("{path}: ladder interface repeats port name {name}"),
                ));
                return;
            }
        }
        let node_names: BTreeSet<&String> = node_by_name.keys().collect();
        let ladder_names: BTreeSet<&String> = ladder_by_name.keys().collect();
        if node_names != ladder_names {
            out.push(Violation::new(
                ViolationKind::LadderNameMismatch,
                format!(
                    "{path}: node ports are [{}], ladder free ports are [{}]",
                    node_by_name.keys().cloned().collect::<Vec<_>>().join(", "),
                    ladder_by_name
                        .keys()
                        .cloned()
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            ));
            return;
        }
        for (name, node_record) in &node_by_name {
            let ladder_record = ladder_by_name[name];
            if *node_record != ladder_record {
                out.push(Violation::new(
                    ViolationKind::LadderRecordMismatch,
                    format!(
                        "{path}: port {name} is {node_record} on the node but {ladder_record} in the ladder"
                    ),
                ));
            }
        }
    }

    /// Component graphs at all depths must not share element ids. Two nodes
    /// whose ladders share ids is exactly the "ladder not injective" case.
    fn validate_disjointness(&self, out: &mut Vec<Violation>) {
        let mut components: Vec<(String, IdSets)> = Vec::new();
        self.collect_components("top", &mut components);
        for i in 0..components.len() {
            for j in i + 1..components.len() {
                if !components[i].1.is_disjoint(&components[j].1) {
                    let kind = if components[i].0 == "top" || components[j].0 == "top" {
                        ViolationKind::SharedElementIds
                    } else {
                        ViolationKind::LadderNotInjective
                    };
                    out.push(Violation::new(
                        kind,
                        format!(
                            "components {} and {} share element ids",
                            components[i].0, components[j].0
                        ),
                    ));
                }
            }
        }
    }

    fn collect_components(&self, path: &str, out: &mut Vec<(String, IdSets)>) {
        let mut ids = IdSets::default();
        ids.nodes.extend(self.top.node_ids());
        ids.ports.extend(self.top.port_ids());
        ids.edges.extend(self.top.edge_ids());
        out.push((path.to_string(), ids));
        for (node, v) in &self.ladders {
            if let LadderValue::Concrete(g) = v {
                g.collect_components(&format!("{path}/{node}"), out);
            }
        }
    }

    // -- flattening --------------------------------------------------------

    /// Unfolds the hierarchy into a flat port graph: every laddered node is
    /// replaced by the flattening of its ladder, and each edge formerly at
    /// one of the node's ports is redirected to the ladder's free port with
    /// the same Name. Element ids are preserved, so the result is id-stable.
    pub fn flatten(&self) -> Result<PortGraph, FlattenError> {
        self.flatten_with_redirect().map(|(g, _)| g)
    }

    /// Flattening plus the top-level redirect map (original port of a
    /// laddered node → its surviving stand-in).
    pub fn flatten_with_redirect(
        &self,
    ) -> Result<(PortGraph, BTreeMap<PortId, PortId>), FlattenError> {
        let mut out = PortGraph::new();
        let mut redirect: BTreeMap<PortId, PortId> = BTreeMap::new();

        for (node, entry) in self.top.nodes() {
            match self.ladders.get(&node) {
                Some(LadderValue::Var(var)) => {
                    return Err(FlattenError::AbstractLadder {
                        node,
                        var: var.clone(),
                    })
                }
                Some(LadderValue::Concrete(w)) => {
                    let (fw, _) = w.flatten_with_redirect()?;
                    let mut by_name: BTreeMap<String, Option<PortId>> = BTreeMap::new();
                    for p in fw.interface() {
                        by_name
                            .entry(fw.port_name_key(p))
                            .and_modify(|slot| *slot = None)
                            .or_insert(Some(p));
                    }
                    for p in entry.ports.iter() {
                        let name = self.top.port_name_key(*p);
                        let target = match by_name.get(&name) {
                            Some(Some(target)) => *target,
                            Some(None) => {
                                return Err(FlattenError::AmbiguousInterfacePort { node, name })
                            }
                            None => return Err(FlattenError::MissingInterfacePort { node, name }),
                        };
                        redirect.insert(*p, target);
                    }
                    for (id, n) in fw.nodes() {
                        out.insert_node_raw(id, n.clone());
                    }
                    for (id, p) in fw.ports() {
                        out.insert_port_raw(id, p.clone());
                    }
                    for (id, e) in fw.edges() {
                        out.insert_edge_raw(id, e.clone());
                    }
                }
                None => {
                    out.insert_node_raw(node, entry.clone());
                    for p in &entry.ports {
                        out.insert_port_raw(*p, self.top.port(*p).unwrap().clone());
                    }
                }
            }
        }

        for (id, e) in self.top.edges() {
            let a = redirect.get(&e.ends.0).copied().unwrap_or(e.ends.0);
            let b = redirect.get(&e.ends.1).copied().unwrap_or(e.ends.1);
            out.insert_edge_raw(
                id,
                EdgeEntry {
                    record: e.record.clone(),
                    ends: (a, b),
                },
            );
        }
        Ok((out, redirect))
    }

    // -- copying -----------------------------------------------------------

    /// A structure-preserving copy with fresh element ids at every level.
    pub fn fresh_copy(&self, ids: &mut IdGen) -> (AhpGraph, CopyMaps) {
        let mut maps = CopyMaps::default();
        let copy = self.fresh_copy_into(ids, &mut maps);
        (copy, maps)
    }

    // id allocation order matches the document form — per node: the node,
    // its ports, then its whole ladder subtree; component edges last — so a
    // parsed reference instantiation and a reparsed inline body get
    // identical ids
    fn fresh_copy_into(&self, ids: &mut IdGen, maps: &mut CopyMaps) -> AhpGraph {
        let mut top = PortGraph::new();
        let mut ladders = BTreeMap::new();
        for (node, entry) in self.top.nodes() {
            let new_node = ids.node();
            maps.nodes.insert(node, new_node);
            top.insert_node_raw(
                new_node,
                NodeEntry {
                    record: entry.record.clone(),
                    ports: Vec::new(),
                },
            );
            for p in &entry.ports {
                let new_port = ids.port();
                maps.ports.insert(*p, new_port);
                top.insert_port_raw(
                    new_port,
                    PortEntry {
                        record: self.top.port(*p).unwrap().record.clone(),
                        node: new_node,
                    },
                );
                top.node_ports_push(new_node, new_port);
            }
            if let Some(value) = self.ladders.get(&node) {
                let new_value = match value {
                    LadderValue::Var(v) => LadderValue::Var(v.clone()),
                    LadderValue::Concrete(g) => LadderValue::Concrete(g.fresh_copy_into(ids, maps)),
                };
                ladders.insert(new_node, new_value);
            }
        }
        for (edge, entry) in self.top.edges() {
            let new_edge = ids.edge();
            maps.edges.insert(edge, new_edge);
            top.insert_edge_raw(
                new_edge,
                EdgeEntry {
                    record: entry.record.clone(),
                    ends: (maps.ports[&entry.ends.0], maps.ports[&entry.ends.1]),
                },
            );
        }
        AhpGraph { top, ladders }
    }
}

impl From<PortGraph> for AhpGraph {
    fn from(top: PortGraph) -> Self {
        AhpGraph::flat(top)
    }
}
