//! Rewrite rules and the rewrite step: replace the image of the left-hand
//! side by a fresh instantiation of the right-hand side and rewire external
//! edges as the arrow node's typed ports dictate.
//!
//! Arrow ports come in three kinds. A bridge says its single left port
//! survives as one or more right ports: every external edge at the image is
//! re-attached to each corresponding instantiated right port. A black hole
//! deletes all external edges at its left ports. A wire splices the outside
//! neighborhoods of its two left ports together: one new edge per pair of
//! surviving far endpoints, where chains of wires connected by boundary
//! edges splice through transitively.

use crate::expr::Expr;
use crate::graph::{EdgeEntry, EdgeId, IdGen, NodeId, PortGraph, PortId};
use crate::hierarchy::{AhpGraph, CopyMaps, FlattenError, IdSets, LadderValue};
use crate::matching::{
    eval_condition, verify_match, Bindings, LadderMap, Match, MatchError, Morphism, SubstError,
};
use crate::record::Record;
use crate::signature::Signature;
use crate::validate::{Violation, ViolationKind};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ArrowKind {
    Bridge,
    Wire,
    Blackhole,
}

/// One typed port of the arrow node; `l_ports` and `r_ports` are the ports
/// its edges reach in the top level of the left and right sides.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ArrowPort {
    pub kind: ArrowKind,
    pub l_ports: Vec<PortId>,
    pub r_ports: Vec<PortId>,
}

impl ArrowPort {
    pub fn bridge(l: PortId, r: impl IntoIterator<Item = PortId>) -> ArrowPort {
        ArrowPort {
            kind: ArrowKind::Bridge,
            l_ports: vec![l],
            r_ports: r.into_iter().collect(),
        }
    }

    pub fn wire(a: PortId, b: PortId) -> ArrowPort {
        ArrowPort {
            kind: ArrowKind::Wire,
            l_ports: vec![a, b],
            r_ports: Vec::new(),
        }
    }

    pub fn blackhole(l: impl IntoIterator<Item = PortId>) -> ArrowPort {
        ArrowPort {
            kind: ArrowKind::Blackhole,
            l_ports: l.into_iter().collect(),
            r_ports: Vec::new(),
        }
    }
}

/// An AHP rewrite rule: left side, right side, arrow ports and an optional
/// condition (absent means true).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub lhs: AhpGraph,
    pub rhs: AhpGraph,
    pub arrow: Vec<ArrowPort>,
    pub condition: Option<Expr>,
}

impl Rule {
    /// The identity rule on a graph: both sides are fresh copies and every
    /// top-level port is bridged to its twin.
    pub fn identity(name: impl Into<String>, g: &AhpGraph, ids: &mut IdGen) -> Rule {
        let (lhs, lmap) = g.fresh_copy(ids);
        let (rhs, rmap) = g.fresh_copy(ids);
        let mut arrow = Vec::new();
        for p in g.top().port_ids() {
            arrow.push(ArrowPort::bridge(lmap.ports[&p], [rmap.ports[&p]]));
        }
        Rule {
            name: name.into(),
            lhs,
            rhs,
            arrow,
            condition: None,
        }
    }

    /// Every left-hand-side port touched by some arrow port.
    pub fn arrow_connected_lhs_ports(&self) -> BTreeSet<PortId> {
        self.arrow
            .iter()
            .flat_map(|a| a.l_ports.iter().copied())
            .collect()
    }

    /// True when the arrow node maps each left port to at most one right
    /// port: every bridge has exactly one right edge and no wires exist.
    pub fn is_simple(&self) -> bool {
        self.arrow.iter().all(|a| match a.kind {
            ArrowKind::Bridge => a.r_ports.len() == 1,
            ArrowKind::Wire => false,
            ArrowKind::Blackhole => true,
        })
    }

    pub fn max_element_id(&self) -> u64 {
        self.lhs.max_element_id().max(self.rhs.max_element_id())
    }

    /// Checks rule well-formedness: both sides validate as rule graphs, the
    /// sides are id-disjoint, the right side invents no variables, arrow
    /// arities hold, and arrow edges reach only top-level ports.
    pub fn validate(&self, sig: &Signature) -> Vec<Violation> {
        let mut out = Vec::new();
        for v in self.lhs.validate(sig, true) {
            out.push(Violation::new(v.kind, format!("lhs {}", v.detail)));
        }
        for v in self.rhs.validate(sig, true) {
            out.push(Violation::new(v.kind, format!("rhs {}", v.detail)));
        }

        let mut lhs_ids = IdSets::default();
        let mut rhs_ids = IdSets::default();
        self.lhs.collect_ids(&mut lhs_ids);
        self.rhs.collect_ids(&mut rhs_ids);
        let disjoint = lhs_ids.is_disjoint(&rhs_ids);
        if !disjoint {
            out.push(Violation::new(
                ViolationKind::RuleIdOverlap,
                format!("rule {}: lhs and rhs share element ids", self.name),
            ));
        }

        // no free invention of variables on the right
        let mut l_values = BTreeSet::new();
        let mut l_attrs = BTreeSet::new();
        let mut l_graphs = BTreeSet::new();
        self.lhs.record_vars(&mut l_values, &mut l_attrs);
        self.lhs.graph_vars(&mut l_graphs);
        let mut r_values = BTreeSet::new();
        let mut r_attrs = BTreeSet::new();
        let mut r_graphs = BTreeSet::new();
        self.rhs.record_vars(&mut r_values, &mut r_attrs);
        self.rhs.graph_vars(&mut r_graphs);
        for v in r_values.difference(&l_values) {
            out.push(Violation::new(
                ViolationKind::RhsFreshVariable,
                format!("value variable {v} appears only in rhs"),
            ));
        }
        for v in r_attrs.difference(&l_attrs) {
            out.push(Violation::new(
                ViolationKind::RhsFreshVariable,
                format!("attribute variable {v} appears only in rhs"),
            ));
        }
        for v in r_graphs.difference(&l_graphs) {
            out.push(Violation::new(
                ViolationKind::RhsFreshVariable,
                format!("graph variable {v} appears only in rhs"),
            ));
        }
        if let Some(cond) = &self.condition {
            let mut cond_vars = BTreeSet::new();
            cond.variables(&mut cond_vars);
            for v in cond_vars.difference(&l_values) {
                out.push(Violation::new(
                    ViolationKind::ConditionUnboundVariable,
                    format!("condition uses {v}, which the lhs never binds"),
                ));
            }
        }

        // arrow ports: arity, reference resolution, level discipline
        let lhs_top_ports: BTreeSet<PortId> = self.lhs.top().port_ids().collect();
        let rhs_top_ports: BTreeSet<PortId> = self.rhs.top().port_ids().collect();
        let mut seen_l = BTreeSet::new();
        for (i, a) in self.arrow.iter().enumerate() {
            let arity_ok = match a.kind {
                ArrowKind::Bridge => a.l_ports.len() == 1 && !a.r_ports.is_empty(),
                ArrowKind::Wire => a.l_ports.len() == 2 && a.r_ports.is_empty(),
                ArrowKind::Blackhole => !a.l_ports.is_empty() && a.r_ports.is_empty(),
            };
            if !arity_ok {
                out.push(Violation::new(
                    ViolationKind::ArrowArity,
                    format!(
                        "arrow port {i} ({:?}) has {} lhs edges and {} rhs edges",
                        a.kind,
                        a.l_ports.len(),
                        a.r_ports.len()
                    ),
                ));
            }
            for p in &a.l_ports {
                if !lhs_top_ports.contains(p) {
                    let kind = if lhs_ids.ports.contains(p) {
                        ViolationKind::ArrowCrossLevel
                    } else {
                        ViolationKind::ArrowUnknownPort
                    };
                    out.push(Violation::new(
                        kind,
                        format!("arrow port {i} references lhs port {p}"),
                    ));
                }
                if !seen_l.insert(*p) {
                    out.push(Violation::new(
                        ViolationKind::ArrowPortReused,
                        format!("lhs port {p} has several arrow connections"),
                    ));
                }
            }
            for p in &a.r_ports {
                if !rhs_top_ports.contains(p) {
                    let kind = if rhs_ids.ports.contains(p) {
                        ViolationKind::ArrowCrossLevel
                    } else {
                        ViolationKind::ArrowUnknownPort
                    };
                    out.push(Violation::new(
                        kind,
                        format!("arrow port {i} references rhs port {p}"),
                    ));
                }
            }
        }

        // the rule viewed as one graph: Name schema and interfaces must agree
        // across the two sides
        if disjoint {
            let mut merged = PortGraph::new();
            for side in [self.lhs.top(), self.rhs.top()] {
                for (id, n) in side.nodes() {
                    merged.insert_node_raw(id, n.clone());
                }
                for (id, p) in side.ports() {
                    merged.insert_port_raw(id, p.clone());
                }
                for (id, e) in side.edges() {
                    merged.insert_edge_raw(id, e.clone());
                }
            }
            for v in merged.validate_schemas_only() {
                out.push(Violation::new(
                    v.kind,
                    format!("across rule sides: {}", v.detail),
                ));
            }
        }
        out
    }

    /// Flattens both sides and redirects arrow edges through the same
    /// correspondence flattening applies to ordinary edges: an arrow edge at
    /// a port of a laddered node follows that port's stand-in.
    pub fn flatten(&self) -> Result<Rule, FlattenError> {
        let (flat_lhs, lhs_redirect) = self.lhs.flatten_with_redirect()?;
        let (flat_rhs, rhs_redirect) = self.rhs.flatten_with_redirect()?;
        let arrow = self
            .arrow
            .iter()
            .map(|a| ArrowPort {
                kind: a.kind,
                l_ports: a
                    .l_ports
                    .iter()
                    .map(|p| lhs_redirect.get(p).copied().unwrap_or(*p))
                    .collect(),
                r_ports: a
                    .r_ports
                    .iter()
                    .map(|p| rhs_redirect.get(p).copied().unwrap_or(*p))
                    .collect(),
            })
            .collect();
        Ok(Rule {
            name: self.name.clone(),
            lhs: AhpGraph::flat(flat_lhs),
            rhs: AhpGraph::flat(flat_rhs),
            arrow,
            condition: self.condition.clone(),
        })
    }
}

/// A concrete instantiation of a rule's right-hand side: variables replaced
/// by their bindings, expressions evaluated, graph-variable ladders replaced
/// by fresh copies of the captured graphs, and every element given a fresh
/// id. Returns the instantiated graph and the old → new id maps.
pub fn instantiate_rhs(
    rhs: &AhpGraph,
    bindings: &Bindings,
    ids: &mut IdGen,
) -> Result<(AhpGraph, CopyMaps), SubstError> {
    let mut maps = CopyMaps::default();
    let graph = instantiate_into(rhs, bindings, ids, &mut maps)?;
    Ok((graph, maps))
}

fn instantiate_into(
    rhs: &AhpGraph,
    bindings: &Bindings,
    ids: &mut IdGen,
    maps: &mut CopyMaps,
) -> Result<AhpGraph, SubstError> {
    let mut out = AhpGraph::new();
    for (node, entry) in rhs.top().nodes() {
        let record = bindings.substitute_record(&entry.record)?;
        let new_node = out.top_mut().add_node(ids, record);
        maps.nodes.insert(node, new_node);
        for p in &entry.ports {
            let record = bindings.substitute_record(&rhs.top().port(*p).unwrap().record)?;
            let new_port = out.top_mut().add_port(ids, new_node, record);
            maps.ports.insert(*p, new_port);
        }
    }
    for (edge, entry) in rhs.top().edges() {
        let record = bindings.substitute_record(&entry.record)?;
        let new_edge = out.top_mut().add_edge(
            ids,
            maps.ports[&entry.ends.0],
            maps.ports[&entry.ends.1],
            record,
        );
        maps.edges.insert(edge, new_edge);
    }
    for (node, value) in rhs.ladders() {
        let instantiated = match value {
            LadderValue::Concrete(w) => instantiate_into(w, bindings, ids, maps)?,
            LadderValue::Var(var) => {
                let bound = bindings
                    .graphs
                    .get(var)
                    .ok_or_else(|| SubstError::UnboundGraph(var.clone()))?;
                let (copy, _) = bound.fresh_copy(ids);
                copy
            }
        };
        out.set_ladder(maps.nodes[&node], LadderValue::Concrete(instantiated));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("invalid match: {0}")]
    InvalidMatch(#[from] MatchError),
    #[error("right-hand side instantiation failed: {0}")]
    Instantiate(#[from] SubstError),
}

/// How one boundary edge was handled, plus the edges wiring created.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rewiring {
    /// A surviving boundary edge replaced by bridge copies.
    Bridged {
        old_edge: EdgeId,
        new_edges: Vec<EdgeId>,
    },
    /// A boundary edge deleted outright (black hole, or consumed by a wire).
    Dropped { old_edge: EdgeId },
    /// An edge created by wire splicing.
    WireEdge {
        new_edge: EdgeId,
        ends: (PortId, PortId),
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Applied {
    pub result: AhpGraph,
    pub rewirings: Vec<Rewiring>,
}

/// One recorded rewrite step of a derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: String,
    pub match_used: Match,
    pub before: AhpGraph,
    pub after: AhpGraph,
    pub rewirings: Vec<Rewiring>,
}

/// Where a boundary-edge endpoint goes after the step.
#[derive(Debug, Clone)]
enum EndSpec {
    /// Surviving ports: the endpoint itself when external, or the
    /// instantiated right ports of a bridge.
    Terminals(Vec<PortId>),
    /// An endpoint at a wire port: (wire index, side).
    Junction(usize, u8),
    /// A black-hole endpoint; the edge dies.
    Empty,
}

struct Segment {
    ends: [EndSpec; 2],
    origin: EdgeId,
}

/// Applies `rule` at `m`. The match is re-verified against the host first,
/// so a stale match errors instead of corrupting the graph.
pub fn apply(rule: &Rule, host: &AhpGraph, m: &Match) -> Result<Applied, ApplyError> {
    verify_match(rule, host, m)?;

    let mut ids = IdGen::starting_after(host.max_element_id().max(rule.max_element_id()));
    let (rhs_inst, rhs_maps) = instantiate_rhs(&rule.rhs, &m.morphism.bindings, &mut ids)?;

    let morphism = &m.morphism;
    let image_ports: BTreeSet<PortId> = morphism.ports.values().copied().collect();
    let image_edges: BTreeSet<EdgeId> = morphism.edges.values().copied().collect();

    // classify image ports by their arrow connection
    let mut actions: BTreeMap<PortId, EndSpec> = BTreeMap::new();
    let mut wire_count = 0usize;
    for a in &rule.arrow {
        match a.kind {
            ArrowKind::Bridge => {
                let hp = morphism.ports[&a.l_ports[0]];
                let targets: Vec<PortId> = a.r_ports.iter().map(|r| rhs_maps.ports[r]).collect();
                actions.insert(hp, EndSpec::Terminals(targets));
            }
            ArrowKind::Blackhole => {
                for l in &a.l_ports {
                    actions.insert(morphism.ports[l], EndSpec::Empty);
                }
            }
            ArrowKind::Wire => {
                let w = wire_count;
                wire_count += 1;
                actions.insert(morphism.ports[&a.l_ports[0]], EndSpec::Junction(w, 0));
                actions.insert(morphism.ports[&a.l_ports[1]], EndSpec::Junction(w, 1));
            }
        }
    }

    let end_spec = |p: PortId| -> EndSpec {
        if image_ports.contains(&p) {
            // non-arrow image ports have no boundary edges (dangling check)
            actions.get(&p).cloned().unwrap_or(EndSpec::Empty)
        } else {
            EndSpec::Terminals(vec![p])
        }
    };

    let mut result = host.clone();
    let mut rewirings = Vec::new();
    let mut segments: Vec<Segment> = Vec::new();

    let boundary: Vec<EdgeId> = host
        .top()
        .edges()
        .filter(|(id, e)| {
            !image_edges.contains(id)
                && (image_ports.contains(&e.ends.0) || image_ports.contains(&e.ends.1))
        })
        .map(|(id, _)| id)
        .collect();

    for edge in &boundary {
        let entry = host.top().edge(*edge).unwrap().clone();
        let (sa, sb) = (end_spec(entry.ends.0), end_spec(entry.ends.1));
        let junction = matches!(sa, EndSpec::Junction(..)) || matches!(sb, EndSpec::Junction(..));
        if junction {
            segments.push(Segment {
                ends: [sa, sb],
                origin: *edge,
            });
            rewirings.push(Rewiring::Dropped { old_edge: *edge });
        } else {
            let ta = match &sa {
                EndSpec::Terminals(ts) => ts.clone(),
                _ => Vec::new(),
            };
            let tb = match &sb {
                EndSpec::Terminals(ts) => ts.clone(),
                _ => Vec::new(),
            };
            let mut new_edges = Vec::new();
            for x in &ta {
                for y in &tb {
                    let id = ids.edge();
                    result.top_mut().insert_edge_raw(
                        id,
                        EdgeEntry {
                            record: entry.record.clone(),
                            ends: (*x, *y),
                        },
                    );
                    new_edges.push(id);
                }
            }
            if new_edges.is_empty() {
                rewirings.push(Rewiring::Dropped { old_edge: *edge });
            } else {
                rewirings.push(Rewiring::Bridged {
                    old_edge: *edge,
                    new_edges,
                });
            }
        }
        result.top_mut().remove_edge(*edge);
    }

    // wire splicing: every maximal terminal-to-terminal chain through the
    // junction graph produces one edge per pair of far endpoints
    for (starts, ends) in wire_paths(&segments) {
        for x in &starts {
            for y in &ends {
                let id = ids.edge();
                result.top_mut().insert_edge_raw(
                    id,
                    EdgeEntry {
                        record: Record::new("wire"),
                        ends: (*x, *y),
                    },
                );
                rewirings.push(Rewiring::WireEdge {
                    new_edge: id,
                    ends: (*x, *y),
                });
            }
        }
    }

    // delete matched edges, then the image nodes with their ports and
    // ladder trees; finally graft the instantiated right-hand side
    for e in &image_edges {
        result.top_mut().remove_edge(*e);
    }
    for n in morphism.nodes.values() {
        result.remove_node_cascade(*n);
    }
    result.merge_disjoint(rhs_inst);

    Ok(Applied { result, rewirings })
}

/// Enumerates undirected terminal-to-terminal chains through wire junctions.
/// Each chain is a sequence of consumed boundary edges joined by wire
/// crossings; a chain never crosses the same wire twice. Returns the two
/// terminal sets of each chain, deduplicated by the chain's edge signature.
fn wire_paths(segments: &[Segment]) -> Vec<(Vec<PortId>, Vec<PortId>)> {
    let mut seen: BTreeSet<Vec<EdgeId>> = BTreeSet::new();
    let mut out = Vec::new();

    for (idx, seg) in segments.iter().enumerate() {
        for start_end in 0..2 {
            let EndSpec::Terminals(starts) = &seg.ends[start_end] else {
                continue;
            };
            if starts.is_empty() {
                continue;
            }
            let mut trail = vec![seg.origin];
            let mut visited = BTreeSet::new();
            walk(
                segments,
                idx,
                1 - start_end,
                starts,
                &mut trail,
                &mut visited,
                &mut seen,
                &mut out,
            );
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn walk(
    segments: &[Segment],
    seg_idx: usize,
    exit_end: usize,
    starts: &[PortId],
    trail: &mut Vec<EdgeId>,
    visited: &mut BTreeSet<usize>,
    seen: &mut BTreeSet<Vec<EdgeId>>,
    out: &mut Vec<(Vec<PortId>, Vec<PortId>)>,
) {
    match &segments[seg_idx].ends[exit_end] {
        EndSpec::Empty => {}
        EndSpec::Terminals(ends) => {
            if trail.len() < 2 || ends.is_empty() {
                // single-segment chains are handled as plain boundary edges
                return;
            }
            let reversed: Vec<EdgeId> = trail.iter().rev().copied().collect();
            let canonical = std::cmp::min(trail.clone(), reversed);
            if seen.insert(canonical) {
                out.push((starts.to_vec(), ends.clone()));
            }
        }
        EndSpec::Junction(wire, side) => {
            if !visited.insert(*wire) {
                return;
            }
            let far = (*wire, 1 - *side);
            for (next_idx, next) in segments.iter().enumerate() {
                for enter_end in 0..2 {
                    if let EndSpec::Junction(w, s) = &next.ends[enter_end] {
                        if (*w, *s as usize) == (far.0, far.1 as usize) {
                            trail.push(next.origin);
                            walk(
                                segments,
                                next_idx,
                                1 - enter_end,
                                starts,
                                trail,
                                visited,
                                seen,
                                out,
                            );
                            trail.pop();
                        }
                    }
                }
            }
            visited.remove(wire);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommuteError {
    #[error(transparent)]
    Flatten(#[from] FlattenError),
    #[error(transparent)]
    Apply(#[from] ApplyError),
}

/// Checks that flattening commutes with this rewrite step: flattening the
/// host and rewriting with the flattened rule at the match induced by
/// flattening (id-stable) yields a graph isomorphic to the flattening of the
/// hierarchical result.
pub fn check_flatten_commutes(
    rule: &Rule,
    host: &AhpGraph,
    m: &Match,
) -> Result<bool, CommuteError> {
    let applied = apply(rule, host, m)?;
    let flat_host = AhpGraph::flat(host.flatten()?);
    let flat_rule = rule.flatten()?;
    let flat_result = AhpGraph::flat(applied.result.flatten()?);

    // induced match: flattening preserves ids, so the union of the per-level
    // maps restricted to surviving elements is the flat morphism
    let mut nodes = BTreeMap::new();
    let mut ports = BTreeMap::new();
    let mut edges = BTreeMap::new();
    collect_flat_maps(&m.morphism, &mut nodes, &mut ports, &mut edges);
    nodes.retain(|k, _| flat_rule.lhs.top().node(*k).is_some());
    ports.retain(|k, _| flat_rule.lhs.top().port(*k).is_some());

    let morphism = Morphism {
        nodes,
        ports,
        edges,
        ladders: BTreeMap::new(),
        bindings: m.morphism.bindings.clone(),
    };
    let mut image = IdSets::default();
    image.nodes.extend(morphism.nodes.values().copied());
    image.ports.extend(morphism.ports.values().copied());
    image.edges.extend(morphism.edges.values().copied());
    let flat_match = Match { morphism, image };

    if verify_match(&flat_rule, &flat_host, &flat_match).is_err() {
        return Ok(false);
    }
    let flat_applied = apply(&flat_rule, &flat_host, &flat_match)?;
    Ok(crate::matching::isomorphic(
        &flat_applied.result,
        &flat_result,
    ))
}

fn collect_flat_maps(
    m: &Morphism,
    nodes: &mut BTreeMap<NodeId, NodeId>,
    ports: &mut BTreeMap<PortId, PortId>,
    edges: &mut BTreeMap<EdgeId, EdgeId>,
) {
    nodes.extend(m.nodes.iter().map(|(k, v)| (*k, *v)));
    ports.extend(m.ports.iter().map(|(k, v)| (*k, *v)));
    edges.extend(m.edges.iter().map(|(k, v)| (*k, *v)));
    for l in m.ladders.values() {
        if let LadderMap::Sub(sub) = l {
            collect_flat_maps(sub, nodes, ports, edges);
        }
    }
}

/// Convenience wrapper: the rule condition evaluated under a match.
pub fn condition_holds(rule: &Rule, m: &Match) -> bool {
    eval_condition(rule.condition.as_ref(), &m.morphism).holds
}
