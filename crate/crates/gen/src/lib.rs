//! Seeded random generation of valid models for the engine's test suites
//! and benches: flat port graphs, hierarchical graphs with ladders, and
//! rules generated from a host so that at least one match is guaranteed.
//!
//! A generator owns a schema registry (node Name → port list and attribute
//! keys) shared by everything it produces, so Name-determines-schema and
//! interface consistency hold by construction — including across levels
//! after flattening, because boundary-carrier node names are globally
//! unique.

use ahp_core::expr::{BinOp, Expr};
use ahp_core::graph::{IdGen, NodeId, PortGraph, PortId};
use ahp_core::hierarchy::{AhpGraph, LadderValue};
use ahp_core::record::{AttrValue, Record};
use ahp_core::rewriting::{ArrowPort, Rule};
use ahp_core::signature::Signature;
use ahp_core::value::BaseValue;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct GenParams {
    /// Soft bound on nodes + ports + edges over all depths.
    pub max_elements: usize,
    pub max_depth: u32,
    /// Chance that an eligible node gets a ladder.
    pub ladder_prob: f64,
    /// Chance per candidate port pair to add an edge.
    pub edge_prob: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            max_elements: 20,
            max_depth: 3,
            ladder_prob: 0.5,
            edge_prob: 0.4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RuleParams {
    /// Maximum number of top-level host nodes copied into the pattern.
    pub max_pattern_nodes: usize,
    /// Chance to abstract a copied numeric attribute into a value variable.
    pub value_var_prob: f64,
    /// Chance to abstract a copied ladder into a graph variable.
    pub graph_var_prob: f64,
    /// Chance to drop a pattern node from the replacement.
    pub drop_prob: f64,
    /// Chance to add one fresh node to the replacement.
    pub grow_prob: f64,
    /// Chance to attach a condition (always true at the origin match).
    pub condition_prob: f64,
}

impl Default for RuleParams {
    fn default() -> Self {
        RuleParams {
            max_pattern_nodes: 3,
            value_var_prob: 0.4,
            graph_var_prob: 0.3,
            drop_prob: 0.25,
            grow_prob: 0.4,
            condition_prob: 0.3,
        }
    }
}

struct NodeSchema {
    name: String,
    ports: Vec<String>,
    attrs: Vec<String>,
}

pub struct ModelGen {
    rng: ChaCha8Rng,
    ids: IdGen,
    sig: Signature,
    node_schemas: Vec<NodeSchema>,
    edge_names: Vec<String>,
    shell_counter: u64,
    var_counter: u64,
}

const PORT_POOL: [&str; 6] = ["a", "b", "c", "d", "u", "v"];
const ATTR_POOL: [&str; 4] = ["pay", "fee", "vol", "risk"];
const EDGE_POOL: [&str; 3] = ["link", "flow", "deal"];

impl ModelGen {
    pub fn new(seed: u64) -> ModelGen {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut node_schemas = Vec::new();
        for i in 0..6 {
            let port_count = rng.random_range(1..=3usize);
            let ports = PORT_POOL[..port_count]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let attr_count = rng.random_range(0..=2usize);
            let mut attrs: Vec<String> = ATTR_POOL.iter().map(|s| s.to_string()).collect();
            attrs.shuffle(&mut rng);
            attrs.truncate(attr_count);
            attrs.sort();
            node_schemas.push(NodeSchema {
                name: format!("N{i}"),
                ports,
                attrs,
            });
        }
        let sig = Signature::open().with_attrs(ATTR_POOL.iter().copied());
        ModelGen {
            rng,
            ids: IdGen::new(),
            sig,
            node_schemas,
            edge_names: EDGE_POOL.iter().map(|s| s.to_string()).collect(),
            shell_counter: 0,
            var_counter: 0,
        }
    }

    /// The signature everything generated so far validates against. Graph
    /// variables created by rule generation are declared here.
    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn ids(&mut self) -> &mut IdGen {
        &mut self.ids
    }

    fn coin(&mut self, p: f64) -> bool {
        self.rng.random::<f64>() < p
    }

    fn node_record(&mut self, schema_idx: usize) -> Record {
        let schema = &self.node_schemas[schema_idx];
        let mut r = Record::new(schema.name.as_str());
        let attrs = schema.attrs.clone();
        for attr in attrs {
            let v = self.rng.random_range(0..10) as f64;
            r.set(attr, AttrValue::lit(v));
        }
        r
    }

    fn edge_record(&mut self) -> Record {
        let name = self.edge_names[self.rng.random_range(0..self.edge_names.len())].clone();
        Record::new(name)
    }

    /// A flat port graph within the element budget.
    pub fn flat_graph(&mut self, max_elements: usize) -> PortGraph {
        let g = self.component(None, max_elements, 0, 0.0, 0.4);
        g.flatten().expect("depth 0 has no ladders")
    }

    /// A valid hierarchical graph within the element budget and depth.
    pub fn ahp(&mut self, params: &GenParams) -> AhpGraph {
        self.component(
            None,
            params.max_elements,
            params.max_depth,
            params.ladder_prob,
            params.edge_prob,
        )
    }

    /// One component graph. When `required_iface` is given, the component's
    /// free ports are exactly those (Name, Record) pairs, carried by a
    /// globally-unique shell node; every other port is bound by an edge.
    fn component(
        &mut self,
        required_iface: Option<&[(String, Record)]>,
        max_elements: usize,
        max_depth: u32,
        ladder_prob: f64,
        edge_prob: f64,
    ) -> AhpGraph {
        let mut g = PortGraph::new();
        let mut open_ports: Vec<PortId> = Vec::new();

        if let Some(iface) = required_iface {
            let shell = self.shell_counter;
            self.shell_counter += 1;
            let record = Record::new(format!("Shell{shell}"));
            let n = g.add_node(&mut self.ids, record);
            for (_, port_record) in iface {
                g.add_port(&mut self.ids, n, port_record.clone());
            }
            // one extra port to connect the shell inward, named apart from
            // any interface name
            let inward = g.add_port(&mut self.ids, n, Record::new("z"));
            open_ports.push(inward);
        }

        let cap = (max_elements / 7).clamp(1, 8);
        let node_budget = if required_iface.is_some() {
            cap.min(3)
        } else {
            cap
        };
        let extra_nodes = self.rng.random_range(1..=node_budget);
        for _ in 0..extra_nodes {
            if g.element_count() + 4 > max_elements {
                break;
            }
            let idx = self.rng.random_range(0..self.node_schemas.len());
            let record = self.node_record(idx);
            let n = g.add_node(&mut self.ids, record);
            let ports = self.node_schemas[idx].ports.clone();
            for p in ports {
                let port = g.add_port(&mut self.ids, n, Record::new(p.as_str()));
                open_ports.push(port);
            }
        }

        // random internal edges
        let mut i = 0;
        while i + 1 < open_ports.len() {
            if self.coin(edge_prob) && g.element_count() < max_elements {
                let record = self.edge_record();
                g.add_edge(&mut self.ids, open_ports[i], open_ports[i + 1], record);
                open_ports.drain(i..=i + 1);
            } else {
                i += 1;
            }
        }

        // with a required interface every leftover open port must be bound
        if required_iface.is_some() {
            for p in open_ports {
                g.add_edge(&mut self.ids, p, p, Record::new("loop"));
            }
        }

        let mut out = AhpGraph::flat(g);
        if max_depth > 0 {
            let nodes: Vec<NodeId> = out.top().node_ids().collect();
            for n in nodes {
                if out.element_count() + 4 > max_elements || !self.coin(ladder_prob) {
                    continue;
                }
                let iface: Vec<(String, Record)> = out
                    .top()
                    .node_port_ids(n)
                    .iter()
                    .map(|p| {
                        let entry = out.top().port(*p).unwrap();
                        (out.top().port_name_key(*p), entry.record.clone())
                    })
                    .collect();
                // laddered nodes need pairwise-distinct port names
                let mut names: Vec<&String> = iface.iter().map(|(n, _)| n).collect();
                names.sort();
                names.dedup();
                if names.len() != iface.len() {
                    continue;
                }
                let remaining = max_elements.saturating_sub(out.element_count());
                if remaining < 4 {
                    continue;
                }
                let ladder = self.component(
                    Some(&iface),
                    remaining,
                    max_depth - 1,
                    ladder_prob,
                    edge_prob,
                );
                out.set_ladder(n, LadderValue::Concrete(ladder));
            }
        }
        out
    }

    /// A rule generated from the host so that the pattern embeds at its
    /// origin: every top-level pattern port is arrow-connected (no dangling
    /// restriction applies) and any condition holds at the origin bindings.
    pub fn applicable_rule(&mut self, host: &AhpGraph, params: &RuleParams) -> Rule {
        let top_nodes: Vec<NodeId> = host.top().node_ids().collect();
        assert!(!top_nodes.is_empty(), "host must have top-level nodes");
        let take = self
            .rng
            .random_range(1..=params.max_pattern_nodes.min(top_nodes.len()));
        let mut chosen = top_nodes;
        chosen.shuffle(&mut self.rng);
        chosen.truncate(take);
        chosen.sort();

        // pattern: copy of the induced subgraph, possibly abstracted
        let mut lhs = AhpGraph::new();
        let mut port_twin: BTreeMap<PortId, PortId> = BTreeMap::new(); // host -> lhs
        let mut var_for_value: BTreeMap<String, String> = BTreeMap::new();
        for hn in &chosen {
            let entry = host.top().node(*hn).unwrap().clone();
            let record = self.abstract_record(&entry.record, params, &mut var_for_value);
            let ln = lhs.top_mut().add_node(&mut self.ids, record);
            for hp in &entry.ports {
                let record = host.top().port(*hp).unwrap().record.clone();
                let lp = lhs.top_mut().add_port(&mut self.ids, ln, record);
                port_twin.insert(*hp, lp);
            }
            match host.ladder(*hn) {
                None => {}
                Some(LadderValue::Concrete(w)) => {
                    if self.coin(params.graph_var_prob) {
                        let var = format!("G{}", self.var_counter);
                        self.var_counter += 1;
                        let iface: Vec<String> = host
                            .top()
                            .node_port_ids(*hn)
                            .iter()
                            .map(|p| host.top().port_name_key(*p))
                            .collect();
                        self.sig = std::mem::take(&mut self.sig).with_graph_var(&var, iface);
                        lhs.set_ladder(ln, LadderValue::Var(var));
                    } else {
                        let (copy, _) = w.fresh_copy(&mut self.ids);
                        lhs.set_ladder(ln, LadderValue::Concrete(copy));
                    }
                }
                Some(LadderValue::Var(_)) => unreachable!("hosts are concrete"),
            }
        }
        for (_, entry) in host.top().edges() {
            let (a, b) = entry.ends;
            if let (Some(la), Some(lb)) = (port_twin.get(&a), port_twin.get(&b)) {
                lhs.top_mut()
                    .add_edge(&mut self.ids, *la, *lb, entry.record.clone());
            }
        }

        // replacement: copy of the pattern with drops, tweaks and growth
        let (mut rhs, rhs_maps) = lhs.fresh_copy(&mut self.ids);
        let rhs_nodes: Vec<NodeId> = rhs.top().node_ids().collect();
        for rn in &rhs_nodes {
            if self.coin(params.drop_prob) {
                rhs.remove_node_cascade(*rn);
            }
        }
        // tweak one numeric attribute on a surviving replacement node
        let survivors: Vec<NodeId> = rhs.top().node_ids().collect();
        if let Some(rn) = survivors.first() {
            let record = rhs.top().node(*rn).unwrap().record.clone();
            let numeric_key = record.iter().find_map(|(k, v)| match (k.as_concrete(), v) {
                (Some(name), AttrValue::Lit(BaseValue::Number(_))) if name != "Name" => {
                    Some(name.to_string())
                }
                (Some(name), AttrValue::Var(_)) if name != "Name" => Some(name.to_string()),
                _ => None,
            });
            if let Some(key) = numeric_key {
                if self.coin(0.5) {
                    let new_value = match record.get(&key).unwrap() {
                        AttrValue::Var(x) => {
                            AttrValue::Expr(Expr::binary(BinOp::Add, Expr::var(x), Expr::lit(1.0)))
                        }
                        AttrValue::Lit(BaseValue::Number(v)) => AttrValue::lit(v + 1.0),
                        other => other.clone(),
                    };
                    rhs.top_mut()
                        .node_record_mut(*rn)
                        .unwrap()
                        .set(key, new_value);
                }
            }
        }
        if self.coin(params.grow_prob) {
            let idx = self.rng.random_range(0..self.node_schemas.len());
            let record = self.node_record(idx);
            let n = rhs.top_mut().add_node(&mut self.ids, record);
            let ports = self.node_schemas[idx].ports.clone();
            for p in ports {
                rhs.top_mut()
                    .add_port(&mut self.ids, n, Record::new(p.as_str()));
            }
        }

        // arrow: every pattern top port gets exactly one connection
        let mut arrow = Vec::new();
        let mut orphans: Vec<PortId> = Vec::new();
        for lp in lhs.top().port_ids() {
            let twin = rhs_maps.ports[&lp];
            if rhs.top().port(twin).is_some() {
                arrow.push(ArrowPort::bridge(lp, [twin]));
            } else {
                orphans.push(lp);
            }
        }
        while orphans.len() >= 2 && self.coin(0.5) {
            let b = orphans.pop().unwrap();
            let a = orphans.pop().unwrap();
            arrow.push(ArrowPort::wire(a, b));
        }
        if !orphans.is_empty() {
            arrow.push(ArrowPort::blackhole(orphans));
        }

        // a condition that holds at the origin match
        let condition = if self.coin(params.condition_prob) {
            var_for_value.iter().next().map(|(key, var)| {
                let bound: f64 = key.split('=').nth(1).unwrap().parse().unwrap();
                Expr::binary(BinOp::Le, Expr::var(var), Expr::lit(bound))
            })
        } else {
            None
        };

        let name = format!("r{}", self.var_counter);
        self.var_counter += 1;
        Rule {
            name,
            lhs,
            rhs,
            arrow,
            condition,
        }
    }

    fn abstract_record(
        &mut self,
        record: &Record,
        params: &RuleParams,
        var_for_value: &mut BTreeMap<String, String>,
    ) -> Record {
        let mut out = Record::from_pairs([]);
        for (key, value) in record.iter() {
            let abstracted = match (key.as_concrete(), value) {
                (Some(name), AttrValue::Lit(BaseValue::Number(v)))
                    if name != "Name" && self.coin(params.value_var_prob) =>
                {
                    let tag = format!("{name}={v}");
                    let var = match var_for_value.get(&tag) {
                        Some(var) => var.clone(),
                        None => {
                            let var = format!("X{}", self.var_counter);
                            self.var_counter += 1;
                            var_for_value.insert(tag, var.clone());
                            var
                        }
                    };
                    if !self.sig.is_value_var(&var) {
                        self.sig = std::mem::take(&mut self.sig).with_value_vars([var.clone()]);
                    }
                    AttrValue::Var(var)
                }
                _ => value.clone(),
            };
            out.insert_key(key.clone(), abstracted);
        }
        out
    }

    /// Host and rule for the bridge fan-out law: a hub of external degree
    /// `degree`, bridged to `fanout` replacement ports. The expected number
    /// of new edges is `degree * fanout`.
    pub fn bridge_case(&mut self, degree: usize, fanout: usize) -> (AhpGraph, Rule) {
        let mut g = PortGraph::new();
        let hub = g.add_node(&mut self.ids, Record::new("Hub"));
        let h = g.add_port(&mut self.ids, hub, Record::new("h"));
        for _ in 0..degree {
            let x = g.add_node(&mut self.ids, Record::new("Ext"));
            let xp = g.add_port(&mut self.ids, x, Record::new("c"));
            g.add_edge(&mut self.ids, xp, h, Record::new("link"));
        }
        let host = AhpGraph::flat(g);

        let mut lhs = PortGraph::new();
        let ln = lhs.add_node(&mut self.ids, Record::new("Hub"));
        let lp = lhs.add_port(&mut self.ids, ln, Record::new("h"));
        let mut rhs = PortGraph::new();
        let rn = rhs.add_node(&mut self.ids, Record::new("Hub2"));
        let mut r_ports = Vec::new();
        for i in 0..fanout {
            r_ports.push(rhs.add_port(&mut self.ids, rn, Record::new(format!("q{i}"))));
        }
        let rule = Rule {
            name: "bridge_case".into(),
            lhs: AhpGraph::flat(lhs),
            rhs: AhpGraph::flat(rhs),
            arrow: vec![ArrowPort::bridge(lp, r_ports)],
            condition: None,
        };
        (host, rule)
    }

    /// Host and rule for the wire product law: a middle node whose two ports
    /// have external degrees `k1` and `k2`; wiring them yields `k1 * k2`
    /// new edges.
    pub fn wire_case(&mut self, k1: usize, k2: usize) -> (AhpGraph, Rule) {
        let mut g = PortGraph::new();
        let mid = g.add_node(&mut self.ids, Record::new("Mid"));
        let p1 = g.add_port(&mut self.ids, mid, Record::new("a"));
        let p2 = g.add_port(&mut self.ids, mid, Record::new("b"));
        for (count, port) in [(k1, p1), (k2, p2)] {
            for _ in 0..count {
                let x = g.add_node(&mut self.ids, Record::new("Ext"));
                let xp = g.add_port(&mut self.ids, x, Record::new("c"));
                g.add_edge(&mut self.ids, xp, port, Record::new("link"));
            }
        }
        let host = AhpGraph::flat(g);

        let mut lhs = PortGraph::new();
        let ln = lhs.add_node(&mut self.ids, Record::new("Mid"));
        let la = lhs.add_port(&mut self.ids, ln, Record::new("a"));
        let lb = lhs.add_port(&mut self.ids, ln, Record::new("b"));
        let rule = Rule {
            name: "wire_case".into(),
            lhs: AhpGraph::flat(lhs),
            rhs: AhpGraph::new(),
            arrow: vec![ArrowPort::wire(la, lb)],
            condition: None,
        };
        (host, rule)
    }
}
