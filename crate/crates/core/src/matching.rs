//! Morphism search: finding every total match of a rule's left-hand side in
//! a subject graph, recursively through ladders, with variable binding and
//! the no-dangling-edge condition.
//!
//! Matched node pairs must agree on their derived Interface (port-name list),
//! a pattern node has a ladder exactly when its image does, and a concrete
//! pattern ladder must cover the image ladder completely. Expressions in
//! pattern records are checked once all plain variable bindings are
//! established, so the accepted set does not depend on search order.

use crate::expr::{EvalError, Expr};
use crate::graph::{EdgeId, NodeId, PortId};
use crate::hierarchy::{AhpGraph, IdSets, LadderValue};
use crate::record::{AttrKey, AttrValue, Record};
use crate::rewriting::Rule;
use crate::value::BaseValue;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// The variable environment accumulated while matching.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Bindings {
    /// value variable → base value
    pub values: BTreeMap<String, BaseValue>,
    /// attribute variable → concrete attribute name
    pub attrs: BTreeMap<String, String>,
    /// graph variable → the host ladder it captured (first binding wins;
    /// later occurrences must be isomorphic)
    pub graphs: BTreeMap<String, AhpGraph>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    #[error("unbound value variable {0}")]
    UnboundValue(String),
    #[error("unbound attribute variable {0}")]
    UnboundAttr(String),
    #[error("unbound graph variable {0}")]
    UnboundGraph(String),
    #[error("substitution produced duplicate attribute {0}")]
    DuplicateKey(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl Bindings {
    /// Applies the environment to a record: variable keys become concrete
    /// attribute names, variable values become base values, expressions are
    /// evaluated.
    pub fn substitute_record(&self, record: &Record) -> Result<Record, SubstError> {
        let mut out = Record::from_pairs([]);
        let mut seen = BTreeSet::new();
        for (key, value) in record.iter() {
            let concrete_key = match key {
                AttrKey::Attr(name) => name.clone(),
                AttrKey::Var(var) => self
                    .attrs
                    .get(var)
                    .cloned()
                    .ok_or_else(|| SubstError::UnboundAttr(var.clone()))?,
            };
            if !seen.insert(concrete_key.clone()) {
                return Err(SubstError::DuplicateKey(concrete_key));
            }
            let concrete_value = self.substitute_value(value)?;
            out.insert_key(AttrKey::Attr(concrete_key), concrete_value);
        }
        Ok(out)
    }

    pub fn substitute_value(&self, value: &AttrValue) -> Result<AttrValue, SubstError> {
        match value {
            AttrValue::Lit(v) => Ok(AttrValue::Lit(v.clone())),
            AttrValue::Var(x) => self
                .values
                .get(x)
                .map(|v| AttrValue::Lit(v.clone()))
                .ok_or_else(|| SubstError::UnboundValue(x.clone())),
            AttrValue::Expr(e) => Ok(AttrValue::Lit(e.eval(&self.values)?)),
        }
    }
}

/// How a laddered pattern node was matched: binding a graph variable, or a
/// recursive sub-morphism into the image ladder.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum LadderMap {
    Var(String),
    Sub(Box<Morphism>),
}

/// An injective structure- and record-preserving map from a pattern
/// component into a host component. Bindings live on the root morphism; the
/// sub-morphisms of ladders carry empty environments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Morphism {
    pub nodes: BTreeMap<NodeId, NodeId>,
    pub ports: BTreeMap<PortId, PortId>,
    pub edges: BTreeMap<EdgeId, EdgeId>,
    /// keyed by pattern node id
    pub ladders: BTreeMap<NodeId, LadderMap>,
    pub bindings: Bindings,
}

impl Morphism {
    /// All image node ids, including those reached through sub-morphisms and
    /// graph-variable captures.
    fn image_nodes_into(&self, out: &mut BTreeSet<NodeId>) {
        out.extend(self.nodes.values().copied());
        for l in self.ladders.values() {
            if let LadderMap::Sub(sub) = l {
                sub.image_nodes_into(out);
            }
        }
    }
}

/// A total match of a rule's left-hand side.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Match {
    pub morphism: Morphism,
    /// Every host element consumed by the match, at every level, including
    /// the elements of ladders captured by graph variables.
    pub image: IdSets,
}

impl Match {
    pub fn canonical_key(&self) -> (Vec<NodeId>, &Morphism) {
        let mut nodes = BTreeSet::new();
        self.morphism.image_nodes_into(&mut nodes);
        (nodes.into_iter().collect(), &self.morphism)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("morphism not total: {0}")]
    NotTotal(String),
    #[error("morphism not injective: {0}")]
    NotInjective(String),
    #[error("morphism law broken: {0}")]
    LawBroken(String),
    #[error("record mismatch: {0}")]
    RecordMismatch(String),
    #[error("dangling condition violated: {0}")]
    Dangling(String),
    #[error("rule condition does not hold")]
    ConditionFailed,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("host has {count} elements, oracle bound is {max}")]
    HostTooLarge { count: usize, max: usize },
}

/// Outcome of evaluating a rule condition under a morphism's bindings.
/// Unbound variables, type errors and arithmetic errors make the condition
/// false and leave a diagnostic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondEval {
    pub holds: bool,
    pub diagnostic: Option<String>,
}

pub fn eval_condition(cond: Option<&Expr>, m: &Morphism) -> CondEval {
    let Some(expr) = cond else {
        return CondEval {
            holds: true,
            diagnostic: None,
        };
    };
    match expr.eval(&m.bindings.values) {
        Ok(BaseValue::Bool(b)) => CondEval {
            holds: b,
            diagnostic: None,
        },
        Ok(other) => CondEval {
            holds: false,
            diagnostic: Some(format!("condition evaluated to non-boolean {other}")),
        },
        Err(e) => CondEval {
            holds: false,
            diagnostic: Some(e.to_string()),
        },
    }
}

/// An expression constraint deferred until every plain variable is bound:
/// the substituted expression must evaluate to `expected`.
#[derive(Debug, Clone)]
struct ExprConstraint {
    expr: Expr,
    expected: BaseValue,
}

fn check_deferred(deferred: &[ExprConstraint], env: &Bindings) -> bool {
    deferred.iter().all(|c| match c.expr.eval(&env.values) {
        Ok(v) => v == c.expected,
        Err(_) => false,
    })
}

enum ValueUnify {
    Fail,
    Ok,
    Defer(ExprConstraint),
}

/// Unifies a pattern value against a concrete host value, extending `env`.
fn unify_value(pattern: &AttrValue, host: &AttrValue, env: &mut Bindings) -> ValueUnify {
    let AttrValue::Lit(host_value) = host else {
        return ValueUnify::Fail; // host graphs are concrete
    };
    match pattern {
        AttrValue::Lit(v) => {
            if v == host_value {
                ValueUnify::Ok
            } else {
                ValueUnify::Fail
            }
        }
        AttrValue::Var(x) => match env.values.get(x) {
            Some(bound) if bound == host_value => ValueUnify::Ok,
            Some(_) => ValueUnify::Fail,
            None => {
                env.values.insert(x.clone(), host_value.clone());
                ValueUnify::Ok
            }
        },
        AttrValue::Expr(e) => match e.eval(&env.values) {
            Ok(v) if v == *host_value => ValueUnify::Ok,
            Ok(_) => ValueUnify::Fail,
            Err(EvalError::Unbound(_)) => ValueUnify::Defer(ExprConstraint {
                expr: e.clone(),
                expected: host_value.clone(),
            }),
            Err(_) => ValueUnify::Fail,
        },
    }
}

/// Unifies two records. Concrete pattern keys must appear in the host;
/// attribute-variable keys are assigned injectively to the remaining host
/// keys (every injective assignment is an alternative). Key sets must have
/// equal size, so the substituted pattern record equals the host record.
fn unify_records(
    pattern: &Record,
    host: &Record,
    env: &Bindings,
    deferred: &[ExprConstraint],
) -> Vec<(Bindings, Vec<ExprConstraint>)> {
    if pattern.len() != host.len() {
        return Vec::new();
    }
    let mut env = env.clone();
    let mut deferred = deferred.to_vec();

    let mut var_keys: Vec<(&String, &AttrValue)> = Vec::new();
    let mut used_host_keys: BTreeSet<&str> = BTreeSet::new();

    for (key, value) in pattern.iter() {
        match key {
            AttrKey::Attr(name) => {
                let Some(host_value) = host.get(name) else {
                    return Vec::new();
                };
                used_host_keys.insert(name.as_str());
                match unify_value(value, host_value, &mut env) {
                    ValueUnify::Fail => return Vec::new(),
                    ValueUnify::Ok => {}
                    ValueUnify::Defer(c) => deferred.push(c),
                }
            }
            AttrKey::Var(var) => var_keys.push((var, value)),
        }
    }
    if var_keys.is_empty() {
        return vec![(env, deferred)];
    }

    // remaining host keys the variable keys may map onto
    let remaining: Vec<(&str, &AttrValue)> = host
        .iter()
        .filter_map(|(k, v)| match k {
            AttrKey::Attr(name) if !used_host_keys.contains(name.as_str()) => {
                Some((name.as_str(), v))
            }
            _ => None,
        })
        .collect();
    if remaining.len() != var_keys.len() {
        return Vec::new();
    }

    let mut out = Vec::new();
    let mut taken = vec![false; remaining.len()];
    assign_var_keys(
        &var_keys, 0, &remaining, &mut taken, env, deferred, &mut out,
    );
    out
}

fn assign_var_keys(
    var_keys: &[(&String, &AttrValue)],
    idx: usize,
    remaining: &[(&str, &AttrValue)],
    taken: &mut Vec<bool>,
    env: Bindings,
    deferred: Vec<ExprConstraint>,
    out: &mut Vec<(Bindings, Vec<ExprConstraint>)>,
) {
    if idx == var_keys.len() {
        out.push((env, deferred));
        return;
    }
    let (var, pattern_value) = var_keys[idx];
    for slot in 0..remaining.len() {
        if taken[slot] {
            continue;
        }
        let (host_key, host_value) = remaining[slot];
        if let Some(bound) = env.attrs.get(var) {
            if bound != host_key {
                continue;
            }
        }
        let mut env2 = env.clone();
        env2.attrs.insert(var.clone(), host_key.to_string());
        let mut deferred2 = deferred.clone();
        match unify_value(pattern_value, host_value, &mut env2) {
            ValueUnify::Fail => continue,
            ValueUnify::Ok => {}
            ValueUnify::Defer(c) => deferred2.push(c),
        }
        taken[slot] = true;
        assign_var_keys(var_keys, idx + 1, remaining, taken, env2, deferred2, out);
        taken[slot] = false;
    }
}

/// A partial morphism under construction for one component pair.
#[derive(Clone, Default)]
struct PartialMorphism {
    nodes: BTreeMap<NodeId, NodeId>,
    ports: BTreeMap<PortId, PortId>,
    edges: BTreeMap<EdgeId, EdgeId>,
    ladders: BTreeMap<NodeId, LadderMap>,
    used_nodes: BTreeSet<NodeId>,
    used_ports: BTreeSet<PortId>,
    used_edges: BTreeSet<EdgeId>,
}

impl PartialMorphism {
    fn into_morphism(self, bindings: Bindings) -> Morphism {
        Morphism {
            nodes: self.nodes,
            ports: self.ports,
            edges: self.edges,
            ladders: self.ladders,
            bindings,
        }
    }
}

struct ComponentSearch<'a> {
    pattern: &'a AhpGraph,
    host: &'a AhpGraph,
    require_cover: bool,
    node_order: Vec<NodeId>,
    results: Vec<(PartialMorphism, Bindings, Vec<ExprConstraint>)>,
}

/// Enumerates every morphism from `pattern` into `host` for one component,
/// recursing into ladders. With `require_cover` the image must be the whole
/// host component (used for ladders and isomorphism checks).
fn match_component(
    pattern: &AhpGraph,
    host: &AhpGraph,
    require_cover: bool,
    env: &Bindings,
    deferred: &[ExprConstraint],
) -> Vec<(Morphism, Bindings, Vec<ExprConstraint>)> {
    if require_cover
        && (pattern.top().node_count() != host.top().node_count()
            || pattern.top().port_count() != host.top().port_count()
            || pattern.top().edge_count() != host.top().edge_count())
    {
        return Vec::new();
    }
    if pattern.top().node_count() > host.top().node_count()
        || pattern.top().edge_count() > host.top().edge_count()
    {
        return Vec::new();
    }

    // most-constrained-first: fewest host candidates by cheap filters
    let mut node_order: Vec<NodeId> = pattern.top().node_ids().collect();
    node_order.sort_by_key(|n| {
        let candidates = host
            .top()
            .node_ids()
            .filter(|h| node_compatible(pattern, host, *n, *h))
            .count();
        (candidates, *n)
    });

    let mut search = ComponentSearch {
        pattern,
        host,
        require_cover,
        node_order,
        results: Vec::new(),
    };
    search.assign_node(
        0,
        PartialMorphism::default(),
        env.clone(),
        deferred.to_vec(),
    );

    search
        .results
        .into_iter()
        .map(|(partial, env, deferred)| (partial.into_morphism(Bindings::default()), env, deferred))
        .collect()
}

/// Cheap candidate filter: concrete Names must agree, ladder presence must
/// agree, and the port counts must be equal (interface arity).
fn node_compatible(pattern: &AhpGraph, host: &AhpGraph, pn: NodeId, hn: NodeId) -> bool {
    let p = pattern.top().node(pn).unwrap();
    let h = host.top().node(hn).unwrap();
    if p.ports.len() != h.ports.len() {
        return false;
    }
    if pattern.ladder(pn).is_some() != host.ladder(hn).is_some() {
        return false;
    }
    match (p.record.concrete_name(), h.record.concrete_name()) {
        (Some(a), Some(b)) => a == b,
        _ => true, // variable names never prune
    }
}

impl<'a> ComponentSearch<'a> {
    fn assign_node(
        &mut self,
        idx: usize,
        partial: PartialMorphism,
        env: Bindings,
        deferred: Vec<ExprConstraint>,
    ) {
        if idx == self.node_order.len() {
            self.assign_edges(partial, env, deferred);
            return;
        }
        let pn = self.node_order[idx];
        let host_nodes: Vec<NodeId> = self.host.top().node_ids().collect();
        for hn in host_nodes {
            if partial.used_nodes.contains(&hn) || !node_compatible(self.pattern, self.host, pn, hn)
            {
                continue;
            }
            let p_record = &self.pattern.top().node(pn).unwrap().record;
            let h_record = &self.host.top().node(hn).unwrap().record;
            for (env2, deferred2) in unify_records(p_record, h_record, &env, &deferred) {
                // derived Interface equality: positional unification of the
                // port Name lists
                let p_ports = self.pattern.top().node_port_ids(pn).to_vec();
                let h_ports = self.host.top().node_port_ids(hn).to_vec();
                let mut env3 = env2;
                let mut deferred3 = deferred2;
                let mut ok = true;
                for (pp, hp) in p_ports.iter().zip(h_ports.iter()) {
                    let p_name = self.pattern.top().port(*pp).unwrap().record.name();
                    let h_name = self.host.top().port(*hp).unwrap().record.name();
                    match (p_name, h_name) {
                        (Some(pv), Some(hv)) => match unify_value(pv, hv, &mut env3) {
                            ValueUnify::Fail => {
                                ok = false;
                                break;
                            }
                            ValueUnify::Ok => {}
                            ValueUnify::Defer(c) => deferred3.push(c),
                        },
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let mut partial2 = partial.clone();
                partial2.nodes.insert(pn, hn);
                partial2.used_nodes.insert(hn);
                self.assign_ports(idx, pn, hn, 0, partial2, env3, deferred3);
            }
        }
    }

    /// Injective record-coherent assignment of the pattern node's ports onto
    /// the image node's ports. Same-named host ports give several
    /// alternatives; all are explored.
    #[allow(clippy::too_many_arguments)]
    fn assign_ports(
        &mut self,
        node_idx: usize,
        pn: NodeId,
        hn: NodeId,
        port_idx: usize,
        partial: PartialMorphism,
        env: Bindings,
        deferred: Vec<ExprConstraint>,
    ) {
        let p_ports = self.pattern.top().node_port_ids(pn).to_vec();
        if port_idx == p_ports.len() {
            self.assign_node(node_idx + 1, partial, env, deferred);
            return;
        }
        let pp = p_ports[port_idx];
        let p_record = &self.pattern.top().port(pp).unwrap().record;
        let h_ports = self.host.top().node_port_ids(hn).to_vec();
        for hp in h_ports {
            if partial.used_ports.contains(&hp) {
                continue;
            }
            let h_record = &self.host.top().port(hp).unwrap().record;
            for (env2, deferred2) in unify_records(p_record, h_record, &env, &deferred) {
                let mut partial2 = partial.clone();
                partial2.ports.insert(pp, hp);
                partial2.used_ports.insert(hp);
                self.assign_ports(node_idx, pn, hn, port_idx + 1, partial2, env2, deferred2);
            }
        }
    }

    fn assign_edges(
        &mut self,
        partial: PartialMorphism,
        env: Bindings,
        deferred: Vec<ExprConstraint>,
    ) {
        let pattern_edges: Vec<EdgeId> = self.pattern.top().edge_ids().collect();
        self.assign_edge(&pattern_edges, 0, partial, env, deferred);
    }

    fn assign_edge(
        &mut self,
        pattern_edges: &[EdgeId],
        idx: usize,
        partial: PartialMorphism,
        env: Bindings,
        deferred: Vec<ExprConstraint>,
    ) {
        if idx == pattern_edges.len() {
            self.assign_ladders(partial, env, deferred);
            return;
        }
        let pe = pattern_edges[idx];
        let p_entry = self.pattern.top().edge(pe).unwrap();
        let (pa, pb) = p_entry.ends;
        let (ha, hb) = (partial.ports[&pa], partial.ports[&pb]);
        let p_oriented = p_entry.record.is_oriented();
        let host_edges: Vec<EdgeId> = self.host.top().edge_ids().collect();
        for he in host_edges {
            if partial.used_edges.contains(&he) {
                continue;
            }
            let h_entry = self.host.top().edge(he).unwrap();
            let ends_ok = if p_oriented {
                h_entry.ends == (ha, hb)
            } else {
                h_entry.ends == (ha, hb) || h_entry.ends == (hb, ha)
            };
            if !ends_ok {
                continue;
            }
            for (env2, deferred2) in
                unify_records(&p_entry.record, &h_entry.record, &env, &deferred)
            {
                let mut partial2 = partial.clone();
                partial2.edges.insert(pe, he);
                partial2.used_edges.insert(he);
                self.assign_edge(pattern_edges, idx + 1, partial2, env2, deferred2);
            }
        }
    }

    fn assign_ladders(
        &mut self,
        partial: PartialMorphism,
        env: Bindings,
        deferred: Vec<ExprConstraint>,
    ) {
        let laddered: Vec<NodeId> = self.pattern.ladders().map(|(n, _)| n).collect();
        self.assign_ladder(&laddered, 0, partial, env, deferred);
    }

    fn assign_ladder(
        &mut self,
        laddered: &[NodeId],
        idx: usize,
        partial: PartialMorphism,
        env: Bindings,
        deferred: Vec<ExprConstraint>,
    ) {
        if idx == laddered.len() {
            self.complete(partial, env, deferred);
            return;
        }
        let pn = laddered[idx];
        let hn = partial.nodes[&pn];
        let host_ladder = match self.host.ladder(hn) {
            Some(LadderValue::Concrete(g)) => g,
            _ => return, // candidate filter pairs laddered with laddered
        };
        match self.pattern.ladder(pn).unwrap() {
            LadderValue::Var(var) => {
                if let Some(bound) = env.graphs.get(var) {
                    if !isomorphic(bound, host_ladder) {
                        return;
                    }
                    let mut partial2 = partial;
                    partial2.ladders.insert(pn, LadderMap::Var(var.clone()));
                    self.assign_ladder(laddered, idx + 1, partial2, env, deferred);
                } else {
                    let mut env2 = env;
                    env2.graphs.insert(var.clone(), host_ladder.clone());
                    let mut partial2 = partial;
                    partial2.ladders.insert(pn, LadderMap::Var(var.clone()));
                    self.assign_ladder(laddered, idx + 1, partial2, env2, deferred);
                }
            }
            LadderValue::Concrete(w) => {
                for (sub, env2, deferred2) in match_component(w, host_ladder, true, &env, &deferred)
                {
                    let mut partial2 = partial.clone();
                    partial2.ladders.insert(pn, LadderMap::Sub(Box::new(sub)));
                    self.assign_ladder(laddered, idx + 1, partial2, env2, deferred2);
                }
            }
        }
    }

    fn complete(&mut self, partial: PartialMorphism, env: Bindings, deferred: Vec<ExprConstraint>) {
        if self.require_cover
            && (partial.used_nodes.len() != self.host.top().node_count()
                || partial.used_ports.len() != self.host.top().port_count()
                || partial.used_edges.len() != self.host.top().edge_count())
        {
            return;
        }
        self.results.push((partial, env, deferred));
    }
}

/// True when two concrete graphs are equal up to element ids: a bijective,
/// structure- and record-preserving correspondence exists at every level.
pub fn isomorphic(a: &AhpGraph, b: &AhpGraph) -> bool {
    !match_component(a, b, true, &Bindings::default(), &Vec::new()).is_empty()
}

fn collect_image(m: &Morphism, host: &AhpGraph, into: &mut IdSets) {
    into.nodes.extend(m.nodes.values().copied());
    into.ports.extend(m.ports.values().copied());
    into.edges.extend(m.edges.values().copied());
    for (pn, ladder) in &m.ladders {
        let hn = m.nodes[pn];
        let Some(LadderValue::Concrete(host_ladder)) = host.ladder(hn) else {
            continue;
        };
        match ladder {
            LadderMap::Sub(sub) => collect_image(sub, host_ladder, into),
            LadderMap::Var(_) => host_ladder.collect_ids(into),
        }
    }
}

/// Finds every match of the rule's left-hand side in `host`: the complete,
/// duplicate-free list, ordered lexicographically by sorted image node ids.
/// The host must be concrete (no variables anywhere).
pub fn find_matches(rule: &Rule, host: &AhpGraph) -> Vec<Match> {
    if host.has_variables() {
        return Vec::new();
    }
    let pattern = &rule.lhs;
    let mut matches = Vec::new();
    for (morphism, env, deferred) in
        match_component(pattern, host, false, &Bindings::default(), &Vec::new())
    {
        if !check_deferred(&deferred, &env) {
            continue;
        }
        let mut morphism = morphism;
        morphism.bindings = env;
        if !dangling_ok(rule, host, &morphism) {
            continue;
        }
        if !eval_condition(rule.condition.as_ref(), &morphism).holds {
            continue;
        }
        let mut image = IdSets::default();
        collect_image(&morphism, host, &mut image);
        matches.push(Match { morphism, image });
    }
    matches.sort_by(|a, b| {
        let ka = a.canonical_key();
        let kb = b.canonical_key();
        ka.cmp(&kb)
    });
    matches.dedup();
    matches
}

/// The dangling condition: every top-level pattern port that is not
/// connected to the arrow node maps to a port with no incident edge outside
/// the image.
fn dangling_ok(rule: &Rule, host: &AhpGraph, m: &Morphism) -> bool {
    let arrow_ports = rule.arrow_connected_lhs_ports();
    let image_edges: BTreeSet<EdgeId> = m.edges.values().copied().collect();
    for (pp, hp) in &m.ports {
        if arrow_ports.contains(pp) {
            continue;
        }
        for he in host.top().edges_at(*hp) {
            if !image_edges.contains(&he) {
                return false;
            }
        }
    }
    true
}

/// Matches one ladder slot: a graph variable binds (or re-checks against)
/// the whole host ladder provided the interfaces agree; a concrete pattern
/// ladder needs a recursive total morphism covering the host ladder.
/// `pattern_interface` is the declared interface of the slot (the host
/// node's port names). Returns the canonical first alternative.
pub fn match_ladder(
    pattern: &LadderValue,
    pattern_interface: &[String],
    host_ladder: &AhpGraph,
    env: &Bindings,
) -> Option<(LadderMap, Bindings)> {
    match pattern {
        LadderValue::Var(var) => {
            let host_iface: BTreeSet<String> = host_ladder
                .top()
                .interface()
                .into_iter()
                .map(|p| host_ladder.top().port_name_key(p))
                .collect();
            let want: BTreeSet<String> = pattern_interface.iter().cloned().collect();
            if host_iface != want || host_iface.len() != pattern_interface.len() {
                return None;
            }
            if let Some(bound) = env.graphs.get(var) {
                if !isomorphic(bound, host_ladder) {
                    return None;
                }
                Some((LadderMap::Var(var.clone()), env.clone()))
            } else {
                let mut env2 = env.clone();
                env2.graphs.insert(var.clone(), host_ladder.clone());
                Some((LadderMap::Var(var.clone()), env2))
            }
        }
        LadderValue::Concrete(w) => {
            let mut alternatives = match_component(w, host_ladder, true, env, &Vec::new());
            alternatives.retain(|(_, env, deferred)| check_deferred(deferred, env));
            alternatives.sort_by(|a, b| a.0.cmp(&b.0));
            alternatives.into_iter().next().map(|(mut sub, env, _)| {
                sub.bindings = Bindings::default();
                (LadderMap::Sub(Box::new(sub)), env)
            })
        }
    }
}

// ---------------------------------------------------------------------------
// match verification (replay of the morphism laws)
// ---------------------------------------------------------------------------

/// Replays a match against the definition: totality, injectivity, edge and
/// attachment preservation, ladder preservation, record coherence under the
/// bindings, interface equality, the dangling condition and the rule
/// condition.
pub fn verify_match(rule: &Rule, host: &AhpGraph, m: &Match) -> Result<(), MatchError> {
    verify_component(&rule.lhs, host, &m.morphism, &m.morphism.bindings)?;
    if !dangling_ok(rule, host, &m.morphism) {
        return Err(MatchError::Dangling(
            "image port has an external edge".into(),
        ));
    }
    if !eval_condition(rule.condition.as_ref(), &m.morphism).holds {
        return Err(MatchError::ConditionFailed);
    }
    Ok(())
}

fn verify_component(
    pattern: &AhpGraph,
    host: &AhpGraph,
    m: &Morphism,
    bindings: &Bindings,
) -> Result<(), MatchError> {
    // totality and injectivity
    let mut seen_nodes = BTreeSet::new();
    for pn in pattern.top().node_ids() {
        let hn = m
            .nodes
            .get(&pn)
            .ok_or_else(|| MatchError::NotTotal(format!("node {pn} unmapped")))?;
        if !seen_nodes.insert(*hn) {
            return Err(MatchError::NotInjective(format!("node image {hn} reused")));
        }
        if host.top().node(*hn).is_none() {
            return Err(MatchError::LawBroken(format!("image node {hn} missing")));
        }
    }
    let mut seen_ports = BTreeSet::new();
    for pp in pattern.top().port_ids() {
        let hp = m
            .ports
            .get(&pp)
            .ok_or_else(|| MatchError::NotTotal(format!("port {pp} unmapped")))?;
        if !seen_ports.insert(*hp) {
            return Err(MatchError::NotInjective(format!("port image {hp} reused")));
        }
        // attachment preservation
        let pn = pattern.top().attach(pp);
        if host.top().port(*hp).map(|e| e.node) != m.nodes.get(&pn).copied() {
            return Err(MatchError::LawBroken(format!(
                "port {pp} attachment not preserved"
            )));
        }
    }
    let mut seen_edges = BTreeSet::new();
    for pe in pattern.top().edge_ids() {
        let he = m
            .edges
            .get(&pe)
            .ok_or_else(|| MatchError::NotTotal(format!("edge {pe} unmapped")))?;
        if !seen_edges.insert(*he) {
            return Err(MatchError::NotInjective(format!("edge image {he} reused")));
        }
        let p_entry = pattern.top().edge(pe).unwrap();
        let h_entry = host
            .top()
            .edge(*he)
            .ok_or_else(|| MatchError::LawBroken(format!("image edge {he} missing")))?;
        let (pa, pb) = p_entry.ends;
        let ends = (m.ports[&pa], m.ports[&pb]);
        let ends_ok = if p_entry.record.is_oriented() {
            h_entry.ends == ends
        } else {
            h_entry.ends == ends || h_entry.ends == (ends.1, ends.0)
        };
        if !ends_ok {
            return Err(MatchError::LawBroken(format!(
                "edge {pe} connection not preserved"
            )));
        }
    }

    // record coherence: substituted pattern record equals image record
    let pairs: Vec<(Record, Record)> = pattern
        .top()
        .node_ids()
        .map(|pn| {
            (
                pattern.top().node(pn).unwrap().record.clone(),
                host.top().node(m.nodes[&pn]).unwrap().record.clone(),
            )
        })
        .chain(pattern.top().port_ids().map(|pp| {
            (
                pattern.top().port(pp).unwrap().record.clone(),
                host.top().port(m.ports[&pp]).unwrap().record.clone(),
            )
        }))
        .chain(pattern.top().edge_ids().map(|pe| {
            (
                pattern.top().edge(pe).unwrap().record.clone(),
                host.top().edge(m.edges[&pe]).unwrap().record.clone(),
            )
        }))
        .collect();
    for (p_record, h_record) in pairs {
        let substituted = bindings
            .substitute_record(&p_record)
            .map_err(|e| MatchError::RecordMismatch(e.to_string()))?;
        if substituted != h_record {
            return Err(MatchError::RecordMismatch(format!(
                "{substituted} != {h_record}"
            )));
        }
    }

    // derived Interface equality
    for pn in pattern.top().node_ids() {
        let hn = m.nodes[&pn];
        let p_iface: Result<Vec<AttrValue>, _> = pattern
            .top()
            .node_interface(pn)
            .into_iter()
            .map(|v| bindings.substitute_value(v))
            .collect();
        let p_iface = p_iface.map_err(|e| MatchError::RecordMismatch(e.to_string()))?;
        let h_iface: Vec<AttrValue> = host.top().node_interface(hn).into_iter().cloned().collect();
        if p_iface != h_iface {
            return Err(MatchError::LawBroken(format!(
                "node {pn} interface differs from image {hn}"
            )));
        }
    }

    // ladder preservation
    for pn in pattern.top().node_ids() {
        let hn = m.nodes[&pn];
        match (pattern.ladder(pn), host.ladder(hn)) {
            (None, None) => {}
            (None, Some(_)) | (Some(_), None) => {
                return Err(MatchError::LawBroken(format!(
                    "ladder presence differs between {pn} and {hn}"
                )))
            }
            (Some(pattern_value), Some(LadderValue::Concrete(host_ladder))) => {
                let ladder_map = m
                    .ladders
                    .get(&pn)
                    .ok_or_else(|| MatchError::NotTotal(format!("ladder of {pn} unmapped")))?;
                match (pattern_value, ladder_map) {
                    (LadderValue::Var(var), LadderMap::Var(mapped)) => {
                        if var != mapped {
                            return Err(MatchError::LawBroken(format!(
                                "ladder of {pn} bound to wrong variable"
                            )));
                        }
                        let bound = bindings.graphs.get(var).ok_or_else(|| {
                            MatchError::RecordMismatch(format!("graph variable {var} unbound"))
                        })?;
                        if !isomorphic(bound, host_ladder) {
                            return Err(MatchError::RecordMismatch(format!(
                                "graph variable {var} binding differs from image ladder"
                            )));
                        }
                    }
                    (LadderValue::Concrete(w), LadderMap::Sub(sub)) => {
                        verify_component(w, host_ladder, sub, bindings)?;
                        // cover: the sub-morphism must be onto
                        if sub.nodes.len() != host_ladder.top().node_count()
                            || sub.ports.len() != host_ladder.top().port_count()
                            || sub.edges.len() != host_ladder.top().edge_count()
                        {
                            return Err(MatchError::LawBroken(format!(
                                "ladder of {pn} does not cover the image ladder"
                            )));
                        }
                    }
                    _ => {
                        return Err(MatchError::LawBroken(format!(
                            "ladder map of {pn} has the wrong shape"
                        )))
                    }
                }
            }
            (Some(_), Some(LadderValue::Var(_))) => {
                return Err(MatchError::LawBroken(
                    "host contains a graph variable".into(),
                ))
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// brute-force oracle
// ---------------------------------------------------------------------------

/// Reference implementation: exhaustively enumerates injective element maps
/// and filters them by the morphism laws. No ordering heuristics, no name
/// pruning, no eager unification. Only usable on small hosts.
pub fn brute_force_matches(
    rule: &Rule,
    host: &AhpGraph,
    max_size: usize,
) -> Result<Vec<Match>, OracleError> {
    let count = host.element_count();
    if count > max_size {
        return Err(OracleError::HostTooLarge {
            count,
            max: max_size,
        });
    }
    if host.has_variables() {
        return Ok(Vec::new());
    }
    let mut matches = Vec::new();
    for (morphism, env) in brute_component(&rule.lhs, host, false) {
        let mut morphism = morphism;
        morphism.bindings = env;
        if !dangling_ok_brute(rule, host, &morphism) {
            continue;
        }
        if !eval_condition(rule.condition.as_ref(), &morphism).holds {
            continue;
        }
        let mut image = IdSets::default();
        collect_image(&morphism, host, &mut image);
        matches.push(Match { morphism, image });
    }
    matches.sort_by(|a, b| a.canonical_key().cmp(&b.canonical_key()));
    matches.dedup();
    Ok(matches)
}

/// Literal reading of the dangling clause, kept separate from the engine's.
fn dangling_ok_brute(rule: &Rule, host: &AhpGraph, m: &Morphism) -> bool {
    let arrow = rule.arrow_connected_lhs_ports();
    let image_edges: BTreeSet<EdgeId> = m.edges.values().copied().collect();
    rule.lhs.top().port_ids().all(|pp| {
        arrow.contains(&pp)
            || host
                .top()
                .edges_at(m.ports[&pp])
                .iter()
                .all(|he| image_edges.contains(he))
    })
}

fn brute_component(
    pattern: &AhpGraph,
    host: &AhpGraph,
    require_cover: bool,
) -> Vec<(Morphism, Bindings)> {
    let pattern_nodes: Vec<NodeId> = pattern.top().node_ids().collect();
    let host_nodes: Vec<NodeId> = host.top().node_ids().collect();
    let mut out = Vec::new();
    for node_map in injective_maps(&pattern_nodes, &host_nodes) {
        brute_ports(pattern, host, require_cover, &node_map, &mut out);
    }
    out
}

/// All injective maps from `from` into `to`, as ordered pairings.
fn injective_maps<T: Copy + Ord>(from: &[T], to: &[T]) -> Vec<BTreeMap<T, T>> {
    fn rec<T: Copy + Ord>(
        from: &[T],
        idx: usize,
        to: &[T],
        used: &mut Vec<bool>,
        acc: &mut BTreeMap<T, T>,
        out: &mut Vec<BTreeMap<T, T>>,
    ) {
        if idx == from.len() {
            out.push(acc.clone());
            return;
        }
        for (slot, candidate) in to.iter().enumerate() {
            if used[slot] {
                continue;
            }
            used[slot] = true;
            acc.insert(from[idx], *candidate);
            rec(from, idx + 1, to, used, acc, out);
            acc.remove(&from[idx]);
            used[slot] = false;
        }
    }
    let mut out = Vec::new();
    if from.len() > to.len() {
        return out;
    }
    rec(
        from,
        0,
        to,
        &mut vec![false; to.len()],
        &mut BTreeMap::new(),
        &mut out,
    );
    out
}

fn brute_ports(
    pattern: &AhpGraph,
    host: &AhpGraph,
    require_cover: bool,
    node_map: &BTreeMap<NodeId, NodeId>,
    out: &mut Vec<(Morphism, Bindings)>,
) {
    // attachment preservation as enumeration constraint: per-node port maps
    let mut per_node: Vec<Vec<BTreeMap<PortId, PortId>>> = Vec::new();
    for (pn, hn) in node_map {
        let p_ports = pattern.top().node_port_ids(*pn).to_vec();
        let h_ports = host.top().node_port_ids(*hn).to_vec();
        let maps = injective_maps(&p_ports, &h_ports);
        if maps.is_empty() && !p_ports.is_empty() {
            return;
        }
        per_node.push(maps);
    }
    let mut combos: Vec<BTreeMap<PortId, PortId>> = vec![BTreeMap::new()];
    for maps in per_node {
        let mut next = Vec::new();
        for combo in &combos {
            for m in &maps {
                let mut merged = combo.clone();
                merged.extend(m.iter().map(|(k, v)| (*k, *v)));
                next.push(merged);
            }
        }
        combos = next;
    }
    for port_map in combos {
        brute_edges(pattern, host, require_cover, node_map, &port_map, out);
    }
}

fn brute_edges(
    pattern: &AhpGraph,
    host: &AhpGraph,
    require_cover: bool,
    node_map: &BTreeMap<NodeId, NodeId>,
    port_map: &BTreeMap<PortId, PortId>,
    out: &mut Vec<(Morphism, Bindings)>,
) {
    let pattern_edges: Vec<EdgeId> = pattern.top().edge_ids().collect();
    let host_edges: Vec<EdgeId> = host.top().edge_ids().collect();
    for edge_map in injective_maps(&pattern_edges, &host_edges) {
        // connection preservation filter
        let connected = edge_map.iter().all(|(pe, he)| {
            let p = pattern.top().edge(*pe).unwrap();
            let h = host.top().edge(*he).unwrap();
            let ends = (port_map[&p.ends.0], port_map[&p.ends.1]);
            if p.record.is_oriented() {
                h.ends == ends
            } else {
                h.ends == ends || h.ends == (ends.1, ends.0)
            }
        });
        if !connected {
            continue;
        }
        brute_ladders(
            pattern,
            host,
            require_cover,
            node_map,
            port_map,
            &edge_map,
            out,
        );
    }
}

#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn brute_ladders(
    pattern: &AhpGraph,
    host: &AhpGraph,
    require_cover: bool,
    node_map: &BTreeMap<NodeId, NodeId>,
    port_map: &BTreeMap<PortId, PortId>,
    edge_map: &BTreeMap<EdgeId, EdgeId>,
    out: &mut Vec<(Morphism, Bindings)>,
) {
    // ladder presence law
    for (pn, hn) in node_map {
        if pattern.ladder(*pn).is_some() != host.ladder(*hn).is_some() {
            return;
        }
    }
    let laddered: Vec<NodeId> = pattern.ladders().map(|(n, _)| n).collect();

    fn rec(
        laddered: &[NodeId],
        idx: usize,
        pattern: &AhpGraph,
        host: &AhpGraph,
        node_map: &BTreeMap<NodeId, NodeId>,
        acc: BTreeMap<NodeId, LadderMap>,
        graph_binds: BTreeMap<String, AhpGraph>,
        done: &mut Vec<(BTreeMap<NodeId, LadderMap>, BTreeMap<String, AhpGraph>)>,
    ) {
        if idx == laddered.len() {
            done.push((acc, graph_binds));
            return;
        }
        let pn = laddered[idx];
        let hn = node_map[&pn];
        let Some(LadderValue::Concrete(host_ladder)) = host.ladder(hn) else {
            return;
        };
        match pattern.ladder(pn).unwrap() {
            LadderValue::Var(var) => {
                if let Some(bound) = graph_binds.get(var) {
                    // equality up to ids, checked with the brute machinery
                    if brute_component(bound, host_ladder, true)
                        .into_iter()
                        .next()
                        .is_none()
                    {
                        return;
                    }
                    let mut acc2 = acc;
                    acc2.insert(pn, LadderMap::Var(var.clone()));
                    rec(
                        laddered,
                        idx + 1,
                        pattern,
                        host,
                        node_map,
                        acc2,
                        graph_binds,
                        done,
                    );
                } else {
                    let mut binds2 = graph_binds;
                    binds2.insert(var.clone(), host_ladder.clone());
                    let mut acc2 = acc;
                    acc2.insert(pn, LadderMap::Var(var.clone()));
                    rec(
                        laddered,
                        idx + 1,
                        pattern,
                        host,
                        node_map,
                        acc2,
                        binds2,
                        done,
                    );
                }
            }
            LadderValue::Concrete(w) => {
                for (sub, sub_env) in brute_component(w, host_ladder, true) {
                    let mut acc2 = acc.clone();
                    acc2.insert(pn, LadderMap::Sub(Box::new(sub)));
                    let mut binds2 = graph_binds.clone();
                    binds2.extend(sub_env.graphs);
                    rec(
                        laddered,
                        idx + 1,
                        pattern,
                        host,
                        node_map,
                        acc2,
                        binds2,
                        done,
                    );
                }
            }
        }
    }

    let mut ladder_choices = Vec::new();
    rec(
        &laddered,
        0,
        pattern,
        host,
        node_map,
        BTreeMap::new(),
        BTreeMap::new(),
        &mut ladder_choices,
    );

    'choice: for (ladder_map, graph_binds) in ladder_choices {
        // cover law
        if require_cover
            && (node_map.len() != host.top().node_count()
                || port_map.len() != host.top().port_count()
                || edge_map.len() != host.top().edge_count())
        {
            continue;
        }
        // record coherence, two-pass: bind plain variables everywhere first,
        // then check literals and expressions under the full environment
        let mut record_pairs: Vec<(Record, Record)> = Vec::new();
        for (pn, hn) in node_map {
            record_pairs.push((
                pattern.top().node(*pn).unwrap().record.clone(),
                host.top().node(*hn).unwrap().record.clone(),
            ));
        }
        for (pp, hp) in port_map {
            record_pairs.push((
                pattern.top().port(*pp).unwrap().record.clone(),
                host.top().port(*hp).unwrap().record.clone(),
            ));
        }
        for (pe, he) in edge_map {
            record_pairs.push((
                pattern.top().edge(*pe).unwrap().record.clone(),
                host.top().edge(*he).unwrap().record.clone(),
            ));
        }
        // include every record pair from ladder sub-morphisms
        collect_sub_record_pairs(pattern, host, &ladder_map, node_map, &mut record_pairs);

        let mut env = Bindings {
            graphs: graph_binds,
            ..Bindings::default()
        };
        let mut alternatives = vec![BTreeMap::<String, String>::new()];
        // enumerate attribute-variable key assignments record by record
        for (p_record, h_record) in &record_pairs {
            if p_record.len() != h_record.len() {
                continue 'choice;
            }
            let mut next = Vec::new();
            for assignment in &alternatives {
                extend_attr_assignments(p_record, h_record, assignment, &mut next);
            }
            if next.is_empty() {
                continue 'choice;
            }
            alternatives = next;
        }

        'assignment: for attrs in alternatives {
            env.attrs = attrs;
            env.values.clear();
            // pass 1: plain variable bindings
            for (p_record, h_record) in &record_pairs {
                for (key, value) in p_record.iter() {
                    let host_key = match key {
                        AttrKey::Attr(name) => name.clone(),
                        AttrKey::Var(var) => env.attrs[var].clone(),
                    };
                    let Some(host_value) = h_record.get(&host_key) else {
                        continue 'assignment;
                    };
                    let AttrValue::Lit(host_lit) = host_value else {
                        continue 'assignment;
                    };
                    if let AttrValue::Var(x) = value {
                        match env.values.get(x) {
                            Some(bound) if bound == host_lit => {}
                            Some(_) => continue 'assignment,
                            None => {
                                env.values.insert(x.clone(), host_lit.clone());
                            }
                        }
                    }
                }
            }
            // pass 2: substituted records must equal image records
            for (p_record, h_record) in &record_pairs {
                match env.substitute_record(p_record) {
                    Ok(s) if &s == h_record => {}
                    _ => continue 'assignment,
                }
            }
            // interface law
            for (pn, hn) in node_map {
                let p_iface: Result<Vec<AttrValue>, _> = pattern
                    .top()
                    .node_interface(*pn)
                    .into_iter()
                    .map(|v| env.substitute_value(v))
                    .collect();
                let Ok(p_iface) = p_iface else {
                    continue 'assignment;
                };
                let h_iface: Vec<AttrValue> = host
                    .top()
                    .node_interface(*hn)
                    .into_iter()
                    .cloned()
                    .collect();
                if p_iface != h_iface {
                    continue 'assignment;
                }
            }
            // interface law inside ladder sub-morphisms
            if !sub_interfaces_ok(pattern, host, &ladder_map, node_map, &env) {
                continue 'assignment;
            }
            out.push((
                Morphism {
                    nodes: node_map.clone(),
                    ports: port_map.clone(),
                    edges: edge_map.clone(),
                    ladders: ladder_map.clone(),
                    bindings: Bindings::default(),
                },
                env.clone(),
            ));
        }
    }
}

fn extend_attr_assignments(
    pattern: &Record,
    host: &Record,
    base: &BTreeMap<String, String>,
    out: &mut Vec<BTreeMap<String, String>>,
) {
    let concrete: BTreeSet<&str> = pattern.keys().filter_map(AttrKey::as_concrete).collect();
    let var_keys: Vec<&String> = pattern
        .keys()
        .filter_map(|k| match k {
            AttrKey::Var(v) => Some(v),
            _ => None,
        })
        .collect();
    let free_host: Vec<String> = host
        .keys()
        .filter_map(AttrKey::as_concrete)
        .filter(|k| !concrete.contains(k))
        .map(|s| s.to_string())
        .collect();

    fn rec(
        var_keys: &[&String],
        idx: usize,
        free_host: &[String],
        used: &mut Vec<bool>,
        acc: BTreeMap<String, String>,
        out: &mut Vec<BTreeMap<String, String>>,
    ) {
        if idx == var_keys.len() {
            out.push(acc);
            return;
        }
        let var = var_keys[idx];
        if let Some(bound) = acc.get(var.as_str()) {
            if let Some(slot) = free_host.iter().position(|k| k == bound) {
                if !used[slot] {
                    used[slot] = true;
                    rec(var_keys, idx + 1, free_host, used, acc, out);
                    used[slot] = false;
                }
            }
            return;
        }
        for slot in 0..free_host.len() {
            if used[slot] {
                continue;
            }
            used[slot] = true;
            let mut acc2 = acc.clone();
            acc2.insert(var.clone(), free_host[slot].clone());
            rec(var_keys, idx + 1, free_host, used, acc2, out);
            used[slot] = false;
        }
    }
    rec(
        &var_keys,
        0,
        &free_host,
        &mut vec![false; free_host.len()],
        base.clone(),
        out,
    );
}

fn collect_sub_record_pairs(
    pattern: &AhpGraph,
    host: &AhpGraph,
    ladder_map: &BTreeMap<NodeId, LadderMap>,
    node_map: &BTreeMap<NodeId, NodeId>,
    out: &mut Vec<(Record, Record)>,
) {
    for (pn, lm) in ladder_map {
        let LadderMap::Sub(sub) = lm else { continue };
        let (Some(LadderValue::Concrete(w)), Some(LadderValue::Concrete(host_ladder))) =
            (pattern.ladder(*pn), host.ladder(node_map[pn]))
        else {
            continue;
        };
        for (a, b) in &sub.nodes {
            out.push((
                w.top().node(*a).unwrap().record.clone(),
                host_ladder.top().node(*b).unwrap().record.clone(),
            ));
        }
        for (a, b) in &sub.ports {
            out.push((
                w.top().port(*a).unwrap().record.clone(),
                host_ladder.top().port(*b).unwrap().record.clone(),
            ));
        }
        for (a, b) in &sub.edges {
            out.push((
                w.top().edge(*a).unwrap().record.clone(),
                host_ladder.top().edge(*b).unwrap().record.clone(),
            ));
        }
        collect_sub_record_pairs(w, host_ladder, &sub.ladders, &sub.nodes, out);
    }
}

fn sub_interfaces_ok(
    pattern: &AhpGraph,
    host: &AhpGraph,
    ladder_map: &BTreeMap<NodeId, LadderMap>,
    node_map: &BTreeMap<NodeId, NodeId>,
    env: &Bindings,
) -> bool {
    for (pn, lm) in ladder_map {
        let LadderMap::Sub(sub) = lm else { continue };
        let (Some(LadderValue::Concrete(w)), Some(LadderValue::Concrete(host_ladder))) =
            (pattern.ladder(*pn), host.ladder(node_map[pn]))
        else {
            continue;
        };
        for (a, b) in &sub.nodes {
            let p_iface: Result<Vec<AttrValue>, _> = w
                .top()
                .node_interface(*a)
                .into_iter()
                .map(|v| env.substitute_value(v))
                .collect();
            let Ok(p_iface) = p_iface else { return false };
            let h_iface: Vec<AttrValue> = host_ladder
                .top()
                .node_interface(*b)
                .into_iter()
                .cloned()
                .collect();
            if p_iface != h_iface {
                return false;
            }
        }
        if !sub_interfaces_ok(w, host_ladder, &sub.ladders, &sub.nodes, env) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{IdGen, PortGraph};
    use crate::rewriting::{ArrowPort, Rule};

    fn lhs_only_rule(lhs: AhpGraph, arrow: Vec<ArrowPort>, condition: Option<Expr>) -> Rule {
        Rule {
            name: "t".into(),
            lhs,
            rhs: AhpGraph::new(),
            arrow,
            condition,
        }
    }

    fn single_node(ids: &mut IdGen, name: &str) -> AhpGraph {
        let mut g = PortGraph::new();
        g.add_node(ids, Record::new(name));
        AhpGraph::flat(g)
    }

    #[test]
    fn bare_node_pattern_matches_each_equally_named_node() {
        let mut ids = IdGen::new();
        let pattern = single_node(&mut ids, "A");
        let mut host = PortGraph::new();
        host.add_node(&mut ids, Record::new("A"));
        host.add_node(&mut ids, Record::new("A"));
        host.add_node(&mut ids, Record::new("B"));
        let host = AhpGraph::flat(host);
        let rule = lhs_only_rule(pattern, vec![], None);
        let found = find_matches(&rule, &host);
        assert_eq!(found.len(), 2);
        let oracle = brute_force_matches(&rule, &host, 12).unwrap();
        assert_eq!(found, oracle);
    }

    #[test]
    fn identity_shaped_pattern_finds_itself() {
        let mut ids = IdGen::new();
        let mut g = PortGraph::new();
        let a = g.add_node(&mut ids, Record::new("A").with("pay", AttrValue::lit(3.0)));
        let p = g.add_port(&mut ids, a, Record::new("p"));
        let b = g.add_node(&mut ids, Record::new("B"));
        let q = g.add_port(&mut ids, b, Record::new("q"));
        g.add_edge(&mut ids, p, q, Record::new("e"));
        let host = AhpGraph::flat(g);
        let rule = Rule::identity("id", &host, &mut ids);
        let found = find_matches(&rule, &host);
        assert_eq!(found.len(), 1);
        assert!(verify_match(&rule, &host, &found[0]).is_ok());
    }

    #[test]
    fn dangling_condition_blocks_unconnected_ports_with_external_edges() {
        // pattern: node A with port p, no arrow connection; the host A's
        // port has an edge to an external B
        let mut ids = IdGen::new();
        let mut pattern = PortGraph::new();
        let pa = pattern.add_node(&mut ids, Record::new("A"));
        pattern.add_port(&mut ids, pa, Record::new("p"));
        let pattern = AhpGraph::flat(pattern);

        let mut host = PortGraph::new();
        let ha = host.add_node(&mut ids, Record::new("A"));
        let hp = host.add_port(&mut ids, ha, Record::new("p"));
        let hb = host.add_node(&mut ids, Record::new("B"));
        let hq = host.add_port(&mut ids, hb, Record::new("q"));
        host.add_edge(&mut ids, hp, hq, Record::new("e"));
        let host = AhpGraph::flat(host);

        let bare = lhs_only_rule(pattern.clone(), vec![], None);
        assert_eq!(find_matches(&bare, &host), vec![]);
        assert_eq!(brute_force_matches(&bare, &host, 12).unwrap(), vec![]);

        // arrow-connecting the port lifts the restriction
        let p_id = pattern.top().port_ids().next().unwrap();
        let connected = lhs_only_rule(pattern, vec![ArrowPort::blackhole([p_id])], None);
        assert_eq!(find_matches(&connected, &host).len(), 1);
    }

    #[test]
    fn value_variables_bind_consistently() {
        let mut ids = IdGen::new();
        let mut pattern = PortGraph::new();
        pattern.add_node(&mut ids, Record::new("A").with("pay", AttrValue::var("X")));
        pattern.add_node(&mut ids, Record::new("B").with("fee", AttrValue::var("X")));
        let pattern = AhpGraph::flat(pattern);
        let rule = lhs_only_rule(pattern, vec![], None);

        let mut host = PortGraph::new();
        host.add_node(&mut ids, Record::new("A").with("pay", AttrValue::lit(3.0)));
        host.add_node(&mut ids, Record::new("B").with("fee", AttrValue::lit(3.0)));
        let host = AhpGraph::flat(host);
        let found = find_matches(&rule, &host);
        assert_eq!(found.len(), 1);
        assert_eq!(
            found[0].morphism.bindings.values.get("X"),
            Some(&BaseValue::number(3.0))
        );

        let mut host2 = PortGraph::new();
        host2.add_node(&mut ids, Record::new("A").with("pay", AttrValue::lit(3.0)));
        host2.add_node(&mut ids, Record::new("B").with("fee", AttrValue::lit(4.0)));
        let host2 = AhpGraph::flat(host2);
        assert_eq!(find_matches(&rule, &host2), vec![]);
        assert_eq!(brute_force_matches(&rule, &host2, 12).unwrap(), vec![]);
    }

    #[test]
    fn attribute_variable_keys_explore_assignments() {
        let mut ids = IdGen::new();
        let mut pattern = PortGraph::new();
        pattern.add_node(
            &mut ids,
            Record::new("A").with_var_key("K", AttrValue::lit(1.0)),
        );
        let pattern = AhpGraph::flat(pattern);
        let rule = lhs_only_rule(pattern, vec![], None);

        let mut host = PortGraph::new();
        host.add_node(
            &mut ids,
            Record::new("A")
                .with("x", AttrValue::lit(1.0))
                .with("y", AttrValue::lit(1.0)),
        );
        let host = AhpGraph::flat(host);
        // pattern has 2 keys, host has 3: schema sizes differ, no match
        assert_eq!(find_matches(&rule, &host), vec![]);

        let mut host2 = PortGraph::new();
        host2.add_node(&mut ids, Record::new("A").with("x", AttrValue::lit(1.0)));
        let host2 = AhpGraph::flat(host2);
        let found = find_matches(&rule, &host2);
        assert_eq!(found.len(), 1);
        assert_eq!(
            found[0].morphism.bindings.attrs.get("K"),
            Some(&"x".to_string())
        );
        assert_eq!(found, brute_force_matches(&rule, &host2, 12).unwrap());
    }

    #[test]
    fn expressions_in_patterns_check_after_binding() {
        // node B binds X; node A requires pay == X + 1; order-independent
        let mut ids = IdGen::new();
        let mut pattern = PortGraph::new();
        pattern.add_node(
            &mut ids,
            Record::new("A").with(
                "pay",
                Expr::binary(crate::expr::BinOp::Add, Expr::var("X"), Expr::lit(1.0)),
            ),
        );
        pattern.add_node(&mut ids, Record::new("B").with("fee", AttrValue::var("X")));
        let pattern = AhpGraph::flat(pattern);
        let rule = lhs_only_rule(pattern, vec![], None);

        let mut host = PortGraph::new();
        host.add_node(&mut ids, Record::new("A").with("pay", AttrValue::lit(4.0)));
        host.add_node(&mut ids, Record::new("B").with("fee", AttrValue::lit(3.0)));
        let host = AhpGraph::flat(host);
        let found = find_matches(&rule, &host);
        assert_eq!(found.len(), 1);
        assert_eq!(found, brute_force_matches(&rule, &host, 12).unwrap());
    }

    fn laddered_node(ids: &mut IdGen, name: &str, ladder: LadderValue) -> AhpGraph {
        let mut top = PortGraph::new();
        let n = top.add_node(ids, Record::new(name));
        top.add_port(ids, n, Record::new("p"));
        let mut g = AhpGraph::flat(top);
        g.set_ladder(n, ladder);
        g
    }

    fn flat_with_free_ports(ids: &mut IdGen, names: &[&str]) -> AhpGraph {
        let mut g = PortGraph::new();
        let n = g.add_node(ids, Record::new("Inner"));
        for name in names {
            g.add_port(ids, n, Record::new(*name));
        }
        AhpGraph::flat(g)
    }

    #[test]
    fn match_ladder_binds_graph_variable_when_interfaces_agree() {
        let mut ids = IdGen::new();
        let host_ladder = flat_with_free_ports(&mut ids, &["p"]);
        let env = Bindings::default();
        let got = match_ladder(
            &LadderValue::Var("X".into()),
            &["p".to_string()],
            &host_ladder,
            &env,
        );
        let (map, env2) = got.expect("binds");
        assert_eq!(map, LadderMap::Var("X".into()));
        assert_eq!(env2.graphs.get("X"), Some(&host_ladder));
    }

    #[test]
    fn match_ladder_rejects_interface_arity_mismatch() {
        let mut ids = IdGen::new();
        let host_ladder = flat_with_free_ports(&mut ids, &["p", "q"]);
        let got = match_ladder(
            &LadderValue::Var("X".into()),
            &["p".to_string()],
            &host_ladder,
            &Bindings::default(),
        );
        assert!(got.is_none());
    }

    #[test]
    fn match_ladder_concrete_identity() {
        let mut ids = IdGen::new();
        let ladder = flat_with_free_ports(&mut ids, &["p"]);
        let (host_copy, _) = ladder.fresh_copy(&mut ids);
        let got = match_ladder(
            &LadderValue::Concrete(ladder.clone()),
            &["p".to_string()],
            &host_copy,
            &Bindings::default(),
        );
        let (map, _) = got.expect("matches");
        match map {
            LadderMap::Sub(sub) => {
                assert_eq!(sub.nodes.len(), 1);
                assert_eq!(sub.ports.len(), 1);
            }
            LadderMap::Var(_) => panic!("expected sub-morphism"),
        }
    }

    #[test]
    fn hierarchical_match_recurses_and_shares_bindings() {
        let mut ids = IdGen::new();
        // pattern: node N with concrete ladder whose record uses X; host has
        // the same shape with X = 7 both at top and in the ladder
        let mut pat_ladder = PortGraph::new();
        let pl = pat_ladder.add_node(
            &mut ids,
            Record::new("Inner").with("v", AttrValue::var("X")),
        );
        pat_ladder.add_port(&mut ids, pl, Record::new("p"));
        let mut pattern_top = PortGraph::new();
        let pn = pattern_top.add_node(&mut ids, Record::new("N").with("v", AttrValue::var("X")));
        pattern_top.add_port(&mut ids, pn, Record::new("p"));
        let mut pattern = AhpGraph::flat(pattern_top);
        pattern.set_ladder(pn, LadderValue::Concrete(AhpGraph::flat(pat_ladder)));

        let mut host_ladder = PortGraph::new();
        let hl = host_ladder.add_node(
            &mut ids,
            Record::new("Inner").with("v", AttrValue::lit(7.0)),
        );
        host_ladder.add_port(&mut ids, hl, Record::new("p"));
        let mut host_top = PortGraph::new();
        let hn = host_top.add_node(&mut ids, Record::new("N").with("v", AttrValue::lit(7.0)));
        host_top.add_port(&mut ids, hn, Record::new("p"));
        let mut host = AhpGraph::flat(host_top);
        host.set_ladder(hn, LadderValue::Concrete(AhpGraph::flat(host_ladder)));

        let rule = lhs_only_rule(pattern, vec![], None);
        let found = find_matches(&rule, &host);
        assert_eq!(found.len(), 1);
        assert_eq!(
            found[0].morphism.bindings.values.get("X"),
            Some(&BaseValue::number(7.0))
        );
        assert_eq!(found, brute_force_matches(&rule, &host, 12).unwrap());

        // mismatched inner value: the shared binding must kill the match
        let mut host2 = host.clone();
        let inner_node = {
            let LadderValue::Concrete(l) = host2.ladder(hn).unwrap() else {
                unreachable!()
            };
            l.top().node_ids().next().unwrap()
        };
        if let Some(LadderValue::Concrete(l)) = host2.ladder(hn).cloned() {
            let mut l2 = l;
            l2.top_mut()
                .node_record_mut(inner_node)
                .unwrap()
                .set("v", AttrValue::lit(8.0));
            host2.set_ladder(hn, LadderValue::Concrete(l2));
        }
        assert_eq!(find_matches(&rule, &host2), vec![]);
    }

    #[test]
    fn unladdered_pattern_node_rejects_laddered_host_node() {
        let mut ids = IdGen::new();
        let pattern = {
            let mut top = PortGraph::new();
            let n = top.add_node(&mut ids, Record::new("N"));
            top.add_port(&mut ids, n, Record::new("p"));
            AhpGraph::flat(top)
        };
        let inner = flat_with_free_ports(&mut ids, &["p"]);
        let host = laddered_node(&mut ids, "N", LadderValue::Concrete(inner));
        let rule = lhs_only_rule(pattern, vec![], None);
        assert_eq!(find_matches(&rule, &host), vec![]);
        assert_eq!(brute_force_matches(&rule, &host, 16).unwrap(), vec![]);
    }

    #[test]
    fn eval_condition_examples() {
        let mut m = Morphism::default();
        m.bindings
            .values
            .insert("pay".into(), BaseValue::number(3.0));
        let cond = Expr::binary(crate::expr::BinOp::Gt, Expr::var("pay"), Expr::lit(2.0));
        assert!(eval_condition(Some(&cond), &m).holds);
        assert!(eval_condition(None, &m).holds);

        let unbound = Expr::binary(crate::expr::BinOp::Gt, Expr::var("ghost"), Expr::lit(2.0));
        let res = eval_condition(Some(&unbound), &m);
        assert!(!res.holds);
        assert!(res.diagnostic.is_some());
    }

    #[test]
    fn brute_force_rejects_oversize_hosts() {
        let mut ids = IdGen::new();
        let mut host = PortGraph::new();
        for i in 0..5 {
            let n = host.add_node(&mut ids, Record::new(format!("N{i}")));
            host.add_port(&mut ids, n, Record::new("p"));
            host.add_port(&mut ids, n, Record::new("q"));
        }
        let host = AhpGraph::flat(host);
        let rule = lhs_only_rule(single_node(&mut ids, "N0"), vec![], None);
        assert!(matches!(
            brute_force_matches(&rule, &host, 12),
            Err(OracleError::HostTooLarge { count: 15, max: 12 })
        ));
    }

    #[test]
    fn empty_pattern_has_exactly_one_match() {
        let mut ids = IdGen::new();
        let host = single_node(&mut ids, "A");
        let rule = lhs_only_rule(AhpGraph::new(), vec![], None);
        let found = find_matches(&rule, &host);
        assert_eq!(found.len(), 1);
        assert!(found[0].morphism.nodes.is_empty());
        assert_eq!(found, brute_force_matches(&rule, &host, 12).unwrap());
    }

    #[test]
    fn pattern_larger_than_host_finds_nothing() {
        let mut ids = IdGen::new();
        let mut pattern = PortGraph::new();
        pattern.add_node(&mut ids, Record::new("A"));
        pattern.add_node(&mut ids, Record::new("A"));
        let pattern = AhpGraph::flat(pattern);
        let host = single_node(&mut ids, "A");
        let rule = lhs_only_rule(pattern, vec![], None);
        assert_eq!(find_matches(&rule, &host), vec![]);
        assert_eq!(brute_force_matches(&rule, &host, 12).unwrap(), vec![]);
    }

    #[test]
    fn matches_are_deterministically_ordered() {
        let mut ids = IdGen::new();
        let pattern = single_node(&mut ids, "A");
        let mut host = PortGraph::new();
        for _ in 0..3 {
            host.add_node(&mut ids, Record::new("A"));
        }
        let host = AhpGraph::flat(host);
        let rule = lhs_only_rule(pattern, vec![], None);
        let a = find_matches(&rule, &host);
        let b = find_matches(&rule, &host);
        assert_eq!(a, b);
        let keys: Vec<_> = a.iter().map(|m| m.canonical_key().0).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn parallel_pattern_edges_need_parallel_host_edges() {
        let build = |ids: &mut IdGen, copies: usize| {
            let mut g = PortGraph::new();
            let a = g.add_node(ids, Record::new("A"));
            let p = g.add_port(ids, a, Record::new("p"));
            let b = g.add_node(ids, Record::new("B"));
            let q = g.add_port(ids, b, Record::new("q"));
            for _ in 0..copies {
                g.add_edge(ids, p, q, Record::new("e"));
            }
            AhpGraph::flat(g)
        };
        let mut ids = IdGen::new();
        let pattern = build(&mut ids, 2);
        let arrow: Vec<crate::rewriting::ArrowPort> = pattern
            .top()
            .port_ids()
            .map(|p| crate::rewriting::ArrowPort::blackhole([p]))
            .collect();
        let rule = lhs_only_rule(pattern, arrow, None);

        let too_few = build(&mut ids, 1);
        assert_eq!(find_matches(&rule, &too_few), vec![]);
        assert_eq!(brute_force_matches(&rule, &too_few, 12).unwrap(), vec![]);

        let enough = build(&mut ids, 2);
        let found = find_matches(&rule, &enough);
        // the two parallel edges can be assigned either way around
        assert_eq!(found.len(), 2);
        assert_eq!(found, brute_force_matches(&rule, &enough, 12).unwrap());
    }

    #[test]
    fn same_named_ports_may_cross_positions_when_records_force_it() {
        // pattern ports [p{w:1}, p{w:2}] against host ports [p{w:2}, p{w:1}]:
        // the interface name lists agree positionally, and the record-coherent
        // port assignment is the crossing one
        let build = |ids: &mut IdGen, first: f64, second: f64| {
            let mut g = PortGraph::new();
            let a = g.add_node(ids, Record::new("A"));
            g.add_port(ids, a, Record::new("p").with("w", AttrValue::lit(first)));
            g.add_port(ids, a, Record::new("p").with("w", AttrValue::lit(second)));
            AhpGraph::flat(g)
        };
        let mut ids = IdGen::new();
        let pattern = build(&mut ids, 1.0, 2.0);
        let rule = lhs_only_rule(pattern.clone(), vec![], None);

        let crossed = build(&mut ids, 2.0, 1.0);
        let found = find_matches(&rule, &crossed);
        assert_eq!(found.len(), 1);
        let m = &found[0];
        let p_ports = rule
            .lhs
            .top()
            .node_port_ids(rule.lhs.top().node_ids().next().unwrap())
            .to_vec();
        let h_ports = crossed
            .top()
            .node_port_ids(crossed.top().node_ids().next().unwrap())
            .to_vec();
        assert_eq!(m.morphism.ports[&p_ports[0]], h_ports[1]);
        assert_eq!(m.morphism.ports[&p_ports[1]], h_ports[0]);
        assert_eq!(found, brute_force_matches(&rule, &crossed, 12).unwrap());
    }

    #[test]
    fn differing_interface_orders_do_not_match() {
        // pattern interface [p, q] never matches host interface [q, p]
        let build = |ids: &mut IdGen, names: [&str; 2]| {
            let mut g = PortGraph::new();
            let a = g.add_node(ids, Record::new("A"));
            g.add_port(ids, a, Record::new(names[0]));
            g.add_port(ids, a, Record::new(names[1]));
            AhpGraph::flat(g)
        };
        let mut ids = IdGen::new();
        let pattern = build(&mut ids, ["p", "q"]);
        let rule = lhs_only_rule(pattern, vec![], None);
        let reversed = build(&mut ids, ["q", "p"]);
        assert_eq!(find_matches(&rule, &reversed), vec![]);
        assert_eq!(brute_force_matches(&rule, &reversed, 12).unwrap(), vec![]);
        let straight = build(&mut ids, ["p", "q"]);
        assert_eq!(find_matches(&rule, &straight).len(), 1);
    }

    #[test]
    fn concrete_pattern_ladder_must_cover_the_image_ladder() {
        let mut ids = IdGen::new();
        let small = flat_with_free_ports(&mut ids, &["p"]);
        let pattern = laddered_node(&mut ids, "N", LadderValue::Concrete(small));

        // host ladder with one extra interior node: no total-and-onto
        // sub-morphism exists
        let mut big = PortGraph::new();
        let inner = big.add_node(&mut ids, Record::new("Inner"));
        big.add_port(&mut ids, inner, Record::new("p"));
        let spare = big.add_node(&mut ids, Record::new("Spare"));
        let sp = big.add_port(&mut ids, spare, Record::new("s"));
        big.add_edge(&mut ids, sp, sp, Record::new("loop"));
        let host = laddered_node(&mut ids, "N", LadderValue::Concrete(AhpGraph::flat(big)));

        let rule = lhs_only_rule(pattern, vec![], None);
        assert_eq!(find_matches(&rule, &host), vec![]);
        assert_eq!(brute_force_matches(&rule, &host, 16).unwrap(), vec![]);
    }

    #[test]
    fn oriented_edges_match_direction_sensitively() {
        use crate::record::ORIENTED_ATTR;
        let mut ids = IdGen::new();
        let oriented = |ids: &mut IdGen, reversed: bool| {
            let mut g = PortGraph::new();
            let a = g.add_node(ids, Record::new("A"));
            let p = g.add_port(ids, a, Record::new("p"));
            let b = g.add_node(ids, Record::new("B"));
            let q = g.add_port(ids, b, Record::new("q"));
            let record = Record::new("e").with(ORIENTED_ATTR, AttrValue::lit(true));
            if reversed {
                g.add_edge(ids, q, p, record);
            } else {
                g.add_edge(ids, p, q, record);
            }
            AhpGraph::flat(g)
        };
        let pattern = oriented(&mut ids, false);
        let arrow: Vec<crate::rewriting::ArrowPort> = pattern
            .top()
            .port_ids()
            .map(|p| crate::rewriting::ArrowPort::blackhole([p]))
            .collect();
        let rule = lhs_only_rule(pattern, arrow, None);

        let same_direction = oriented(&mut ids, false);
        assert_eq!(find_matches(&rule, &same_direction).len(), 1);
        assert_eq!(
            find_matches(&rule, &same_direction),
            brute_force_matches(&rule, &same_direction, 12).unwrap()
        );
        let opposite = oriented(&mut ids, true);
        assert_eq!(find_matches(&rule, &opposite), vec![]);
        assert_eq!(brute_force_matches(&rule, &opposite, 12).unwrap(), vec![]);
    }

    #[test]
    fn unoriented_pattern_edge_rejects_oriented_host_edge() {
        use crate::record::ORIENTED_ATTR;
        let mut ids = IdGen::new();
        let mut pattern = PortGraph::new();
        let a = pattern.add_node(&mut ids, Record::new("A"));
        let p = pattern.add_port(&mut ids, a, Record::new("p"));
        let b = pattern.add_node(&mut ids, Record::new("B"));
        let q = pattern.add_port(&mut ids, b, Record::new("q"));
        pattern.add_edge(&mut ids, p, q, Record::new("e"));
        let pattern = AhpGraph::flat(pattern);
        let arrow: Vec<crate::rewriting::ArrowPort> = pattern
            .top()
            .port_ids()
            .map(|p| crate::rewriting::ArrowPort::blackhole([p]))
            .collect();
        let rule = lhs_only_rule(pattern, arrow, None);

        let mut host = PortGraph::new();
        let a = host.add_node(&mut ids, Record::new("A"));
        let p = host.add_port(&mut ids, a, Record::new("p"));
        let b = host.add_node(&mut ids, Record::new("B"));
        let q = host.add_port(&mut ids, b, Record::new("q"));
        host.add_edge(
            &mut ids,
            p,
            q,
            Record::new("e").with(ORIENTED_ATTR, AttrValue::lit(true)),
        );
        let host = AhpGraph::flat(host);
        // the record key sets differ, so this cannot match
        assert_eq!(find_matches(&rule, &host), vec![]);
        assert_eq!(brute_force_matches(&rule, &host, 12).unwrap(), vec![]);
    }

    #[test]
    fn isomorphic_ignores_ids_but_not_records() {
        let mut ids = IdGen::new();
        let mut g = PortGraph::new();
        let a = g.add_node(&mut ids, Record::new("A").with("pay", AttrValue::lit(1.0)));
        let p = g.add_port(&mut ids, a, Record::new("p"));
        let b = g.add_node(&mut ids, Record::new("B"));
        let q = g.add_port(&mut ids, b, Record::new("q"));
        g.add_edge(&mut ids, p, q, Record::new("e"));
        let g = AhpGraph::flat(g);
        let (copy, _) = g.fresh_copy(&mut ids);
        assert!(isomorphic(&g, &copy));

        let mut other = copy.clone();
        let n = other.top().node_ids().next().unwrap();
        other
            .top_mut()
            .node_record_mut(n)
            .unwrap()
            .set("pay", AttrValue::lit(2.0));
        // one record differs (whichever node n was, records no longer align)
        assert!(
            !isomorphic(&g, &other) || {
                // node ids are ordered, n may be the B node without pay
                other.top().node(n).unwrap().record.get("pay").is_none()
            }
        );
    }
}
