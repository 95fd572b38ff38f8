//! JSON mirror of graphs and matches. Stable schema: a graph is an object
//! with `nodes`, `ports`, `edges` and `ladders`; every element carries its
//! `record`. Deterministic key order via sorted maps.

use ahp_core::hierarchy::{AhpGraph, LadderValue};
use ahp_core::matching::{LadderMap, Match, Morphism};
use ahp_core::record::{AttrValue, Record};
use ahp_core::value::BaseValue;
use serde_json::{json, Map, Value};

pub fn base_value_to_json(v: &BaseValue) -> Value {
    match v {
        BaseValue::Number(n) => json!(n),
        BaseValue::Str(s) => json!(s),
        BaseValue::Bool(b) => json!(b),
    }
}

pub fn attr_value_to_json(v: &AttrValue) -> Value {
    match v {
        AttrValue::Lit(value) => base_value_to_json(value),
        AttrValue::Var(name) => json!({ "var": name }),
        AttrValue::Expr(e) => json!({ "expr": e.to_string() }),
    }
}

pub fn record_to_json(r: &Record) -> Value {
    let mut map = Map::new();
    for (key, value) in r.iter() {
        map.insert(key.to_string(), attr_value_to_json(value));
    }
    Value::Object(map)
}

pub fn graph_to_json(g: &AhpGraph) -> Value {
    let nodes: Vec<Value> = g
        .top()
        .nodes()
        .map(|(id, entry)| {
            json!({
                "id": id.0,
                "record": record_to_json(&entry.record),
                "ports": entry.ports.iter().map(|p| p.0).collect::<Vec<_>>(),
            })
        })
        .collect();
    let ports: Vec<Value> = g
        .top()
        .ports()
        .map(|(id, entry)| {
            json!({
                "id": id.0,
                "record": record_to_json(&entry.record),
                "node": entry.node.0,
            })
        })
        .collect();
    let edges: Vec<Value> = g
        .top()
        .edges()
        .map(|(id, entry)| {
            json!({
                "id": id.0,
                "record": record_to_json(&entry.record),
                "ends": [entry.ends.0.0, entry.ends.1.0],
                "oriented": entry.record.is_oriented(),
            })
        })
        .collect();
    let mut ladders = Map::new();
    for (node, value) in g.ladders() {
        let v = match value {
            LadderValue::Var(var) => json!({ "var": var }),
            LadderValue::Concrete(w) => graph_to_json(w),
        };
        ladders.insert(node.0.to_string(), v);
    }
    json!({
        "nodes": nodes,
        "ports": ports,
        "edges": edges,
        "ladders": ladders,
    })
}

fn morphism_to_json(m: &Morphism) -> Value {
    let map_ids = |it: Vec<(u64, u64)>| -> Value {
        let mut obj = Map::new();
        for (k, v) in it {
            obj.insert(k.to_string(), json!(v));
        }
        Value::Object(obj)
    };
    let mut ladders = Map::new();
    for (node, ladder) in &m.ladders {
        let v = match ladder {
            LadderMap::Var(var) => json!({ "var": var }),
            LadderMap::Sub(sub) => morphism_to_json(sub),
        };
        ladders.insert(node.0.to_string(), v);
    }
    json!({
        "nodes": map_ids(m.nodes.iter().map(|(a, b)| (a.0, b.0)).collect()),
        "ports": map_ids(m.ports.iter().map(|(a, b)| (a.0, b.0)).collect()),
        "edges": map_ids(m.edges.iter().map(|(a, b)| (a.0, b.0)).collect()),
        "ladders": ladders,
    })
}

pub fn match_to_json(m: &Match) -> Value {
    let bindings = &m.morphism.bindings;
    let mut values = Map::new();
    for (k, v) in &bindings.values {
        values.insert(k.clone(), base_value_to_json(v));
    }
    let mut attrs = Map::new();
    for (k, v) in &bindings.attrs {
        attrs.insert(k.clone(), json!(v));
    }
    let mut graphs = Map::new();
    for (k, g) in &bindings.graphs {
        graphs.insert(k.clone(), graph_to_json(g));
    }
    json!({
        "morphism": morphism_to_json(&m.morphism),
        "bindings": { "values": values, "attrs": attrs, "graphs": graphs },
        "image": {
            "nodes": m.image.nodes.iter().map(|n| n.0).collect::<Vec<_>>(),
            "ports": m.image.ports.iter().map(|p| p.0).collect::<Vec<_>>(),
            "edges": m.image.edges.iter().map(|e| e.0).collect::<Vec<_>>(),
        },
    })
}
