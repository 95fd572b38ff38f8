//! Canonical document emission. Deterministic: labels are generated in
//! element-id order, ladders are written inline, attribute keys are sorted.
//! Emitting is a fixpoint — emitting a parsed emission reproduces the text
//! byte for byte — and parsing an emission reproduces the document exactly,
//! including element ids.

use crate::document::Document;
use ahp_core::graph::{NodeId, PortGraph, PortId};
use ahp_core::hierarchy::{AhpGraph, LadderValue};
use ahp_core::record::{AttrKey, AttrValue, Record, NAME_ATTR, ORIENTED_ATTR};
use ahp_core::rewriting::{ArrowKind, Rule};
use ahp_core::value::BaseValue;
use std::collections::BTreeMap;
use std::fmt::Write;

pub fn emit_document(doc: &Document) -> String {
    let mut out = String::new();
    emit_signature(doc, &mut out);
    for (name, graph) in &doc.graphs {
        writeln!(out, "graph {name} {{").unwrap();
        emit_body(graph, "n", 1, &mut out);
        out.push_str("}\n\n");
    }
    for rule in &doc.rules {
        emit_rule(rule, &mut out);
    }
    for (name, strategy) in &doc.strategies {
        writeln!(out, "strategy {name} {{ {strategy} }}\n").unwrap();
    }
    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}

fn emit_signature(doc: &Document, out: &mut String) {
    let sig = &doc.signature;
    if sig.attributes.is_empty()
        && sig.attribute_vars.is_empty()
        && sig.value_vars.is_empty()
        && sig.graph_vars.is_empty()
    {
        return;
    }
    out.push_str("signature {\n");
    let list = |names: &std::collections::BTreeSet<String>| -> String {
        names.iter().cloned().collect::<Vec<_>>().join(", ")
    };
    if !sig.attributes.is_empty() {
        writeln!(out, "  attrs {};", list(&sig.attributes)).unwrap();
    }
    if !sig.attribute_vars.is_empty() {
        writeln!(out, "  attr_vars {};", list(&sig.attribute_vars)).unwrap();
    }
    if !sig.value_vars.is_empty() {
        writeln!(out, "  value_vars {};", list(&sig.value_vars)).unwrap();
    }
    if !sig.graph_vars.is_empty() {
        let vars: Vec<String> = sig
            .graph_vars
            .iter()
            .map(|(name, iface)| format!("{name}[{}]", iface.join(", ")))
            .collect();
        writeln!(out, "  graph_vars {};", vars.join(", ")).unwrap();
    }
    out.push_str("}\n\n");
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

/// Writes the elements of one component graph; node labels are
/// `{prefix}{k}` in node-id order.
fn emit_body(g: &AhpGraph, prefix: &str, depth: usize, out: &mut String) {
    let labels = body_labels(g, prefix);
    for (k, (node, entry)) in g.top().nodes().enumerate() {
        indent(out, depth);
        write!(
            out,
            "node {}{}: {}",
            prefix,
            k + 1,
            name_text(entry.record.name())
        )
        .unwrap();
        let attrs = attr_text(&entry.record, false);
        if !attrs.is_empty() {
            write!(out, " {{ {attrs} }}").unwrap();
        }
        if !entry.ports.is_empty() {
            let ports: Vec<String> = entry
                .ports
                .iter()
                .map(|p| {
                    let record = &g.top().port(*p).unwrap().record;
                    let mut s = name_text(record.name());
                    let attrs = attr_text(record, false);
                    if !attrs.is_empty() {
                        s.push_str(&format!(" {{ {attrs} }}"));
                    }
                    s
                })
                .collect();
            write!(out, " ports [{}]", ports.join(", ")).unwrap();
        }
        match g.ladder(node) {
            None => {}
            Some(LadderValue::Var(var)) => write!(out, " ladder {var}").unwrap(),
            Some(LadderValue::Concrete(w)) => {
                out.push_str(" ladder {\n");
                emit_body(w, prefix, depth + 1, out);
                indent(out, depth);
                out.push('}');
            }
        }
        out.push_str(";\n");
    }
    for (_, entry) in g.top().edges() {
        indent(out, depth);
        let op = if entry.record.is_oriented() {
            "->"
        } else {
            "--"
        };
        write!(
            out,
            "edge {} {op} {}",
            port_ref_text(g.top(), entry.ends.0, &labels),
            port_ref_text(g.top(), entry.ends.1, &labels)
        )
        .unwrap();
        let attrs = edge_attr_text(&entry.record);
        if !attrs.is_empty() {
            write!(out, " {{ {attrs} }}").unwrap();
        }
        out.push_str(";\n");
    }
}

fn body_labels(g: &AhpGraph, prefix: &str) -> BTreeMap<NodeId, String> {
    g.top()
        .node_ids()
        .enumerate()
        .map(|(k, n)| (n, format!("{prefix}{}", k + 1)))
        .collect()
}

fn port_ref_text(g: &PortGraph, port: PortId, labels: &BTreeMap<NodeId, String>) -> String {
    let node = g.attach(port);
    let name = g.port_name_key(port);
    let same_named: Vec<PortId> = g
        .node_port_ids(node)
        .iter()
        .copied()
        .filter(|p| g.port_name_key(*p) == name)
        .collect();
    let name_part = if is_bare_ident(&name) {
        name.clone()
    } else {
        format!("{name:?}")
    };
    if same_named.len() == 1 {
        format!("{}.{}", labels[&node], name_part)
    } else {
        let index = same_named.iter().position(|p| *p == port).unwrap() + 1;
        format!("{}.{}#{}", labels[&node], name_part, index)
    }
}

fn is_bare_ident(s: &str) -> bool {
    !s.is_empty()
        && s.bytes()
            .next()
            .map(|b| b.is_ascii_alphabetic() || b == b'_')
            .unwrap_or(false)
        && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
        && s != "true"
        && s != "false"
}

fn name_text(name: Option<&AttrValue>) -> String {
    match name {
        Some(AttrValue::Lit(BaseValue::Str(s))) if is_bare_ident(s) => s.clone(),
        Some(AttrValue::Var(x)) => x.clone(),
        Some(other) => other.to_string(),
        None => "\"\"".to_string(),
    }
}

fn value_text(v: &AttrValue) -> String {
    v.to_string()
}

/// Attributes other than Name and Oriented, sorted by key.
fn attr_text(record: &Record, _include_name: bool) -> String {
    record
        .iter()
        .filter(|(k, _)| {
            !matches!(k, AttrKey::Attr(name) if name == NAME_ATTR || name == ORIENTED_ATTR)
        })
        .map(|(k, v)| format!("{k}: {}", value_text(v)))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Edge attributes; the Name is included unless it is the default.
fn edge_attr_text(record: &Record) -> String {
    let mut parts = Vec::new();
    match record.name() {
        Some(AttrValue::Lit(BaseValue::Str(s))) if s == "edge" => {}
        Some(name) => parts.push(format!("Name: {}", value_text(name))),
        None => {}
    }
    let rest = attr_text(record, false);
    if !rest.is_empty() {
        parts.push(rest);
    }
    parts.join(", ")
}

fn emit_rule(rule: &Rule, out: &mut String) {
    writeln!(out, "rule {} {{", rule.name).unwrap();
    out.push_str("  lhs {\n");
    emit_body(&rule.lhs, "l", 2, out);
    out.push_str("  }\n");
    out.push_str("  rhs {\n");
    emit_body(&rule.rhs, "r", 2, out);
    out.push_str("  }\n");
    if !rule.arrow.is_empty() {
        let l_labels = body_labels(&rule.lhs, "l");
        let r_labels = body_labels(&rule.rhs, "r");
        out.push_str("  arrow {\n");
        for a in &rule.arrow {
            indent(out, 2);
            match a.kind {
                ArrowKind::Bridge => {
                    let rs: Vec<String> = a
                        .r_ports
                        .iter()
                        .map(|p| port_ref_text(rule.rhs.top(), *p, &r_labels))
                        .collect();
                    writeln!(
                        out,
                        "bridge {} -> {};",
                        port_ref_text(rule.lhs.top(), a.l_ports[0], &l_labels),
                        rs.join(", ")
                    )
                    .unwrap();
                }
                ArrowKind::Wire => {
                    writeln!(
                        out,
                        "wire {} -- {};",
                        port_ref_text(rule.lhs.top(), a.l_ports[0], &l_labels),
                        port_ref_text(rule.lhs.top(), a.l_ports[1], &l_labels)
                    )
                    .unwrap();
                }
                ArrowKind::Blackhole => {
                    let ls: Vec<String> = a
                        .l_ports
                        .iter()
                        .map(|p| port_ref_text(rule.lhs.top(), *p, &l_labels))
                        .collect();
                    writeln!(out, "blackhole {};", ls.join(", ")).unwrap();
                }
            }
        }
        out.push_str("  }\n");
    }
    if let Some(cond) = &rule.condition {
        writeln!(out, "  when {cond};").unwrap();
    }
    out.push_str("}\n\n");
}
