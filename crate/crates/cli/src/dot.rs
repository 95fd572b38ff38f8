//! DOT rendering for inspection: nodes become clusters containing their
//! ports, ladders become nested clusters down to the requested depth, and
//! deeper hierarchy is summarized by a badge.

use ahp_core::graph::PortGraph;
use ahp_core::hierarchy::{AhpGraph, LadderValue};
use std::fmt::Write;

pub fn export_dot(g: &AhpGraph, depth: u32) -> String {
    let mut out = String::new();
    out.push_str("digraph model {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=circle, fontsize=9, width=0.3, fixedsize=false];\n");
    render(g, depth, 1, &mut out);
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn render(g: &AhpGraph, remaining: u32, level: usize, out: &mut String) {
    for (node, entry) in g.top().nodes() {
        indent(out, level);
        writeln!(out, "subgraph cluster_{node} {{").unwrap();
        indent(out, level + 1);
        let name = entry
            .record
            .name()
            .map(|n| n.name_key())
            .unwrap_or_default();
        writeln!(out, "label=\"{}\";", escape(&name)).unwrap();
        for p in &entry.ports {
            let pname = g.top().port_name_key(*p);
            indent(out, level + 1);
            writeln!(out, "{p} [label=\"{}\"];", escape(&pname)).unwrap();
        }
        if entry.ports.is_empty() {
            // an anchor keeps empty clusters visible
            indent(out, level + 1);
            writeln!(out, "{node}_anchor [shape=point, style=invis];").unwrap();
        }
        match g.ladder(node) {
            None => {}
            Some(LadderValue::Var(var)) => {
                indent(out, level + 1);
                writeln!(
                    out,
                    "{node}_ladder [shape=note, label=\"ladder: {}\"];",
                    escape(var)
                )
                .unwrap();
            }
            Some(LadderValue::Concrete(w)) => {
                if remaining > 0 {
                    indent(out, level + 1);
                    writeln!(out, "subgraph cluster_{node}_ladder {{").unwrap();
                    indent(out, level + 2);
                    writeln!(out, "label=\"ladder\";").unwrap();
                    indent(out, level + 2);
                    writeln!(out, "style=dashed;").unwrap();
                    render(w, remaining - 1, level + 2, out);
                    indent(out, level + 1);
                    out.push_str("}\n");
                } else {
                    indent(out, level + 1);
                    writeln!(
                        out,
                        "{node}_ladder [shape=note, label=\"ladder: {} more level(s)\"];",
                        w.level() + 1
                    )
                    .unwrap();
                }
            }
        }
        indent(out, level);
        out.push_str("}\n");
    }
    render_edges(g.top(), level, out);
}

fn render_edges(g: &PortGraph, level: usize, out: &mut String) {
    for (edge, entry) in g.edges() {
        let name = g
            .edge(edge)
            .and_then(|e| e.record.name())
            .map(|n| n.name_key())
            .unwrap_or_default();
        let dir = if entry.record.is_oriented() {
            "forward"
        } else {
            "none"
        };
        indent(out, level);
        writeln!(
            out,
            "{} -> {} [dir={dir}, label=\"{}\", fontsize=8];",
            entry.ends.0,
            entry.ends.1,
            escape(&name)
        )
        .unwrap();
    }
}
