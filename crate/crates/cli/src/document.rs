//! A parsed model document: signature plus named graphs, rules and
//! strategies, in declaration order.

use ahp_core::hierarchy::AhpGraph;
use ahp_core::rewriting::Rule;
use ahp_core::signature::Signature;
use ahp_core::strategy::Strategy;
use ahp_core::validate::Violation;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub signature: Signature,
    pub graphs: Vec<(String, AhpGraph)>,
    pub rules: Vec<Rule>,
    pub strategies: Vec<(String, Strategy)>,
}

impl Document {
    pub fn empty() -> Document {
        Document {
            signature: Signature::open(),
            ..Document::default()
        }
    }

    pub fn graph(&self, name: &str) -> Option<&AhpGraph> {
        self.graphs.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn strategy(&self, name: &str) -> Option<&Strategy> {
        self.strategies
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
    }

    pub fn rule_map(&self) -> std::collections::BTreeMap<String, Rule> {
        self.rules
            .iter()
            .map(|r| (r.name.clone(), r.clone()))
            .collect()
    }

    /// Structural validation of everything in the document. Named graphs
    /// are templates (rules may reference them as ladders), so they are
    /// checked with variables allowed; concreteness is enforced where a
    /// graph is actually used as a rewriting subject.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.signature.validate();
        for (name, graph) in &self.graphs {
            for v in graph.validate(&self.signature, true) {
                out.push(Violation::new(
                    v.kind,
                    format!("graph {name}: {}", v.detail),
                ));
            }
        }
        for rule in &self.rules {
            for v in rule.validate(&self.signature) {
                out.push(Violation::new(
                    v.kind,
                    format!("rule {}: {}", rule.name, v.detail),
                ));
            }
        }
        for (name, strategy) in &self.strategies {
            let mut rule_names = Vec::new();
            strategy.rule_names(&mut rule_names);
            for rule_name in rule_names {
                if self.rule(&rule_name).is_none() {
                    out.push(Violation::new(
                        ahp_core::ViolationKind::UnknownRuleRef,
                        format!("strategy {name}: references unknown rule {rule_name}"),
                    ));
                }
            }
        }
        out
    }
}
