//! Signatures declare the attribute vocabulary and the variable namespaces
//! (value, attribute and graph variables) a model may use.

use crate::validate::{Violation, ViolationKind};
use crate::value::BaseType;
use std::collections::{BTreeMap, BTreeSet};

/// A port graph signature extended with graph variables. The `attributes`
/// set lists the admissible concrete attribute names; `Name` and `Oriented`
/// are always admissible and need not be listed. An empty `attributes` set
/// means the vocabulary is open (no membership check).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Signature {
    pub attributes: BTreeSet<String>,
    pub attribute_vars: BTreeSet<String>,
    pub value_types: BTreeSet<BaseType>,
    pub value_vars: BTreeSet<String>,
    /// Graph variable name → declared interface (list of port names).
    pub graph_vars: BTreeMap<String, Vec<String>>,
}

impl Signature {
    /// A signature with an open attribute vocabulary, all base types, and no
    /// variables.
    pub fn open() -> Signature {
        Signature {
            value_types: [BaseType::Number, BaseType::String, BaseType::Boolean]
                .into_iter()
                .collect(),
            ..Signature::default()
        }
    }

    pub fn with_attrs<I, S>(mut self, attrs: I) -> Signature
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.attributes.extend(attrs.into_iter().map(Into::into));
        self
    }

    pub fn with_value_vars<I, S>(mut self, vars: I) -> Signature
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.value_vars.extend(vars.into_iter().map(Into::into));
        self
    }

    pub fn with_attr_vars<I, S>(mut self, vars: I) -> Signature
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.attribute_vars.extend(vars.into_iter().map(Into::into));
        self
    }

    pub fn with_graph_var(mut self, name: impl Into<String>, interface: Vec<String>) -> Signature {
        self.graph_vars.insert(name.into(), interface);
        self
    }

    pub fn is_value_var(&self, name: &str) -> bool {
        self.value_vars.contains(name)
    }

    pub fn is_attr_var(&self, name: &str) -> bool {
        self.attribute_vars.contains(name)
    }

    pub fn graph_var_interface(&self, name: &str) -> Option<&[String]> {
        self.graph_vars.get(name).map(Vec::as_slice)
    }

    /// True when a concrete attribute name is admissible.
    pub fn allows_attr(&self, name: &str) -> bool {
        self.attributes.is_empty()
            || name == crate::record::NAME_ATTR
            || name == crate::record::ORIENTED_ATTR
            || self.attributes.contains(name)
    }

    /// Checks the pairwise disjointness of the name sets.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let graph_var_names: BTreeSet<&String> = self.graph_vars.keys().collect();
        let sets: [(&str, BTreeSet<&String>); 4] = [
            ("attributes", self.attributes.iter().collect()),
            ("attribute variables", self.attribute_vars.iter().collect()),
            ("value variables", self.value_vars.iter().collect()),
            ("graph variables", graph_var_names),
        ];
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                for name in sets[i].1.intersection(&sets[j].1) {
                    out.push(Violation::new(
                        ViolationKind::SignatureOverlap,
                        format!("`{name}` declared both as {} and {}", sets[i].0, sets[j].0),
                    ));
                }
            }
        }
        out
    }
}
