//! Records: the attribute → value maps labelling every graph element.
//! Every record carries the mandatory `Name` attribute. Keys are either
//! concrete attribute names or attribute variables (rule graphs only).

use crate::expr::Expr;
use crate::value::BaseValue;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// The mandatory attribute present in every record.
pub const NAME_ATTR: &str = "Name";
/// Reserved: computed from port attachment, never stored.
pub const INTERFACE_ATTR: &str = "Interface";
/// Built-in boolean attribute marking an edge as oriented.
pub const ORIENTED_ATTR: &str = "Oriented";

/// A record key: a concrete attribute name or an attribute variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum AttrKey {
    Attr(String),
    Var(String),
}

impl AttrKey {
    pub fn attr(name: impl Into<String>) -> AttrKey {
        AttrKey::Attr(name.into())
    }

    pub fn as_concrete(&self) -> Option<&str> {
        match self {
            AttrKey::Attr(s) => Some(s),
            AttrKey::Var(_) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, AttrKey::Var(_))
    }
}

impl fmt::Display for AttrKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrKey::Attr(s) | AttrKey::Var(s) => write!(f, "{s}"),
        }
    }
}

/// An attribute value: a base value, a value variable, or an expression tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum AttrValue {
    Lit(BaseValue),
    Var(String),
    Expr(Expr),
}

impl AttrValue {
    pub fn lit(v: impl Into<BaseValue>) -> AttrValue {
        AttrValue::Lit(v.into())
    }

    pub fn var(name: impl Into<String>) -> AttrValue {
        AttrValue::Var(name.into())
    }

    pub fn as_lit(&self) -> Option<&BaseValue> {
        match self {
            AttrValue::Lit(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_concrete(&self) -> bool {
        matches!(self, AttrValue::Lit(_))
    }

    /// A stable unquoted key form, used wherever Names are compared or
    /// ordered (port correspondence, interface lists).
    pub fn name_key(&self) -> String {
        match self {
            AttrValue::Lit(v) => v.to_string(),
            AttrValue::Var(name) => name.clone(),
            AttrValue::Expr(e) => e.to_string(),
        }
    }

    /// Value variables referenced by this value.
    pub fn variables(&self, out: &mut BTreeSet<String>) {
        match self {
            AttrValue::Lit(_) => {}
            AttrValue::Var(name) => {
                out.insert(name.clone());
            }
            AttrValue::Expr(e) => e.variables(out),
        }
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Lit(BaseValue::Str(s)) => write!(f, "{s:?}"),
            AttrValue::Lit(v) => write!(f, "{v}"),
            AttrValue::Var(name) => write!(f, "{name}"),
            AttrValue::Expr(e) => write!(f, "{e}"),
        }
    }
}

impl From<BaseValue> for AttrValue {
    fn from(v: BaseValue) -> Self {
        AttrValue::Lit(v)
    }
}

impl From<Expr> for AttrValue {
    fn from(e: Expr) -> Self {
        AttrValue::Expr(e)
    }
}

/// An attribute → value map. Key order is canonical (sorted), and equality is
/// key-order insensitive by construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Record {
    pairs: BTreeMap<AttrKey, AttrValue>,
}

impl Record {
    /// A record with only the mandatory Name attribute.
    pub fn new(name: impl Into<BaseValue>) -> Record {
        let mut pairs = BTreeMap::new();
        pairs.insert(AttrKey::attr(NAME_ATTR), AttrValue::Lit(name.into()));
        Record { pairs }
    }

    /// A record whose Name is a value variable (rule graphs).
    pub fn named_var(var: impl Into<String>) -> Record {
        let mut pairs = BTreeMap::new();
        pairs.insert(AttrKey::attr(NAME_ATTR), AttrValue::var(var));
        Record { pairs }
    }

    /// An unchecked record from raw pairs; validation reports missing Name.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (AttrKey, AttrValue)>) -> Record {
        Record {
            pairs: pairs.into_iter().collect(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<AttrValue>) -> Record {
        self.pairs.insert(AttrKey::attr(key), value.into());
        self
    }

    pub fn with_var_key(mut self, var: impl Into<String>, value: impl Into<AttrValue>) -> Record {
        self.pairs.insert(AttrKey::Var(var.into()), value.into());
        self
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<AttrValue>) {
        self.pairs.insert(AttrKey::attr(key), value.into());
    }

    /// Looks up a concrete attribute name.
    pub fn get(&self, key: &str) -> Option<&AttrValue> {
        self.pairs.get(&AttrKey::Attr(key.to_string()))
    }

    /// The set of attribute keys.
    pub fn keys(&self) -> impl Iterator<Item = &AttrKey> {
        self.pairs.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AttrKey, &AttrValue)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn name(&self) -> Option<&AttrValue> {
        self.get(NAME_ATTR)
    }

    /// The Name when it is a concrete value.
    pub fn concrete_name(&self) -> Option<&BaseValue> {
        self.name().and_then(AttrValue::as_lit)
    }

    /// True when the edge record marks the edge as oriented.
    pub fn is_oriented(&self) -> bool {
        matches!(
            self.get(ORIENTED_ATTR),
            Some(AttrValue::Lit(BaseValue::Bool(true)))
        )
    }

    /// True if any key or value mentions a variable (value or attribute).
    pub fn has_variables(&self) -> bool {
        self.pairs.iter().any(|(k, v)| {
            k.is_var() || {
                let mut vars = BTreeSet::new();
                v.variables(&mut vars);
                !vars.is_empty()
            }
        })
    }

    /// Collects value variables and attribute variables used by the record.
    pub fn collect_variables(&self, values: &mut BTreeSet<String>, attrs: &mut BTreeSet<String>) {
        for (k, v) in &self.pairs {
            if let AttrKey::Var(name) = k {
                attrs.insert(name.clone());
            }
            v.variables(values);
        }
    }

    /// Inserts under an explicit key, preserving variable keys.
    pub fn insert_key(&mut self, key: AttrKey, value: AttrValue) {
        self.pairs.insert(key, value);
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (k, v) in &self.pairs {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{k}: {v}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn get_present_and_absent() {
        let r = Record::new("A").with("pay", BaseValue::number(3.0));
        assert_eq!(r.get("pay"), Some(&AttrValue::lit(3.0)));
        assert_eq!(r.get("risk"), None);
    }

    #[test]
    fn get_variable_value() {
        let r = Record::new("A").with("pay", AttrValue::var("X"));
        assert_eq!(r.get("pay"), Some(&AttrValue::var("X")));
    }

    #[test]
    fn keys_are_the_attribute_set() {
        let r = Record::new("A").with("pay", BaseValue::number(3.0));
        let keys: Vec<String> = r.keys().map(|k| k.to_string()).collect();
        assert_eq!(keys, vec!["Name".to_string(), "pay".to_string()]);
        let just_name = Record::new("A");
        assert_eq!(just_name.keys().count(), 1);
    }

    #[test]
    fn equality_is_insertion_order_insensitive() {
        let a = Record::new("A")
            .with("x", BaseValue::number(1.0))
            .with("y", BaseValue::number(2.0));
        let b = Record::new("A")
            .with("y", BaseValue::number(2.0))
            .with("x", BaseValue::number(1.0));
        assert_eq!(a, b);
    }
}
