//! Base attribute values: numbers, strings and booleans.

use std::fmt;

/// The admissible base types for attribute values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BaseType {
    Number,
    String,
    Boolean,
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseType::Number => write!(f, "number"),
            BaseType::String => write!(f, "string"),
            BaseType::Boolean => write!(f, "boolean"),
        }
    }
}

/// A concrete attribute value. Numbers are finite 64-bit floats; negative
/// zero is normalised to zero so that ordering and equality agree.
#[derive(Debug, Clone)]
pub enum BaseValue {
    Number(f64),
    Str(String),
    Bool(bool),
}

impl BaseValue {
    /// Builds a number value, normalising `-0.0`. Non-finite inputs are
    /// rejected by the expression evaluator before they reach here, but the
    /// constructor also guards direct callers.
    pub fn number(v: f64) -> BaseValue {
        let v = if v == 0.0 { 0.0 } else { v };
        BaseValue::Number(v)
    }

    pub fn string(s: impl Into<String>) -> BaseValue {
        BaseValue::Str(s.into())
    }

    pub fn base_type(&self) -> BaseType {
        match self {
            BaseValue::Number(_) => BaseType::Number,
            BaseValue::Str(_) => BaseType::String,
            BaseValue::Bool(_) => BaseType::Boolean,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            BaseValue::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            BaseValue::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            BaseValue::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl PartialEq for BaseValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (BaseValue::Number(a), BaseValue::Number(b)) => a.total_cmp(b).is_eq(),
            (BaseValue::Str(a), BaseValue::Str(b)) => a == b,
            (BaseValue::Bool(a), BaseValue::Bool(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for BaseValue {}

impl PartialOrd for BaseValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BaseValue {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use BaseValue::*;
        match (self, other) {
            (Number(a), Number(b)) => a.total_cmp(b),
            (Str(a), Str(b)) => a.cmp(b),
            (Bool(a), Bool(b)) => a.cmp(b),
            (Number(_), _) => std::cmp::Ordering::Less,
            (_, Number(_)) => std::cmp::Ordering::Greater,
            (Str(_), _) => std::cmp::Ordering::Less,
            (_, Str(_)) => std::cmp::Ordering::Greater,
        }
    }
}

impl fmt::Display for BaseValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseValue::Number(v) => {
                if v.fract() == 0.0 && v.abs() < 1e15 {
                    write!(f, "{}", *v as i64)
                } else {
                    write!(f, "{v:?}")
                }
            }
            BaseValue::Str(s) => write!(f, "{s}"),
            BaseValue::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl From<f64> for BaseValue {
    fn from(v: f64) -> Self {
        BaseValue::number(v)
    }
}

impl From<&str> for BaseValue {
    fn from(v: &str) -> Self {
        BaseValue::Str(v.to_string())
    }
}

impl From<String> for BaseValue {
    fn from(v: String) -> Self {
        BaseValue::Str(v)
    }
}

impl From<bool> for BaseValue {
    fn from(v: bool) -> Self {
        BaseValue::Bool(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_zero_normalised() {
        assert_eq!(BaseValue::number(-0.0), BaseValue::number(0.0));
        assert_eq!(
            BaseValue::number(-0.0).cmp(&BaseValue::number(0.0)),
            std::cmp::Ordering::Equal
        );
    }

    #[test]
    fn display_integers_without_fraction() {
        assert_eq!(BaseValue::number(3.0).to_string(), "3");
        assert_eq!(BaseValue::number(3.25).to_string(), "3.25");
        assert_eq!(BaseValue::Bool(true).to_string(), "true");
    }
}
