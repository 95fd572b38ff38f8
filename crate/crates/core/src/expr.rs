//! A small total expression language over base values and value variables:
//! literals, variables, arithmetic, comparisons and boolean connectives.
//! Division by zero and any non-finite arithmetic result evaluate to an
//! error, which callers treat as a failed condition.

use crate::value::BaseValue;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Expr {
    Lit(BaseValue),
    /// A value variable from the signature.
    Var(String),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Neg(Box<Expr>),
}

impl PartialOrd for BinOp {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BinOp {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.symbol().cmp(other.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("type mismatch: {op} on {lhs} and {rhs}")]
    TypeMismatch {
        op: &'static str,
        lhs: &'static str,
        rhs: &'static str,
    },
    #[error("division by zero")]
    DivisionByZero,
    #[error("arithmetic overflow")]
    NonFinite,
}

fn type_name(v: &BaseValue) -> &'static str {
    match v {
        BaseValue::Number(_) => "number",
        BaseValue::Str(_) => "string",
        BaseValue::Bool(_) => "boolean",
    }
}

fn arith(
    op: BinOp,
    a: &BaseValue,
    b: &BaseValue,
    f: impl Fn(f64, f64) -> f64,
) -> Result<BaseValue, EvalError> {
    match (a, b) {
        (BaseValue::Number(x), BaseValue::Number(y)) => {
            let r = f(*x, *y);
            if r.is_finite() {
                Ok(BaseValue::number(r))
            } else {
                Err(EvalError::NonFinite)
            }
        }
        _ => Err(EvalError::TypeMismatch {
            op: op.symbol(),
            lhs: type_name(a),
            rhs: type_name(b),
        }),
    }
}

fn compare(op: BinOp, a: &BaseValue, b: &BaseValue) -> Result<BaseValue, EvalError> {
    use std::cmp::Ordering;
    let ord: Ordering = match (a, b) {
        (BaseValue::Number(x), BaseValue::Number(y)) => x.total_cmp(y),
        (BaseValue::Str(x), BaseValue::Str(y)) => x.cmp(y),
        (BaseValue::Bool(x), BaseValue::Bool(y)) => x.cmp(y),
        _ => {
            return Err(EvalError::TypeMismatch {
                op: op.symbol(),
                lhs: type_name(a),
                rhs: type_name(b),
            })
        }
    };
    let r = match op {
        BinOp::Eq => ord.is_eq(),
        BinOp::Ne => !ord.is_eq(),
        BinOp::Lt => ord.is_lt(),
        BinOp::Le => ord.is_le(),
        BinOp::Gt => ord.is_gt(),
        BinOp::Ge => ord.is_ge(),
        _ => unreachable!(),
    };
    Ok(BaseValue::Bool(r))
}

impl Expr {
    pub fn lit(v: impl Into<BaseValue>) -> Expr {
        Expr::Lit(v.into())
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Evaluates under an environment of value-variable bindings.
    pub fn eval(&self, env: &BTreeMap<String, BaseValue>) -> Result<BaseValue, EvalError> {
        match self {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Var(name) => env
                .get(name)
                .cloned()
                .ok_or_else(|| EvalError::Unbound(name.clone())),
            Expr::Neg(e) => match e.eval(env)? {
                BaseValue::Number(v) => Ok(BaseValue::number(-v)),
                other => Err(EvalError::TypeMismatch {
                    op: "-",
                    lhs: "number",
                    rhs: type_name(&other),
                }),
            },
            Expr::Not(e) => match e.eval(env)? {
                BaseValue::Bool(b) => Ok(BaseValue::Bool(!b)),
                other => Err(EvalError::TypeMismatch {
                    op: "!",
                    lhs: "boolean",
                    rhs: type_name(&other),
                }),
            },
            Expr::Binary(op, l, r) => match op {
                BinOp::And | BinOp::Or => {
                    let lv = l.eval(env)?;
                    let rv = r.eval(env)?;
                    match (lv, rv) {
                        (BaseValue::Bool(a), BaseValue::Bool(b)) => Ok(BaseValue::Bool(match op {
                            BinOp::And => a && b,
                            _ => a || b,
                        })),
                        (a, b) => Err(EvalError::TypeMismatch {
                            op: op.symbol(),
                            lhs: type_name(&a),
                            rhs: type_name(&b),
                        }),
                    }
                }
                BinOp::Add => arith(*op, &l.eval(env)?, &r.eval(env)?, |a, b| a + b),
                BinOp::Sub => arith(*op, &l.eval(env)?, &r.eval(env)?, |a, b| a - b),
                BinOp::Mul => arith(*op, &l.eval(env)?, &r.eval(env)?, |a, b| a * b),
                BinOp::Div => {
                    let lv = l.eval(env)?;
                    let rv = r.eval(env)?;
                    if rv.as_number() == Some(0.0) {
                        return Err(EvalError::DivisionByZero);
                    }
                    arith(*op, &lv, &rv, |a, b| a / b)
                }
                _ => compare(*op, &l.eval(env)?, &r.eval(env)?),
            },
        }
    }

    /// Collects the value variables referenced anywhere in the expression.
    pub fn variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var(name) => {
                out.insert(name.clone());
            }
            Expr::Binary(_, l, r) => {
                l.variables(out);
                r.variables(out);
            }
            Expr::Not(e) | Expr::Neg(e) => e.variables(out),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        match self {
            Expr::Lit(BaseValue::Str(s)) => write!(f, "{:?}", s),
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Var(name) => write!(f, "{name}"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, 6)
            }
            Expr::Not(e) => {
                write!(f, "!")?;
                e.fmt_prec(f, 6)
            }
            Expr::Binary(op, l, r) => {
                let prec = op.precedence();
                if prec < parent {
                    write!(f, "(")?;
                }
                l.fmt_prec(f, prec)?;
                write!(f, " {} ", op.symbol())?;
                r.fmt_prec(f, prec + 1)?;
                if prec < parent {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, BaseValue)]) -> BTreeMap<String, BaseValue> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect()
    }

    #[test]
    fn arithmetic_with_binding() {
        let e = Expr::binary(BinOp::Add, Expr::var("X"), Expr::lit(1.0));
        let r = e.eval(&env(&[("X", BaseValue::number(3.0))])).unwrap();
        assert_eq!(r, BaseValue::number(4.0));
    }

    #[test]
    fn division_by_zero_is_error() {
        let e = Expr::binary(BinOp::Div, Expr::lit(1.0), Expr::lit(0.0));
        assert_eq!(e.eval(&BTreeMap::new()), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn overflow_is_error() {
        let e = Expr::binary(BinOp::Mul, Expr::lit(1e308), Expr::lit(10.0));
        assert_eq!(e.eval(&BTreeMap::new()), Err(EvalError::NonFinite));
    }

    #[test]
    fn unbound_variable_is_error() {
        let e = Expr::binary(BinOp::Gt, Expr::var("pay"), Expr::lit(2.0));
        assert_eq!(
            e.eval(&BTreeMap::new()),
            Err(EvalError::Unbound("pay".into()))
        );
    }

    #[test]
    fn comparison_and_connectives() {
        let e = Expr::binary(
            BinOp::And,
            Expr::binary(BinOp::Gt, Expr::var("X"), Expr::lit(2.0)),
            Expr::binary(BinOp::Ne, Expr::var("s"), Expr::lit("no")),
        );
        let r = e
            .eval(&env(&[
                ("X", BaseValue::number(3.0)),
                ("s", BaseValue::string("yes")),
            ]))
            .unwrap();
        assert_eq!(r, BaseValue::Bool(true));
    }

    #[test]
    fn display_respects_precedence() {
        let e = Expr::binary(
            BinOp::Mul,
            Expr::binary(BinOp::Add, Expr::var("X"), Expr::lit(1.0)),
            Expr::lit(2.0),
        );
        assert_eq!(e.to_string(), "(X + 1) * 2");
    }
}
