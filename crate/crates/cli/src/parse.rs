//! Parser for the model document format: one self-contained text file
//! declaring a signature plus named graphs, rules and strategies.
//!
//! ```text
//! signature {
//!   attrs pay, toxicity;
//!   value_vars X;
//!   graph_vars S[owner, t];
//! }
//!
//! graph market {
//!   node b1: Bank ports [hold];
//!   node a: Asset { pay: 3 } ports [owner, t] ladder structuring;
//!   edge b1.hold -- a.owner { Name: "owns" };
//! }
//!
//! rule update {
//!   lhs { ... }
//!   rhs { ... }
//!   arrow { bridge l1.owner -> r1.owner; wire l1.a -- l1.b; blackhole l1.c; }
//!   when X > 0;
//! }
//!
//! strategy main { repeat(one(update)) }
//! ```
//!
//! A `ladder` clause takes either an inline body `{ ... }`, the name of a
//! previously defined graph (instantiated with fresh ids at the reference),
//! or a declared graph variable. A bare identifier in a name position is a
//! string; in an attribute-value position it must be a declared value
//! variable. Closed expressions are folded to literals, so concrete graphs
//! contain only base values. `//` starts a line comment.

use crate::document::Document;
use ahp_core::expr::{BinOp, Expr};
use ahp_core::graph::{IdGen, NodeId, PortId};
use ahp_core::hierarchy::{AhpGraph, LadderValue};
use ahp_core::record::{AttrKey, AttrValue, Record, NAME_ATTR, ORIENTED_ATTR};
use ahp_core::rewriting::{ArrowPort, Rule};
use ahp_core::signature::Signature;
use ahp_core::strategy::parse_strategy;
use ahp_core::value::BaseValue;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct DocError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    Punct(&'static str),
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Num(v) => write!(f, "`{v}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

const PUNCTS2: [&str; 8] = ["--", "->", "==", "!=", "<=", ">=", "&&", "||"];
const PUNCTS1: [&str; 18] = [
    "{", "}", "[", "]", "(", ")", ",", ";", ":", ".", "#", "+", "-", "*", "/", "<", ">", "!",
];

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.src.get(self.pos).copied()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn error(&self, message: impl Into<String>) -> DocError {
        DocError {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>, DocError> {
        let mut out = Vec::new();
        loop {
            while let Some(b) = self.peek() {
                if b.is_ascii_whitespace() {
                    self.bump();
                } else if b == b'/' && self.peek2() == Some(b'/') {
                    while let Some(b) = self.peek() {
                        if b == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(b) = self.peek() else {
                out.push((Tok::Eof, line, col));
                return Ok(out);
            };
            let tok = if b.is_ascii_alphabetic() || b == b'_' {
                let start = self.pos;
                while let Some(b) = self.peek() {
                    if b.is_ascii_alphanumeric() || b == b'_' {
                        self.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
            } else if b.is_ascii_digit() {
                let start = self.pos;
                while let Some(b) = self.peek() {
                    if b.is_ascii_digit()
                        || b == b'.'
                        || b == b'e'
                        || b == b'E'
                        || ((b == b'+' || b == b'-')
                            && matches!(self.src.get(self.pos - 1), Some(b'e') | Some(b'E')))
                    {
                        // a digit followed by `..`? not in this grammar; `.`
                        // only continues a number when a digit follows
                        if b == b'.' && !self.peek2().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                            break;
                        }
                        self.bump();
                    } else {
                        break;
                    }
                }
                let text = String::from_utf8_lossy(&self.src[start..self.pos]);
                let value: f64 = text
                    .parse()
                    .map_err(|_| self.error(format!("bad number literal `{text}`")))?;
                if !value.is_finite() {
                    return Err(self.error(format!("number literal `{text}` overflows")));
                }
                Tok::Num(value)
            } else if b == b'"' {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.error("unterminated string")),
                        Some(b'"') => break,
                        Some(b'\\') => match self.bump() {
                            Some(b'n') => s.push('\n'),
                            Some(b't') => s.push('\t'),
                            Some(b'\\') => s.push('\\'),
                            Some(b'"') => s.push('"'),
                            _ => return Err(self.error("bad escape")),
                        },
                        Some(other) => s.push(other as char),
                    }
                }
                Tok::Str(s)
            } else {
                let two = &self.src[self.pos..(self.pos + 2).min(self.src.len())];
                let two = std::str::from_utf8(two).unwrap_or("");
                if let Some(p) = PUNCTS2.iter().find(|p| **p == two) {
                    self.bump();
                    self.bump();
                    Tok::Punct(p)
                } else {
                    let one = &self.src[self.pos..self.pos + 1];
                    let one = std::str::from_utf8(one).unwrap_or("");
                    if let Some(p) = PUNCTS1.iter().find(|p| **p == one) {
                        self.bump();
                        Tok::Punct(p)
                    } else {
                        return Err(self.error(format!("unexpected character `{}`", b as char)));
                    }
                }
            };
            out.push((tok, line, col));
        }
    }
}

pub fn parse_document(text: &str) -> Result<Document, DocError> {
    let tokens = Lexer::new(text).tokens()?;
    let mut p = Parser {
        tokens,
        pos: 0,
        sig: Signature::open(),
        ids: IdGen::new(),
        doc: Document::empty(),
        src: text,
    };
    p.document()?;
    Ok(p.doc)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize, usize)>,
    pos: usize,
    sig: Signature,
    ids: IdGen,
    doc: Document,
    src: &'a str,
}

/// Node labels of one graph body, with port lookup by name.
struct Scope {
    nodes: BTreeMap<String, NodeId>,
}

impl<'a> Parser<'a> {
    fn here(&self) -> (usize, usize) {
        let (_, line, col) = &self.tokens[self.pos.min(self.tokens.len() - 1)];
        (*line, *col)
    }

    fn error_at(&self, message: impl Into<String>) -> DocError {
        let (line, col) = self.here();
        DocError {
            line,
            col,
            message: message.into(),
        }
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos.min(self.tokens.len() - 1)].0
    }

    fn next(&mut self) -> Tok {
        let t = self.tokens[self.pos.min(self.tokens.len() - 1)].0.clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat_punct(&mut self, p: &str) -> Result<(), DocError> {
        match self.peek() {
            Tok::Punct(q) if *q == p => {
                self.next();
                Ok(())
            }
            other => Err(self.error_at(format!("expected `{p}`, found {other}"))),
        }
    }

    fn try_punct(&mut self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p) && {
            self.next();
            true
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, DocError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => Err(self.error_at(format!("expected {what}, found {other}"))),
        }
    }

    fn try_keyword(&mut self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw) && {
            self.next();
            true
        }
    }

    fn document(&mut self) -> Result<(), DocError> {
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(word) => match word.as_str() {
                    "signature" => self.signature_block()?,
                    "graph" => self.graph_def()?,
                    "rule" => self.rule_def()?,
                    "strategy" => self.strategy_def()?,
                    other => {
                        return Err(self.error_at(format!(
                            "expected `signature`, `graph`, `rule` or `strategy`, found `{other}`"
                        )))
                    }
                },
                other => return Err(self.error_at(format!("unexpected {other}"))),
            }
        }
        self.doc.signature = self.sig.clone();
        Ok(())
    }

    fn name_list(&mut self) -> Result<Vec<String>, DocError> {
        let mut names = vec![self.ident("a name")?];
        while self.try_punct(",") {
            names.push(self.ident("a name")?);
        }
        Ok(names)
    }

    fn signature_block(&mut self) -> Result<(), DocError> {
        self.next(); // signature
        self.eat_punct("{")?;
        while !self.try_punct("}") {
            let what = self.ident("a signature item")?;
            match what.as_str() {
                "attrs" => {
                    let names = self.name_list()?;
                    self.sig.attributes.extend(names);
                }
                "attr_vars" => {
                    let names = self.name_list()?;
                    self.sig.attribute_vars.extend(names);
                }
                "value_vars" => {
                    let names = self.name_list()?;
                    self.sig.value_vars.extend(names);
                }
                "graph_vars" => loop {
                    let name = self.ident("a graph variable")?;
                    self.eat_punct("[")?;
                    let mut iface = Vec::new();
                    if !self.try_punct("]") {
                        iface = self.name_list()?;
                        self.eat_punct("]")?;
                    }
                    self.sig.graph_vars.insert(name, iface);
                    if !self.try_punct(",") {
                        break;
                    }
                },
                other => return Err(self.error_at(format!(
                    "expected `attrs`, `attr_vars`, `value_vars` or `graph_vars`, found `{other}`"
                ))),
            }
            self.eat_punct(";")?;
        }
        if let Some(v) = self.sig.validate().into_iter().next() {
            return Err(self.error_at(v.to_string()));
        }
        Ok(())
    }

    fn graph_def(&mut self) -> Result<(), DocError> {
        self.next(); // graph
        let name = self.ident("a graph name")?;
        if self.doc.graph(&name).is_some() {
            return Err(self.error_at(format!("graph `{name}` already defined")));
        }
        let graph = self.graph_body()?;
        self.doc.graphs.push((name, graph));
        Ok(())
    }

    /// `{ node ...; edge ...; }`
    fn graph_body(&mut self) -> Result<AhpGraph, DocError> {
        self.eat_punct("{")?;
        let mut g = AhpGraph::new();
        let mut scope = Scope {
            nodes: BTreeMap::new(),
        };
        // edges are parsed after all nodes so that forward references work;
        // collect them as token spans first
        let mut edges: Vec<usize> = Vec::new();
        loop {
            if self.try_punct("}") {
                break;
            }
            let what = self.ident("`node` or `edge`")?;
            match what.as_str() {
                "node" => self.node_decl(&mut g, &mut scope)?,
                "edge" => {
                    edges.push(self.pos);
                    self.skip_statement()?;
                }
                other => {
                    return Err(self.error_at(format!("expected `node` or `edge`, found `{other}`")))
                }
            }
        }
        let after = self.pos;
        for start in edges {
            self.pos = start;
            self.edge_decl(&mut g, &scope)?;
        }
        self.pos = after;
        Ok(g)
    }

    fn skip_statement(&mut self) -> Result<(), DocError> {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return Err(self.error_at("unterminated statement")),
                Tok::Punct("{") | Tok::Punct("[") => {
                    depth += 1;
                    self.next();
                }
                Tok::Punct("}") | Tok::Punct("]") => {
                    if depth == 0 {
                        return Err(self.error_at("unterminated statement"));
                    }
                    depth -= 1;
                    self.next();
                }
                Tok::Punct(";") if depth == 0 => {
                    self.next();
                    return Ok(());
                }
                _ => {
                    self.next();
                }
            }
        }
    }

    /// A name position: bare identifier (a string unless it is a declared
    /// value variable) or a quoted string.
    fn name_value(&mut self) -> Result<AttrValue, DocError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                if self.sig.is_value_var(&s) {
                    Ok(AttrValue::Var(s))
                } else {
                    Ok(AttrValue::lit(BaseValue::string(s)))
                }
            }
            Tok::Str(s) => {
                self.next();
                Ok(AttrValue::lit(BaseValue::string(s)))
            }
            other => Err(self.error_at(format!("expected a name, found {other}"))),
        }
    }

    fn node_decl(&mut self, g: &mut AhpGraph, scope: &mut Scope) -> Result<(), DocError> {
        let label = self.ident("a node label")?;
        if scope.nodes.contains_key(&label) {
            return Err(self.error_at(format!("node label `{label}` already used")));
        }
        self.eat_punct(":")?;
        let name = self.name_value()?;
        let mut record = Record::from_pairs([(AttrKey::attr(NAME_ATTR), name)]);
        if matches!(self.peek(), Tok::Punct("{")) {
            self.attr_block(&mut record)?;
        }
        let node = g.top_mut().add_node(&mut self.ids, record);
        scope.nodes.insert(label, node);

        if self.try_keyword("ports") {
            self.eat_punct("[")?;
            if !self.try_punct("]") {
                loop {
                    let name = self.name_value()?;
                    let mut record = Record::from_pairs([(AttrKey::attr(NAME_ATTR), name)]);
                    if matches!(self.peek(), Tok::Punct("{")) {
                        self.attr_block(&mut record)?;
                    }
                    g.top_mut().add_port(&mut self.ids, node, record);
                    if !self.try_punct(",") {
                        break;
                    }
                }
                self.eat_punct("]")?;
            }
        }

        if self.try_keyword("ladder") {
            let value = if matches!(self.peek(), Tok::Punct("{")) {
                LadderValue::Concrete(self.graph_body()?)
            } else {
                let target = self.ident("a graph or graph variable")?;
                if self.sig.graph_vars.contains_key(&target) {
                    LadderValue::Var(target)
                } else if let Some(graph) = self.doc.graph(&target) {
                    let (copy, _) = graph.clone().fresh_copy(&mut self.ids);
                    LadderValue::Concrete(copy)
                } else {
                    return Err(
                        self.error_at(format!("unknown graph or graph variable `{target}`"))
                    );
                }
            };
            g.set_ladder(node, value);
        }
        self.eat_punct(";")?;
        Ok(())
    }

    fn attr_block(&mut self, record: &mut Record) -> Result<(), DocError> {
        self.eat_punct("{")?;
        if self.try_punct("}") {
            return Ok(());
        }
        loop {
            let key_name = self.ident("an attribute name")?;
            let key = if self.sig.is_attr_var(&key_name) {
                AttrKey::Var(key_name.clone())
            } else {
                AttrKey::attr(&key_name)
            };
            if key_name == ORIENTED_ATTR {
                return Err(self.error_at("Oriented is structural: use `->` on the edge"));
            }
            if !key.is_var() && key_name != NAME_ATTR {
                self.sig.attributes.insert(key_name.clone());
            }
            self.eat_punct(":")?;
            let value = self.attr_value()?;
            if record.keys().any(|k| *k == key) {
                return Err(self.error_at(format!("duplicate attribute `{key_name}`")));
            }
            record.insert_key(key, value);
            if !self.try_punct(",") {
                break;
            }
        }
        self.eat_punct("}")?;
        Ok(())
    }

    /// An attribute value: a full expression, folded to a literal when it
    /// mentions no variables.
    fn attr_value(&mut self) -> Result<AttrValue, DocError> {
        let expr = self.expr()?;
        fold_expr(expr).map_err(|m| self.error_at(m))
    }

    fn expr(&mut self) -> Result<Expr, DocError> {
        self.expr_bp(0)
    }

    fn expr_bp(&mut self, min_bp: u8) -> Result<Expr, DocError> {
        let mut lhs = self.expr_atom()?;
        loop {
            let (op, bp) = match self.peek() {
                Tok::Punct("||") => (BinOp::Or, 1),
                Tok::Punct("&&") => (BinOp::And, 2),
                Tok::Punct("==") => (BinOp::Eq, 3),
                Tok::Punct("!=") => (BinOp::Ne, 3),
                Tok::Punct("<") => (BinOp::Lt, 3),
                Tok::Punct("<=") => (BinOp::Le, 3),
                Tok::Punct(">") => (BinOp::Gt, 3),
                Tok::Punct(">=") => (BinOp::Ge, 3),
                Tok::Punct("+") => (BinOp::Add, 4),
                Tok::Punct("-") => (BinOp::Sub, 4),
                Tok::Punct("*") => (BinOp::Mul, 5),
                Tok::Punct("/") => (BinOp::Div, 5),
                _ => break,
            };
            if bp < min_bp {
                break;
            }
            self.next();
            let rhs = self.expr_bp(bp + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn expr_atom(&mut self) -> Result<Expr, DocError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.next();
                Ok(Expr::lit(v))
            }
            Tok::Str(s) => {
                self.next();
                Ok(Expr::lit(BaseValue::string(s)))
            }
            Tok::Punct("-") => {
                self.next();
                Ok(Expr::Neg(Box::new(self.expr_atom()?)))
            }
            Tok::Punct("!") => {
                self.next();
                Ok(Expr::Not(Box::new(self.expr_atom()?)))
            }
            Tok::Punct("(") => {
                self.next();
                let e = self.expr_bp(0)?;
                self.eat_punct(")")?;
                Ok(e)
            }
            Tok::Ident(word) => {
                self.next();
                match word.as_str() {
                    "true" => Ok(Expr::lit(true)),
                    "false" => Ok(Expr::lit(false)),
                    _ if self.sig.is_value_var(&word) => Ok(Expr::var(word)),
                    _ => Err(self.error_at(format!(
                        "`{word}` is not a declared value variable (strings are quoted)"
                    ))),
                }
            }
            other => Err(self.error_at(format!("expected a value, found {other}"))),
        }
    }

    /// `label.port` or `label."port name"` or `label.port#2`
    fn port_ref(&mut self, g: &AhpGraph, scope: &Scope) -> Result<PortId, DocError> {
        let label = self.ident("a node label")?;
        let Some(node) = scope.nodes.get(&label).copied() else {
            return Err(self.error_at(format!("unknown node label `{label}`")));
        };
        self.eat_punct(".")?;
        let port_name = match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                s
            }
            Tok::Str(s) => {
                self.next();
                s
            }
            other => return Err(self.error_at(format!("expected a port name, found {other}"))),
        };
        let index = if self.try_punct("#") {
            match self.next() {
                Tok::Num(v) if v >= 1.0 && v.fract() == 0.0 => v as usize,
                other => return Err(self.error_at(format!("expected an index, found {other}"))),
            }
        } else {
            0
        };
        let same_named: Vec<PortId> = g
            .top()
            .node_port_ids(node)
            .iter()
            .copied()
            .filter(|p| g.top().port_name_key(*p) == port_name)
            .collect();
        match (same_named.len(), index) {
            (0, _) => Err(self.error_at(format!("node `{label}` has no port `{port_name}`"))),
            (1, 0) => Ok(same_named[0]),
            (_, 0) => Err(self.error_at(format!(
                "port `{label}.{port_name}` is ambiguous, use #1..#{}",
                same_named.len()
            ))),
            (n, k) if k <= n => Ok(same_named[k - 1]),
            (n, k) => Err(self.error_at(format!(
                "index #{k} out of range, `{label}.{port_name}` has {n} ports"
            ))),
        }
    }

    fn edge_decl(&mut self, g: &mut AhpGraph, scope: &Scope) -> Result<(), DocError> {
        let a = self.port_ref(g, scope)?;
        let oriented = match self.next() {
            Tok::Punct("--") => false,
            Tok::Punct("->") => true,
            other => return Err(self.error_at(format!("expected `--` or `->`, found {other}"))),
        };
        let b = self.port_ref(g, scope)?;
        let mut record = Record::from_pairs([]);
        if matches!(self.peek(), Tok::Punct("{")) {
            self.attr_block(&mut record)?;
        }
        if record.name().is_none() {
            record.insert_key(
                AttrKey::attr(NAME_ATTR),
                AttrValue::lit(BaseValue::string("edge")),
            );
        }
        if oriented {
            record.insert_key(AttrKey::attr(ORIENTED_ATTR), AttrValue::lit(true));
        }
        g.top_mut().add_edge(&mut self.ids, a, b, record);
        self.eat_punct(";")?;
        Ok(())
    }

    fn rule_def(&mut self) -> Result<(), DocError> {
        self.next(); // rule
        let name = self.ident("a rule name")?;
        if self.doc.rule(&name).is_some() {
            return Err(self.error_at(format!("rule `{name}` already defined")));
        }
        self.eat_punct("{")?;

        let mut lhs = AhpGraph::new();
        let mut rhs = AhpGraph::new();
        let mut lhs_scope = Scope {
            nodes: BTreeMap::new(),
        };
        let mut rhs_scope = Scope {
            nodes: BTreeMap::new(),
        };
        let mut arrow = Vec::new();
        let mut condition = None;
        let mut seen_lhs = false;
        let mut seen_rhs = false;

        while !self.try_punct("}") {
            let what = self.ident("`lhs`, `rhs`, `arrow` or `when`")?;
            match what.as_str() {
                "lhs" if !seen_lhs => {
                    seen_lhs = true;
                    let (g, scope) = self.rule_side()?;
                    lhs = g;
                    lhs_scope = scope;
                }
                "rhs" if !seen_rhs => {
                    seen_rhs = true;
                    let (g, scope) = self.rule_side()?;
                    rhs = g;
                    rhs_scope = scope;
                }
                "arrow" => {
                    // labels must be unambiguous across the two sides
                    for label in lhs_scope.nodes.keys() {
                        if rhs_scope.nodes.contains_key(label) {
                            return Err(self.error_at(format!(
                                "node label `{label}` is used on both rule sides; arrow references need distinct labels"
                            )));
                        }
                    }
                    self.eat_punct("{")?;
                    while !self.try_punct("}") {
                        let kind = self.ident("`bridge`, `wire` or `blackhole`")?;
                        match kind.as_str() {
                            "bridge" => {
                                let l = self.port_ref(&lhs, &lhs_scope)?;
                                self.eat_punct("->")?;
                                let mut rs = vec![self.port_ref(&rhs, &rhs_scope)?];
                                while self.try_punct(",") {
                                    rs.push(self.port_ref(&rhs, &rhs_scope)?);
                                }
                                arrow.push(ArrowPort::bridge(l, rs));
                            }
                            "wire" => {
                                let a = self.port_ref(&lhs, &lhs_scope)?;
                                self.eat_punct("--")?;
                                let b = self.port_ref(&lhs, &lhs_scope)?;
                                arrow.push(ArrowPort::wire(a, b));
                            }
                            "blackhole" => {
                                let mut ls = vec![self.port_ref(&lhs, &lhs_scope)?];
                                while self.try_punct(",") {
                                    ls.push(self.port_ref(&lhs, &lhs_scope)?);
                                }
                                arrow.push(ArrowPort::blackhole(ls));
                            }
                            other => {
                                return Err(self.error_at(format!(
                                    "expected `bridge`, `wire` or `blackhole`, found `{other}`"
                                )))
                            }
                        }
                        self.eat_punct(";")?;
                    }
                }
                "when" => {
                    condition = Some(self.expr()?);
                    self.eat_punct(";")?;
                }
                other => return Err(self.error_at(format!("unexpected `{other}` in rule"))),
            }
        }
        if !seen_lhs || !seen_rhs {
            return Err(self.error_at(format!("rule `{name}` needs both lhs and rhs")));
        }
        // drop conditions that folded to the constant true
        let condition = match condition {
            Some(Expr::Lit(BaseValue::Bool(true))) => None,
            other => other,
        };
        self.doc.rules.push(Rule {
            name,
            lhs,
            rhs,
            arrow,
            condition,
        });
        Ok(())
    }

    fn rule_side(&mut self) -> Result<(AhpGraph, Scope), DocError> {
        // same as graph_body but the scope is returned for arrow references
        self.eat_punct("{")?;
        let mut g = AhpGraph::new();
        let mut scope = Scope {
            nodes: BTreeMap::new(),
        };
        let mut edges: Vec<usize> = Vec::new();
        loop {
            if self.try_punct("}") {
                break;
            }
            let what = self.ident("`node` or `edge`")?;
            match what.as_str() {
                "node" => self.node_decl(&mut g, &mut scope)?,
                "edge" => {
                    edges.push(self.pos);
                    self.skip_statement()?;
                }
                other => {
                    return Err(self.error_at(format!("expected `node` or `edge`, found `{other}`")))
                }
            }
        }
        let after = self.pos;
        for start in edges {
            self.pos = start;
            self.edge_decl(&mut g, &scope)?;
        }
        self.pos = after;
        Ok((g, scope))
    }

    fn strategy_def(&mut self) -> Result<(), DocError> {
        self.next(); // strategy
        let name = self.ident("a strategy name")?;
        if self.doc.strategy(&name).is_some() {
            return Err(self.error_at(format!("strategy `{name}` already defined")));
        }
        let (open_line, open_col) = self.here();
        self.eat_punct("{")?;
        // capture the raw source span up to the matching brace
        let start_byte = byte_offset(self.src, open_line, open_col) + 1;
        let mut depth = 1usize;
        let mut end_byte = start_byte;
        while depth > 0 {
            let (line, col) = self.here();
            match self.next() {
                Tok::Eof => return Err(self.error_at("unterminated strategy body")),
                Tok::Punct("{") => depth += 1,
                Tok::Punct("}") => {
                    depth -= 1;
                    if depth == 0 {
                        end_byte = byte_offset(self.src, line, col);
                    }
                }
                _ => {}
            }
        }
        let body = &self.src[start_byte..end_byte];
        let strategy = parse_strategy(body).map_err(|e| DocError {
            line: open_line + e.line - 1,
            col: if e.line == 1 { open_col + e.col } else { e.col },
            message: e.message,
        })?;
        self.doc.strategies.push((name, strategy));
        Ok(())
    }
}

// byte-oriented to mirror the lexer's column counting
fn byte_offset(src: &str, line: usize, col: usize) -> usize {
    let mut at_line = 1usize;
    let mut at_col = 1usize;
    for (idx, b) in src.bytes().enumerate() {
        if at_line == line && at_col == col {
            return idx;
        }
        if b == b'\n' {
            at_line += 1;
            at_col = 1;
        } else {
            at_col += 1;
        }
    }
    src.len()
}

/// Folds closed expressions to literals; single variables stay variables.
fn fold_expr(expr: Expr) -> Result<AttrValue, String> {
    match &expr {
        Expr::Lit(v) => return Ok(AttrValue::Lit(v.clone())),
        Expr::Var(x) => return Ok(AttrValue::Var(x.clone())),
        _ => {}
    }
    let mut vars = std::collections::BTreeSet::new();
    expr.variables(&mut vars);
    if vars.is_empty() {
        let value = expr
            .eval(&BTreeMap::new())
            .map_err(|e| format!("constant expression fails: {e}"))?;
        Ok(AttrValue::Lit(value))
    } else {
        Ok(AttrValue::Expr(expr))
    }
}
