//! A small strategy language controlling rule application, with failure
//! semantics and a recorded derivation trace.
//!
//! Combinators: `id` and `fail`; `one(r)` applies `r` at one match chosen by
//! a seeded uniform pick over the canonical match list; `all(r)` applies a
//! greedy maximal set of pairwise image-disjoint matches left to right;
//! `seq(a, b)` (also written `a; b`) fails if either part fails;
//! `orelse(a, b)` runs `b` on the original graph when `a` fails;
//! `try(a) = orelse(a, id)`; `repeat(a)` applies until failure and returns
//! the last success; `if(c, t, e)` probes `c` on a scratch copy, discards
//! its steps, then runs `t` or `e` on the current graph.
//!
//! The step budget is a global monotone count of apply operations, including
//! those later discarded by `orelse`/`try`/`if` probes; exhausting it fails
//! the run and reports the in-flight partial trace.

use crate::hierarchy::AhpGraph;
use crate::matching::find_matches;
use crate::rewriting::{apply, ApplyError, RewriteStep, Rule};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub const DEFAULT_BUDGET: u32 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    Id,
    Fail,
    One(String),
    All(String),
    Seq(Box<Strategy>, Box<Strategy>),
    OrElse(Box<Strategy>, Box<Strategy>),
    Try(Box<Strategy>),
    Repeat(Box<Strategy>),
    If(Box<Strategy>, Box<Strategy>, Box<Strategy>),
}

impl Strategy {
    pub fn one(rule: impl Into<String>) -> Strategy {
        Strategy::One(rule.into())
    }

    pub fn all(rule: impl Into<String>) -> Strategy {
        Strategy::All(rule.into())
    }

    pub fn seq(a: Strategy, b: Strategy) -> Strategy {
        Strategy::Seq(Box::new(a), Box::new(b))
    }

    pub fn repeat(s: Strategy) -> Strategy {
        Strategy::Repeat(Box::new(s))
    }

    /// Rule names referenced anywhere in the expression.
    pub fn rule_names(&self, out: &mut Vec<String>) {
        match self {
            Strategy::Id | Strategy::Fail => {}
            Strategy::One(name) | Strategy::All(name) => out.push(name.clone()),
            Strategy::Seq(a, b) | Strategy::OrElse(a, b) => {
                a.rule_names(out);
                b.rule_names(out);
            }
            Strategy::Try(s) | Strategy::Repeat(s) => s.rule_names(out),
            Strategy::If(c, t, e) => {
                c.rule_names(out);
                t.rule_names(out);
                e.rule_names(out);
            }
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Id => write!(f, "id"),
            Strategy::Fail => write!(f, "fail"),
            Strategy::One(name) => write!(f, "one({name})"),
            Strategy::All(name) => write!(f, "all({name})"),
            Strategy::Seq(a, b) => write!(f, "seq({a}, {b})"),
            Strategy::OrElse(a, b) => write!(f, "orelse({a}, {b})"),
            Strategy::Try(s) => write!(f, "try({s})"),
            Strategy::Repeat(s) => write!(f, "repeat({s})"),
            Strategy::If(c, t, e) => write!(f, "if({c}, {t}, {e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct StrategyParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Parses the strategy grammar
/// `S ::= id | fail | one(NAME) | all(NAME) | seq(S,S) | orelse(S,S) |
/// try(S) | repeat(S) | if(S,S,S)` with `;` as infix sugar for `seq` and
/// parentheses for grouping. Whitespace-insensitive.
pub fn parse_strategy(text: &str) -> Result<Strategy, StrategyParseError> {
    let mut p = StrategyParser {
        src: text.as_bytes(),
        pos: 0,
    };
    let s = p.parse_seq()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(s)
}

struct StrategyParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> StrategyParser<'a> {
    fn error(&self, message: impl Into<String>) -> StrategyParseError {
        let mut line = 1;
        let mut col = 1;
        for &b in &self.src[..self.pos.min(self.src.len())] {
            if b == b'\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        StrategyParseError {
            line,
            col,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> Result<(), StrategyParseError> {
        self.skip_ws();
        if self.pos < self.src.len() && self.src[self.pos] == c {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", c as char)))
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn ident(&mut self) -> Result<String, StrategyParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric()
                || self.src[self.pos] == b'_'
                || self.src[self.pos] == b'-')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a name"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn parse_seq(&mut self) -> Result<Strategy, StrategyParseError> {
        let first = self.parse_atom()?;
        if self.peek() == Some(b';') {
            self.pos += 1;
            let rest = self.parse_seq()?;
            Ok(Strategy::seq(first, rest))
        } else {
            Ok(first)
        }
    }

    fn parse_atom(&mut self) -> Result<Strategy, StrategyParseError> {
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let inner = self.parse_seq()?;
            self.eat(b')')?;
            return Ok(inner);
        }
        let word = self.ident()?;
        match word.as_str() {
            "id" => Ok(Strategy::Id),
            "fail" => Ok(Strategy::Fail),
            "one" | "all" => {
                self.eat(b'(')?;
                let name = self.ident()?;
                self.eat(b')')?;
                Ok(if word == "one" {
                    Strategy::One(name)
                } else {
                    Strategy::All(name)
                })
            }
            "seq" | "orelse" => {
                self.eat(b'(')?;
                let a = self.parse_seq()?;
                self.eat(b',')?;
                let b = self.parse_seq()?;
                self.eat(b')')?;
                Ok(if word == "seq" {
                    Strategy::Seq(Box::new(a), Box::new(b))
                } else {
                    Strategy::OrElse(Box::new(a), Box::new(b))
                })
            }
            "try" | "repeat" => {
                self.eat(b'(')?;
                let s = self.parse_seq()?;
                self.eat(b')')?;
                Ok(if word == "try" {
                    Strategy::Try(Box::new(s))
                } else {
                    Strategy::Repeat(Box::new(s))
                })
            }
            "if" => {
                self.eat(b'(')?;
                let c = self.parse_seq()?;
                self.eat(b',')?;
                let t = self.parse_seq()?;
                self.eat(b',')?;
                let e = self.parse_seq()?;
                self.eat(b')')?;
                Ok(Strategy::If(Box::new(c), Box::new(t), Box::new(e)))
            }
            other => Err(self.error(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Success,
    Failure,
}

/// A recorded run: the initial graph, the committed steps in order, the
/// final graph, and how much of the step budget was consumed.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub initial: AhpGraph,
    pub steps: Vec<RewriteStep>,
    pub final_graph: AhpGraph,
    pub status: RunStatus,
    pub budget_used: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("unknown rule {0}")]
    UnknownRule(String),
    #[error("budget must be positive")]
    BadBudget,
    #[error("subject graph contains variables")]
    HostHasVariables,
    #[error("apply failed on an engine-chosen match: {0}")]
    Apply(#[from] ApplyError),
}

// splitmix64; fixed here so derivations replay identically everywhere
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

enum Outcome {
    Done(AhpGraph),
    Failed,
    OutOfBudget,
}

struct Exec<'a> {
    rules: &'a BTreeMap<String, Rule>,
    rng: SplitMix64,
    budget: u32,
    used: u32,
    trace: Vec<RewriteStep>,
}

/// Runs a strategy deterministically: equal inputs and seed give identical
/// derivations. The subject graph must be concrete and the budget positive.
pub fn run(
    strategy: &Strategy,
    g: &AhpGraph,
    rules: &BTreeMap<String, Rule>,
    seed: u64,
    budget: u32,
) -> Result<Derivation, RunError> {
    if budget == 0 {
        return Err(RunError::BadBudget);
    }
    if g.has_variables() {
        return Err(RunError::HostHasVariables);
    }
    let mut names = Vec::new();
    strategy.rule_names(&mut names);
    for name in names {
        if !rules.contains_key(&name) {
            return Err(RunError::UnknownRule(name));
        }
    }

    let mut exec = Exec {
        rules,
        rng: SplitMix64::new(seed),
        budget,
        used: 0,
        trace: Vec::new(),
    };
    let outcome = exec.run(strategy, g.clone())?;
    let (status, final_graph) = match outcome {
        Outcome::Done(result) => (RunStatus::Success, result),
        Outcome::Failed | Outcome::OutOfBudget => (
            RunStatus::Failure,
            exec.trace
                .last()
                .map(|s| s.after.clone())
                .unwrap_or_else(|| g.clone()),
        ),
    };
    Ok(Derivation {
        initial: g.clone(),
        steps: exec.trace,
        final_graph,
        status,
        budget_used: exec.used,
    })
}

impl<'a> Exec<'a> {
    fn apply_step(
        &mut self,
        rule: &Rule,
        g: &AhpGraph,
        m: &crate::matching::Match,
    ) -> Result<Outcome, RunError> {
        if self.used >= self.budget {
            return Ok(Outcome::OutOfBudget);
        }
        self.used += 1;
        let applied = apply(rule, g, m)?;
        self.trace.push(RewriteStep {
            rule: rule.name.clone(),
            match_used: m.clone(),
            before: g.clone(),
            after: applied.result.clone(),
            rewirings: applied.rewirings,
        });
        Ok(Outcome::Done(applied.result))
    }

    fn run(&mut self, s: &Strategy, g: AhpGraph) -> Result<Outcome, RunError> {
        match s {
            Strategy::Id => Ok(Outcome::Done(g)),
            Strategy::Fail => Ok(Outcome::Failed),
            Strategy::One(name) => {
                let rule = self
                    .rules
                    .get(name)
                    .ok_or_else(|| RunError::UnknownRule(name.clone()))?;
                let matches = find_matches(rule, &g);
                if matches.is_empty() {
                    return Ok(Outcome::Failed);
                }
                let idx = self.rng.below(matches.len());
                self.apply_step(rule, &g, &matches[idx])
            }
            Strategy::All(name) => {
                let rule = self
                    .rules
                    .get(name)
                    .ok_or_else(|| RunError::UnknownRule(name.clone()))?;
                let matches = find_matches(rule, &g);
                // greedy maximal pairwise image-disjoint set, canonical order
                let mut chosen: Vec<&crate::matching::Match> = Vec::new();
                for m in &matches {
                    if chosen.iter().all(|c| c.image.is_disjoint(&m.image)) {
                        chosen.push(m);
                    }
                }
                if chosen.is_empty() {
                    return Ok(Outcome::Failed);
                }
                let mut current = g;
                for m in chosen {
                    match self.apply_step(rule, &current.clone(), m)? {
                        Outcome::Done(next) => current = next,
                        other => return Ok(other),
                    }
                }
                Ok(Outcome::Done(current))
            }
            Strategy::Seq(a, b) => match self.run(a, g)? {
                Outcome::Done(g2) => self.run(b, g2),
                other => Ok(other),
            },
            Strategy::OrElse(a, b) => {
                let mark = self.trace.len();
                match self.run(a, g.clone())? {
                    Outcome::Done(g2) => Ok(Outcome::Done(g2)),
                    Outcome::OutOfBudget => Ok(Outcome::OutOfBudget),
                    Outcome::Failed => {
                        self.trace.truncate(mark);
                        self.run(b, g)
                    }
                }
            }
            Strategy::Try(inner) => {
                let mark = self.trace.len();
                match self.run(inner, g.clone())? {
                    Outcome::Done(g2) => Ok(Outcome::Done(g2)),
                    Outcome::OutOfBudget => Ok(Outcome::OutOfBudget),
                    Outcome::Failed => {
                        self.trace.truncate(mark);
                        Ok(Outcome::Done(g))
                    }
                }
            }
            Strategy::Repeat(inner) => {
                let mut current = g;
                loop {
                    let mark = self.trace.len();
                    let used_before = self.used;
                    let rng_before = self.rng.state;
                    match self.run(inner, current.clone())? {
                        Outcome::Done(next) => {
                            // a successful iteration that left the graph,
                            // budget and rng untouched would recur forever;
                            // the loop is stationary, stop with the fixpoint
                            let stationary = next == current
                                && self.used == used_before
                                && self.rng.state == rng_before;
                            current = next;
                            if stationary {
                                return Ok(Outcome::Done(current));
                            }
                        }
                        Outcome::OutOfBudget => return Ok(Outcome::OutOfBudget),
                        Outcome::Failed => {
                            self.trace.truncate(mark);
                            return Ok(Outcome::Done(current));
                        }
                    }
                }
            }
            Strategy::If(c, t, e) => {
                let mark = self.trace.len();
                let probe = self.run(c, g.clone())?;
                self.trace.truncate(mark);
                match probe {
                    Outcome::OutOfBudget => Ok(Outcome::OutOfBudget),
                    Outcome::Done(_) => self.run(t, g),
                    Outcome::Failed => self.run(e, g),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{IdGen, NodeId, PortGraph, PortId};
    use crate::matching::isomorphic;
    use crate::record::Record;
    use crate::rewriting::{ArrowPort, Rule};
    use crate::signature::Signature;

    fn rules_from(list: Vec<Rule>) -> BTreeMap<String, Rule> {
        list.into_iter().map(|r| (r.name.clone(), r)).collect()
    }

    struct TermBuilder {
        g: PortGraph,
        ids: IdGen,
    }

    // flat lambda-term encoding: every term edge is Named "wire" so that
    // splice output stays uniform
    impl TermBuilder {
        fn new() -> TermBuilder {
            TermBuilder {
                g: PortGraph::new(),
                ids: IdGen::new(),
            }
        }

        fn node(&mut self, name: &str, ports: &[&str]) -> (NodeId, Vec<PortId>) {
            let n = self.g.add_node(&mut self.ids, Record::new(name));
            let ps = ports
                .iter()
                .map(|p| self.g.add_port(&mut self.ids, n, Record::new(*p)))
                .collect();
            (n, ps)
        }

        fn wire(&mut self, a: PortId, b: PortId) {
            self.g.add_edge(&mut self.ids, a, b, Record::new("wire"));
        }

        fn root(&mut self) -> PortId {
            let (_, ps) = self.node("root", &["t"]);
            ps[0]
        }

        fn app(&mut self) -> (PortId, PortId, PortId) {
            let (_, ps) = self.node("app", &["out", "fun", "arg"]);
            (ps[0], ps[1], ps[2])
        }

        fn identity_lam(&mut self) -> PortId {
            let (_, ps) = self.node("lam", &["out", "body", "var"]);
            self.wire(ps[1], ps[2]); // identity body: body wired to var
            ps[0]
        }

        fn free_var(&mut self, name: &str) -> PortId {
            let (_, ps) = self.node(name, &["out"]);
            ps[0]
        }

        fn finish(self) -> AhpGraph {
            AhpGraph::flat(self.g)
        }
    }

    fn beta_rule() -> Rule {
        let mut ids = IdGen::new();
        let mut lhs = PortGraph::new();
        let app = lhs.add_node(&mut ids, Record::new("app"));
        let a_out = lhs.add_port(&mut ids, app, Record::new("out"));
        let a_fun = lhs.add_port(&mut ids, app, Record::new("fun"));
        let a_arg = lhs.add_port(&mut ids, app, Record::new("arg"));
        let lam = lhs.add_node(&mut ids, Record::new("lam"));
        let l_out = lhs.add_port(&mut ids, lam, Record::new("out"));
        let l_body = lhs.add_port(&mut ids, lam, Record::new("body"));
        let l_var = lhs.add_port(&mut ids, lam, Record::new("var"));
        lhs.add_edge(&mut ids, a_fun, l_out, Record::new("wire"));
        Rule {
            name: "beta".into(),
            lhs: AhpGraph::flat(lhs),
            rhs: AhpGraph::new(),
            arrow: vec![
                ArrowPort::wire(a_out, l_body),
                ArrowPort::wire(a_arg, l_var),
            ],
            condition: None,
        }
    }

    fn identity_applied_to_y() -> AhpGraph {
        // (\x.x) y
        let mut t = TermBuilder::new();
        let root = t.root();
        let (out, fun, arg) = t.app();
        let lam = t.identity_lam();
        let y = t.free_var("y");
        t.wire(root, out);
        t.wire(fun, lam);
        t.wire(arg, y);
        t.finish()
    }

    fn encoded_y() -> AhpGraph {
        let mut t = TermBuilder::new();
        let root = t.root();
        let y = t.free_var("y");
        t.wire(root, y);
        t.finish()
    }

    #[test]
    fn one_with_no_match_fails_with_empty_trace() {
        let g = encoded_y();
        let rules = rules_from(vec![beta_rule()]);
        let d = run(&Strategy::one("beta"), &g, &rules, 0, 100).unwrap();
        assert_eq!(d.status, RunStatus::Failure);
        assert!(d.steps.is_empty());
        assert_eq!(d.final_graph, g);
    }

    #[test]
    fn id_succeeds_without_steps() {
        let g = encoded_y();
        let d = run(&Strategy::Id, &g, &BTreeMap::new(), 0, 100).unwrap();
        assert_eq!(d.status, RunStatus::Success);
        assert!(d.steps.is_empty());
        assert_eq!(d.final_graph, g);
    }

    #[test]
    fn beta_reduces_identity_application_in_one_step() {
        let g = identity_applied_to_y();
        let rules = rules_from(vec![beta_rule()]);
        let d = run(&Strategy::repeat(Strategy::one("beta")), &g, &rules, 7, 100).unwrap();
        assert_eq!(d.status, RunStatus::Success);
        assert_eq!(d.steps.len(), 1);
        assert!(isomorphic(&d.final_graph, &encoded_y()));
        assert_eq!(d.final_graph.validate(&Signature::open(), false), vec![]);
    }

    #[test]
    fn parse_repeat_one() {
        assert_eq!(
            parse_strategy("repeat(one(beta))").unwrap(),
            Strategy::repeat(Strategy::one("beta"))
        );
    }

    #[test]
    fn parse_semicolon_sugar() {
        assert_eq!(
            parse_strategy("one(a);one(b)").unwrap(),
            Strategy::seq(Strategy::one("a"), Strategy::one("b"))
        );
        assert_eq!(
            parse_strategy(" try ( one(a) ; all(b) ) ").unwrap(),
            Strategy::Try(Box::new(Strategy::seq(
                Strategy::one("a"),
                Strategy::all("b")
            )))
        );
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse_strategy("one(").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.col, 5);
    }

    #[test]
    fn display_round_trips() {
        let s = parse_strategy("if(one(a), repeat(one(b)), orelse(fail, id))").unwrap();
        assert_eq!(parse_strategy(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn same_seed_same_derivation() {
        let g = identity_applied_to_y();
        let rules = rules_from(vec![beta_rule()]);
        let s = Strategy::repeat(Strategy::one("beta"));
        let a = run(&s, &g, &rules, 42, 100).unwrap();
        let b = run(&s, &g, &rules, 42, 100).unwrap();
        assert_eq!(a.steps.len(), b.steps.len());
        assert_eq!(a.final_graph, b.final_graph);
        for (x, y) in a.steps.iter().zip(b.steps.iter()) {
            assert_eq!(x.after, y.after);
            assert_eq!(x.match_used, y.match_used);
        }
    }

    #[test]
    fn trace_chains_and_replays() {
        let g = identity_applied_to_y();
        let rules = rules_from(vec![beta_rule()]);
        let d = run(&Strategy::repeat(Strategy::one("beta")), &g, &rules, 3, 100).unwrap();
        let mut current = d.initial.clone();
        for step in &d.steps {
            assert_eq!(step.before, current);
            let applied =
                crate::rewriting::apply(&rules[&step.rule], &current, &step.match_used).unwrap();
            assert_eq!(applied.result, step.after);
            current = step.after.clone();
        }
        assert_eq!(current, d.final_graph);
    }

    #[test]
    fn try_and_orelse_restore_the_original_graph() {
        let g = identity_applied_to_y();
        let rules = rules_from(vec![beta_rule()]);
        // beta succeeds then fail: seq fails overall; orelse falls back to id
        let s = Strategy::OrElse(
            Box::new(Strategy::seq(Strategy::one("beta"), Strategy::Fail)),
            Box::new(Strategy::Id),
        );
        let d = run(&s, &g, &rules, 0, 100).unwrap();
        assert_eq!(d.status, RunStatus::Success);
        assert!(d.steps.is_empty(), "rolled-back steps must not remain");
        assert_eq!(d.final_graph, g);
        assert_eq!(d.budget_used, 1, "the discarded apply still costs budget");
    }

    #[test]
    fn repeat_of_try_stops_at_its_fixpoint() {
        // try(beta) never fails; once beta stops matching the loop is
        // stationary and repeat returns the fixpoint instead of spinning
        let g = identity_applied_to_y();
        let rules = rules_from(vec![beta_rule()]);
        let s = Strategy::repeat(Strategy::Try(Box::new(Strategy::one("beta"))));
        let d = run(&s, &g, &rules, 0, 10).unwrap();
        assert_eq!(d.status, RunStatus::Success);
        assert_eq!(d.steps.len(), 1);
        assert!(isomorphic(&d.final_graph, &encoded_y()));
    }

    #[test]
    fn productive_loop_exhausts_the_budget() {
        // the identity rule always matches again, so repeat(one(id)) can
        // only stop when the budget runs out
        let g = encoded_y();
        let mut ids = IdGen::starting_after(g.max_element_id());
        let id_rule = Rule::identity("spin", &g, &mut ids);
        let rules = rules_from(vec![id_rule]);
        let d = run(&Strategy::repeat(Strategy::one("spin")), &g, &rules, 0, 10).unwrap();
        assert_eq!(d.status, RunStatus::Failure);
        assert_eq!(d.budget_used, 10);
        assert_eq!(d.steps.len(), 10, "partial trace is kept");
    }

    #[test]
    fn zero_budget_is_an_error() {
        let g = encoded_y();
        assert!(matches!(
            run(&Strategy::Id, &g, &BTreeMap::new(), 0, 0),
            Err(RunError::BadBudget)
        ));
    }

    #[test]
    fn unknown_rule_is_an_error() {
        let g = encoded_y();
        assert!(matches!(
            run(&Strategy::one("ghost"), &g, &BTreeMap::new(), 0, 10),
            Err(RunError::UnknownRule(_))
        ));
    }

    #[test]
    fn all_applies_disjoint_matches_left_to_right() {
        // two independent identity redexes; all(beta) reduces both
        let mut t = TermBuilder::new();
        let r1 = t.root();
        let (o1, f1, a1) = t.app();
        let l1 = t.identity_lam();
        let y1 = t.free_var("y");
        t.wire(r1, o1);
        t.wire(f1, l1);
        t.wire(a1, y1);
        let r2 = t.root();
        let (o2, f2, a2) = t.app();
        let l2 = t.identity_lam();
        let y2 = t.free_var("z");
        t.wire(r2, o2);
        t.wire(f2, l2);
        t.wire(a2, y2);
        let g = t.finish();

        let rules = rules_from(vec![beta_rule()]);
        let d = run(&Strategy::all("beta"), &g, &rules, 0, 100).unwrap();
        assert_eq!(d.status, RunStatus::Success);
        assert_eq!(d.steps.len(), 2);
        assert_eq!(d.final_graph.top().node_count(), 4);
        for (a, b) in d.steps.iter().zip(d.steps.iter().skip(1)) {
            assert!(a.match_used.image.is_disjoint(&b.match_used.image));
        }
    }

    #[test]
    fn if_probes_without_committing_steps() {
        let g = identity_applied_to_y();
        let rules = rules_from(vec![beta_rule()]);
        // the probe succeeds, so the then-branch (id) runs on the ORIGINAL
        // graph and the probe's step is discarded
        let s = Strategy::If(
            Box::new(Strategy::one("beta")),
            Box::new(Strategy::Id),
            Box::new(Strategy::Fail),
        );
        let d = run(&s, &g, &rules, 0, 100).unwrap();
        assert_eq!(d.status, RunStatus::Success);
        assert!(d.steps.is_empty());
        assert_eq!(d.final_graph, g);
        assert_eq!(d.budget_used, 1);

        // on a normal form the probe fails and the else-branch decides
        let nf = encoded_y();
        let d = run(&s, &nf, &rules, 0, 100).unwrap();
        assert_eq!(d.status, RunStatus::Failure);
    }

    #[test]
    fn all_with_no_matches_fails() {
        let g = encoded_y();
        let rules = rules_from(vec![beta_rule()]);
        let d = run(&Strategy::all("beta"), &g, &rules, 0, 100).unwrap();
        assert_eq!(d.status, RunStatus::Failure);
    }

    #[test]
    fn three_redex_term_normalizes() {
        // (\x.x) ((\y.y) ((\z.z) w))  ->*  w in exactly 3 steps
        let mut t = TermBuilder::new();
        let root = t.root();
        let (o1, f1, a1) = t.app();
        let l1 = t.identity_lam();
        let (o2, f2, a2) = t.app();
        let l2 = t.identity_lam();
        let (o3, f3, a3) = t.app();
        let l3 = t.identity_lam();
        let w = t.free_var("w");
        t.wire(root, o1);
        t.wire(f1, l1);
        t.wire(a1, o2);
        t.wire(f2, l2);
        t.wire(a2, o3);
        t.wire(f3, l3);
        t.wire(a3, w);
        let g = t.finish();

        let expected = {
            let mut t = TermBuilder::new();
            let root = t.root();
            let w = t.free_var("w");
            t.wire(root, w);
            t.finish()
        };

        let rules = rules_from(vec![beta_rule()]);
        for seed in [0u64, 1, 2, 99] {
            let d = run(
                &Strategy::repeat(Strategy::one("beta")),
                &g,
                &rules,
                seed,
                100,
            )
            .unwrap();
            assert_eq!(d.status, RunStatus::Success);
            assert_eq!(d.steps.len(), 3);
            assert!(isomorphic(&d.final_graph, &expected));
        }
    }
}
