//! Engine for attributed hierarchical port graphs: structural validation,
//! morphism search, single-pushout-style rewriting with arrow-node rewiring,
//! hierarchy flattening, and a small strategy language driving derivations.

pub mod expr;
pub mod graph;
pub mod hierarchy;
pub mod matching;
pub mod record;
pub mod rewriting;
pub mod signature;
pub mod strategy;
pub mod validate;
pub mod value;

pub use expr::{BinOp, EvalError, Expr};
pub use graph::{EdgeId, IdGen, NodeId, PortGraph, PortId};
pub use hierarchy::{AhpGraph, CopyMaps, FlattenError, IdSets, LadderValue};
pub use matching::{
    brute_force_matches, eval_condition, find_matches, isomorphic, match_ladder, verify_match,
    Bindings, CondEval, LadderMap, Match, MatchError, Morphism, OracleError, SubstError,
};
pub use record::{AttrKey, AttrValue, Record};
pub use rewriting::{
    apply, check_flatten_commutes, instantiate_rhs, Applied, ApplyError, ArrowKind, ArrowPort,
    CommuteError, Rewiring, RewriteStep, Rule,
};
pub use signature::Signature;
pub use strategy::{
    parse_strategy, run, Derivation, RunError, RunStatus, Strategy, StrategyParseError,
    DEFAULT_BUDGET,
};
pub use validate::{Violation, ViolationKind};
pub use value::{BaseType, BaseValue};
