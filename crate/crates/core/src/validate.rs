//! Violation reporting shared by the structural validators. Validators
//! return lists of violations rather than failing fast, so callers can show
//! everything that is wrong at once.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationKind {
    // signature level
    SignatureOverlap,
    UndeclaredVariable,
    UndeclaredAttribute,
    // record level
    MissingName,
    StoredInterface,
    BadOriented,
    VariableNotAllowed,
    NameSchemaMismatch,
    // port graph level
    DanglingAttach,
    DanglingConnect,
    InterfaceMismatch,
    // hierarchy level
    LadderUnknownNode,
    LadderNotInjective,
    LadderArityMismatch,
    LadderNameMismatch,
    LadderRecordMismatch,
    DuplicatePortName,
    SharedElementIds,
    GraphVarUnknown,
    GraphVarInterfaceMismatch,
    // rule level
    ArrowArity,
    ArrowUnknownPort,
    ArrowCrossLevel,
    ArrowPortReused,
    RhsFreshVariable,
    RuleIdOverlap,
    ConditionUnboundVariable,
    // document level
    UnknownRuleRef,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::SignatureOverlap => "signature name sets overlap",
            ViolationKind::UndeclaredVariable => "undeclared variable",
            ViolationKind::UndeclaredAttribute => "undeclared attribute",
            ViolationKind::MissingName => "missing Name",
            ViolationKind::StoredInterface => "Interface must not be stored",
            ViolationKind::BadOriented => "Oriented must be a boolean",
            ViolationKind::VariableNotAllowed => "variable not allowed here",
            ViolationKind::NameSchemaMismatch => "records with equal Name disagree on attributes",
            ViolationKind::DanglingAttach => "port attached to missing node",
            ViolationKind::DanglingConnect => "edge endpoint missing",
            ViolationKind::InterfaceMismatch => "interface mismatch",
            ViolationKind::LadderUnknownNode => "ladder on unknown node",
            ViolationKind::LadderNotInjective => "ladder not injective",
            ViolationKind::LadderArityMismatch => "interface arity mismatch",
            ViolationKind::LadderNameMismatch => "ladder interface names differ from node",
            ViolationKind::LadderRecordMismatch => "ladder interface records differ from node",
            ViolationKind::DuplicatePortName => "duplicate port name on laddered node",
            ViolationKind::SharedElementIds => "element ids shared across component graphs",
            ViolationKind::GraphVarUnknown => "unknown graph variable",
            ViolationKind::GraphVarInterfaceMismatch => "graph variable interface mismatch",
            ViolationKind::ArrowArity => "arrow port arity",
            ViolationKind::ArrowUnknownPort => "arrow edge references unknown port",
            ViolationKind::ArrowCrossLevel => "cross-level arrow edge",
            ViolationKind::ArrowPortReused => "port referenced by more than one arrow port",
            ViolationKind::RhsFreshVariable => "right-hand side invents a variable",
            ViolationKind::RuleIdOverlap => "rule sides share element ids",
            ViolationKind::ConditionUnboundVariable => "condition references variable not in lhs",
            ViolationKind::UnknownRuleRef => "reference to unknown rule",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl Violation {
    pub fn new(kind: ViolationKind, detail: impl Into<String>) -> Violation {
        Violation {
            kind,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)
    }
}
