//! Calculus of Looping Sequences with Local Rules.
//!
//! Terms describe biological systems as nested compartments: a looping
//! sequence `loop(m)[p]` is a membrane `m` wrapping the content `p`. Rules can
//! live inside the term itself and act only within their compartment, or
//! across one of its membranes.
//!
//! * [`term`]: syntax, structural congruence, well-formedness.
//! * [`marked`]: terms with freeze marks used within one parallel step.
//! * [`matcher`]: matching modulo congruence and substitution.
//! * [`rewrite`]: redex discovery, rule application, parallel reduction,
//!   traces and their decomposition check.
//! * [`types`]: membrane feature types.
//! * [`typed`]: the typed reduction relation and subject reduction checks.
//! * [`format`]: model files, rendering and JSON traces.
//! * [`corpus`]: the bundled mitochondria model.

pub mod corpus;
pub mod format;
pub mod marked;
pub mod matcher;
pub mod rewrite;
pub mod term;
pub mod typed;
pub mod types;

pub use marked::{erase, MarkedItem, MarkedTerm};
pub use matcher::{agrees, match_pattern, substitute, Binding, Instantiation, MatchError, Matcher};
pub use rewrite::{
    apply_label, find_redexes, parallel_reduce, verify_decomposition, Engine, EngineError,
    PathStep, ReductionLabel, RuleRef, Schema, Strategy, Trace,
};
pub use term::{
    equiv, is_ground, normalize, vars, well_formed_local_rule, Atom, Element, GlobalRule,
    LocalRule, Pattern, RuleBodies, SeqPattern, VarKind, Variable,
};
pub use typed::{
    subject_reduction_check, typed_find_redexes, typed_parallel_reduce, SrVerdict, TypedModel,
};
pub use types::{
    check_global, contained, features, infer_basis, type_pattern, type_seq, union_type, Basis,
    Classification, Feature, MembraneType, PatternType, TypeError, UnknownElementPolicy, VarType,
};
