//! Typed reduction: only redexes whose instantiation agrees with a basis
//! under which the applied rule is well typed may fire.
//!
//! The basis of a redex is inferred from its instantiation. Besides the rule
//! itself, the site of the redex (the level of a global, plain or in redex,
//! the loop of an out redex) must type, so that no redex of an ill-typed
//! compartment is ever applied.

use std::fmt;

use crate::marked::{erase_items, MarkedItem, MarkedTerm};
use crate::rewrite::{
    Engine, EngineError, PathStep, ReductionLabel, RuleRef, Schema, Strategy, Trace,
};
use crate::term::{GlobalRule, Pattern};
use crate::types::{
    check_global, contained, infer_basis, type_local_rule, type_pattern, Basis, Classification,
    PatternType, TypeError,
};

/// A term, its global rules and the classification used to type them.
#[derive(Debug, Clone)]
pub struct TypedModel {
    pub term: Pattern,
    pub globals: Vec<GlobalRule>,
    pub lambda: Classification,
}

/// An engine that filters redexes by typing.
#[derive(Debug, Clone)]
pub struct TypedEngine {
    pub engine: Engine,
    pub lambda: Classification,
}

/// Missing classifications are configuration errors and abort; every other
/// typing failure only disqualifies the redex.
fn accept(result: Result<bool, TypeError>) -> Result<bool, EngineError> {
    match result {
        Ok(b) => Ok(b),
        Err(e @ TypeError::UnknownElement(_)) => Err(e.into()),
        Err(e) => {
            log::debug!("redex rejected: {e}");
            Ok(false)
        }
    }
}

impl TypedEngine {
    pub fn new(engine: Engine, lambda: Classification) -> Self {
        TypedEngine { engine, lambda }
    }

    pub fn for_model(model: &TypedModel) -> Self {
        TypedEngine::new(Engine::new(model.globals.clone()), model.lambda.clone())
    }

    /// The redexes of `mt` that are typed redexes.
    pub fn find_redexes(&self, mt: &MarkedTerm) -> Result<Vec<ReductionLabel>, EngineError> {
        let mut out = Vec::new();
        for lbl in self.engine.find_redexes(mt)? {
            if self.admissible(mt, &lbl)? {
                out.push(lbl);
            }
        }
        Ok(out)
    }

    /// Whether a redex found on `mt` is typed.
    pub fn admissible(&self, mt: &MarkedTerm, lbl: &ReductionLabel) -> Result<bool, EngineError> {
        let delta = match infer_basis(&lbl.sigma, &self.lambda) {
            Ok(d) => d,
            Err(e) => return accept(Err(e)),
        };
        let rule_ok = match &lbl.rule {
            RuleRef::Global(g) => accept(check_global(&delta, &self.lambda, g))?,
            RuleRef::Local(r) => accept(type_local_rule(&delta, &self.lambda, r).map(|_| true))?,
        };
        if !rule_ok {
            return Ok(false);
        }
        let Some(site) = site(mt, lbl) else {
            return Ok(false);
        };
        accept(type_pattern(&Basis::new(), &self.lambda, &site).map(|_| true))
    }

    pub fn parallel_reduce(
        &self,
        t: &Pattern,
        strategy: Strategy,
        seed: u64,
    ) -> Result<Trace, EngineError> {
        self.engine
            .reduce_with(t, strategy, seed, |mt| self.find_redexes(mt))
    }

    /// `n` consecutive typed parallel steps; step `i` uses seed `seed + i`.
    pub fn run(
        &self,
        t: &Pattern,
        strategy: Strategy,
        seed: u64,
        n: usize,
    ) -> Result<Vec<Trace>, EngineError> {
        let mut traces = Vec::with_capacity(n);
        let mut current = t.clone();
        for i in 0..n {
            let tr = self.parallel_reduce(&current, strategy, seed.wrapping_add(i as u64))?;
            current = tr.final_term.clone();
            traces.push(tr);
        }
        Ok(traces)
    }
}

/// The erased site of a redex.
fn site(mt: &MarkedTerm, lbl: &ReductionLabel) -> Option<Pattern> {
    let mut level: &[MarkedItem] = &mt.items;
    let mut steps = lbl.path.iter().peekable();
    while let Some(step) = steps.next() {
        let PathStep::Member(i) = step else {
            return None;
        };
        let item = level.get(*i)?;
        match steps.next() {
            Some(PathStep::Content) => match item {
                MarkedItem::Loop { content, .. } => level = content,
                _ => return None,
            },
            None => {
                return match lbl.schema {
                    Schema::LrOut => Some(item.erase()),
                    Schema::LrIn => Some(erase_items(level)),
                    _ => None,
                }
            }
            Some(PathStep::Member(_)) => return None,
        }
    }
    Some(erase_items(level))
}

/// Typed redexes of `mt` for `model`.
pub fn typed_find_redexes(
    model: &TypedModel,
    mt: &MarkedTerm,
) -> Result<Vec<ReductionLabel>, EngineError> {
    TypedEngine::for_model(model).find_redexes(mt)
}

/// One typed parallel step from the model's term.
pub fn typed_parallel_reduce(
    model: &TypedModel,
    strategy: Strategy,
    seed: u64,
) -> Result<Trace, EngineError> {
    TypedEngine::for_model(model).parallel_reduce(&model.term, strategy, seed)
}

/// Outcome of comparing the types before and after a step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SrVerdict {
    /// The new type is contained in the old one.
    Holds {
        before: PatternType,
        after: PatternType,
    },
    /// The new type has gained features.
    Grown {
        before: PatternType,
        after: PatternType,
    },
    /// The new term does not type.
    AfterUntyped(TypeError),
}

impl SrVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, SrVerdict::Holds { .. })
    }
}

impl fmt::Display for SrVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SrVerdict::Holds { before, after } => write!(f, "type {before} became {after}"),
            SrVerdict::Grown { before, after } => write!(f, "type {before} grew to {after}"),
            SrVerdict::AfterUntyped(e) => write!(f, "result does not type: {e}"),
        }
    }
}

/// Checks that `after` has a type contained in the type of `before`.
///
/// Fails when `before` itself does not type.
pub fn subject_reduction_check(
    before: &Pattern,
    after: &Pattern,
    lambda: &Classification,
) -> Result<SrVerdict, TypeError> {
    let empty = Basis::new();
    let tau = type_pattern(&empty, lambda, before)?;
    Ok(match type_pattern(&empty, lambda, after) {
        Err(e) => SrVerdict::AfterUntyped(e),
        Ok(tau2) if contained(&tau2, &tau) => SrVerdict::Holds {
            before: tau,
            after: tau2,
        },
        Ok(tau2) => SrVerdict::Grown {
            before: tau,
            after: tau2,
        },
    })
}
