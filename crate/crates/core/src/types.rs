//! Membrane feature types.
//!
//! A membrane type is a set of features a compartment allows its rules to
//! have. A pattern type is a list of membrane types: the head collects the
//! features of the rules present, the tail describes material that out rules
//! emit through enclosing membranes.
//!
//! Embedded rules are typed in their own scope. Inside a rule, a membrane
//! variable with no entry in the basis stands for every possible membrane
//! type, so side conditions must hold for all of them; a term variable in a
//! right-hand side needs an entry. [`type_pattern`] types rules with an
//! empty scope, which keeps the typing of a rule independent of the basis of
//! the term around it; [`type_local_rule`] types one rule under a given basis.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::matcher::{Binding, Instantiation};
use crate::term::{
    occurrences, vars, Atom, Element, GlobalRule, LocalRule, Pattern, RuleBodies, SeqPattern,
    VarKind, Variable,
};

/// One rule feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feature {
    /// Deleting: some variable of the left-hand side is dropped.
    D,
    /// Replicating: a variable occurs twice on the right.
    R,
    /// Splitting: the left-hand side holds two distinct variables.
    S,
    /// Equating: a variable occurs twice on the left.
    E,
    /// Out rule.
    O,
    /// In rule.
    I,
}

impl Feature {
    pub const ALL: [Feature; 6] = [
        Feature::D,
        Feature::R,
        Feature::S,
        Feature::E,
        Feature::O,
        Feature::I,
    ];

    pub fn letter(self) -> char {
        match self {
            Feature::D => 'd',
            Feature::R => 'r',
            Feature::S => 's',
            Feature::E => 'e',
            Feature::O => 'o',
            Feature::I => 'i',
        }
    }

    pub fn from_letter(c: char) -> Option<Feature> {
        Feature::ALL.into_iter().find(|f| f.letter() == c)
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// A set of features.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MembraneType(u8);

impl MembraneType {
    pub const EMPTY: MembraneType = MembraneType(0);
    pub const FULL: MembraneType = MembraneType(0b11_1111);

    pub fn of(features: &[Feature]) -> Self {
        MembraneType(features.iter().fold(0, |acc, f| acc | f.bit()))
    }

    pub fn contains(self, f: Feature) -> bool {
        self.0 & f.bit() != 0
    }

    pub fn with(self, f: Feature) -> Self {
        MembraneType(self.0 | f.bit())
    }

    pub fn without(self, f: Feature) -> Self {
        MembraneType(self.0 & !f.bit())
    }

    pub fn union(self, other: Self) -> Self {
        MembraneType(self.0 | other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn features(self) -> impl Iterator<Item = Feature> {
        Feature::ALL.into_iter().filter(move |f| self.contains(*f))
    }

    /// Builds a set from raw bits; bits above the six features are dropped.
    pub fn from_bits(bits: u8) -> Self {
        MembraneType(bits & Self::FULL.0)
    }

    pub fn bits(self) -> u8 {
        self.0
    }
}

impl fmt::Display for MembraneType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, feat) in self.features().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", feat.letter())?;
        }
        f.write_str("}")
    }
}

/// A finite list of membrane types; the empty list is written `∅`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternType(pub Vec<MembraneType>);

impl PatternType {
    pub fn empty() -> Self {
        PatternType(Vec::new())
    }

    pub fn single(phi: MembraneType) -> Self {
        PatternType(vec![phi])
    }

    /// `phi :: self`.
    pub fn cons(&self, phi: MembraneType) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(phi);
        v.extend_from_slice(&self.0);
        PatternType(v)
    }

    /// Head and tail, reading `∅` as `∅ :: ∅`.
    pub fn split_head(&self) -> (MembraneType, PatternType) {
        match self.0.split_first() {
            Some((h, t)) => (*h, PatternType(t.to_vec())),
            None => (MembraneType::EMPTY, PatternType::empty()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for PatternType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for phi in &self.0 {
            write!(f, "{phi}::")?;
        }
        f.write_str("∅")
    }
}

/// Positionwise union, padding the shorter list with empty sets.
pub fn union_type(t1: &PatternType, t2: &PatternType) -> PatternType {
    let n = t1.0.len().max(t2.0.len());
    PatternType(
        (0..n)
            .map(|i| {
                let a = t1.0.get(i).copied().unwrap_or_default();
                let b = t2.0.get(i).copied().unwrap_or_default();
                a.union(b)
            })
            .collect(),
    )
}

/// `t1 ⊑ t2`: `t1` is no longer than `t2` and included position by position.
pub fn contained(t1: &PatternType, t2: &PatternType) -> bool {
    t1.0.len() <= t2.0.len() && t1.0.iter().zip(&t2.0).all(|(a, b)| a.is_subset(*b))
}

/// The type recorded for a variable in a basis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarType {
    Membrane(MembraneType),
    Pattern(PatternType),
}

impl fmt::Display for VarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarType::Membrane(phi) => write!(f, "{phi}"),
            VarType::Pattern(tau) => write!(f, "{tau}"),
        }
    }
}

/// Typing environment for variables.
pub type Basis = BTreeMap<Variable, VarType>;

/// What to do with elements the classification does not mention.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum UnknownElementPolicy {
    /// Report [`TypeError::UnknownElement`].
    #[default]
    Strict,
    /// Use the empty membrane type and log a warning.
    Permissive,
}

/// Assignment of membrane types to elements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Classification {
    map: BTreeMap<Element, MembraneType>,
    pub policy: UnknownElementPolicy,
}

impl Classification {
    pub fn new(policy: UnknownElementPolicy) -> Self {
        Classification {
            map: BTreeMap::new(),
            policy,
        }
    }

    pub fn insert(&mut self, element: Element, phi: MembraneType) {
        self.map.insert(element, phi);
    }

    pub fn get(&self, element: &Element) -> Option<MembraneType> {
        self.map.get(element).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Element, &MembraneType)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// The membrane type of `element` under the configured policy.
    pub fn lookup(&self, element: &Element) -> Result<MembraneType, TypeError> {
        match (self.map.get(element), self.policy) {
            (Some(phi), _) => Ok(*phi),
            (None, UnknownElementPolicy::Strict) => Err(TypeError::UnknownElement(element.clone())),
            (None, UnknownElementPolicy::Permissive) => {
                log::warn!("element {element} is not classified, assuming {{}}");
                Ok(MembraneType::EMPTY)
            }
        }
    }
}

impl<const N: usize> From<[(&str, MembraneType); N]> for Classification {
    fn from(entries: [(&str, MembraneType); N]) -> Self {
        let mut lambda = Classification::default();
        for (name, phi) in entries {
            lambda.insert(Element::new(name), phi);
        }
        lambda
    }
}

/// The typing rule whose side condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypingRule {
    Tcomp,
    TRlocOut,
    TRlocIn,
}

impl TypingRule {
    pub fn condition(self) -> &'static str {
        match self {
            TypingRule::Tcomp => "content features within membrane type",
            TypingRule::TRlocOut => "matched membrane type within produced membrane type",
            TypingRule::TRlocIn => {
                "produced features and matched membrane type within produced membrane type"
            }
        }
    }
}

impl fmt::Display for TypingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TypingRule::Tcomp => "Tcomp",
            TypingRule::TRlocOut => "TRlocOut",
            TypingRule::TRlocIn => "TRlocIn",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("element {0} is not classified")]
    UnknownElement(Element),
    #[error("variable {0} has no type")]
    UnboundVariable(Variable),
    #[error("variable {0} has a type of the wrong kind")]
    IllKinded(Variable),
    #[error("{rule}: {got} is not within {needed} ({}), at {location}", rule.condition())]
    SideConditionViolated {
        rule: TypingRule,
        location: String,
        got: String,
        needed: String,
    },
}

/// The features of a local rule.
///
/// Variables are counted outside nested rule bodies. The whole left-hand
/// side counts as a subterm for splitting, so `s` holds as soon as it has two
/// distinct variables.
pub fn features(r: &LocalRule) -> MembraneType {
    let (l1, l2) = (r.lhs(), r.rhs());
    let v1 = vars(l1, RuleBodies::Exclude);
    let v2 = vars(l2, RuleBodies::Exclude);
    let mut phi = MembraneType::EMPTY;
    if v2.is_subset(&v1) && v1.len() > v2.len() {
        phi = phi.with(Feature::D);
    }
    if occurrences(l2).values().any(|&n| n >= 2) {
        phi = phi.with(Feature::R);
    }
    if v1.len() >= 2 {
        phi = phi.with(Feature::S);
    }
    if occurrences(l1).values().any(|&n| n >= 2) {
        phi = phi.with(Feature::E);
    }
    match r {
        LocalRule::Plain { .. } => phi,
        LocalRule::Out { .. } => phi.with(Feature::O),
        LocalRule::In { .. } => phi.with(Feature::I),
    }
}

/// The membrane type of a sequence: the union of the types of its atoms.
pub fn type_seq(
    delta: &Basis,
    lambda: &Classification,
    sp: &SeqPattern,
) -> Result<MembraneType, TypeError> {
    sp.atoms()
        .iter()
        .try_fold(MembraneType::EMPTY, |acc, atom| {
            let phi = match atom {
                Atom::Elem(e) => lambda.lookup(e)?,
                Atom::ElemVar(_) | Atom::SeqVar(_) => {
                    let var = atom.variable().expect("variable atom");
                    match delta.get(&var) {
                        Some(VarType::Membrane(phi)) => *phi,
                        Some(VarType::Pattern(_)) => return Err(TypeError::IllKinded(var)),
                        None => return Err(TypeError::UnboundVariable(var)),
                    }
                }
            };
            Ok(acc.union(phi))
        })
}

/// The type of a pattern under `delta`.
pub fn type_pattern(
    delta: &Basis,
    lambda: &Classification,
    p: &Pattern,
) -> Result<PatternType, TypeError> {
    match p {
        Pattern::Seq(_) => Ok(PatternType::empty()),
        Pattern::Var(n) => {
            let var = Variable {
                kind: VarKind::Term,
                name: n.clone(),
            };
            match delta.get(&var) {
                Some(VarType::Pattern(tau)) => Ok(tau.clone()),
                Some(VarType::Membrane(_)) => Err(TypeError::IllKinded(var)),
                None => Err(TypeError::UnboundVariable(var)),
            }
        }
        Pattern::Par(ms) => ms.iter().try_fold(PatternType::empty(), |acc, m| {
            Ok(union_type(&acc, &type_pattern(delta, lambda, m)?))
        }),
        Pattern::Loop(m, c) => {
            let phi = type_seq(delta, lambda, m)?;
            let (head, tail) = type_pattern(delta, lambda, c)?.split_head();
            if !head.is_subset(phi) {
                return Err(TypeError::SideConditionViolated {
                    rule: TypingRule::Tcomp,
                    location: p.to_string(),
                    got: head.to_string(),
                    needed: phi.to_string(),
                });
            }
            Ok(tail)
        }
        Pattern::Rule(r) => type_rule(&Basis::new(), lambda, r),
    }
}

/// The type of a local rule whose own variables are typed by `delta`.
pub fn type_local_rule(
    delta: &Basis,
    lambda: &Classification,
    r: &LocalRule,
) -> Result<PatternType, TypeError> {
    type_rule(delta, lambda, r)
}

/// Whether both sides type under `delta` and the right-hand side has no more
/// features than the left.
pub fn check_global(
    delta: &Basis,
    lambda: &Classification,
    g: &GlobalRule,
) -> Result<bool, TypeError> {
    let t1 = type_pattern(delta, lambda, &g.lhs)?;
    let t2 = type_pattern(delta, lambda, &g.rhs)?;
    Ok(contained(&t2, &t1))
}

/// The basis recording the type of each image of `sigma`.
pub fn infer_basis(sigma: &Instantiation, lambda: &Classification) -> Result<Basis, TypeError> {
    let empty = Basis::new();
    sigma
        .iter()
        .map(|(var, image)| {
            let ty = match image {
                Binding::Term(t) => VarType::Pattern(type_pattern(&empty, lambda, t)?),
                other => VarType::Membrane(type_seq(
                    &empty,
                    lambda,
                    &other.as_seq().expect("sequence image"),
                )?),
            };
            Ok((var.clone(), ty))
        })
        .collect()
}

/// A membrane type with some variables left open: the union of `known` and
/// the unknown types of `open`.
struct OpenType {
    known: MembraneType,
    open: BTreeSet<Variable>,
}

impl OpenType {
    fn of(delta: &Basis, lambda: &Classification, sp: &SeqPattern) -> Result<OpenType, TypeError> {
        let mut known = MembraneType::EMPTY;
        let mut open = BTreeSet::new();
        for atom in sp.atoms() {
            match atom {
                Atom::Elem(e) => known = known.union(lambda.lookup(e)?),
                _ => {
                    let var = atom.variable().expect("variable atom");
                    match delta.get(&var) {
                        Some(VarType::Membrane(phi)) => known = known.union(*phi),
                        Some(VarType::Pattern(_)) => return Err(TypeError::IllKinded(var)),
                        None => {
                            open.insert(var);
                        }
                    }
                }
            }
        }
        Ok(OpenType { known, open })
    }

    /// Inclusion for every choice of types for the open variables.
    fn within(&self, other: &OpenType) -> bool {
        self.known.is_subset(other.known)
            && (other.known == MembraneType::FULL || self.open.is_subset(&other.open))
    }
}

impl fmt::Display for OpenType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.known)?;
        for v in &self.open {
            write!(f, " ∪ type({v})")?;
        }
        Ok(())
    }
}

fn type_rule(
    delta: &Basis,
    lambda: &Classification,
    r: &LocalRule,
) -> Result<PatternType, TypeError> {
    let rhs = type_pattern(delta, lambda, r.rhs())?;
    match r {
        LocalRule::Plain { .. } => Ok(union_type(&PatternType::single(features(r)), &rhs)),
        LocalRule::Out {
            lhs_mem, rhs_mem, ..
        } => {
            let phi1 = OpenType::of(delta, lambda, lhs_mem)?;
            let phi2 = OpenType::of(delta, lambda, rhs_mem)?;
            if !phi1.within(&phi2) {
                return Err(TypeError::SideConditionViolated {
                    rule: TypingRule::TRlocOut,
                    location: r.to_string(),
                    got: phi1.to_string(),
                    needed: phi2.to_string(),
                });
            }
            Ok(rhs.cons(MembraneType::of(&[Feature::O])))
        }
        LocalRule::In {
            lhs_mem, rhs_mem, ..
        } => {
            let (head, tail) = rhs.split_head();
            let mut phi1 = OpenType::of(delta, lambda, lhs_mem)?;
            phi1.known = phi1.known.union(head);
            let phi2 = OpenType::of(delta, lambda, rhs_mem)?;
            if !phi1.within(&phi2) {
                return Err(TypeError::SideConditionViolated {
                    rule: TypingRule::TRlocIn,
                    location: r.to_string(),
                    got: phi1.to_string(),
                    needed: phi2.to_string(),
                });
            }
            Ok(union_type(
                &PatternType::single(MembraneType::of(&[Feature::I])),
                &tail,
            ))
        }
    }
}
