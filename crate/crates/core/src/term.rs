//! Patterns, terms and local rules, with structural congruence decided by a
//! canonical normal form.
//!
//! A pattern is built from sequences of atoms, looping sequences wrapping a
//! content (`loop(m)[p]`), parallel composition, embedded local rules and term
//! variables. Terms are the patterns whose variables only occur inside
//! embedded rules.
//!
//! [`normalize`] computes the representative of a congruence class:
//!
//! * sequences are kept as flat atom lists, so associativity and the unit
//!   laws for `.` hold by construction;
//! * parallel compositions are flattened, `eps` members dropped, and the
//!   members sorted by their rendered text;
//! * a loop membrane is replaced by its least rotation, and `loop(eps)[eps]`
//!   collapses to `eps`;
//! * embedded rules are normalized side by side. Their membranes are plain
//!   sequences and are never rotated.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Interned identifier text.
pub type Name = Arc<str>;

/// A symbol of the alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(Name);

impl Element {
    pub fn new(name: &str) -> Self {
        debug_assert!(is_identifier(name), "invalid element name {name:?}");
        Element(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Nonempty and made of `[A-Za-z0-9_]`.
pub fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    /// Binds exactly one element (`?x`).
    Element,
    /// Binds a possibly empty sequence (`~x`).
    Sequence,
    /// Binds a term (`$X`).
    Term,
}

impl VarKind {
    pub fn sigil(self) -> char {
        match self {
            VarKind::Element => '?',
            VarKind::Sequence => '~',
            VarKind::Term => '$',
        }
    }
}

/// A variable; the three kinds are disjoint namespaces.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    pub kind: VarKind,
    pub name: Name,
}

impl Variable {
    pub fn new(kind: VarKind, name: &str) -> Self {
        Variable {
            kind,
            name: Arc::from(name),
        }
    }

    pub fn element(name: &str) -> Self {
        Self::new(VarKind::Element, name)
    }

    pub fn sequence(name: &str) -> Self {
        Self::new(VarKind::Sequence, name)
    }

    pub fn term(name: &str) -> Self {
        Self::new(VarKind::Term, name)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.sigil(), self.name)
    }
}

/// One position of a sequence pattern.
///
/// The derived order (elements before element variables before sequence
/// variables, then by name) is the order used to pick canonical rotations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Elem(Element),
    ElemVar(Name),
    SeqVar(Name),
}

impl Atom {
    pub fn elem(name: &str) -> Self {
        Atom::Elem(Element::new(name))
    }

    pub fn elem_var(name: &str) -> Self {
        Atom::ElemVar(Arc::from(name))
    }

    pub fn seq_var(name: &str) -> Self {
        Atom::SeqVar(Arc::from(name))
    }

    pub fn variable(&self) -> Option<Variable> {
        match self {
            Atom::Elem(_) => None,
            Atom::ElemVar(n) => Some(Variable {
                kind: VarKind::Element,
                name: n.clone(),
            }),
            Atom::SeqVar(n) => Some(Variable {
                kind: VarKind::Sequence,
                name: n.clone(),
            }),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Elem(e) => write!(f, "{e}"),
            Atom::ElemVar(n) => write!(f, "?{n}"),
            Atom::SeqVar(n) => write!(f, "~{n}"),
        }
    }
}

/// A sequence pattern, stored flat. The empty list is `eps`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeqPattern(Vec<Atom>);

impl SeqPattern {
    pub fn new(atoms: Vec<Atom>) -> Self {
        SeqPattern(atoms)
    }

    pub fn epsilon() -> Self {
        SeqPattern(Vec::new())
    }

    /// A ground sequence from element names.
    pub fn elements<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        SeqPattern(names.into_iter().map(Atom::elem).collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn into_atoms(self) -> Vec<Atom> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &SeqPattern) -> SeqPattern {
        let mut atoms = self.0.clone();
        atoms.extend(other.0.iter().cloned());
        SeqPattern(atoms)
    }

    pub fn is_ground(&self) -> bool {
        self.0.iter().all(|a| matches!(a, Atom::Elem(_)))
    }

    /// All rotations, starting with the identity rotation. Duplicates are
    /// kept.
    pub fn rotations(&self) -> impl Iterator<Item = SeqPattern> + '_ {
        let n = self.0.len().max(1);
        (0..n).map(move |k| {
            let mut atoms = self.0.clone();
            if !atoms.is_empty() {
                atoms.rotate_left(k);
            }
            SeqPattern(atoms)
        })
    }

    /// The lexicographically least rotation.
    pub fn canonical_rotation(&self) -> SeqPattern {
        let n = self.0.len();
        if n < 2 {
            return self.clone();
        }
        let best = (1..n).fold(0, |best, k| {
            let cand = self.0[k..].iter().chain(&self.0[..k]);
            let cur = self.0[best..].iter().chain(&self.0[..best]);
            if cand.lt(cur) {
                k
            } else {
                best
            }
        });
        let mut atoms = self.0.clone();
        atoms.rotate_left(best);
        SeqPattern(atoms)
    }

    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        out.extend(self.0.iter().filter_map(Atom::variable));
    }
}

impl fmt::Display for SeqPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("eps");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl From<Vec<Atom>> for SeqPattern {
    fn from(atoms: Vec<Atom>) -> Self {
        SeqPattern(atoms)
    }
}

/// Patterns. A normalized pattern is one of: `eps` (the empty sequence), a
/// single item, or a `Par` with at least two items, where an item is a
/// nonempty sequence, a loop, a rule or a term variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pattern {
    Seq(SeqPattern),
    Loop(SeqPattern, Box<Pattern>),
    Par(Vec<Pattern>),
    Rule(Box<LocalRule>),
    Var(Name),
}

impl Pattern {
    pub fn eps() -> Self {
        Pattern::Seq(SeqPattern::epsilon())
    }

    /// A single-element sequence.
    pub fn elem(name: &str) -> Self {
        Pattern::Seq(SeqPattern::new(vec![Atom::elem(name)]))
    }

    pub fn seq(atoms: Vec<Atom>) -> Self {
        Pattern::Seq(SeqPattern::new(atoms))
    }

    pub fn looping(membrane: SeqPattern, content: Pattern) -> Self {
        Pattern::Loop(membrane, Box::new(content))
    }

    pub fn par(members: Vec<Pattern>) -> Self {
        Pattern::Par(members)
    }

    pub fn rule(rule: LocalRule) -> Self {
        Pattern::Rule(Box::new(rule))
    }

    pub fn var(name: &str) -> Self {
        Pattern::Var(Arc::from(name))
    }

    /// Syntactic emptiness: `eps` or an empty `Par`. Call on normalized
    /// patterns to decide `≡ eps`.
    pub fn is_eps(&self) -> bool {
        match self {
            Pattern::Seq(s) => s.is_empty(),
            Pattern::Par(ms) => ms.is_empty(),
            _ => false,
        }
    }

    /// The parallel members of a normalized pattern.
    pub fn items(&self) -> &[Pattern] {
        match self {
            Pattern::Par(ms) => ms,
            p if p.is_eps() => &[],
            p => std::slice::from_ref(p),
        }
    }

    /// Builds the normalized parallel composition of already normalized
    /// items.
    pub fn from_items(items: Vec<Pattern>) -> Pattern {
        normalize(&Pattern::Par(items))
    }

    pub fn normalize(&self) -> Pattern {
        normalize(self)
    }
}

impl Default for Pattern {
    fn default() -> Self {
        Pattern::eps()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Seq(s) => write!(f, "{s}"),
            Pattern::Var(n) => write!(f, "${n}"),
            Pattern::Loop(m, c) => write!(f, "loop({m})[{c}]"),
            Pattern::Rule(r) => write!(f, "{r}"),
            Pattern::Par(ms) if ms.is_empty() => f.write_str("eps"),
            Pattern::Par(ms) => {
                for (i, m) in ms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    if matches!(m, Pattern::Par(inner) if !inner.is_empty()) {
                        write!(f, "({m})")?;
                    } else {
                        write!(f, "{m}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// A local rule. `Out` rules send their right-hand side out of the
/// enclosing membrane, `In` rules send it into a sibling compartment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LocalRule {
    Plain {
        lhs: Pattern,
        rhs: Pattern,
    },
    Out {
        lhs: Pattern,
        lhs_mem: SeqPattern,
        rhs: Pattern,
        rhs_mem: SeqPattern,
    },
    In {
        lhs: Pattern,
        lhs_mem: SeqPattern,
        rhs: Pattern,
        rhs_mem: SeqPattern,
    },
}

impl LocalRule {
    pub fn plain(lhs: Pattern, rhs: Pattern) -> Self {
        LocalRule::Plain { lhs, rhs }
    }

    pub fn out(lhs: Pattern, lhs_mem: SeqPattern, rhs: Pattern, rhs_mem: SeqPattern) -> Self {
        LocalRule::Out {
            lhs,
            lhs_mem,
            rhs,
            rhs_mem,
        }
    }

    pub fn inward(lhs: Pattern, lhs_mem: SeqPattern, rhs: Pattern, rhs_mem: SeqPattern) -> Self {
        LocalRule::In {
            lhs,
            lhs_mem,
            rhs,
            rhs_mem,
        }
    }

    pub fn lhs(&self) -> &Pattern {
        match self {
            LocalRule::Plain { lhs, .. }
            | LocalRule::Out { lhs, .. }
            | LocalRule::In { lhs, .. } => lhs,
        }
    }

    pub fn rhs(&self) -> &Pattern {
        match self {
            LocalRule::Plain { rhs, .. }
            | LocalRule::Out { rhs, .. }
            | LocalRule::In { rhs, .. } => rhs,
        }
    }

    /// `(S1, S2)` for out and in rules.
    pub fn membranes(&self) -> Option<(&SeqPattern, &SeqPattern)> {
        match self {
            LocalRule::Plain { .. } => None,
            LocalRule::Out {
                lhs_mem, rhs_mem, ..
            }
            | LocalRule::In {
                lhs_mem, rhs_mem, ..
            } => Some((lhs_mem, rhs_mem)),
        }
    }

    pub fn normalize(&self) -> LocalRule {
        match self {
            LocalRule::Plain { lhs, rhs } => LocalRule::Plain {
                lhs: normalize(lhs),
                rhs: normalize(rhs),
            },
            LocalRule::Out {
                lhs,
                lhs_mem,
                rhs,
                rhs_mem,
            } => LocalRule::Out {
                lhs: normalize(lhs),
                lhs_mem: lhs_mem.clone(),
                rhs: normalize(rhs),
                rhs_mem: rhs_mem.clone(),
            },
            LocalRule::In {
                lhs,
                lhs_mem,
                rhs,
                rhs_mem,
            } => LocalRule::In {
                lhs: normalize(lhs),
                lhs_mem: lhs_mem.clone(),
                rhs: normalize(rhs),
                rhs_mem: rhs_mem.clone(),
            },
        }
    }
}

impl fmt::Display for LocalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalRule::Plain { lhs, rhs } => write!(f, "{{{lhs} => {rhs}}}"),
            LocalRule::Out {
                lhs,
                lhs_mem,
                rhs,
                rhs_mem,
            } => {
                write!(f, "{{{lhs} ^ {lhs_mem} => {rhs} ^ {rhs_mem}}}")
            }
            LocalRule::In {
                lhs,
                lhs_mem,
                rhs,
                rhs_mem,
            } => {
                write!(f, "{{{lhs} @ {lhs_mem} => {rhs} @ {rhs_mem}}}")
            }
        }
    }
}

/// Canonical representative of the congruence class of `p`.
pub fn normalize(p: &Pattern) -> Pattern {
    match p {
        Pattern::Seq(_) | Pattern::Var(_) => p.clone(),
        Pattern::Rule(r) => Pattern::Rule(Box::new(r.normalize())),
        Pattern::Loop(m, c) => {
            let content = normalize(c);
            if m.is_empty() && content.is_eps() {
                Pattern::eps()
            } else {
                Pattern::Loop(m.canonical_rotation(), Box::new(content))
            }
        }
        Pattern::Par(ms) => {
            let mut flat = Vec::with_capacity(ms.len());
            for m in ms {
                match normalize(m) {
                    Pattern::Par(inner) => flat.extend(inner),
                    n if n.is_eps() => {}
                    n => flat.push(n),
                }
            }
            sort_canonically(&mut flat);
            match flat.len() {
                0 => Pattern::eps(),
                1 => flat.pop().expect("one member"),
                _ => Pattern::Par(flat),
            }
        }
    }
}

/// Sorts parallel members by their rendered text.
pub fn sort_canonically(items: &mut [Pattern]) {
    items.sort_by_cached_key(|m| m.to_string());
}

/// Structural congruence.
pub fn equiv(p1: &Pattern, p2: &Pattern) -> bool {
    normalize(p1) == normalize(p2)
}

/// Whether [`vars`] looks inside embedded rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleBodies {
    Include,
    Exclude,
}

/// The variables occurring in `p`.
pub fn vars(p: &Pattern, bodies: RuleBodies) -> BTreeSet<Variable> {
    let mut out = BTreeSet::new();
    collect_vars(p, bodies, &mut out);
    out
}

fn collect_vars(p: &Pattern, bodies: RuleBodies, out: &mut BTreeSet<Variable>) {
    match p {
        Pattern::Seq(s) => s.collect_vars(out),
        Pattern::Var(n) => {
            out.insert(Variable {
                kind: VarKind::Term,
                name: n.clone(),
            });
        }
        Pattern::Loop(m, c) => {
            m.collect_vars(out);
            collect_vars(c, bodies, out);
        }
        Pattern::Par(ms) => ms.iter().for_each(|m| collect_vars(m, bodies, out)),
        Pattern::Rule(r) => {
            if bodies == RuleBodies::Include {
                collect_vars(r.lhs(), bodies, out);
                collect_vars(r.rhs(), bodies, out);
                if let Some((s1, s2)) = r.membranes() {
                    s1.collect_vars(out);
                    s2.collect_vars(out);
                }
            }
        }
    }
}

/// Free variables of a sequence pattern.
pub fn seq_vars(s: &SeqPattern) -> BTreeSet<Variable> {
    let mut out = BTreeSet::new();
    s.collect_vars(&mut out);
    out
}

/// Occurrence count of each variable outside embedded rules.
pub fn occurrences(p: &Pattern) -> BTreeMap<Variable, usize> {
    fn go(p: &Pattern, out: &mut BTreeMap<Variable, usize>) {
        match p {
            Pattern::Seq(s) => {
                for v in s.atoms().iter().filter_map(Atom::variable) {
                    *out.entry(v).or_default() += 1;
                }
            }
            Pattern::Var(n) => {
                *out.entry(Variable {
                    kind: VarKind::Term,
                    name: n.clone(),
                })
                .or_default() += 1;
            }
            Pattern::Loop(m, c) => {
                go(&Pattern::Seq(m.clone()), out);
                go(c, out);
            }
            Pattern::Par(ms) => ms.iter().for_each(|m| go(m, out)),
            Pattern::Rule(_) => {}
        }
    }
    let mut out = BTreeMap::new();
    go(p, &mut out);
    out
}

/// Terms are patterns whose variables all sit inside embedded rules.
pub fn is_ground(p: &Pattern) -> bool {
    vars(p, RuleBodies::Exclude).is_empty()
}

/// The well-formedness conditions on local rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WfClause {
    /// The left-hand side is congruent to `eps`.
    EmptyLhs,
    /// A right-hand side variable does not occur in the left-hand side.
    RhsVarsNotInLhs,
    /// A variable of the produced membrane does not occur in the matched one.
    MembraneVarsNotInLhs,
    /// A rule side contains a loop, which the local rule grammar forbids.
    LoopInRuleSide,
}

impl fmt::Display for WfClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WfClause::EmptyLhs => "left-hand side is eps",
            WfClause::RhsVarsNotInLhs => {
                "right-hand side uses variables not bound by the left-hand side"
            }
            WfClause::MembraneVarsNotInLhs => {
                "produced membrane uses variables not bound by the matched membrane"
            }
            WfClause::LoopInRuleSide => "local rule sides may not contain loops",
        })
    }
}

/// Checks the clauses of a single rule (nested rules are not visited).
///
/// Variables are compared outside nested rule bodies: embedded rules are
/// never instantiated, so a variable that only occurs inside one of them
/// cannot be bound by matching the left-hand side.
pub fn check_local_rule(r: &LocalRule) -> Result<(), WfClause> {
    if contains_loop(r.lhs()) || contains_loop(r.rhs()) {
        return Err(WfClause::LoopInRuleSide);
    }
    if normalize(r.lhs()).is_eps() {
        return Err(WfClause::EmptyLhs);
    }
    let lhs_vars = vars(r.lhs(), RuleBodies::Exclude);
    if !vars(r.rhs(), RuleBodies::Exclude).is_subset(&lhs_vars) {
        return Err(WfClause::RhsVarsNotInLhs);
    }
    if let Some((s1, s2)) = r.membranes() {
        if !seq_vars(s2).is_subset(&seq_vars(s1)) {
            return Err(WfClause::MembraneVarsNotInLhs);
        }
    }
    Ok(())
}

pub fn well_formed_local_rule(r: &LocalRule) -> bool {
    check_local_rule(r).is_ok()
}

fn contains_loop(p: &Pattern) -> bool {
    match p {
        Pattern::Loop(..) => true,
        Pattern::Par(ms) => ms.iter().any(contains_loop),
        _ => false,
    }
}

/// Every rule embedded in `p`, outermost first, including rules nested in
/// rule bodies.
pub fn embedded_rules(p: &Pattern) -> Vec<&LocalRule> {
    fn go<'a>(p: &'a Pattern, out: &mut Vec<&'a LocalRule>) {
        match p {
            Pattern::Loop(_, c) => go(c, out),
            Pattern::Par(ms) => ms.iter().for_each(|m| go(m, out)),
            Pattern::Rule(r) => {
                out.push(r);
                go(r.lhs(), out);
                go(r.rhs(), out);
            }
            Pattern::Seq(_) | Pattern::Var(_) => {}
        }
    }
    let mut out = Vec::new();
    go(p, &mut out);
    out
}

/// A rewrite rule applicable anywhere in a term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalRule {
    pub lhs: Pattern,
    pub rhs: Pattern,
}

/// Why a global rule is rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobalWfError {
    EmptyLhs,
    RhsVarsNotInLhs,
}

impl fmt::Display for GlobalWfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GlobalWfError::EmptyLhs => "left-hand side is eps",
            GlobalWfError::RhsVarsNotInLhs => {
                "right-hand side uses variables not bound by the left-hand side"
            }
        })
    }
}

impl GlobalRule {
    /// Builds a rule with normalized sides, checking that the left-hand side
    /// is not `eps` and binds every variable of the right-hand side.
    pub fn new(lhs: Pattern, rhs: Pattern) -> Result<Self, GlobalWfError> {
        let lhs = normalize(&lhs);
        let rhs = normalize(&rhs);
        if lhs.is_eps() {
            return Err(GlobalWfError::EmptyLhs);
        }
        if !vars(&rhs, RuleBodies::Exclude).is_subset(&vars(&lhs, RuleBodies::Exclude)) {
            return Err(GlobalWfError::RhsVarsNotInLhs);
        }
        Ok(GlobalRule { lhs, rhs })
    }
}

impl fmt::Display for GlobalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.lhs, self.rhs)
    }
}
