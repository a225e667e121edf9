//! Matching modulo structural congruence and substitution.
//!
//! Parallel members match as multisets, membranes match up to rotation and
//! sequences match by contiguous splitting. Embedded rules are opaque: a rule
//! in a pattern matches a congruent rule and is never instantiated.

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::term::{normalize, Atom, Element, Pattern, SeqPattern, VarKind, Variable};
use crate::types::{type_pattern, type_seq, Basis, Classification, TypeError, VarType};

/// Default bound on explored candidates per matching problem.
pub const DEFAULT_MATCH_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("unbound variable {0}")]
    UnboundVariable(Variable),
    #[error("variable {var} cannot be bound to {value}")]
    KindMismatch { var: Variable, value: String },
    #[error("matching explored more than {cap} candidates")]
    ResourceCap { cap: usize },
}

/// The image of a variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Binding {
    Elem(Element),
    Seq(SeqPattern),
    Term(Pattern),
}

impl Binding {
    fn fits(&self, kind: VarKind) -> bool {
        matches!(
            (self, kind),
            (Binding::Elem(_), VarKind::Element)
                | (Binding::Seq(_), VarKind::Sequence)
                | (Binding::Term(_), VarKind::Term)
        )
    }

    /// The image as a sequence (element images are one-atom sequences).
    pub fn as_seq(&self) -> Option<SeqPattern> {
        match self {
            Binding::Elem(e) => Some(SeqPattern::new(vec![Atom::Elem(e.clone())])),
            Binding::Seq(s) => Some(s.clone()),
            Binding::Term(_) => None,
        }
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binding::Elem(e) => write!(f, "{e}"),
            Binding::Seq(s) => write!(f, "{s}"),
            Binding::Term(t) => write!(f, "{t}"),
        }
    }
}

/// A finite, kind-correct map from variables to ground images.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Instantiation {
    map: BTreeMap<Variable, Binding>,
}

impl Instantiation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `var`, normalizing term images. Sequence and term images must be
    /// ground.
    pub fn bind(&mut self, var: Variable, value: Binding) -> Result<(), MatchError> {
        let ground = match &value {
            Binding::Elem(_) => true,
            Binding::Seq(s) => s.is_ground(),
            Binding::Term(t) => crate::term::is_ground(t),
        };
        if !value.fits(var.kind) || !ground {
            return Err(MatchError::KindMismatch {
                var,
                value: value.to_string(),
            });
        }
        let value = match value {
            Binding::Term(t) => Binding::Term(normalize(&t)),
            other => other,
        };
        self.map.insert(var, value);
        Ok(())
    }

    /// Builder form of [`Instantiation::bind`].
    pub fn with(mut self, var: Variable, value: Binding) -> Result<Self, MatchError> {
        self.bind(var, value)?;
        Ok(self)
    }

    pub fn get(&self, var: &Variable) -> Option<&Binding> {
        self.map.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Binding)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn extended(&self, var: Variable, value: Binding) -> Instantiation {
        let mut next = self.clone();
        next.map.insert(var, value);
        next
    }
}

impl fmt::Display for Instantiation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, b)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} -> {b}")?;
        }
        f.write_str("}")
    }
}

/// `sp` with its variables replaced.
pub fn substitute_seq(sp: &SeqPattern, sigma: &Instantiation) -> Result<SeqPattern, MatchError> {
    let mut out = Vec::with_capacity(sp.len());
    for atom in sp.atoms() {
        match atom {
            Atom::Elem(_) => out.push(atom.clone()),
            Atom::ElemVar(_) | Atom::SeqVar(_) => {
                let var = atom.variable().expect("variable atom");
                match sigma.get(&var) {
                    Some(Binding::Elem(e)) if var.kind == VarKind::Element => {
                        out.push(Atom::Elem(e.clone()))
                    }
                    Some(Binding::Seq(s)) if var.kind == VarKind::Sequence => {
                        out.extend(s.atoms().iter().cloned())
                    }
                    _ => return Err(MatchError::UnboundVariable(var)),
                }
            }
        }
    }
    Ok(SeqPattern::new(out))
}

/// `p` with its variables replaced, normalized. Embedded rules are left as
/// they are.
pub fn substitute(p: &Pattern, sigma: &Instantiation) -> Result<Pattern, MatchError> {
    fn go(p: &Pattern, sigma: &Instantiation) -> Result<Pattern, MatchError> {
        Ok(match p {
            Pattern::Seq(s) => Pattern::Seq(substitute_seq(s, sigma)?),
            Pattern::Var(n) => {
                let var = Variable {
                    kind: VarKind::Term,
                    name: n.clone(),
                };
                match sigma.get(&var) {
                    Some(Binding::Term(t)) => t.clone(),
                    _ => return Err(MatchError::UnboundVariable(var)),
                }
            }
            Pattern::Loop(m, c) => Pattern::looping(substitute_seq(m, sigma)?, go(c, sigma)?),
            Pattern::Par(ms) => {
                Pattern::Par(ms.iter().map(|m| go(m, sigma)).collect::<Result<_, _>>()?)
            }
            Pattern::Rule(_) => p.clone(),
        })
    }
    Ok(normalize(&go(p, sigma)?))
}

/// Whether every variable of `delta` is bound in `sigma` to an image of
/// exactly the recorded type.
pub fn agrees(
    sigma: &Instantiation,
    delta: &Basis,
    lambda: &Classification,
) -> Result<bool, TypeError> {
    let empty = Basis::new();
    for (var, ty) in delta {
        let Some(image) = sigma.get(var) else {
            return Ok(false);
        };
        let same = match (image, ty) {
            (Binding::Term(t), VarType::Pattern(tau)) => type_pattern(&empty, lambda, t)? == *tau,
            (Binding::Elem(_) | Binding::Seq(_), VarType::Membrane(phi)) => {
                type_seq(&empty, lambda, &image.as_seq().expect("sequence image"))? == *phi
            }
            _ => false,
        };
        if !same {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All instantiations making `p` congruent to the ground term `t`, with the
/// default resource cap.
pub fn match_pattern(p: &Pattern, t: &Pattern) -> Result<Vec<Instantiation>, MatchError> {
    Matcher::default().matches(p, t)
}

/// Matching entry points with a configurable resource cap.
#[derive(Debug, Clone, Copy)]
pub struct Matcher {
    pub cap: usize,
}

impl Default for Matcher {
    fn default() -> Self {
        Matcher {
            cap: DEFAULT_MATCH_CAP,
        }
    }
}

impl Matcher {
    pub fn new(cap: usize) -> Self {
        Matcher { cap }
    }

    /// All σ with `pσ ≡ t`, deduplicated, in enumeration order.
    pub fn matches(&self, p: &Pattern, t: &Pattern) -> Result<Vec<Instantiation>, MatchError> {
        let p = normalize(p);
        let t = normalize(t);
        let search = Search::new(self.cap);
        let mut out = Solutions::default();
        search.level(
            &p,
            t.items(),
            Mode::Exact,
            &Instantiation::new(),
            &mut |s| {
                out.push(s);
                Ok(())
            },
        )?;
        Ok(out.list)
    }

    /// All σ extending `init` such that `pσ` is congruent to a sub-multiset
    /// of `available` (a list of normalized ground parallel items).
    pub fn matches_within(
        &self,
        p: &Pattern,
        available: &[Pattern],
        init: &Instantiation,
    ) -> Result<Vec<Instantiation>, MatchError> {
        let p = normalize(p);
        let search = Search::new(self.cap);
        let mut out = Solutions::default();
        search.level(&p, available, Mode::Sub, init, &mut |s| {
            out.push(s);
            Ok(())
        })?;
        Ok(out.list)
    }

    /// All σ extending `init` such that `sσ` is a rotation of the ground
    /// `membrane`.
    pub fn matches_membrane(
        &self,
        s: &SeqPattern,
        membrane: &SeqPattern,
        init: &Instantiation,
    ) -> Result<Vec<Instantiation>, MatchError> {
        let search = Search::new(self.cap);
        let mut out = Solutions::default();
        search.membrane(s, membrane, init, &mut |s| {
            out.push(s);
            Ok(())
        })?;
        Ok(out.list)
    }
}

#[derive(Default)]
struct Solutions {
    seen: BTreeSet<Instantiation>,
    list: Vec<Instantiation>,
}

impl Solutions {
    fn push(&mut self, s: &Instantiation) {
        if self.seen.insert(s.clone()) {
            self.list.push(s.clone());
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// The pattern must account for every ground item.
    Exact,
    /// The pattern may leave ground items unmatched.
    Sub,
}

type Cont<'a> = dyn FnMut(&Instantiation) -> Result<(), MatchError> + 'a;

struct Search {
    cap: usize,
    explored: Cell<usize>,
}

impl Search {
    fn new(cap: usize) -> Self {
        Search {
            cap,
            explored: Cell::new(0),
        }
    }

    fn tick(&self) -> Result<(), MatchError> {
        let n = self.explored.get() + 1;
        self.explored.set(n);
        if n > self.cap {
            Err(MatchError::ResourceCap { cap: self.cap })
        } else {
            Ok(())
        }
    }

    fn seq(
        &self,
        pat: &[Atom],
        g: &[Atom],
        sigma: &Instantiation,
        k: &mut Cont<'_>,
    ) -> Result<(), MatchError> {
        self.tick()?;
        let Some((first, rest)) = pat.split_first() else {
            return if g.is_empty() { k(sigma) } else { Ok(()) };
        };
        match first {
            Atom::Elem(a) => match g.first() {
                Some(Atom::Elem(b)) if a == b => self.seq(rest, &g[1..], sigma, k),
                _ => Ok(()),
            },
            Atom::ElemVar(n) => {
                let Some(Atom::Elem(b)) = g.first() else {
                    return Ok(());
                };
                let var = Variable {
                    kind: VarKind::Element,
                    name: n.clone(),
                };
                match sigma.get(&var) {
                    Some(Binding::Elem(a)) if a == b => self.seq(rest, &g[1..], sigma, k),
                    Some(_) => Ok(()),
                    None => self.seq(
                        rest,
                        &g[1..],
                        &sigma.extended(var, Binding::Elem(b.clone())),
                        k,
                    ),
                }
            }
            Atom::SeqVar(n) => {
                let var = Variable {
                    kind: VarKind::Sequence,
                    name: n.clone(),
                };
                match sigma.get(&var) {
                    Some(Binding::Seq(s)) => {
                        if g.starts_with(s.atoms()) {
                            self.seq(rest, &g[s.len()..], sigma, k)
                        } else {
                            Ok(())
                        }
                    }
                    Some(_) => Ok(()),
                    None => {
                        let needed = rest
                            .iter()
                            .filter(|a| !matches!(a, Atom::SeqVar(_)))
                            .count();
                        if needed > g.len() {
                            return Ok(());
                        }
                        for len in 0..=g.len() - needed {
                            let image = SeqPattern::new(g[..len].to_vec());
                            self.seq(
                                rest,
                                &g[len..],
                                &sigma.extended(var.clone(), Binding::Seq(image)),
                                k,
                            )?;
                        }
                        Ok(())
                    }
                }
            }
        }
    }

    fn membrane(
        &self,
        s: &SeqPattern,
        membrane: &SeqPattern,
        sigma: &Instantiation,
        k: &mut Cont<'_>,
    ) -> Result<(), MatchError> {
        let mut seen = BTreeSet::new();
        for rotation in membrane.rotations() {
            if seen.insert(rotation.clone()) {
                self.seq(s.atoms(), rotation.atoms(), sigma, k)?;
            }
        }
        Ok(())
    }

    /// Matches one non-variable pattern item against one ground item.
    fn item(
        &self,
        p: &Pattern,
        g: &Pattern,
        sigma: &Instantiation,
        k: &mut Cont<'_>,
    ) -> Result<(), MatchError> {
        match (p, g) {
            (Pattern::Seq(sp), Pattern::Seq(gs)) => self.seq(sp.atoms(), gs.atoms(), sigma, k),
            (Pattern::Loop(m, c), Pattern::Loop(gm, gc)) => {
                self.membrane(m, gm, sigma, &mut |s1| {
                    self.level(c, gc.items(), Mode::Exact, s1, k)
                })
            }
            (Pattern::Rule(r), Pattern::Rule(gr)) => {
                self.tick()?;
                if r == gr {
                    k(sigma)
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Matches a non-variable pattern item against no material at all, which
    /// succeeds when the item can instantiate to `eps`.
    fn nothing(
        &self,
        p: &Pattern,
        sigma: &Instantiation,
        k: &mut Cont<'_>,
    ) -> Result<(), MatchError> {
        match p {
            Pattern::Seq(sp) => self.seq(sp.atoms(), &[], sigma, k),
            Pattern::Loop(m, c) => self.seq(m.atoms(), &[], sigma, &mut |s1| {
                self.level(c, &[], Mode::Exact, s1, k)
            }),
            _ => Ok(()),
        }
    }

    fn level(
        &self,
        p: &Pattern,
        ground: &[Pattern],
        mode: Mode,
        sigma: &Instantiation,
        k: &mut Cont<'_>,
    ) -> Result<(), MatchError> {
        let mut term_vars: Vec<(Variable, usize)> = Vec::new();
        let mut items: Vec<&Pattern> = Vec::new();
        for item in p.items() {
            match item {
                Pattern::Var(n) => {
                    let var = Variable {
                        kind: VarKind::Term,
                        name: n.clone(),
                    };
                    match term_vars.iter_mut().find(|(v, _)| *v == var) {
                        Some((_, mult)) => *mult += 1,
                        None => term_vars.push((var, 1)),
                    }
                }
                other => items.push(other),
            }
        }
        let mut groups: Vec<(&Pattern, usize)> = Vec::new();
        for g in ground {
            match groups.iter_mut().find(|(h, _)| *h == g) {
                Some((_, c)) => *c += 1,
                None => groups.push((g, 1)),
            }
        }
        let keys: Vec<&Pattern> = groups.iter().map(|(g, _)| *g).collect();
        let mut counts: Vec<usize> = groups.iter().map(|(_, c)| *c).collect();
        let ctx = LevelCtx {
            items: &items,
            vars: &term_vars,
            groups: &keys,
            mode,
        };
        self.assign(&ctx, 0, &mut counts, sigma, k)
    }

    fn assign(
        &self,
        ctx: &LevelCtx<'_>,
        i: usize,
        counts: &mut Vec<usize>,
        sigma: &Instantiation,
        k: &mut Cont<'_>,
    ) -> Result<(), MatchError> {
        let Some(p) = ctx.items.get(i) else {
            return self.distribute(ctx, counts, sigma, k);
        };
        for j in 0..ctx.groups.len() {
            if counts[j] == 0 {
                continue;
            }
            counts[j] -= 1;
            let r = self.item(p, ctx.groups[j], sigma, &mut |s1| {
                self.assign(ctx, i + 1, counts, s1, k)
            });
            counts[j] += 1;
            r?;
        }
        self.nothing(p, sigma, &mut |s1| self.assign(ctx, i + 1, counts, s1, k))
    }

    /// Hands the remaining ground items to the term variables.
    fn distribute(
        &self,
        ctx: &LevelCtx<'_>,
        counts: &[usize],
        sigma: &Instantiation,
        k: &mut Cont<'_>,
    ) -> Result<(), MatchError> {
        self.tick()?;
        let mut counts = counts.to_vec();
        let mut unbound: Vec<(Variable, usize)> = Vec::new();
        for (var, mult) in ctx.vars {
            match sigma.get(var) {
                Some(Binding::Term(value)) => {
                    for item in value.items() {
                        match ctx.groups.iter().position(|g| *g == item) {
                            Some(j) if counts[j] >= *mult => counts[j] -= mult,
                            _ => return Ok(()),
                        }
                    }
                }
                Some(_) => return Ok(()),
                None => unbound.push((var.clone(), *mult)),
            }
        }
        let mut alloc = vec![vec![0usize; ctx.groups.len()]; unbound.len()];
        self.allocate(ctx, &unbound, 0, 0, &counts, &mut alloc, sigma, k)
    }

    /// Enumerates how many copies of group `j` each unbound variable takes,
    /// variable `u` at a time.
    #[allow(clippy::too_many_arguments)]
    fn allocate(
        &self,
        ctx: &LevelCtx<'_>,
        unbound: &[(Variable, usize)],
        j: usize,
        u: usize,
        left: &[usize],
        alloc: &mut Vec<Vec<usize>>,
        sigma: &Instantiation,
        k: &mut Cont<'_>,
    ) -> Result<(), MatchError> {
        if j == ctx.groups.len() {
            self.tick()?;
            let mut next = sigma.clone();
            for (ui, (var, _)) in unbound.iter().enumerate() {
                let mut members = Vec::new();
                for (gj, g) in ctx.groups.iter().enumerate() {
                    members.extend(std::iter::repeat_n((*g).clone(), alloc[ui][gj]));
                }
                next.map
                    .insert(var.clone(), Binding::Term(Pattern::from_items(members)));
            }
            return k(&next);
        }
        if u == unbound.len() {
            let spent: usize = (0..unbound.len())
                .map(|ui| alloc[ui][j] * unbound[ui].1)
                .sum();
            let fits = match ctx.mode {
                Mode::Exact => spent == left[j],
                Mode::Sub => spent <= left[j],
            };
            return if fits {
                self.allocate(ctx, unbound, j + 1, 0, left, alloc, sigma, k)
            } else {
                Ok(())
            };
        }
        let spent: usize = (0..u).map(|ui| alloc[ui][j] * unbound[ui].1).sum();
        let room = (left[j] - spent) / unbound[u].1;
        for take in 0..=room {
            alloc[u][j] = take;
            self.allocate(ctx, unbound, j, u + 1, left, alloc, sigma, k)?;
        }
        alloc[u][j] = 0;
        Ok(())
    }
}

struct LevelCtx<'a> {
    items: &'a [&'a Pattern],
    vars: &'a [(Variable, usize)],
    groups: &'a [&'a Pattern],
    mode: Mode,
}
