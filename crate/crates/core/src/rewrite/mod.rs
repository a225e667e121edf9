//! Untyped reduction: redex discovery, the four rule application schemas,
//! parallel steps and traces.
//!
//! A redex is addressed by a path of [`PathStep`]s from the top level of a
//! marked term. `Member(i)` selects the `i`-th parallel item of the current
//! level and `Content` enters the content of the selected loop. Paths of
//! global and plain local redexes end at a level; paths of out and in
//! redexes end with the `Member` step selecting the loop whose membrane the
//! rule acts on.

mod decompose;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::marked::{erase_items, MarkedItem, MarkedTerm};
use crate::matcher::{
    substitute, substitute_seq, Instantiation, MatchError, Matcher, DEFAULT_MATCH_CAP,
};
use crate::term::{is_ground, normalize, GlobalRule, LocalRule, Pattern};
use crate::types::TypeError;

pub use decompose::verify_decomposition;

/// Default bound on the number of applications within one parallel step.
pub const DEFAULT_STEP_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("stale label: {0}")]
    StaleLabel(String),
    #[error("more than {cap} applications in one parallel step")]
    StepCapExceeded { cap: usize },
    #[error("not a term: {0}")]
    NotGround(String),
}

/// The rule application schemas, in the order used to rank redexes at the
/// same path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Schema {
    #[serde(rename = "GRT")]
    Grt,
    #[serde(rename = "LR")]
    Lr,
    #[serde(rename = "LR-Out")]
    LrOut,
    #[serde(rename = "LR-In")]
    LrIn,
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Schema::Grt => "GRT",
            Schema::Lr => "LR",
            Schema::LrOut => "LR-Out",
            Schema::LrIn => "LR-In",
        })
    }
}

impl FromStr for Schema {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "GRT" => Ok(Schema::Grt),
            "LR" => Ok(Schema::Lr),
            "LR-Out" => Ok(Schema::LrOut),
            "LR-In" => Ok(Schema::LrIn),
            other => Err(format!("unknown schema {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStep {
    Member(usize),
    Content,
}

/// The rule a label applies.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleRef {
    Global(GlobalRule),
    Local(LocalRule),
}

impl fmt::Display for RuleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleRef::Global(g) => write!(f, "{g}"),
            RuleRef::Local(r) => write!(f, "{r}"),
        }
    }
}

/// One rule application.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReductionLabel {
    pub schema: Schema,
    pub rule: RuleRef,
    pub path: Vec<PathStep>,
    pub sigma: Instantiation,
    /// The untouched rest of the site: the level for plain local rules, the
    /// loop content for out and in rules, `eps` for global rules.
    pub residue: Pattern,
}

impl fmt::Display for ReductionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} at {} with {}",
            self.schema,
            self.rule,
            render_path(&self.path),
            self.sigma
        )
    }
}

/// Compact path notation, e.g. `0/1` for member 0, content, member 1.
pub fn render_path(path: &[PathStep]) -> String {
    let mut s = String::from("/");
    for step in path {
        match step {
            PathStep::Member(i) => s.push_str(&i.to_string()),
            PathStep::Content => s.push('/'),
        }
    }
    s
}

/// How many redexes a parallel step applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// The first redex only.
    Single,
    /// Up to `k` redexes, each picked uniformly at random.
    RandomK(usize),
    /// The first redex, repeatedly, until none is left.
    Maximal,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Single => f.write_str("single"),
            Strategy::RandomK(k) => write!(f, "random-k={k}"),
            Strategy::Maximal => f.write_str("maximal"),
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(Strategy::Single),
            "maximal" => Ok(Strategy::Maximal),
            _ => s
                .strip_prefix("random-k=")
                .and_then(|k| k.parse().ok())
                .map(Strategy::RandomK)
                .ok_or_else(|| format!("unknown strategy {s:?}")),
        }
    }
}

/// One parallel step: the applications performed and the erased result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub seed: u64,
    pub strategy: Strategy,
    pub initial: Pattern,
    pub steps: Vec<ReductionLabel>,
    pub final_term: Pattern,
}

impl Trace {
    /// Re-applies the labels to the initial term and returns the erased
    /// result.
    pub fn replay(&self) -> Result<Pattern, EngineError> {
        let mut mt = MarkedTerm::from_term(&self.initial);
        for lbl in &self.steps {
            mt = apply_label(&mt, lbl)?;
        }
        Ok(mt.erase())
    }
}

/// Global rules plus resource limits.
#[derive(Debug, Clone)]
pub struct Engine {
    pub globals: Vec<GlobalRule>,
    pub matcher: Matcher,
    pub step_cap: usize,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(Vec::new())
    }
}

impl Engine {
    pub fn new(globals: Vec<GlobalRule>) -> Self {
        Engine {
            globals,
            matcher: Matcher::new(DEFAULT_MATCH_CAP),
            step_cap: DEFAULT_STEP_CAP,
        }
    }

    /// Every redex of `mt`, ordered by path, then schema, then rule, then
    /// match order.
    pub fn find_redexes(&self, mt: &MarkedTerm) -> Result<Vec<ReductionLabel>, EngineError> {
        let mut found = Vec::new();
        self.walk(&mt.items, &mut Vec::new(), &mut found)?;
        found.sort_by(|a, b| a.key.cmp(&b.key));
        let mut labels: Vec<ReductionLabel> = Vec::with_capacity(found.len());
        for c in found {
            if !labels.contains(&c.label) {
                labels.push(c.label);
            }
        }
        Ok(labels)
    }

    fn walk(
        &self,
        items: &[MarkedItem],
        prefix: &mut Vec<PathStep>,
        out: &mut Vec<Candidate>,
    ) -> Result<(), EngineError> {
        let available: Vec<(usize, Pattern)> = items
            .iter()
            .enumerate()
            .filter(|(_, i)| i.is_frozen_free())
            .map(|(j, i)| (j, i.erase()))
            .collect();
        let avail_except = |skip: &[usize]| -> Vec<Pattern> {
            available
                .iter()
                .filter(|(j, _)| !skip.contains(j))
                .map(|(_, p)| p.clone())
                .collect()
        };
        let none = Instantiation::new();

        for (gi, g) in self.globals.iter().enumerate() {
            for sigma in self
                .matcher
                .matches_within(&g.lhs, &avail_except(&[]), &none)?
            {
                if substitute(&g.lhs, &sigma)?.is_eps() {
                    continue;
                }
                out.push(Candidate {
                    key: (prefix.clone(), Schema::Grt, RuleKey::Global(gi)),
                    label: ReductionLabel {
                        schema: Schema::Grt,
                        rule: RuleRef::Global(g.clone()),
                        path: prefix.clone(),
                        sigma,
                        residue: Pattern::eps(),
                    },
                });
            }
        }

        let rules = distinct_rules(items);
        let loops = distinct_loops(items);
        for &(ri, rule) in &rules {
            match rule {
                LocalRule::Plain { lhs, .. } => {
                    for sigma in self
                        .matcher
                        .matches_within(lhs, &avail_except(&[ri]), &none)?
                    {
                        let l1 = substitute(lhs, &sigma)?;
                        if l1.is_eps() {
                            continue;
                        }
                        let residue = complement(items, &[ri], &l1);
                        out.push(Candidate::local(
                            prefix.clone(),
                            Schema::Lr,
                            rule,
                            sigma,
                            residue,
                        ));
                    }
                }
                LocalRule::In { lhs, lhs_mem, .. } => {
                    for &j in &loops {
                        let MarkedItem::Loop {
                            membrane,
                            membrane_frozen: false,
                            content,
                            frozen: false,
                        } = &items[j]
                        else {
                            continue;
                        };
                        for sigma0 in self.matcher.matches_membrane(lhs_mem, membrane, &none)? {
                            for sigma in self.matcher.matches_within(
                                lhs,
                                &avail_except(&[ri, j]),
                                &sigma0,
                            )? {
                                if substitute(lhs, &sigma)?.is_eps() {
                                    continue;
                                }
                                let mut path = prefix.clone();
                                path.push(PathStep::Member(j));
                                out.push(Candidate::local(
                                    path,
                                    Schema::LrIn,
                                    rule,
                                    sigma,
                                    erase_items(content),
                                ));
                            }
                        }
                    }
                }
                LocalRule::Out { .. } => {}
            }
        }

        for &j in &loops {
            let MarkedItem::Loop {
                membrane,
                membrane_frozen,
                content,
                frozen,
            } = &items[j]
            else {
                unreachable!()
            };
            if !*membrane_frozen && !*frozen {
                let inner: Vec<(usize, Pattern)> = content
                    .iter()
                    .enumerate()
                    .filter(|(_, i)| i.is_frozen_free())
                    .map(|(k, i)| (k, i.erase()))
                    .collect();
                for (ri, rule) in distinct_rules(content) {
                    let LocalRule::Out { lhs, lhs_mem, .. } = rule else {
                        continue;
                    };
                    let avail: Vec<Pattern> = inner
                        .iter()
                        .filter(|(k, _)| *k != ri)
                        .map(|(_, p)| p.clone())
                        .collect();
                    for sigma0 in self.matcher.matches_membrane(lhs_mem, membrane, &none)? {
                        for sigma in self.matcher.matches_within(lhs, &avail, &sigma0)? {
                            let l1 = substitute(lhs, &sigma)?;
                            if l1.is_eps() {
                                continue;
                            }
                            let residue = complement(content, &[ri], &l1);
                            let mut path = prefix.clone();
                            path.push(PathStep::Member(j));
                            out.push(Candidate::local(path, Schema::LrOut, rule, sigma, residue));
                        }
                    }
                }
            }
            prefix.push(PathStep::Member(j));
            prefix.push(PathStep::Content);
            self.walk(content, prefix, out)?;
            prefix.pop();
            prefix.pop();
        }
        Ok(())
    }

    /// One parallel step with this engine's redexes.
    pub fn parallel_reduce(
        &self,
        t: &Pattern,
        strategy: Strategy,
        seed: u64,
    ) -> Result<Trace, EngineError> {
        self.reduce_with(t, strategy, seed, |mt| self.find_redexes(mt))
    }

    /// One parallel step, drawing redexes from `redexes`.
    pub fn reduce_with(
        &self,
        t: &Pattern,
        strategy: Strategy,
        seed: u64,
        mut redexes: impl FnMut(&MarkedTerm) -> Result<Vec<ReductionLabel>, EngineError>,
    ) -> Result<Trace, EngineError> {
        if !is_ground(t) {
            return Err(EngineError::NotGround(t.to_string()));
        }
        let initial = normalize(t);
        let mut mt = MarkedTerm::from_term(&initial);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let limit = match strategy {
            Strategy::Single => 1,
            Strategy::RandomK(k) => k,
            Strategy::Maximal => usize::MAX,
        };
        let mut steps = Vec::new();
        while steps.len() < limit {
            let found = redexes(&mt)?;
            if found.is_empty() {
                break;
            }
            if steps.len() == self.step_cap {
                return Err(EngineError::StepCapExceeded { cap: self.step_cap });
            }
            let pick = match strategy {
                Strategy::RandomK(_) => rng.gen_range(0..found.len()),
                Strategy::Single | Strategy::Maximal => 0,
            };
            let lbl = found.into_iter().nth(pick).expect("index in range");
            log::debug!("apply {lbl}");
            mt = apply_label(&mt, &lbl)?;
            steps.push(lbl);
        }
        Ok(Trace {
            seed,
            strategy,
            initial,
            steps,
            final_term: mt.erase(),
        })
    }

    /// `n` consecutive parallel steps; step `i` uses seed `seed + i`.
    pub fn run(
        &self,
        t: &Pattern,
        strategy: Strategy,
        seed: u64,
        n: usize,
    ) -> Result<Vec<Trace>, EngineError> {
        let mut traces = Vec::with_capacity(n);
        let mut current = normalize(t);
        for i in 0..n {
            let tr = self.parallel_reduce(&current, strategy, seed.wrapping_add(i as u64))?;
            current = tr.final_term.clone();
            traces.push(tr);
        }
        Ok(traces)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum RuleKey {
    Global(usize),
    Local(String),
}

struct Candidate {
    key: (Vec<PathStep>, Schema, RuleKey),
    label: ReductionLabel,
}

impl Candidate {
    fn local(
        path: Vec<PathStep>,
        schema: Schema,
        rule: &LocalRule,
        sigma: Instantiation,
        residue: Pattern,
    ) -> Self {
        Candidate {
            key: (path.clone(), schema, RuleKey::Local(rule.to_string())),
            label: ReductionLabel {
                schema,
                rule: RuleRef::Local(rule.clone()),
                path,
                sigma,
                residue,
            },
        }
    }
}

/// Frozen-free rule occurrences of a level, one per distinct rule.
fn distinct_rules(items: &[MarkedItem]) -> Vec<(usize, &LocalRule)> {
    let mut out: Vec<(usize, &LocalRule)> = Vec::new();
    for (j, item) in items.iter().enumerate() {
        if let MarkedItem::Rule {
            rule: Pattern::Rule(r),
            frozen: false,
        } = item
        {
            if !out.iter().any(|(_, seen)| *seen == r.as_ref()) {
                out.push((j, r));
            }
        }
    }
    out
}

/// Loop items of a level, skipping exact copies of earlier ones.
fn distinct_loops(items: &[MarkedItem]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for (j, item) in items.iter().enumerate() {
        if matches!(item, MarkedItem::Loop { .. }) && !out.iter().any(|&k| items[k] == *item) {
            out.push(j);
        }
    }
    out
}

/// The erased level without the items at `skip` and without the items of
/// `matched`.
fn complement(items: &[MarkedItem], skip: &[usize], matched: &Pattern) -> Pattern {
    let mut rest: Vec<Pattern> = items
        .iter()
        .enumerate()
        .filter(|(j, _)| !skip.contains(j))
        .map(|(_, i)| i.erase())
        .collect();
    for m in matched.items() {
        if let Some(pos) = rest.iter().position(|r| r == m) {
            rest.remove(pos);
        }
    }
    Pattern::from_items(rest)
}

/// Finds the redexes of `mt` under the global rules `globals`.
pub fn find_redexes(
    globals: &[GlobalRule],
    mt: &MarkedTerm,
) -> Result<Vec<ReductionLabel>, EngineError> {
    Engine::new(globals.to_vec()).find_redexes(mt)
}

/// One parallel step of `t` under `globals`.
pub fn parallel_reduce(
    t: &Pattern,
    globals: &[GlobalRule],
    strategy: Strategy,
    seed: u64,
) -> Result<Trace, EngineError> {
    Engine::new(globals.to_vec()).parallel_reduce(t, strategy, seed)
}

/// Applies a label found on `mt`.
pub fn apply_label(mt: &MarkedTerm, lbl: &ReductionLabel) -> Result<MarkedTerm, EngineError> {
    apply(mt, lbl, true)
}

/// Applies a label without checking that the consumed material is
/// frozen-free. Only useful to build invalid traces for testing verifiers.
pub fn apply_label_ignoring_marks(
    mt: &MarkedTerm,
    lbl: &ReductionLabel,
) -> Result<MarkedTerm, EngineError> {
    apply(mt, lbl, false)
}

fn stale(lbl: &ReductionLabel, why: &str) -> EngineError {
    EngineError::StaleLabel(format!("{lbl}: {why}"))
}

/// The level reached by a path made of `Member, Content` pairs.
fn level_mut<'a>(
    items: &'a mut Vec<MarkedItem>,
    path: &[PathStep],
) -> Option<&'a mut Vec<MarkedItem>> {
    match path {
        [] => Some(items),
        [PathStep::Member(i), PathStep::Content, rest @ ..] => match items.get_mut(*i)? {
            MarkedItem::Loop { content, .. } => level_mut(content, rest),
            _ => None,
        },
        _ => None,
    }
}

/// Splits `level_path ++ [Member(j)]`.
pub(crate) fn split_target(path: &[PathStep]) -> Option<(&[PathStep], usize)> {
    match path.split_last()? {
        (PathStep::Member(j), rest) => Some((rest, *j)),
        _ => None,
    }
}

/// Removes one item congruent to each of `needed`, preferring frozen-free
/// ones; with `respect` set, frozen items never qualify.
fn take(level: &mut Vec<MarkedItem>, needed: &[Pattern], respect: bool) -> Option<Vec<MarkedItem>> {
    let mut taken = Vec::with_capacity(needed.len());
    for p in needed {
        let pos = level
            .iter()
            .position(|i| i.is_frozen_free() && i.erase() == *p)
            .or_else(|| {
                if respect {
                    None
                } else {
                    level.iter().position(|i| i.erase() == *p)
                }
            })?;
        taken.push(level.remove(pos));
    }
    Some(taken)
}

fn apply(mt: &MarkedTerm, lbl: &ReductionLabel, respect: bool) -> Result<MarkedTerm, EngineError> {
    let mut out = mt.clone();
    match (&lbl.rule, lbl.schema) {
        (RuleRef::Global(g), Schema::Grt) => {
            let level =
                level_mut(&mut out.items, &lbl.path).ok_or_else(|| stale(lbl, "no such level"))?;
            let l = substitute(&g.lhs, &lbl.sigma)?;
            if l.is_eps() {
                return Err(stale(lbl, "empty redex"));
            }
            take(level, l.items(), respect).ok_or_else(|| stale(lbl, "redex not present"))?;
            level.extend(MarkedItem::produced(&substitute(&g.rhs, &lbl.sigma)?));
        }
        (RuleRef::Local(r @ LocalRule::Plain { lhs, rhs }), Schema::Lr) => {
            let level =
                level_mut(&mut out.items, &lbl.path).ok_or_else(|| stale(lbl, "no such level"))?;
            let l = substitute(lhs, &lbl.sigma)?;
            if l.is_eps() {
                return Err(stale(lbl, "empty redex"));
            }
            let rule_item =
                take_rule(level, r, respect).ok_or_else(|| stale(lbl, "rule not present"))?;
            take(level, l.items(), respect).ok_or_else(|| stale(lbl, "redex not present"))?;
            if erase_items(level) != lbl.residue {
                return Err(stale(lbl, "residue differs"));
            }
            level.push(rule_item);
            level.extend(MarkedItem::produced(&substitute(rhs, &lbl.sigma)?));
        }
        (
            RuleRef::Local(
                r @ LocalRule::Out {
                    lhs,
                    lhs_mem,
                    rhs,
                    rhs_mem,
                },
            ),
            Schema::LrOut,
        ) => {
            let (lp, j) =
                split_target(&lbl.path).ok_or_else(|| stale(lbl, "path does not select a loop"))?;
            let level = level_mut(&mut out.items, lp).ok_or_else(|| stale(lbl, "no such level"))?;
            let s1 = substitute_seq(lhs_mem, &lbl.sigma)?;
            let l = substitute(lhs, &lbl.sigma)?;
            if l.is_eps() {
                return Err(stale(lbl, "empty redex"));
            }
            let Some(MarkedItem::Loop {
                membrane,
                membrane_frozen,
                content,
                frozen,
            }) = level.get_mut(j)
            else {
                return Err(stale(lbl, "path does not select a loop"));
            };
            if respect && (*membrane_frozen || *frozen) {
                return Err(stale(lbl, "membrane is frozen"));
            }
            if s1.canonical_rotation() != membrane.canonical_rotation() {
                return Err(stale(lbl, "membrane does not match"));
            }
            let rule_item =
                take_rule(content, r, respect).ok_or_else(|| stale(lbl, "rule not present"))?;
            take(content, l.items(), respect).ok_or_else(|| stale(lbl, "redex not present"))?;
            if erase_items(content) != lbl.residue {
                return Err(stale(lbl, "residue differs"));
            }
            content.push(rule_item);
            *membrane = substitute_seq(rhs_mem, &lbl.sigma)?.canonical_rotation();
            *membrane_frozen = true;
            level.extend(MarkedItem::produced(&substitute(rhs, &lbl.sigma)?));
        }
        (
            RuleRef::Local(
                r @ LocalRule::In {
                    lhs,
                    lhs_mem,
                    rhs,
                    rhs_mem,
                },
            ),
            Schema::LrIn,
        ) => {
            let (lp, j) =
                split_target(&lbl.path).ok_or_else(|| stale(lbl, "path does not select a loop"))?;
            let level = level_mut(&mut out.items, lp).ok_or_else(|| stale(lbl, "no such level"))?;
            let s1 = substitute_seq(lhs_mem, &lbl.sigma)?;
            let l = substitute(lhs, &lbl.sigma)?;
            if l.is_eps() {
                return Err(stale(lbl, "empty redex"));
            }
            if !matches!(level.get(j), Some(MarkedItem::Loop { .. })) {
                return Err(stale(lbl, "path does not select a loop"));
            }
            let mut target = level.remove(j);
            let rule_item =
                take_rule(level, r, respect).ok_or_else(|| stale(lbl, "rule not present"))?;
            take(level, l.items(), respect).ok_or_else(|| stale(lbl, "redex not present"))?;
            level.push(rule_item);
            let MarkedItem::Loop {
                membrane,
                membrane_frozen,
                content,
                frozen,
            } = &mut target
            else {
                unreachable!()
            };
            if respect && (*membrane_frozen || *frozen) {
                return Err(stale(lbl, "membrane is frozen"));
            }
            if s1.canonical_rotation() != membrane.canonical_rotation() {
                return Err(stale(lbl, "membrane does not match"));
            }
            if erase_items(content) != lbl.residue {
                return Err(stale(lbl, "residue differs"));
            }
            *membrane = substitute_seq(rhs_mem, &lbl.sigma)?.canonical_rotation();
            *membrane_frozen = true;
            content.extend(MarkedItem::produced(&substitute(rhs, &lbl.sigma)?));
            level.push(target);
        }
        _ => return Err(stale(lbl, "schema does not fit the rule")),
    }
    out.normalize();
    Ok(out)
}

fn take_rule(level: &mut Vec<MarkedItem>, r: &LocalRule, respect: bool) -> Option<MarkedItem> {
    let is_r = |i: &MarkedItem| matches!(i, MarkedItem::Rule { rule: Pattern::Rule(x), .. } if x.as_ref() == r);
    let pos = level
        .iter()
        .position(|i| is_r(i) && !i.is_frozen())
        .or_else(|| {
            if respect {
                None
            } else {
                level.iter().position(is_r)
            }
        })?;
    Some(level.remove(pos))
}
