//! Independent check that a parallel step only rewrites disjoint parts of
//! its initial term.
//!
//! The trace is replayed on a copy of the initial term where every node
//! records where it came from: a preorder position in the initial term, or
//! the label that produced it. A label may only consume material that still
//! comes from the initial term. At the end, removing all produced material
//! from the final term (and turning produced membranes into holes) must give
//! the same multi-hole context as removing all consumed material from the
//! initial term.

use std::collections::BTreeSet;

use crate::marked::MarkedItem;
use crate::matcher::{substitute, substitute_seq};
use crate::term::{normalize, LocalRule, Pattern, SeqPattern};

use super::{split_target, PathStep, ReductionLabel, RuleRef, Schema, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Initial(usize),
    Produced(usize),
}

#[derive(Debug, Clone)]
enum Node {
    Seq(SeqPattern),
    Rule(Pattern),
    Loop {
        membrane: SeqPattern,
        membrane_origin: Origin,
        content: Vec<Tagged>,
    },
}

#[derive(Debug, Clone)]
struct Tagged {
    node: Node,
    origin: Origin,
}

impl Tagged {
    fn marked(&self) -> MarkedItem {
        let frozen = matches!(self.origin, Origin::Produced(_));
        match &self.node {
            Node::Seq(s) => MarkedItem::Seq {
                seq: s.clone(),
                frozen,
            },
            Node::Rule(r) => MarkedItem::Rule {
                rule: r.clone(),
                frozen,
            },
            Node::Loop {
                membrane,
                membrane_origin,
                content,
            } => MarkedItem::Loop {
                membrane: membrane.clone(),
                membrane_frozen: matches!(membrane_origin, Origin::Produced(_)),
                content: content.iter().map(Tagged::marked).collect(),
                frozen,
            },
        }
    }

    fn erase(&self) -> Pattern {
        self.marked().erase()
    }

    fn all_initial(&self) -> bool {
        matches!(self.origin, Origin::Initial(_))
            && match &self.node {
                Node::Loop {
                    membrane_origin,
                    content,
                    ..
                } => {
                    matches!(membrane_origin, Origin::Initial(_))
                        && content.iter().all(Tagged::all_initial)
                }
                _ => true,
            }
    }

    fn ids(&self, out: &mut BTreeSet<usize>) {
        if let Origin::Initial(id) = self.origin {
            out.insert(id);
        }
        if let Node::Loop {
            membrane_origin: Origin::Initial(id),
            ..
        } = &self.node
        {
            out.insert(*id);
        }
        if let Node::Loop { content, .. } = &self.node {
            content.iter().for_each(|c| c.ids(out));
        }
    }
}

fn tag_initial(p: &Pattern, next: &mut usize) -> Vec<Tagged> {
    p.items()
        .iter()
        .map(|item| {
            let origin = Origin::Initial(*next);
            *next += 1;
            let node = match item {
                Pattern::Seq(s) => Node::Seq(s.clone()),
                Pattern::Rule(_) => Node::Rule(item.clone()),
                Pattern::Loop(m, c) => {
                    let membrane_origin = Origin::Initial(*next);
                    *next += 1;
                    Node::Loop {
                        membrane: m.clone(),
                        membrane_origin,
                        content: tag_initial(c, next),
                    }
                }
                other => unreachable!("non-item {other} in a normalized term"),
            };
            Tagged { node, origin }
        })
        .collect()
}

fn tag_produced(p: &Pattern, label: usize) -> Vec<Tagged> {
    let origin = Origin::Produced(label);
    normalize(p)
        .items()
        .iter()
        .map(|item| {
            let node = match item {
                Pattern::Seq(s) => Node::Seq(s.clone()),
                Pattern::Rule(_) => Node::Rule(item.clone()),
                Pattern::Loop(m, c) => Node::Loop {
                    membrane: m.clone(),
                    membrane_origin: origin,
                    content: tag_produced(c, label),
                },
                other => unreachable!("non-item {other} in a normalized term"),
            };
            Tagged { node, origin }
        })
        .collect()
}

/// Same order as marked levels: by rendering with produced material shown
/// as frozen. Emptied `loop(eps)[eps]` items disappear.
fn sort_level(level: &mut Vec<Tagged>) {
    for t in level.iter_mut() {
        if let Node::Loop {
            membrane, content, ..
        } = &mut t.node
        {
            *membrane = membrane.canonical_rotation();
            sort_level(content);
        }
    }
    level.retain(|t| !matches!(&t.node, Node::Loop { membrane, content, .. } if membrane.is_empty() && content.is_empty()));
    level.sort_by_cached_key(|t| t.marked().to_string());
}

fn level_mut<'a>(items: &'a mut Vec<Tagged>, path: &[PathStep]) -> Option<&'a mut Vec<Tagged>> {
    match path {
        [] => Some(items),
        [PathStep::Member(i), PathStep::Content, rest @ ..] => match &mut items.get_mut(*i)?.node {
            Node::Loop { content, .. } => level_mut(content, rest),
            _ => None,
        },
        _ => None,
    }
}

struct Replay {
    consumed: BTreeSet<usize>,
}

impl Replay {
    /// Removes initial-only items congruent to `needed`.
    fn consume(&mut self, level: &mut Vec<Tagged>, needed: &Pattern) -> Option<()> {
        for p in needed.items() {
            let pos = level
                .iter()
                .position(|t| t.all_initial() && t.erase() == *p)?;
            level.remove(pos).ids(&mut self.consumed);
        }
        Some(())
    }

    fn rule_present(level: &[Tagged], r: &LocalRule) -> bool {
        level.iter().any(|t| {
            matches!(t.origin, Origin::Initial(_))
                && matches!(&t.node, Node::Rule(Pattern::Rule(x)) if x.as_ref() == r)
        })
    }

    /// Replaces a membrane that must still be the initial one.
    fn relabel(
        &mut self,
        item: &mut Tagged,
        s1: &SeqPattern,
        s2: SeqPattern,
        label: usize,
    ) -> Option<()> {
        if !matches!(item.origin, Origin::Initial(_)) {
            return None;
        }
        let Node::Loop {
            membrane,
            membrane_origin,
            ..
        } = &mut item.node
        else {
            return None;
        };
        let Origin::Initial(id) = *membrane_origin else {
            return None;
        };
        if membrane.canonical_rotation() != s1.canonical_rotation() {
            return None;
        }
        self.consumed.insert(id);
        *membrane = s2.canonical_rotation();
        *membrane_origin = Origin::Produced(label);
        Some(())
    }

    fn step(&mut self, tree: &mut Vec<Tagged>, lbl: &ReductionLabel, index: usize) -> Option<()> {
        let sigma = &lbl.sigma;
        match (&lbl.rule, lbl.schema) {
            (RuleRef::Global(g), Schema::Grt) => {
                let level = level_mut(tree, &lbl.path)?;
                let l = substitute(&g.lhs, sigma).ok()?;
                if l.is_eps() {
                    return None;
                }
                self.consume(level, &l)?;
                level.extend(tag_produced(&substitute(&g.rhs, sigma).ok()?, index));
            }
            (RuleRef::Local(r @ LocalRule::Plain { lhs, rhs }), Schema::Lr) => {
                let level = level_mut(tree, &lbl.path)?;
                if !Self::rule_present(level, r) {
                    return None;
                }
                let l = substitute(lhs, sigma).ok()?;
                if l.is_eps() {
                    return None;
                }
                self.consume(level, &l)?;
                level.extend(tag_produced(&substitute(rhs, sigma).ok()?, index));
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
                let (lp, j) = split_target(&lbl.path)?;
                let level = level_mut(tree, lp)?;
                let l = substitute(lhs, sigma).ok()?;
                if l.is_eps() {
                    return None;
                }
                let s1 = substitute_seq(lhs_mem, sigma).ok()?;
                let s2 = substitute_seq(rhs_mem, sigma).ok()?;
                let target = level.get_mut(j)?;
                self.relabel(target, &s1, s2, index)?;
                let Node::Loop { content, .. } = &mut target.node else {
                    return None;
                };
                if !Self::rule_present(content, r) {
                    return None;
                }
                self.consume(content, &l)?;
                level.extend(tag_produced(&substitute(rhs, sigma).ok()?, index));
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
                let (lp, j) = split_target(&lbl.path)?;
                let level = level_mut(tree, lp)?;
                let l = substitute(lhs, sigma).ok()?;
                if l.is_eps() {
                    return None;
                }
                let s1 = substitute_seq(lhs_mem, sigma).ok()?;
                let s2 = substitute_seq(rhs_mem, sigma).ok()?;
                if j >= level.len() {
                    return None;
                }
                let mut target = level.remove(j);
                if !Self::rule_present(level, r) {
                    return None;
                }
                self.consume(level, &l)?;
                self.relabel(&mut target, &s1, s2, index)?;
                let Node::Loop { content, .. } = &mut target.node else {
                    return None;
                };
                content.extend(tag_produced(&substitute(rhs, sigma).ok()?, index));
                level.push(target);
            }
            _ => return None,
        }
        sort_level(tree);
        Some(())
    }
}

/// A multi-hole context rendered canonically; holes are written `#`.
fn context(
    level: &[Tagged],
    keep: &dyn Fn(&Tagged) -> bool,
    hole: &dyn Fn(Origin) -> bool,
) -> String {
    let mut parts: Vec<String> = level
        .iter()
        .filter(|t| keep(t))
        .filter_map(|t| match &t.node {
            Node::Loop {
                membrane,
                membrane_origin,
                content,
            } => {
                let inner = context(content, keep, hole);
                let mem = if hole(*membrane_origin) {
                    "#".to_string()
                } else {
                    membrane.to_string()
                };
                if mem == "eps" && inner == "eps" {
                    None
                } else {
                    Some(format!("loop({mem})[{inner}]"))
                }
            }
            _ => Some(t.erase().to_string()),
        })
        .collect();
    if parts.is_empty() {
        return "eps".into();
    }
    parts.sort();
    parts.join(" | ")
}

/// Whether the labels of `trace` rewrite pairwise disjoint parts of the
/// initial term, consuming only initial material, and leave everything else
/// as it was.
pub fn verify_decomposition(trace: &Trace) -> bool {
    let initial = normalize(&trace.initial);
    let mut next = 0;
    let start = {
        let mut t = tag_initial(&initial, &mut next);
        sort_level(&mut t);
        t
    };
    let mut tree = start.clone();
    let mut replay = Replay {
        consumed: BTreeSet::new(),
    };
    for (i, lbl) in trace.steps.iter().enumerate() {
        if replay.step(&mut tree, lbl, i).is_none() {
            log::debug!("label {i} does not replay on initial material: {lbl}");
            return false;
        }
    }
    let final_term = Pattern::from_items(tree.iter().map(Tagged::erase).collect());
    if final_term != normalize(&trace.final_term) {
        log::debug!(
            "replayed term {final_term} differs from recorded {}",
            trace.final_term
        );
        return false;
    }
    let consumed = &replay.consumed;
    let is_consumed = |o: Origin| matches!(o, Origin::Initial(id) if consumed.contains(&id));
    let before = context(&start, &|t| !is_consumed(t.origin), &|o| is_consumed(o));
    let is_produced = |o: Origin| matches!(o, Origin::Produced(_));
    let after = context(&tree, &|t| !is_produced(t.origin), &|o| is_produced(o));
    if before != after {
        log::debug!("contexts differ: {before} vs {after}");
    }
    before == after
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked::MarkedTerm;
    use crate::rewrite::{apply_label_ignoring_marks, parallel_reduce, Strategy};

    fn e(n: &str) -> Pattern {
        Pattern::elem(n)
    }

    #[test]
    fn empty_trace_is_fine() {
        let t = Pattern::par(vec![e("a"), e("b")]);
        let tr = parallel_reduce(&t, &[], Strategy::Maximal, 0).unwrap();
        assert!(tr.steps.is_empty());
        assert!(verify_decomposition(&tr));
    }

    #[test]
    fn engine_traces_decompose() {
        let r = Pattern::rule(LocalRule::plain(e("a"), e("b")));
        let t = Pattern::par(vec![e("a"), e("a"), r]);
        let tr = parallel_reduce(&t, &[], Strategy::Maximal, 0).unwrap();
        assert_eq!(tr.steps.len(), 2);
        assert!(verify_decomposition(&tr));
    }

    #[test]
    fn rewriting_produced_material_is_flagged() {
        // a => b then b => c on the b just produced
        let ab = LocalRule::plain(e("a"), e("b"));
        let bc = LocalRule::plain(e("b"), e("c"));
        let t = normalize(&Pattern::par(vec![
            e("a"),
            Pattern::rule(ab.clone()),
            Pattern::rule(bc.clone()),
        ]));
        let mt = MarkedTerm::from_term(&t);
        let first = crate::rewrite::find_redexes(&[], &mt).unwrap().remove(0);
        let mid = apply_label_ignoring_marks(&mt, &first).unwrap();
        let second = ReductionLabel {
            schema: Schema::Lr,
            rule: RuleRef::Local(bc.clone()),
            path: vec![],
            sigma: Default::default(),
            residue: normalize(&Pattern::rule(ab)),
        };
        let end = apply_label_ignoring_marks(&mid, &second).unwrap();
        let tr = Trace {
            seed: 0,
            strategy: Strategy::Maximal,
            initial: t,
            steps: vec![first, second],
            final_term: end.erase(),
        };
        assert!(!verify_decomposition(&tr));
    }
}
