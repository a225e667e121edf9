//! Terms carrying freeze marks for the duration of one parallel step.
//!
//! A marked term is kept as a list of parallel items per level. Every item,
//! and every membrane separately, may be frozen. Material produced by a rule
//! application is inserted deeply frozen; matching only ever looks at
//! frozen-free material.

use std::fmt;

use crate::term::{normalize, Pattern, SeqPattern};

/// One parallel member of a marked level.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MarkedItem {
    Seq {
        seq: SeqPattern,
        frozen: bool,
    },
    Rule {
        rule: Pattern,
        frozen: bool,
    },
    Loop {
        membrane: SeqPattern,
        membrane_frozen: bool,
        content: Vec<MarkedItem>,
        frozen: bool,
    },
}

impl MarkedItem {
    /// Converts the items of a normalized ground pattern.
    fn from_items(p: &Pattern, frozen: bool) -> Vec<MarkedItem> {
        p.items()
            .iter()
            .map(|i| MarkedItem::from_item(i, frozen))
            .collect()
    }

    fn from_item(p: &Pattern, frozen: bool) -> MarkedItem {
        match p {
            Pattern::Seq(s) => MarkedItem::Seq {
                seq: s.clone(),
                frozen,
            },
            Pattern::Rule(_) => MarkedItem::Rule {
                rule: p.clone(),
                frozen,
            },
            Pattern::Loop(m, c) => MarkedItem::Loop {
                membrane: m.clone(),
                membrane_frozen: frozen,
                content: MarkedItem::from_items(c, frozen),
                frozen,
            },
            Pattern::Var(_) | Pattern::Par(_) => {
                panic!("marked terms are built from normalized ground items, got {p}")
            }
        }
    }

    /// Deeply frozen copies of the items of `p`.
    pub fn produced(p: &Pattern) -> Vec<MarkedItem> {
        MarkedItem::from_items(&normalize(p), true)
    }

    /// The item's own mark.
    pub fn is_frozen(&self) -> bool {
        match self {
            MarkedItem::Seq { frozen, .. }
            | MarkedItem::Rule { frozen, .. }
            | MarkedItem::Loop { frozen, .. } => *frozen,
        }
    }

    /// No mark anywhere in the subtree.
    pub fn is_frozen_free(&self) -> bool {
        match self {
            MarkedItem::Seq { frozen, .. } | MarkedItem::Rule { frozen, .. } => !frozen,
            MarkedItem::Loop {
                membrane_frozen,
                content,
                frozen,
                ..
            } => !frozen && !membrane_frozen && content.iter().all(MarkedItem::is_frozen_free),
        }
    }

    /// The item with marks removed.
    pub fn erase(&self) -> Pattern {
        match self {
            MarkedItem::Seq { seq, .. } => Pattern::Seq(seq.clone()),
            MarkedItem::Rule { rule, .. } => rule.clone(),
            MarkedItem::Loop {
                membrane, content, ..
            } => normalize(&Pattern::looping(membrane.clone(), erase_items(content))),
        }
    }

    fn is_empty_loop(&self) -> bool {
        matches!(self, MarkedItem::Loop { membrane, content, .. } if membrane.is_empty() && content.is_empty())
    }

    fn normalize_in_place(&mut self) {
        if let MarkedItem::Loop {
            membrane, content, ..
        } = self
        {
            *membrane = membrane.canonical_rotation();
            normalize_level(content);
        }
    }
}

impl fmt::Display for MarkedItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bang = |frozen: bool| if frozen { "!" } else { "" };
        match self {
            MarkedItem::Seq { seq, frozen } => write!(f, "{}{seq}", bang(*frozen)),
            MarkedItem::Rule { rule, frozen } => write!(f, "{}{rule}", bang(*frozen)),
            MarkedItem::Loop {
                membrane,
                membrane_frozen,
                content,
                frozen,
            } => {
                write!(
                    f,
                    "{}loop({}{membrane})[",
                    bang(*frozen),
                    bang(*membrane_frozen)
                )?;
                write_level(f, content)?;
                f.write_str("]")
            }
        }
    }
}

fn write_level(f: &mut fmt::Formatter<'_>, items: &[MarkedItem]) -> fmt::Result {
    if items.is_empty() {
        return f.write_str("eps");
    }
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(" | ")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

/// The erased, normalized parallel composition of a level.
pub fn erase_items(items: &[MarkedItem]) -> Pattern {
    Pattern::from_items(items.iter().map(MarkedItem::erase).collect())
}

/// Sorts a level by marked rendering, recursively, and drops loops that
/// became `loop(eps)[eps]`.
pub fn normalize_level(items: &mut Vec<MarkedItem>) {
    for item in items.iter_mut() {
        item.normalize_in_place();
    }
    items.retain(|i| !i.is_empty_loop());
    items.sort_by_cached_key(|i| i.to_string());
}

/// A ground term with freeze marks. `Display` prefixes frozen nodes with `!`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MarkedTerm {
    pub items: Vec<MarkedItem>,
}

impl MarkedTerm {
    /// An unmarked copy of a ground term.
    ///
    /// # Panics
    /// If `t` has variables outside rule bodies.
    pub fn from_term(t: &Pattern) -> Self {
        let mut items = MarkedItem::from_items(&normalize(t), false);
        normalize_level(&mut items);
        MarkedTerm { items }
    }

    pub fn erase(&self) -> Pattern {
        erase_items(&self.items)
    }

    pub fn is_frozen_free(&self) -> bool {
        self.items.iter().all(MarkedItem::is_frozen_free)
    }

    /// Canonical order of every level; marks are kept where they are.
    pub fn normalize(&mut self) {
        normalize_level(&mut self.items);
    }
}

impl fmt::Display for MarkedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_level(f, &self.items)
    }
}

/// Removes all marks: the erasing map.
pub fn erase(mt: &MarkedTerm) -> Pattern {
    mt.erase()
}
