//! Exhaustive enumeration of small patterns, up to congruence.
//!
//! A leaf is an atom of a sequence or membrane, or a term variable.
//! Membranes are never empty; rules are left out.

use std::collections::BTreeMap;

use clslr::{Atom, Pattern, SeqPattern};

pub struct Universe {
    atoms: Vec<Atom>,
    term_vars: Vec<String>,
    items: Vec<Vec<Pattern>>,
    terms: Vec<Vec<Pattern>>,
}

fn dedup(ps: Vec<Pattern>) -> Vec<Pattern> {
    let mut seen = BTreeMap::new();
    for p in ps {
        let p = p.normalize();
        seen.entry(p.to_string()).or_insert(p);
    }
    seen.into_values().collect()
}

impl Universe {
    pub fn new(atoms: Vec<Atom>, term_vars: &[&str]) -> Self {
        Universe {
            atoms,
            term_vars: term_vars.iter().map(|s| s.to_string()).collect(),
            items: vec![vec![]],
            terms: vec![vec![Pattern::eps()]],
        }
    }

    /// Ground terms over the given element names.
    pub fn ground(elements: &[&str]) -> Self {
        Universe::new(elements.iter().map(|e| Atom::elem(e)).collect(), &[])
    }

    fn seqs(&self, n: usize) -> Vec<SeqPattern> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<Atom>| {
                    self.atoms.iter().map(move |a| {
                        let mut p = prefix.clone();
                        p.push(a.clone());
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(SeqPattern::new).collect()
    }

    fn grow(&mut self, n: usize) {
        while self.terms.len() <= n {
            let k = self.terms.len();
            let mut items: Vec<Pattern> = self.seqs(k).into_iter().map(Pattern::Seq).collect();
            if k == 1 {
                items.extend(self.term_vars.iter().map(|x| Pattern::var(x)));
            }
            for m in 1..=k {
                for membrane in self.seqs(m) {
                    for content in &self.terms[k - m] {
                        items.push(Pattern::looping(membrane.clone(), content.clone()));
                    }
                }
            }
            self.items.push(dedup(items));
            let mut terms = Vec::new();
            self.multisets(k, k, 0, &mut Vec::new(), &mut terms);
            self.terms.push(dedup(terms));
        }
    }

    /// Multisets of items with total size `n`, item sizes nonincreasing,
    /// indices nondecreasing within a size.
    fn multisets(
        &self,
        n: usize,
        max_size: usize,
        min_index: usize,
        acc: &mut Vec<Pattern>,
        out: &mut Vec<Pattern>,
    ) {
        if n == 0 {
            out.push(Pattern::par(acc.clone()));
            return;
        }
        for size in (1..=max_size.min(n)).rev() {
            let start = if size == max_size { min_index } else { 0 };
            for i in start..self.items[size].len() {
                acc.push(self.items[size][i].clone());
                self.multisets(n - size, size, i, acc, out);
                acc.pop();
            }
        }
    }

    /// All distinct patterns with exactly `n` leaves.
    pub fn exactly(&mut self, n: usize) -> &[Pattern] {
        self.grow(n);
        &self.terms[n]
    }

    /// All distinct patterns with at most `n` leaves.
    pub fn up_to(&mut self, n: usize) -> Vec<Pattern> {
        self.grow(n);
        self.terms[..=n].concat()
    }
}
