//! Congruence closure on unnormalized syntax trees.
//!
//! Every tree with at most `n` leaves (elements or `eps`) is enumerated,
//! the congruence axioms are applied one step at a time in every position,
//! and the classes are collected with union-find.

use std::collections::HashMap;

use clslr::{Atom, Pattern, SeqPattern};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RawSeq {
    Eps,
    El(u8),
    Dot(Box<RawSeq>, Box<RawSeq>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RawTerm {
    S(RawSeq),
    Par(Box<RawTerm>, Box<RawTerm>),
    Loop(RawSeq, Box<RawTerm>),
}

fn dot(a: RawSeq, b: RawSeq) -> RawSeq {
    RawSeq::Dot(Box::new(a), Box::new(b))
}

fn par(a: RawTerm, b: RawTerm) -> RawTerm {
    RawTerm::Par(Box::new(a), Box::new(b))
}

const NAMES: [&str; 4] = ["a", "b", "c", "d"];

fn seq_atoms(s: &RawSeq, out: &mut Vec<Atom>) {
    match s {
        RawSeq::Eps => {}
        RawSeq::El(i) => out.push(Atom::elem(NAMES[*i as usize])),
        RawSeq::Dot(a, b) => {
            seq_atoms(a, out);
            seq_atoms(b, out);
        }
    }
}

fn to_seq(s: &RawSeq) -> SeqPattern {
    let mut atoms = Vec::new();
    seq_atoms(s, &mut atoms);
    SeqPattern::new(atoms)
}

/// The library pattern built from a tree without any simplification.
pub fn to_pattern(t: &RawTerm) -> Pattern {
    match t {
        RawTerm::S(s) => Pattern::Seq(to_seq(s)),
        RawTerm::Par(a, b) => Pattern::Par(vec![to_pattern(a), to_pattern(b)]),
        RawTerm::Loop(m, c) => Pattern::looping(to_seq(m), to_pattern(c)),
    }
}

fn seqs(n: usize, k: u8, memo: &mut HashMap<usize, Vec<RawSeq>>) -> Vec<RawSeq> {
    if let Some(v) = memo.get(&n) {
        return v.clone();
    }
    let mut out = Vec::new();
    if n == 1 {
        out.push(RawSeq::Eps);
        out.extend((0..k).map(RawSeq::El));
    }
    for left in 1..n {
        for a in seqs(left, k, memo) {
            for b in seqs(n - left, k, memo) {
                out.push(dot(a.clone(), b));
            }
        }
    }
    memo.insert(n, out.clone());
    out
}

fn terms(
    n: usize,
    k: u8,
    sm: &mut HashMap<usize, Vec<RawSeq>>,
    tm: &mut HashMap<usize, Vec<RawTerm>>,
) -> Vec<RawTerm> {
    if let Some(v) = tm.get(&n) {
        return v.clone();
    }
    let mut out: Vec<RawTerm> = seqs(n, k, sm).into_iter().map(RawTerm::S).collect();
    for left in 1..n {
        for a in terms(left, k, sm, tm) {
            for b in terms(n - left, k, sm, tm) {
                out.push(par(a.clone(), b));
            }
        }
        for m in seqs(left, k, sm) {
            for c in terms(n - left, k, sm, tm) {
                out.push(RawTerm::Loop(m.clone(), Box::new(c)));
            }
        }
    }
    tm.insert(n, out.clone());
    out
}

/// Single axiom steps on a sequence, in any position.
fn seq_steps(s: &RawSeq) -> Vec<RawSeq> {
    let mut out = Vec::new();
    if let RawSeq::Dot(a, b) = s {
        if let RawSeq::Dot(x, y) = &**a {
            out.push(dot((**x).clone(), dot((**y).clone(), (**b).clone())));
        }
        if let RawSeq::Dot(y, z) = &**b {
            out.push(dot(dot((**a).clone(), (**y).clone()), (**z).clone()));
        }
        if **b == RawSeq::Eps {
            out.push((**a).clone());
        }
        if **a == RawSeq::Eps {
            out.push((**b).clone());
        }
        for a2 in seq_steps(a) {
            out.push(dot(a2, (**b).clone()));
        }
        for b2 in seq_steps(b) {
            out.push(dot((**a).clone(), b2));
        }
    }
    out
}

/// Single axiom steps on a term, in any position.
fn term_steps(t: &RawTerm) -> Vec<RawTerm> {
    let mut out = Vec::new();
    match t {
        RawTerm::S(s) => out.extend(seq_steps(s).into_iter().map(RawTerm::S)),
        RawTerm::Par(a, b) => {
            out.push(par((**b).clone(), (**a).clone()));
            if let RawTerm::Par(x, y) = &**a {
                out.push(par((**x).clone(), par((**y).clone(), (**b).clone())));
            }
            if let RawTerm::Par(y, z) = &**b {
                out.push(par(par((**a).clone(), (**y).clone()), (**z).clone()));
            }
            if **b == RawTerm::S(RawSeq::Eps) {
                out.push((**a).clone());
            }
            for a2 in term_steps(a) {
                out.push(par(a2, (**b).clone()));
            }
            for b2 in term_steps(b) {
                out.push(par((**a).clone(), b2));
            }
        }
        RawTerm::Loop(m, c) => {
            if let RawSeq::Dot(x, y) = m {
                out.push(RawTerm::Loop(dot((**y).clone(), (**x).clone()), c.clone()));
            }
            if *m == RawSeq::Eps && **c == RawTerm::S(RawSeq::Eps) {
                out.push(RawTerm::S(RawSeq::Eps));
            }
            for m2 in seq_steps(m) {
                out.push(RawTerm::Loop(m2, c.clone()));
            }
            for c2 in term_steps(c) {
                out.push(RawTerm::Loop(m.clone(), Box::new(c2)));
            }
        }
    }
    out
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Congruence classes of all trees with at most `n` leaves over `k` elements.
pub fn classes(n: usize, k: u8) -> Vec<Vec<RawTerm>> {
    let mut sm = HashMap::new();
    let mut tm = HashMap::new();
    let all: Vec<RawTerm> = (1..=n)
        .flat_map(|i| terms(i, k, &mut sm, &mut tm))
        .collect();
    let index: HashMap<RawTerm, usize> = all
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, t)| (t, i))
        .collect();
    let mut parent: Vec<usize> = (0..all.len()).collect();
    for (i, t) in all.iter().enumerate() {
        for u in term_steps(t) {
            if let Some(&j) = index.get(&u) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut groups: HashMap<usize, Vec<RawTerm>> = HashMap::new();
    for (i, t) in all.into_iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(t);
    }
    groups.into_values().collect()
}
