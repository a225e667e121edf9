//! Brute-force matching: enumerate every instantiation drawn from the pieces
//! of the term and keep those that reproduce it.

use std::collections::{BTreeMap, BTreeSet};

use clslr::{
    vars, Atom, Binding, Element, Instantiation, Pattern, RuleBodies, SeqPattern, VarKind, Variable,
};

/// Substitution written independently of the library.
pub fn subst(p: &Pattern, sigma: &Instantiation) -> Pattern {
    match p {
        Pattern::Seq(s) => Pattern::Seq(subst_seq(s, sigma)),
        Pattern::Loop(m, c) => Pattern::Loop(subst_seq(m, sigma), Box::new(subst(c, sigma))),
        Pattern::Par(ps) => Pattern::Par(ps.iter().map(|q| subst(q, sigma)).collect()),
        Pattern::Rule(_) => p.clone(),
        Pattern::Var(x) => match sigma.get(&Variable::term(x)) {
            Some(Binding::Term(t)) => t.clone(),
            _ => panic!("unbound ${x}"),
        },
    }
}

pub fn subst_seq(s: &SeqPattern, sigma: &Instantiation) -> SeqPattern {
    let mut out = Vec::new();
    for a in s.atoms() {
        match a {
            Atom::Elem(_) => out.push(a.clone()),
            Atom::ElemVar(x) => match sigma.get(&Variable::element(x)) {
                Some(Binding::Elem(e)) => out.push(Atom::Elem(e.clone())),
                _ => panic!("unbound ?{x}"),
            },
            Atom::SeqVar(x) => match sigma.get(&Variable::sequence(x)) {
                Some(Binding::Seq(v)) => out.extend(v.atoms().iter().cloned()),
                _ => panic!("unbound ~{x}"),
            },
        }
    }
    SeqPattern::new(out)
}

/// Candidate images collected from a ground term.
#[derive(Default)]
struct Pieces {
    elems: BTreeSet<Element>,
    seqs: BTreeSet<SeqPattern>,
    terms: BTreeSet<Pattern>,
}

fn sub_sequences(s: &SeqPattern, out: &mut BTreeSet<SeqPattern>) {
    let atoms = s.atoms();
    out.insert(SeqPattern::epsilon());
    for i in 0..atoms.len() {
        for j in i + 1..=atoms.len() {
            out.insert(SeqPattern::new(atoms[i..j].to_vec()));
        }
    }
}

fn sub_multisets(items: &[Pattern], out: &mut BTreeSet<Pattern>) {
    let n = items.len();
    assert!(n < 20, "level too wide for brute force");
    for mask in 0u32..(1 << n) {
        let chosen = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| items[i].clone())
            .collect();
        out.insert(Pattern::par(chosen).normalize());
    }
}

fn collect(t: &Pattern, pieces: &mut Pieces) {
    let items: Vec<Pattern> = t.items().to_vec();
    sub_multisets(&items, &mut pieces.terms);
    for item in &items {
        match item {
            Pattern::Seq(s) => {
                pieces
                    .elems
                    .extend(s.atoms().iter().filter_map(|a| match a {
                        Atom::Elem(e) => Some(e.clone()),
                        _ => None,
                    }));
                sub_sequences(s, &mut pieces.seqs);
            }
            Pattern::Loop(m, c) => {
                pieces
                    .elems
                    .extend(m.atoms().iter().filter_map(|a| match a {
                        Atom::Elem(e) => Some(e.clone()),
                        _ => None,
                    }));
                for r in 0..m.len() {
                    let mut atoms = m.atoms().to_vec();
                    atoms.rotate_left(r);
                    sub_sequences(&SeqPattern::new(atoms), &mut pieces.seqs);
                }
                collect(c, pieces);
            }
            _ => {}
        }
    }
    pieces.seqs.insert(SeqPattern::epsilon());
}

/// Element occurrences, other leaves (variables), flexible variables
/// (sequence or term) and loops that cannot vanish.
#[derive(Default)]
struct Census {
    elems: BTreeMap<Element, usize>,
    fixed_vars: usize,
    flexible: bool,
    solid_loops: usize,
}

fn census_seq(s: &SeqPattern, c: &mut Census) {
    for a in s.atoms() {
        match a {
            Atom::Elem(e) => *c.elems.entry(e.clone()).or_default() += 1,
            Atom::ElemVar(_) => c.fixed_vars += 1,
            Atom::SeqVar(_) => c.flexible = true,
        }
    }
}

fn census(p: &Pattern, c: &mut Census) {
    match p {
        Pattern::Seq(s) => census_seq(s, c),
        Pattern::Loop(m, body) => {
            if m.atoms().iter().any(|a| !matches!(a, Atom::SeqVar(_))) {
                c.solid_loops += 1;
            }
            census_seq(m, c);
            census(body, c);
        }
        Pattern::Par(ps) => ps.iter().for_each(|q| census(q, c)),
        Pattern::Rule(_) => {}
        Pattern::Var(_) => c.flexible = true,
    }
}

fn leaves(p: &Pattern) -> usize {
    match p {
        Pattern::Seq(s) => s.len(),
        Pattern::Loop(m, c) => m.len() + leaves(c),
        Pattern::Par(ps) => ps.iter().map(leaves).sum(),
        Pattern::Rule(_) | Pattern::Var(_) => 0,
    }
}

/// Occurrences of each variable outside rule bodies.
fn occurrences(p: &Pattern, out: &mut BTreeMap<Variable, usize>) {
    let seq = |s: &SeqPattern, out: &mut BTreeMap<Variable, usize>| {
        for v in s.atoms().iter().filter_map(Atom::variable) {
            *out.entry(v).or_default() += 1;
        }
    };
    match p {
        Pattern::Seq(s) => seq(s, out),
        Pattern::Loop(m, c) => {
            seq(m, out);
            occurrences(c, out);
        }
        Pattern::Par(ps) => ps.iter().for_each(|q| occurrences(q, out)),
        Pattern::Rule(_) => {}
        Pattern::Var(x) => *out.entry(Variable::term(x)).or_default() += 1,
    }
}

/// A ground term prepared for repeated brute-force matching.
pub struct Target {
    t: Pattern,
    leaves: usize,
    census: Census,
    elems: Vec<Binding>,
    seqs: Vec<(Binding, usize)>,
    terms: Vec<(Binding, usize)>,
}

impl Target {
    pub fn new(t: &Pattern) -> Self {
        let t = t.normalize();
        let mut pieces = Pieces::default();
        collect(&t, &mut pieces);
        let mut ct = Census::default();
        census(&t, &mut ct);
        Target {
            leaves: leaves(&t),
            census: ct,
            elems: pieces.elems.into_iter().map(Binding::Elem).collect(),
            seqs: pieces
                .seqs
                .into_iter()
                .map(|s| (s.len(), s))
                .map(|(n, s)| (Binding::Seq(s), n))
                .collect(),
            terms: pieces
                .terms
                .into_iter()
                .map(|x| (leaves(&x), x))
                .map(|(n, x)| (Binding::Term(x), n))
                .collect(),
            t,
        }
    }

    pub fn term(&self) -> &Pattern {
        &self.t
    }

    /// Necessary conditions for `p` to have an instance congruent to the target.
    fn feasible(&self, cp: &Census) -> bool {
        let ct = &self.census;
        let p_fixed = cp.elems.values().sum::<usize>() + cp.fixed_vars;
        let elems_fit = cp
            .elems
            .iter()
            .all(|(e, n)| ct.elems.get(e).copied().unwrap_or(0) >= *n);
        let leaves_fit = if cp.flexible {
            p_fixed <= self.leaves
        } else {
            p_fixed == self.leaves
        };
        elems_fit && leaves_fit && cp.solid_loops <= ct.solid_loops
    }

    /// Every instantiation of `vars(p)` whose image is congruent to the target.
    pub fn matches(&self, p: &Pattern) -> BTreeSet<Instantiation> {
        let mut out = BTreeSet::new();
        let mut cp = Census::default();
        census(p, &mut cp);
        if !self.feasible(&cp) {
            return out;
        }
        let mut occ = BTreeMap::new();
        occurrences(p, &mut occ);
        let vs: Vec<Variable> = vars(p, RuleBodies::Exclude).into_iter().collect();
        let base: usize = cp.elems.values().sum();
        let domains: Vec<Vec<(Binding, usize)>> = vs
            .iter()
            .map(|v| match v.kind {
                VarKind::Element => self.elems.iter().map(|b| (b.clone(), 0)).collect(),
                VarKind::Sequence => self.seqs.clone(),
                VarKind::Term => self.terms.clone(),
            })
            .collect();
        let weights: Vec<usize> = vs
            .iter()
            .map(|v| {
                if v.kind == VarKind::Element {
                    0
                } else {
                    occ.get(v).copied().unwrap_or(0)
                }
            })
            .collect();
        if domains.iter().any(|d| d.is_empty()) {
            return out;
        }
        let elem_leaves: usize = vs
            .iter()
            .filter(|v| v.kind == VarKind::Element)
            .map(|v| occ.get(v).copied().unwrap_or(0))
            .sum();
        let mut idx = vec![0usize; vs.len()];
        loop {
            let size = base
                + elem_leaves
                + idx
                    .iter()
                    .enumerate()
                    .map(|(k, &i)| weights[k] * domains[k][i].1)
                    .sum::<usize>();
            if size == self.leaves {
                let mut sigma = Instantiation::default();
                for (k, v) in vs.iter().enumerate() {
                    sigma
                        .bind(v.clone(), domains[k][idx[k]].0.clone())
                        .expect("pieces are ground");
                }
                if subst(p, &sigma).normalize() == self.t {
                    out.insert(sigma);
                }
            }
            // odometer
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return out;
                }
                idx[k] += 1;
                if idx[k] < domains[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

/// Every instantiation of `vars(p)` whose image is congruent to `t`.
pub fn oracle_matches(p: &Pattern, t: &Pattern) -> BTreeSet<Instantiation> {
    Target::new(t).matches(p)
}
