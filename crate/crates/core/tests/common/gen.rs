//! Seeded random models, patterns and instantiations.

use clslr::term::check_local_rule;
use clslr::{
    type_pattern, vars, Atom, Basis, Binding, Classification, Feature, GlobalRule, Instantiation,
    LocalRule, MembraneType, Pattern, RuleBodies, SeqPattern, VarKind, Variable,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ALPHABET: [&str; 4] = ["a", "b", "c", "m"];
const ELEM_VARS: [&str; 2] = ["x", "y"];
const SEQ_VARS: [&str; 2] = ["u", "v"];
const TERM_VARS: [&str; 2] = ["X", "Y"];

/// A random model: ground term, global rules and classification.
#[derive(Debug, Clone)]
pub struct Model {
    pub term: Pattern,
    pub globals: Vec<GlobalRule>,
    pub lambda: Classification,
}

pub struct Gen {
    pub rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn elem(&mut self) -> Atom {
        Atom::elem(ALPHABET.choose(&mut self.rng).expect("alphabet"))
    }

    pub fn ground_seq(&mut self, min: usize, max: usize) -> SeqPattern {
        let n = self.rng.gen_range(min..=max);
        SeqPattern::new((0..n).map(|_| self.elem()).collect())
    }

    /// A sequence pattern; variables drawn from `pool` when given.
    fn seq_pattern(&mut self, min: usize, max: usize, pool: Option<&[Atom]>) -> SeqPattern {
        let n = self.rng.gen_range(min..=max);
        let atoms = (0..n)
            .map(|_| match pool {
                Some(pool) if !pool.is_empty() && self.chance(0.4) => {
                    pool.choose(&mut self.rng).expect("pool").clone()
                }
                Some(_) => self.elem(),
                None => match self.rng.gen_range(0..10) {
                    0..=5 => self.elem(),
                    6..=7 => Atom::elem_var(ELEM_VARS.choose(&mut self.rng).expect("vars")),
                    _ => Atom::seq_var(SEQ_VARS.choose(&mut self.rng).expect("vars")),
                },
            })
            .collect();
        SeqPattern::new(atoms)
    }

    /// A ground term of loop depth at most `depth` holding at most `*rules` rules.
    pub fn ground_term(&mut self, depth: usize, rules: &mut usize) -> Pattern {
        self.level(depth, rules, None)
    }

    /// A level inside `membrane`: material first, then rules that mostly
    /// rewrite that material.
    fn level(&mut self, depth: usize, rules: &mut usize, membrane: Option<&SeqPattern>) -> Pattern {
        let n = self.rng.gen_range(1..=3);
        let mut seqs = Vec::new();
        let mut children = Vec::new();
        let mut items = Vec::new();
        for _ in 0..n {
            if depth > 0 && self.chance(0.3) {
                let m = self.ground_seq(1, 2);
                items.push(Pattern::looping(
                    m.clone(),
                    self.level(depth - 1, rules, Some(&m)),
                ));
                children.push(m);
            } else {
                let s = self.ground_seq(1, 2);
                items.push(Pattern::Seq(s.clone()));
                seqs.push(s);
            }
        }
        let k = self.rng.gen_range(1..=2).min(*rules);
        for _ in 0..k {
            *rules -= 1;
            let r = if self.chance(0.8) {
                self.rule_for(&seqs, membrane, &children)
            } else {
                self.local_rule()
            };
            items.push(Pattern::rule(r));
        }
        Pattern::par(items).normalize()
    }

    /// Replaces some atoms of `s` by element or sequence variables.
    fn generalize(&mut self, s: &SeqPattern) -> SeqPattern {
        let mut out = Vec::new();
        for a in s.atoms() {
            match self.rng.gen_range(0..10) {
                0..=1 => out.push(Atom::elem_var(
                    ELEM_VARS.choose(&mut self.rng).expect("vars"),
                )),
                2 => out.push(Atom::seq_var(SEQ_VARS.choose(&mut self.rng).expect("vars"))),
                _ => out.push(a.clone()),
            }
        }
        SeqPattern::new(out)
    }

    /// A rule whose left side generalizes material of the level.
    fn rule_for(
        &mut self,
        seqs: &[SeqPattern],
        membrane: Option<&SeqPattern>,
        children: &[SeqPattern],
    ) -> LocalRule {
        for _ in 0..20 {
            let n = self.rng.gen_range(1..=2);
            let mut lhs_items = Vec::new();
            for _ in 0..n {
                let s = match seqs.choose(&mut self.rng) {
                    Some(s) => s.clone(),
                    None => self.ground_seq(1, 2),
                };
                lhs_items.push(Pattern::Seq(self.generalize(&s)));
            }
            if self.chance(0.1) {
                lhs_items.push(Pattern::var(TERM_VARS.choose(&mut self.rng).expect("vars")));
            }
            let lhs = Pattern::par(lhs_items);
            let bound: Vec<Variable> = vars(&lhs, RuleBodies::Exclude).into_iter().collect();
            let mut shapes = vec![0];
            if membrane.is_some() {
                shapes.push(1);
            }
            if !children.is_empty() {
                shapes.push(2);
            }
            let rule = match *shapes.choose(&mut self.rng).expect("shapes") {
                0 => LocalRule::plain(lhs, self.rhs(&bound)),
                shape => {
                    let target = if shape == 1 {
                        membrane.expect("membrane").clone()
                    } else {
                        children.choose(&mut self.rng).expect("children").clone()
                    };
                    let s1 = if self.chance(0.3) {
                        SeqPattern::new(vec![Atom::seq_var("w")])
                    } else {
                        target
                    };
                    let mut all = bound.clone();
                    all.extend(s1.atoms().iter().filter_map(Atom::variable));
                    let rhs = self.rhs(&all);
                    let s2 = if self.chance(0.8) {
                        s1.clone()
                    } else {
                        self.ground_seq(1, 2)
                    };
                    if shape == 1 {
                        LocalRule::out(lhs, s1, rhs, s2)
                    } else {
                        LocalRule::inward(lhs, s1, rhs, s2)
                    }
                }
            };
            if check_local_rule(&rule).is_ok() {
                return rule.normalize();
            }
        }
        self.local_rule()
    }

    /// A left-hand side made of sequence patterns, maybe with a term variable.
    fn lhs(&mut self) -> Pattern {
        let n = self.rng.gen_range(1..=2);
        let mut items: Vec<Pattern> = (0..n)
            .map(|_| Pattern::Seq(self.seq_pattern(1, 2, None)))
            .collect();
        if self.chance(0.1) {
            items.push(Pattern::var(TERM_VARS.choose(&mut self.rng).expect("vars")));
        }
        Pattern::par(items)
    }

    /// A right-hand side over the variables of `bound`.
    fn rhs(&mut self, bound: &[Variable]) -> Pattern {
        let pool: Vec<Atom> = bound
            .iter()
            .filter_map(|v| match v.kind {
                VarKind::Element => Some(Atom::elem_var(&v.name)),
                VarKind::Sequence => Some(Atom::seq_var(&v.name)),
                VarKind::Term => None,
            })
            .collect();
        let n = self.rng.gen_range(0..=2);
        let mut items = Vec::new();
        for _ in 0..n {
            let roll = self.rng.gen_range(0..10);
            if roll == 0 {
                items.push(Pattern::rule(LocalRule::plain(
                    Pattern::Seq(self.ground_seq(1, 1)),
                    Pattern::Seq(self.ground_seq(0, 1)),
                )));
            } else {
                items.push(Pattern::Seq(self.seq_pattern(1, 2, Some(&pool))));
            }
        }
        for v in bound.iter().filter(|v| v.kind == VarKind::Term) {
            if self.chance(0.7) {
                items.push(Pattern::var(&v.name));
            }
        }
        Pattern::par(items)
    }

    /// A well-formed local rule of any of the three shapes.
    pub fn local_rule(&mut self) -> LocalRule {
        loop {
            let lhs = self.lhs();
            let bound: Vec<Variable> = vars(&lhs, RuleBodies::Exclude).into_iter().collect();
            let rule = match self.rng.gen_range(0..3) {
                0 => LocalRule::plain(lhs, self.rhs(&bound)),
                kind => {
                    let s1 = if self.chance(0.3) {
                        SeqPattern::new(vec![Atom::seq_var("w")])
                    } else {
                        self.ground_seq(1, 2)
                    };
                    let mut all = bound.clone();
                    all.extend(s1.atoms().iter().filter_map(Atom::variable));
                    let rhs = self.rhs(&all);
                    let s2 = if self.chance(0.7) {
                        s1.clone()
                    } else {
                        self.ground_seq(1, 2)
                    };
                    if kind == 1 {
                        LocalRule::out(lhs, s1, rhs, s2)
                    } else {
                        LocalRule::inward(lhs, s1, rhs, s2)
                    }
                }
            };
            if check_local_rule(&rule).is_ok() {
                return rule.normalize();
            }
        }
    }

    /// A global rule, possibly moving material across a membrane.
    pub fn global_rule(&mut self) -> GlobalRule {
        loop {
            let (lhs, rhs) = if self.chance(0.5) {
                let lhs = self.lhs();
                let bound: Vec<Variable> = vars(&lhs, RuleBodies::Exclude).into_iter().collect();
                let rhs = self.rhs(&bound);
                (lhs, rhs)
            } else {
                // loop(~w)[a | $X] => a | loop(~w)[$X] and the like
                let a = Pattern::Seq(self.ground_seq(1, 1));
                let m = SeqPattern::new(vec![Atom::seq_var("w")]);
                let inside =
                    Pattern::looping(m.clone(), Pattern::par(vec![a.clone(), Pattern::var("X")]));
                let outside = Pattern::par(vec![a, Pattern::looping(m, Pattern::var("X"))]);
                if self.chance(0.5) {
                    (inside, outside)
                } else {
                    (outside, inside)
                }
            };
            if let Ok(g) = GlobalRule::new(lhs, rhs) {
                return g;
            }
        }
    }

    pub fn membrane_type(&mut self) -> MembraneType {
        let mut phi = MembraneType::EMPTY;
        for f in Feature::ALL {
            if self.chance(0.7) {
                phi = phi.with(f);
            }
        }
        phi
    }

    pub fn classification(&mut self) -> Classification {
        let mut lambda = Classification::default();
        for e in ALPHABET {
            let phi = self.membrane_type();
            lambda.insert(clslr::Element::new(e), phi);
        }
        lambda
    }

    /// A model with depth at most 3 and at most 4 rules, not checked for typing.
    pub fn model(&mut self) -> Model {
        let mut rules = self.rng.gen_range(2..=4);
        let globals = if rules > 1 && self.chance(0.3) {
            rules -= 1;
            vec![self.global_rule()]
        } else {
            vec![]
        };
        let term = if self.chance(0.6) {
            let m = self.ground_seq(1, 1);
            let content = self.level(2, &mut rules, Some(&m));
            Pattern::looping(m, content)
        } else {
            self.ground_term(3, &mut rules)
        };
        Model {
            term: term.normalize(),
            globals,
            lambda: self.classification(),
        }
    }

    /// A model whose term types under the empty basis.
    pub fn typed_model(&mut self) -> Model {
        loop {
            let m = self.model();
            if type_pattern(&Basis::new(), &m.lambda, &m.term).is_ok() {
                return m;
            }
        }
    }

    /// A pattern with variables, loops and rules.
    pub fn pattern(&mut self, depth: usize) -> Pattern {
        let n = self.rng.gen_range(0..=3);
        let items = (0..n)
            .map(|_| match self.rng.gen_range(0..10) {
                0..=1 if depth > 0 => {
                    let m = self.seq_pattern(0, 2, None);
                    Pattern::looping(m, self.pattern(depth - 1))
                }
                2 => Pattern::rule(self.local_rule()),
                3 => Pattern::var(TERM_VARS.choose(&mut self.rng).expect("vars")),
                _ => Pattern::Seq(self.seq_pattern(0, 3, None)),
            })
            .collect();
        Pattern::par(items)
    }

    /// A ground image for every variable of `p` outside rule bodies.
    pub fn instantiation(&mut self, p: &Pattern) -> Instantiation {
        let mut sigma = Instantiation::default();
        for v in vars(p, RuleBodies::Exclude) {
            let value = match v.kind {
                VarKind::Element => Binding::Elem(clslr::Element::new(
                    ALPHABET.choose(&mut self.rng).expect("alphabet"),
                )),
                VarKind::Sequence => Binding::Seq(self.ground_seq(0, 2)),
                VarKind::Term => {
                    let mut rules = self.rng.gen_range(0..=1);
                    Binding::Term(if self.chance(0.2) {
                        Pattern::eps()
                    } else {
                        self.ground_term(1, &mut rules)
                    })
                }
            };
            sigma.bind(v, value).expect("ground, kind-correct binding");
        }
        sigma
    }
}
