//! Recursive descent parser for model files.

use std::sync::Arc;

use super::lexer::{tokenize, Spanned, Tok};
use super::{Location, ModelFile, ParseError};
use crate::term::{
    check_local_rule, is_ground, Atom, Element, GlobalRule, LocalRule, Pattern, SeqPattern,
};
use crate::types::{Feature, MembraneType};

const KEYWORDS: [&str; 5] = ["eps", "loop", "global", "element", "option"];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Arrow {
    Plain,
    Out,
    In,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        let toks = tokenize(text).map_err(|(line, col, c)| ParseError::SyntaxError {
            location: Location { line, col },
            expected: "a token".into(),
            found: format!("`{c}`"),
        })?;
        Ok(Parser { toks, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> Location {
        let t = &self.toks[self.pos];
        Location {
            line: t.line,
            col: t.col,
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::SyntaxError {
            location: self.here(),
            expected: expected.into(),
            found: self.peek().to_string(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.error(&format!("`{s}`"))
        }
    }

    /// A non-reserved identifier.
    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(what),
        }
    }

    fn par(&mut self) -> Result<Pattern, ParseError> {
        let mut items = vec![self.item()?];
        while self.is_sym("|") {
            self.bump();
            items.push(self.item()?);
        }
        Ok(if items.len() == 1 {
            items.pop().expect("one item")
        } else {
            Pattern::Par(items)
        })
    }

    fn item(&mut self) -> Result<Pattern, ParseError> {
        if self.is_keyword("loop") {
            self.bump();
            self.expect_sym("(")?;
            let m = self.seq()?;
            self.expect_sym(")")?;
            self.expect_sym("[")?;
            let c = self.par()?;
            self.expect_sym("]")?;
            return Ok(Pattern::looping(m, c));
        }
        match self.peek() {
            Tok::Sym("(") => {
                self.bump();
                let p = self.par()?;
                self.expect_sym(")")?;
                Ok(p)
            }
            Tok::Sym("{") => self.rule(),
            Tok::Sym("$") => {
                self.bump();
                let name = self.ident("a term variable name")?;
                Ok(Pattern::Var(Arc::from(name.as_str())))
            }
            Tok::Sym("?") | Tok::Sym("~") | Tok::Ident(_) => Ok(Pattern::Seq(self.seq()?)),
            _ => self.error("a term item"),
        }
    }

    fn seq(&mut self) -> Result<SeqPattern, ParseError> {
        if self.is_keyword("eps") {
            self.bump();
            return Ok(SeqPattern::epsilon());
        }
        let mut atoms = vec![self.atom()?];
        while self.is_sym(".") {
            self.bump();
            atoms.push(self.atom()?);
        }
        Ok(SeqPattern::new(atoms))
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        match self.peek() {
            Tok::Sym("?") => {
                self.bump();
                Ok(Atom::ElemVar(Arc::from(
                    self.ident("an element variable name")?.as_str(),
                )))
            }
            Tok::Sym("~") => {
                self.bump();
                Ok(Atom::SeqVar(Arc::from(
                    self.ident("a sequence variable name")?.as_str(),
                )))
            }
            _ => Ok(Atom::Elem(Element::new(&self.ident("an element")?))),
        }
    }

    fn rule(&mut self) -> Result<Pattern, ParseError> {
        let start = self.here();
        self.expect_sym("{")?;
        let lhs = self.par()?;
        let (arrow, lhs_mem) = match self.peek() {
            Tok::Sym("^") => {
                self.bump();
                (Arrow::Out, self.seq()?)
            }
            Tok::Sym("@") => {
                self.bump();
                (Arrow::In, self.seq()?)
            }
            Tok::Sym("=>") => (Arrow::Plain, SeqPattern::epsilon()),
            _ => return self.error("`=>`, `^` or `@`"),
        };
        self.expect_sym("=>")?;
        let rhs = self.par()?;
        let rule = match arrow {
            Arrow::Plain => LocalRule::plain(lhs, rhs),
            Arrow::Out | Arrow::In => {
                let marker = if arrow == Arrow::Out { "^" } else { "@" };
                self.expect_sym(marker)?;
                let rhs_mem = self.seq()?;
                if arrow == Arrow::Out {
                    LocalRule::out(lhs, lhs_mem, rhs, rhs_mem)
                } else {
                    LocalRule::inward(lhs, lhs_mem, rhs, rhs_mem)
                }
            }
        };
        self.expect_sym("}")?;
        check_local_rule(&rule).map_err(|clause| ParseError::IllFormedRule {
            location: start,
            clause,
            rule: rule.to_string(),
        })?;
        Ok(Pattern::rule(rule.normalize()))
    }

    fn membrane_type(&mut self) -> Result<MembraneType, ParseError> {
        self.expect_sym("{")?;
        let mut phi = MembraneType::EMPTY;
        if !self.is_sym("}") {
            loop {
                let feature = match self.peek() {
                    Tok::Ident(s) if s.len() == 1 => {
                        Feature::from_letter(s.chars().next().expect("one char"))
                    }
                    _ => None,
                };
                match feature {
                    Some(f) => {
                        self.bump();
                        phi = phi.with(f);
                    }
                    None => return self.error("one of the features d, r, s, e, o, i"),
                }
                if self.is_sym(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_sym("}")?;
        Ok(phi)
    }

    fn model(&mut self) -> Result<ModelFile, ParseError> {
        let mut model = ModelFile::default();
        let mut have_term = false;
        loop {
            let at = self.here();
            match self.peek() {
                Tok::Eof => break,
                Tok::Ident(k) if k == "global" => {
                    self.bump();
                    let lhs = self.par()?;
                    self.expect_sym("=>")?;
                    let rhs = self.par()?;
                    self.expect_sym(";")?;
                    let text = format!("{lhs} => {rhs}");
                    let g = GlobalRule::new(lhs, rhs).map_err(|clause| {
                        ParseError::IllFormedGlobal {
                            location: at,
                            clause,
                            rule: text,
                        }
                    })?;
                    model.globals.push(g);
                }
                Tok::Ident(k) if k == "element" => {
                    self.bump();
                    let name = self.ident("an element")?;
                    self.expect_sym(":")?;
                    let phi = self.membrane_type()?;
                    self.expect_sym(";")?;
                    let e = Element::new(&name);
                    if model.classification.get(&e).is_some() {
                        return Err(ParseError::DuplicateElement {
                            location: at,
                            element: name,
                        });
                    }
                    model.classification.insert(e, phi);
                }
                Tok::Ident(k) if k == "option" && matches!(self.peek2(), Tok::Ident(_)) => {
                    self.bump();
                    let key = self.ident("an option name")?;
                    self.expect_sym("=")?;
                    let value = match self.bump() {
                        Tok::Ident(v) => v,
                        _ => {
                            self.pos -= 1;
                            return self.error("an option value");
                        }
                    };
                    self.expect_sym(";")?;
                    model.options.insert(key, value);
                }
                _ => {
                    if have_term {
                        return Err(ParseError::DuplicateTerm { location: at });
                    }
                    let term = self.par()?;
                    if !is_ground(&term) {
                        return Err(ParseError::NotGround {
                            location: at,
                            term: term.to_string(),
                        });
                    }
                    model.term = term.normalize();
                    have_term = true;
                    if self.is_sym(";") {
                        self.bump();
                    } else if !matches!(self.peek(), Tok::Eof) {
                        return self.error("`|`, `;` or end of input");
                    }
                }
            }
        }
        Ok(model)
    }

    fn finish(&self) -> Result<(), ParseError> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.error("end of input")
        }
    }
}

/// Parses a model file.
pub fn parse_model(text: &str) -> Result<ModelFile, ParseError> {
    Parser::new(text)?.model()
}

/// Parses a single pattern (variables allowed), normalized.
pub fn parse_pattern(text: &str) -> Result<Pattern, ParseError> {
    let mut p = Parser::new(text)?;
    let pat = p.par()?;
    p.finish()?;
    Ok(pat.normalize())
}

/// Parses a sequence pattern.
pub fn parse_seq(text: &str) -> Result<SeqPattern, ParseError> {
    let mut p = Parser::new(text)?;
    let s = p.seq()?;
    p.finish()?;
    Ok(s)
}

/// Parses `lhs => rhs`.
pub(crate) fn parse_global(text: &str) -> Result<GlobalRule, ParseError> {
    let mut p = Parser::new(text)?;
    let at = p.here();
    let lhs = p.par()?;
    p.expect_sym("=>")?;
    let rhs = p.par()?;
    p.finish()?;
    let rendered = format!("{lhs} => {rhs}");
    GlobalRule::new(lhs, rhs).map_err(|clause| ParseError::IllFormedGlobal {
        location: at,
        clause,
        rule: rendered,
    })
}
