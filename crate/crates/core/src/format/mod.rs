//! Model files, canonical rendering and JSON traces.
//!
//! ```text
//! term    := par
//! par     := item ( '|' item )*
//! item    := 'loop' '(' seq ')' '[' par ']' | seq | rule | '$' IDENT | '(' par ')'
//! seq     := 'eps' | atom ( '.' atom )*
//! atom    := IDENT | '?' IDENT | '~' IDENT
//! rule    := '{' par '=>' par '}'
//!          | '{' par '^' seq '=>' par '^' seq '}'
//!          | '{' par '@' seq '=>' par '@' seq '}'
//! global  := 'global' par '=>' par ';'
//! element := 'element' IDENT ':' '{' ( feature ( ',' feature )* )? '}' ';'
//! option  := 'option' IDENT '=' IDENT ';'
//! ```
//!
//! A file holds any number of `global`, `element` and `option` statements
//! and at most one term, optionally followed by `;`. `#` starts a comment.
//! `eps`, `loop`, `global`, `element` and `option` are reserved.

mod lexer;
mod parser;
mod trace;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::term::{GlobalRule, GlobalWfError, Pattern, WfClause};
use crate::types::Classification;

pub use parser::{parse_model, parse_pattern, parse_seq};
pub use trace::{
    trace_from_json, trace_to_json, traces_from_json, traces_to_json, TraceFormatError,
};

/// A parsed model file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelFile {
    pub term: Pattern,
    pub globals: Vec<GlobalRule>,
    pub classification: Classification,
    pub options: BTreeMap<String, String>,
}

/// A position in the source text, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{location}: expected {expected}, found {found}")]
    SyntaxError {
        location: Location,
        expected: String,
        found: String,
    },
    #[error("{location}: ill-formed rule {rule}: {clause}")]
    IllFormedRule {
        location: Location,
        clause: WfClause,
        rule: String,
    },
    #[error("{location}: ill-formed global rule {rule}: {clause}")]
    IllFormedGlobal {
        location: Location,
        clause: GlobalWfError,
        rule: String,
    },
    #[error("{location}: the term has variables outside rules: {term}")]
    NotGround { location: Location, term: String },
    #[error("{location}: a model holds a single term")]
    DuplicateTerm { location: Location },
    #[error("{location}: element {element} is classified twice")]
    DuplicateElement { location: Location, element: String },
}

impl ParseError {
    pub fn location(&self) -> Location {
        match self {
            ParseError::SyntaxError { location, .. }
            | ParseError::IllFormedRule { location, .. }
            | ParseError::IllFormedGlobal { location, .. }
            | ParseError::NotGround { location, .. }
            | ParseError::DuplicateTerm { location }
            | ParseError::DuplicateElement { location, .. } => *location,
        }
    }
}

/// Canonical text of a pattern: the rendering of its normal form.
pub fn render(p: &Pattern) -> String {
    p.normalize().to_string()
}

/// Text of a whole model that parses back to a congruent model.
pub fn render_model(m: &ModelFile) -> String {
    let mut out = String::new();
    for (k, v) in &m.options {
        out.push_str(&format!("option {k} = {v};\n"));
    }
    for (e, phi) in m.classification.iter() {
        out.push_str(&format!("element {e} : {phi};\n"));
    }
    for g in &m.globals {
        out.push_str(&format!(
            "global {} => {};\n",
            render(&g.lhs),
            render(&g.rhs)
        ));
    }
    out.push_str(&render(&m.term));
    out.push_str(";\n");
    out
}
