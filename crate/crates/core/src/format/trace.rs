//! JSON encoding of parallel-step traces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::parser::{parse_global, parse_pattern, parse_seq};
use super::ParseError;
use crate::matcher::{Binding, Instantiation};
use crate::rewrite::{PathStep, ReductionLabel, RuleRef, Schema, Trace};
use crate::term::{Element, Pattern, Variable};

#[derive(Debug, Error)]
pub enum TraceFormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unparsable term in trace: {0}")]
    Parse(#[from] ParseError),
    #[error("invalid trace: {0}")]
    Invalid(String),
}

#[derive(Serialize, Deserialize)]
struct TraceJson {
    seed: u64,
    strategy: String,
    initial: String,
    steps: Vec<StepJson>,
    #[serde(rename = "final")]
    final_term: String,
}

#[derive(Serialize, Deserialize)]
struct StepJson {
    schema: Schema,
    rule: String,
    path: Vec<PathStep>,
    sigma: BTreeMap<String, String>,
    residue: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(TraceJson),
    Many(Vec<TraceJson>),
}

fn encode(t: &Trace) -> TraceJson {
    TraceJson {
        seed: t.seed,
        strategy: t.strategy.to_string(),
        initial: t.initial.to_string(),
        steps: t
            .steps
            .iter()
            .map(|l| StepJson {
                schema: l.schema,
                rule: l.rule.to_string(),
                path: l.path.clone(),
                sigma: l
                    .sigma
                    .iter()
                    .map(|(v, b)| (v.to_string(), b.to_string()))
                    .collect(),
                residue: l.residue.to_string(),
            })
            .collect(),
        final_term: t.final_term.to_string(),
    }
}

fn decode_var(key: &str) -> Result<Variable, TraceFormatError> {
    let mut chars = key.chars();
    let sigil = chars.next();
    let name = chars.as_str();
    if name.is_empty() {
        return Err(TraceFormatError::Invalid(format!("bad variable {key:?}")));
    }
    match sigil {
        Some('?') => Ok(Variable::element(name)),
        Some('~') => Ok(Variable::sequence(name)),
        Some('$') => Ok(Variable::term(name)),
        _ => Err(TraceFormatError::Invalid(format!("bad variable {key:?}"))),
    }
}

fn decode_step(s: &StepJson) -> Result<ReductionLabel, TraceFormatError> {
    let rule = match s.schema {
        Schema::Grt => RuleRef::Global(parse_global(&s.rule)?),
        _ => match parse_pattern(&s.rule)? {
            Pattern::Rule(r) => RuleRef::Local(*r),
            other => {
                return Err(TraceFormatError::Invalid(format!(
                    "not a local rule: {other}"
                )))
            }
        },
    };
    let mut sigma = Instantiation::default();
    for (k, v) in &s.sigma {
        let var = decode_var(k)?;
        let value = match k.chars().next() {
            Some('?') => Binding::Elem(Element::new(v)),
            Some('~') => Binding::Seq(parse_seq(v)?),
            _ => Binding::Term(parse_pattern(v)?),
        };
        sigma
            .bind(var, value)
            .map_err(|e| TraceFormatError::Invalid(e.to_string()))?;
    }
    Ok(ReductionLabel {
        schema: s.schema,
        rule,
        path: s.path.clone(),
        sigma,
        residue: parse_pattern(&s.residue)?,
    })
}

fn decode(j: &TraceJson) -> Result<Trace, TraceFormatError> {
    Ok(Trace {
        seed: j.seed,
        strategy: j.strategy.parse().map_err(TraceFormatError::Invalid)?,
        initial: parse_pattern(&j.initial)?,
        steps: j.steps.iter().map(decode_step).collect::<Result<_, _>>()?,
        final_term: parse_pattern(&j.final_term)?,
    })
}

/// Pretty JSON for one trace.
pub fn trace_to_json(t: &Trace) -> String {
    serde_json::to_string_pretty(&encode(t)).expect("traces serialize")
}

/// Pretty JSON array for a run of traces.
pub fn traces_to_json(ts: &[Trace]) -> String {
    serde_json::to_string_pretty(&ts.iter().map(encode).collect::<Vec<_>>())
        .expect("traces serialize")
}

/// Reads a single trace object.
pub fn trace_from_json(text: &str) -> Result<Trace, TraceFormatError> {
    decode(&serde_json::from_str(text)?)
}

/// Reads either a single trace object or an array of traces.
pub fn traces_from_json(text: &str) -> Result<Vec<Trace>, TraceFormatError> {
    match serde_json::from_str(text)? {
        OneOrMany::One(j) => Ok(vec![decode(&j)?]),
        OneOrMany::Many(js) => js.iter().map(decode).collect(),
    }
}
