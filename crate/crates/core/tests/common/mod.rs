//! Generators and reference oracles shared by the integration tests.
#![allow(dead_code)]

pub mod congruence;
pub mod enumerate;
pub mod gen;
pub mod oracle;

use clslr::format::parse_pattern;
use clslr::Pattern;

/// Parses a pattern, panicking on error.
pub fn pat(text: &str) -> Pattern {
    parse_pattern(text).unwrap_or_else(|e| panic!("{text}: {e}"))
}
