//! The bundled mitochondria model and its classification.

use crate::format::{parse_model, ModelFile};

/// Source of the mitochondria model.
pub const MITO: &str = include_str!("../corpus/mito.clslr");

/// Source of its classification.
pub const MITO_LAMBDA: &str = include_str!("../corpus/mito.lambda.clslr");

/// The parsed model.
pub fn mito() -> ModelFile {
    parse_model(MITO).expect("bundled model parses")
}

/// The parsed model with the classification merged in.
pub fn mito_typed() -> ModelFile {
    let mut m = mito();
    m.classification = parse_model(MITO_LAMBDA)
        .expect("bundled classification parses")
        .classification;
    m
}
