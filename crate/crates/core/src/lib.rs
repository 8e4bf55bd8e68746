//! Pattern-based synchronous context-free grammars for machine translation.
//!
//! A grammar is a set of translation patterns: paired source/target CFG
//! rules carrying head constraints, link indices, binary feature vectors
//! and weights. Translation parses the input with the source skeletons,
//! checks constraints over the resulting forest, and generates target
//! strings from the best synchronized derivations.

pub mod dsl;
pub mod equiv;
pub mod grammar;
pub mod integrate;
pub mod parser;
pub mod translate;
