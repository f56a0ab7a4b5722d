//! Search-based repair of rule-based model transformations.
//!
//! The pipeline: [`mtl`] runs a transformation over a [`model`], [`diff`]
//! compares its output to the expected model, [`edits`] rewrites the program,
//! and [`evolve`] searches for edit sequences that drive the differences to
//! zero. [`mutants`] builds faulty programs to benchmark the search on.

pub mod corpus;
pub mod diff;
pub mod digest;
pub mod edits;
pub mod evolve;
mod lexer;
pub mod model;
pub mod mtl;
pub mod mutants;
