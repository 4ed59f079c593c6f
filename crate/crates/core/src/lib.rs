//! Logic-based regularization for fact-classification models.
//!
//! The crate provides exact semantic loss (via weighted model counting) and
//! the DL2 fuzzy loss over propositional formulas, stores for large theories
//! of negative integrity constraints, and neural-guided selection of the
//! constraints a prediction violates most. A small synthetic harness trains a
//! softmax relation classifier end to end with these pieces.

pub mod checks;
pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod logic;
pub mod losses;
pub mod ngp;
pub mod theory;

pub use error::{Error, Result};
