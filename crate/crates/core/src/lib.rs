//! Lifted model finding for typed first-order logic with aggregates.

pub mod ast;
pub mod structures;
pub mod lifter;
pub mod eval;
pub mod grounder;
pub mod search;
pub mod corpus;
