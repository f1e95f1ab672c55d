//! Quantum finite automata.
//!
//! * [`numerics`]: complex vectors and matrices.
//! * [`qfa`]: measure-once and measure-many automata, simulation, validation,
//!   and acceptance certificates.
//! * [`constructions`]: closure operations and boolean compositions on
//!   measure-many automata.
//! * [`ptest`]: compilation of boolean expressions over subsequence atoms.
//! * [`classical`]: DFA checks, group-automaton compilation, linear-system
//!   equivalence, and conversion to probabilistic automata.
//! * [`gallery`]: ready-made example automata.

pub mod classical;
pub mod constructions;
pub mod error;
pub mod gallery;
pub mod numerics;
pub mod ptest;
pub mod qfa;

pub use error::{Error, Result};
