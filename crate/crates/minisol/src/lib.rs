//! Static analyzer for MiniSol, a small Solidity-like language.
//!
//! The pipeline lexes and parses a contract, lowers each function to a
//! three-address IR with a labeled control-flow graph, runs an interval
//! analysis with path constraints to a fixpoint, checks every program
//! point's satisfiability through pluggable solver backends, and reports
//! unreachable code plus interval-derived hazards.

pub mod ast;
pub mod domain;
pub mod source;
pub mod token;

pub mod parser;
pub mod types;

pub mod cfg;
pub mod ir;

pub mod analysis;
pub mod solver;

pub mod pipeline;
pub mod report;
