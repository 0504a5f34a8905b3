//! Brute-force model search over a satisfiability query: every integer
//! symbol ranges over 0..=15 (unsigned) or -8..=7 (signed), booleans over
//! both values. Used to confirm builtin Unsat verdicts independently.

use num_bigint::BigInt;

use minisol::solver::builtin::{witness_satisfies, Witness, WitnessValue};
use minisol::solver::{SatQuery, Sort};

/// Returns a model within the grid, or `None` when exhaustive enumeration
/// finds nothing.
pub fn find_model(q: &SatQuery) -> Option<Witness> {
    let mut names = Vec::new();
    let mut ranges: Vec<Vec<WitnessValue>> = Vec::new();
    for d in &q.decls {
        names.push(d.name.clone());
        match d.sort {
            Sort::Int { unsigned: true } => {
                ranges.push((0..=15).map(|v| WitnessValue::Int(BigInt::from(v))).collect());
            }
            Sort::Int { unsigned: false } => {
                ranges.push((-8..=7).map(|v| WitnessValue::Int(BigInt::from(v))).collect());
            }
            Sort::Bool => {
                ranges.push(vec![WitnessValue::Bool(false), WitnessValue::Bool(true)]);
            }
        }
    }
    let mut assignment: Witness = Witness::new();
    search(0, &names, &ranges, &mut assignment, q)
}

fn search(
    idx: usize,
    names: &[String],
    ranges: &[Vec<WitnessValue>],
    assignment: &mut Witness,
    q: &SatQuery,
) -> Option<Witness> {
    if idx == names.len() {
        return if witness_satisfies(q, assignment) == Some(true) {
            Some(assignment.clone())
        } else {
            None
        };
    }
    for v in &ranges[idx] {
        assignment.insert(names[idx].clone(), v.clone());
        if let Some(m) = search(idx + 1, names, ranges, assignment, q) {
            return Some(m);
        }
    }
    assignment.remove(&names[idx]);
    None
}
