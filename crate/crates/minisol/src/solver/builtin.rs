//! Builtin satisfiability checker: interval propagation over the asserted
//! comparisons, refutation by abstract evaluation, and a witness search
//! over a small candidate grid.
//!
//! Unsat is only ever returned with a closed proof: either some variable's
//! interval emptied during tightening, or an asserted expression evaluates
//! to a definite truth value contradicting its polarity. Sat is only
//! returned with a concrete witness that satisfies every assertion.
//! Everything else is Unknown.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::analysis::expr::{BoolExpr, NumExpr};
use crate::domain::{arith, compare, ArithOp, BoolApprox, CmpOp, ExtInt, Interval};
use crate::solver::query::{SatQuery, Sort};
use crate::solver::{SatResult, SatVerdict, SolverBackend};

const TIGHTEN_PASSES: usize = 32;
const WITNESS_CAP: usize = 512;

pub struct BuiltinSolver;

impl SolverBackend for BuiltinSolver {
    fn name(&self) -> &str {
        "builtin"
    }

    fn decide(&self, q: &SatQuery) -> SatResult {
        decide_builtin(q)
    }
}

/// Assertions normalized to positive polarity leaves where possible.
fn normalized_assertions(q: &SatQuery) -> Vec<(BoolExpr, bool)> {
    let defs: BTreeMap<&str, &BoolExpr> = q.defs.iter().map(|(s, e)| (s.as_str(), e)).collect();
    q.asserts
        .iter()
        .filter_map(|(sym, pol)| defs.get(sym.as_str()).map(|e| ((*e).clone(), *pol)))
        .collect()
}

/// Splits conjunctive structure: `And` asserted true and `Or` asserted
/// false decompose, `Not` flips polarity.
fn split_conjuncts(expr: &BoolExpr, polarity: bool, out: &mut Vec<(BoolExpr, bool)>) {
    match (expr, polarity) {
        (BoolExpr::Not(inner), p) => split_conjuncts(inner, !p, out),
        (BoolExpr::And(a, b), true) => {
            split_conjuncts(a, true, out);
            split_conjuncts(b, true, out);
        }
        (BoolExpr::Or(a, b), false) => {
            split_conjuncts(a, false, out);
            split_conjuncts(b, false, out);
        }
        _ => out.push((expr.clone(), polarity)),
    }
}

struct Env {
    ints: BTreeMap<String, Interval>,
    bools: BTreeMap<String, BoolApprox>,
}

fn seed_env(q: &SatQuery) -> Env {
    let mut ints = BTreeMap::new();
    let mut bools = BTreeMap::new();
    for d in &q.decls {
        match d.sort {
            Sort::Int { unsigned } => {
                let iv = if unsigned {
                    Interval::unsigned_top()
                } else {
                    Interval::top()
                };
                ints.insert(d.name.clone(), iv);
            }
            Sort::Bool => {
                bools.insert(d.name.clone(), BoolApprox::Unknown);
            }
        }
    }
    for (name, iv) in &q.bounds {
        if let Some(slot) = ints.get_mut(name) {
            *slot = slot.meet(iv);
        }
    }
    Env { ints, bools }
}

pub fn decide_builtin(q: &SatQuery) -> SatResult {
    let mut env = seed_env(q);
    let mut leaves = Vec::new();
    for (expr, pol) in normalized_assertions(q) {
        split_conjuncts(&expr, pol, &mut leaves);
    }

    // 1. propagate bounds from simple comparisons until stable
    for _ in 0..TIGHTEN_PASSES {
        let mut changed = false;
        for (expr, pol) in &leaves {
            match tighten_leaf(expr, *pol, &mut env) {
                TightenOutcome::Contradiction(why) => {
                    return SatResult::unsat(format!("interval emptied: {why}"));
                }
                TightenOutcome::Changed => changed = true,
                TightenOutcome::Stable => {}
            }
        }
        if !changed {
            break;
        }
    }
    if let Some((name, _)) = env.ints.iter().find(|(_, iv)| iv.is_empty()) {
        return SatResult::unsat(format!("interval of {name} emptied"));
    }

    // 2. refute by abstract evaluation of every original assertion
    for (expr, pol) in normalized_assertions(q) {
        let approx = eval_bool(&expr, &env);
        let contradiction = match (approx, pol) {
            (BoolApprox::MustFalse, true) | (BoolApprox::MustTrue, false) => true,
            (BoolApprox::Empty, _) => true,
            _ => false,
        };
        if contradiction {
            return SatResult::unsat(format!(
                "'{}' evaluates {} but is asserted {}",
                expr.render(),
                match approx {
                    BoolApprox::MustTrue => "true",
                    BoolApprox::MustFalse => "false",
                    _ => "empty",
                },
                pol
            ));
        }
    }

    // 3. look for a witness over a small grid drawn from the tightened bounds
    if let Some(witness) = search_witness(q, &env, &leaves) {
        return SatResult::sat_with(witness);
    }
    SatResult::unknown("no proof and no witness within the sample grid")
}

/// Exposes the tightened per-symbol intervals, for detectors that want
/// constraint-refined bounds. `None` when the assertions are contradictory.
pub fn tighten(q: &SatQuery) -> Option<BTreeMap<String, Interval>> {
    let mut env = seed_env(q);
    let mut leaves = Vec::new();
    for (expr, pol) in normalized_assertions(q) {
        split_conjuncts(&expr, pol, &mut leaves);
    }
    for _ in 0..TIGHTEN_PASSES {
        let mut changed = false;
        for (expr, pol) in &leaves {
            match tighten_leaf(expr, *pol, &mut env) {
                TightenOutcome::Contradiction(_) => return None,
                TightenOutcome::Changed => changed = true,
                TightenOutcome::Stable => {}
            }
        }
        if !changed {
            break;
        }
    }
    if env.ints.values().any(|iv| iv.is_empty()) {
        return None;
    }
    Some(env.ints)
}

enum TightenOutcome {
    Stable,
    Changed,
    Contradiction(String),
}

fn tighten_leaf(expr: &BoolExpr, polarity: bool, env: &mut Env) -> TightenOutcome {
    match expr {
        BoolExpr::Const(v) => {
            if *v == polarity {
                TightenOutcome::Stable
            } else {
                TightenOutcome::Contradiction("constant assertion".into())
            }
        }
        BoolExpr::Atom(a) => {
            let slot = env.bools.entry(a.name.clone()).or_insert(BoolApprox::Unknown);
            let wanted = BoolApprox::from_bool(polarity);
            let met = slot.meet(wanted);
            if met == BoolApprox::Empty {
                return TightenOutcome::Contradiction(format!("boolean {} pinned both ways", a.name));
            }
            if met != *slot {
                *slot = met;
                TightenOutcome::Changed
            } else {
                TightenOutcome::Stable
            }
        }
        BoolExpr::Cmp(op, lhs, rhs) => {
            let op = if polarity { *op } else { op.negate() };
            match (lhs, rhs) {
                (NumExpr::Atom(a), NumExpr::Const(c)) => tighten_var_const(&a.name, op, c, env),
                (NumExpr::Const(c), NumExpr::Atom(a)) => {
                    tighten_var_const(&a.name, mirror(op), c, env)
                }
                (NumExpr::Atom(a), NumExpr::Atom(b)) => tighten_var_var(&a.name, op, &b.name, env),
                _ => TightenOutcome::Stable,
            }
        }
        // composite shapes are covered by the evaluation pass
        _ => TightenOutcome::Stable,
    }
}

fn mirror(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Gt,
        CmpOp::Le => CmpOp::Ge,
        CmpOp::Gt => CmpOp::Lt,
        CmpOp::Ge => CmpOp::Le,
        other => other,
    }
}

fn half_line(op: CmpOp, c: &BigInt) -> Option<Interval> {
    Some(match op {
        CmpOp::Lt => Interval::range(ExtInt::NegInf, ExtInt::Finite(c - 1)),
        CmpOp::Le => Interval::range(ExtInt::NegInf, ExtInt::Finite(c.clone())),
        CmpOp::Gt => Interval::range(ExtInt::Finite(c + 1), ExtInt::PosInf),
        CmpOp::Ge => Interval::range(ExtInt::Finite(c.clone()), ExtInt::PosInf),
        CmpOp::Eq => Interval::singleton(c.clone()),
        CmpOp::Ne => return None,
    })
}

fn tighten_var_const(name: &str, op: CmpOp, c: &BigInt, env: &mut Env) -> TightenOutcome {
    let Some(current) = env.ints.get(name).cloned() else {
        return TightenOutcome::Stable;
    };
    let new = match half_line(op, c) {
        Some(line) => current.meet(&line),
        None => exclude_endpoint(&current, c),
    };
    if new.is_empty() {
        return TightenOutcome::Contradiction(format!("{name} {} {c}", op.symbol()));
    }
    if new != current {
        env.ints.insert(name.to_string(), new);
        TightenOutcome::Changed
    } else {
        TightenOutcome::Stable
    }
}

/// `v != c` only bites when c sits on a bound of v.
fn exclude_endpoint(iv: &Interval, c: &BigInt) -> Interval {
    let Some((lo, hi)) = iv.bounds() else {
        return iv.clone();
    };
    let cv = ExtInt::Finite(c.clone());
    if *lo == cv && *hi == cv {
        return Interval::Empty;
    }
    if *lo == cv {
        return Interval::range(ExtInt::Finite(c + 1), hi.clone());
    }
    if *hi == cv {
        return Interval::range(lo.clone(), ExtInt::Finite(c - 1));
    }
    iv.clone()
}

fn tighten_var_var(a: &str, op: CmpOp, b: &str, env: &mut Env) -> TightenOutcome {
    let (Some(va), Some(vb)) = (env.ints.get(a).cloned(), env.ints.get(b).cloned()) else {
        return TightenOutcome::Stable;
    };
    let (Some((alo, ahi)), Some((blo, bhi))) = (va.bounds(), vb.bounds()) else {
        return TightenOutcome::Stable;
    };
    let one = BigInt::one();
    let shift = |e: &ExtInt, d: &BigInt| match e {
        ExtInt::Finite(v) => ExtInt::Finite(v + d),
        other => other.clone(),
    };
    let (na, nb) = match op {
        // a < b: a <= bhi-1, b >= alo+1
        CmpOp::Lt => (
            va.meet(&Interval::range(ExtInt::NegInf, shift(bhi, &-&one))),
            vb.meet(&Interval::range(shift(alo, &one), ExtInt::PosInf)),
        ),
        CmpOp::Le => (
            va.meet(&Interval::range(ExtInt::NegInf, bhi.clone())),
            vb.meet(&Interval::range(alo.clone(), ExtInt::PosInf)),
        ),
        CmpOp::Gt => (
            va.meet(&Interval::range(shift(blo, &one), ExtInt::PosInf)),
            vb.meet(&Interval::range(ExtInt::NegInf, shift(ahi, &-&one))),
        ),
        CmpOp::Ge => (
            va.meet(&Interval::range(blo.clone(), ExtInt::PosInf)),
            vb.meet(&Interval::range(ExtInt::NegInf, ahi.clone())),
        ),
        CmpOp::Eq => {
            let met = va.meet(&vb);
            (met.clone(), met)
        }
        CmpOp::Ne => (va.clone(), vb.clone()),
    };
    if na.is_empty() || nb.is_empty() {
        return TightenOutcome::Contradiction(format!("{a} {} {b}", op.symbol()));
    }
    let mut changed = false;
    if na != va {
        env.ints.insert(a.to_string(), na);
        changed = true;
    }
    if nb != vb {
        env.ints.insert(b.to_string(), nb);
        changed = true;
    }
    if changed {
        TightenOutcome::Changed
    } else {
        TightenOutcome::Stable
    }
}

// -- abstract evaluation -------------------------------------------------------

fn eval_num(e: &NumExpr, env: &Env) -> Interval {
    match e {
        NumExpr::Const(v) => Interval::singleton(v.clone()),
        NumExpr::Atom(a) => env
            .ints
            .get(&a.name)
            .cloned()
            .unwrap_or_else(|| if a.unsigned { Interval::unsigned_top() } else { Interval::top() }),
        NumExpr::Bin(op, a, b) => {
            let (iv, _) = arith(*op, &eval_num(a, env), &eval_num(b, env), false);
            iv
        }
        NumExpr::Neg(a) => {
            let (iv, _) = arith(ArithOp::Sub, &Interval::singleton(0), &eval_num(a, env), false);
            iv
        }
    }
}

fn eval_bool(e: &BoolExpr, env: &Env) -> BoolApprox {
    match e {
        BoolExpr::Const(v) => BoolApprox::from_bool(*v),
        BoolExpr::Atom(a) => env.bools.get(&a.name).copied().unwrap_or(BoolApprox::Unknown),
        BoolExpr::Cmp(op, a, b) => compare(*op, &eval_num(a, env), &eval_num(b, env)),
        BoolExpr::Not(a) => eval_bool(a, env).not(),
        BoolExpr::And(a, b) => eval_bool(a, env).and(eval_bool(b, env)),
        BoolExpr::Or(a, b) => eval_bool(a, env).or(eval_bool(b, env)),
    }
}

// -- witness search ------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessValue {
    Int(BigInt),
    Bool(bool),
}

pub type Witness = BTreeMap<String, WitnessValue>;

fn search_witness(q: &SatQuery, env: &Env, leaves: &[(BoolExpr, bool)]) -> Option<Witness> {
    let int_names: Vec<&String> = env.ints.keys().collect();
    let bool_names: Vec<&String> = env.bools.keys().collect();

    let mut int_candidates: Vec<Vec<BigInt>> = Vec::new();
    for name in &int_names {
        let iv = &env.ints[*name];
        let mut cands: Vec<BigInt> = Vec::new();
        if let Some((lo, hi)) = iv.bounds() {
            if let ExtInt::Finite(v) = lo {
                cands.push(v.clone());
                let next = v + 1;
                if iv.contains(&next) {
                    cands.push(next);
                }
            }
            if let ExtInt::Finite(v) = hi {
                cands.push(v.clone());
            }
            for probe in [BigInt::zero(), BigInt::one()] {
                if iv.contains(&probe) {
                    cands.push(probe);
                }
            }
            if cands.is_empty() {
                cands.push(BigInt::zero());
            }
        }
        cands.dedup();
        cands.sort();
        cands.dedup();
        int_candidates.push(cands);
    }
    let mut bool_candidates: Vec<Vec<bool>> = Vec::new();
    for name in &bool_names {
        let cands = match env.bools[*name] {
            BoolApprox::MustTrue => vec![true],
            BoolApprox::MustFalse => vec![false],
            _ => vec![true, false],
        };
        bool_candidates.push(cands);
    }

    let total: usize = int_candidates
        .iter()
        .map(|c| c.len().max(1))
        .chain(bool_candidates.iter().map(|c| c.len()))
        .product();
    if total > WITNESS_CAP {
        return None;
    }

    let mut assignment: Witness = BTreeMap::new();
    try_assign(
        0,
        &int_names,
        &int_candidates,
        &bool_names,
        &bool_candidates,
        &mut assignment,
        leaves,
        q,
    )
}

#[allow(clippy::too_many_arguments)]
fn try_assign(
    idx: usize,
    int_names: &[&String],
    int_candidates: &[Vec<BigInt>],
    bool_names: &[&String],
    bool_candidates: &[Vec<bool>],
    assignment: &mut Witness,
    leaves: &[(BoolExpr, bool)],
    q: &SatQuery,
) -> Option<Witness> {
    if idx < int_names.len() {
        for cand in &int_candidates[idx] {
            assignment.insert(int_names[idx].clone(), WitnessValue::Int(cand.clone()));
            if let Some(w) = try_assign(
                idx + 1,
                int_names,
                int_candidates,
                bool_names,
                bool_candidates,
                assignment,
                leaves,
                q,
            ) {
                return Some(w);
            }
        }
        assignment.remove(int_names[idx]);
        return None;
    }
    let bidx = idx - int_names.len();
    if bidx < bool_names.len() {
        for cand in &bool_candidates[bidx] {
            assignment.insert(bool_names[bidx].clone(), WitnessValue::Bool(*cand));
            if let Some(w) = try_assign(
                idx + 1,
                int_names,
                int_candidates,
                bool_names,
                bool_candidates,
                assignment,
                leaves,
                q,
            ) {
                return Some(w);
            }
        }
        assignment.remove(bool_names[bidx]);
        return None;
    }
    let _ = leaves;
    if witness_satisfies(q, assignment) == Some(true) {
        Some(assignment.clone())
    } else {
        None
    }
}

/// Concrete check of every assertion under an assignment; `None` when
/// evaluation hits division by zero.
pub fn witness_satisfies(q: &SatQuery, w: &Witness) -> Option<bool> {
    for (sym, pol) in &q.asserts {
        let expr = q.defs.iter().find(|(s, _)| s == sym).map(|(_, e)| e)?;
        match concrete_bool(expr, w) {
            Some(v) if v == *pol => {}
            Some(_) => return Some(false),
            None => return None,
        }
    }
    Some(true)
}

pub fn concrete_num(e: &NumExpr, w: &Witness) -> Option<BigInt> {
    match e {
        NumExpr::Const(v) => Some(v.clone()),
        NumExpr::Atom(a) => match w.get(&a.name) {
            Some(WitnessValue::Int(v)) => Some(v.clone()),
            _ => None,
        },
        NumExpr::Bin(op, a, b) => {
            let x = concrete_num(a, w)?;
            let y = concrete_num(b, w)?;
            Some(match op {
                ArithOp::Add => x + y,
                ArithOp::Sub => x - y,
                ArithOp::Mul => x * y,
                ArithOp::Div => {
                    if y.is_zero() {
                        return None;
                    }
                    x / y
                }
                ArithOp::Mod => {
                    if y.is_zero() {
                        return None;
                    }
                    // BigInt's % truncates toward zero, matching the source semantics
                    x % y
                }
            })
        }
        NumExpr::Neg(a) => Some(-concrete_num(a, w)?),
    }
}

pub fn concrete_bool(e: &BoolExpr, w: &Witness) -> Option<bool> {
    match e {
        BoolExpr::Const(v) => Some(*v),
        BoolExpr::Atom(a) => match w.get(&a.name) {
            Some(WitnessValue::Bool(v)) => Some(*v),
            _ => None,
        },
        BoolExpr::Cmp(op, a, b) => {
            let x = concrete_num(a, w)?;
            let y = concrete_num(b, w)?;
            Some(match op {
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Gt => x > y,
                CmpOp::Ge => x >= y,
                CmpOp::Eq => x == y,
                CmpOp::Ne => x != y,
            })
        }
        BoolExpr::Not(a) => Some(!concrete_bool(a, w)?),
        BoolExpr::And(a, b) => Some(concrete_bool(a, w)? && concrete_bool(b, w)?),
        BoolExpr::Or(a, b) => Some(concrete_bool(a, w)? || concrete_bool(b, w)?),
    }
}

impl SatResult {
    pub fn sat_with(witness: Witness) -> SatResult {
        SatResult {
            verdict: SatVerdict::Sat,
            diagnostic: String::new(),
            witness: Some(witness),
        }
    }

    pub fn unsat(diagnostic: impl Into<String>) -> SatResult {
        SatResult {
            verdict: SatVerdict::Unsat,
            diagnostic: diagnostic.into(),
            witness: None,
        }
    }

    pub fn unknown(diagnostic: impl Into<String>) -> SatResult {
        SatResult {
            verdict: SatVerdict::Unknown,
            diagnostic: diagnostic.into(),
            witness: None,
        }
    }

    pub fn sat() -> SatResult {
        SatResult {
            verdict: SatVerdict::Sat,
            diagnostic: String::new(),
            witness: None,
        }
    }
}
