//! Acceptance suite. Each test checks one gate criterion end to end on the
//! corpus and prints a single PASS line with its runtime; run with
//! `cargo test -p minisol --test acceptance -- --nocapture` to see them.

mod brute;
mod interp;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_bigint::BigInt;

use minisol::analysis::AbstractState;
use minisol::ast::MiniSolType;
use minisol::domain::{AbstractValue, ExtInt, Interval, Origin};
use minisol::pipeline::{analyze_file, AnalysisOptions, AnalysisOutcome};
use minisol::report::{render_node_state, FindingKind};
use minisol::solver::{encode_state, Reachability, SatVerdict};

use interp::CValue;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .and_then(|p| p.parent())
        .expect("workspace root")
        .join("corpus")
        .join(name)
}

/// External SMT command: taken from MINISOL_SMT_CMD, else z3 when present
/// on PATH, else none (the builtin backend carries the verdicts alone).
fn external_cmd() -> Option<String> {
    if let Ok(cmd) = std::env::var("MINISOL_SMT_CMD") {
        if !cmd.trim().is_empty() {
            return Some(cmd);
        }
    }
    let probe = std::process::Command::new("z3")
        .arg("-version")
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .status();
    match probe {
        Ok(s) if s.success() => Some("z3 -in".to_string()),
        _ => None,
    }
}

fn analyze(file: &str, contract: &str, function: &str) -> AnalysisOutcome {
    let options = AnalysisOptions {
        solver_command: external_cmd(),
        ..AnalysisOptions::default()
    };
    analyze_file(&corpus(file), contract, function, &options)
        .unwrap_or_else(|e| panic!("{contract}.{function}: {e}"))
}

const ALL_FUNCTIONS: &[(&str, &str, &str)] = &[
    ("magic_number.sol", "MagicNumber", "magicNumber"),
    ("bid_contract.sol", "BidContract", "bid"),
    ("deposit_contract.sol", "DepositContract", "deposit"),
    ("deposit_contract.sol", "DepositContract", "withdraw"),
    ("divide_by_zero_minimal.sol", "DivideByZeroMinimal", "divide"),
    ("division_by_zero_array.sol", "DivisionByZeroArray", "getSomeResult"),
    ("improper_data_validation.sol", "ImproperDataValidation", "participate"),
    ("out_of_bounds_array_minimal.sol", "OutOfBoundsArrayMinimal", "getArrayElement"),
    ("guarded_division.sol", "GuardedDivision", "divide"),
    ("guarded_array.sol", "GuardedArray", "getArrayElement"),
    ("while_true_stress.sol", "WhileTrueStress", "run"),
    ("two_loops.sol", "TwoLoops", "run"),
    ("version_pinning.sol", "VersionPinning", "shift"),
    ("both_revert.sol", "BothRevert", "pick"),
    ("unreachable_require.sol", "UnreachableRequire", "clamp"),
    ("struct_entry.sol", "StructEntry", "bump"),
    ("for_loop.sol", "ForLoop", "sum"),
];

fn interval_of(state: &AbstractState, name: &str) -> Interval {
    match state.value(name) {
        Some(AbstractValue::Num(iv)) => iv.clone(),
        other => panic!("{name}: expected numeric, got {other:?}"),
    }
}

fn constraint_texts(state: &AbstractState) -> BTreeSet<String> {
    state.constraints.values().map(|c| c.display_text()).collect()
}

#[test]
fn criterion_1_table_reproduction() {
    let start = Instant::now();
    let outcome = analyze("magic_number.sol", "MagicNumber", "magicNumber");
    let entries = &outcome.solve.entries;
    let utop = Interval::unsigned_top();
    let zero = Interval::of(0, 0);
    let bot = Interval::Empty;

    // statements 1..=7: intervals and constraint sets exactly
    let exact: &[(u32, &Interval, &Interval, &Interval, &[&str])] = &[
        (1, &utop, &bot, &bot, &[]),
        (2, &utop, &zero, &bot, &[]),
        (3, &utop, &zero, &utop, &[]),
        (4, &utop, &utop, &utop, &["x<15"]),
        (5, &utop, &utop, &utop, &["x<15", "index<x"]),
        (6, &utop, &utop, &utop, &["x<15", "index<x", "index%2==0"]),
        (7, &utop, &utop, &utop, &["x<15", "index<x", "index%2!=0"]),
    ];
    for (label, x, index, value, cons) in exact {
        let st = &entries[label];
        assert_eq!(&interval_of(st, "x"), *x, "x at statement {label}");
        assert_eq!(&interval_of(st, "index"), *index, "index at statement {label}");
        assert_eq!(&interval_of(st, "value"), *value, "value at statement {label}");
        let expected: BTreeSet<String> = cons.iter().map(|s| s.to_string()).collect();
        assert_eq!(constraint_texts(st), expected, "constraints at statement {label}");
    }
    // statements 8-9: intervals exact; constraints contain x<15 and may
    // additionally carry the loop condition
    for label in [8u32, 9] {
        let st = &entries[&label];
        for name in ["x", "index", "value"] {
            assert_eq!(interval_of(st, name), utop, "{name} at statement {label}");
        }
        let texts = constraint_texts(st);
        assert!(texts.contains("x<15"), "statement {label}: {texts:?}");
        let allowed: BTreeSet<String> =
            ["x<15".to_string(), "index<x".to_string()].into_iter().collect();
        assert!(
            texts.is_subset(&allowed),
            "statement {label} carries unexpected constraints: {texts:?}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("criterion 1 (state table reproduction): PASS in {elapsed:?}");
}

#[test]
fn criterion_2_state_output_reproduction() {
    let start = Instant::now();
    let outcome = analyze("deposit_contract.sol", "DepositContract", "withdraw");
    let node = outcome
        .report
        .nodes
        .iter()
        .find(|n| n.label == 3)
        .expect("assert node");
    let rendered = render_node_state(node);
    for entry in [
        "msg.value uint (1,inf)",
        "msg.sender uint (1,inf)",
        "block.timestamp uint (1,inf)",
        "block.number uint (1,inf)",
        "block.difficulty uint (1,inf)",
        "TMP_3 bool deposits[msg.sender] > 0 assert/require",
        "Constraints: [('TMP_3', True)]",
    ] {
        assert!(rendered.contains(entry), "missing {entry:?} in:\n{rendered}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("criterion 2 (node state output reproduction): PASS in {elapsed:?}");
}

#[test]
fn criterion_3_detections() {
    let start = Instant::now();
    let external = external_cmd();

    // BidContract.bid: the else/revert branch is dead, nothing else
    let bid = analyze("bid_contract.sol", "BidContract", "bid");
    let kinds: Vec<(FindingKind, u32)> =
        bid.report.findings.iter().map(|f| (f.kind, f.label)).collect();
    assert_eq!(kinds, vec![(FindingKind::UnreachableCode, 5)], "{:?}", bid.report.findings);

    // DepositContract.withdraw: the end point is dead (locked funds)
    let withdraw = analyze("deposit_contract.sol", "DepositContract", "withdraw");
    let kinds: Vec<(FindingKind, u32)> =
        withdraw.report.findings.iter().map(|f| (f.kind, f.label)).collect();
    assert_eq!(kinds, vec![(FindingKind::UnreachableCode, 4)], "{:?}", withdraw.report.findings);
    // ... and deposit itself is clean
    let deposit = analyze("deposit_contract.sol", "DepositContract", "deposit");
    assert!(deposit.report.findings.is_empty(), "{:?}", deposit.report.findings);

    // both division corpora warn exactly once
    for (file, contract, function) in [
        ("divide_by_zero_minimal.sol", "DivideByZeroMinimal", "divide"),
        ("division_by_zero_array.sol", "DivisionByZeroArray", "getSomeResult"),
    ] {
        let o = analyze(file, contract, function);
        let kinds: Vec<FindingKind> = o.report.findings.iter().map(|f| f.kind).collect();
        assert_eq!(
            kinds,
            vec![FindingKind::DivisionByZeroPossible],
            "{contract}.{function}: {:?}",
            o.report.findings
        );
    }

    // missing validation stays report-only: the parameter shows its default
    let participate = analyze("improper_data_validation.sol", "ImproperDataValidation", "participate");
    assert!(participate.report.findings.is_empty(), "{:?}", participate.report.findings);
    let entry_node = &participate.report.nodes[0];
    assert!(
        entry_node
            .numeric
            .iter()
            .any(|e| e.name == "amount" && e.ty == "uint" && e.value == "(0,inf)"),
        "{:?}",
        entry_node.numeric
    );

    let oob = analyze("out_of_bounds_array_minimal.sol", "OutOfBoundsArrayMinimal", "getArrayElement");
    let kinds: Vec<FindingKind> = oob.report.findings.iter().map(|f| f.kind).collect();
    assert_eq!(kinds, vec![FindingKind::ArrayIndexOutOfBoundsPossible], "{:?}", oob.report.findings);

    // guarded variants must stay silent (zero false findings)
    for (file, contract, function) in [
        ("guarded_division.sol", "GuardedDivision", "divide"),
        ("guarded_array.sol", "GuardedArray", "getArrayElement"),
    ] {
        let o = analyze(file, contract, function);
        assert!(o.report.findings.is_empty(), "{contract}.{function}: {:?}", o.report.findings);
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    let backend_note = match &external {
        Some(cmd) => format!("external backend '{cmd}'"),
        None => "builtin backend only (no external solver found)".to_string(),
    };
    println!("criterion 3 (defect detections, {backend_note}): PASS in {elapsed:?}");
}

fn value_range(ty: &MiniSolType, origin: Origin) -> Vec<CValue> {
    match ty {
        MiniSolType::Bool => vec![CValue::Bool(false), CValue::Bool(true)],
        _ if origin == Origin::Builtin => {
            (1..=7).map(|v| CValue::Int(BigInt::from(v))).collect()
        }
        _ => (0..=7).map(|v| CValue::Int(BigInt::from(v))).collect(),
    }
}

#[test]
fn criterion_4_soundness_oracle() {
    let start = Instant::now();
    let mut functions_checked = 0;
    let mut runs = 0u64;
    let mut checks = 0u64;

    for (file, contract, function) in ALL_FUNCTIONS {
        let outcome = analyze(file, contract, function);
        if !outcome.cfg.marked_back_edges().is_empty() {
            continue; // the oracle enumerates loop-free functions only
        }
        functions_checked += 1;
        let ir = &outcome.ir;

        let slots = interp::input_slots(ir);
        let ranges: Vec<Vec<CValue>> = slots
            .iter()
            .map(|(_, ty, origin)| value_range(ty, *origin))
            .collect();
        let mut odometer = vec![0usize; slots.len()];
        loop {
            let inputs: interp::Inputs = slots
                .iter()
                .zip(&odometer)
                .map(|((name, _, _), &i)| (name.clone(), ranges_at(&ranges, name, &slots, i)))
                .collect();
            runs += 1;
            let trace = interp::run(ir, &outcome.cfg, &inputs);

            for (label, snap) in &trace.visits {
                let entry = outcome.solve.entries.get(label).unwrap_or_else(|| {
                    panic!("{function}: node {label} executed concretely but never analyzed")
                });
                // (b) an executed statement is never classified unreachable
                let verdict = outcome.verdicts[label].reachability;
                assert_ne!(
                    verdict,
                    Reachability::Unreachable,
                    "{function}: node {label} executed with {inputs:?} but classified unreachable"
                );
                // (a) every concrete value sits inside its interval
                for (name, cv) in &snap.vars {
                    let Some(av) = entry.value(name) else { continue };
                    checks += 1;
                    let ok = match (av, cv) {
                        (AbstractValue::Num(iv), CValue::Int(v)) => iv.contains(v),
                        (AbstractValue::Boolean(b), CValue::Bool(v)) => b.contains(*v),
                        (AbstractValue::Comp(_), _) => true,
                        _ => false,
                    };
                    assert!(
                        ok,
                        "{function}: node {label}, {name}={cv:?} outside {av} (inputs {inputs:?})"
                    );
                }
                for (canonical, cv) in &snap.cells {
                    let Some(cell) = ir.cells.get(canonical) else { continue };
                    checks += 1;
                    let av = minisol::analysis::read_cell(cell, entry, ir);
                    let ok = match (&av, cv) {
                        (AbstractValue::Num(iv), CValue::Int(v)) => iv.contains(v),
                        (AbstractValue::Boolean(b), CValue::Bool(v)) => b.contains(*v),
                        _ => true,
                    };
                    assert!(
                        ok,
                        "{function}: node {label}, cell {canonical}={cv:?} outside {av} (inputs {inputs:?})"
                    );
                }
            }

            // advance the odometer
            let mut i = 0;
            loop {
                if i == odometer.len() {
                    break;
                }
                odometer[i] += 1;
                if odometer[i] < ranges[i].len() {
                    break;
                }
                odometer[i] = 0;
                i += 1;
            }
            if i == odometer.len() {
                break;
            }
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    assert!(functions_checked >= 10, "only {functions_checked} loop-free functions");
    println!(
        "criterion 4 (soundness oracle, {functions_checked} functions, {runs} runs, {checks} containment checks): PASS in {elapsed:?}"
    );
}

fn ranges_at(
    ranges: &[Vec<CValue>],
    name: &str,
    slots: &[(String, MiniSolType, Origin)],
    idx: usize,
) -> CValue {
    let pos = slots.iter().position(|(n, _, _)| n == name).unwrap();
    ranges[pos][idx].clone()
}

/// Deterministic pseudo-random intervals for the lattice law checks.
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        // xorshift64
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    fn interval(&mut self) -> Interval {
        match self.next() % 10 {
            0 => Interval::Empty,
            1 => Interval::top(),
            2 => Interval::range(ExtInt::finite(self.small()), ExtInt::PosInf),
            3 => Interval::range(ExtInt::NegInf, ExtInt::finite(self.small())),
            _ => {
                let a = self.small();
                let b = self.small();
                Interval::of(a.min(b), a.max(b))
            }
        }
    }

    fn small(&mut self) -> i64 {
        (self.next() % 101) as i64 - 50
    }
}

#[test]
fn criterion_5_lattice_and_widening_laws() {
    let start = Instant::now();
    let mut rng = Rng(0x5eed_cafe_f00d_1234);
    for case in 0..1000 {
        let a = rng.interval();
        let b = rng.interval();
        let c = rng.interval();

        // partial order laws
        assert!(a.leq(&a), "case {case}: reflexivity");
        if a.leq(&b) && b.leq(&a) {
            assert_eq!(a, b, "case {case}: antisymmetry");
        }
        if a.leq(&b) && b.leq(&c) {
            assert!(a.leq(&c), "case {case}: transitivity");
        }

        // join is the least upper bound
        let j = a.join(&b);
        assert!(a.leq(&j) && b.leq(&j), "case {case}: join covers");
        if a.leq(&c) && b.leq(&c) {
            assert!(j.leq(&c), "case {case}: join is least");
        }

        // widening covers both operands
        let w = a.widen(&b);
        assert!(a.leq(&w) && b.leq(&w), "case {case}: widen covers");

        // widening chains stabilize: at most 4 distinct values ever appear
        // (empty, the first operand, one lower jump, one upper jump)
        let mut chain = Interval::Empty;
        let mut changes = 0;
        for _ in 0..12 {
            let next = chain.widen(&rng.interval());
            if next != chain {
                changes += 1;
            }
            chain = next;
        }
        assert!(changes <= 4, "case {case}: widening chain changed {changes} times");
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!("criterion 5 (lattice and widening laws, 1000 cases): PASS in {elapsed:?}");
}

#[test]
fn criterion_6_termination_bound() {
    let start = Instant::now();
    for (file, contract, function) in ALL_FUNCTIONS {
        let outcome = analyze(file, contract, function);
        let labels = outcome.cfg.labels().len() as u32;
        let total = outcome.solve.total_processings;
        assert!(
            total <= labels * minisol::analysis::BUDGET_FACTOR,
            "{contract}.{function}: {total} processings over {labels} labels"
        );
        for (label, count) in &outcome.solve.processing_counts {
            assert!(
                *count <= minisol::analysis::BUDGET_FACTOR,
                "{contract}.{function}: node {label} processed {count} times"
            );
        }
        if outcome.cfg.marked_back_edges().is_empty() {
            assert_eq!(
                total, labels,
                "{contract}.{function}: loop-free but {total} != {labels}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("criterion 6 (termination bounds on all corpus functions): PASS in {elapsed:?}");
}

#[test]
fn criterion_7_backend_agreement() {
    let start = Instant::now();
    let external = external_cmd().and_then(|cmd| {
        minisol::solver::ExternalSmtSolver::from_command(&cmd, Duration::from_secs(5))
    });

    let mut queries = 0;
    let mut definitive = 0;
    let mut unsat_confirmed = 0;
    for (file, contract, function) in ALL_FUNCTIONS {
        let outcome = analyze(file, contract, function);
        for state in outcome.solve.entries.values() {
            let q = encode_state(state, &outcome.ir).expect("encodable corpus state");
            queries += 1;
            let r = minisol::solver::decide_builtin(&q);
            match r.verdict {
                SatVerdict::Sat => {
                    definitive += 1;
                    let w = r.witness.expect("builtin Sat carries a witness");
                    assert_eq!(
                        minisol::solver::builtin::witness_satisfies(&q, &w),
                        Some(true),
                        "{contract}.{function}: witness fails its own assertions"
                    );
                    if let Some(ext) = &external {
                        use minisol::solver::SolverBackend;
                        let ev = ext.decide(&q).verdict;
                        assert_ne!(ev, SatVerdict::Unsat, "{contract}.{function}: builtin Sat vs external unsat");
                    }
                }
                SatVerdict::Unsat => {
                    definitive += 1;
                    assert!(
                        brute::find_model(&q).is_none(),
                        "{contract}.{function}: builtin Unsat refuted by enumeration"
                    );
                    unsat_confirmed += 1;
                    if let Some(ext) = &external {
                        use minisol::solver::SolverBackend;
                        let ev = ext.decide(&q).verdict;
                        assert_ne!(ev, SatVerdict::Sat, "{contract}.{function}: builtin Unsat vs external sat");
                    }
                }
                SatVerdict::Unknown => {}
            }
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    assert!(unsat_confirmed >= 3, "expected several Unsat nodes, got {unsat_confirmed}");
    let note = if external.is_some() { "with external solver" } else { "builtin + enumeration" };
    println!(
        "criterion 7 (backend agreement, {definitive}/{queries} definitive, {unsat_confirmed} Unsat confirmed, {note}): PASS in {elapsed:?}"
    );
}
