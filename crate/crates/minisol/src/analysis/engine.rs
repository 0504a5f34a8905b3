//! Worklist fixpoint solver.
//!
//! Forward analysis seeded at the extremal labels. The worklist is ordered
//! by label, which for the structured CFGs produced by lowering is a
//! topological order away from back edges: loop-free functions converge in
//! exactly one processing per node.
//!
//! Loop heads are handled pessimistically: when a head's entry state is
//! first formed, every variable is pre-joined with its type default — the
//! state assumed to arrive over the not-yet-processed back edge. Back-edge
//! contributions additionally go through the widening operator, which
//! guarantees stabilization even for loops the seed does not cover.

use std::collections::{BTreeMap, BTreeSet};

use crate::analysis::state::AbstractState;
use crate::analysis::transfer::{edge_apply, transfer};
use crate::analysis::AnalysisError;
use crate::cfg::{Cfg, EdgeKind};
use crate::domain::Origin;
use crate::ir::{FunctionIr, InstrKind, Label};

/// Hard cap on node re-processing, as a multiple of the label count.
pub const BUDGET_FACTOR: u32 = 16;

/// Base names assigned inside some loop body. Their definitions are not
/// recorded: an equation like `value = old_value * 2` stops describing the
/// variable after one more iteration.
pub fn loop_assigned_names(ir: &FunctionIr, cfg: &Cfg) -> BTreeSet<String> {
    let mut members: BTreeSet<Label> = BTreeSet::new();
    for (tail, head) in cfg.marked_back_edges() {
        members.extend(cfg.loop_members(tail, head));
    }
    let mut out = BTreeSet::new();
    for &label in &members {
        for instr in &ir.node(label).instrs {
            match &instr.kind {
                InstrKind::Assign { dst, .. }
                | InstrKind::Declare { dst }
                | InstrKind::BinOp { dst, .. }
                | InstrKind::UnOp { dst, .. } => {
                    if ir.vars[dst].origin != Origin::Temporary {
                        out.insert(dst.clone());
                    }
                }
                InstrKind::IndexWrite { cell, .. } | InstrKind::MemberWrite { cell, .. } => {
                    out.insert(cell.canonical.clone());
                }
                _ => {}
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Fixpoint state at each node's entry.
    pub entries: BTreeMap<Label, AbstractState>,
    /// Fixpoint state after each node's transfer.
    pub outs: BTreeMap<Label, AbstractState>,
    pub processing_counts: BTreeMap<Label, u32>,
    pub total_processings: u32,
}

pub fn worklist_solve(ir: &FunctionIr, cfg: &Cfg) -> Result<SolveResult, AnalysisError> {
    let label_count = cfg.labels().len() as u32;
    let budget = label_count * BUDGET_FACTOR;
    let seed_values = AbstractState::loop_seed_values(ir);
    let no_def = loop_assigned_names(ir, cfg);

    let mut entries: BTreeMap<Label, AbstractState> = BTreeMap::new();
    let mut outs: BTreeMap<Label, AbstractState> = BTreeMap::new();
    let mut counts: BTreeMap<Label, u32> = BTreeMap::new();
    let mut total = 0u32;
    let mut work: BTreeSet<Label> = BTreeSet::new();

    for &l in cfg.extremal_labels() {
        let mut entry = AbstractState::entry_for(ir);
        if cfg.is_loop_head(l) {
            overlay_seed(&mut entry, &seed_values)?;
        }
        entries.insert(l, entry);
        work.insert(l);
    }

    while let Some(label) = work.pop_first() {
        total += 1;
        *counts.entry(label).or_insert(0) += 1;
        if total > budget {
            return Err(AnalysisError::IterationBudgetExceeded {
                labels: label_count,
                budget,
            });
        }

        let entry = entries.get(&label).expect("queued node has an entry");
        let out = transfer(ir.node(label), entry, ir, &no_def)?;

        for &(target, kind) in cfg.successors(label).iter().collect::<Vec<_>>() {
            let contrib = edge_apply((label, target, kind), &out, ir, cfg);
            let changed = match entries.get_mut(&target) {
                Some(existing) => {
                    existing.merge_contribution(&contrib, kind == EdgeKind::Back)?
                }
                None => {
                    let mut fresh = contrib;
                    if cfg.is_loop_head(target) {
                        overlay_seed(&mut fresh, &seed_values)?;
                    }
                    entries.insert(target, fresh);
                    true
                }
            };
            if changed {
                work.insert(target);
            }
        }
        outs.insert(label, out);
    }

    Ok(SolveResult {
        entries,
        outs,
        processing_counts: counts,
        total_processings: total,
    })
}

fn overlay_seed(
    state: &mut AbstractState,
    seed: &BTreeMap<String, crate::domain::AbstractValue>,
) -> Result<(), AnalysisError> {
    for (name, default) in seed {
        let v = match state.values.get(name) {
            Some(existing) => existing.join(default)?,
            None => default.clone(),
        };
        state.values.insert(name.clone(), v);
    }
    Ok(())
}
