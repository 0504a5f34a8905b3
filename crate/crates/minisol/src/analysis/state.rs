//! Per-node analysis information: the variable map, the active constraint
//! set, recorded definitions and assignment version counters.

use std::collections::BTreeMap;

use crate::analysis::constraint::Constraint;
use crate::analysis::expr::Definition;
use crate::domain::{default_for, AbstractValue, DomainError, Origin};
use crate::ir::FunctionIr;

/// Analysis information at one program point.
///
/// `versions` counts assignments per base name. It is merged by maximum and
/// deliberately ignored by the stabilization comparison: a higher count can
/// only make constraint atoms look staler, which weakens solver bindings
/// and stays sound.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AbstractState {
    pub values: BTreeMap<String, AbstractValue>,
    pub constraints: BTreeMap<(String, bool), Constraint>,
    pub defs: BTreeMap<String, Definition>,
    pub versions: BTreeMap<String, u32>,
}

impl AbstractState {
    /// The extremal value: parameters, state variables and builtins at
    /// their origin defaults, locals and temporaries at bottom.
    pub fn entry_for(ir: &FunctionIr) -> AbstractState {
        let mut values = BTreeMap::new();
        for (name, info) in &ir.vars {
            let v = match info.origin {
                Origin::Parameter | Origin::State | Origin::Builtin => {
                    default_for(&info.ty, info.origin)
                }
                Origin::Local | Origin::Temporary => AbstractValue::bottom_for(&info.ty),
            };
            values.insert(name.clone(), v);
        }
        AbstractState {
            values,
            ..Default::default()
        }
    }

    /// All-defaults variable map used to seed loop-head entries: the state
    /// assumed to arrive over a back edge before the loop body has been
    /// processed.
    pub fn loop_seed_values(ir: &FunctionIr) -> BTreeMap<String, AbstractValue> {
        ir.vars
            .iter()
            .map(|(name, info)| (name.clone(), default_for(&info.ty, info.origin)))
            .collect()
    }

    pub fn version_of(&self, name: &str) -> u32 {
        self.versions.get(name).copied().unwrap_or(0)
    }

    pub fn bump_version(&mut self, name: &str) -> u32 {
        let v = self.versions.entry(name.to_string()).or_insert(0);
        *v += 1;
        *v
    }

    pub fn value(&self, name: &str) -> Option<&AbstractValue> {
        self.values.get(name)
    }

    /// Pointwise order on values plus syntactic constraint-superset (more
    /// constraints means lower).
    pub fn leq(&self, other: &AbstractState) -> bool {
        for (name, v) in &self.values {
            match other.values.get(name) {
                Some(w) => {
                    if !v.leq(w) {
                        return false;
                    }
                }
                None => {
                    if !v.is_bottom() {
                        return false;
                    }
                }
            }
        }
        other
            .constraints
            .keys()
            .all(|k| self.constraints.contains_key(k))
    }

    /// Merges one incoming contribution. `widen` applies the jump-to-infinity
    /// operator on values (loop heads, back-edge contributions only).
    /// Returns true when the stored state changed in a way that must
    /// re-propagate.
    pub fn merge_contribution(
        &mut self,
        contrib: &AbstractState,
        widen: bool,
    ) -> Result<bool, DomainError> {
        let mut changed = false;

        // values: pointwise join over the union of keys
        for (name, incoming) in &contrib.values {
            match self.values.get(name) {
                Some(old) => {
                    let joined = old.join(incoming)?;
                    let new = if widen { old.widen(&joined)? } else { joined };
                    if new != *old {
                        self.values.insert(name.clone(), new);
                        changed = true;
                    }
                }
                None => {
                    self.values.insert(name.clone(), incoming.clone());
                    changed = true;
                }
            }
        }

        // constraints: intersection over (symbol, polarity) keys
        let keys: Vec<(String, bool)> = self.constraints.keys().cloned().collect();
        for key in keys {
            match contrib.constraints.get(&key) {
                Some(theirs) => {
                    let ours = self.constraints.get_mut(&key).expect("key present");
                    if ours.expr.eq_modulo_versions(&theirs.expr) {
                        ours.expr.merge_versions(&theirs.expr);
                        ours.display.merge_versions(&theirs.display);
                        ours.symbol_version = ours.symbol_version.max(theirs.symbol_version);
                    }
                }
                None => {
                    self.constraints.remove(&key);
                    changed = true;
                }
            }
        }

        // definitions: keep only those present and equal on both sides
        let def_keys: Vec<String> = self.defs.keys().cloned().collect();
        for key in def_keys {
            let keep = match contrib.defs.get(&key) {
                Some(theirs) => {
                    let ours = self.defs.get_mut(&key).expect("key present");
                    if ours.eq_modulo_versions(theirs) {
                        ours.merge_versions(theirs);
                        true
                    } else {
                        false
                    }
                }
                None => false,
            };
            if !keep {
                self.defs.remove(&key);
                changed = true;
            }
        }

        // version counters merge silently
        for (name, v) in &contrib.versions {
            let slot = self.versions.entry(name.clone()).or_insert(0);
            *slot = (*slot).max(*v);
        }

        Ok(changed)
    }
}

/// Join of several analysis states, as used at control-flow merges: values
/// join pointwise (`widen` swaps in the widening operator), constraints
/// intersect when more than one input arrives, a single input propagates
/// unchanged.
pub fn join_states(inputs: &[AbstractState], widen: bool) -> Result<AbstractState, DomainError> {
    let mut it = inputs.iter();
    let mut acc = it.next().cloned().unwrap_or_default();
    for next in it {
        acc.merge_contribution(next, widen)?;
    }
    Ok(acc)
}
