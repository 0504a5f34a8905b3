//! Path constraints: asserted truth values of boolean temporaries.

use crate::analysis::expr::BoolExpr;
use crate::ir::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConstraintOrigin {
    Require,
    Assert,
    BranchTrue,
    BranchFalse,
    LoopInvariant,
}

/// One active constraint. The defining expression is a snapshot taken at
/// imposition time over version-pinned atoms; it is never rewritten when
/// the underlying variables are reassigned.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Base name of the boolean symbol, e.g. `TMP_3`.
    pub symbol: String,
    /// Version of the symbol at imposition.
    pub symbol_version: u32,
    /// Asserted truth value.
    pub polarity: bool,
    /// Fully inlined defining expression over input atoms (solver view).
    pub expr: BoolExpr,
    /// Defining expression with source-level variable names kept.
    pub display: BoolExpr,
    /// Source spelling of the defining expression.
    pub text: String,
    pub origin: ConstraintOrigin,
    pub imposing_edge: (Label, Label),
}

impl Constraint {
    /// The serialized pair, e.g. `('TMP_3', True)`.
    pub fn serialized(&self) -> String {
        format!(
            "('{}', {})",
            self.symbol,
            if self.polarity { "True" } else { "False" }
        )
    }

    /// Human text with the polarity folded in: `x<15`, `index%2!=0`.
    pub fn display_text(&self) -> String {
        self.display.render_with_polarity(self.polarity)
    }

    pub fn key(&self) -> (String, bool) {
        (self.symbol.clone(), self.polarity)
    }

    /// Stability comparison across worklist passes.
    pub fn eq_modulo_versions(&self, other: &Constraint) -> bool {
        self.symbol == other.symbol
            && self.polarity == other.polarity
            && self.origin == other.origin
            && self.imposing_edge == other.imposing_edge
            && self.expr.eq_modulo_versions(&other.expr)
            && self.display.eq_modulo_versions(&other.display)
    }
}
