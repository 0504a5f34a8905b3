//! Three-valued boolean approximation with a bottom element.

use std::fmt;

/// Abstraction of a boolean: definitely false, definitely true, either,
/// or no value at all (bottom, "not yet assigned").
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoolApprox {
    Empty,
    MustFalse,
    MustTrue,
    Unknown,
}

impl BoolApprox {
    pub fn from_bool(b: bool) -> BoolApprox {
        if b {
            BoolApprox::MustTrue
        } else {
            BoolApprox::MustFalse
        }
    }

    pub fn contains(&self, b: bool) -> bool {
        match self {
            BoolApprox::Empty => false,
            BoolApprox::Unknown => true,
            BoolApprox::MustTrue => b,
            BoolApprox::MustFalse => !b,
        }
    }

    pub fn join(self, other: BoolApprox) -> BoolApprox {
        use BoolApprox::*;
        match (self, other) {
            (Empty, x) | (x, Empty) => x,
            (a, b) if a == b => a,
            _ => Unknown,
        }
    }

    pub fn meet(self, other: BoolApprox) -> BoolApprox {
        use BoolApprox::*;
        match (self, other) {
            (Empty, _) | (_, Empty) => Empty,
            (Unknown, x) | (x, Unknown) => x,
            (a, b) if a == b => a,
            _ => Empty,
        }
    }

    pub fn leq(self, other: BoolApprox) -> bool {
        self.meet(other) == self
    }

    /// Kleene negation.
    pub fn not(self) -> BoolApprox {
        match self {
            BoolApprox::MustTrue => BoolApprox::MustFalse,
            BoolApprox::MustFalse => BoolApprox::MustTrue,
            other => other,
        }
    }

    /// Kleene conjunction.
    pub fn and(self, other: BoolApprox) -> BoolApprox {
        use BoolApprox::*;
        match (self, other) {
            (Empty, _) | (_, Empty) => Empty,
            (MustFalse, _) | (_, MustFalse) => MustFalse,
            (MustTrue, MustTrue) => MustTrue,
            _ => Unknown,
        }
    }

    /// Kleene disjunction.
    pub fn or(self, other: BoolApprox) -> BoolApprox {
        use BoolApprox::*;
        match (self, other) {
            (Empty, _) | (_, Empty) => Empty,
            (MustTrue, _) | (_, MustTrue) => MustTrue,
            (MustFalse, MustFalse) => MustFalse,
            _ => Unknown,
        }
    }
}

impl fmt::Display for BoolApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolApprox::Empty => write!(f, "empty"),
            BoolApprox::MustFalse => write!(f, "(0,0)"),
            BoolApprox::MustTrue => write!(f, "(1,1)"),
            BoolApprox::Unknown => write!(f, "(0,1)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use BoolApprox::*;

    #[test]
    fn kleene_tables() {
        assert_eq!(MustTrue.and(Unknown), Unknown);
        assert_eq!(MustTrue.or(Unknown), MustTrue);
        assert_eq!(MustFalse.not(), MustTrue);
        assert_eq!(MustFalse.and(Unknown), MustFalse);
    }

    #[test]
    fn lattice_shape() {
        for v in [MustFalse, MustTrue, Unknown] {
            assert!(Empty.leq(v));
            assert!(v.leq(Unknown));
        }
        assert!(!MustTrue.leq(MustFalse));
        assert_eq!(MustTrue.join(MustFalse), Unknown);
        assert_eq!(MustTrue.meet(MustFalse), Empty);
    }
}
