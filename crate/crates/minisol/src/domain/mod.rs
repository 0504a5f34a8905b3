//! The value lattice: numeric intervals over extended integers, boolean
//! approximations, and recursive composites, with join, meet, order,
//! widening and abstract evaluation.

pub mod boolean;
pub mod composite;
pub mod ext_int;
pub mod interval;

use std::fmt;

pub use boolean::BoolApprox;
pub use composite::{CellKey, CompositeValue};
pub use ext_int::ExtInt;
pub use interval::{arith, compare, ArithFlags, ArithOp, CmpOp, Interval};

use crate::ast::MiniSolType;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("type mismatch between {left} and {right}")]
    TypeMismatch { left: String, right: String },
    #[error("numeric, boolean and composite values do not mix: {0}")]
    KindMismatch(String),
}

/// Where a variable comes from; affects its default approximation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    Parameter,
    Local,
    State,
    Builtin,
    Temporary,
}

/// One abstract value: interval, boolean approximation, or composite.
#[derive(Clone, Debug, PartialEq)]
pub enum AbstractValue {
    Num(Interval),
    Boolean(BoolApprox),
    Comp(CompositeValue),
}

impl AbstractValue {
    pub fn bottom_for(ty: &MiniSolType) -> AbstractValue {
        match ty {
            MiniSolType::Bool => AbstractValue::Boolean(BoolApprox::Empty),
            t if t.is_composite() => AbstractValue::Comp(CompositeValue::new(t.clone())),
            _ => AbstractValue::Num(Interval::Empty),
        }
    }

    pub fn as_interval(&self) -> Option<&Interval> {
        match self {
            AbstractValue::Num(iv) => Some(iv),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<BoolApprox> {
        match self {
            AbstractValue::Boolean(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_composite(&self) -> Option<&CompositeValue> {
        match self {
            AbstractValue::Comp(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_bottom(&self) -> bool {
        match self {
            AbstractValue::Num(iv) => iv.is_empty(),
            AbstractValue::Boolean(b) => *b == BoolApprox::Empty,
            AbstractValue::Comp(_) => false,
        }
    }

    pub fn join(&self, other: &AbstractValue) -> Result<AbstractValue, DomainError> {
        use AbstractValue::*;
        match (self, other) {
            (Num(a), Num(b)) => Ok(Num(a.join(b))),
            (Boolean(a), Boolean(b)) => Ok(Boolean(a.join(*b))),
            (Comp(a), Comp(b)) => Ok(Comp(a.join(b)?)),
            (a, b) => Err(kind_mismatch(a, b)),
        }
    }

    pub fn widen(&self, other: &AbstractValue) -> Result<AbstractValue, DomainError> {
        use AbstractValue::*;
        match (self, other) {
            (Num(a), Num(b)) => Ok(Num(a.widen(b))),
            (Boolean(a), Boolean(b)) => Ok(Boolean(a.join(*b))),
            (Comp(a), Comp(b)) => Ok(Comp(a.widen(b)?)),
            (a, b) => Err(kind_mismatch(a, b)),
        }
    }

    pub fn meet(&self, other: &AbstractValue) -> Result<AbstractValue, DomainError> {
        use AbstractValue::*;
        match (self, other) {
            (Num(a), Num(b)) => Ok(Num(a.meet(b))),
            (Boolean(a), Boolean(b)) => Ok(Boolean(a.meet(*b))),
            (Comp(a), Comp(b)) => Ok(Comp(a.meet(b)?)),
            (a, b) => Err(kind_mismatch(a, b)),
        }
    }

    pub fn leq(&self, other: &AbstractValue) -> bool {
        use AbstractValue::*;
        match (self, other) {
            (Num(a), Num(b)) => a.leq(b),
            (Boolean(a), Boolean(b)) => a.leq(*b),
            (Comp(a), Comp(b)) => a.leq(b),
            _ => false,
        }
    }
}

fn kind_mismatch(a: &AbstractValue, b: &AbstractValue) -> DomainError {
    let name = |v: &AbstractValue| match v {
        AbstractValue::Num(_) => "numeric",
        AbstractValue::Boolean(_) => "boolean",
        AbstractValue::Comp(_) => "composite",
    };
    DomainError::KindMismatch(format!("{} vs {}", name(a), name(b)))
}

impl fmt::Display for AbstractValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractValue::Num(iv) => write!(f, "{iv}"),
            AbstractValue::Boolean(b) => write!(f, "{b}"),
            AbstractValue::Comp(c) => write!(f, "{c}"),
        }
    }
}

/// Default approximation for a variable of the given type and origin.
///
/// Unsigned scalars default to [0, inf), signed ones to the full line, and
/// booleans to unknown. Chain-supplied builtins (`msg.*`, `block.*`) start
/// at [1, inf). Fixed-length arrays populate their whole index range;
/// mappings and dynamic arrays start with no keys.
pub fn default_for(ty: &MiniSolType, origin: Origin) -> AbstractValue {
    match ty {
        MiniSolType::UInt(_) | MiniSolType::Address => {
            if origin == Origin::Builtin {
                AbstractValue::Num(Interval::range(ExtInt::finite(1), ExtInt::PosInf))
            } else {
                AbstractValue::Num(Interval::unsigned_top())
            }
        }
        MiniSolType::Int(_) => AbstractValue::Num(Interval::top()),
        MiniSolType::Bool => AbstractValue::Boolean(BoolApprox::Unknown),
        MiniSolType::Struct { fields, .. } => {
            let mut comp = CompositeValue::new(ty.clone());
            for (name, fty) in fields {
                comp.set(CellKey::Field(name.clone()), default_for(fty, origin));
            }
            AbstractValue::Comp(comp)
        }
        MiniSolType::Array { elem, len: Some(n) } => {
            let mut comp = CompositeValue::new(ty.clone());
            for i in 0..*n {
                comp.set(CellKey::Index(i.into()), default_for(elem, origin));
            }
            AbstractValue::Comp(comp)
        }
        MiniSolType::Array { .. } | MiniSolType::Mapping { .. } => {
            AbstractValue::Comp(CompositeValue::new(ty.clone()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_by_type_and_origin() {
        assert_eq!(
            default_for(&MiniSolType::uint(), Origin::Parameter),
            AbstractValue::Num(Interval::unsigned_top())
        );
        assert_eq!(
            default_for(&MiniSolType::uint(), Origin::Builtin),
            AbstractValue::Num(Interval::range(ExtInt::finite(1), ExtInt::PosInf))
        );
        assert_eq!(
            default_for(&MiniSolType::Int(256), Origin::Local),
            AbstractValue::Num(Interval::top())
        );
        assert_eq!(
            default_for(&MiniSolType::Bool, Origin::Parameter),
            AbstractValue::Boolean(BoolApprox::Unknown)
        );
    }

    #[test]
    fn mapping_default_has_no_keys() {
        let ty = MiniSolType::Mapping {
            key: Box::new(MiniSolType::Address),
            value: Box::new(MiniSolType::uint()),
        };
        match default_for(&ty, Origin::State) {
            AbstractValue::Comp(c) => assert!(c.entries.is_empty()),
            other => panic!("expected composite, got {other:?}"),
        }
    }

    #[test]
    fn fixed_array_default_fills_range() {
        let ty = MiniSolType::Array {
            elem: Box::new(MiniSolType::uint()),
            len: Some(3),
        };
        match default_for(&ty, Origin::State) {
            AbstractValue::Comp(c) => {
                assert_eq!(c.entries.len(), 3);
                assert_eq!(
                    c.get(&CellKey::Index(0.into())),
                    Some(&AbstractValue::Num(Interval::unsigned_top()))
                );
            }
            other => panic!("expected composite, got {other:?}"),
        }
    }
}
