//! Key→value abstractions for structs, arrays and mappings.
//!
//! The key set of a mapping or dynamically sized array holds exactly the
//! cells written so far; reading an absent key yields the element type's
//! default. Fixed-length arrays start with their full index range. A
//! non-constant subscript is tracked as a single summary cell named by the
//! canonical text of the key expression.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use super::{AbstractValue, DomainError};
use crate::ast::MiniSolType;

/// A key of a composite cell.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellKey {
    /// Constant array/mapping index.
    Index(BigInt),
    /// Struct field.
    Field(String),
    /// Summary cell for a non-constant key, named by canonical source text.
    Summary(String),
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellKey::Index(i) => write!(f, "{i}"),
            CellKey::Field(s) | CellKey::Summary(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompositeValue {
    /// Declared type of the whole composite; element defaults derive from it.
    pub ty: MiniSolType,
    pub entries: BTreeMap<CellKey, AbstractValue>,
}

impl CompositeValue {
    pub fn new(ty: MiniSolType) -> CompositeValue {
        CompositeValue {
            ty,
            entries: BTreeMap::new(),
        }
    }

    /// Declared type of the value stored under `key`.
    pub fn value_type(&self, key: &CellKey) -> Option<&MiniSolType> {
        match &self.ty {
            MiniSolType::Struct { fields, .. } => match key {
                CellKey::Field(name) => fields.iter().find(|(n, _)| n == name).map(|(_, t)| t),
                _ => None,
            },
            MiniSolType::Array { elem, .. } => Some(elem),
            MiniSolType::Mapping { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn get(&self, key: &CellKey) -> Option<&AbstractValue> {
        self.entries.get(key)
    }

    pub fn set(&mut self, key: CellKey, value: AbstractValue) {
        self.entries.insert(key, value);
    }

    pub fn join(&self, other: &CompositeValue) -> Result<CompositeValue, DomainError> {
        self.merge(other, false)
    }

    pub fn widen(&self, other: &CompositeValue) -> Result<CompositeValue, DomainError> {
        self.merge(other, true)
    }

    /// Union of key sets; shared keys merge recursively, one-sided keys are
    /// copied as-is.
    fn merge(&self, other: &CompositeValue, widen: bool) -> Result<CompositeValue, DomainError> {
        if self.ty != other.ty {
            return Err(DomainError::TypeMismatch {
                left: self.ty.to_string(),
                right: other.ty.to_string(),
            });
        }
        let mut entries = BTreeMap::new();
        for (k, v) in &self.entries {
            match other.entries.get(k) {
                Some(w) => {
                    let merged = if widen { v.widen(w)? } else { v.join(w)? };
                    entries.insert(k.clone(), merged);
                }
                None => {
                    entries.insert(k.clone(), v.clone());
                }
            }
        }
        for (k, w) in &other.entries {
            if !entries.contains_key(k) {
                entries.insert(k.clone(), w.clone());
            }
        }
        Ok(CompositeValue {
            ty: self.ty.clone(),
            entries,
        })
    }

    /// Intersection of key sets with recursive meet on the values.
    pub fn meet(&self, other: &CompositeValue) -> Result<CompositeValue, DomainError> {
        if self.ty != other.ty {
            return Err(DomainError::TypeMismatch {
                left: self.ty.to_string(),
                right: other.ty.to_string(),
            });
        }
        let mut entries = BTreeMap::new();
        for (k, v) in &self.entries {
            if let Some(w) = other.entries.get(k) {
                entries.insert(k.clone(), v.meet(w)?);
            }
        }
        Ok(CompositeValue {
            ty: self.ty.clone(),
            entries,
        })
    }

    /// Key-subset order, then pointwise on shared values.
    pub fn leq(&self, other: &CompositeValue) -> bool {
        if self.ty != other.ty {
            return false;
        }
        self.entries.iter().all(|(k, v)| match other.entries.get(k) {
            Some(w) => v.leq(w),
            None => false,
        })
    }
}

impl fmt::Display for CompositeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "{{}}");
        }
        write!(f, "{{")?;
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}: {v}")?;
        }
        write!(f, "}}")
    }
}
