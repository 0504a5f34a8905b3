//! Integers extended with −∞ and +∞, the bound alphabet for intervals.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// An integer bound: −∞, a finite arbitrary-precision integer, or +∞.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtInt {
    NegInf,
    Finite(BigInt),
    PosInf,
}

impl ExtInt {
    pub fn finite(v: impl Into<BigInt>) -> Self {
        ExtInt::Finite(v.into())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtInt::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&BigInt> {
        match self {
            ExtInt::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Bound addition. −∞ + +∞ has no meaning for interval bounds; the
    /// arithmetic below never combines opposite infinities on the same side.
    pub fn add(&self, other: &ExtInt) -> ExtInt {
        use ExtInt::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a + b),
            (NegInf, PosInf) | (PosInf, NegInf) => {
                unreachable!("opposite infinities never meet on one bound side")
            }
            (NegInf, _) | (_, NegInf) => NegInf,
            (PosInf, _) | (_, PosInf) => PosInf,
        }
    }

    pub fn neg(&self) -> ExtInt {
        match self {
            ExtInt::NegInf => ExtInt::PosInf,
            ExtInt::PosInf => ExtInt::NegInf,
            ExtInt::Finite(v) => ExtInt::Finite(-v),
        }
    }

    pub fn sub(&self, other: &ExtInt) -> ExtInt {
        self.add(&other.neg())
    }

    /// Bound multiplication with the usual interval-arithmetic convention
    /// 0 · ±∞ = 0.
    pub fn mul(&self, other: &ExtInt) -> ExtInt {
        use ExtInt::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a * b),
            (Finite(a), inf) | (inf, Finite(a)) => {
                if a.is_zero() {
                    Finite(BigInt::zero())
                } else if (a.is_positive()) == (*inf == PosInf) {
                    PosInf
                } else {
                    NegInf
                }
            }
            (PosInf, PosInf) | (NegInf, NegInf) => PosInf,
            _ => NegInf,
        }
    }

    pub fn sign(&self) -> i8 {
        match self {
            ExtInt::NegInf => -1,
            ExtInt::PosInf => 1,
            ExtInt::Finite(v) => {
                if v.is_zero() {
                    0
                } else if v.is_positive() {
                    1
                } else {
                    -1
                }
            }
        }
    }
}

impl PartialOrd for ExtInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtInt {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtInt::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (PosInf, _) | (_, NegInf) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::NegInf => write!(f, "-inf"),
            ExtInt::PosInf => write!(f, "inf"),
            ExtInt::Finite(v) => write!(f, "{v}"),
        }
    }
}

impl From<i64> for ExtInt {
    fn from(v: i64) -> Self {
        ExtInt::Finite(BigInt::from(v))
    }
}
