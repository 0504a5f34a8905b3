//! Numeric intervals over extended integers.
//!
//! The empty interval is the lattice bottom and stands for "no value yet"
//! (a variable whose declaration has not executed, or an unreachable state).
//! Bounds are mathematical integers; machine-width wrap-around is not
//! modeled, except that unsigned results are met with [0, inf].

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::boolean::BoolApprox;
use super::ext_int::ExtInt;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Interval {
    Empty,
    Range(ExtInt, ExtInt),
}

/// Side effects of abstract arithmetic that are reported, not raised.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ArithFlags {
    pub div_by_zero_possible: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

impl Interval {
    /// Normalizing constructor: crossed bounds collapse to the empty interval.
    pub fn range(lo: ExtInt, hi: ExtInt) -> Interval {
        if lo > hi || lo == ExtInt::PosInf || hi == ExtInt::NegInf {
            Interval::Empty
        } else {
            Interval::Range(lo, hi)
        }
    }

    pub fn singleton(v: impl Into<BigInt>) -> Interval {
        let v = v.into();
        Interval::Range(ExtInt::Finite(v.clone()), ExtInt::Finite(v))
    }

    pub fn of(lo: i64, hi: i64) -> Interval {
        Interval::range(ExtInt::from(lo), ExtInt::from(hi))
    }

    pub fn top() -> Interval {
        Interval::Range(ExtInt::NegInf, ExtInt::PosInf)
    }

    /// [0, inf], the default for unsigned values.
    pub fn unsigned_top() -> Interval {
        Interval::Range(ExtInt::finite(0), ExtInt::PosInf)
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Interval::Empty)
    }

    pub fn bounds(&self) -> Option<(&ExtInt, &ExtInt)> {
        match self {
            Interval::Empty => None,
            Interval::Range(lo, hi) => Some((lo, hi)),
        }
    }

    pub fn contains(&self, v: &BigInt) -> bool {
        match self {
            Interval::Empty => false,
            Interval::Range(lo, hi) => {
                *lo <= ExtInt::Finite(v.clone()) && ExtInt::Finite(v.clone()) <= *hi
            }
        }
    }

    pub fn as_constant(&self) -> Option<&BigInt> {
        match self {
            Interval::Range(ExtInt::Finite(a), ExtInt::Finite(b)) if a == b => Some(a),
            _ => None,
        }
    }

    /// Least upper bound: the convex hull. Joining with empty is identity.
    pub fn join(&self, other: &Interval) -> Interval {
        match (self, other) {
            (Interval::Empty, x) | (x, Interval::Empty) => x.clone(),
            (Interval::Range(a, b), Interval::Range(c, d)) => {
                Interval::Range(a.clone().min(c.clone()), b.clone().max(d.clone()))
            }
        }
    }

    /// Widening: keep a bound of `self` only when it already covers the
    /// corresponding bound of `other`, otherwise jump to the infinity.
    /// Empty operands act as identity.
    pub fn widen(&self, other: &Interval) -> Interval {
        match (self, other) {
            (Interval::Empty, x) | (x, Interval::Empty) => x.clone(),
            (Interval::Range(a, b), Interval::Range(c, d)) => {
                let lo = if a <= c { a.clone() } else { ExtInt::NegInf };
                let hi = if b >= d { b.clone() } else { ExtInt::PosInf };
                Interval::Range(lo, hi)
            }
        }
    }

    /// Greatest lower bound; disjoint inputs yield empty.
    pub fn meet(&self, other: &Interval) -> Interval {
        match (self, other) {
            (Interval::Empty, _) | (_, Interval::Empty) => Interval::Empty,
            (Interval::Range(a, b), Interval::Range(c, d)) => {
                Interval::range(a.clone().max(c.clone()), b.clone().min(d.clone()))
            }
        }
    }

    /// Set inclusion; empty is below everything.
    pub fn leq(&self, other: &Interval) -> bool {
        match (self, other) {
            (Interval::Empty, _) => true,
            (_, Interval::Empty) => false,
            (Interval::Range(a, b), Interval::Range(c, d)) => c <= a && b <= d,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Empty => write!(f, "empty"),
            Interval::Range(lo, hi) => write!(f, "({lo},{hi})"),
        }
    }
}

/// Sound over-approximation of `{x op y | x in a, y in b}`.
///
/// Division and modulo exclude 0 from the divisor before computing and set
/// `div_by_zero_possible` whenever the divisor interval contained 0; a
/// divisor of exactly [0,0] yields empty. Division truncates toward zero
/// and the sign of a modulo result follows the dividend. When `unsigned`
/// is set the result is met with [0, inf].
pub fn arith(op: ArithOp, a: &Interval, b: &Interval, unsigned: bool) -> (Interval, ArithFlags) {
    let mut flags = ArithFlags::default();
    let (alo, ahi, blo, bhi) = match (a, b) {
        (Interval::Range(alo, ahi), Interval::Range(blo, bhi)) => (alo, ahi, blo, bhi),
        _ => return (Interval::Empty, flags),
    };

    let raw = match op {
        ArithOp::Add => Interval::range(alo.add(blo), ahi.add(bhi)),
        ArithOp::Sub => Interval::range(alo.sub(bhi), ahi.sub(blo)),
        ArithOp::Mul => {
            let candidates = [
                alo.mul(blo),
                alo.mul(bhi),
                ahi.mul(blo),
                ahi.mul(bhi),
            ];
            let lo = candidates.iter().min().unwrap().clone();
            let hi = candidates.iter().max().unwrap().clone();
            Interval::range(lo, hi)
        }
        ArithOp::Div | ArithOp::Mod => {
            let zero = BigInt::zero();
            if b.contains(&zero) {
                flags.div_by_zero_possible = true;
            }
            let divisor = exclude_zero(blo, bhi);
            match divisor {
                None => Interval::Empty,
                Some((dlo, dhi)) if op == ArithOp::Div => {
                    div_range(alo, ahi, &dlo, &dhi)
                }
                Some((dlo, dhi)) => mod_range(alo, ahi, &dlo, &dhi),
            }
        }
    };

    let clamped = if unsigned {
        raw.meet(&Interval::unsigned_top())
    } else {
        raw
    };
    (clamped, flags)
}

/// Remove 0 from a divisor interval. Returns the hull of what is left;
/// `None` when the divisor was exactly [0,0].
fn exclude_zero(lo: &ExtInt, hi: &ExtInt) -> Option<(ExtInt, ExtInt)> {
    let zero = ExtInt::finite(0);
    if *lo == zero && *hi == zero {
        return None;
    }
    let lo = if *lo == zero { ExtInt::finite(1) } else { lo.clone() };
    let hi = if *hi == zero { ExtInt::finite(-1) } else { hi.clone() };
    Some((lo, hi))
}

fn div_range(alo: &ExtInt, ahi: &ExtInt, dlo: &ExtInt, dhi: &ExtInt) -> Interval {
    // Candidate divisor endpoints; when the (zero-free hull of the) divisor
    // still spans both signs the region boundaries -1 and 1 are extremes too.
    let mut divs = vec![dlo.clone(), dhi.clone()];
    if dlo.sign() < 0 && dhi.sign() > 0 {
        divs.push(ExtInt::finite(-1));
        divs.push(ExtInt::finite(1));
    }
    let mut candidates = Vec::new();
    for x in [alo, ahi] {
        for d in &divs {
            ext_div_candidates(x, d, &mut candidates);
        }
    }
    let lo = candidates.iter().min().unwrap().clone();
    let hi = candidates.iter().max().unwrap().clone();
    Interval::range(lo, hi)
}

/// Truncated division of bound values, pushing every attainable extreme.
fn ext_div_candidates(a: &ExtInt, d: &ExtInt, out: &mut Vec<ExtInt>) {
    use ExtInt::*;
    match (a, d) {
        (Finite(x), Finite(y)) => out.push(Finite(trunc_div(x, y))),
        // finite / huge approaches 0 from either side
        (Finite(_), _) => out.push(ExtInt::finite(0)),
        (_, Finite(y)) => {
            let s = a.sign() * if y.is_negative() { -1 } else { 1 };
            out.push(if s >= 0 { PosInf } else { NegInf });
        }
        // infinite / infinite: anything from 0 to the signed infinity
        _ => {
            out.push(ExtInt::finite(0));
            let s = a.sign() * d.sign();
            out.push(if s >= 0 { PosInf } else { NegInf });
        }
    }
}

fn trunc_div(a: &BigInt, b: &BigInt) -> BigInt {
    a / b // BigInt division truncates toward zero
}

fn mod_range(alo: &ExtInt, ahi: &ExtInt, dlo: &ExtInt, dhi: &ExtInt) -> Interval {
    // Exact when both operands are constants.
    if let (ExtInt::Finite(a), ExtInt::Finite(b), ExtInt::Finite(c), ExtInt::Finite(d)) =
        (alo, ahi, dlo, dhi)
    {
        if a == b && c == d {
            return Interval::singleton(a % c);
        }
    }
    // |a % d| < max(|d|); the sign follows the dividend.
    let mag = dlo.neg().max(dhi.clone());
    let mag_minus_one = match &mag {
        ExtInt::Finite(m) => ExtInt::Finite(m.abs() - BigInt::one()),
        _ => ExtInt::PosInf,
    };
    let lo = if alo.sign() >= 0 {
        ExtInt::finite(0)
    } else {
        alo.clone().max(mag_minus_one.neg())
    };
    let hi = if ahi.sign() <= 0 {
        ExtInt::finite(0)
    } else {
        ahi.clone().min(mag_minus_one)
    };
    Interval::range(lo, hi)
}

/// Three-valued comparison of two non-empty intervals: `MustTrue` when the
/// relation holds for every pair, `MustFalse` when it holds for none.
pub fn compare(op: CmpOp, a: &Interval, b: &Interval) -> BoolApprox {
    let ((alo, ahi), (blo, bhi)) = match (a.bounds(), b.bounds()) {
        (Some(x), Some(y)) => (x, y),
        _ => return BoolApprox::Empty,
    };
    match op {
        CmpOp::Lt => {
            if ahi < blo {
                BoolApprox::MustTrue
            } else if alo >= bhi {
                BoolApprox::MustFalse
            } else {
                BoolApprox::Unknown
            }
        }
        CmpOp::Le => {
            if ahi <= blo {
                BoolApprox::MustTrue
            } else if alo > bhi {
                BoolApprox::MustFalse
            } else {
                BoolApprox::Unknown
            }
        }
        CmpOp::Gt => compare(CmpOp::Lt, b, a),
        CmpOp::Ge => compare(CmpOp::Le, b, a),
        CmpOp::Eq => {
            if a.meet(b).is_empty() {
                BoolApprox::MustFalse
            } else if a.as_constant().is_some() && a == b {
                BoolApprox::MustTrue
            } else {
                BoolApprox::Unknown
            }
        }
        CmpOp::Ne => compare(CmpOp::Eq, a, b).not(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn join_is_hull() {
        assert_eq!(Interval::of(1, 3).join(&Interval::of(5, 9)), Interval::of(1, 9));
        assert_eq!(Interval::Empty.join(&Interval::of(2, 2)), Interval::of(2, 2));
        assert_eq!(
            Interval::range(ExtInt::finite(0), ExtInt::PosInf).join(&Interval::of(-3, 1)),
            Interval::range(ExtInt::finite(-3), ExtInt::PosInf)
        );
    }

    #[test]
    fn widen_jumps_to_infinity() {
        assert_eq!(
            Interval::of(0, 5).widen(&Interval::of(0, 10)),
            Interval::range(ExtInt::finite(0), ExtInt::PosInf)
        );
        assert_eq!(Interval::Empty.widen(&Interval::of(3, 7)), Interval::of(3, 7));
        assert_eq!(Interval::of(2, 9).widen(&Interval::of(2, 9)), Interval::of(2, 9));
    }

    #[test]
    fn meet_is_intersection() {
        assert_eq!(Interval::of(0, 10).meet(&Interval::of(5, 20)), Interval::of(5, 10));
        assert_eq!(Interval::of(0, 3).meet(&Interval::of(7, 9)), Interval::Empty);
        let top_u = Interval::unsigned_top();
        assert_eq!(top_u.meet(&Interval::of(3, 8)), Interval::of(3, 8));
    }

    #[test]
    fn leq_is_subset() {
        assert!(Interval::of(1, 2).leq(&Interval::of(0, 5)));
        assert!(!Interval::of(0, 5).leq(&Interval::of(1, 5)));
        assert!(Interval::Empty.leq(&Interval::of(9, 9)));
        assert!(Interval::Empty.leq(&Interval::Empty));
    }

    #[test]
    fn add_bounds() {
        let (r, f) = arith(ArithOp::Add, &Interval::of(1, 2), &Interval::of(3, 4), true);
        assert_eq!(r, Interval::of(4, 6));
        assert!(!f.div_by_zero_possible);
    }

    #[test]
    fn sub_clamps_unsigned() {
        let (r, _) = arith(ArithOp::Sub, &Interval::of(0, 5), &Interval::of(0, 5), true);
        assert_eq!(r, Interval::of(0, 5));
        let (r, _) = arith(ArithOp::Sub, &Interval::of(0, 5), &Interval::of(0, 5), false);
        assert_eq!(r, Interval::of(-5, 5));
    }

    #[test]
    fn div_excludes_zero_and_flags() {
        // Brute-force oracle: x in 2..=8, y in 1..=2 gives quotients 1..=8.
        let (r, f) = arith(ArithOp::Div, &Interval::of(2, 8), &Interval::of(0, 2), true);
        assert_eq!(r, Interval::of(1, 8));
        assert!(f.div_by_zero_possible);
    }

    #[test]
    fn div_by_exact_zero_is_empty() {
        let (r, f) = arith(ArithOp::Div, &Interval::of(1, 5), &Interval::of(0, 0), true);
        assert!(r.is_empty());
        assert!(f.div_by_zero_possible);
    }

    #[test]
    fn mod_constant_fold() {
        let (r, _) = arith(ArithOp::Mod, &Interval::of(5, 5), &Interval::of(3, 3), true);
        assert_eq!(r, Interval::of(2, 2));
    }

    #[test]
    fn mod_of_unbounded_dividend() {
        let top = Interval::unsigned_top();
        let (r, _) = arith(ArithOp::Mod, &top, &Interval::of(2, 2), true);
        assert_eq!(r, Interval::of(0, 1));
    }

    #[test]
    fn cmp_examples() {
        assert_eq!(compare(CmpOp::Lt, &Interval::of(0, 0), &Interval::of(1, 1)), BoolApprox::MustTrue);
        assert_eq!(compare(CmpOp::Lt, &Interval::of(0, 10), &Interval::of(5, 5)), BoolApprox::Unknown);
        assert_eq!(compare(CmpOp::Eq, &Interval::of(7, 9), &Interval::of(0, 3)), BoolApprox::MustFalse);
    }

    #[test]
    fn display_tokens() {
        assert_eq!(Interval::range(ExtInt::finite(1), ExtInt::PosInf).to_string(), "(1,inf)");
        assert_eq!(Interval::of(0, 0).to_string(), "(0,0)");
        assert_eq!(Interval::Empty.to_string(), "empty");
    }
}
