//! Mathematical integers with an `i64` fast path.
//!
//! UPLang's `Int` is interpreted as ℤ. Almost every value a desk-scale run
//! touches fits in a machine word, so the representation keeps small values
//! unboxed and only spills into `BigInt` on overflow. The representation is
//! canonical: a value that fits in `i64` is always `Small`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone)]
pub struct Int(Repr);

#[derive(Clone)]
enum Repr {
    Small(i64),
    Big(Box<BigInt>),
}

impl Int {
    pub const ZERO: Int = Int(Repr::Small(0));
    pub const ONE: Int = Int(Repr::Small(1));

    pub fn from_big(b: BigInt) -> Int {
        match b.to_i64() {
            Some(v) => Int(Repr::Small(v)),
            None => Int(Repr::Big(Box::new(b))),
        }
    }

    pub fn to_big(&self) -> BigInt {
        match &self.0 {
            Repr::Small(v) => BigInt::from(*v),
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match &self.0 {
            Repr::Small(v) => Some(*v),
            Repr::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0))
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(v) => *v < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn from_bool(b: bool) -> Int {
        if b {
            Int::ONE
        } else {
            Int::ZERO
        }
    }

    pub fn add(&self, rhs: &Int) -> Int {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(r) = a.checked_add(*b) {
                return Int(Repr::Small(r));
            }
        }
        Int::from_big(self.to_big() + rhs.to_big())
    }

    pub fn sub(&self, rhs: &Int) -> Int {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(r) = a.checked_sub(*b) {
                return Int(Repr::Small(r));
            }
        }
        Int::from_big(self.to_big() - rhs.to_big())
    }

    pub fn mul(&self, rhs: &Int) -> Int {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(r) = a.checked_mul(*b) {
                return Int(Repr::Small(r));
            }
        }
        Int::from_big(self.to_big() * rhs.to_big())
    }

    pub fn neg(&self) -> Int {
        if let Repr::Small(a) = &self.0 {
            if let Some(r) = a.checked_neg() {
                return Int(Repr::Small(r));
            }
        }
        Int::from_big(-self.to_big())
    }

    /// Quotient truncated toward zero (C semantics). `None` on a zero divisor.
    pub fn div_trunc(&self, rhs: &Int) -> Option<Int> {
        if rhs.is_zero() {
            return None;
        }
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(r) = a.checked_div(*b) {
                return Some(Int(Repr::Small(r)));
            }
        }
        // num-bigint's `/` truncates toward zero.
        Some(Int::from_big(self.to_big() / rhs.to_big()))
    }

    /// Remainder with the sign of the dividend (C semantics). `None` on a zero divisor.
    pub fn rem_trunc(&self, rhs: &Int) -> Option<Int> {
        if rhs.is_zero() {
            return None;
        }
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(r) = a.checked_rem(*b) {
                return Some(Int(Repr::Small(r)));
            }
        }
        Some(Int::from_big(self.to_big() % rhs.to_big()))
    }
}

impl From<i64> for Int {
    fn from(v: i64) -> Int {
        Int(Repr::Small(v))
    }
}

impl From<i32> for Int {
    fn from(v: i32) -> Int {
        Int(Repr::Small(v as i64))
    }
}

impl From<u64> for Int {
    fn from(v: u64) -> Int {
        match i64::try_from(v) {
            Ok(s) => Int(Repr::Small(s)),
            Err(_) => Int::from_big(BigInt::from(v)),
        }
    }
}

impl From<BigInt> for Int {
    fn from(b: BigInt) -> Int {
        Int::from_big(b)
    }
}

impl PartialEq for Int {
    fn eq(&self, other: &Int) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a == b,
            (Repr::Big(a), Repr::Big(b)) => a == b,
            // canonical representation: a Big never equals a Small
            _ => false,
        }
    }
}

impl Eq for Int {}

impl Hash for Int {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(v) => {
                0u8.hash(state);
                v.hash(state)
            }
            Repr::Big(b) => {
                1u8.hash(state);
                b.hash(state)
            }
        }
    }
}

impl Ord for Int {
    fn cmp(&self, other: &Int) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            (Repr::Big(a), Repr::Big(b)) => a.cmp(b),
            (Repr::Small(_), Repr::Big(b)) => {
                if b.is_negative() {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (Repr::Big(a), Repr::Small(_)) => {
                if a.is_negative() {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }
}

impl PartialOrd for Int {
    fn partial_cmp(&self, other: &Int) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(v) => write!(f, "{v}"),
            Repr::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Int {
    type Err = num_bigint::ParseBigIntError;

    fn from_str(s: &str) -> Result<Int, Self::Err> {
        match s.parse::<i64>() {
            Ok(v) => Ok(Int(Repr::Small(v))),
            Err(_) => s.parse::<BigInt>().map(Int::from_big),
        }
    }
}

impl serde::Serialize for Int {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match &self.0 {
            Repr::Small(v) => s.serialize_i64(*v),
            Repr::Big(b) => s.serialize_str(&b.to_string()),
        }
    }
}

impl Default for Int {
    fn default() -> Int {
        Int::ZERO
    }
}

impl Zero for Int {
    fn zero() -> Int {
        Int::ZERO
    }

    fn is_zero(&self) -> bool {
        Int::is_zero(self)
    }
}

impl std::ops::Add for Int {
    type Output = Int;

    fn add(self, rhs: Int) -> Int {
        Int::add(&self, &rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn overflow_spills_into_big() {
        let max = Int::from(i64::MAX);
        let sum = max.add(&Int::ONE);
        assert!(sum.to_i64().is_none());
        assert_eq!(sum.sub(&Int::ONE), max);
        assert!(sum > max);
        assert_eq!(sum.to_string(), "9223372036854775808");
    }

    #[test]
    fn c_style_division() {
        let d = |a: i64, b: i64| Int::from(a).div_trunc(&Int::from(b)).unwrap();
        let r = |a: i64, b: i64| Int::from(a).rem_trunc(&Int::from(b)).unwrap();
        assert_eq!(d(7, 2), Int::from(3));
        assert_eq!(d(-7, 2), Int::from(-3));
        assert_eq!(r(-7, 2), Int::from(-1));
        assert_eq!(r(7, -2), Int::from(1));
        assert!(Int::from(1).div_trunc(&Int::ZERO).is_none());
        assert_eq!(Int::from(i64::MIN).div_trunc(&Int::from(-1)).unwrap().to_string(), "9223372036854775808");
    }

    proptest! {
        #[test]
        fn agrees_with_bigint(a in any::<i64>(), b in any::<i64>()) {
            let (x, y) = (Int::from(a), Int::from(b));
            let (bx, by) = (BigInt::from(a), BigInt::from(b));
            prop_assert_eq!(x.add(&y).to_big(), &bx + &by);
            prop_assert_eq!(x.sub(&y).to_big(), &bx - &by);
            prop_assert_eq!(x.mul(&y).to_big(), &bx * &by);
            prop_assert_eq!(x.cmp(&y), bx.cmp(&by));
            if b != 0 {
                prop_assert_eq!(x.div_trunc(&y).unwrap().to_big(), &bx / &by);
                prop_assert_eq!(x.rem_trunc(&y).unwrap().to_big(), &bx % &by);
            }
        }
    }
}
