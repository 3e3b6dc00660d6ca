//! Exact integer arithmetic with an inline `i128` fast path.
//!
//! Every game keeps its weights scaled by a common denominator so the hot
//! loops (online runs, enumeration, matching DP) only ever add, subtract and
//! compare integers. Values that overflow `i128` spill into a `BigInt` and
//! are demoted back whenever they fit again.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

#[derive(Clone, Debug)]
pub enum Score {
    Small(i128),
    Big(BigInt),
}

impl Score {
    pub const ZERO: Score = Score::Small(0);

    fn from_big(b: BigInt) -> Score {
        match b.to_i128() {
            Some(v) => Score::Small(v),
            None => Score::Big(b),
        }
    }

    pub fn to_bigint(&self) -> BigInt {
        match self {
            Score::Small(v) => BigInt::from(*v),
            Score::Big(b) => b.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Score::Small(0))
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Score::Small(v) => *v > 0,
            Score::Big(b) => b.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Score::Small(v) => *v < 0,
            Score::Big(b) => b.is_negative(),
        }
    }

    pub fn as_i128(&self) -> Option<i128> {
        match self {
            Score::Small(v) => Some(*v),
            Score::Big(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Score::Small(v) => *v as f64,
            Score::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn double(&self) -> Score {
        self + self
    }

    pub fn mul_big(&self, factor: &BigInt) -> Score {
        Score::from_big(self.to_bigint() * factor)
    }

    pub fn abs(&self) -> Score {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }
}

impl Default for Score {
    fn default() -> Self {
        Score::ZERO
    }
}

impl From<i128> for Score {
    fn from(v: i128) -> Self {
        Score::Small(v)
    }
}

impl From<i64> for Score {
    fn from(v: i64) -> Self {
        Score::Small(v as i128)
    }
}

impl From<BigInt> for Score {
    fn from(b: BigInt) -> Self {
        Score::from_big(b)
    }
}

impl From<&BigInt> for Score {
    fn from(b: &BigInt) -> Self {
        match b.to_i128() {
            Some(v) => Score::Small(v),
            None => Score::Big(b.clone()),
        }
    }
}

impl PartialEq for Score {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Score::Small(a), Score::Small(b)) => a.cmp(b),
            // Big values never fit i128, so their sign decides against a small one.
            (Score::Small(_), Score::Big(b)) => {
                if b.is_positive() {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (Score::Big(a), Score::Small(_)) => {
                if a.is_positive() {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (Score::Big(a), Score::Big(b)) => a.cmp(b),
        }
    }
}

impl std::hash::Hash for Score {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Score::Small(v) => v.hash(state),
            Score::Big(b) => b.hash(state),
        }
    }
}

impl<'a> Add<&'a Score> for &'a Score {
    type Output = Score;
    fn add(self, rhs: &'a Score) -> Score {
        if let (Score::Small(a), Score::Small(b)) = (self, rhs) {
            if let Some(v) = a.checked_add(*b) {
                return Score::Small(v);
            }
        }
        Score::from_big(self.to_bigint() + rhs.to_bigint())
    }
}

impl<'a> Sub<&'a Score> for &'a Score {
    type Output = Score;
    fn sub(self, rhs: &'a Score) -> Score {
        if let (Score::Small(a), Score::Small(b)) = (self, rhs) {
            if let Some(v) = a.checked_sub(*b) {
                return Score::Small(v);
            }
        }
        Score::from_big(self.to_bigint() - rhs.to_bigint())
    }
}

impl<'a> Mul<&'a Score> for &'a Score {
    type Output = Score;
    fn mul(self, rhs: &'a Score) -> Score {
        if let (Score::Small(a), Score::Small(b)) = (self, rhs) {
            if let Some(v) = a.checked_mul(*b) {
                return Score::Small(v);
            }
        }
        Score::from_big(self.to_bigint() * rhs.to_bigint())
    }
}

impl Add for Score {
    type Output = Score;
    fn add(self, rhs: Score) -> Score {
        &self + &rhs
    }
}

impl Sub for Score {
    type Output = Score;
    fn sub(self, rhs: Score) -> Score {
        &self - &rhs
    }
}

impl Mul for Score {
    type Output = Score;
    fn mul(self, rhs: Score) -> Score {
        &self * &rhs
    }
}

impl AddAssign<&Score> for Score {
    fn add_assign(&mut self, rhs: &Score) {
        if let (Score::Small(a), Score::Small(b)) = (&*self, rhs) {
            if let Some(v) = a.checked_add(*b) {
                *self = Score::Small(v);
                return;
            }
        }
        *self = &*self + rhs;
    }
}

impl AddAssign for Score {
    fn add_assign(&mut self, rhs: Score) {
        *self += &rhs;
    }
}

impl SubAssign<&Score> for Score {
    fn sub_assign(&mut self, rhs: &Score) {
        *self = &*self - rhs;
    }
}

impl Neg for &Score {
    type Output = Score;
    fn neg(self) -> Score {
        match self {
            Score::Small(v) => match v.checked_neg() {
                Some(n) => Score::Small(n),
                None => Score::from_big(-BigInt::from(*v)),
            },
            Score::Big(b) => Score::from_big(-b),
        }
    }
}

impl Neg for Score {
    type Output = Score;
    fn neg(self) -> Score {
        -&self
    }
}

impl Zero for Score {
    fn zero() -> Self {
        Score::ZERO
    }
    fn is_zero(&self) -> bool {
        Score::is_zero(self)
    }
}

impl Sum for Score {
    fn sum<I: Iterator<Item = Score>>(iter: I) -> Score {
        iter.fold(Score::ZERO, |mut acc, x| {
            acc += &x;
            acc
        })
    }
}

impl<'a> Sum<&'a Score> for Score {
    fn sum<I: Iterator<Item = &'a Score>>(iter: I) -> Score {
        iter.fold(Score::ZERO, |mut acc, x| {
            acc += x;
            acc
        })
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::Small(v) => write!(f, "{v}"),
            Score::Big(b) => write!(f, "{b}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn overflow_promotes_and_demotes() {
        let a = Score::Small(i128::MAX);
        let b = &a + &Score::Small(1);
        assert!(matches!(b, Score::Big(_)));
        let c = &b - &Score::Small(1);
        assert_eq!(c, Score::Small(i128::MAX));
        assert!(matches!(c, Score::Small(_)));
        assert!(b > a);
        assert_eq!(-&b, Score::Small(i128::MIN));
        assert!(-&(&b + &b) < Score::Small(i128::MIN));
    }

    #[test]
    fn neg_of_min_promotes() {
        let m = Score::Small(i128::MIN);
        let n = -&m;
        assert!(n.is_positive());
        assert_eq!(n.to_bigint(), -BigInt::from(i128::MIN));
    }

    proptest! {
        #[test]
        fn arithmetic_matches_bigint(a in any::<i128>(), b in any::<i128>(), c in any::<i64>()) {
            let (sa, sb, sc) = (Score::from(a), Score::from(b), Score::from(c));
            let (ba, bb, bc) = (BigInt::from(a), BigInt::from(b), BigInt::from(c));
            prop_assert_eq!((&sa + &sb).to_bigint(), &ba + &bb);
            prop_assert_eq!((&sa - &sb).to_bigint(), &ba - &bb);
            prop_assert_eq!((&sa * &sc).to_bigint(), &ba * &bc);
            let wide = &(&sa * &sb) + &sc;
            prop_assert_eq!(wide.cmp(&sa), (&ba * &bb + &bc).cmp(&ba));
        }
    }
}
