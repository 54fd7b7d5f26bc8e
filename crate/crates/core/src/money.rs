//! Exact rational quantities: costs, bids, payments, budgets and values.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// An exact rational number.
///
/// Every arithmetic operation is exact. Overflow of the underlying 128-bit
/// numerator or denominator aborts with a panic instead of rounding, so a
/// result is either exact or absent. Signs are unrestricted here (surpluses
/// and differences go negative); non-negativity of costs, bids and values is
/// validated where those enter the system.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(Ratio<i128>);

impl Money {
    pub const ZERO: Money = Money(Ratio::new_raw(0, 1));
    pub const ONE: Money = Money(Ratio::new_raw(1, 1));

    pub fn new(numer: i128, denom: i128) -> Money {
        assert!(denom != 0, "zero denominator");
        Money(Ratio::new(numer, denom))
    }

    pub fn from_int(value: i128) -> Money {
        Money(Ratio::from_integer(value))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Smallest integer not below `self`.
    pub fn ceil_int(&self) -> i128 {
        self.0.ceil().to_integer()
    }

    pub fn floor_int(&self) -> i128 {
        self.0.floor().to_integer()
    }

    pub fn recip(&self) -> Money {
        assert!(!self.is_zero(), "reciprocal of zero");
        Money(self.0.recip())
    }

    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// Largest multiple of `2^-bits` that does not exceed `x`.
    pub fn floor_dyadic(x: f64, bits: u32) -> Money {
        assert!(x.is_finite(), "non-finite value");
        let scale = (1u64 << bits) as f64;
        Money::new((x * scale).floor() as i128, 1i128 << bits)
    }

    pub fn min(self, other: Money) -> Money {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Money) -> Money {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Decimal rendering for reports; never parsed back.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        format!("{:.*}", digits, self.to_f64())
    }
}

fn overflow(op: &str) -> ! {
    panic!("exact rational overflow in {op}")
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0.checked_add(&rhs.0).unwrap_or_else(|| overflow("add")))
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0.checked_sub(&rhs.0).unwrap_or_else(|| overflow("sub")))
    }
}

impl Mul for Money {
    type Output = Money;
    fn mul(self, rhs: Money) -> Money {
        Money(self.0.checked_mul(&rhs.0).unwrap_or_else(|| overflow("mul")))
    }
}

impl Div for Money {
    type Output = Money;
    fn div(self, rhs: Money) -> Money {
        assert!(!rhs.is_zero(), "division by zero");
        Money(self.0.checked_div(&rhs.0).unwrap_or_else(|| overflow("div")))
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        *self = *self + rhs;
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        *self = *self - rhs;
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, |acc, x| acc + *x)
    }
}

impl From<i128> for Money {
    fn from(value: i128) -> Money {
        Money::from_int(value)
    }
}

impl From<i64> for Money {
    fn from(value: i64) -> Money {
        Money::from_int(value as i128)
    }
}

impl From<i32> for Money {
    fn from(value: i32) -> Money {
        Money::from_int(value as i128)
    }
}

impl From<u32> for Money {
    fn from(value: u32) -> Money {
        Money::from_int(value as i128)
    }
}

impl From<usize> for Money {
    fn from(value: usize) -> Money {
        Money::from_int(value as i128)
    }
}

impl One for Money {
    fn one() -> Money {
        Money::ONE
    }
}

impl Zero for Money {
    fn zero() -> Money {
        Money::ZERO
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

/// Renders as `p` for integers and `p/q` otherwise.
impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Money {
    type Err = Error;

    /// Accepts `p` or `p/q` with optional surrounding whitespace.
    fn from_str(s: &str) -> Result<Money, Error> {
        let bad = || Error::Input(format!("malformed rational {s:?}; expected \"p\" or \"p/q\""));
        let s = s.trim();
        let (numer, denom) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s, "1"),
        };
        let numer: i128 = numer.parse().map_err(|_| bad())?;
        let denom: i128 = denom.parse().map_err(|_| bad())?;
        if denom == 0 {
            return Err(Error::Input(format!("zero denominator in {s:?}")));
        }
        Ok(Money::new(numer, denom))
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Money, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `Money::new(p, q)` shorthand used pervasively in tests and fixtures.
pub fn q(numer: i128, denom: i128) -> Money {
    Money::new(numer, denom)
}
