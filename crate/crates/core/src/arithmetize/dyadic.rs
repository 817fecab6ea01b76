use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact number `mantissa / 2^exp` with checked arithmetic. Normalized so the
/// mantissa is odd whenever `exp > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: i64,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { mantissa: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { mantissa: 1, exp: 0 };

    fn normalized(mut mantissa: i64, mut exp: u32) -> Self {
        if mantissa == 0 {
            return Self::ZERO;
        }
        let shift = mantissa.trailing_zeros().min(exp);
        mantissa >>= shift;
        exp -= shift;
        Dyadic { mantissa, exp }
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic { mantissa: v, exp: 0 }
    }

    /// `None` unless the denominator is a power of two and everything fits.
    pub fn from_rational(r: &BigRational) -> Option<Self> {
        let den = r.denom();
        let exp = den.trailing_zeros().unwrap_or(0);
        if *den != BigInt::one() << exp {
            return None;
        }
        let mantissa = i64::try_from(r.numer()).ok()?;
        Some(Self::normalized(mantissa, u32::try_from(exp).ok()?))
    }

    pub fn to_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.mantissa), BigInt::one() << self.exp)
    }

    fn aligned(self, exp: u32) -> Option<i64> {
        let shift = exp - self.exp;
        if shift >= 63 {
            return (self.mantissa == 0).then_some(0);
        }
        self.mantissa.checked_mul(1i64 << shift)
    }

    pub fn checked_add(self, other: Self) -> Option<Self> {
        let exp = self.exp.max(other.exp);
        let m = self.aligned(exp)?.checked_add(other.aligned(exp)?)?;
        Some(Self::normalized(m, exp))
    }

    pub fn checked_mul(self, other: Self) -> Option<Self> {
        let m = self.mantissa.checked_mul(other.mantissa)?;
        let exp = self.exp.checked_add(other.exp)?;
        if exp > 62 {
            return None;
        }
        Some(Self::normalized(m, exp))
    }

    pub fn checked_cmp(self, other: Self) -> Option<Ordering> {
        let exp = self.exp.max(other.exp);
        Some(self.aligned(exp)?.cmp(&other.aligned(exp)?))
    }

    pub fn is_zero(self) -> bool {
        self.mantissa.is_zero()
    }
}
