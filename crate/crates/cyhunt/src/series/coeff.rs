//! Coefficient abstraction shared by the exact and numeric pipelines.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::numkernel::{Rational, Real};

/// Ring of series coefficients. Implementations: exact rationals, fixed-point
/// reals, and epsilon-truncated polynomials over either.
///
/// `zero`/`one`/`from_i64` produce exact identity-like elements that never
/// lower the precision of what they combine with; values that carry precision
/// context enter a pipeline through lift closures, not through this trait.
pub trait Coeff: Clone + PartialEq + std::fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse; panics on zero (callers check).
    fn inv(&self) -> Self;
    fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }
    fn mul_i64(&self, k: i64) -> Self {
        self.mul(&Self::from_i64(k))
    }
    /// Exact division by a nonzero machine integer.
    fn div_i64(&self, k: i64) -> Self;
}

impl Coeff for Rational {
    fn zero() -> Self {
        <Rational as Zero>::zero()
    }
    fn one() -> Self {
        <Rational as One>::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from(BigInt::from(v))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        assert!(!Zero::is_zero(self), "inverse of zero rational");
        self.recip()
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn div_i64(&self, k: i64) -> Self {
        self / Rational::from(BigInt::from(k))
    }
}

impl Coeff for Real {
    fn zero() -> Self {
        Real::from_i64(0)
    }
    fn one() -> Self {
        Real::one()
    }
    fn from_i64(v: i64) -> Self {
        Real::from_i64(v)
    }
    fn is_zero(&self) -> bool {
        Real::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        Real::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Real::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Real::mul(self, other)
    }
    fn neg(&self) -> Self {
        Real::neg(self)
    }
    fn inv(&self) -> Self {
        Real::one().div(self)
    }
    fn div(&self, other: &Self) -> Self {
        Real::div(self, other)
    }
    fn div_i64(&self, k: i64) -> Self {
        let (k, neg) = if k < 0 { (-k, true) } else { (k, false) };
        let v = Real::div_u32(self, u32::try_from(k).expect("divisor out of range"));
        if neg {
            v.neg()
        } else {
            v
        }
    }
}

/// Magnitude hook used by numeric tail estimates; exact types report `None`.
pub trait CoeffMagnitude: Coeff {
    /// Approximate log10 of |self|; `None` when zero.
    fn magnitude_log10(&self) -> Option<i64> {
        self.magnitude_log10f().map(|l| l.floor() as i64)
    }

    /// Fractional log10 of |self|, sharp to double accuracy; `None` when
    /// zero.  Keeping this in log space avoids fixed-point underflow when
    /// magnitudes far below the working resolution are compared.
    fn magnitude_log10f(&self) -> Option<f64>;
}

/// log2 |x| with a fractional part taken from the top bits.
fn bigint_log2(x: &num_bigint::BigInt) -> Option<f64> {
    use num_traits::ToPrimitive;
    let a = x.magnitude();
    let b = a.bits();
    if b == 0 {
        return None;
    }
    let top = if b > 53 { (a >> (b - 53)).to_f64() } else { a.to_f64() };
    let top = top.unwrap_or(1.0);
    Some(top.log2() + b.saturating_sub(53) as f64)
}

impl CoeffMagnitude for Real {
    fn magnitude_log10f(&self) -> Option<f64> {
        let l2 = bigint_log2(self.mantissa())? - self.scale_bits() as f64;
        Some(l2 * std::f64::consts::LOG10_2)
    }
}

impl CoeffMagnitude for Rational {
    fn magnitude_log10f(&self) -> Option<f64> {
        let n = bigint_log2(self.numer())?;
        let d = bigint_log2(self.denom()).unwrap_or(0.0);
        Some((n - d) * std::f64::consts::LOG10_2)
    }
}
