//! Fixed-point arbitrary-precision reals.
//!
//! A [`Real`] is a big-integer mantissa `m` with a binary scale `b` and a
//! semantic decimal precision `digits`: the value is `m / 2^b`, trusted to
//! about `digits` significant decimal digits. Every binary operation
//! propagates the minimum of the operand precisions; small integers made with
//! [`Real::from_i64`] / [`Real::one`] are exact (sentinel precision) and do
//! not lower the precision of what they touch.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

use crate::numkernel::Rational;

/// Sentinel precision for exact integers.
pub const EXACT: u32 = u32::MAX;

/// Guard bits kept beyond the requested decimal precision.
const GUARD_BITS: u64 = 64;

/// Binary scale used for `digits` decimal digits of precision.
pub fn bits_for(digits: u32) -> u64 {
    if digits == EXACT {
        return 0;
    }
    // 3322/1000 > log2(10)
    (digits as u64) * 3322 / 1000 + GUARD_BITS
}

#[derive(Clone, PartialEq, Eq)]
pub struct Real {
    mant: BigInt,
    bits: u64,
    digits: u32,
}

fn rescale(mant: &BigInt, from_bits: u64, to_bits: u64) -> BigInt {
    match to_bits.cmp(&from_bits) {
        Ordering::Equal => mant.clone(),
        Ordering::Greater => mant << (to_bits - from_bits),
        Ordering::Less => mant >> (from_bits - to_bits),
    }
}

impl Real {
    pub fn zero(digits: u32) -> Real {
        Real { mant: BigInt::zero(), bits: bits_for(digits), digits }
    }

    pub fn one() -> Real {
        Real::from_i64(1)
    }

    /// Exact small integer; combines with anything without lowering precision.
    pub fn from_i64(v: i64) -> Real {
        Real { mant: BigInt::from(v), bits: 0, digits: EXACT }
    }

    pub fn from_bigint(v: BigInt) -> Real {
        Real { mant: v, bits: 0, digits: EXACT }
    }

    pub fn from_rational(r: &Rational, digits: u32) -> Real {
        assert!(digits != EXACT, "rational conversion needs a finite precision");
        let bits = bits_for(digits);
        let num = r.numer() << bits;
        Real { mant: num / r.denom(), bits, digits }
    }

    /// Decompose an `f64` exactly (used only for coarse seeds).
    pub fn from_f64(v: f64, digits: u32) -> Real {
        assert!(v.is_finite());
        let (m, e) = {
            let bits = v.to_bits();
            let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
            let exp = ((bits >> 52) & 0x7ff) as i64;
            let frac = bits & ((1u64 << 52) - 1);
            if exp == 0 {
                (sign * frac as i64, -1074i64)
            } else {
                (sign * (frac | (1 << 52)) as i64, exp - 1075)
            }
        };
        // Rescale before the (possibly negative) power-of-two shift; shifting an
        // exact integer mantissa right would silently drop fraction bits.
        let r = Real { mant: BigInt::from(m), bits: 0, digits: EXACT };
        r.with_digits(digits).mul_pow2(e)
    }

    /// Raw fixed-point mantissa; the value is `mantissa / 2^scale_bits`.
    pub(crate) fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub(crate) fn scale_bits(&self) -> u64 {
        self.bits
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    /// Re-target the value at `digits` precision (truncating or padding).
    pub fn with_digits(&self, digits: u32) -> Real {
        let bits = bits_for(digits);
        Real { mant: rescale(&self.mant, self.bits, bits), bits, digits }
    }

    fn result_digits(&self, other: &Real) -> u32 {
        self.digits.min(other.digits)
    }

    pub fn neg(&self) -> Real {
        Real { mant: -&self.mant, bits: self.bits, digits: self.digits }
    }

    pub fn abs(&self) -> Real {
        Real { mant: self.mant.abs(), bits: self.bits, digits: self.digits }
    }

    pub fn add(&self, other: &Real) -> Real {
        let digits = self.result_digits(other);
        let bits = if digits == EXACT { self.bits.max(other.bits) } else { bits_for(digits) };
        let mant = rescale(&self.mant, self.bits, bits) + rescale(&other.mant, other.bits, bits);
        Real { mant, bits, digits }
    }

    pub fn sub(&self, other: &Real) -> Real {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Real) -> Real {
        let digits = self.result_digits(other);
        let bits = if digits == EXACT { self.bits + other.bits } else { bits_for(digits) };
        let prod = &self.mant * &other.mant;
        let mant = rescale(&prod, self.bits + other.bits, bits);
        Real { mant, bits, digits }
    }

    pub fn div(&self, other: &Real) -> Real {
        assert!(!other.mant.is_zero(), "division by zero Real");
        if self.mant.is_zero() {
            return self.clone();
        }
        let digits = self.result_digits(other);
        if digits == EXACT {
            // both operands exact: allowed only when the quotient is exact too
            let num = rescale(&self.mant, self.bits, self.bits + other.bits);
            let (q, r) = num.div_rem(&other.mant);
            assert!(r.is_zero(), "exact division with a remainder");
            return Real { mant: q, bits: self.bits, digits };
        }
        let bits = bits_for(digits);
        // self/other = (m1/2^b1)/(m2/2^b2) = (m1/m2) * 2^(b2-b1); target scale 2^bits.
        let shift = bits + other.bits;
        let num = rescale(&self.mant, self.bits, shift);
        Real { mant: num / &other.mant, bits, digits }
    }

    pub fn div_u32(&self, k: u32) -> Real {
        assert!(k != 0);
        if self.mant.is_zero() {
            return self.clone();
        }
        if self.digits == EXACT {
            let (q, r) = self.mant.div_rem(&BigInt::from(k));
            assert!(r.is_zero(), "exact division with a remainder");
            return Real { mant: q, bits: self.bits, digits: self.digits };
        }
        Real { mant: &self.mant / BigInt::from(k), bits: self.bits, digits: self.digits }
    }

    pub fn mul_i64(&self, k: i64) -> Real {
        Real { mant: &self.mant * BigInt::from(k), bits: self.bits, digits: self.digits }
    }

    /// Multiply by 2^k (exact).
    pub fn mul_pow2(&self, k: i64) -> Real {
        let mant = if k >= 0 { &self.mant << (k as u64) } else { &self.mant >> ((-k) as u64) };
        Real { mant, bits: self.bits, digits: self.digits }
    }

    /// Integer square root based square root; requires a nonnegative value.
    pub fn sqrt(&self) -> Real {
        assert!(!self.mant.is_negative(), "sqrt of negative Real");
        assert!(self.digits != EXACT, "sqrt needs a finite-precision value");
        let bits = bits_for(self.digits);
        let shifted = rescale(&self.mant, self.bits, 2 * bits);
        Real { mant: shifted.sqrt(), bits, digits: self.digits }
    }

    pub fn powi(&self, mut e: u32) -> Real {
        let mut base = self.clone();
        let mut acc = Real::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn cmp_value(&self, other: &Real) -> Ordering {
        let bits = self.bits.max(other.bits);
        rescale(&self.mant, self.bits, bits).cmp(&rescale(&other.mant, other.bits, bits))
    }

    /// Nearest integer.
    pub fn nint(&self) -> BigInt {
        if self.bits == 0 {
            return self.mant.clone();
        }
        let half = BigInt::from(1) << (self.bits - 1);
        (&self.mant + half) >> self.bits
    }

    pub fn floor_bigint(&self) -> BigInt {
        // BigInt >> is an arithmetic shift, i.e. floor division by 2^bits.
        &self.mant >> self.bits
    }

    pub fn to_f64(&self) -> f64 {
        let b = self.mant.bits();
        if b == 0 {
            return 0.0;
        }
        // Keep 64 significant bits to stay in f64 range.
        let drop = b.saturating_sub(64);
        let top = (&self.mant >> drop).to_f64().unwrap_or(0.0);
        top * 2f64.powi((drop as i64 - self.bits as i64) as i32)
    }

    /// floor(log10 |x|) estimated from bit lengths; `None` for zero.
    pub fn approx_log10(&self) -> Option<i64> {
        if self.mant.is_zero() {
            return None;
        }
        let l2 = self.mant.bits() as i64 - 1 - self.bits as i64;
        // log10 = log2 * 0.30103 (approximate; only used for magnitude checks)
        Some((l2 as f64 * std::f64::consts::LOG10_2).floor() as i64)
    }

    /// True if |self| < 10^(-k).
    pub fn below_pow10(&self, k: i64) -> bool {
        match self.approx_log10() {
            None => true,
            Some(l) => l < -k,
        }
    }

    /// Decimal rendering with `sig` significant digits.
    pub fn to_decimal_string(&self, sig: u32) -> String {
        if self.mant.is_zero() {
            return "0".to_string();
        }
        let sig = sig.max(1) as i64;
        let neg = self.mant.is_negative();
        let a = self.mant.abs();
        // e10 ~ floor(log10 |x|)
        let mut e10 = ((a.bits() as i64 - 1 - self.bits as i64) as f64
            * std::f64::consts::LOG10_2)
            .floor() as i64;
        let scaled = |e10: i64| -> BigInt {
            // round(|x| * 10^(sig-1-e10))
            let p = sig - 1 - e10;
            let (num, den) = if p >= 0 {
                (&a * BigInt::from(10u32).pow(p as u32), BigInt::from(1))
            } else {
                (a.clone(), BigInt::from(10u32).pow((-p) as u32))
            };
            // value = num/den / 2^bits
            let shifted = num >> self.bits.saturating_sub(1);
            let d2 = if self.bits == 0 { den } else { den << 1 };
            (shifted + (&d2 >> 1)) / d2
        };
        let mut m = scaled(e10);
        let lo = BigInt::from(10u32).pow((sig - 1) as u32);
        let hi = &lo * 10;
        while m >= hi {
            e10 += 1;
            m = scaled(e10);
        }
        while m < lo && !m.is_zero() {
            e10 -= 1;
            m = scaled(e10);
        }
        let ds = m.to_string();
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&ds[..1]);
        if ds.len() > 1 {
            out.push('.');
            out.push_str(&ds[1..]);
        }
        out.push('e');
        out.push_str(&e10.to_string());
        out
    }

    fn working(&self, extra: u32) -> Real {
        assert!(self.digits != EXACT, "elementary function needs a finite precision");
        self.with_digits(self.digits + extra)
    }

    /// e^x by argument reduction (powers of two and ln 2) plus Taylor series.
    pub fn exp(&self) -> Real {
        let d = self.digits;
        let w = self.working(24);
        let wd = w.digits;
        if w.is_zero() {
            return Real::one().with_digits(d);
        }
        let ln2 = super::constants::const_ln2(wd);
        let n = w.div(&ln2).nint();
        let n_i64 = n.to_i64().expect("exp argument out of range");
        let r = w.sub(&Real::from_bigint(n).mul(&ln2));
        // r in [-ln2/2, ln2/2]; halve k more times for fast Taylor decay.
        let k: u32 = 16;
        let small = r.mul_pow2(-(k as i64));
        let mut term = Real::one().with_digits(wd);
        let mut acc = Real::one().with_digits(wd);
        let mut j = 1u32;
        loop {
            term = term.mul(&small).div_u32(j);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
            if term.abs().below_pow10(wd as i64 + 2) {
                break;
            }
            j += 1;
        }
        for _ in 0..k {
            acc = acc.mul(&acc);
        }
        acc.mul_pow2(n_i64).with_digits(d)
    }

    /// Natural log for positive values: scale into [1,2), then atanh series.
    pub fn ln(&self) -> Real {
        assert!(self.is_positive(), "ln of non-positive Real");
        let d = self.digits;
        let w = self.working(20);
        let wd = w.digits;
        let m = w.mant.bits() as i64 - 1 - w.bits as i64; // floor(log2 x)
        let y = w.mul_pow2(-m); // in [1, 2)
        let one = Real::one();
        let u = y.sub(&one).div(&y.add(&one));
        let u2 = u.mul(&u);
        let mut term = u.clone();
        let mut acc = u.clone();
        let mut j = 1u32;
        loop {
            term = term.mul(&u2);
            let add = term.div_u32(2 * j + 1);
            if add.is_zero() {
                break;
            }
            acc = acc.add(&add);
            if add.abs().below_pow10(wd as i64 + 2) {
                break;
            }
            j += 1;
        }
        let ln_y = acc.mul_pow2(1);
        let ln2 = super::constants::const_ln2(wd);
        ln_y.add(&Real::from_i64(m).mul(&ln2)).with_digits(d)
    }

    /// sin for |x| ≲ 4 (callers reduce the argument).
    pub fn sin(&self) -> Real {
        let d = self.digits;
        let w = self.working(16);
        let wd = w.digits;
        let x2 = w.mul(&w).neg();
        let mut term = w.clone();
        let mut acc = w.clone();
        let mut j = 1u32;
        loop {
            term = term.mul(&x2).div_u32(2 * j).div_u32(2 * j + 1);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
            if term.abs().below_pow10(wd as i64 + 2) {
                break;
            }
            j += 1;
        }
        acc.with_digits(d)
    }

    /// cos for |x| ≲ 4 (callers reduce the argument).
    pub fn cos(&self) -> Real {
        let d = self.digits;
        let w = self.working(16);
        let wd = w.digits;
        let x2 = w.mul(&w).neg();
        let mut term = Real::one().with_digits(wd);
        let mut acc = term.clone();
        let mut j = 1u32;
        loop {
            term = term.mul(&x2).div_u32(2 * j - 1).div_u32(2 * j);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
            if term.abs().below_pow10(wd as i64 + 2) {
                break;
            }
            j += 1;
        }
        acc.with_digits(d)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.digits == EXACT {
            write!(f, "Real({})", self.mant)
        } else {
            write!(f, "Real({} @{}d)", self.to_decimal_string(self.digits.min(12)), self.digits)
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.digits == EXACT {
            write!(f, "{}", self.mant)
        } else {
            write!(f, "{}", self.to_decimal_string(self.digits))
        }
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Real) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

macro_rules! real_binop {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl std::ops::$trait for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real::$imp(self, rhs)
            }
        }
        impl std::ops::$trait for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                Real::$imp(&self, &rhs)
            }
        }
    };
}

real_binop!(Add, add, add);
real_binop!(Sub, sub, sub);
real_binop!(Mul, mul, mul);
real_binop!(Div, div, div);

impl std::ops::Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::neg(self)
    }
}
