//! Number kernel: exact rationals, quadratic surds, and fixed-point reals.
//!
//! Everything downstream (power series, the differential-equation solver, the
//! integer-relation search) is generic over a coefficient type; this module
//! supplies the three concrete scalar domains and the transcendental
//! constants they need.

pub mod constants;
pub mod real;

pub use real::{bits_for, Real, EXACT};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used throughout the exact pipeline.
pub type Rational = num_rational::BigRational;

/// Shorthand rational constructor from machine integers.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parse "p/q" or "p" into a rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt =
        n.parse().map_err(|_| Error::Parse(format!("bad rational numerator: {n:?}")))?;
    let den: BigInt =
        d.parse().map_err(|_| Error::Parse(format!("bad rational denominator: {d:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in rational: {s:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Render a rational as "p/q" ("p" when q = 1).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact rational square root, if the argument is a perfect square.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let sn = num_integer::Roots::sqrt(r.numer());
    let sd = num_integer::Roots::sqrt(r.denom());
    (&sn * &sn == *r.numer() && &sd * &sd == *r.denom()).then(|| Rational::new(sn, sd))
}

/// Exact square root of a non-negative rational as a rational or a pure surd.
pub fn sqrt_rational(r: &Rational) -> Option<Scalar> {
    if r.is_negative() {
        return None;
    }
    if r.is_zero() {
        return Some(Scalar::Rat(Rational::zero()));
    }
    // sqrt(p/q) = sqrt(p q) / q
    let (s, d) = squarefree_decompose(&(r.numer() * r.denom()));
    let coef = Rational::new(s, r.denom().clone());
    if d.is_one() {
        Some(Scalar::Rat(coef))
    } else {
        Some(Scalar::Quad(QuadExt { rat: Rational::zero(), coef, disc: d }))
    }
}

/// Largest square divisor split: n = s^2 * f with f squarefree (n > 0).
pub fn squarefree_decompose(n: &BigInt) -> (BigInt, BigInt) {
    assert!(n.is_positive(), "squarefree decomposition needs a positive integer");
    let mut rem = n.clone();
    let mut square = BigInt::one();
    let mut p = BigInt::from(2);
    // Trial division; the integers appearing in discriminants are small.
    while &p * &p <= rem {
        let p2 = &p * &p;
        while (&rem % &p2).is_zero() {
            rem /= &p2;
            square *= &p;
        }
        p += 1;
    }
    (square, rem)
}

/// Exact element of a real quadratic field: `rat + coef * sqrt(disc)`,
/// with `disc` a squarefree integer > 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadExt {
    pub rat: Rational,
    pub coef: Rational,
    pub disc: BigInt,
}

impl QuadExt {
    pub fn new(rat: Rational, coef: Rational, disc: BigInt) -> QuadExt {
        let (s, f) = squarefree_decompose(&disc);
        QuadExt { rat, coef: coef * Rational::from(s), disc: f }
    }

    pub fn is_rational(&self) -> bool {
        self.coef.is_zero()
    }

    fn check_same_field(&self, other: &QuadExt) {
        assert!(
            self.is_rational() || other.is_rational() || self.disc == other.disc,
            "mixed quadratic fields: sqrt({}) vs sqrt({})",
            self.disc,
            other.disc
        );
    }

    fn joint_disc(&self, other: &QuadExt) -> BigInt {
        if self.is_rational() {
            other.disc.clone()
        } else {
            self.disc.clone()
        }
    }

    pub fn add(&self, other: &QuadExt) -> QuadExt {
        self.check_same_field(other);
        QuadExt {
            rat: &self.rat + &other.rat,
            coef: &self.coef + &other.coef,
            disc: self.joint_disc(other),
        }
    }

    pub fn mul(&self, other: &QuadExt) -> QuadExt {
        self.check_same_field(other);
        let disc = self.joint_disc(other);
        let d = Rational::from(disc.clone());
        QuadExt {
            rat: &self.rat * &other.rat + &self.coef * &other.coef * d,
            coef: &self.rat * &other.coef + &self.coef * &other.rat,
            disc,
        }
    }

    pub fn neg(&self) -> QuadExt {
        QuadExt { rat: -&self.rat, coef: -&self.coef, disc: self.disc.clone() }
    }

    pub fn sub(&self, other: &QuadExt) -> QuadExt {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &Rational) -> QuadExt {
        QuadExt { rat: &self.rat * r, coef: &self.coef * r, disc: self.disc.clone() }
    }

    /// True when the value at the positive square root is negative.
    pub fn is_negative_value(&self) -> bool {
        let d = Rational::from(self.disc.clone());
        let c2d = &self.coef * &self.coef * d;
        let r2 = &self.rat * &self.rat;
        if self.rat.is_negative() {
            self.coef.is_negative() || r2 > c2d
        } else {
            self.coef.is_negative() && c2d > r2
        }
    }

    /// Exact square root within the same quadratic field, when one exists.
    /// Returns the branch with positive numeric value.
    pub fn sqrt(&self) -> Option<QuadExt> {
        if self.is_negative_value() {
            return None;
        }
        if self.coef.is_zero() {
            // rational radicand: root is rational or a pure surd of this field
            return match sqrt_rational(&self.rat)? {
                Scalar::Rat(r) => {
                    Some(QuadExt { rat: r, coef: Rational::zero(), disc: self.disc.clone() })
                }
                Scalar::Quad(q) if q.disc == self.disc => Some(q),
                _ => None,
            };
        }
        // (x + y sqrt(d))^2 = rat + coef sqrt(d): solve x^2 + d y^2 = rat,
        // 2 x y = coef; x^2 = (rat +- sqrt(norm)) / 2 must be a rational square
        let m = rational_sqrt(&self.norm())?;
        let two = Rational::from(BigInt::from(2));
        for pm in [&m, &(-&m)] {
            let x2 = (&self.rat + pm) / &two;
            if let Some(x) = rational_sqrt(&x2) {
                if x.is_zero() {
                    continue;
                }
                let y = &self.coef / (&two * &x);
                let mut root = QuadExt { rat: x, coef: y, disc: self.disc.clone() };
                if root.is_negative_value() {
                    root = root.neg();
                }
                if root.mul(&root) == *self {
                    return Some(root);
                }
            }
        }
        None
    }

    /// Conjugate `rat - coef * sqrt(disc)`.
    pub fn conj(&self) -> QuadExt {
        QuadExt { rat: self.rat.clone(), coef: -&self.coef, disc: self.disc.clone() }
    }

    /// Field norm `rat^2 - coef^2 * disc` (a rational).
    pub fn norm(&self) -> Rational {
        &self.rat * &self.rat - &self.coef * &self.coef * Rational::from(self.disc.clone())
    }

    pub fn inv(&self) -> QuadExt {
        let n = self.norm();
        assert!(!n.is_zero(), "inverse of zero quadratic element");
        let c = self.conj();
        QuadExt { rat: c.rat / &n, coef: c.coef / n, disc: self.disc.clone() }
    }

    /// Numeric value at the positive square root.
    pub fn value(&self, digits: u32) -> Real {
        let r = Real::from_rational(&self.rat, digits);
        if self.coef.is_zero() {
            return r;
        }
        let s = constants::sqrt_int(&self.disc, digits);
        r.add(&Real::from_rational(&self.coef, digits).mul(&s))
    }
}

/// Exact scalar: rational, or an element of a real quadratic field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scalar {
    Rat(Rational),
    Quad(QuadExt),
}

impl Scalar {
    pub fn value(&self, digits: u32) -> Real {
        match self {
            Scalar::Rat(r) => Real::from_rational(r, digits),
            Scalar::Quad(q) => q.value(digits),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Scalar::Rat(r) => format_rational(r),
            Scalar::Quad(q) => {
                if q.coef.is_zero() {
                    format_rational(&q.rat)
                } else if q.rat.is_zero() {
                    format!("{}*sqrt({})", format_rational(&q.coef), q.disc)
                } else {
                    format!("{} + {}*sqrt({})", format_rational(&q.rat), format_rational(&q.coef), q.disc)
                }
            }
        }
    }
}

/// Greatest common divisor of a slice of integers (0 for an empty/zero slice).
pub fn gcd_all(vals: &[BigInt]) -> BigInt {
    let mut g = BigInt::zero();
    for v in vals {
        g = g.gcd(v);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parse_and_format() {
        let r = parse_rational("-3/12").unwrap();
        assert_eq!(format_rational(&r), "-1/4");
        assert_eq!(format_rational(&parse_rational("7").unwrap()), "7");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn squarefree_split() {
        let (s, f) = squarefree_decompose(&BigInt::from(16385));
        // 16385 = 5 * 29 * 113 is already squarefree
        assert_eq!(s, BigInt::from(1));
        assert_eq!(f, BigInt::from(16385));
        let (s, f) = squarefree_decompose(&BigInt::from(448));
        // 448 = 8^2 * 7
        assert_eq!(s, BigInt::from(8));
        assert_eq!(f, BigInt::from(7));
    }

    #[test]
    fn quad_arithmetic_and_norm() {
        // (1 + sqrt(5)) * (1 - sqrt(5)) = -4
        let a = QuadExt::new(rat(1, 1), rat(1, 1), BigInt::from(5));
        let p = a.mul(&a.conj());
        assert!(p.coef.is_zero());
        assert_eq!(p.rat, rat(-4, 1));
        assert_eq!(a.norm(), rat(-4, 1));
        let inv = a.inv();
        let one = a.mul(&inv);
        assert_eq!(one.rat, rat(1, 1));
        assert!(one.coef.is_zero());
    }

    #[test]
    fn quad_normalizes_square_part() {
        // sqrt(448) = 8 sqrt(7)
        let a = QuadExt::new(rat(0, 1), rat(1, 1), BigInt::from(448));
        assert_eq!(a.disc, BigInt::from(7));
        assert_eq!(a.coef, rat(8, 1));
    }

    #[test]
    fn quad_value_golden_ratio() {
        // (1 + sqrt(5))/2 = 1.6180339887...
        let phi = QuadExt::new(rat(1, 2), rat(1, 2), BigInt::from(5));
        let v = phi.value(40);
        let s = v.to_decimal_string(11);
        assert!(s.starts_with("1.6180339887"), "{s}");
    }

    #[test]
    fn quad_value_small_combination() {
        // 56 - 25 sqrt(5) = 0.09830...  (shows up as a series argument)
        let x = QuadExt::new(rat(56, 1), rat(-25, 1), BigInt::from(5));
        let v = x.value(40);
        let s = v.to_decimal_string(6);
        assert!(s.starts_with("9.8300") && s.ends_with("e-2"), "{s}");
    }
}
