//! Polynomials in a deformation parameter, truncated at degree four.
//!
//! The solver deforms the exponent of a power-series ansatz by `eps` and reads
//! off five solution layers from the coefficients of `eps^0 .. eps^4`; nothing
//! above degree four is ever needed, so the arithmetic truncates there.

use super::coeff::Coeff;

pub const EPS_LEN: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct EpsPoly<S> {
    pub c: [S; EPS_LEN],
}

impl<S: Coeff> EpsPoly<S> {
    pub fn constant(v: S) -> Self {
        let mut c = std::array::from_fn(|_| S::zero());
        c[0] = v;
        EpsPoly { c }
    }

    /// The affine element `shift + eps`.
    pub fn shifted_eps(shift: &S) -> Self {
        let mut c = std::array::from_fn(|_| S::zero());
        c[0] = shift.clone();
        c[1] = S::one();
        EpsPoly { c }
    }

    pub fn coeff(&self, i: usize) -> &S {
        &self.c[i]
    }
}

impl<S: Coeff> Coeff for EpsPoly<S> {
    fn zero() -> Self {
        EpsPoly { c: std::array::from_fn(|_| S::zero()) }
    }

    fn one() -> Self {
        Self::constant(S::one())
    }

    fn from_i64(v: i64) -> Self {
        Self::constant(S::from_i64(v))
    }

    fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    fn add(&self, other: &Self) -> Self {
        EpsPoly { c: std::array::from_fn(|i| self.c[i].add(&other.c[i])) }
    }

    fn sub(&self, other: &Self) -> Self {
        EpsPoly { c: std::array::from_fn(|i| self.c[i].sub(&other.c[i])) }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut c: [S; EPS_LEN] = std::array::from_fn(|_| S::zero());
        for i in 0..EPS_LEN {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..EPS_LEN - i {
                if other.c[j].is_zero() {
                    continue;
                }
                c[i + j] = c[i + j].add(&self.c[i].mul(&other.c[j]));
            }
        }
        EpsPoly { c }
    }

    fn neg(&self) -> Self {
        EpsPoly { c: std::array::from_fn(|i| self.c[i].neg()) }
    }

    /// Truncated multiplicative inverse; the constant term must be nonzero.
    fn inv(&self) -> Self {
        assert!(!self.c[0].is_zero(), "inverse needs a unit constant term");
        let a0 = self.c[0].inv();
        let mut b: [S; EPS_LEN] = std::array::from_fn(|_| S::zero());
        b[0] = a0.clone();
        for k in 1..EPS_LEN {
            let mut acc = S::zero();
            for j in 1..=k {
                acc = acc.add(&self.c[j].mul(&b[k - j]));
            }
            b[k] = acc.mul(&a0).neg();
        }
        EpsPoly { c: b }
    }

    fn div_i64(&self, k: i64) -> Self {
        EpsPoly { c: std::array::from_fn(|i| self.c[i].div_i64(k)) }
    }
}
