//! Dense truncated power series over a generic coefficient ring.
//!
//! A series of length `n` represents the first `n` coefficients (degrees
//! `0..n`) and all operations return results truncated to what the inputs
//! determine. Multiplication switches from schoolbook to Karatsuba above a
//! size threshold; composition uses a block (baby-step / giant-step) scheme;
//! reversion is a Newton iteration with order doubling.

mod coeff;
mod eps;

pub use coeff::{Coeff, CoeffMagnitude};
pub use eps::{EpsPoly, EPS_LEN};

/// Above this many coefficients, multiplication recurses via Karatsuba.
const KARATSUBA_CUTOFF: usize = 128;
/// At or below this order, composition uses plain Horner evaluation.
const COMPOSE_HORNER_CUTOFF: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries<S> {
    c: Vec<S>,
}

fn school_full<S: Coeff>(a: &[S], b: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            out[i + j] = out[i + j].add(&ai.mul(bj));
        }
    }
    out
}

fn add_slices<S: Coeff>(a: &[S], b: &[S]) -> Vec<S> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x.add(y),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        };
        out.push(x);
    }
    out
}

/// Full product of two coefficient slices (degree sum preserved).
fn kara_full<S: Coeff>(a: &[S], b: &[S]) -> Vec<S> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len().min(b.len()) <= KARATSUBA_CUTOFF / 2 {
        return school_full(a, b);
    }
    let h = a.len().max(b.len()).div_ceil(2);
    let (a0, a1) = a.split_at(a.len().min(h));
    let (b0, b1) = b.split_at(b.len().min(h));
    let z0 = kara_full(a0, b0);
    let z2 = kara_full(a1, b1);
    let z1 = kara_full(&add_slices(a0, a1), &add_slices(b0, b1));
    let mut out = vec![S::zero(); a.len() + b.len() - 1];
    for (k, v) in z0.iter().enumerate() {
        out[k] = out[k].add(v);
    }
    for (k, v) in z2.iter().enumerate() {
        out[2 * h + k] = out[2 * h + k].add(v);
    }
    // middle = z1 - z0 - z2 placed at offset h
    for (k, v) in z1.into_iter().enumerate() {
        let mut m = v;
        if let Some(x) = z0.get(k) {
            m = m.sub(x);
        }
        if let Some(x) = z2.get(k) {
            m = m.sub(x);
        }
        if !m.is_zero() {
            out[h + k] = out[h + k].add(&m);
        }
    }
    out
}

impl<S: Coeff> PowerSeries<S> {
    pub fn from_coeffs(c: Vec<S>) -> Self {
        assert!(!c.is_empty(), "series needs at least one coefficient");
        PowerSeries { c }
    }

    pub fn zero(order: usize) -> Self {
        PowerSeries { c: vec![S::zero(); order.max(1)] }
    }

    pub fn one(order: usize) -> Self {
        Self::monomial(S::one(), 0, order)
    }

    /// The identity series `z`.
    pub fn identity(order: usize) -> Self {
        Self::monomial(S::one(), 1, order)
    }

    /// `coef * z^k`, truncated at `order` coefficients.
    pub fn monomial(coef: S, k: usize, order: usize) -> Self {
        let mut c = vec![S::zero(); order.max(k + 1)];
        c[k] = coef;
        PowerSeries { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeff(&self, i: usize) -> &S {
        &self.c[i]
    }

    pub fn coeffs(&self) -> &[S] {
        &self.c
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.c
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    pub fn truncated(&self, n: usize) -> Self {
        assert!(n >= 1 && n <= self.c.len());
        PowerSeries { c: self.c[..n].to_vec() }
    }

    /// Truncate or zero-pad to exactly `n` coefficients.
    pub fn resized(&self, n: usize) -> Self {
        assert!(n >= 1);
        let mut c = self.c.clone();
        c.resize(n, S::zero());
        PowerSeries { c }
    }

    pub fn map<T: Coeff>(&self, f: impl Fn(&S) -> T) -> PowerSeries<T> {
        PowerSeries { c: self.c.iter().map(f).collect() }
    }

    pub fn neg(&self) -> Self {
        self.map(|x| x.neg())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.len().min(other.len());
        PowerSeries { c: (0..n).map(|i| self.c[i].add(&other.c[i])).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.len().min(other.len());
        PowerSeries { c: (0..n).map(|i| self.c[i].sub(&other.c[i])).collect() }
    }

    pub fn mul_scalar(&self, s: &S) -> Self {
        self.map(|x| x.mul(s))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.len().min(other.len());
        if n <= KARATSUBA_CUTOFF {
            let mut out = vec![S::zero(); n];
            for (i, ai) in self.c[..n].iter().enumerate() {
                if ai.is_zero() {
                    continue;
                }
                for (j, bj) in other.c[..n - i].iter().enumerate() {
                    if bj.is_zero() {
                        continue;
                    }
                    out[i + j] = out[i + j].add(&ai.mul(bj));
                }
            }
            return PowerSeries { c: out };
        }
        let mut full = kara_full(&self.c[..n], &other.c[..n]);
        full.truncate(n);
        PowerSeries { c: full }
    }

    /// Quotient by a series with invertible constant term.
    pub fn div(&self, other: &Self) -> Self {
        assert!(!other.c[0].is_zero(), "series division needs a unit constant term");
        let n = self.len().min(other.len());
        let b0 = other.c[0].inv();
        let mut q: Vec<S> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.c[k].clone();
            for (j, qj) in q.iter().enumerate() {
                if qj.is_zero() || other.c[k - j].is_zero() {
                    continue;
                }
                acc = acc.sub(&qj.mul(&other.c[k - j]));
            }
            q.push(acc.mul(&b0));
        }
        PowerSeries { c: q }
    }

    /// Multiplicative inverse `1/self`.
    pub fn recip(&self) -> Self {
        Self::one(self.len()).div(self)
    }

    /// `z d/dz`: coefficient `n` scaled by `n`.
    pub fn theta(&self) -> Self {
        PowerSeries {
            c: self.c.iter().enumerate().map(|(i, x)| x.mul_i64(i as i64)).collect(),
        }
    }

    /// Ordinary derivative (one coefficient shorter).
    pub fn derivative(&self) -> Self {
        assert!(self.len() >= 2, "derivative needs at least two coefficients");
        PowerSeries {
            c: self.c[1..].iter().enumerate().map(|(i, x)| x.mul_i64(i as i64 + 1)).collect(),
        }
    }

    /// Antiderivative with zero constant term (one coefficient longer).
    pub fn integrate(&self) -> Self {
        let mut c = Vec::with_capacity(self.len() + 1);
        c.push(S::zero());
        for (i, x) in self.c.iter().enumerate() {
            c.push(x.div_i64(i as i64 + 1));
        }
        PowerSeries { c }
    }

    /// Multiply by `z^k` (gains `k` known coefficients).
    pub fn shift_up(&self, k: usize) -> Self {
        let mut c = vec![S::zero(); k];
        c.extend_from_slice(&self.c);
        PowerSeries { c }
    }

    /// Divide by `z^k`; the first `k` coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Self {
        assert!(self.c.len() > k);
        assert!(self.c[..k].iter().all(|x| x.is_zero()), "shift_down of nonzero low coefficients");
        PowerSeries { c: self.c[k..].to_vec() }
    }

    /// Substitute `z -> a z`.
    pub fn scale_var(&self, a: &S) -> Self {
        let mut pw = S::one();
        let mut c = Vec::with_capacity(self.len());
        for x in &self.c {
            c.push(x.mul(&pw));
            pw = pw.mul(a);
        }
        PowerSeries { c }
    }

    /// Exponential of a series with zero constant term.
    pub fn exp(&self) -> Self {
        assert!(self.c[0].is_zero(), "exp needs zero constant term");
        let n = self.len();
        let mut e = vec![S::zero(); n];
        e[0] = S::one();
        // e' = s' e  =>  n e_n = sum_{k=1}^{n} k s_k e_{n-k}
        for m in 1..n {
            let mut acc = S::zero();
            for k in 1..=m {
                if self.c[k].is_zero() || e[m - k].is_zero() {
                    continue;
                }
                acc = acc.add(&self.c[k].mul_i64(k as i64).mul(&e[m - k]));
            }
            e[m] = acc.div_i64(m as i64);
        }
        PowerSeries { c: e }
    }

    /// Logarithm of a series with constant term one.
    pub fn log(&self) -> Self {
        assert!(self.c[0] == S::one(), "log needs constant term one");
        if self.len() == 1 {
            return Self::zero(1);
        }
        // log s = integral of s'/s
        self.derivative().div(&self.truncated(self.len() - 1)).integrate()
    }

    /// Composition `self(g)`; `g` must have zero constant term.
    pub fn compose(&self, g: &Self) -> Self {
        assert!(g.c[0].is_zero(), "composition needs zero constant term");
        let n = self.len().min(g.len());
        let f = &self.c[..n];
        let g = g.truncated(n);
        if n <= COMPOSE_HORNER_CUTOFF {
            let mut r = Self::monomial(f[n - 1].clone(), 0, n);
            for k in (0..n - 1).rev() {
                r = r.mul(&g);
                r.c[0] = r.c[0].add(&f[k]);
            }
            return r;
        }
        // Baby-step giant-step: f = sum_j B_j(z) z^{jm} with deg B_j < m.
        let m = (n as f64).sqrt().ceil() as usize;
        let mut powers: Vec<PowerSeries<S>> = Vec::with_capacity(m);
        powers.push(Self::one(n));
        powers.push(g.clone());
        for k in 2..m {
            let half = &powers[k / 2];
            let p = if k % 2 == 0 { half.mul(half) } else { half.mul(half).mul(&g) };
            powers.push(p);
        }
        let giant = if m >= 2 {
            let half = &powers[m / 2];
            if m % 2 == 0 {
                half.mul(half)
            } else {
                half.mul(half).mul(&g)
            }
        } else {
            g.clone()
        };
        let eval_block = |lo: usize| -> PowerSeries<S> {
            let mut acc = Self::zero(n);
            for i in 0..m {
                let Some(fc) = f.get(lo + i) else { break };
                if fc.is_zero() {
                    continue;
                }
                let p = if i == 0 { None } else { Some(&powers[i]) };
                for k in 0..n {
                    let term = match p {
                        None => {
                            if k == 0 {
                                fc.clone()
                            } else {
                                continue;
                            }
                        }
                        Some(p) => {
                            if p.c[k].is_zero() {
                                continue;
                            } else {
                                p.c[k].mul(fc)
                            }
                        }
                    };
                    acc.c[k] = acc.c[k].add(&term);
                }
            }
            acc
        };
        let blocks = n.div_ceil(m);
        let mut r = eval_block((blocks - 1) * m);
        for j in (0..blocks - 1).rev() {
            r = r.mul(&giant);
            r = r.add(&eval_block(j * m));
        }
        r
    }

    /// Compositional inverse of a series with valuation one; Newton iteration
    /// doubling the trusted order each step.
    pub fn revert(&self) -> Self {
        let n = self.len();
        assert!(self.c[0].is_zero(), "reversion needs zero constant term");
        assert!(!self.c[1].is_zero(), "reversion needs invertible linear term");
        let c1_inv = self.c[1].inv();
        let mut g = PowerSeries { c: vec![S::zero(), c1_inv] };
        if n <= 2 {
            return g.resized(n);
        }
        let mut trusted = 2usize;
        while trusted < n {
            let w = (2 * trusted).min(n);
            let gw = g.resized(w);
            let fg = self.resized(w).compose(&gw);
            let h = fg.sub(&Self::identity(w)); // valuation >= trusted
            // f'(g) = (f o g)' / g'
            let fp = fg.derivative().div(&gw.derivative()).resized(w);
            let corr = h.div(&fp);
            g = gw.sub(&corr);
            trusted = w;
        }
        g
    }

    /// Horner evaluation at a point.
    pub fn eval(&self, x: &S) -> S {
        let mut r = self.c[self.len() - 1].clone();
        for k in (0..self.len() - 1).rev() {
            r = r.mul(x).add(&self.c[k]);
        }
        r
    }
}

impl<S: CoeffMagnitude> PowerSeries<S> {
    /// Evaluate at `x` and estimate the truncation tail from the decay of the
    /// last kept terms. Returns `(value, tail_log10)`; `tail_log10 = None`
    /// means no geometric decay was observed (the tail cannot be bounded).
    pub fn eval_with_tail(&self, x: &S) -> (S, Option<i64>) {
        let v = self.eval(x);
        let n = self.len();
        if n < 12 {
            return (v, None);
        }
        let lx = match x.magnitude_log10f() {
            Some(l) => l,
            // evaluation at zero: the tail vanishes identically
            None => return (v, Some(-9_000)),
        };
        // log10 magnitudes of c_k x^k for the last `probe` terms, kept in
        // log space so sub-resolution magnitudes stay meaningful
        let probe = 10usize;
        let mut mags: Vec<(usize, f64)> = Vec::with_capacity(probe);
        for k in n - probe..n {
            if let Some(lc) = self.c[k].magnitude_log10f() {
                mags.push((k, lc + k as f64 * lx));
            }
        }
        if mags.len() < 2 {
            // (almost) all probed coefficients vanish exactly: polynomial tail
            return (v, Some(mags.first().map_or(-9_000.0, |m| m.1).ceil() as i64));
        }
        // largest per-index growth rate between consecutive nonzero terms
        let worst = mags
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0) as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        let last = mags.last().unwrap().1;
        if worst >= -0.05 {
            return (v, None);
        }
        // geometric bound: last * r / (1 - r) with log10 r = worst
        let r = 10f64.powf(worst);
        let tail = last + worst - (1.0 - r).log10();
        (v, Some(tail.ceil() as i64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{rat, Rational, Real};
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn ps(v: &[i64]) -> PowerSeries<Rational> {
        PowerSeries::from_coeffs(v.iter().map(|&x| rat(x, 1)).collect())
    }

    #[test]
    fn mul_small_known() {
        let a = ps(&[1, 1, 0, 0]); // 1 + z
        let b = ps(&[1, -1, 0, 0]); // 1 - z
        assert_eq!(a.mul(&b), ps(&[1, 0, -1, 0]));
    }

    #[test]
    fn karatsuba_matches_schoolbook() {
        // exercise the Karatsuba path (order > cutoff) against the direct sum
        let n = 300usize;
        let a: Vec<Rational> = (0..n).map(|i| rat((i * i % 37) as i64 - 18, 1 + (i % 5) as i64)).collect();
        let b: Vec<Rational> = (0..n).map(|i| rat((i * 7 % 23) as i64 - 11, 1 + (i % 3) as i64)).collect();
        let fa = PowerSeries::from_coeffs(a.clone());
        let fb = PowerSeries::from_coeffs(b.clone());
        let fast = fa.mul(&fb);
        let mut slow = vec![Rational::zero(); n];
        for k in 0..n {
            for i in 0..=k {
                slow[k] = slow[k].add(&a[i].mul(&b[k - i]));
            }
        }
        assert_eq!(fast.coeffs(), &slow[..]);
    }

    #[test]
    fn division_roundtrip() {
        let a = ps(&[3, 1, 4, 1, 5, 9, 2, 6]);
        let b = ps(&[2, 7, 1, 8, 2, 8, 1, 8]);
        let q = a.div(&b);
        assert_eq!(q.mul(&b), a);
    }

    #[test]
    fn exp_is_exponential_series() {
        let z = PowerSeries::<Rational>::identity(8);
        let e = z.exp();
        let mut fact = rat(1, 1);
        for k in 0..8 {
            if k > 0 {
                fact = fact * rat(k as i64, 1);
            }
            assert_eq!(e.coeff(k), &fact.recip());
        }
    }

    #[test]
    fn log_exp_roundtrip() {
        let s = ps(&[0, 2, -1, 3, 0, 1, -2, 5]);
        assert_eq!(s.exp().log(), s);
    }

    #[test]
    fn theta_and_integrate() {
        let s = ps(&[5, 1, 2, 3]);
        assert_eq!(s.theta(), ps(&[0, 1, 4, 9]));
        let d = s.derivative();
        assert_eq!(d, ps(&[1, 4, 9]));
        let back = d.integrate();
        assert_eq!(back, ps(&[0, 1, 2, 3]));
    }

    #[test]
    fn compose_known_small() {
        // f = 1/(1-z), g = z + z^2: f(g) = 1 + (z+z^2) + (z+z^2)^2 + ...
        let f = ps(&[1, 1, 1, 1, 1]);
        let g = ps(&[0, 1, 1, 0, 0]);
        let fg = f.compose(&g);
        // 1 + z + 2z^2 + 3z^3 + 5z^4 (Fibonacci)
        assert_eq!(fg, ps(&[1, 1, 2, 3, 5]));
    }

    #[test]
    fn compose_block_path_matches_horner() {
        // force the block path with order > cutoff and compare against Horner
        let n = 60usize;
        let f: Vec<Rational> = (0..n).map(|i| rat((i as i64 % 7) - 3, 1)).collect();
        let g: Vec<Rational> = std::iter::once(rat(0, 1))
            .chain((1..n).map(|i| rat(((i * 3) as i64 % 11) - 5, 2)))
            .collect();
        let fs = PowerSeries::from_coeffs(f.clone());
        let gs = PowerSeries::from_coeffs(g);
        let fast = fs.compose(&gs);
        // reference: plain Horner
        let mut r = PowerSeries::monomial(f[n - 1].clone(), 0, n);
        for k in (0..n - 1).rev() {
            r = r.mul(&gs);
            let c0 = r.coeff(0).add(&f[k]);
            r = PowerSeries::from_coeffs(
                std::iter::once(c0).chain(r.coeffs()[1..].iter().cloned()).collect(),
            );
        }
        assert_eq!(fast, r);
    }

    /// Reference reversion by the Lagrange inversion formula:
    /// `n [q^n] g = [z^(n-1)] (z / f)^n`.
    fn revert_lagrange(f: &PowerSeries<Rational>) -> PowerSeries<Rational> {
        let n = f.len();
        let base = f.shift_down(1).resized(n).recip(); // z/f as a series in z
        let mut out = vec![Rational::zero(); n];
        let mut pw = PowerSeries::one(n);
        for k in 1..n {
            pw = pw.mul(&base); // (z/f)^k
            out[k] = pw.coeff(k - 1).div_i64(k as i64);
        }
        PowerSeries::from_coeffs(out)
    }

    #[test]
    fn revert_known_series() {
        // f = z + z^2 reverts to q - q^2 + 2q^3 - 5q^4 + 14q^5 (signed Catalan)
        let f = ps(&[0, 1, 1, 0, 0, 0]);
        let g = f.revert();
        assert_eq!(g, ps(&[0, 1, -1, 2, -5, 14]));
        // and f(g) = identity
        assert_eq!(f.compose(&g), PowerSeries::identity(6));
    }

    #[test]
    fn revert_matches_lagrange_reference() {
        let f = ps(&[0, 3, -2, 5, 1, -4, 2, 0, 7, -1]);
        assert_eq!(f.revert(), revert_lagrange(&f));
    }

    #[test]
    fn eval_partial_geometric() {
        let s = ps(&[1, 1, 1, 1, 1]);
        let v = s.eval(&rat(1, 2));
        assert_eq!(v, rat(31, 16));
    }

    #[test]
    fn eval_with_tail_bounds_geometric_series() {
        let n = 64;
        let ones = PowerSeries::from_coeffs(vec![Real::one(); n]);
        let x = Real::from_rational(&rat(1, 10), 40);
        let (v, tail) = ones.eval_with_tail(&x);
        // sum = 10/9; tail after 64 terms ~ 1e-64
        let target = Real::from_rational(&rat(10, 9), 40);
        assert!(v.sub(&target).abs().below_pow10(38));
        // True tail is ~1e-64; the estimate may bottom out at the fixed-point
        // resolution (~1e-59 at 40 digits) which is still a valid upper bound.
        let t = tail.expect("geometric decay must be detected");
        assert!(t <= -50 && t >= -80, "tail estimate {t}");
    }

    #[test]
    fn eval_with_tail_rejects_divergence() {
        let n = 64;
        let ones = PowerSeries::from_coeffs(vec![Real::one(); n]);
        let x = Real::from_rational(&rat(3, 2), 40);
        let (_, tail) = ones.eval_with_tail(&x);
        assert!(tail.is_none());
    }

    #[test]
    fn scale_var_powers() {
        let s = ps(&[1, 1, 1, 1]);
        let t = s.scale_var(&rat(2, 1));
        assert_eq!(t, ps(&[1, 2, 4, 8]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn distributivity(a in proptest::collection::vec(-9i64..10, 6),
                          b in proptest::collection::vec(-9i64..10, 6),
                          c in proptest::collection::vec(-9i64..10, 6)) {
            let (fa, fb, fc) = (ps(&a), ps(&b), ps(&c));
            prop_assert_eq!(fa.add(&fb).mul(&fc), fa.mul(&fc).add(&fb.mul(&fc)));
        }

        #[test]
        fn revert_roundtrip(tail in proptest::collection::vec(-5i64..6, 6)) {
            let mut v = vec![rat(0, 1), rat(1, 1)];
            v.extend(tail.iter().map(|&x| rat(x, 1)));
            let f = PowerSeries::from_coeffs(v);
            let g = f.revert();
            let n = f.len();
            prop_assert_eq!(f.compose(&g), PowerSeries::identity(n));
            prop_assert_eq!(g.compose(&f), PowerSeries::identity(n));
        }

        #[test]
        fn division_inverts_multiplication(a in proptest::collection::vec(-9i64..10, 8),
                                           b in proptest::collection::vec(-9i64..10, 8)) {
            prop_assume!(b[0] != 0);
            let (fa, fb) = (ps(&a), ps(&b));
            prop_assert_eq!(fa.mul(&fb).div(&fb), fa);
        }
    }

    #[test]
    fn bigint_coefficient_growth_is_exact() {
        // integrate/differentiate with large exact denominators
        let s = PowerSeries::from_coeffs(
            (0..20).map(|i| Rational::new(BigInt::from(1), BigInt::from(i + 1))).collect::<Vec<_>>(),
        );
        let round = s.integrate().derivative();
        assert_eq!(round, s);
    }
}
