//! Ordinary differential operators in theta form and their Frobenius solutions.
//!
//! An operator is stored as `sum_m z^m Q_m(theta)` with `theta = z d/dz`.
//! For operators with maximal unipotent structure at the origin
//! (`Q_0 = theta^r`), the epsilon-deformed recurrence produces the full
//! Frobenius basis in one pass: deform the exponent, solve
//! `Q_0(n + eps) A_n(eps) = -sum_m Q_m(n - m + eps) A_{n-m}(eps)` with
//! `A_0 = 1`, and read the five solution layers off the powers of `eps`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numkernel::{format_rational, parse_rational, rat, Rational};
use crate::series::{Coeff, EpsPoly, PowerSeries, EPS_LEN};

/// Differential operator `sum_m z^m Q_m(theta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaOperator<S> {
    order: usize,
    /// `m -> Q_m` as ascending coefficient lists of length `order + 1`.
    terms: BTreeMap<usize, Vec<S>>,
}

/// Multiply an ascending-coefficient polynomial by `(x + a)`.
fn poly_mul_linear<S: Coeff>(p: &[S], a: &S) -> Vec<S> {
    let mut out = vec![S::zero(); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i] = out[i].add(&c.mul(a));
        out[i + 1] = out[i + 1].add(c);
    }
    out
}

fn poly_eval_eps<S: Coeff>(p: &[S], at: &EpsPoly<S>) -> EpsPoly<S> {
    let mut r = EpsPoly::zero();
    for c in p.iter().rev() {
        r = r.mul(at);
        r.c[0] = r.c[0].add(c);
    }
    r
}

impl<S: Coeff> ThetaOperator<S> {
    pub fn new(order: usize, terms: BTreeMap<usize, Vec<S>>) -> Self {
        assert!(order >= 1);
        let mut t = BTreeMap::new();
        for (m, mut q) in terms {
            assert!(q.len() <= order + 1, "Q_{m} exceeds the operator order");
            q.resize(order + 1, S::zero());
            if q.iter().any(|c| !c.is_zero()) {
                t.insert(m, q);
            }
        }
        assert!(t.contains_key(&0), "operator needs a Q_0 term");
        ThetaOperator { order, terms: t }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<usize, Vec<S>> {
        &self.terms
    }

    /// Largest power of `z` appearing.
    pub fn z_degree(&self) -> usize {
        *self.terms.keys().next_back().unwrap()
    }

    /// True when the indicial polynomial at the origin is exactly `theta^r`,
    /// i.e. zero is an `r`-fold exponent (maximal unipotent structure).
    pub fn is_mum(&self) -> bool {
        // difference-based so realized (finite-precision) coefficients pass
        let q0 = &self.terms[&0];
        q0[self.order].sub(&S::one()).is_zero() && q0[..self.order].iter().all(|c| c.is_zero())
    }

    pub fn map<T: Coeff>(&self, f: impl Fn(&S) -> T) -> ThetaOperator<T> {
        ThetaOperator {
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(m, q)| (*m, q.iter().map(&f).collect()))
                .collect(),
        }
    }

    /// Power-series coefficients `A_n` of the analytic solution at the origin
    /// (the `eps^0` layer only); requires maximal unipotent structure.
    pub fn solution_coefficients(&self, n_terms: usize) -> PowerSeries<S> {
        let basis = frobenius_solve(self, n_terms);
        basis.layer(0).clone()
    }
}

/// The five Frobenius solution layers: `layer(i)` holds the coefficient
/// series of `eps^i`, so layer 0 is the analytic solution and layer `i` the
/// i-th logarithmic companion (coefficients only, logs factored out).
#[derive(Clone, Debug)]
pub struct FrobeniusBasis<S> {
    layers: Vec<PowerSeries<S>>,
    op_order: usize,
}

impl<S: Coeff> FrobeniusBasis<S> {
    pub fn layer(&self, i: usize) -> &PowerSeries<S> {
        &self.layers[i]
    }

    /// Number of series coefficients carried per layer.
    pub fn n_terms(&self) -> usize {
        self.layers[0].len()
    }

    /// Order of the operator the basis was solved from (4 or 5).
    pub fn operator_order(&self) -> usize {
        self.op_order
    }
}

/// Solve the deformed recurrence and split the solution into layers.
pub fn frobenius_solve<S: Coeff>(op: &ThetaOperator<S>, n_terms: usize) -> FrobeniusBasis<S> {
    assert!(op.is_mum(), "Frobenius basis needs maximal unipotent structure");
    assert!(n_terms >= 2);
    let mut a: Vec<EpsPoly<S>> = Vec::with_capacity(n_terms);
    // seed with the operator's own leading unit so realized (finite-precision)
    // coefficient types keep their precision through the whole bundle
    a.push(EpsPoly::constant(op.terms[&0][op.order()].clone()));
    for n in 1..n_terms {
        let mut rhs = EpsPoly::zero();
        for (m, q) in op.terms.range(1..=n) {
            let shift = EpsPoly::shifted_eps(&S::from_i64((n - m) as i64));
            let qv = poly_eval_eps(q, &shift);
            rhs = rhs.sub(&qv.mul(&a[n - m]));
        }
        // Q_0(n + eps) = (n + eps)^r: invertible since n >= 1
        let q0 = poly_eval_eps(&op.terms[&0], &EpsPoly::shifted_eps(&S::from_i64(n as i64)));
        a.push(rhs.mul(&q0.inv()));
    }
    let layers = (0..EPS_LEN)
        .map(|i| PowerSeries::from_coeffs(a.iter().map(|p| p.coeff(i).clone()).collect()))
        .collect();
    FrobeniusBasis { layers, op_order: op.order() }
}

/// One hypergeometric case: the parameter pair, the integrality scale, and
/// the closed binomial-product form of its coefficient sequence.
#[derive(Clone, Debug)]
pub struct CaseSpec {
    pub id: String,
    pub s1: Rational,
    pub s2: Rational,
    pub rho: Rational,
    /// Sequence-language text for `A_n` (the binomial-product column).
    pub binomial_form: String,
}

impl CaseSpec {
    pub fn new(id: &str, s1: Rational, s2: Rational, rho: i64, binomial_form: &str) -> CaseSpec {
        assert!(s1 > rat(0, 1) && s1 < rat(1, 1) && s2 > rat(0, 1) && s2 < rat(1, 1));
        assert!(rho > 0);
        CaseSpec {
            id: id.into(),
            s1,
            s2,
            rho: rat(rho, 1),
            binomial_form: binomial_form.into(),
        }
    }

    pub fn operator(&self) -> ThetaOperator<Rational> {
        hypergeometric_operator(&self.s1, &self.s2, &self.rho)
    }
}

/// The fifth-order hypergeometric operator
/// `theta^5 - rho z (theta + 1/2)(theta + s1)(theta + 1 - s1)(theta + s2)(theta + 1 - s2)`.
pub fn hypergeometric_operator(s1: &Rational, s2: &Rational, rho: &Rational) -> ThetaOperator<Rational> {
    let one = rat(1, 1);
    let half = Rational::new(1.into(), 2.into());
    let shifts = [half, s1.clone(), &one - s1, s2.clone(), &one - s2];
    let mut q1 = vec![-rho];
    for a in &shifts {
        q1 = poly_mul_linear(&q1, a);
    }
    let mut q0 = vec![rat(0, 1); 6];
    q0[5] = rat(1, 1);
    let mut terms = BTreeMap::new();
    terms.insert(0, q0);
    terms.insert(1, q1);
    ThetaOperator::new(5, terms)
}

// ---------------------------------------------------------------------------
// Exact polynomial / rational-function arithmetic for the shape conditions.
// ---------------------------------------------------------------------------

/// Dense univariate polynomial over the rationals (ascending coefficients).
#[derive(Clone, Debug, PartialEq)]
pub struct PolyQ {
    c: Vec<Rational>,
}

impl PolyQ {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.len() > 1 && c.last().map_or(false, |x| Zero::is_zero(x)) {
            c.pop();
        }
        if c.is_empty() {
            c.push(rat(0, 1));
        }
        PolyQ { c }
    }

    pub fn zero() -> Self {
        PolyQ { c: vec![rat(0, 1)] }
    }

    pub fn constant(r: Rational) -> Self {
        PolyQ::new(vec![r])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.len() == 1 && Zero::is_zero(&self.c[0])
    }

    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.c.len().max(other.c.len());
        let mut c = vec![rat(0, 1); n];
        for (i, x) in self.c.iter().enumerate() {
            c[i] += x;
        }
        for (i, x) in other.c.iter().enumerate() {
            c[i] += x;
        }
        PolyQ::new(c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        PolyQ { c: self.c.iter().map(|x| -x).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return PolyQ::zero();
        }
        let mut c = vec![rat(0, 1); self.c.len() + other.c.len() - 1];
        for (i, x) in self.c.iter().enumerate() {
            if Zero::is_zero(x) {
                continue;
            }
            for (j, y) in other.c.iter().enumerate() {
                if !Zero::is_zero(y) {
                    c[i + j] += x * y;
                }
            }
        }
        PolyQ::new(c)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        PolyQ::new(self.c.iter().map(|x| x * r).collect())
    }

    pub fn derivative(&self) -> Self {
        if self.c.len() == 1 {
            return PolyQ::zero();
        }
        PolyQ::new(
            self.c[1..]
                .iter()
                .enumerate()
                .map(|(i, x)| x * Rational::from(num_bigint::BigInt::from(i as i64 + 1)))
                .collect(),
        )
    }

    /// Remainder-producing division: returns (quotient, remainder).
    pub fn div_rem(&self, other: &Self) -> (Self, Self) {
        assert!(!other.is_zero(), "polynomial division by zero");
        let mut rem = self.c.clone();
        let dn = other.degree();
        let lead = &other.c[dn];
        if rem.len() <= dn {
            return (PolyQ::zero(), self.clone());
        }
        let mut quot = vec![rat(0, 1); rem.len() - dn];
        for k in (dn..rem.len()).rev() {
            let q = &rem[k] / lead;
            if Zero::is_zero(&q) {
                continue;
            }
            for (j, oc) in other.c.iter().enumerate() {
                let idx = k - dn + j;
                let sub = oc * &q;
                rem[idx] -= sub;
            }
            quot[k - dn] = q;
        }
        (PolyQ::new(quot), PolyQ::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let lead = a.c.last().unwrap().clone();
        a.scale(&lead.recip())
    }

    /// Expand as a power series (the polynomial itself, zero padded).
    pub fn series(&self, order: usize) -> PowerSeries<Rational> {
        PowerSeries::from_coeffs({
            let mut v = self.c.clone();
            v.resize(order.max(v.len()), rat(0, 1));
            v.truncate(order);
            v
        })
    }
}

/// Reduced ratio of two rational polynomials.
#[derive(Clone, Debug)]
pub struct RatFun {
    pub num: PolyQ,
    pub den: PolyQ,
}

impl RatFun {
    pub fn new(num: PolyQ, den: PolyQ) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            return RatFun { num: PolyQ::zero(), den: PolyQ::constant(rat(1, 1)) };
        }
        let g = num.gcd(&den);
        let (n, rn) = num.div_rem(&g);
        let (d, rd) = den.div_rem(&g);
        debug_assert!(rn.is_zero() && rd.is_zero());
        // normalize: monic denominator
        let lead = d.c.last().unwrap().clone();
        RatFun { num: n.scale(&lead.recip()), den: d.scale(&lead.recip()) }
    }

    pub fn zero() -> Self {
        RatFun { num: PolyQ::zero(), den: PolyQ::constant(rat(1, 1)) }
    }

    pub fn from_poly(p: PolyQ) -> Self {
        RatFun { num: p, den: PolyQ::constant(rat(1, 1)) }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        RatFun::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&RatFun { num: other.num.neg(), den: other.den.clone() })
    }

    pub fn mul(&self, other: &Self) -> Self {
        RatFun::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        RatFun { num: self.num.scale(r), den: self.den.clone() }
    }

    pub fn derivative(&self) -> Self {
        RatFun::new(
            self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative())),
            self.den.mul(&self.den),
        )
    }

    pub fn equals(&self, other: &Self) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }

    /// Power-series expansion at the origin; the denominator must not vanish there.
    pub fn series(&self, order: usize) -> PowerSeries<Rational> {
        assert!(!Zero::is_zero(&self.den.c[0]), "expansion at a pole");
        self.num.series(order).div(&self.den.series(order))
    }
}

/// Stirling numbers of the second kind up to row `n`.
fn stirling2_table(n: usize) -> Vec<Vec<num_bigint::BigInt>> {
    use num_bigint::BigInt;
    let mut s = vec![vec![BigInt::zero(); n + 1]; n + 1];
    s[0][0] = BigInt::one();
    for j in 1..=n {
        for k in 1..=j {
            let t = &s[j - 1][k] * BigInt::from(k as u64) + &s[j - 1][k - 1];
            s[j][k] = t;
        }
    }
    s
}

impl ThetaOperator<Rational> {
    /// Convert to `sum_k p_k(z) (d/dz)^k` using
    /// `theta^j = sum_k S(j,k) z^k (d/dz)^k`.
    pub fn dz_form(&self) -> Vec<PolyQ> {
        let r = self.order;
        let s2 = stirling2_table(r);
        let mut p: Vec<Vec<Rational>> = vec![Vec::new(); r + 1];
        for (m, q) in &self.terms {
            for (j, qc) in q.iter().enumerate() {
                if Zero::is_zero(qc) {
                    continue;
                }
                for k in 0..=j {
                    if Zero::is_zero(&s2[j][k]) {
                        continue;
                    }
                    let e = m + k; // z-exponent
                    if p[k].len() <= e {
                        p[k].resize(e + 1, rat(0, 1));
                    }
                    p[k][e] += qc * Rational::from(s2[j][k].clone());
                }
            }
        }
        p.into_iter()
            .map(|c| if c.is_empty() { PolyQ::zero() } else { PolyQ::new(c) })
            .collect()
    }

    /// Monic coefficient `c_i = p_i / p_r` of the normalized equation
    /// `y^(r) + c_{r-1} y^(r-1) + ... + c_0 y = 0`.
    pub fn monic_coefficient(&self, i: usize) -> RatFun {
        let p = self.dz_form();
        RatFun::new(p[i].clone(), p[self.order].clone())
    }
}

/// Fourth-order shape test:
/// `c1 = 1/2 c2 c3 - 1/8 c3^3 + c2' - 3/4 c3 c3' - 1/2 c3''`.
pub fn check_order4_condition(op: &ThetaOperator<Rational>) -> bool {
    assert_eq!(op.order(), 4, "this condition applies to fourth-order operators");
    let c3 = op.monic_coefficient(3);
    let c2 = op.monic_coefficient(2);
    let c1 = op.monic_coefficient(1);
    let c3p = c3.derivative();
    let rhs = c2
        .mul(&c3)
        .scale(&Rational::new(1.into(), 2.into()))
        .sub(&c3.mul(&c3).mul(&c3).scale(&Rational::new(1.into(), 8.into())))
        .add(&c2.derivative())
        .sub(&c3.mul(&c3p).scale(&Rational::new(3.into(), 4.into())))
        .sub(&c3p.derivative().scale(&Rational::new(1.into(), 2.into())));
    c1.equals(&rhs)
}

/// Fifth-order shape test:
/// `d2 = 3/5 d3 d4 - 4/25 d4^3 + 3/2 d3' - 6/5 d4 d4' - d4''`.
pub fn check_order5_condition(op: &ThetaOperator<Rational>) -> bool {
    assert_eq!(op.order(), 5, "this condition applies to fifth-order operators");
    let d4 = op.monic_coefficient(4);
    let d3 = op.monic_coefficient(3);
    let d2 = op.monic_coefficient(2);
    let d4p = d4.derivative();
    let rhs = d3
        .mul(&d4)
        .scale(&Rational::new(3.into(), 5.into()))
        .sub(&d4.mul(&d4).mul(&d4).scale(&Rational::new(4.into(), 25.into())))
        .add(&d3.derivative().scale(&Rational::new(3.into(), 2.into())))
        .sub(&d4.mul(&d4p).scale(&Rational::new(6.into(), 5.into())))
        .sub(&d4p.derivative());
    d2.equals(&rhs)
}

// ---------------------------------------------------------------------------
// Text format: one header line, then one line per z-power.
// ---------------------------------------------------------------------------

/// Render as:
/// ```text
/// order 5
/// 0: 0 0 0 0 0 1
/// 1: -1024 ...
/// ```
pub fn format_operator(op: &ThetaOperator<Rational>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "order {}", op.order());
    for (m, q) in op.terms() {
        let row: Vec<String> = q.iter().map(format_rational).collect();
        let _ = writeln!(out, "{m}: {}", row.join(" "));
    }
    out
}

/// Parse the format produced by [`format_operator`]; `#` starts a comment.
pub fn parse_operator(text: &str) -> Result<ThetaOperator<Rational>> {
    let mut order: Option<usize> = None;
    let mut terms = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("order") {
            let r: usize = rest
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad order", lineno + 1)))?;
            order = Some(r);
            continue;
        }
        let (head, tail) = line
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("line {}: expected 'm: coeffs'", lineno + 1)))?;
        let m: usize = head
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad z-power", lineno + 1)))?;
        let coeffs: Result<Vec<Rational>> =
            tail.split_whitespace().map(parse_rational).collect();
        terms.insert(m, coeffs?);
    }
    let order = order.ok_or_else(|| Error::Parse("missing 'order r' header".into()))?;
    if !terms.contains_key(&0) {
        return Err(Error::Parse("operator text lacks the z^0 term".into()));
    }
    for (m, q) in &terms {
        if q.len() > order + 1 {
            return Err(Error::Parse(format!("term {m} has more than order+1 coefficients")));
        }
    }
    Ok(ThetaOperator::new(order, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::rat;

    fn op_3t() -> ThetaOperator<Rational> {
        hypergeometric_operator(&rat(1, 2), &rat(1, 2), &rat(1024, 1))
    }

    #[test]
    fn hypergeometric_is_mum_and_degree_one() {
        let op = op_3t();
        assert!(op.is_mum());
        assert_eq!(op.order(), 5);
        assert_eq!(op.z_degree(), 1);
    }

    #[test]
    fn analytic_solution_is_central_binomial_fifth_power() {
        let op = op_3t();
        let y0 = op.solution_coefficients(6);
        // A_n = C(2n, n)^5: 1, 2^5, 6^5, 20^5, 70^5, 252^5
        let expect = [1i64, 32, 7776, 3200000, 1680700000, 1016255020032];
        for (n, e) in expect.iter().enumerate() {
            assert_eq!(y0.coeff(n), &rat(*e, 1), "n = {n}");
        }
    }

    #[test]
    fn deformed_layers_match_hand_computation() {
        // First-order values of all five layers for the central-binomial case,
        // from expanding 1024 (eps + 1/2)^5 / (1 + eps)^5 by hand.
        let basis = frobenius_solve(&op_3t(), 3);
        assert_eq!(basis.layer(0).coeff(1), &rat(32, 1));
        assert_eq!(basis.layer(1).coeff(1), &rat(160, 1));
        assert_eq!(basis.layer(2).coeff(1), &rat(160, 1));
        assert_eq!(basis.layer(3).coeff(1), &rat(-160, 1));
        assert_eq!(basis.layer(4).coeff(1), &rat(0, 1));
    }

    #[test]
    fn first_coefficients_across_parameter_table() {
        // A_1 = rho * (1/2) s1 (1-s1) s2 (1-s2), spot-checked against the
        // binomial products the operators encode.
        let cases: [(i64, i64, i64, i64, i64, i64); 4] = [
            (1, 5, 2, 5, 12500, 240),
            (1, 10, 3, 10, 3200000, 30240),
            (1, 2, 1, 2, 1024, 32),
            (1, 6, 1, 3, 46656, 720),
        ];
        for (n1, d1, n2, d2, rho, a1) in cases {
            let op = hypergeometric_operator(&rat(n1, d1), &rat(n2, d2), &rat(rho, 1));
            let y0 = op.solution_coefficients(2);
            assert_eq!(y0.coeff(1), &rat(a1, 1), "rho = {rho}");
        }
    }

    #[test]
    fn fifth_order_condition_holds_for_hypergeometric() {
        assert!(check_order5_condition(&op_3t()));
        let op2 = hypergeometric_operator(&rat(1, 5), &rat(2, 5), &rat(12500, 1));
        assert!(check_order5_condition(&op2));
    }

    #[test]
    fn fifth_order_condition_fails_for_generic_operator() {
        // replace the z-term with (theta + 1/3)^5: breaks the shape identity
        let mut q1 = vec![rat(-2916, 1)];
        for _ in 0..5 {
            q1 = poly_mul_linear(&q1, &rat(1, 3));
        }
        let mut q0 = vec![rat(0, 1); 6];
        q0[5] = rat(1, 1);
        let mut terms = BTreeMap::new();
        terms.insert(0, q0);
        terms.insert(1, q1);
        let op = ThetaOperator::new(5, terms);
        assert!(!check_order5_condition(&op));
    }

    #[test]
    fn fourth_order_condition_known_cases() {
        // Quintic-type operator: theta^4 - 5^5 z prod (theta + i/5) satisfies it.
        let mut q1 = vec![rat(-3125, 1)];
        for i in 1..=4 {
            q1 = poly_mul_linear(&q1, &rat(i, 5));
        }
        let mut q0 = vec![rat(0, 1); 5];
        q0[4] = rat(1, 1);
        let mut terms = BTreeMap::new();
        terms.insert(0, q0.clone());
        terms.insert(1, q1);
        let quintic = ThetaOperator::new(4, terms);
        assert!(check_order4_condition(&quintic));

        // theta(theta-1)(theta-2)(theta-3) = z^4 d^4/dz^4: trivially satisfied
        let ff = PolyQ::new(vec![rat(0, 1), rat(1, 1)])
            .mul(&PolyQ::new(vec![rat(-1, 1), rat(1, 1)]))
            .mul(&PolyQ::new(vec![rat(-2, 1), rat(1, 1)]))
            .mul(&PolyQ::new(vec![rat(-3, 1), rat(1, 1)]));
        let mut terms = BTreeMap::new();
        terms.insert(0, ff.coeffs().to_vec());
        let d4 = ThetaOperator::new(4, terms);
        assert!(check_order4_condition(&d4));

        // z^4 y'''' + z^4 y' = 0 has c1 = 1 but vanishing c2, c3: fails
        let mut terms = BTreeMap::new();
        terms.insert(0, ff.coeffs().to_vec());
        terms.insert(3, vec![rat(0, 1), rat(1, 1)]);
        let bad = ThetaOperator::new(4, terms);
        assert!(!check_order4_condition(&bad));
    }

    #[test]
    fn dz_conversion_small_identity() {
        // theta^2 = z^2 D^2 + z D
        let mut terms = BTreeMap::new();
        terms.insert(0, vec![rat(0, 1), rat(0, 1), rat(1, 1)]);
        let op = ThetaOperator::new(2, terms);
        let p = op.dz_form();
        assert_eq!(p[2], PolyQ::new(vec![rat(0, 1), rat(0, 1), rat(1, 1)]));
        assert_eq!(p[1], PolyQ::new(vec![rat(0, 1), rat(1, 1)]));
        assert!(p[0].is_zero());
    }

    #[test]
    fn ratfun_reduction_and_calculus() {
        // (z^2 - 1)/(z - 1) reduces to z + 1
        let num = PolyQ::new(vec![rat(-1, 1), rat(0, 1), rat(1, 1)]);
        let den = PolyQ::new(vec![rat(-1, 1), rat(1, 1)]);
        let f = RatFun::new(num, den);
        assert_eq!(f.num, PolyQ::new(vec![rat(1, 1), rat(1, 1)]));
        assert_eq!(f.den, PolyQ::constant(rat(1, 1)));
        // d/dz (1/(1-z)) = 1/(1-z)^2 expands to 1 + 2z + 3z^2 + ...
        let g = RatFun::new(
            PolyQ::constant(rat(1, 1)),
            PolyQ::new(vec![rat(1, 1), rat(-1, 1)]),
        );
        let gp = g.derivative().series(5);
        for k in 0..5 {
            assert_eq!(gp.coeff(k), &rat(k as i64 + 1, 1));
        }
    }

    #[test]
    fn operator_text_roundtrip() {
        let op = op_3t();
        let text = format_operator(&op);
        let back = parse_operator(&text).unwrap();
        assert_eq!(op, back);
        // comments and blank lines are tolerated
        let with_noise = format!("# fifth-order test operator\n\n{text}\n# end\n");
        assert_eq!(parse_operator(&with_noise).unwrap(), op);
        // malformed inputs are rejected
        assert!(parse_operator("0: 1 2 3").is_err());
        assert!(parse_operator("order 5\n1: 1").is_err());
        assert!(parse_operator("order x\n0: 1").is_err());
    }
}
