//! Mirror map and prepotential data built from a Frobenius basis.
//!
//! From the solution layers `a_0 .. a_4` of a maximal-unipotent operator this
//! module forms the companion `b`-series, the wronskian quotients `H0, H1,
//! H2`, the mirror map `q(z) = z exp(H2)` together with its reversion
//! `z(q)`, the prepotential remainder `T(q)` (a log-free power series with
//! `T(0) = 0`), the coupling `K(q) = 1 - theta^3 T`, and the instanton
//! numbers of its Lambert expansion.  A numeric root finder locates the
//! singular point where `dz/dq = 0`.
//!
//! Fifth-order bases use the wronskian route: `T = H2^3/6 - H0` in the
//! z-chart.  Fourth-order bases (pullback operators) use the quotient route
//! `T = (b3 - b1 b2 + b1^3/3)/2` with `b_i = a_i/a_0`; both describe the
//! same `T(q)` whenever the operators share a chart, which gives a strong
//! cross-check between independently stated operators.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use crate::cyode::FrobeniusBasis;
use crate::error::{Error, Result};
use crate::numkernel::real::Real;
use crate::numkernel::{rat, Rational};
use crate::series::{Coeff, CoeffMagnitude, PowerSeries};

/// Everything the search equations need, in exact rational form.
///
/// All series share the truncation order of the basis they came from.  The
/// `h*` series live in the z-chart; `t_q` and `k_q` live in the q-chart.
#[derive(Clone, Debug)]
pub struct MirrorData {
    pub h0: PowerSeries<Rational>,
    pub h1: PowerSeries<Rational>,
    pub h2: PowerSeries<Rational>,
    pub q_of_z: PowerSeries<Rational>,
    pub z_of_q: PowerSeries<Rational>,
    pub t_q: PowerSeries<Rational>,
    pub k_q: PowerSeries<Rational>,
    /// Evaluation sign: `+1` pairs `q = exp(t)` with `z > 0`; `-1` switches
    /// to `q = -exp(t)` for alternating series (`z < 0`).
    pub u: i64,
}

/// Numeric location of the point where `dz/dq` vanishes.
#[derive(Clone, Debug)]
pub struct SingularPoint {
    pub q0: Real,
    pub t0: Real,
    pub z0: Real,
}

/// The five companion series `b_0 = theta a_0`, `b_k = a_{k-1} + theta a_k`.
pub fn b_series<S: Coeff>(basis: &FrobeniusBasis<S>) -> Vec<PowerSeries<S>> {
    let mut b = vec![basis.layer(0).theta()];
    for k in 1..5 {
        b.push(basis.layer(k - 1).add(&basis.layer(k).theta()));
    }
    b
}

/// Wronskian quotients `(H0, H1, H2)` of a fifth-order basis, each the named
/// `(a_0 b_j - a_j b_0)` combination over `a_0 b_1 - a_1 b_0`.
pub fn h_functions<S: Coeff>(
    basis: &FrobeniusBasis<S>,
) -> Result<(PowerSeries<S>, PowerSeries<S>, PowerSeries<S>)> {
    if basis.operator_order() != 5 {
        return Err(Error::Invalid(
            "wronskian quotients need a fifth-order basis".into(),
        ));
    }
    let b = b_series(basis);
    let a = |i: usize| basis.layer(i);
    let den = a(0).mul(&b[1]).sub(&a(1).mul(&b[0]));
    if den.coeff(0).is_zero() {
        return Err(Error::Numeric(
            "wronskian denominator vanishes at the origin".into(),
        ));
    }
    let quot = |j: usize| a(0).mul(&b[j]).sub(&a(j).mul(&b[0])).div(&den);
    Ok((quot(4), quot(3), quot(2)))
}

/// `(h0, h1, h2, T)` in the z-chart, dispatching on the basis order.
fn z_chart_data<S: Coeff>(
    basis: &FrobeniusBasis<S>,
) -> Result<(PowerSeries<S>, PowerSeries<S>, PowerSeries<S>, PowerSeries<S>)> {
    match basis.operator_order() {
        5 => {
            let (h0, h1, h2) = h_functions(basis)?;
            let t_z = h2.mul(&h2).mul(&h2).map(|c| c.div_i64(6)).sub(&h0);
            Ok((h0, h1, h2, t_z))
        }
        4 => {
            let a0 = basis.layer(0);
            if a0.coeff(0).is_zero() {
                return Err(Error::Numeric(
                    "analytic solution vanishes at the origin".into(),
                ));
            }
            let b1 = basis.layer(1).div(a0);
            let b2 = basis.layer(2).div(a0);
            let b3 = basis.layer(3).div(a0);
            let b1sq = b1.mul(&b1);
            // T = (b3 - b1 b2 + b1^3/3) / 2, the log-free part of the
            // prepotential written in the solution quotients.
            let t_z = b3
                .sub(&b1.mul(&b2))
                .add(&b1sq.mul(&b1).map(|c| c.div_i64(3)))
                .map(|c| c.div_i64(2));
            let h2 = b1;
            let h1 = b1sq.map(|c| c.div_i64(2));
            let h0 = h2.mul(&h2).mul(&h2).map(|c| c.div_i64(6)).sub(&t_z);
            Ok((h0, h1, h2, t_z))
        }
        r => Err(Error::Invalid(format!(
            "no mirror construction for operator order {r}"
        ))),
    }
}

/// The mirror map `q(z) = z exp(H2)` and its compositional inverse.
pub fn mirror_map(
    basis: &FrobeniusBasis<Rational>,
) -> Result<(PowerSeries<Rational>, PowerSeries<Rational>)> {
    let (_, _, h2, _) = z_chart_data(basis)?;
    Ok(mirror_map_from_h2(&h2))
}

fn mirror_map_from_h2<S: Coeff>(h2: &PowerSeries<S>) -> (PowerSeries<S>, PowerSeries<S>) {
    let n = h2.len();
    let q_of_z = h2.exp().shift_up(1).truncated(n);
    let z_of_q = q_of_z.revert();
    (q_of_z, z_of_q)
}

/// The q-chart pair `(T(q), z(q))` for any coefficient ring.  The search
/// pipeline runs this with fixed-point coefficients at truncation orders
/// where exact rational arithmetic is impractically slow.
pub fn q_chart<S: Coeff>(
    basis: &FrobeniusBasis<S>,
) -> Result<(PowerSeries<S>, PowerSeries<S>)> {
    let (_, _, h2, t_z) = z_chart_data(basis)?;
    let (_, z_of_q) = mirror_map_from_h2(&h2);
    let t_q = t_z.compose(&z_of_q);
    Ok((t_q, z_of_q))
}

/// `T` as a power series in `q`; constant term zero by construction.
pub fn potential_t(basis: &FrobeniusBasis<Rational>) -> Result<PowerSeries<Rational>> {
    let (_, _, h2, t_z) = z_chart_data(basis)?;
    let (_, z_of_q) = mirror_map_from_h2(&h2);
    Ok(t_z.compose(&z_of_q))
}

/// The coupling `K(q) = 1 - theta^3 T(q)`.
pub fn yukawa(t_q: &PowerSeries<Rational>) -> PowerSeries<Rational> {
    PowerSeries::one(t_q.len()).sub(&t_q.theta().theta().theta())
}

impl MirrorData {
    /// Build the full data set from a solved basis (order 4 or 5).
    pub fn from_basis(basis: &FrobeniusBasis<Rational>) -> Result<MirrorData> {
        let (h0, h1, h2, t_z) = z_chart_data(basis)?;
        let (q_of_z, z_of_q) = mirror_map_from_h2(&h2);
        let t_q = t_z.compose(&z_of_q);
        debug_assert!(t_q.coeff(0).is_zero());
        let k_q = yukawa(&t_q);
        Ok(MirrorData {
            h0,
            h1,
            h2,
            q_of_z,
            z_of_q,
            t_q,
            k_q,
            u: 1,
        })
    }

    /// Same data with the evaluation sign flipped for alternating series.
    pub fn with_sign(mut self, u: i64) -> MirrorData {
        assert!(u == 1 || u == -1);
        self.u = u;
        self
    }

    /// Assemble from already-built parts (synthetic inputs in tests, stored
    /// couplings); derives whatever is not supplied.
    pub fn from_t_q(t_q: PowerSeries<Rational>, z_of_q: PowerSeries<Rational>) -> MirrorData {
        let n = t_q.len();
        let k_q = yukawa(&t_q);
        let q_of_z = z_of_q.revert();
        let zero = PowerSeries::zero(n);
        MirrorData {
            h0: zero.clone(),
            h1: zero.clone(),
            h2: zero,
            q_of_z,
            z_of_q,
            t_q,
            k_q,
            u: 1,
        }
    }
}

/// Lambert-expansion numbers `n_d` of `K = 1 + sum n_d d^3 q^d / (1 - q^d)`.
pub fn instanton_numbers(k_q: &PowerSeries<Rational>, d_max: usize) -> Vec<Rational> {
    assert!(d_max < k_q.len(), "coupling series too short");
    let mut ns: Vec<Rational> = Vec::with_capacity(d_max);
    for m in 1..=d_max {
        let mut acc = k_q.coeff(m).clone();
        for d in 1..m {
            if m % d == 0 {
                acc = acc - ns[d - 1].clone() * rat((d * d * d) as i64, 1);
            }
        }
        ns.push(acc / rat((m * m * m) as i64, 1));
    }
    ns
}

/// Smallest positive integer clearing every denominator, when one exists
/// below `limit`.
pub fn integrality_scale(values: &[Rational], limit: &BigInt) -> Option<BigInt> {
    let mut scale = BigInt::one();
    for v in values {
        scale = scale.lcm(v.denom());
        if &scale > limit {
            return None;
        }
    }
    Some(scale)
}

/// Estimated decimal log of the convergence radius, from the decay slope of
/// the trailing coefficients.
pub fn radius_log10(series: &PowerSeries<Real>) -> Result<f64> {
    let n = series.len();
    if n < 16 {
        return Err(Error::Invalid("series too short for a radius estimate".into()));
    }
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for k in n - 12..n {
        if let Some(l) = series.coeff(k).magnitude_log10f() {
            pts.push((k as f64, l));
        }
    }
    if pts.len() < 4 {
        return Err(Error::Numeric(
            "trailing coefficients vanish; no radius estimate".into(),
        ));
    }
    // least-squares slope of log10|c_k| against k
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    Ok(-slope)
}

/// Locate the vanishing of `dz/dq` on the real `u`-side axis.
///
/// Scans 64 sample points inside the estimated radius for a sign change of
/// `z'(q)`, bisects, then Newton-refines; the truncation tail at the root is
/// estimated from the trailing terms and must undercut the target accuracy.
pub fn singular_point(data: &MirrorData, digits: u32, u: i64) -> Result<SingularPoint> {
    let work = digits + 10;
    let zq: PowerSeries<Real> = data.z_of_q.map(|r| Real::from_rational(r, work));
    singular_point_real(&zq, digits, u)
}

/// Same search on an already-realized `z(q)` series (the numeric pipeline
/// builds those directly at high truncation orders).
pub fn singular_point_real(
    zq: &PowerSeries<Real>,
    digits: u32,
    u: i64,
) -> Result<SingularPoint> {
    assert!(u == 1 || u == -1);
    let work = digits + 10;
    let zp = zq.derivative();
    let zpp = zp.derivative();
    // polynomial tails give no slope to fit; fall back to a unit box
    let radius = match radius_log10(zq) {
        Ok(r) => 10f64.powf(r.clamp(-300.0, 300.0)),
        Err(_) => 1.0,
    };

    // bracket a sign change of z'
    let sign_at = |q: &Real| -> i32 {
        let v = zp.eval(q);
        if v.is_negative() {
            -1
        } else if v.is_zero() {
            0
        } else {
            1
        }
    };
    let grid = |i: u32| Real::from_f64(u as f64 * radius * i as f64 / 65.0, work);
    let mut lo = grid(1);
    let mut s_lo = sign_at(&lo);
    let mut hi = lo.clone();
    let mut found = false;
    for i in 2..=64u32 {
        hi = grid(i);
        let s = sign_at(&hi);
        if s != 0 && s_lo != 0 && s != s_lo {
            found = true;
            break;
        }
        lo = hi.clone();
        s_lo = s;
    }
    if !found {
        return Err(Error::Numeric(
            "no sign change of dz/dq inside the estimated radius".into(),
        ));
    }

    // bisection down to a comfortable Newton basin
    for _ in 0..12 {
        let mid = lo.add(&hi).div_u32(2);
        let s = sign_at(&mid);
        if s == 0 {
            lo = mid.clone();
            hi = mid;
            break;
        }
        if s == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Newton on z'(q)
    let mut q0 = lo.add(&hi).div_u32(2);
    let mut last_step_log = i64::MAX;
    let mut stalls = 0;
    let mut converged = false;
    for _ in 0..200 {
        let f = zp.eval(&q0);
        let fp = zpp.eval(&q0);
        if fp.is_zero() {
            return Err(Error::Numeric("flat second derivative in Newton step".into()));
        }
        let step = f.div(&fp);
        q0 = q0.sub(&step);
        let rel = step.div(&q0).abs();
        let l = rel.approx_log10().unwrap_or(-(work as i64) * 2);
        if l <= -(digits as i64) - 2 {
            converged = true;
            break;
        }
        stalls = if l >= last_step_log { stalls + 1 } else { 0 };
        if stalls >= 3 {
            break;
        }
        last_step_log = l;
    }
    if !converged {
        return Err(Error::Numeric(
            "Newton iteration stalled before reaching the target accuracy".into(),
        ));
    }

    // the truncated tail at the root must be negligible
    let (_, tail) = zp.eval_with_tail(&q0);
    match tail {
        Some(t) if t <= -(digits as i64 + 2) => {}
        _ => {
            return Err(Error::Truncation(
                "series order too low for the requested accuracy at the singular point".into(),
            ))
        }
    }

    let q0_abs = q0.abs();
    let t0 = q0_abs.ln();
    let z0 = zq.eval(&q0);
    Ok(SingularPoint { q0, t0, z0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyode::{frobenius_solve, hypergeometric_operator, ThetaOperator};
    use std::collections::BTreeMap;

    fn basis_3t(n: usize) -> FrobeniusBasis<Rational> {
        let op = hypergeometric_operator(&rat(1, 2), &rat(1, 2), &rat(1024, 1));
        frobenius_solve(&op, n)
    }

    /// Fourth-order companion operator for the same case as
    /// `hypergeometric_operator(1/6, 1/3, 46656)`.
    fn pullback_op() -> ThetaOperator<Rational> {
        let p1: Vec<Rational> = [755i64, 3474, 6066, 5184, 2592]
            .iter()
            .map(|c| rat(-36 * c, 1))
            .collect();
        let p2: Vec<Rational> = [2145i64, 8896, 13664, 9216, 2304]
            .iter()
            .map(|c| rat(944_784 * c, 1))
            .collect();
        let mut terms = BTreeMap::new();
        terms.insert(0, vec![rat(0, 1), rat(0, 1), rat(0, 1), rat(0, 1), rat(1, 1)]);
        terms.insert(1, p1);
        terms.insert(2, p2);
        ThetaOperator::new(4, terms)
    }

    #[test]
    fn b_series_low_order_values() {
        let basis = basis_3t(4);
        let b = b_series(&basis);
        assert!(b[0].coeff(0).is_zero());
        assert_eq!(*b[1].coeff(0), rat(1, 1));
        assert_eq!(*b[0].coeff(1), rat(32, 1));
        assert_eq!(*b[1].coeff(1), rat(192, 1));
        assert_eq!(*b[2].coeff(1), rat(320, 1));
        assert_eq!(*b[3].coeff(1), rat(0, 1));
        assert_eq!(*b[4].coeff(1), rat(-160, 1));
    }

    #[test]
    fn wronskian_quotients_low_order() {
        let basis = basis_3t(4);
        let (h0, h1, h2) = h_functions(&basis).unwrap();
        assert!(h2.coeff(0).is_zero());
        assert!(h1.coeff(0).is_zero());
        assert!(h0.coeff(0).is_zero());
        assert_eq!(*h2.coeff(1), rat(320, 1));
        assert_eq!(*h0.coeff(1), rat(-160, 1));
    }

    #[test]
    fn quotients_need_fifth_order() {
        let basis = frobenius_solve(&pullback_op(), 4);
        assert!(h_functions(&basis).is_err());
    }

    #[test]
    fn h1_is_half_h2_squared() {
        let data = MirrorData::from_basis(&basis_3t(30)).unwrap();
        let half = data.h2.mul(&data.h2).mul_scalar(&rat(1, 2));
        assert_eq!(data.h1.coeffs(), half.coeffs());
    }

    #[test]
    fn mirror_map_shape_and_roundtrip() {
        let data = MirrorData::from_basis(&basis_3t(16)).unwrap();
        assert!(data.q_of_z.coeff(0).is_zero());
        assert_eq!(*data.q_of_z.coeff(1), rat(1, 1));
        assert_eq!(*data.q_of_z.coeff(2), rat(320, 1));
        let id = data.q_of_z.compose(&data.z_of_q);
        assert_eq!(id.coeffs(), PowerSeries::identity(16).coeffs());
    }

    #[test]
    fn mirror_map_is_integral() {
        let data = MirrorData::from_basis(&basis_3t(26)).unwrap();
        for k in 1..26 {
            assert!(
                data.q_of_z.coeff(k).is_integer(),
                "q coefficient {k} not integral"
            );
        }
    }

    #[test]
    fn potential_and_coupling() {
        let data = MirrorData::from_basis(&basis_3t(12)).unwrap();
        assert!(data.t_q.coeff(0).is_zero());
        assert_eq!(*data.t_q.coeff(1), rat(160, 1));
        assert_eq!(*data.k_q.coeff(0), rat(1, 1));
        assert_eq!(*data.k_q.coeff(1), rat(-160, 1));
        let rebuilt = PowerSeries::one(12).sub(&data.t_q.theta().theta().theta());
        assert_eq!(rebuilt.coeffs(), data.k_q.coeffs());
    }

    #[test]
    fn pullback_route_matches_wronskian_route() {
        let n = 14;
        let hyper = hypergeometric_operator(&rat(1, 6), &rat(1, 3), &rat(46656, 1));
        let route_a = MirrorData::from_basis(&frobenius_solve(&hyper, n)).unwrap();
        let basis_b = frobenius_solve(&pullback_op(), n);
        assert_eq!(*basis_b.layer(0).coeff(1), rat(27180, 1));
        let route_b = MirrorData::from_basis(&basis_b).unwrap();
        assert_eq!(route_a.q_of_z.coeffs(), route_b.q_of_z.coeffs());
        assert_eq!(route_a.t_q.coeffs(), route_b.t_q.coeffs());
        assert_eq!(*route_a.q_of_z.coeff(2), rat(16344, 1));
    }

    #[test]
    fn lambert_inversion() {
        // K = 1 + 8 q/(1-q): every coefficient past the constant is 8
        let mut c = vec![rat(8, 1); 10];
        c[0] = rat(1, 1);
        let k_q = PowerSeries::from_coeffs(c);
        let ns = instanton_numbers(&k_q, 8);
        assert_eq!(ns[0], rat(8, 1));
        assert!(ns[1..].iter().all(|x| x.is_zero()));

        let data = MirrorData::from_basis(&basis_3t(10)).unwrap();
        let ns = instanton_numbers(&data.k_q, 6);
        assert_eq!(ns[0], rat(-160, 1));
    }

    #[test]
    fn scale_clears_denominators() {
        let vals = [rat(1, 2), rat(3, 4), rat(5, 6)];
        assert_eq!(
            integrality_scale(&vals, &BigInt::from(100)),
            Some(BigInt::from(12))
        );
        assert_eq!(integrality_scale(&vals, &BigInt::from(10)), None);
    }

    #[test]
    fn radius_of_geometric_series() {
        let c: Vec<Real> = (0..40).map(|k| Real::from_f64(2f64.powi(k), 30)).collect();
        let r = radius_log10(&PowerSeries::from_coeffs(c)).unwrap();
        assert!((r + 0.30103).abs() < 0.05, "radius estimate {r}");
    }

    #[test]
    fn synthetic_singular_point() {
        // z = q - q^2 has dz/dq = 0 at q = 1/2, z = 1/4
        let n = 40;
        let mut c = vec![rat(0, 1); n];
        c[1] = rat(1, 1);
        c[2] = rat(-1, 1);
        let z = PowerSeries::from_coeffs(c);
        let data = MirrorData::from_t_q(PowerSeries::zero(n), z);
        let sp = singular_point(&data, 30, 1).unwrap();
        let err_q = sp.q0.sub(&Real::from_rational(&rat(1, 2), 40)).abs();
        let err_z = sp.z0.sub(&Real::from_rational(&rat(1, 4), 40)).abs();
        assert!(err_q.below_pow10(-30));
        assert!(err_z.below_pow10(-30));
        assert!(sp.t0.is_negative());
    }
    #[test]
    fn hypergeometric_singular_point() {
        // the root of dz/dq recovers the reciprocal growth rate of the
        // binomial-sum coefficients
        let data = MirrorData::from_basis(&basis_3t(80)).unwrap();
        let sp = singular_point(&data, 25, 1).unwrap();
        let err = sp.z0.sub(&Real::from_rational(&rat(1, 1024), 40)).abs();
        assert!(err.below_pow10(-25));
        assert!(sp.q0.is_positive() && sp.t0.is_negative());
        // too little headroom for the requested accuracy must be refused
        let short = MirrorData::from_basis(&basis_3t(40)).unwrap();
        assert!(matches!(
            singular_point(&short, 25, 1),
            Err(Error::Truncation(_))
        ));
    }
}
