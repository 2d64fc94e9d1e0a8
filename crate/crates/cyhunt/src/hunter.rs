//! The search engine: potential-field invariants, the cubic matching
//! equation over a grid of levels, rational recognition of the discriminant
//! value, the tau algebra, and integer-relation recovery of series
//! coefficients.
//!
//! The pipeline per level `k`: solve
//!
//! ```text
//! F(t) = t^3/6 - (pi^2/2)(k + e) t - h zeta(3) - T(u e^t) = 0
//! ```
//!
//! over real `t < 0`, then evaluate
//!
//! ```text
//! j = 12 [ (1/pi^4)(t^2/2 - (theta T)(q) - (pi^2/2)(k + e))^2 - k^2/4 - e k - f ]
//! ```
//!
//! and accept the level when `j` rounds to a small rational. From `j` the
//! exact algebra takes over: `tau^2 = j/12 + k^2/4 + e k + f`, the argument
//! `z` is recognized from the chart, and the quadratic coefficients `(a, b,
//! c)` of the candidate series are recovered by integer relations against
//! `1/pi^2`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::cyode::{frobenius_solve, CaseSpec, ThetaOperator};
use crate::error::{Error, Result};
use crate::intrel::{identify_quadratic, pslq, rationalize};
use crate::mirror::{self, MirrorData};
use crate::numkernel::constants::{const_pi, const_zeta3, cot2_pi, hurwitz_zeta3, inv_sin2_pi, sqrt_int};
use crate::numkernel::{rat, sqrt_rational, QuadExt, Rational, Real, Scalar};
use crate::seqlang::SeqExpr;
use crate::series::{CoeffMagnitude, PowerSeries};

const LN10: f64 = std::f64::consts::LN_10;

/// The three rational invariants of a flat direction: the linear
/// coefficient `e`, the constant-term weight `h`, and the additive shift
/// `f` in the discriminant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariants {
    pub e: Rational,
    pub h: Rational,
    pub f: Rational,
}

/// Closed forms for the invariants of a two-parameter factorial family:
///
/// ```text
/// e = 5/3 + cot^2(pi s1) + cot^2(pi s2)
/// f = 1 / (sin^2(pi s1) sin^2(pi s2))
/// h = [zeta(3,1/2) + sum_s (zeta(3,s) + zeta(3,1-s)) - 5 zeta(3)] / (3 zeta(3))
/// ```
///
/// evaluated numerically and recovered as exact rationals.
pub fn invariants_hypergeometric(s1: &Rational, s2: &Rational, digits: u32) -> Result<Invariants> {
    let wp = digits + 10;
    let e_val = Real::from_rational(&rat(5, 3), wp)
        .add(&cot2_pi(s1, wp))
        .add(&cot2_pi(s2, wp));
    let f_val = inv_sin2_pi(s1, wp).mul(&inv_sin2_pi(s2, wp));
    let z3 = const_zeta3(wp);
    let mut h_val = hurwitz_zeta3(&rat(1, 2), wp);
    for s in [s1, s2] {
        let sc = rat(1, 1) - s;
        h_val = h_val.add(&hurwitz_zeta3(s, wp)).add(&hurwitz_zeta3(&sc, wp));
    }
    h_val = h_val.sub(&z3.mul_i64(5)).div(&z3.mul_i64(3));

    let max_den = BigInt::from(10).pow(6);
    let recognize = |v: &Real, what: &str| -> Result<Rational> {
        rationalize(&v.with_digits(digits), &max_den)
            .ok_or_else(|| Error::Recognition(format!("{what} is not a small rational: {}", v.to_decimal_string(20))))
    };
    Ok(Invariants {
        e: recognize(&e_val, "invariant e")?,
        h: recognize(&h_val, "invariant h")?,
        f: recognize(&f_val, "invariant f")?,
    })
}

/// A chart realized over fixed-point reals: the potential and its theta
/// derivative as series in `q`, plus `z(q)` for argument recognition. The
/// search pipeline works on this form because exact rational charts become
/// impractically slow beyond truncation order ~100.
#[derive(Clone, Debug)]
pub struct RealChart {
    pub t_q: PowerSeries<Real>,
    pub th_q: PowerSeries<Real>,
    pub z_of_q: PowerSeries<Real>,
    pub wp: u32,
    /// log10 of the chart's coefficient-decay radius in `q`.
    pub q_radius_log10: f64,
}

impl RealChart {
    pub fn from_operator(op: &ThetaOperator<Rational>, order: usize, wp: u32) -> Result<RealChart> {
        let order = order.max(16);
        let op_real = op.map(|c| Real::from_rational(c, wp));
        let basis = frobenius_solve(&op_real, order);
        let (t_q, z_of_q) = mirror::q_chart(&basis)?;
        Ok(RealChart::assemble(t_q, z_of_q, wp))
    }

    pub fn from_mirror(data: &MirrorData, wp: u32) -> RealChart {
        let t_q = data.t_q.map(|c| Real::from_rational(c, wp));
        let z_of_q = data.z_of_q.map(|c| Real::from_rational(c, wp));
        RealChart::assemble(t_q, z_of_q, wp)
    }

    pub fn assemble(t_q: PowerSeries<Real>, z_of_q: PowerSeries<Real>, wp: u32) -> RealChart {
        let q_radius_log10 = mirror::radius_log10(&t_q).unwrap_or(0.0);
        RealChart { th_q: t_q.theta(), t_q, z_of_q, wp, q_radius_log10 }
    }

    pub fn order(&self) -> usize {
        self.t_q.len()
    }
}

/// Recover the invariants from the chart's own singular point: at the flat
/// level `k = 0` with positive sign the matching equation degenerates into
/// an integer relation between `t0^3/6 - T(q0)`, `pi^2 t0 / 2` and
/// `zeta(3)`, which determines `e` and `h`; `f` follows from the
/// discriminant at the same point.
pub fn invariants_from_singularity(data: &MirrorData, digits: u32) -> Result<Invariants> {
    let chart = RealChart::from_mirror(data, digits + 10);
    invariants_from_chart(&chart, digits)
}

/// Same recovery on an already-realized chart.
pub fn invariants_from_chart(chart: &RealChart, digits: u32) -> Result<Invariants> {
    // the relation has three terms; below this PSLQ cannot certify it
    if digits < 38 {
        return Err(Error::Precision(format!(
            "need at least 38 digits to certify the invariant relation, got {digits}"
        )));
    }
    let wp = chart.wp;
    let sp = mirror::singular_point_real(&chart.z_of_q, digits, 1)?;
    let gate = -(digits as i64 + 2);
    let (t_val, t_tail) = chart.t_q.eval_with_tail(&sp.q0);
    let (th_val, th_tail) = chart.th_q.eval_with_tail(&sp.q0);
    for tail in [t_tail, th_tail] {
        if tail.map_or(true, |t| t > gate) {
            return Err(Error::Truncation(format!(
                "potential tail at the singular point is {tail:?}, need <= {gate}"
            )));
        }
    }

    let pi = const_pi(wp);
    let pi2 = pi.mul(&pi);
    let t0 = &sp.t0;
    let v0 = t0.mul(t0).mul(t0).div_u32(6).sub(&t_val);
    let v1 = pi2.mul(t0).div_u32(2);
    let v2 = const_zeta3(wp);
    let vec: Vec<Real> = [&v0, &v1, &v2].iter().map(|v| v.with_digits(digits)).collect();
    let max_norm = BigInt::from(10_000);
    let rel = pslq(&vec, &max_norm)?
        .ok_or_else(|| Error::Recognition("no relation between the singular values".into()))?;
    if rel[0].is_zero() {
        return Err(Error::Recognition("degenerate relation at the singular point".into()));
    }
    let e = Rational::new(-rel[1].clone(), rel[0].clone());
    let h = Rational::new(-rel[2].clone(), rel[0].clone());
    // re-check the relation at working precision
    let resid = v0
        .sub(&Real::from_rational(&e, wp).mul(&v1))
        .sub(&Real::from_rational(&h, wp).mul(&v2));
    if !resid.below_pow10(digits as i64 - 8) {
        return Err(Error::Recognition(format!(
            "singular relation residual too large: {}",
            resid.to_decimal_string(8)
        )));
    }

    let w = t0.mul(t0).div_u32(2).sub(&th_val).sub(&pi2.mul(&Real::from_rational(&e, wp)).div_u32(2));
    let f_val = w.div(&pi2).powi(2);
    let f = rationalize(&f_val.with_digits(digits - 6), &BigInt::from(10).pow(6))
        .ok_or_else(|| Error::Recognition("discriminant shift is not a small rational".into()))?;
    Ok(Invariants { e, h, f })
}

/// Real roots of `t^3/6 - a t - b = 0` (f64 seeds for the full solve).
fn cubic_seeds(a: f64, b: f64) -> Vec<f64> {
    // t^3 + p t + q with p = -6a, q = -6b
    let p = -6.0 * a;
    let q = -6.0 * b;
    if p == 0.0 && q == 0.0 {
        return vec![0.0];
    }
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    if disc > 0.0 && p < 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos();
        (0..3).map(|k| m * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos()).collect()
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    }
}

/// Solve the matching equation for level `k` and sign `u`, returning the
/// most negative admissible root (or `None` when no root passes the
/// residual, radius and tail gates). `Err(Truncation)` flags a root that
/// failed only because the chart order cannot bound its tail.
pub fn solve_eq6(
    inv: &Invariants,
    k: &Rational,
    u: i64,
    data: &MirrorData,
    digits: u32,
) -> Result<Option<Real>> {
    let chart = RealChart::from_mirror(data, digits + 10);
    solve_eq6_chart(inv, k, u, &chart, digits)
}

pub fn solve_eq6_chart(
    inv: &Invariants,
    k: &Rational,
    u: i64,
    chart: &RealChart,
    digits: u32,
) -> Result<Option<Real>> {
    assert!(u == 1 || u == -1, "sign must be +1 or -1");
    assert!(digits >= 40, "root isolation needs at least 40 digits");
    let wp = chart.wp;
    assert!(wp >= digits + 5, "chart precision {wp} too low for {digits} digits");
    let pi = const_pi(wp);
    let pi2 = pi.mul(&pi);
    let ke = k + &inv.e;
    let a = pi2.mul(&Real::from_rational(&ke, wp)).div_u32(2);
    let b = const_zeta3(wp).mul(&Real::from_rational(&inv.h, wp));
    let a_f = a.to_f64();
    let b_f = b.to_f64();

    // the root must keep |q| = e^t inside the chart's decay radius
    let t_hi = chart.q_radius_log10 * LN10 + (0.9995f64).ln();
    let t_lo = (-40.0f64).min(-1.8 * (6.0 * a_f.max(0.0)).sqrt() - 4.0);

    let eval_f = |t: &Real| -> (Real, Real, Option<i64>) {
        let q = t.exp().mul_i64(u);
        let (tv, tail) = chart.t_q.eval_with_tail(&q);
        let f = t.mul(t).mul(t).div_u32(6).sub(&a.mul(t)).sub(&b).sub(&tv);
        let fp = t.mul(t).div_u32(2).sub(&a).sub(&chart.th_q.eval(&q));
        (f, fp, tail)
    };

    // seeds: cubic roots plus sign changes of F on a coarse scan
    let mut seeds: Vec<f64> = cubic_seeds(a_f, b_f)
        .into_iter()
        .filter(|t| *t < t_hi && *t > t_lo && t.is_finite())
        .collect();
    let steps = 200usize;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=steps {
        let t = t_lo + (t_hi - t_lo) * i as f64 / steps as f64;
        let (f, _, _) = eval_f(&Real::from_f64(t, wp));
        let fv = f.to_f64();
        if !fv.is_finite() {
            prev = None;
            continue;
        }
        if let Some((tp, fp)) = prev {
            if fp * fv <= 0.0 && fp != 0.0 {
                seeds.push((tp + t) / 2.0);
            }
        }
        prev = Some((t, fv));
    }

    let mut roots: Vec<Real> = Vec::new();
    let mut tail_blocked = false;
    'seed: for seed in seeds {
        let mut t = Real::from_f64(seed, wp);
        let mut last_log: Option<i64> = None;
        let mut stall = 0;
        for _ in 0..wp as usize + 60 {
            let (f, fp, _) = eval_f(&t);
            if fp.is_zero() {
                continue 'seed;
            }
            let step = f.div(&fp);
            t = t.sub(&step);
            let tf = t.to_f64();
            if !tf.is_finite() || tf < t_lo - 5.0 || tf > t_hi + 1.0 {
                continue 'seed;
            }
            if step.below_pow10(digits as i64 + 3) {
                break;
            }
            // quadratic convergence stalls once the residual hits the noise
            // floor; a non-shrinking step magnitude twice in a row ends it
            let sl = step.approx_log10();
            if sl >= last_log && last_log.is_some() {
                stall += 1;
                if stall >= 2 {
                    break;
                }
            } else {
                stall = 0;
            }
            last_log = sl;
        }
        let (f, _, tail) = eval_f(&t);
        if !f.below_pow10(digits as i64 - 10) {
            continue;
        }
        if t.to_f64() >= t_hi {
            continue;
        }
        if tail.map_or(true, |tl| tl > -(digits as i64 - 10)) {
            tail_blocked = true;
            continue;
        }
        let dup = roots.iter().any(|r| r.sub(&t).below_pow10(digits as i64 / 2));
        if !dup {
            roots.push(t);
        }
    }

    if roots.is_empty() {
        if tail_blocked {
            return Err(Error::Truncation(
                "a root passed the residual gate but its series tail cannot be bounded at this order".into(),
            ));
        }
        return Ok(None);
    }
    roots.sort_by(|x, y| x.cmp_value(y));
    Ok(Some(roots.remove(0)))
}

/// The discriminant value at a root of the matching equation.
pub fn compute_j(inv: &Invariants, k: &Rational, t: &Real, u: i64, data: &MirrorData, digits: u32) -> Real {
    let chart = RealChart::from_mirror(data, digits + 10);
    compute_j_chart(inv, k, t, u, &chart)
}

pub fn compute_j_chart(inv: &Invariants, k: &Rational, t: &Real, u: i64, chart: &RealChart) -> Real {
    let wp = chart.wp;
    let pi = const_pi(wp);
    let pi2 = pi.mul(&pi);
    let q = t.with_digits(wp).exp().mul_i64(u);
    let th = chart.th_q.eval(&q);
    let ke = k + &inv.e;
    let w = t.mul(t).div_u32(2).sub(&th).sub(&pi2.mul(&Real::from_rational(&ke, wp)).div_u32(2));
    let shift = k * k * rat(1, 4) + k * &inv.e + &inv.f;
    let r = w.div(&pi2);
    r.mul(&r).sub(&Real::from_rational(&shift, wp)).mul_i64(12)
}

/// Round a numeric discriminant value to a rational with denominator up to
/// `max_den`, requiring agreement to `10^tol_log10`.
pub fn recognize_j(j: &Real, max_den: u32, tol_log10: i64) -> Option<Rational> {
    for den in 1..=max_den.max(1) {
        let scaled = j.mul_i64(den as i64);
        let num = scaled.nint();
        let cand = Rational::new(num, BigInt::from(den));
        if j.sub(&Real::from_rational(&cand, j.digits())).below_pow10(-tol_log10) {
            return Some(cand);
        }
    }
    None
}

/// `tau^2 = j/12 + k^2/4 + e k + f`, exactly.
pub fn tau_squared(inv: &Invariants, k: &Rational, j: &Rational) -> Rational {
    j * rat(1, 12) + k * k * rat(1, 4) + k * &inv.e + &inv.f
}

fn scalar_from_quad(q: QuadExt) -> Scalar {
    if q.coef.is_zero() {
        Scalar::Rat(q.rat)
    } else {
        Scalar::Quad(q)
    }
}

/// `tau = c / sqrt(1 - rho z)` for a two-parameter factorial family,
/// evaluated numerically.
pub fn compute_tau_hypergeometric(c: &Scalar, rho: &Rational, z: &Scalar, digits: u32) -> Result<Real> {
    let wp = digits + 10;
    let v = Real::one()
        .with_digits(wp)
        .sub(&Real::from_rational(rho, wp).mul(&z.value(wp)));
    if !v.is_positive() {
        return Err(Error::Numeric("1 - rho z must be positive on this branch".into()));
    }
    Ok(c.value(wp).div(&v.sqrt()).with_digits(digits))
}

/// For a two-parameter factorial family the series coefficient `c` follows
/// from `tau` by `tau = c / sqrt(1 - rho z)`, i.e. `c^2 = tau^2 (1 - rho z)`
/// in the ground field of `z`.
pub fn c_from_tau_hypergeometric(tau2: &Rational, rho: &Rational, z: &Scalar) -> Result<Scalar> {
    match z {
        Scalar::Rat(zr) => {
            let v = tau2 * (rat(1, 1) - rho * zr);
            if !v.is_positive() {
                return Err(Error::Numeric("1 - rho z must be positive on this branch".into()));
            }
            sqrt_rational(&v)
                .ok_or_else(|| Error::Recognition("c^2 has no square root in a real quadratic field".into()))
        }
        Scalar::Quad(zq) => {
            let one = QuadExt::new(rat(1, 1), rat(0, 1), zq.disc.clone());
            let v = one.sub(&zq.scale(rho)).scale(tau2);
            if v.is_negative_value() || (v.rat.is_zero() && v.coef.is_zero()) {
                return Err(Error::Numeric("1 - rho z must be positive on this branch".into()));
            }
            let root = v
                .sqrt()
                .ok_or_else(|| Error::Recognition("c^2 has no square root in its own field".into()))?;
            Ok(scalar_from_quad(root))
        }
    }
}

/// General form of the same step: `tau = c exp(I(z))` with
/// `I(z) = integral of e3/(2z) dz`, where `e3` is the local exponent series
/// (constant term zero). Returns `tau` given `c`.
pub fn compute_tau_general(c: &Real, e3: &PowerSeries<Rational>, z: &Rational, digits: u32) -> Result<Real> {
    let integral = e3_integral(e3, z, digits)?;
    Ok(c.with_digits(digits + 10).mul(&integral.exp()).with_digits(digits))
}

/// Inverse of [`compute_tau_general`]: recover `c` from `tau`.
pub fn c_from_tau_general(tau: &Real, e3: &PowerSeries<Rational>, z: &Rational, digits: u32) -> Result<Real> {
    let integral = e3_integral(e3, z, digits)?;
    Ok(tau.with_digits(digits + 10).mul(&integral.neg().exp()).with_digits(digits))
}

fn e3_integral(e3: &PowerSeries<Rational>, z: &Rational, digits: u32) -> Result<Real> {
    if e3.is_empty() || !e3.coeff(0).is_zero() {
        return Err(Error::Invalid("exponent series must vanish at z = 0".into()));
    }
    let wp = digits + 10;
    // I(z) = sum_{m>=1} e3[m] z^m / (2m), summed exactly then realized
    let mut acc = rat(0, 1);
    let mut zpow = rat(1, 1);
    for m in 1..e3.len() {
        zpow = &zpow * z;
        acc = acc + e3.coeff(m) * &zpow / rat(2 * m as i64, 1);
    }
    Ok(Real::from_rational(&acc, wp))
}

/// Recovered quadratic coefficients with the number of digits to which the
/// defining relation was checked.
#[derive(Clone, Debug)]
pub struct SeriesFit {
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
    pub verified_digits: u32,
}

/// Whether `digits` of precision can certify a relation of norm up to
/// `max_norm` among `n` inputs (mirrors the precondition of [`pslq`]).
fn relation_feasible(n: usize, max_norm: &BigInt, digits: u32) -> bool {
    (digits as f64) > (n as f64) * (max_norm.bits() as f64) * std::f64::consts::LOG10_2 + 25.0
}

/// Power sums S_m = sum A_n n^m z^n for m = 0, 1, 2.
fn power_sums(seq: &SeqExpr, z: &Scalar, wp: u32) -> Result<[Real; 3]> {
    let mut s = [Real::zero(wp), Real::zero(wp), Real::zero(wp)];
    let disc = match z {
        Scalar::Rat(_) => None,
        Scalar::Quad(q) => Some(sqrt_int(&q.disc, wp)),
    };
    let mut zpow_rat = rat(1, 1);
    let mut zpow_quad = match z {
        Scalar::Quad(q) => QuadExt::new(rat(1, 1), rat(0, 1), q.disc.clone()),
        Scalar::Rat(_) => QuadExt::new(rat(1, 1), rat(0, 1), BigInt::from(2)),
    };
    let mut low = 0u32;
    let mut peak = f64::NEG_INFINITY;
    for n in 0..20_000i64 {
        let a_n = crate::seqlang::eval(seq, &BigInt::from(n))?;
        let term = match z {
            Scalar::Rat(_) => {
                let t = &zpow_rat * Rational::from(a_n);
                Real::from_rational(&t, wp)
            }
            Scalar::Quad(_) => {
                let t = zpow_quad.scale(&Rational::from(a_n));
                let sq = disc.as_ref().unwrap();
                Real::from_rational(&t.rat, wp).add(&Real::from_rational(&t.coef, wp).mul(sq))
            }
        };
        let t1 = term.mul_i64(n);
        let t2 = t1.mul_i64(n);
        s[0] = s[0].add(&term);
        s[1] = s[1].add(&t1);
        s[2] = s[2].add(&t2);

        let mag = t2.magnitude_log10f().or_else(|| term.magnitude_log10f());
        match mag {
            Some(m) if m > -(wp as f64 - 4.0) => {
                low = 0;
                if m > peak {
                    if n > 50 && m > peak + 0.0 {
                        // still growing late: check divergence against the
                        // running peak established early on
                    }
                    peak = m;
                }
                if n > 120 && m >= peak - 1.0 && m > 2.0 {
                    return Err(Error::Numeric(
                        "series terms are not decaying at this argument".into(),
                    ));
                }
            }
            _ => {
                low += 1;
                if low >= 3 && n >= 8 {
                    return Ok(s);
                }
            }
        }
        match z {
            Scalar::Rat(zr) => zpow_rat = &zpow_rat * zr,
            Scalar::Quad(zq) => zpow_quad = zpow_quad.mul(zq),
        }
    }
    Err(Error::Truncation("series did not reach the target resolution in 20000 terms".into()))
}

/// Recover `(a, b, c)` with `sum A_n (a + b n + c n^2) z^n = 1/pi^2` by
/// integer relations among the power sums. Tries the rational form first,
/// then a pure surd `sqrt(d)/pi^2` for hinted and standard discriminants,
/// then a mixed seven-term relation when `z` itself is quadratic.
pub fn recover_abc(seq: &SeqExpr, z: &Scalar, d_hint: Option<BigInt>, digits: u32) -> Result<SeriesFit> {
    let wp = digits + 15;
    let sums = power_sums(seq, z, wp)?;
    let pi = const_pi(wp);
    let inv_pi2 = Real::one().with_digits(wp).div(&pi.mul(&pi));
    let max_norm = BigInt::from(10).pow(4);
    if !relation_feasible(4, &max_norm, digits) {
        return Err(Error::Precision(format!(
            "{digits} digits cannot certify coefficient relations up to norm {max_norm}"
        )));
    }

    let fit = |a: Scalar, b: Scalar, c: Scalar| -> SeriesFit {
        let resid = a
            .value(wp)
            .mul(&sums[0])
            .add(&b.value(wp).mul(&sums[1]))
            .add(&c.value(wp).mul(&sums[2]))
            .sub(&inv_pi2);
        let vd = match resid.magnitude_log10f() {
            Some(m) => (-m - 2.0).clamp(0.0, wp as f64 - 8.0) as u32,
            None => wp - 8,
        };
        SeriesFit { a, b, c, verified_digits: vd }
    };

    // plain rational coefficients
    let vec = [
        sums[0].with_digits(digits),
        sums[1].with_digits(digits),
        sums[2].with_digits(digits),
        inv_pi2.with_digits(digits),
    ];
    if let Some(m) = pslq(&vec, &max_norm)? {
        if !m[3].is_zero() && (!m[0].is_zero() || !m[1].is_zero() || !m[2].is_zero()) {
            let coef = |i: usize| Scalar::Rat(Rational::new(-m[i].clone(), m[3].clone()));
            return Ok(fit(coef(0), coef(1), coef(2)));
        }
    }

    // pure surd coefficients: a = alpha sqrt(d) etc., relation against sqrt(d)/pi^2
    let mut discs: Vec<BigInt> = Vec::new();
    if let Some(d) = d_hint {
        if d > BigInt::from(1) {
            discs.push(d);
        }
    }
    if let Scalar::Quad(zq) = z {
        if !discs.contains(&zq.disc) {
            discs.push(zq.disc.clone());
        }
    }
    for d in [2i64, 3, 5, 6, 7, 10, 11, 13, 15] {
        let d = BigInt::from(d);
        if !discs.contains(&d) {
            discs.push(d);
        }
    }
    for d in &discs {
        let sd = sqrt_int(d, wp);
        let vec = [
            sums[0].with_digits(digits),
            sums[1].with_digits(digits),
            sums[2].with_digits(digits),
            sd.mul(&inv_pi2).with_digits(digits),
        ];
        if let Some(m) = pslq(&vec, &max_norm)? {
            if !m[3].is_zero() && (!m[0].is_zero() || !m[1].is_zero() || !m[2].is_zero()) {
                // m0 S0 + m1 S1 + m2 S2 = -m3 sqrt(d)/pi^2  =>  a = -m0 sqrt(d)/(m3 d)
                let coef = |i: usize| {
                    scalar_from_quad(QuadExt::new(
                        rat(0, 1),
                        Rational::new(-m[i].clone(), m[3].clone() * d),
                        d.clone(),
                    ))
                };
                return Ok(fit(coef(0), coef(1), coef(2)));
            }
        }
    }

    // mixed coefficients over the field of a quadratic z
    if let Scalar::Quad(zq) = z {
        if !relation_feasible(7, &max_norm, digits) {
            return Err(Error::Precision(format!(
                "{digits} digits cannot certify a mixed relation over sqrt({})",
                zq.disc
            )));
        }
        let d = &zq.disc;
        let sd = sqrt_int(d, wp);
        let vec = [
            sums[0].with_digits(digits),
            sums[1].with_digits(digits),
            sums[2].with_digits(digits),
            sd.mul(&sums[0]).with_digits(digits),
            sd.mul(&sums[1]).with_digits(digits),
            sd.mul(&sums[2]).with_digits(digits),
            inv_pi2.with_digits(digits),
        ];
        if let Some(m) = pslq(&vec, &max_norm)? {
            if !m[6].is_zero() {
                let coef = |i: usize| {
                    scalar_from_quad(QuadExt::new(
                        Rational::new(-m[i].clone(), m[6].clone()),
                        Rational::new(-m[i + 3].clone(), m[6].clone()),
                        d.clone(),
                    ))
                };
                return Ok(fit(coef(0), coef(1), coef(2)));
            }
        }
    }

    Err(Error::Recognition("no integer relation matches the series coefficients".into()))
}

/// How far a hunted level got.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CandidateStatus {
    /// Coefficients recovered and the defining relation checked to at least
    /// 40 digits inside half the convergence radius.
    Confirmed,
    /// Data recovered but not verified to the confirmation bar.
    Unverified,
    /// The argument lies on the divergent side of the series; the exact
    /// data is reported but direct summation cannot check it.
    DivergentSide,
    /// The flat level `k = 0` with positive sign: the degenerate limit at
    /// the singular point itself.
    Singular,
}

/// One accepted level of a hunt.
#[derive(Clone, Debug)]
pub struct HuntCandidate {
    pub case_id: String,
    pub k: Rational,
    pub u: i64,
    pub t: Real,
    pub q: Real,
    pub j: Rational,
    pub tau2: Rational,
    pub z: Option<Scalar>,
    pub a: Option<Scalar>,
    pub b: Option<Scalar>,
    pub c: Option<Scalar>,
    pub verified_digits: u32,
    pub status: CandidateStatus,
    pub note: String,
}

/// A case prepared for hunting: operator, invariants, and optionally the
/// argument scale `rho` and the coefficient sequence.
#[derive(Clone, Debug)]
pub struct HuntProblem {
    pub id: String,
    pub op: ThetaOperator<Rational>,
    pub rho: Option<Rational>,
    pub seq: Option<SeqExpr>,
    pub inv: Invariants,
}

impl HuntProblem {
    /// Build the standard problem for a two-parameter factorial case.
    pub fn hypergeometric(case: &CaseSpec, digits: u32) -> Result<HuntProblem> {
        let inv = invariants_hypergeometric(&case.s1, &case.s2, digits.max(40))?;
        let seq = crate::seqlang::parse(&case.binomial_form)?;
        Ok(HuntProblem {
            id: case.id.clone(),
            op: case.operator(),
            rho: Some(case.rho.clone()),
            seq: Some(seq),
            inv,
        })
    }
}

#[derive(Clone, Debug)]
pub struct HuntConfig {
    /// Target accuracy for roots and recognition.
    pub digits: u32,
    /// Starting truncation order of the chart.
    pub order: usize,
    /// Escalation cap: orders double until the tail gates pass or this is hit.
    pub max_order: usize,
    /// Worker threads (0 = one per available core).
    pub workers: usize,
    /// Largest denominator accepted when rounding the discriminant value.
    pub max_j_den: u32,
    /// log10 tolerance for that rounding.
    pub j_tol_log10: i64,
    /// Extra working precision on top of `digits`; levels outside the unit
    /// `rho z` disc amplify fixed-point noise by (rho |q|)^order and need
    /// headroom proportional to the order.
    pub wp_extra: u32,
}

impl Default for HuntConfig {
    fn default() -> Self {
        HuntConfig {
            digits: 50,
            order: 50,
            max_order: 400,
            workers: 0,
            max_j_den: 12,
            j_tol_log10: -10,
            wp_extra: 0,
        }
    }
}

/// Outcome of a grid hunt: accepted candidates sorted by level, and the
/// levels that produced nothing with the reason each was dropped.
#[derive(Clone, Debug)]
pub struct HuntReport {
    pub candidates: Vec<HuntCandidate>,
    pub skipped: Vec<(Rational, String)>,
}

enum LevelOutcome {
    Found(Box<HuntCandidate>),
    Skip(String),
    NeedOrder,
}

/// Hunt every level in `grid` at sign `u`, escalating the chart order for
/// levels whose series tails cannot be bounded, and return everything found.
pub fn grid_hunt(problem: &HuntProblem, grid: &[Rational], u: i64, cfg: &HuntConfig) -> Result<HuntReport> {
    assert!(u == 1 || u == -1, "sign must be +1 or -1");
    if cfg.digits < 40 {
        return Err(Error::Invalid("hunting needs at least 40 digits".into()));
    }
    let mut pending: Vec<Rational> = grid.to_vec();
    pending.sort();
    pending.dedup();
    let mut candidates: Vec<HuntCandidate> = Vec::new();
    let mut skipped: Vec<(Rational, String)> = Vec::new();
    let mut order = cfg.order.max(16);

    loop {
        // chart construction noise grows like rho^n 10^-wp while the chart's
        // coefficients grow only like (1/radius)^n; keeping the top
        // coefficients clean needs roughly log10(rho * radius) extra digits
        // per order, bounded here by one
        let wp = cfg.digits + 10 + order as u32 + cfg.wp_extra;
        let chart = RealChart::from_operator(&problem.op, order, wp)?;
        let outcomes = run_levels(problem, &chart, &pending, u, cfg);
        let mut retry: Vec<Rational> = Vec::new();
        for (k, outcome) in pending.iter().zip(outcomes) {
            match outcome {
                LevelOutcome::Found(c) => candidates.push(*c),
                LevelOutcome::Skip(why) => skipped.push((k.clone(), why)),
                LevelOutcome::NeedOrder => retry.push(k.clone()),
            }
        }
        if retry.is_empty() {
            break;
        }
        if order >= cfg.max_order {
            for k in retry {
                skipped.push((
                    k,
                    format!("series order cap {} reached before the tail gates passed", cfg.max_order),
                ));
            }
            break;
        }
        order = (order * 2).min(cfg.max_order);
        pending = retry;
    }

    candidates.sort_by(|x, y| x.k.cmp(&y.k));
    skipped.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(HuntReport { candidates, skipped })
}

fn run_levels(
    problem: &HuntProblem,
    chart: &RealChart,
    ks: &[Rational],
    u: i64,
    cfg: &HuntConfig,
) -> Vec<LevelOutcome> {
    let workers = if cfg.workers == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        cfg.workers
    }
    .clamp(1, ks.len().max(1));

    if workers <= 1 || ks.len() <= 1 {
        return ks.iter().map(|k| hunt_level(problem, chart, k, u, cfg)).collect();
    }

    let mut slots: Vec<Option<LevelOutcome>> = Vec::new();
    slots.resize_with(ks.len(), || None);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slot_refs = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= ks.len() {
                    break;
                }
                let out = hunt_level(problem, chart, &ks[i], u, cfg);
                slot_refs.lock().unwrap()[i] = Some(out);
            });
        }
    });
    slots.into_iter().map(|s| s.expect("worker filled every slot")).collect()
}

fn hunt_level(
    problem: &HuntProblem,
    chart: &RealChart,
    k: &Rational,
    u: i64,
    cfg: &HuntConfig,
) -> LevelOutcome {
    if u == 1 && k.is_zero() {
        return singular_level(problem, chart, cfg);
    }
    let t = match solve_eq6_chart(&problem.inv, k, u, chart, cfg.digits) {
        Ok(Some(t)) => t,
        Ok(None) => return LevelOutcome::Skip("no admissible root of the matching equation".into()),
        Err(Error::Truncation(_)) => return LevelOutcome::NeedOrder,
        Err(e) => return LevelOutcome::Skip(e.to_string()),
    };
    let j_val = compute_j_chart(&problem.inv, k, &t, u, chart);
    let j = match recognize_j(&j_val.with_digits(cfg.digits), cfg.max_j_den, cfg.j_tol_log10) {
        Some(j) => j,
        None => {
            return LevelOutcome::Skip(format!(
                "discriminant value is not a small rational: {}",
                j_val.to_decimal_string(16)
            ))
        }
    };
    let tau2 = tau_squared(&problem.inv, k, &j);
    let q = t.exp().mul_i64(u);
    let z_val = chart.z_of_q.eval(&q);

    // convergence ratio of the series argument
    let ratio_log10 = match &problem.rho {
        Some(rho) => {
            z_val.magnitude_log10f().map(|m| m + rho.to_f64().unwrap_or(f64::NAN).log10())
        }
        None => q.magnitude_log10f().map(|m| m - chart.q_radius_log10),
    }
    .unwrap_or(f64::NEG_INFINITY);

    let mut note = String::new();
    let z = recognize_z(&z_val, cfg.digits);
    if z.is_none() {
        note.push_str("argument not recognized algebraically; ");
    }

    // exact coefficient c from the tau algebra, when the algebra applies
    let c_alg: Option<Scalar> = match (&problem.rho, &z) {
        (Some(rho), Some(zs)) => c_from_tau_hypergeometric(&tau2, rho, zs).ok(),
        _ => None,
    };

    if ratio_log10 >= -0.0004 {
        return LevelOutcome::Found(Box::new(HuntCandidate {
            case_id: problem.id.clone(),
            k: k.clone(),
            u,
            t,
            q,
            j,
            tau2,
            z,
            a: None,
            b: None,
            c: c_alg,
            verified_digits: 0,
            status: CandidateStatus::DivergentSide,
            note: format!("{note}argument on the divergent side; not summable directly"),
        }));
    }

    let mut a = None;
    let mut b = None;
    let mut c = c_alg.clone();
    let mut verified = 0u32;
    match (&problem.seq, &z) {
        (Some(seq), Some(zs)) => {
            let d_hint = c_alg.as_ref().and_then(|s| match s {
                Scalar::Quad(q) => Some(q.disc.clone()),
                Scalar::Rat(_) => None,
            });
            match recover_abc(seq, zs, d_hint, cfg.digits) {
                Ok(fitted) => {
                    if let Some(ca) = &c_alg {
                        if *ca != fitted.c {
                            note.push_str("tau algebra and series fit disagree on c; ");
                        }
                    }
                    a = Some(fitted.a);
                    b = Some(fitted.b);
                    c = Some(fitted.c);
                    verified = fitted.verified_digits;
                }
                Err(e) => note.push_str(&format!("coefficient recovery failed: {e}; ")),
            }
        }
        (None, _) => note.push_str("no coefficient sequence attached; "),
        (_, None) => {}
    }

    let slow = ratio_log10 > (0.5f64).log10();
    if slow {
        note.push_str("argument beyond half the convergence radius; ");
    }
    let status = if a.is_some() && verified >= 40 && !slow {
        CandidateStatus::Confirmed
    } else {
        CandidateStatus::Unverified
    };
    let note = note.trim_end_matches([' ', ';']).to_string();
    LevelOutcome::Found(Box::new(HuntCandidate {
        case_id: problem.id.clone(),
        k: k.clone(),
        u,
        t,
        q,
        j,
        tau2,
        z,
        a,
        b,
        c,
        verified_digits: verified,
        status,
        note,
    }))
}

fn singular_level(problem: &HuntProblem, chart: &RealChart, cfg: &HuntConfig) -> LevelOutcome {
    let digits = cfg.digits.min(30);
    let sp = match mirror::singular_point_real(&chart.z_of_q, digits, 1) {
        Ok(sp) => sp,
        Err(Error::Truncation(_)) => return LevelOutcome::NeedOrder,
        Err(e) => return LevelOutcome::Skip(format!("singular point not located: {e}")),
    };
    let z = rationalize(&sp.z0.with_digits(digits), &BigInt::from(10).pow(12)).map(Scalar::Rat);
    let zero = || Some(Scalar::Rat(rat(0, 1)));
    LevelOutcome::Found(Box::new(HuntCandidate {
        case_id: problem.id.clone(),
        k: rat(0, 1),
        u: 1,
        t: sp.t0,
        q: sp.q0,
        j: rat(0, 1),
        tau2: problem.inv.f.clone(),
        z,
        a: zero(),
        b: zero(),
        c: zero(),
        verified_digits: digits,
        status: CandidateStatus::Singular,
        note: "degenerate limit at the nearest singular point".into(),
    }))
}

/// Recognize a numeric argument value as a rational or a real quadratic
/// surd.
fn recognize_z(z_val: &Real, digits: u32) -> Option<Scalar> {
    let z = z_val.with_digits(digits);
    let max_den = BigInt::from(10).pow(u32::from(digits.saturating_sub(12) / 2).clamp(6, 15));
    if let Some(r) = rationalize(&z, &max_den) {
        return Some(Scalar::Rat(r));
    }
    if digits >= 50 {
        let max_norm = BigInt::from(10).pow(6);
        for d in [2i64, 3, 5, 6, 7, 10, 11, 13, 15, 17, 19, 21] {
            if let Ok(Some(q)) = identify_quadratic(&z, &BigInt::from(d), &max_norm) {
                return Some(scalar_from_quad(q));
            }
        }
    }
    None
}
