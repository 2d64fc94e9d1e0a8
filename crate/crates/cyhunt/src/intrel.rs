//! Integer relation detection and constant recognition.
//!
//! The workhorse is PSLQ over fixed-point reals: given x_1..x_n it either
//! finds small integers a_1..a_n with `sum a_i x_i = 0`, proves that no
//! relation exists with coefficient norm up to a requested bound, or reports
//! that the working precision cannot decide. On top of it sit helpers that
//! recognize a real number as a rational or as an element of a real quadratic
//! field.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numkernel::{constants, QuadExt, Rational, Real};

/// Reduction parameter gamma = sqrt(4/3): the row-selection weight.
fn gamma(digits: u32) -> Real {
    Real::from_rational(&crate::numkernel::rat(4, 3), digits).sqrt()
}

/// Find an integer relation among `xs`, or prove none exists with max
/// coefficient magnitude `<= max_norm`.
///
/// Returns `Ok(Some(a))` with a primitive relation (gcd 1, first nonzero
/// entry positive), `Ok(None)` when the computed lower bound on any relation
/// exceeds `max_norm`, and `Err(Precision..)` when the inputs' precision is
/// exhausted before either happens (including the case where the only
/// relation found is larger than `max_norm`).
pub fn pslq(xs: &[Real], max_norm: &BigInt) -> Result<Option<Vec<BigInt>>> {
    let n = xs.len();
    assert!(n >= 2, "integer relation needs at least two inputs");
    let digits = xs.iter().map(|x| x.digits()).min().unwrap();
    assert!(digits != crate::numkernel::EXACT, "inputs must carry finite precision");
    // Below roughly n * log10(max_norm) + margin digits, a spurious relation
    // can pass the detection test; refuse to run in that regime.
    let needed = (n as f64) * (max_norm.bits() as f64) * std::f64::consts::LOG10_2 + 25.0;
    assert!(
        (digits as f64) > needed,
        "{digits} digits cannot certify relations up to norm {max_norm} among {n} inputs"
    );
    let detect_exp = digits as i64 - 15;

    // Near-zero input: the unit vector is already a relation.
    let max_mag = xs.iter().filter_map(|x| x.approx_log10()).max().unwrap_or(i64::MIN);
    for (i, x) in xs.iter().enumerate() {
        if x.approx_log10().unwrap_or(i64::MIN) < max_mag - detect_exp {
            let mut rel = vec![BigInt::zero(); n];
            rel[i] = BigInt::one();
            return Ok(Some(rel));
        }
    }

    let g = gamma(digits);
    // partial norms s_k = sqrt(sum_{j>=k} x_j^2), then normalize by s_0
    let mut sq = vec![Real::zero(digits); n];
    let mut acc = Real::zero(digits);
    for k in (0..n).rev() {
        acc = acc.add(&xs[k].mul(&xs[k]));
        sq[k] = acc.sqrt();
    }
    let s0 = sq[0].clone();
    let mut y: Vec<Real> = xs.iter().map(|x| x.div(&s0)).collect();
    let s: Vec<Real> = sq.iter().map(|v| v.div(&s0)).collect();

    // H: n x (n-1) lower trapezoidal
    let mut h: Vec<Vec<Real>> = vec![vec![Real::zero(digits); n - 1]; n];
    for j in 0..n - 1 {
        h[j][j] = s[j + 1].div(&s[j]);
        for i in j + 1..n {
            h[i][j] = y[i].mul(&y[j]).div(&s[j].mul(&s[j + 1])).neg();
        }
    }
    let mut b: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();

    // Hermite reduction of rows i over pivots j, updating y and columns of B.
    let reduce = |h: &mut Vec<Vec<Real>>,
                      y: &mut Vec<Real>,
                      b: &mut Vec<Vec<BigInt>>,
                      i_from: usize,
                      j_cap: usize| {
        for i in i_from..n {
            let j_hi = (i - 1).min(j_cap);
            for j in (0..=j_hi).rev() {
                if h[j][j].is_zero() {
                    continue;
                }
                let t = h[i][j].div(&h[j][j]).nint();
                if t.is_zero() {
                    continue;
                }
                let tr = Real::from_bigint(t.clone());
                y[j] = y[j].add(&tr.mul(&y[i]));
                for k in 0..=j {
                    h[i][k] = h[i][k].sub(&tr.mul(&h[j][k]));
                }
                for row in b.iter_mut() {
                    let add = &row[i] * &t;
                    row[j] += add;
                }
            }
        }
    };
    reduce(&mut h, &mut y, &mut b, 1, n - 2);

    let max_norm_real = Real::from_bigint(max_norm.clone()).with_digits(digits);
    let iter_cap = 300 + 30 * n * digits as usize;
    for _ in 0..iter_cap {
        // 1. pick m maximizing gamma^(m+1) |H_mm|
        let mut m = 0usize;
        let mut best = Real::zero(digits);
        let mut w = g.clone();
        for (j, row) in h.iter().enumerate().take(n - 1) {
            let v = w.mul(&row[j].abs());
            if v.cmp_value(&best) == std::cmp::Ordering::Greater {
                best = v.clone();
                m = j;
            }
            w = w.mul(&g);
        }

        // 2. swap rows m, m+1 of y and H; columns m, m+1 of B
        y.swap(m, m + 1);
        h.swap(m, m + 1);
        for row in b.iter_mut() {
            row.swap(m, m + 1);
        }

        // 3. corner rotation to restore triangular shape
        if m < n - 2 {
            let t3 = h[m][m].clone();
            let t4 = h[m][m + 1].clone();
            let t0 = t3.mul(&t3).add(&t4.mul(&t4)).sqrt();
            if !t0.is_zero() {
                let t1 = t3.div(&t0);
                let t2 = t4.div(&t0);
                for row in h.iter_mut().skip(m) {
                    let a = row[m].clone();
                    let c = row[m + 1].clone();
                    row[m] = t1.mul(&a).add(&t2.mul(&c));
                    row[m + 1] = t1.mul(&c).sub(&t2.mul(&a));
                }
            }
        }

        // 4. re-reduce the disturbed rows
        reduce(&mut h, &mut y, &mut b, m.max(1), m + 1);

        // 5. detection: a y entry collapsing to zero exposes a relation
        let (mut i_min, mut y_min) = (0usize, y[0].abs());
        for (i, v) in y.iter().enumerate().skip(1) {
            let a = v.abs();
            if a.cmp_value(&y_min) == std::cmp::Ordering::Less {
                y_min = a;
                i_min = i;
            }
        }
        if y_min.below_pow10(detect_exp) {
            let mut rel: Vec<BigInt> = b.iter().map(|row| row[i_min].clone()).collect();
            let norm = rel.iter().map(|c| c.abs()).max().unwrap();
            if &norm > max_norm {
                return Err(Error::Precision(format!(
                    "relation found but its norm {norm} exceeds the requested bound {max_norm}"
                )));
            }
            let g = rel.iter().fold(BigInt::zero(), |a, c| a.gcd(c));
            if !g.is_one() && !g.is_zero() {
                for c in rel.iter_mut() {
                    *c /= &g;
                }
            }
            if let Some(first) = rel.iter().find(|c| !c.is_zero()) {
                if first.is_negative() {
                    for c in rel.iter_mut() {
                        *c = -&*c;
                    }
                }
            }
            return Ok(Some(rel));
        }

        // 6. norm bound: any relation satisfies |a| >= 1/max_j |H_jj|
        let mut max_diag = Real::zero(digits);
        for (j, row) in h.iter().enumerate().take(n - 1) {
            let a = row[j].abs();
            if a.cmp_value(&max_diag) == std::cmp::Ordering::Greater {
                max_diag = a;
            }
        }
        if max_diag.is_zero() {
            return Err(Error::Precision("relation matrix degenerated".into()));
        }
        if max_diag.mul(&max_norm_real).sub(&Real::one()).is_negative() {
            // 1/max_diag > max_norm: no relation below the bound exists
            return Ok(None);
        }
    }
    Err(Error::Precision(format!(
        "no decision after {iter_cap} iterations at {digits} digits"
    )))
}

/// Recognize `x` as a fraction with denominator `<= max_denom` via continued
/// fractions; requires agreement to nearly the full precision of `x`.
pub fn rationalize(x: &Real, max_denom: &BigInt) -> Option<Rational> {
    let digits = x.digits();
    let tol_exp = digits as i64 - 10;
    let exact = x.clone();
    let mut a = exact.clone();
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (exact.floor_bigint(), BigInt::one());
    for _ in 0..digits as usize + 10 {
        let approx = Rational::new(p1.clone(), q1.clone());
        let err = exact.sub(&Real::from_rational(&approx, digits));
        if err.below_pow10(tol_exp) {
            return if q1.abs() <= *max_denom { Some(approx) } else { None };
        }
        let fl = a.floor_bigint();
        let frac = a.sub(&Real::from_bigint(fl));
        if frac.below_pow10(tol_exp) {
            break;
        }
        a = Real::one().with_digits(digits).div(&frac);
        let ai = a.floor_bigint();
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if q1.abs() > max_denom * BigInt::from(1_000_000u64) {
            return None;
        }
    }
    let approx = Rational::new(p1, q1.clone());
    let err = exact.sub(&Real::from_rational(&approx, digits));
    if err.below_pow10(tol_exp) && q1.abs() <= *max_denom {
        Some(approx)
    } else {
        None
    }
}

/// Recognize `x` as `r + c*sqrt(disc)` with disc squarefree, by running PSLQ
/// on `[x, 1, sqrt(disc)]` and solving the resulting relation.
pub fn identify_quadratic(x: &Real, disc: &BigInt, max_norm: &BigInt) -> Result<Option<QuadExt>> {
    let digits = x.digits();
    let s = constants::sqrt_int(disc, digits);
    let one = Real::one().with_digits(digits);
    let rel = pslq(&[x.clone(), one, s], max_norm)?;
    let Some(rel) = rel else { return Ok(None) };
    if rel[0].is_zero() {
        // relation among 1 and sqrt(disc) alone is impossible for squarefree
        // disc > 1; this means x did not participate
        return Ok(None);
    }
    let r0 = Rational::from(rel[0].clone());
    let rat = -Rational::from(rel[1].clone()) / &r0;
    let coef = -Rational::from(rel[2].clone()) / &r0;
    Ok(Some(QuadExt::new(rat, coef, disc.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{constants::const_pi, rat};

    fn root2(digits: u32) -> Real {
        Real::from_rational(&rat(2, 1), digits).sqrt()
    }

    #[test]
    fn pslq_finds_planted_relation() {
        let d = 60u32;
        let one = Real::one().with_digits(d);
        let r2 = root2(d);
        // x3 = 1 + 2 sqrt(2)  =>  relation (1, 2, -1)
        let x3 = one.add(&r2.mul_i64(2));
        let rel = pslq(&[one, r2, x3], &BigInt::from(100)).unwrap().unwrap();
        assert_eq!(rel, vec![BigInt::from(1), BigInt::from(2), BigInt::from(-1)]);
    }

    #[test]
    fn pslq_proves_absence_for_irrational_pair() {
        let d = 80u32;
        let one = Real::one().with_digits(d);
        let r2 = root2(d);
        let out = pslq(&[one, r2], &BigInt::from(1000)).unwrap();
        assert!(out.is_none());
    }

    #[test]
    fn pslq_rejects_oversized_relation_as_precision_failure() {
        let d = 60u32;
        let one = Real::one().with_digits(d);
        // only relation has coefficients ~1e8, far above the requested bound
        let x = Real::from_rational(&rat(12345679, 100000000), d);
        let err = pslq(&[one, x], &BigInt::from(1000));
        assert!(matches!(err, Err(Error::Precision(_))), "{err:?}");
    }

    #[test]
    fn pslq_handles_near_zero_input() {
        let d = 60u32;
        let one = Real::one().with_digits(d);
        let tiny = Real::zero(d);
        let rel = pslq(&[one, tiny], &BigInt::from(10)).unwrap().unwrap();
        assert_eq!(rel, vec![BigInt::from(0), BigInt::from(1)]);
    }

    #[test]
    fn pslq_four_term_rational_combination() {
        let d = 80u32;
        let pi = const_pi(d);
        let pi2 = pi.mul(&pi);
        let one = Real::one().with_digits(d);
        // 3 pi^2 - 7 pi + 2 = x  =>  relation (1, -3, 7, -2) on [x, pi^2, pi, 1]
        let x = pi2.mul_i64(3).sub(&pi.mul_i64(7)).add(&one.mul_i64(2));
        let rel = pslq(&[x, pi2, pi, one], &BigInt::from(100)).unwrap().unwrap();
        assert_eq!(
            rel,
            vec![BigInt::from(1), BigInt::from(-3), BigInt::from(7), BigInt::from(-2)]
        );
    }

    #[test]
    fn rationalize_recovers_fraction() {
        let d = 60u32;
        let x = Real::from_rational(&rat(-355, 113), d);
        let r = rationalize(&x, &BigInt::from(10_000)).unwrap();
        assert_eq!(r, rat(-355, 113));
    }

    #[test]
    fn rationalize_rejects_pi() {
        let d = 60u32;
        let pi = const_pi(d);
        assert!(rationalize(&pi, &BigInt::from(1_000_000)).is_none());
    }

    #[test]
    fn rationalize_handles_integers() {
        let d = 40u32;
        let x = Real::from_rational(&rat(42, 1), d);
        assert_eq!(rationalize(&x, &BigInt::from(10)).unwrap(), rat(42, 1));
    }

    #[test]
    fn quadratic_recognition_roundtrip() {
        let d = 80u32;
        // x = (3 + 2 sqrt(5)) / 7
        let q = QuadExt::new(rat(3, 7), rat(2, 7), BigInt::from(5));
        let x = q.value(d);
        let got = identify_quadratic(&x, &BigInt::from(5), &BigInt::from(1000)).unwrap().unwrap();
        assert_eq!(got, q);
    }

    #[test]
    fn quadratic_recognition_rejects_wrong_field() {
        let d = 80u32;
        let q = QuadExt::new(rat(0, 1), rat(1, 1), BigInt::from(3));
        let x = q.value(d); // sqrt(3) is not in Q(sqrt(5))
        let got = identify_quadratic(&x, &BigInt::from(5), &BigInt::from(1000)).unwrap();
        assert!(got.is_none());
    }
}
