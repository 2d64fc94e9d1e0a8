//! End-to-end hunts over levels whose series argument lands outside the
//! convergence disc: the engine still pins down the exact data (j, z, tau)
//! from the chart side even though the series itself cannot be summed.

use cyhunt::cyode::CaseSpec;
use cyhunt::hunter::{grid_hunt, CandidateStatus, HuntConfig, HuntProblem};
use cyhunt::numkernel::{rat, Rational, Scalar};
use num_bigint::BigInt;

#[test]
fn divergent_side_level_of_the_central_binomial_case() {
    let case = CaseSpec::new("b5", rat(1, 2), rat(1, 2), 1024, "binom(2*n,n)^5");
    let problem = HuntProblem::hypergeometric(&case, 45).unwrap();
    let cfg = HuntConfig { digits: 45, order: 120, max_order: 240, ..HuntConfig::default() };
    let report = grid_hunt(&problem, &[rat(0, 1)], -1, &cfg).unwrap();
    assert_eq!(report.candidates.len(), 1, "skipped: {:?}", report.skipped);
    let c = &report.candidates[0];
    assert_eq!(c.status, CandidateStatus::DivergentSide);
    assert_eq!(c.j, rat(3, 1));
    assert_eq!(c.tau2, rat(5, 4));
    assert_eq!(c.z, Some(Scalar::Rat(rat(-1, 256))));
    // the tau algebra still gives the exact quadratic coefficient
    assert_eq!(c.c, Some(Scalar::Rat(rat(5, 2))));
    assert_eq!(c.a, None);
}

#[test]
fn divergent_side_level_with_a_fractional_k() {
    let case = CaseSpec::new(
        "b334",
        rat(1, 4),
        rat(1, 3),
        6912,
        "binom(2*n,n)^3 * binom(3*n,n) * binom(4*n,2*n)",
    );
    let problem = HuntProblem::hypergeometric(&case, 45).unwrap();
    let cfg = HuntConfig { digits: 45, order: 120, max_order: 240, ..HuntConfig::default() };
    let report = grid_hunt(&problem, &[rat(1, 3)], -1, &cfg).unwrap();
    assert_eq!(report.candidates.len(), 1, "skipped: {:?}", report.skipped);
    let c = &report.candidates[0];
    assert_eq!(c.status, CandidateStatus::DivergentSide);
    assert_eq!(c.j, rat(13, 1));
    assert_eq!(c.tau2, rat(43, 9));
    let z0 = Rational::new(BigInt::from(-1), BigInt::from(4096));
    assert_eq!(c.z, Some(Scalar::Rat(z0)));
    assert_eq!(c.c, Some(Scalar::Rat(rat(43, 12))));
}
