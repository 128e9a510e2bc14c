use num_complex::Complex64;
use proptest::prelude::*;

use singulog::cli::{parse_jobspec, Command, Format, JobSpec, OracleParams, Target};
use singulog::formf::chain::{ChainExpr, Factor};
use singulog::formf::{check_form_f, smear};
use singulog::nested::{mellin_density, weight_density, IntegralSpec, Kernel};
use singulog::oracle::mc_theta;
use singulog::rational::{int, rat};
use singulog::{Coefficient, EulerOp, LogPowTerm, Rational, SingExpansion};

fn rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

fn term() -> impl Strategy<Value = LogPowTerm> {
    (rational(), -4i64..=8, 1i64..=2, 0u32..=3).prop_map(|(c, n, d, m)| LogPowTerm::exact(c, rat(n, d), m))
}

fn expansion() -> impl Strategy<Value = SingExpansion> {
    prop::collection::vec(term(), 0..8).prop_map(SingExpansion::from_terms)
}

/// Terms with exponent above −1, so antiderivatives stay in the class.
fn integrable() -> impl Strategy<Value = SingExpansion> {
    prop::collection::vec((rational(), -1i64..=6, 1i64..=2, 0u32..=3), 1..5).prop_map(|v| {
        SingExpansion::from_terms(v.into_iter().filter_map(|(c, n, d, m)| {
            let p = rat(n, d);
            (p > int(-1)).then(|| LogPowTerm::exact(c, p, m))
        }))
    })
}

fn chain(depth: u32) -> BoxedStrategy<ChainExpr> {
    let leaf = (1i64..=3, 1i64..=2, 0u32..=1).prop_map(|(n, d, e)| ChainExpr::leaf(rat(n, d), e));
    if depth == 0 {
        return leaf.boxed();
    }
    (leaf, prop::option::of((0i64..=2, prop::collection::vec(chain(depth - 1), 1..=2))))
        .prop_map(|(x, f)| match f {
            None => x,
            Some((c, terms)) => x.times(Factor { constant: int(c), terms }),
        })
        .boxed()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalize_is_idempotent(e in expansion()) {
        let once = e.normalize();
        prop_assert_eq!(once.normalize(), once);
    }

    #[test]
    fn euler_solve_inverts_apply(rhs in expansion(), s in rational()) {
        let op = EulerOp::new(s.clone());
        let back = op.apply(&op.solve(&rhs));
        let diff = back.sub(&rhs.normalize());
        // Only the homogeneous t^s term may survive, with a zero coefficient.
        prop_assert!(diff.terms().iter().all(|t| t.coeff.is_exact_zero()), "{}", diff);
    }

    #[test]
    fn resonance_raises_the_log_power(c in rational(), s in rational(), m in 0u32..4) {
        prop_assume!(c != int(0));
        let rhs = SingExpansion::monomial(c.clone(), s.clone(), m);
        let sol = EulerOp::new(s.clone()).solve(&rhs);
        let top = sol.terms().iter().find(|t| t.logpow == m + 1).expect("raised term");
        prop_assert_eq!(&top.exponent, &s);
        prop_assert_eq!(&top.coeff, &Coefficient::exact(c / int(m as i64 + 1)));
    }

    #[test]
    fn antiderivative_differentiates_back(f in integrable(), x in 0.05f64..0.9) {
        let g = f.antiderivative().unwrap();
        let h = 1e-5 * x;
        let at = |e: &SingExpansion, y: f64| e.eval(Complex64::new(y, 0.0)).unwrap();
        let d = (at(&g, x + h) - at(&g, x - h)) / (2.0 * h);
        let v = at(&f, x);
        prop_assert!((d - v).norm() <= 1e-5 * (1.0 + v.norm()), "{} vs {}", d, v);
    }

    #[test]
    fn weight_density_matches_mellin_density(e in prop::collection::vec(0u32..=3, 1..=3)) {
        let spec = IntegralSpec::new(e, Kernel::Log);
        prop_assert_eq!(weight_density(&spec).unwrap(), mellin_density(&spec).unwrap());
    }

    #[test]
    fn chain_display_round_trips(p in chain(2)) {
        let text = p.to_string();
        let back: ChainExpr = text.parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn jobspec_round_trips(
        seed in any::<u64>(),
        points in 4usize..40,
        tol in 1e-4f64..0.5,
        exps in prop::collection::vec(0u32..4, 1..4),
        outer in 0u32..3,
        fmt in 0usize..3,
    ) {
        let job = JobSpec {
            command: Command::Analyze,
            target: Target::Integral { family: None, spec: IntegralSpec::new(exps, Kernel::Log).with_outer_log(outer) },
            oracle: OracleParams { seed, points, coefficient_tol: tol, ..OracleParams::default() },
            expect_coefficient: None,
            format: [Format::Text, Format::Csv, Format::Structured][fmt],
            out: None,
        };
        prop_assert_eq!(parse_jobspec(&job.to_text()).unwrap(), job);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn smear_is_a_monotone_form_f(p in chain(1)) {
        let f = smear(&p).unwrap();
        prop_assert!(check_form_f(&f, false).is_ok());
        let hi = singulog::rational::to_f64(f.support_hi());
        let mut prev = f.eval(0.0);
        for k in 1..=64 {
            let v = f.eval(hi * k as f64 / 64.0);
            prop_assert!(v >= prev - 1e-12, "{p}: {v} < {prev}");
            prev = v;
        }
    }

    #[test]
    fn smear_agrees_with_monte_carlo(p in chain(1), r0 in 0.05f64..1.0, seed in any::<u64>()) {
        let f = smear(&p).unwrap();
        let (mean, se) = mc_theta(&p, r0, 40_000, seed).unwrap();
        let allowed = 5.0 * se.max(1.0 / 40_000.0);
        prop_assert!((f.eval(r0) - mean).abs() <= allowed, "{p} at {r0}: {} vs {mean} ± {se}", f.eval(r0));
    }
}
