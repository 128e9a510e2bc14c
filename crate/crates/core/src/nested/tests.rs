use super::*;
use crate::logpow::equal_leading;
use crate::rational::rat;

fn lead(e: &SingExpansion) -> (Rational, u32, Rational) {
    let l = e.leading().expect("nonempty");
    (l.exponent.clone(), l.logpow, l.coeff.as_exact().expect("exact leading").clone())
}

/// Both routes agree on the leading term and on every key exact in both.
fn assert_agree(a: &SingExpansion, b: &SingExpansion) {
    assert_eq!(equal_leading(a, b), Ok(true), "\n  a = {a}\n  b = {b}");
    let mut shared = 0;
    for t in a.terms() {
        if let (Some(x), Some(Coefficient::Exact(y))) = (t.coeff.as_exact(), b.coeff_at(t)) {
            assert_eq!(x, y, "key ({}, {}) differs\n  a = {a}\n  b = {b}", t.exponent, t.logpow);
            shared += 1;
        }
    }
    assert!(shared >= 1);
}

trait CoeffAt {
    fn coeff_at(&self, t: &LogPowTerm) -> Option<&Coefficient>;
}

impl CoeffAt for SingExpansion {
    fn coeff_at(&self, t: &LogPowTerm) -> Option<&Coefficient> {
        self.coefficient(&t.exponent, t.logpow)
    }
}

#[test]
fn j_examples() {
    assert_eq!(lead(&eval_J(&int(-1), 2).unwrap()), (int(0), 2, rat(1, 2)));
    assert_eq!(lead(&eval_J(&rat(-1, 2), 2).unwrap()), (rat(1, 2), 1, int(2)));
    assert_eq!(eval_J(&int(-1), 1).unwrap(), SingExpansion::monomial(int(-1), int(0), 1));
    assert!(matches!(eval_J(&int(2), 1), Err(NestedError::NonnegIntegerAlpha(_))));
    assert_eq!(eval_J(&rat(-1, 2), 0), Err(NestedError::ZeroIndex("j")));
}

#[test]
fn j_leading_matches_closed_form() {
    for alpha in [rat(-1, 2), rat(-3, 2), rat(-5, 2), rat(1, 3), int(-2), int(-3)] {
        for j in 1..=5u32 {
            let want = neg_one_pow(j as i64) / (factorial(j - 1) * (&alpha + Rational::one()));
            let got = lead(&eval_J(&alpha, j).unwrap());
            assert_eq!(got, (&alpha + Rational::one(), j - 1, want), "alpha {alpha} j {j}");
        }
    }
    for j in 1..=6u32 {
        let want = neg_one_pow(j as i64) / factorial(j);
        assert_eq!(lead(&eval_J(&int(-1), j).unwrap()), (int(0), j, want));
    }
}

#[test]
fn j_matches_introductory_integral() {
    // I(t) = ∫_0^δ [log(r + t) − log t] dr/r solves t I' = log t − log(t + δ).
    let intro = EulerOp::new(int(0)).solve(&SingExpansion::monomial(int(1), int(0), 1));
    assert_eq!(equal_leading(&intro, &eval_J(&int(-1), 2).unwrap()), Ok(true));
}

#[test]
fn k42_examples() {
    // ∫_0^1 ρ/(t+ρ) dρ = 1 − t log((t+1)/t): singular part +t log t
    let k = eval_K42(&int(-1), 1).unwrap();
    assert_eq!(lead(&k), (int(1), 1, int(1)));
    assert_eq!(k.len(), 1);
    assert_eq!(eval_K42(&rat(-3, 2), 1).unwrap(), SingExpansion::monomial(int(-4), rat(1, 2), 0));
    let k = eval_K42(&int(-2), 2).unwrap();
    assert!(k.max_logpow().unwrap() <= 2);
    assert_eq!(k.min_exponent(), Some(&int(0)));
}

#[test]
fn k42_is_difference_of_j() {
    for alpha in [rat(-1, 2), rat(-3, 2), rat(-7, 3)] {
        for j in 1..=3 {
            let lhs = eval_K42(&alpha, j).unwrap();
            let rhs = eval_J(&(&alpha + Rational::one()), j)
                .unwrap()
                .sub(&eval_J(&alpha, j).unwrap().mul_monomial(&int(1), 0));
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn i42_examples() {
    assert_eq!(lead(&eval_I42(0, 1).unwrap()), (int(1), 1, int(-1)));
    assert_eq!(lead(&eval_I42(1, 2).unwrap()), (int(2), 2, rat(1, 4)));
    let e = eval_I42(2, 1).unwrap();
    assert_eq!((lead(&e).0, lead(&e).1), (int(3), 1));
    for n in 0..=3u32 {
        for j in 1..=4u32 {
            let want = neg_one_pow(j as i64) / (factorial(j) * int(n as i64 + 1));
            let e = eval_I42(n, j).unwrap();
            assert_eq!(lead(&e), (int(n as i64 + 1), j, want));
            assert!(e.terms().iter().all(|t| t.exponent == int(n as i64 + 1) && t.logpow >= 1));
        }
    }
}

#[test]
fn itilde_examples() {
    // ∫_0^1 ρ log(t+ρ) dρ has singular part t²/2 · log t
    assert_eq!(eval_Itilde(0, 1).unwrap(), SingExpansion::monomial(rat(1, 2), int(2), 1));
    let e = eval_Itilde(0, 2).unwrap();
    assert_eq!((e.max_logpow(), e.min_exponent()), (Some(2), Some(&int(2))));
    assert_eq!(eval_Itilde(1, 1).unwrap().min_exponent(), Some(&int(3)));
}

#[test]
fn named_families_match_chain_reduction() {
    for alpha in [rat(-1, 2), rat(-3, 2), int(-1), int(-2)] {
        for j in 1..=3u32 {
            let n = j as usize;
            let chain = eval_nested(&IntegralSpec::new(vec![0; n], Kernel::Power(alpha.clone()))).unwrap();
            assert_agree(&eval_J(&alpha, j).unwrap(), &chain);
            let chain = eval_nested(&IntegralSpec::new(vec![1; n], Kernel::Power(alpha.clone()))).unwrap();
            assert_agree(&eval_K42(&alpha, j).unwrap(), &chain);
        }
    }
    for p in 0..=2u32 {
        for j in 1..=3u32 {
            let n = j as usize;
            let chain = eval_nested(&IntegralSpec::new(vec![0; n], Kernel::PowerLog(p))).unwrap();
            assert_agree(&eval_I42(p, j).unwrap(), &chain);
            let chain = eval_nested(&IntegralSpec::new(vec![1; n], Kernel::PowerLog(p))).unwrap();
            assert_agree(&eval_Itilde(p, j).unwrap(), &chain);
        }
    }
}

#[test]
fn l41_examples() {
    let l = eval_L41(1, &int(1)).unwrap();
    assert_eq!(lead(&l), (int(0), 2, rat(-1, 2)));
    assert_eq!(eval_L41(2, &int(1)).unwrap().max_logpow(), Some(3));
    for m in 1..=3 {
        let spec = IntegralSpec::new(vec![0], Kernel::Power(int(-1))).with_outer_log(m);
        assert_agree(&eval_L41(m, &int(1)).unwrap(), &eval_nested(&spec).unwrap());
        let spec = spec.with_delta(rat(1, 2));
        let a = eval_L41(m, &rat(1, 2)).unwrap();
        let b = eval_nested(&spec).unwrap();
        assert_eq!(equal_leading(&a, &b), Ok(true));
    }
    assert!(eval_L41(0, &int(1)).is_err());
}

#[test]
fn prop44_examples() {
    let k = eval_prop44(1, 1, Prop44Variant::K).unwrap();
    assert_eq!(k.max_logpow(), Some(3));
    assert_eq!(eval_prop44(2, 1, Prop44Variant::K).unwrap().max_logpow(), Some(4));
    let j = eval_prop44(1, 1, Prop44Variant::J).unwrap();
    assert!(j.terms().iter().all(|t| t.exponent == int(1)));
    for n in 1..=2u32 {
        for m in 1..=2u32 {
            let base = IntegralSpec::new(vec![0; n as usize + 1], Kernel::Power(int(-1))).with_outer_log(m);
            let k = eval_prop44(n, m, Prop44Variant::K).unwrap();
            assert_agree(&k, &eval_nested(&base).unwrap());
            let mut log = base.clone();
            log.kernel = Kernel::Log;
            let j = eval_prop44(n, m, Prop44Variant::J).unwrap();
            assert_agree(&j, &eval_nested(&log).unwrap());
            assert_eq!(k.max_logpow(), Some(n + m + 1));
        }
    }
}

#[test]
fn chain_weight_matches_mellin_partial_fractions() {
    let specs = [
        IntegralSpec::new(vec![0, 0], Kernel::Log),
        IntegralSpec::new(vec![2, 1, 0], Kernel::Log),
        IntegralSpec::new(vec![1, 1, 3, 0], Kernel::Log),
        IntegralSpec::new(vec![0, 1], Kernel::Log).with_outer_log(1),
        IntegralSpec::new(vec![2, 0, 2], Kernel::Log).with_outer_log(2),
    ];
    for s in &specs {
        assert_eq!(weight_density(s).unwrap(), mellin_density(s).unwrap(), "{s:?}");
    }
}

#[test]
fn prop43_bounds() {
    for e in [vec![0, 0], vec![1, 0], vec![2, 1, 0], vec![3, 3], vec![0, 2, 1, 1]] {
        let spec = IntegralSpec::new(e.clone(), Kernel::Log);
        let (exp, bound) = eval_prop43(&spec).unwrap();
        assert!(bound.admits(&exp), "{e:?}: {exp}");
        assert_eq!(bound.min_t_exponent, int(*e.iter().min().unwrap() as i64 + 1));
        assert!(!exp.is_empty());
    }
    let (e, b) = eval_prop43(&IntegralSpec::new(vec![0], Kernel::Power(int(-1)))).unwrap();
    assert_eq!(e, SingExpansion::monomial(int(-1), int(0), 1));
    assert!(b.admits(&e));
    let (e, b) = eval_prop43(&IntegralSpec::new(vec![1, 0], Kernel::Power(rat(-1, 2)))).unwrap();
    assert!(b.admits(&e));
    assert_eq!(b.max_log_power, 1);
    let (e, _) = eval_prop43(&IntegralSpec::new(vec![0, 0], Kernel::Power(int(2)))).unwrap();
    assert!(e.is_empty());
    assert!(eval_prop43(&IntegralSpec::new(vec![0], Kernel::PowerLog(1))).is_err());
}

#[test]
fn prop45_by_parts_matches_chain() {
    let cases: [(Vec<u32>, u32); 5] =
        [(vec![0, 0], 1), (vec![0, 1], 1), (vec![0, 2, 1], 1), (vec![1, 3], 2), (vec![0], 1)];
    for (e, m) in cases {
        let spec = IntegralSpec::new(e.clone(), Kernel::Log).with_outer_log(m);
        let (exp, bound) = eval_prop45(&spec).unwrap();
        assert!(bound.admits(&exp), "{e:?} m={m}: {exp}");
        assert_agree(&exp, &eval_nested(&spec).unwrap());
    }
    let (_, b) = eval_prop45(&IntegralSpec::new(vec![0, 0], Kernel::Log).with_outer_log(1)).unwrap();
    assert_eq!((b.min_t_exponent, b.max_log_power), (int(1), 3));
}

#[test]
fn delta_rescaling_keeps_top_coefficients() {
    let spec = IntegralSpec::new(vec![0], Kernel::Power(int(-1))).with_delta(rat(1, 2));
    assert_eq!(lead(&eval_nested(&spec).unwrap()), (int(0), 1, int(-1)));
    // ∫_0^δ log(t+ρ) dρ: singular part −t log t for every δ
    let spec = IntegralSpec::new(vec![0], Kernel::Log).with_delta(rat(1, 3));
    assert_eq!(lead(&eval_nested(&spec).unwrap()), (int(1), 1, int(-1)));
    assert!(IntegralSpec::new(vec![0], Kernel::Log).with_delta(int(2)).validate().is_err());
}

#[test]
fn family_specs_reduce_to_the_named_evaluators() {
    let fams = [
        Family::J { alpha: rat(-1, 2), j: 2 },
        Family::J { alpha: int(-1), j: 3 },
        Family::K42 { alpha: int(-1), j: 1 },
        Family::K42 { alpha: rat(-3, 2), j: 2 },
        Family::I42 { n: 1, j: 2 },
        Family::Itilde { n: 0, j: 2 },
        Family::L41 { m: 2, a: int(1) },
        Family::Prop44 { n: 1, m: 1, which: Prop44Variant::K },
        Family::Prop44 { n: 1, m: 1, which: Prop44Variant::J },
    ];
    for f in fams {
        let named = f.symbolic().unwrap();
        let general = eval_nested(&f.spec()).unwrap();
        assert_eq!(named.leading(), general.leading(), "{}: {named} vs {general}", f.name());
    }
}
