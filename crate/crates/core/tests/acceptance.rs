//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Runs with `harness = false`.

use std::time::Instant;

use singulog::formf::chain::ChainExpr;
use singulog::formf::{add_conv, mult_conv, self_energy_weight, smear, theta_reduce, FormF};
use singulog::nested::{eval_I42, eval_J, eval_prop45, Family, IntegralSpec, Kernel, Prop44Variant};
use singulog::oracle::{
    exponent_grid_for, fit_singularity, sample_ray, verify_samples, verify_smear, FitMode, FitReport, QuadOptions,
    Sample, SampleRay, Verdict, VerifyOptions, VerifyReport,
};
use singulog::prep::{gradient_check, prepare_grid, preset, run_scenario, AnalyticSurface};
use singulog::rational::{factorial, int, neg_one_pow, rat};
use singulog::{Coefficient, LogPowTerm, Rational, SingExpansion};

const COEFFICIENT_REL: f64 = 0.02;
const CELL_SECONDS_J: f64 = 120.0;
const CELL_SECONDS_STRUCTURE: f64 = 300.0;
const SUITE_SECONDS: f64 = 1800.0;
const MC_SAMPLES: usize = 1_000_000;
const MC_SIGMAS: f64 = 3.0;
const MC_SEED: u64 = 20240611;
const SELF_ENERGY_TOL: f64 = 1e-10;
const PREP_RESIDUAL: f64 = 1e-10;
const GRADIENT_TOL: f64 = 1e-6;
const MUTATION: (i64, i64) = (11, 10);

struct Outcome {
    ok: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { ok: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, line: impl Into<String>) {
        self.ok &= ok;
        let mark = if ok { "ok " } else { "BAD" };
        self.lines.push(format!("    {mark} {}", line.into()));
    }
}

/// A verified case whose samples are reused by the mutation criterion.
struct Cached {
    label: String,
    spec: IntegralSpec,
    symbolic: SingExpansion,
    samples: Vec<Sample>,
}

fn options() -> VerifyOptions {
    let mut o = VerifyOptions::default();
    o.tolerances.coefficient_rel = COEFFICIENT_REL;
    o
}

fn take_samples(spec: &IntegralSpec) -> Result<(Vec<Sample>, f64), String> {
    let start = Instant::now();
    let s = sample_ray(spec, &SampleRay::default(), &QuadOptions::default()).map_err(|e| e.to_string())?;
    Ok((s, start.elapsed().as_secs_f64()))
}

fn blind(spec: &IntegralSpec, samples: &[Sample]) -> Result<FitReport, String> {
    let max_logpow = spec.dimension() as u32 + spec.outer_log_power + 1;
    fit_singularity(samples, &FitMode::Blind { max_logpow, exponent_grid: exponent_grid_for(spec) })
        .map_err(|e| e.to_string())
}

fn verdict_of(r: &VerifyReport, name: &str) -> Option<Verdict> {
    r.criteria.iter().find(|c| c.name == name).map(|c| c.verdict)
}

fn detail_of(r: &VerifyReport, name: &str) -> String {
    r.criteria.iter().find(|c| c.name == name).map(|c| c.detail.clone()).unwrap_or_default()
}

fn show(r: &Option<Rational>) -> String {
    r.as_ref().map_or("none".into(), |r| r.to_string())
}

fn leading_exact(e: &SingExpansion) -> Option<(Rational, Rational, u32)> {
    let l = e.leading()?;
    Some((l.coeff.as_exact()?.clone(), l.exponent.clone(), l.logpow))
}

/// Samples one family cell, checks the guided coefficient and caches the samples.
fn oracle_cell(o: &mut Outcome, cache: &mut Vec<Cached>, label: String, fam: &Family, budget: f64, check_logpow: bool) {
    let spec = fam.spec();
    let symbolic = match fam.symbolic() {
        Ok(s) => s,
        Err(e) => return o.check(false, format!("{label}: {e}")),
    };
    let (samples, secs) = match take_samples(&spec) {
        Ok(x) => x,
        Err(e) => return o.check(false, format!("{label}: quadrature {e}")),
    };
    let r = verify_samples(&spec, &symbolic, samples.clone(), &options());
    let coef = verdict_of(&r, "coefficient") == Some(Verdict::Pass);
    o.check(coef, format!("{label}: oracle {}", detail_of(&r, "coefficient")));
    if check_logpow {
        let lp = verdict_of(&r, "logpow") == Some(Verdict::Pass);
        o.check(lp, format!("{label}: blind log power {}", detail_of(&r, "logpow")));
    }
    o.check(secs < budget, format!("{label}: {secs:.1} s (budget {budget:.0} s)"));
    cache.push(Cached { label, spec, symbolic, samples });
}

fn criterion_1(cache: &mut Vec<Cached>) -> Outcome {
    let mut o = Outcome::new();
    for alpha in [rat(-1, 2), rat(-3, 2), rat(-5, 2)] {
        for j in 1..=3u32 {
            let label = format!("J({alpha}, {j})");
            let want = neg_one_pow(j as i64 - 2) / (factorial(j - 1) * (&alpha + int(1)));
            match eval_J(&alpha, j).ok().as_ref().and_then(leading_exact) {
                Some((c, p, m)) => o.check(
                    c == want && p == &alpha + int(1) && m == j - 1,
                    format!("{label}: symbolic {c}·t^({p})·L^{m}, expected {want}"),
                ),
                None => o.check(false, format!("{label}: no exact leading term")),
            }
            oracle_cell(&mut o, cache, label, &Family::J { alpha: alpha.clone(), j }, CELL_SECONDS_J, false);
        }
    }
    o
}

fn criterion_2(cache: &mut Vec<Cached>) -> Outcome {
    let mut o = Outcome::new();
    for j in 1..=3u32 {
        let label = format!("J(-1, {j})");
        let want = neg_one_pow(j as i64) / factorial(j);
        match eval_J(&int(-1), j).ok().as_ref().and_then(leading_exact) {
            Some((c, p, m)) => {
                o.check(c == want && p == int(0) && m == j, format!("{label}: symbolic {c}·L^{m}, expected {want}"))
            }
            None => o.check(false, format!("{label}: no exact leading term")),
        }
        oracle_cell(&mut o, cache, label, &Family::J { alpha: int(-1), j }, CELL_SECONDS_J, true);
    }
    let c2 = eval_J(&int(-1), 2).ok().as_ref().and_then(leading_exact).map(|x| x.0);
    o.check(c2 == Some(rat(1, 2)), format!("C_2 = {}", show(&c2)));
    o
}

fn criterion_3(cache: &mut Vec<Cached>) -> Outcome {
    let mut o = Outcome::new();
    for n in 0..=2u32 {
        for j in 1..=3u32 {
            let label = format!("I42({n}, {j})");
            let want = neg_one_pow(j as i64) / (factorial(j) * int(n as i64 + 1));
            match eval_I42(n, j).ok().as_ref().and_then(leading_exact) {
                Some((c, _, _)) => o.check(c == want, format!("{label}: symbolic {c}, expected {want}")),
                None => o.check(false, format!("{label}: no exact leading term")),
            }
            oracle_cell(&mut o, cache, label, &Family::I42 { n, j }, CELL_SECONDS_J, false);
        }
    }
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    for exps in [vec![0u32, 0], vec![1, 0], vec![2, 1, 0]] {
        let spec = IntegralSpec::new(exps.clone(), Kernel::Log);
        let (sym, bound) = match singulog::nested::eval_prop43(&spec) {
            Ok(x) => x,
            Err(e) => {
                o.check(false, format!("{exps:?}: {e}"));
                continue;
            }
        };
        let lead = sym.leading().map(|t| t.key());
        let n = exps.len() as u32;
        let emin = *exps.iter().min().expect("nonempty") as i64;
        let bound_ok = bound.admits(&sym)
            && sym.terms().iter().all(|t| t.exponent >= int(emin + 1) && t.logpow <= n);
        o.check(bound_ok, format!("{exps:?}: {sym} within exponent ≥ {}, log power ≤ {n}", emin + 1));
        match take_samples(&spec).and_then(|(s, secs)| blind(&spec, &s).map(|f| (f, secs))) {
            Ok((fit, secs)) => {
                let fit_exp = fit.leading.as_ref().map(|k| k.0.clone());
                let sym_exp = lead.as_ref().map(|k| k.0.clone());
                o.check(
                    fit_exp.is_some() && fit_exp == sym_exp,
                    format!("{exps:?}: blind exponent {} vs symbolic {}", show(&fit_exp), show(&sym_exp)),
                );
                o.check(secs < CELL_SECONDS_STRUCTURE, format!("{exps:?}: {secs:.1} s"));
            }
            Err(e) => o.check(false, format!("{exps:?}: {e}")),
        }
    }
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let x2: ChainExpr = "x*x".parse().expect("chain");
    let want = SingExpansion::from_terms([LogPowTerm::exact(int(1), int(1), 0), LogPowTerm::exact(int(-1), int(1), 1)]);
    let f = smear(&x2).expect("smear");
    let body = f.first_piece_expansion();
    o.check(
        f.pieces().len() == 1 && body.as_ref() == Some(&want),
        format!("smear(x1 x2) = {f}, expected r0 - r0·log r0"),
    );
    let one = FormF::unit(SingExpansion::monomial(int(1), int(0), 0));
    let m = mult_conv(&one).expect("mult_conv");
    let minus_log = SingExpansion::monomial(int(-1), int(0), 1);
    o.check(m.first_piece_expansion().as_ref() == Some(&minus_log), format!("mult_conv(1) = {m}"));

    let x3: ChainExpr = "x*x*x".parse().expect("chain");
    let f3 = smear(&x3).expect("smear");
    for c in verify_smear(&x3, &f3, &[0.05, 0.1, 0.5], MC_SAMPLES, MC_SEED, MC_SIGMAS) {
        o.check(c.verdict == Verdict::Pass, format!("smear(x1 x2 x3) {}: {}", c.name, c.detail));
    }
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let inputs = [
        SingExpansion::monomial(int(1), int(0), 0),
        SingExpansion::monomial(int(-1), int(0), 1),
        SingExpansion::from_terms([LogPowTerm::exact(int(1), int(1), 1), LogPowTerm::exact(int(2), int(0), 0)]),
    ];
    for i in inputs {
        let h = add_conv(&FormF::unit(i.clone())).expect("add_conv");
        let upper = h.restrict(&int(1), &int(2)).expect("restrict");
        let f = theta_reduce(&upper).expect("theta_reduce");
        let first = &f.pieces()[0];
        let single = first.components.len() == 1 && first.components[0].body.terms().len() == 1;
        let t = &first.components[0].body.terms()[0];
        o.check(
            single && t.exponent == int(1) && t.logpow == 0 && first.hi == int(1),
            format!("I = {i}: [1,2] contribution on [0,1] is {}", first.components[0].body),
        );
    }
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let polys = [
        ("1", SingExpansion::monomial(int(1), int(0), 0)),
        ("x", SingExpansion::monomial(int(1), int(1), 0)),
        ("x^2", SingExpansion::monomial(int(1), int(2), 0)),
    ];
    let xlogx = SingExpansion::from_terms([LogPowTerm::exact(int(1), int(1), 1)]);
    for k in [rat(1, 2), int(1), int(2)] {
        for (name, f) in &polys {
            match self_energy_weight(f, &k) {
                Ok(r) => o.check(r.exact_match(), format!("f = {name}, k = {k}: {} = {}", r.lhs, r.rhs)),
                Err(e) => o.check(false, format!("f = {name}, k = {k}: {e}")),
            }
        }
        match self_energy_weight(&xlogx, &k) {
            Ok(r) => {
                let d = r.numeric_difference().abs().max(r.symbolic_difference().abs());
                o.check(d <= SELF_ENERGY_TOL, format!("f = x log x, k = {k}: |difference| {d:.1e}"));
            }
            Err(e) => o.check(false, format!("f = x log x, k = {k}: {e}")),
        }
    }
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    let cases = [
        ("L_1", Family::L41 { m: 1, a: int(1) }, 2u32),
        ("L_2", Family::L41 { m: 2, a: int(1) }, 3),
        ("K_{1,1}", Family::Prop44 { n: 1, m: 1, which: Prop44Variant::K }, 3),
    ];
    for (label, fam, top) in cases {
        let spec = fam.spec();
        match take_samples(&spec).and_then(|(s, _)| blind(&spec, &s)) {
            Ok(fit) => o.check(
                fit.leading.as_ref().map(|k| k.1) == Some(top),
                format!("{label}: blind top log power {:?}, expected {top}", fit.leading.as_ref().map(|k| k.1)),
            ),
            Err(e) => o.check(false, format!("{label}: {e}")),
        }
    }
    let fam = Family::Prop44 { n: 1, m: 1, which: Prop44Variant::J };
    let spec = fam.spec();
    match take_samples(&spec).and_then(|(s, _)| blind(&spec, &s)) {
        Ok(fit) => {
            let p = fit.leading.as_ref().map(|k| k.0.clone());
            o.check(p.as_ref().is_some_and(|p| *p >= int(1)), format!("J_{{1,1}}: blind leading exponent {} ≥ 1", show(&p)));
        }
        Err(e) => o.check(false, format!("J_{{1,1}}: {e}")),
    }
    o
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new();
    let spec = IntegralSpec::new(vec![0, 1], Kernel::Log).with_outer_log(1);
    let (sym, _) = match eval_prop45(&spec) {
        Ok(x) => x,
        Err(e) => {
            o.check(false, e.to_string());
            return o;
        }
    };
    let ok = sym.terms().iter().all(|t| t.exponent >= int(1) && t.logpow <= 3);
    o.check(ok && !sym.is_empty(), format!("symbolic {sym}: exponent ≥ 1, log power ≤ 3"));
    match take_samples(&spec).and_then(|(s, _)| blind(&spec, &s)) {
        Ok(fit) => {
            let fe = fit.leading.as_ref().map(|k| k.0.clone());
            let se = sym.leading().map(|t| t.exponent.clone());
            o.check(fe.is_some() && fe == se, format!("blind leading exponent {} vs symbolic {}", show(&fe), show(&se)));
        }
        Err(e) => o.check(false, e),
    }
    o
}

fn criterion_10() -> Outcome {
    let mut o = Outcome::new();
    for s in [AnalyticSurface::toy_exponential(), AnalyticSurface::toy_linear()] {
        match prepare_grid(&s, 0.2, 1e-13) {
            Ok(p) => o.check(
                p.grid.len() == 25 && p.residual_grid < PREP_RESIDUAL,
                format!("{}: residual {:.1e} on {} points, min |B| {:.3}", s.name, p.residual_grid, p.grid.len(), p.min_abs_b),
            ),
            Err(e) => o.check(false, format!("{}: {e}", s.name)),
        }
    }
    o.check(AnalyticSurface::toy_critical().is_err(), "ρ² − q rejected at construction");

    let phi = |x: &[f64]| 1.5 * x[0] + 0.5 * x[1] - 2.0 * x[4] + 0.25 * x[5];
    let expected = [1.5, 0.5, 0.0, 0.0, -2.0, 0.25];
    let at = [0.1, -0.2, 0.3, 0.0, 0.5, 0.7];
    let translated: Vec<f64> = expected.iter().enumerate().map(|(i, e)| e + [0.4, -0.9][i % 2]).collect();
    let (s, c) = 5f64.to_radians().sin_cos();
    let rotated = |x: &[f64]| {
        let mut y = x.to_vec();
        y[0] = c * x[0] - s * x[4];
        y[4] = s * x[0] + c * x[4];
        phi(&y)
    };
    let a = gradient_check(&phi, &at, &expected, 3, GRADIENT_TOL);
    let b = gradient_check(&phi, &at, &translated, 3, GRADIENT_TOL);
    let r = gradient_check(&rotated, &at, &expected, 3, GRADIENT_TOL);
    let r3 = gradient_check(&rotated, &at, &expected, 3, 1e-3);
    o.check(a.verdict == Verdict::Pass, format!("toy gradient: {}", a.detail));
    o.check(b.verdict == Verdict::Pass, format!("translated gradient: {}", b.detail));
    o.check(r.verdict == Verdict::Fail && r3.verdict == Verdict::Fail, format!("5° rotation: {}", r.detail));
    o
}

fn criterion_11() -> Outcome {
    let mut o = Outcome::new();
    for (name, p, m) in [("sec2i", 2, 1), ("sec2i-c", 1, 1), ("sec2ii", 2, 2), ("sec2iii", 1, 2)] {
        match preset(name).and_then(|s| run_scenario(&s)) {
            Ok(r) => {
                o.check(
                    r.leading == Some((int(p), m)),
                    format!("{name}: {}, expected φ^{p} (log φ)^{m}", r.in_phi.display_in("φ")),
                );
                if let Some(c) = r.criteria.iter().find(|c| c.name == "numeric cross-check") {
                    o.check(c.verdict == Verdict::Pass, format!("{name}: {}", c.detail));
                } else if name == "sec2ii" {
                    o.check(false, "sec2ii: no numeric cross-check ran");
                }
            }
            Err(e) => o.check(false, format!("{name}: {e}")),
        }
    }
    o
}

fn mutate(e: &SingExpansion, factor: &Rational) -> SingExpansion {
    let mut terms = e.terms().to_vec();
    if let Some(Coefficient::Exact(c)) = terms.first().map(|t| t.coeff.clone()) {
        terms[0].coeff = Coefficient::exact(c * factor);
    }
    SingExpansion::from_terms(terms)
}

fn criterion_12(cache: &[Cached], elapsed: f64) -> Outcome {
    let mut o = Outcome::new();
    let factors = [rat(MUTATION.0, MUTATION.1), rat(2 * MUTATION.1 - MUTATION.0, MUTATION.1)];
    let mut caught = 0;
    let mut total = 0;
    for c in cache {
        if leading_exact(&c.symbolic).is_none() {
            continue;
        }
        for f in &factors {
            total += 1;
            let r = verify_samples(&c.spec, &mutate(&c.symbolic, f), c.samples.clone(), &options());
            if r.verdict() == Verdict::Fail {
                caught += 1;
            } else {
                o.check(false, format!("{} × {}: not caught ({})", c.label, f, detail_of(&r, "coefficient")));
            }
        }
    }
    o.check(total > 0 && caught == total, format!("{caught}/{total} corrupted leading coefficients rejected"));
    o.check(elapsed < SUITE_SECONDS, format!("suite runtime {elapsed:.0} s (budget {SUITE_SECONDS:.0} s)"));
    o
}

fn main() {
    let start = Instant::now();
    let mut cache = Vec::new();
    let mut failed = 0;
    let mut report = |n: usize, title: &str, o: Outcome| {
        println!("[{}] criterion {n:>2}: {title}", if o.ok { "PASS" } else { "FAIL" });
        for l in &o.lines {
            println!("{l}");
        }
        if !o.ok {
            failed += 1;
        }
    };
    report(1, "leading-coefficient table for J(α, j)", criterion_1(&mut cache));
    report(2, "α = −1 branch of J", criterion_2(&mut cache));
    report(3, "I42(n, j) leading coefficients", criterion_3(&mut cache));
    report(4, "log-kernel nested structure", criterion_4());
    report(5, "smearing identities and Monte Carlo", criterion_5());
    report(6, "additive-tail collapse", criterion_6());
    report(7, "double-integral weight identity", criterion_7());
    report(8, "log-power families, blind top log power", criterion_8());
    report(9, "outer-log bound with d0 < 0", criterion_9());
    report(10, "Weierstrass preparation and gradient check", criterion_10());
    report(11, "scenario presets", criterion_11());
    let elapsed = start.elapsed().as_secs_f64();
    report(12, "mutation suite and runtime", criterion_12(&cache, elapsed));
    println!("acceptance: {} of 12 criteria failed, {:.0} s", failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
