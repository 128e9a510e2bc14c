//! Scenario runner: evaluate a nested reduction in `t`, substitute
//! `t = −φ/C`, and report the leading behavior in `φ`.

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::{complex_grid, weierstrass_prep, AnalyticSurface, PrepError, PrepResult};
use crate::logpow::{Coefficient, EulerOp, LogPowTerm, SingExpansion};
use crate::nested::{eval_J, eval_K42, eval_nested, eval_prop43, eval_prop45, IntegralSpec, Kernel, StructureBound};
use crate::oracle::{fit_singularity, CriterionResult, FitMode, Sample, SampleRay, Verdict};
use crate::quad::{composite_gauss, ComplexSum};
use crate::rational::{binomial, fmt_rational, int, rat, to_f64, Rational};

/// The integral in `t` a scenario reduces to.
#[derive(Debug, Clone, PartialEq)]
pub enum Reduction {
    /// `J(α + 1, j) − t J(α, j)`.
    K42 { alpha: Rational, j: u32 },
    J { alpha: Rational, j: u32 },
    /// Plain nested integral with its structure bound.
    Nested(IntegralSpec),
    /// Outer-log nested integral.
    OuterLog(IntegralSpec),
    /// `∫_0^1 dr/r [g(t + r) − g(t)]` with `g(s) = s^a log s`.
    Difference { power: u32 },
}

/// How `t` relates to the physical variable `φ`.
#[derive(Debug, Clone)]
pub enum Normalization {
    /// Known `C`; `t = −φ/C`.
    Exact { c: Rational },
    /// `C` read off a prepared surface at `q`.
    Surface { prep: Box<PrepResult>, q: Vec<Complex64> },
}

impl Normalization {
    /// `κ` in `t = κ φ`.
    pub fn kappa(&self) -> Result<Complex64, PrepError> {
        match self {
            Normalization::Exact { c } => {
                if c.is_zero() {
                    return Err(PrepError::Scenario("C must be nonzero".into()));
                }
                Ok(Complex64::new(-to_f64(c).recip(), 0.0))
            }
            Normalization::Surface { prep, q } => Ok(-prep.c(q)?.inv()),
        }
    }

    fn exact_kappa(&self) -> Option<Rational> {
        match self {
            Normalization::Exact { c } if !c.is_zero() => Some(-c.recip()),
            _ => None,
        }
    }
}

/// Numeric cross-check of a [`Reduction::Difference`] scenario on a surface.
#[derive(Debug, Clone)]
pub struct CrossCheck {
    pub surface: AnalyticSurface,
    /// Direction and depth of the path `q → q̂` (first coordinate).
    pub ray: SampleRay,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub reduction: Reduction,
    /// Extra antiderivatives in `t` applied after the reduction.
    pub outer_integrations: u32,
    pub normalization: Normalization,
    /// Expected leading `(exponent, log power)` in `φ`.
    pub claim: Option<(Rational, u32)>,
    pub cross_check: Option<CrossCheck>,
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub name: String,
    /// Expansion in `t`.
    pub in_t: SingExpansion,
    /// Expansion in `φ`.
    pub in_phi: SingExpansion,
    pub leading: Option<(Rational, u32)>,
    pub bound: Option<StructureBound>,
    pub criteria: Vec<CriterionResult>,
}

impl ScenarioReport {
    pub fn verdict(&self) -> Verdict {
        Verdict::combine(self.criteria.iter().map(|c| c.verdict))
    }
}

pub fn preset_names() -> &'static [&'static str] {
    &["sec2i", "sec2i-c", "sec2ii", "sec2iii", "prop43-demo", "prop45-demo"]
}

/// Bundled scenarios. The `sec2*` family uses the toy normalization
/// `Φ = (2 + ρ)(ρ + q)` with `C = −2`.
pub fn preset(name: &str) -> Result<Scenario, PrepError> {
    let toy = Normalization::Exact { c: int(-2) };
    let s = |reduction, outer, claim: Option<(i64, u32)>| Scenario {
        name: name.to_string(),
        reduction,
        outer_integrations: outer,
        normalization: toy.clone(),
        claim: claim.map(|(p, m)| (int(p), m)),
        cross_check: None,
    };
    let sc = match name {
        // r dr against the pole, then the remaining momentum integration.
        "sec2i" => s(Reduction::K42 { alpha: int(-1), j: 1 }, 1, Some((2, 1))),
        // dr measure for the C-coupling term.
        "sec2i-c" => s(Reduction::J { alpha: int(-1), j: 1 }, 1, Some((1, 1))),
        "sec2ii" => {
            let mut sc = s(Reduction::Difference { power: 2 }, 0, Some((2, 2)));
            sc.cross_check = Some(CrossCheck {
                surface: AnalyticSurface::toy_shifted(),
                ray: SampleRay::geometric(std::f64::consts::FRAC_PI_2, 1e-1, 1e-4, 24)
                    .expect("valid ray"),
            });
            sc
        }
        "sec2iii" => s(Reduction::Difference { power: 1 }, 0, Some((1, 2))),
        "prop43-demo" => s(Reduction::Nested(IntegralSpec::new(vec![1, 0], Kernel::Log)), 0, None),
        "prop45-demo" => s(Reduction::OuterLog(IntegralSpec::new(vec![0, 1], Kernel::Log).with_outer_log(1)), 0, None),
        other => return Err(PrepError::Scenario(format!("unknown preset {other:?}"))),
    };
    Ok(sc)
}

fn nested_err(e: impl std::fmt::Display) -> PrepError {
    PrepError::Scenario(e.to_string())
}

/// `∫_0^1 dr/r [g(t+r) − g(t)]` for `g(s) = s^a log s`:
/// `t^a D(t) + Σ_{k≥1} C(a,k) t^{a−k} ∫_0^1 r^{k−1} log(t+r) dr` with
/// `t D′ = −∫_0^1 dr/(t+r)`.
pub fn difference_expansion(a: u32) -> Result<SingExpansion, PrepError> {
    if a == 0 {
        return Err(PrepError::Scenario("difference power must be positive".into()));
    }
    let j = eval_J(&int(-1), 1).map_err(nested_err)?;
    let d = EulerOp::new(int(0)).solve_labeled(&j.neg(), "D");
    let mut out = d.mul_monomial(&int(a as i64), 0);
    for k in 1..=a {
        let inner = eval_nested(&IntegralSpec::new(vec![k - 1], Kernel::Log)).map_err(nested_err)?;
        out = out.add(&inner.mul_monomial(&int((a - k) as i64), 0).scale(&binomial(a, k)));
    }
    Ok(out.singular_part())
}

/// Numeric value of the difference integral at complex `t`, on geometric
/// panels that resolve the scale `|t|`.
pub fn difference_numeric(a: u32, t: Complex64) -> Complex64 {
    let g = |s: Complex64| s.powu(a) * s.ln();
    let gt = g(t);
    let f = |r: f64| (g(t + r) - gt) / r;
    let mut edges = vec![0.0];
    let mut x = t.norm().min(1.0);
    while x < 1.0 {
        edges.push(x);
        x *= 2.0;
    }
    edges.push(1.0);
    let mut acc = ComplexSum::default();
    for w in edges.windows(2) {
        let (xs, ws) = composite_gauss(w[0], w[1], 1, 20);
        for (x, wt) in xs.iter().zip(&ws) {
            acc.add(f(*x) * *wt);
        }
    }
    acc.value()
}

/// `c t^p (log t)^m` with `t = κφ`, expanded in `log φ`.
fn substitute(e: &SingExpansion, kappa: Complex64, exact: Option<&Rational>) -> SingExpansion {
    if exact.is_some_and(|k| k.is_one()) {
        return e.clone();
    }
    let log_k = kappa.ln();
    let mut out = Vec::new();
    for t in e.terms() {
        let pf = to_f64(&t.exponent);
        let scale = kappa.powf(pf);
        for k in 0..=t.logpow {
            let b = to_f64(&binomial(t.logpow, k));
            let factor = scale * log_k.powu(t.logpow - k) * b;
            let coeff = match (&t.coeff, exact) {
                // Top log power with an integer exponent and rational κ stays exact.
                (Coefficient::Exact(c), Some(kr)) if k == t.logpow && crate::rational::is_integer(&t.exponent) => {
                    let p = crate::rational::as_i64(&t.exponent).expect("integer exponent");
                    Coefficient::exact(c * crate::rational::powi(kr, p))
                }
                (c, _) if factor.im.abs() <= 1e-14 * factor.norm() => c.scale_f64(factor.re),
                _ => Coefficient::unknown(format!("{}·κ-phase", t.coeff)),
            };
            out.push(LogPowTerm::new(coeff, t.exponent.clone(), k));
        }
    }
    SingExpansion::from_terms(out)
}

pub fn run_scenario(s: &Scenario) -> Result<ScenarioReport, PrepError> {
    let (mut in_t, bound) = match &s.reduction {
        Reduction::K42 { alpha, j } => (eval_K42(alpha, *j).map_err(nested_err)?, None),
        Reduction::J { alpha, j } => (eval_J(alpha, *j).map_err(nested_err)?, None),
        Reduction::Nested(spec) => {
            let (e, b) = eval_prop43(spec).map_err(nested_err)?;
            (e, Some(b))
        }
        Reduction::OuterLog(spec) => {
            let (e, b) = eval_prop45(spec).map_err(nested_err)?;
            (e, Some(b))
        }
        Reduction::Difference { power } => (difference_expansion(*power)?, None),
    };
    for _ in 0..s.outer_integrations {
        in_t = in_t.antiderivative().map_err(nested_err)?.singular_part();
    }
    let kappa = s.normalization.kappa()?;
    let in_phi = substitute(&in_t, kappa, s.normalization.exact_kappa().as_ref()).singular_part();
    let leading = in_phi.leading().map(|t| t.key());

    let mut criteria = Vec::new();
    if let Some(claim) = &s.claim {
        let ok = leading.as_ref() == Some(claim);
        criteria.push(CriterionResult::new(
            "leading term",
            if ok { Verdict::Pass } else { Verdict::Fail },
            format!("found {}, expected {}", fmt_key(&leading), fmt_key(&Some(claim.clone()))),
        ));
    }
    if let Some((p, _)) = &leading {
        let ok = *p >= int(1);
        criteria.push(CriterionResult::new(
            "N ≥ 1",
            if ok { Verdict::Pass } else { Verdict::Fail },
            format!("leading exponent {}", fmt_rational(p)),
        ));
    }
    if let Some(b) = &bound {
        let ok = b.admits(&in_phi);
        criteria.push(CriterionResult::new(
            "structure bound",
            if ok { Verdict::Pass } else { Verdict::Fail },
            format!("exponent ≥ {}, log power ≤ {}", fmt_rational(&b.min_t_exponent), b.max_log_power),
        ));
    }
    if let (Some(cc), Reduction::Difference { power }) = (&s.cross_check, &s.reduction) {
        criteria.push(cross_check(cc, *power, &leading));
    }
    Ok(ScenarioReport { name: s.name.clone(), in_t, in_phi, leading, bound, criteria })
}

/// Prepares the surface, maps each `q` on the ray to `(φ, t = −φ/C)`,
/// evaluates the difference integral at `t` and fits it blind in `φ`.
fn cross_check(cc: &CrossCheck, power: u32, leading: &Option<(Rational, u32)>) -> CriterionResult {
    let name = "numeric cross-check";
    let base = cc.surface.base().to_vec();
    let qs: Vec<Vec<Complex64>> = cc
        .ray
        .points()
        .into_iter()
        .map(|z| {
            let mut q = base.clone();
            q[0] += z;
            q
        })
        .collect();
    let prep = match weierstrass_prep(&cc.surface, &qs, 1e-13) {
        Ok(p) => p,
        Err(e) => return CriterionResult::new(name, Verdict::Inconclusive, e.to_string()),
    };
    let samples: Vec<Sample> = prep
        .grid
        .iter()
        .zip(&cc.ray.epsilons)
        .map(|(g, &eps)| {
            let t = -g.phi / g.c;
            Sample { epsilon: eps, t: g.phi, value: difference_numeric(power, t), quad_error: 0.0 }
        })
        .collect();
    let mode = FitMode::Blind { max_logpow: power + 2, exponent_grid: (0..=8).map(|k| rat(k, 2)).collect() };
    match fit_singularity(&samples, &mode) {
        Err(e) => CriterionResult::new(name, Verdict::Inconclusive, e.to_string()),
        Ok(fit) => {
            let detail = format!("blind fit in φ: {}, symbolic {}", fmt_key(&fit.leading), fmt_key(leading));
            let v = if &fit.leading == leading {
                Verdict::Pass
            } else if fit.cannot_separate(leading) {
                Verdict::Inconclusive
            } else {
                Verdict::Fail
            };
            CriterionResult::new(name, v, detail)
        }
    }
}

fn fmt_key(k: &Option<(Rational, u32)>) -> String {
    match k {
        Some((p, m)) => format!("φ^{} (log φ)^{}", fmt_rational(p), m),
        None => "no singular term".into(),
    }
}

/// A 5×5 prepared grid around the base point of `surface`.
pub fn prepare_grid(surface: &AnalyticSurface, half_width: f64, tol: f64) -> Result<PrepResult, PrepError> {
    weierstrass_prep(surface, &complex_grid(surface.base(), half_width, 5), tol)
}
