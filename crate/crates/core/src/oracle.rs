//! Direct numerical evaluation of nested integrals and least-squares
//! extraction of their leading singular behaviour.
//!
//! Nothing here uses the symbolic reductions: [`quad_nested`] integrates
//! the original cube integral, and [`fit_singularity`] only sees sampled
//! values.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formf::{ChainExpr, FormF};
use crate::logpow::SingExpansion;
use crate::nested::{IntegralSpec, NestedError};
use crate::quad::{composite_gauss, ComplexSum};
use crate::rational::{fmt_rational, int, is_nonneg_integer, rat, to_f64, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("quadrature did not reach the target {target:e}: last {last}, previous {previous}")]
    ConvergenceFailure { last: Complex64, previous: Complex64, target: f64 },
    #[error("basis is numerically collinear on this ray (condition {condition:e})")]
    RankDeficient { condition: f64 },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Nested(#[from] NestedError),
}

/// Points `t = ε e^{iθ}` approaching the origin from the upper half plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRay {
    pub theta: f64,
    pub epsilons: Vec<f64>,
}

impl Default for SampleRay {
    fn default() -> Self {
        SampleRay::geometric(PI / 2.0, 1e-2, 1e-6, 24).expect("valid default ray")
    }
}

impl SampleRay {
    /// `count` magnitudes spaced geometrically from `eps_max` down to `eps_min`.
    pub fn geometric(theta: f64, eps_max: f64, eps_min: f64, count: usize) -> Result<Self, OracleError> {
        if count < 2 || !(eps_min > 0.0 && eps_max > eps_min) {
            return Err(OracleError::InvalidInput("need eps_max > eps_min > 0 and two points".into()));
        }
        let ratio = (eps_min / eps_max).powf(1.0 / (count - 1) as f64);
        let epsilons = (0..count).map(|k| eps_max * ratio.powi(k as i32)).collect();
        let ray = SampleRay { theta, epsilons };
        ray.validate()?;
        Ok(ray)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if !(self.theta > 0.0 && self.theta < PI) {
            return Err(OracleError::InvalidInput(format!("theta {} outside (0, π)", self.theta)));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) || self.epsilons.iter().any(|e| *e <= 0.0) {
            return Err(OracleError::InvalidInput("epsilons must be positive and decreasing".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.epsilons.iter().map(|e| Complex64::from_polar(*e, self.theta)).collect()
    }
}

/// Controls for [`quad_nested_with`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadOptions {
    pub target_rel_err: f64,
    /// Number of panel halvings tried after the first level.
    pub max_depth: u32,
    /// Panels per unit length of the exponential coordinate at level 0.
    pub panels_per_unit: f64,
    /// Extra range beyond `log(1/|t|)` before the orthant is truncated.
    pub tail_margin: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { target_rel_err: 1e-9, max_depth: 2, panels_per_unit: 1.0, tail_margin: 32.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: u64,
}

const COARSE_ORDER: usize = 8;
const FINE_ORDER: usize = 12;

/// The nested integral at a single `t` with `Im t > 0`.
pub fn quad_nested(spec: &IntegralSpec, t: Complex64, target_rel_err: f64) -> Result<Complex64, OracleError> {
    let opts = QuadOptions { target_rel_err, ..QuadOptions::default() };
    quad_nested_with(spec, t, &opts).map(|r| r.value)
}

/// As [`quad_nested`], returning the error estimate.
///
/// Every variable is mapped to `r = e^{-s}` (the first one to `δ e^{-s}`),
/// so the product of the variables becomes `δ e^{-Σs}` and the integrand is
/// smooth on the orthant. The orthant is cut at `Σs = log(δ/|t|) + margin`,
/// beyond which the kernel is constant to working precision. Each level
/// compares 8- and 12-point Gauss panels; the panels are halved until the
/// two agree to the target.
pub fn quad_nested_with(spec: &IntegralSpec, t: Complex64, opts: &QuadOptions) -> Result<QuadResult, OracleError> {
    spec.validate()?;
    if t.im <= 0.0 {
        return Err(OracleError::InvalidInput("Im t must be positive".into()));
    }
    if !(opts.target_rel_err > 0.0) {
        return Err(OracleError::InvalidInput("target_rel_err must be positive".into()));
    }
    let delta = to_f64(&spec.delta);
    let smax = (delta / t.norm()).ln().max(0.0) + opts.tail_margin;
    let mut prev_err = f64::INFINITY;
    let mut evaluations = 0;
    let mut last = (Complex64::zero(), Complex64::zero());
    for level in 0..=opts.max_depth {
        let panels = ((smax * opts.panels_per_unit).ceil() as usize).max(1) << level;
        let coarse = cube_sum(spec, t, smax, panels, COARSE_ORDER, &mut evaluations);
        let fine = cube_sum(spec, t, smax, panels, FINE_ORDER, &mut evaluations);
        let err = (fine - coarse).norm();
        last = (fine, coarse);
        if err <= opts.target_rel_err * fine.norm() {
            return Ok(QuadResult { value: fine, error: err, evaluations });
        }
        // Round-off floor reached: refining further cannot help.
        if level > 0 && err > 0.5 * prev_err {
            break;
        }
        prev_err = err;
    }
    Err(OracleError::ConvergenceFailure { last: last.0, previous: last.1, target: opts.target_rel_err })
}

struct Axis {
    s: Vec<f64>,
    exp_neg_s: Vec<f64>,
    weight: Vec<f64>,
}

fn cube_sum(spec: &IntegralSpec, t: Complex64, smax: f64, panels: usize, order: usize, evals: &mut u64) -> Complex64 {
    let (s, w) = composite_gauss(0.0, smax, panels, order);
    let delta = to_f64(&spec.delta);
    let log_delta = delta.ln();
    let m = spec.outer_log_power as i32;
    let axes: Vec<Axis> = spec
        .measure_exponents
        .iter()
        .enumerate()
        .map(|(j, &e)| {
            let weight = s
                .iter()
                .zip(&w)
                .map(|(&si, &wi)| {
                    let mut x = wi * (-(e as f64 + 1.0) * si).exp();
                    if j == 0 {
                        x *= delta.powi(e as i32 + 1) * (log_delta - si).powi(m);
                    }
                    x
                })
                .collect();
            Axis { exp_neg_s: s.iter().map(|x| (-x).exp()).collect(), s: s.clone(), weight }
        })
        .collect();
    let mut count = 0u64;
    let v = axis_sum(&axes, 0, 0.0, delta, spec, t, smax, &mut count);
    *evals += count;
    v
}

#[allow(clippy::too_many_arguments)]
fn axis_sum(
    axes: &[Axis],
    d: usize,
    partial: f64,
    scale: f64,
    spec: &IntegralSpec,
    t: Complex64,
    smax: f64,
    count: &mut u64,
) -> Complex64 {
    let axis = &axes[d];
    let mut acc = ComplexSum::default();
    let last = d + 1 == axes.len();
    for i in 0..axis.s.len() {
        let p = partial + axis.s[i];
        if p > smax {
            break;
        }
        let u = scale * axis.exp_neg_s[i];
        let inner = if last {
            *count += 1;
            spec.kernel.eval(t + u)
        } else {
            axis_sum(axes, d + 1, p, u, spec, t, smax, count)
        };
        acc.add(inner * axis.weight[i]);
    }
    acc.value()
}

/// One sampled value of the integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Sample {
    pub epsilon: f64,
    #[serde(serialize_with = "ser_complex", deserialize_with = "de_complex")]
    pub t: Complex64,
    #[serde(serialize_with = "ser_complex", deserialize_with = "de_complex")]
    pub value: Complex64,
    pub quad_error: f64,
}

fn de_complex<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
    let (re, im) = <(f64, f64) as serde::Deserialize>::deserialize(d)?;
    Ok(Complex64::new(re, im))
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Evaluates the integral at every point of the ray, spreading the points over
/// the available cores. Results are independent of the thread count.
pub fn sample_ray(spec: &IntegralSpec, ray: &SampleRay, opts: &QuadOptions) -> Result<Vec<Sample>, OracleError> {
    ray.validate()?;
    let pts = ray.points();
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(pts.len());
    let mut results: Vec<Option<Result<QuadResult, OracleError>>> = vec![None; pts.len()];
    std::thread::scope(|scope| {
        for (chunk_idx, chunk) in results.chunks_mut(pts.len().div_ceil(threads)).enumerate() {
            let pts = &pts;
            scope.spawn(move || {
                let base = chunk_idx * pts.len().div_ceil(threads);
                for (k, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(quad_nested_with(spec, pts[base + k], opts));
                }
            });
        }
    });
    results
        .into_iter()
        .zip(ray.epsilons.iter().zip(&pts))
        .map(|(r, (&epsilon, &t))| {
            let q = r.expect("every slot filled")?;
            Ok(Sample { epsilon, t, value: q.value, quad_error: q.error })
        })
        .collect()
}

/// How [`fit_singularity`] chooses its basis.
#[derive(Debug, Clone, PartialEq)]
pub enum FitMode {
    /// Fit exactly these `(exponent, logpow)` terms plus holomorphic padding.
    Guided(Vec<(Rational, u32)>),
    /// Search over candidate leading terms.
    Blind { max_logpow: u32, exponent_grid: Vec<Rational> },
}

/// Outcome of a least-squares fit of sampled values.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// Leading singular term, `None` when the data are explained by a
    /// holomorphic function alone.
    pub leading: Option<(Rational, u32)>,
    pub exponent: f64,
    pub logpow: u32,
    pub coefficient: Complex64,
    pub coefficient_stderr: f64,
    /// Root-mean-square of the relative residuals.
    pub residual_rms: f64,
    pub basis_used: Vec<(Rational, u32)>,
    pub coefficients: Vec<Complex64>,
    /// Ratio of extreme singular values of the column-scaled design matrix.
    pub condition_diagnostic: f64,
    /// Relative residual at each sample.
    pub sample_residuals: Vec<f64>,
    /// Blind mode only: residual of every candidate in scan order. `None`
    /// marks the holomorphic-only model.
    pub candidates: Vec<(Option<(Rational, u32)>, f64)>,
}

impl FitReport {
    /// True when the blind scan fitted `key` about as well as the chosen
    /// candidate, so the data cannot tell them apart.
    pub fn cannot_separate(&self, key: &Option<(Rational, u32)>) -> bool {
        self.candidates
            .iter()
            .find(|(k, _)| k == key)
            .is_some_and(|(_, r)| *r <= BLIND_SEPARATION * self.residual_rms)
    }
}

const BLIND_SEPARATION: f64 = 10.0;
const HOLOMORPHIC_PADDING: u32 = 2;
const BLIND_ACCEPT_FACTOR: f64 = 3.0;
const BLIND_ACCEPT_FLOOR: f64 = 1e-13;
const BLIND_HOLOMORPHIC_ONLY: usize = 5;

/// Smallest holomorphic degree that covers integer powers next to `p`.
fn padding_for(p: &Rational) -> u32 {
    let c = p.ceil().to_integer().to_i64().unwrap_or(0).max(0) as u32;
    HOLOMORPHIC_PADDING.max(c + 1)
}

fn basis_value(t: Complex64, key: &(Rational, u32)) -> Complex64 {
    let l = t.ln();
    (to_f64(&key.0) * l).exp() * l.powu(key.1)
}

struct LsFit {
    coeffs: Vec<Complex64>,
    residual_rms: f64,
    residuals: Vec<f64>,
    condition: f64,
}

fn least_squares(samples: &[Sample], basis: &[(Rational, u32)]) -> Result<LsFit, OracleError> {
    let (n, k) = (samples.len(), basis.len());
    if n < 2 * k {
        return Err(OracleError::TooFewSamples { needed: 2 * k, got: n });
    }
    solve_weighted(samples, basis)
}

fn solve_weighted(samples: &[Sample], basis: &[(Rational, u32)]) -> Result<LsFit, OracleError> {
    let (n, k) = (samples.len(), basis.len());
    // Rows weighted by 1/|value| so that residuals are relative.
    let row_w: Vec<f64> = samples.iter().map(|s| 1.0 / s.value.norm().max(1e-300)).collect();
    let mut a = DMatrix::<Complex64>::from_fn(n, k, |i, j| basis_value(samples[i].t, &basis[j]) * row_w[i]);
    let b = DVector::<Complex64>::from_fn(n, |i, _| samples[i].value * row_w[i]);
    let scales: Vec<f64> = (0..k).map(|j| a.column(j).norm().max(1e-300)).collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).unscale_mut(*s);
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(smin > smax * 1e-15) {
        return Err(OracleError::RankDeficient { condition });
    }
    let x = svd.solve(&b, 0.0).map_err(|_| OracleError::RankDeficient { condition })?;
    let r = &a * &x - &b;
    let residuals: Vec<f64> = r.iter().map(|z| z.norm()).collect();
    let residual_rms = (residuals.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    let coeffs = x.iter().zip(&scales).map(|(c, s)| c / *s).collect();
    Ok(LsFit { coeffs, residual_rms, residuals, condition })
}

fn push_unique(v: &mut Vec<(Rational, u32)>, key: (Rational, u32)) {
    if !v.contains(&key) {
        v.push(key);
    }
}

fn holomorphic_basis(deg: u32) -> Vec<(Rational, u32)> {
    (0..=deg).map(|k| (int(k as i64), 0)).collect()
}

/// Basis for a candidate leading term `t^p (log t)^m` with exactly `budget`
/// columns: the candidate family `t^{p+k} (log t)^l`, `l ≤ m+k`, merged with
/// integer powers, taken in order of increasing exponent. Giving every
/// candidate the same number of columns keeps their residuals comparable.
fn candidate_basis(p: &Rational, m: u32, budget: usize) -> Vec<(Rational, u32)> {
    let mut pool: Vec<(Rational, u32)> = Vec::new();
    for k in 0..budget as u32 {
        let e = p + int(k as i64);
        for l in 0..=m + k {
            push_unique(&mut pool, (e.clone(), l));
        }
        push_unique(&mut pool, (int(k as i64), 0));
    }
    pool.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    pool.truncate(budget);
    pool
}

fn is_holomorphic_key(key: &(Rational, u32)) -> bool {
    key.1 == 0 && is_nonneg_integer(&key.0)
}

/// Default blind-search exponents: `k/2` for `0 ≤ k ≤ 8`, plus `extra`.
pub fn exponent_grid(extra: &[Rational]) -> Vec<Rational> {
    let mut g: Vec<Rational> = (0..=8).map(|k| rat(k, 2)).collect();
    for e in extra {
        if !g.contains(e) {
            g.push(e.clone());
        }
    }
    g.sort();
    g
}

/// Leading-term fit of sampled values.
pub fn fit_singularity(samples: &[Sample], mode: &FitMode) -> Result<FitReport, OracleError> {
    match mode {
        FitMode::Guided(catalog) => {
            let mut basis: Vec<(Rational, u32)> = Vec::new();
            let mut singular: Vec<(Rational, u32)> =
                catalog.iter().filter(|k| !is_holomorphic_key(k)).cloned().collect();
            singular.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
            for k in &singular {
                push_unique(&mut basis, k.clone());
            }
            let top = singular.iter().map(|k| padding_for(&k.0)).max().unwrap_or(HOLOMORPHIC_PADDING);
            for h in holomorphic_basis(top) {
                push_unique(&mut basis, h);
            }
            report_for(samples, basis, singular.first().cloned())
        }
        FitMode::Blind { max_logpow, exponent_grid } => {
            let mut grid = exponent_grid.clone();
            grid.sort_by(|a, b| b.cmp(a));
            let mut keys: Vec<Option<(Rational, u32)>> = vec![None];
            for p in &grid {
                for m in 0..=*max_logpow {
                    if !(m == 0 && is_nonneg_integer(p)) {
                        keys.push(Some((p.clone(), m)));
                    }
                }
            }
            // Largest budget at which most candidates are well conditioned.
            let mut budget = samples.len() / 2;
            let mut scored: Vec<(Option<(Rational, u32)>, Vec<(Rational, u32)>, f64)>;
            loop {
                if budget == 0 {
                    return Err(OracleError::TooFewSamples { needed: 2, got: samples.len() });
                }
                scored = keys
                    .iter()
                    .map(|k| {
                        let basis = match k {
                            None => holomorphic_basis(budget.min(BLIND_HOLOMORPHIC_ONLY) as u32 - 1),
                            Some((p, m)) => candidate_basis(p, *m, budget),
                        };
                        let r = least_squares(samples, &basis).map(|f| f.residual_rms).unwrap_or(f64::INFINITY);
                        (k.clone(), basis, r)
                    })
                    .collect();
                let ok = scored.iter().filter(|c| c.2.is_finite()).count();
                if 2 * ok >= scored.len() || budget <= 2 {
                    break;
                }
                budget -= 1;
            }
            let floor = scored.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
            if !floor.is_finite() {
                return Err(OracleError::RankDeficient { condition: f64::INFINITY });
            }
            let threshold = BLIND_ACCEPT_FACTOR * floor + BLIND_ACCEPT_FLOOR;
            let pick = scored.iter().position(|c| c.2 <= threshold).expect("floor attains");
            let table = scored.iter().map(|c| (c.0.clone(), c.2)).collect();
            let (lead, basis, _) = scored.swap_remove(pick);
            let mut rep = report_for(samples, basis, lead)?;
            rep.candidates = table;
            Ok(rep)
        }
    }
}

fn report_for(
    samples: &[Sample],
    basis: Vec<(Rational, u32)>,
    leading: Option<(Rational, u32)>,
) -> Result<FitReport, OracleError> {
    let fit = least_squares(samples, &basis)?;
    let idx = leading.as_ref().and_then(|l| basis.iter().position(|b| b == l));
    let coefficient = idx.map(|i| fit.coeffs[i]).unwrap_or_else(Complex64::zero);
    // Leave-one-out jackknife for the leading coefficient.
    let coefficient_stderr = match idx {
        Some(i) if samples.len() > basis.len() + 1 => {
            let n = samples.len();
            let mut loo = Vec::with_capacity(n);
            for skip in 0..n {
                let sub: Vec<Sample> =
                    samples.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, s)| *s).collect();
                if let Ok(f) = solve_weighted(&sub, &basis) {
                    loo.push(f.coeffs[i]);
                }
            }
            let mean = loo.iter().sum::<Complex64>() / loo.len() as f64;
            let var = loo.iter().map(|c| (c - mean).norm_sqr()).sum::<f64>();
            ((loo.len() as f64 - 1.0) / loo.len() as f64 * var).sqrt()
        }
        _ => 0.0,
    };
    let (exponent, logpow) = leading.as_ref().map(|(p, m)| (to_f64(p), *m)).unwrap_or((0.0, 0));
    Ok(FitReport {
        leading,
        exponent,
        logpow,
        coefficient,
        coefficient_stderr,
        residual_rms: fit.residual_rms,
        basis_used: basis,
        coefficients: fit.coeffs,
        condition_diagnostic: fit.condition,
        sample_residuals: fit.residuals,
        candidates: Vec::new(),
    })
}

/// Outcome of a single check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Combined verdict: any failure fails, otherwise any inconclusive wins.
    pub fn combine(items: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Pass;
        for v in items {
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::Pass => {}
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

impl CriterionResult {
    pub fn new(name: &str, verdict: Verdict, detail: impl Into<String>) -> Self {
        CriterionResult { name: name.to_string(), verdict, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative tolerance on an exact leading coefficient.
    pub coefficient_rel: f64,
    /// Absolute tolerance on a non-integer exponent.
    pub exponent_abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { coefficient_rel: 0.02, exponent_abs: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyOptions {
    pub ray: SampleRay,
    pub quad: QuadOptions,
    pub tolerances: Tolerances,
    /// Largest log power tried by the blind fit; defaults to the structure
    /// bound `n + m + 1`.
    pub max_logpow: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub criteria: Vec<CriterionResult>,
    pub blind: Option<FitReport>,
    pub guided: Option<FitReport>,
    pub samples: Vec<Sample>,
    pub seconds: f64,
}

impl VerifyReport {
    pub fn verdict(&self) -> Verdict {
        Verdict::combine(self.criteria.iter().map(|c| c.verdict))
    }
}

/// Candidate exponents for a spec: the half-integer grid plus `α + k` for a
/// power kernel.
pub fn exponent_grid_for(spec: &IntegralSpec) -> Vec<Rational> {
    let extra: Vec<Rational> = match &spec.kernel {
        crate::nested::Kernel::Power(a) => (0..=spec.dimension() as i64 + 2).map(|k| a + int(k)).collect(),
        _ => Vec::new(),
    };
    exponent_grid(&extra)
}

/// Samples the integral, fits the data blind and guided, and compares the
/// leading term with `symbolic`.
pub fn verify(spec: &IntegralSpec, symbolic: &SingExpansion, opts: &VerifyOptions) -> VerifyReport {
    let start = Instant::now();
    match sample_ray(spec, &opts.ray, &opts.quad) {
        Ok(samples) => {
            let mut r = verify_samples(spec, symbolic, samples, opts);
            r.seconds = start.elapsed().as_secs_f64();
            r
        }
        Err(e) => VerifyReport {
            criteria: vec![CriterionResult::new("quadrature", Verdict::Inconclusive, e.to_string())],
            blind: None,
            guided: None,
            samples: Vec::new(),
            seconds: start.elapsed().as_secs_f64(),
        },
    }
}

/// [`verify`] on samples already taken from `spec`.
pub fn verify_samples(
    spec: &IntegralSpec,
    symbolic: &SingExpansion,
    samples: Vec<Sample>,
    opts: &VerifyOptions,
) -> VerifyReport {
    let start = Instant::now();
    let mut criteria = Vec::new();
    let max_logpow = opts
        .max_logpow
        .unwrap_or(spec.dimension() as u32 + spec.outer_log_power + 1);
    let blind = fit_singularity(&samples, &FitMode::Blind { max_logpow, exponent_grid: exponent_grid_for(spec) });
    let symbolic = symbolic.singular_part();
    let blind = match blind {
        Ok(b) => b,
        Err(e) => {
            criteria.push(CriterionResult::new("blind fit", Verdict::Inconclusive, e.to_string()));
            return VerifyReport { criteria, blind: None, guided: None, samples, seconds: start.elapsed().as_secs_f64() };
        }
    };
    let mut guided = None;
    match symbolic.leading() {
        None => {
            let v = if blind.leading.is_none() {
                Verdict::Pass
            } else if blind.cannot_separate(&None) {
                Verdict::Inconclusive
            } else {
                Verdict::Fail
            };
            let detail = match &blind.leading {
                None => "no singular term".to_string(),
                Some((p, m)) => format!("fit found t^{} (log t)^{m}", fmt_rational(p)),
            };
            criteria.push(CriterionResult::new("no singular term", v, detail));
        }
        Some(lead) => {
            let resolved = !blind.cannot_separate(&Some((lead.exponent.clone(), lead.logpow)));
            let mismatch = if resolved { Verdict::Fail } else { Verdict::Inconclusive };
            let exp_ok = match &blind.leading {
                Some((p, _)) if p.is_integer() && lead.exponent.is_integer() => *p == lead.exponent,
                Some((p, _)) => (to_f64(p) - to_f64(&lead.exponent)).abs() < opts.tolerances.exponent_abs,
                None => false,
            };
            let fitted = blind
                .leading
                .as_ref()
                .map(|(p, m)| format!("fit t^{} (log t)^{m}", fmt_rational(p)))
                .unwrap_or_else(|| "fit found no singular term".into());
            criteria.push(CriterionResult::new(
                "exponent",
                if exp_ok { Verdict::Pass } else { mismatch },
                format!("symbolic {}, {fitted}", fmt_rational(&lead.exponent)),
            ));
            let log_ok = blind.leading.as_ref().is_some_and(|(_, m)| *m == lead.logpow);
            criteria.push(CriterionResult::new(
                "logpow",
                if log_ok { Verdict::Pass } else { mismatch },
                format!("symbolic {}, {fitted}", lead.logpow),
            ));
            if let Some(c) = lead.coeff.as_exact() {
                match fit_singularity(&samples, &FitMode::Guided(symbolic.catalog())) {
                    Ok(g) => {
                        let want = to_f64(c);
                        let rel = (g.coefficient - want).norm() / want.abs();
                        let v = if rel <= opts.tolerances.coefficient_rel { Verdict::Pass } else { Verdict::Fail };
                        criteria.push(CriterionResult::new(
                            "coefficient",
                            v,
                            format!(
                                "symbolic {} ≈ {want:.6}, fit {:.6}{:+.2e}i ± {:.1e} (rel {rel:.2e}, tol {:.0e})",
                                fmt_rational(c),
                                g.coefficient.re,
                                g.coefficient.im,
                                g.coefficient_stderr,
                                opts.tolerances.coefficient_rel
                            ),
                        ));
                        guided = Some(g);
                    }
                    Err(e) => criteria.push(CriterionResult::new("coefficient", Verdict::Inconclusive, e.to_string())),
                }
            }
        }
    }
    VerifyReport { criteria, blind: Some(blind), guided, samples, seconds: start.elapsed().as_secs_f64() }
}

/// Monte Carlo estimate of `∫ Π x_j^{e_j} dx_j Θ(r₀ − P)` over the unit cube,
/// with its standard error. Seeded, so repeated calls agree bit for bit.
pub fn mc_theta(p: &ChainExpr, r0: f64, n_samples: usize, seed: u64) -> Result<(f64, f64), OracleError> {
    if !(r0 > 0.0 && r0 <= 1.0) {
        return Err(OracleError::InvalidInput(format!("r0 = {r0} outside (0, 1]")));
    }
    if n_samples < 2 {
        return Err(OracleError::InvalidInput("need at least two samples".into()));
    }
    p.validate().map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let exps: Vec<i32> = p.exponents().into_iter().map(|e| e as i32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = vec![0.0; exps.len()];
    let (mut mean, mut m2) = (0.0, 0.0);
    for k in 0..n_samples {
        for x in xs.iter_mut() {
            *x = rng.gen::<f64>();
        }
        let v = if p.eval(&xs) <= r0 { xs.iter().zip(&exps).map(|(x, e)| x.powi(*e)).product() } else { 0.0 };
        let d = v - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (v - mean);
    }
    let var = m2 / (n_samples - 1) as f64;
    Ok((mean, (var / n_samples as f64).sqrt()))
}

/// Compares `f = smear(p)` with [`mc_theta`] at each `r₀`: pass within
/// `sigmas` standard errors.
pub fn verify_smear(
    p: &ChainExpr,
    f: &FormF,
    r0s: &[f64],
    n_samples: usize,
    seed: u64,
    sigmas: f64,
) -> Vec<CriterionResult> {
    r0s.iter()
        .map(|&r0| {
            let name = format!("volume at r0={r0}");
            match mc_theta(p, r0, n_samples, seed) {
                Err(e) => CriterionResult::new(&name, Verdict::Inconclusive, e.to_string()),
                Ok((est, se)) => {
                    let want = f.eval(r0);
                    let allowed = sigmas * se.max(1.0 / n_samples as f64);
                    let dev = (want - est).abs();
                    let v = if dev <= allowed { Verdict::Pass } else { Verdict::Fail };
                    CriterionResult::new(&name, v, format!("symbolic {want:.6}, Monte Carlo {est:.6} ± {se:.1e}"))
                }
            }
        })
        .collect()
}
