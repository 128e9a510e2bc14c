//! Singular expansions of nested integrals over the unit cube.
//!
//! Every family here is an integral of the form
//!
//! ```text
//! ∫_0^δ r_1^{e_1} (log r_1)^m dr_1 ∫_0^1 r_2^{e_2} dr_2 ⋯ ∫_0^1 r_n^{e_n} dr_n  g(t + r_1⋯r_n + i0)
//! ```
//!
//! with `g` one of the [`Kernel`]s. Two independent routes are provided:
//! the Euler-operator recurrences for the named families ([`eval_J`],
//! [`eval_I42`], [`eval_L41`], ...) and a general reduction
//! ([`eval_nested`]) that collapses the chain of variables into a single
//! weight on `σ = r_1⋯r_n` and then solves one Euler equation per weight
//! term. Public evaluators return the singular part only.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::logpow::{Coefficient, EulerOp, LogPowError, LogPowTerm, SingExpansion};
use crate::rational::{
    as_i64, binomial, factorial, fmt_rational, int, is_integer, is_nonneg_integer, neg_one_pow,
    powi, to_f64, Rational,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NestedError {
    #[error("alpha = {0} is a nonnegative integer; the integral is holomorphic at t = 0")]
    NonnegIntegerAlpha(String),
    #[error("{0} must be at least 1")]
    ZeroIndex(&'static str),
    #[error("invalid integral spec: {0}")]
    InvalidSpec(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("integration-by-parts recursion exceeded depth {cap}")]
    DepthExceeded { cap: usize },
    #[error(transparent)]
    LogPow(#[from] LogPowError),
}

/// Innermost integrand `g(t + u + i0)`, `u` the product of the cube variables.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// `(t + u)^α`
    Power(Rational),
    /// `log(t + u)`
    Log,
    /// `(t + u)^n log(t + u)`
    PowerLog(u32),
}

impl Kernel {
    /// Integer offset `n` for the log kernels, `None` for a pure power.
    fn log_degree(&self) -> Option<u32> {
        match self {
            Kernel::Log => Some(0),
            Kernel::PowerLog(n) => Some(*n),
            Kernel::Power(_) => None,
        }
    }

    /// Exponent picked up by the kernel under `u → δu, t → δt`.
    fn scaling(&self) -> Rational {
        match self {
            Kernel::Power(a) => a.clone(),
            Kernel::Log => Rational::zero(),
            Kernel::PowerLog(n) => int(*n as i64),
        }
    }

    pub fn eval(&self, z: num_complex::Complex64) -> num_complex::Complex64 {
        match self {
            Kernel::Power(a) => (to_f64(a) * z.ln()).exp(),
            Kernel::Log => z.ln(),
            Kernel::PowerLog(n) => z.powu(*n) * z.ln(),
        }
    }
}

/// One nested integral. `measure_exponents[0]` belongs to the outermost
/// variable, which runs over `[0, delta]` and carries `(log r)^outer_log_power`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSpec {
    pub measure_exponents: Vec<u32>,
    pub outer_log_power: u32,
    pub kernel: Kernel,
    pub delta: Rational,
}

impl IntegralSpec {
    pub fn new(measure_exponents: Vec<u32>, kernel: Kernel) -> Self {
        IntegralSpec { measure_exponents, outer_log_power: 0, kernel, delta: Rational::one() }
    }

    pub fn with_outer_log(mut self, m: u32) -> Self {
        self.outer_log_power = m;
        self
    }

    pub fn with_delta(mut self, delta: Rational) -> Self {
        self.delta = delta;
        self
    }

    pub fn dimension(&self) -> usize {
        self.measure_exponents.len()
    }

    pub fn validate(&self) -> Result<(), NestedError> {
        if self.measure_exponents.is_empty() {
            return Err(NestedError::InvalidSpec("at least one integration variable".into()));
        }
        if !self.delta.is_positive() || self.delta > Rational::one() {
            return Err(NestedError::InvalidSpec(format!(
                "delta = {} must lie in (0, 1]",
                fmt_rational(&self.delta)
            )));
        }
        Ok(())
    }
}

/// Bounds on the terms of an expansion: every singular term has exponent at
/// least `min_t_exponent` and log power at most `max_log_power`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureBound {
    pub min_t_exponent: Rational,
    pub max_log_power: u32,
}

impl StructureBound {
    pub fn admits(&self, e: &SingExpansion) -> bool {
        e.singular_part()
            .terms()
            .iter()
            .all(|t| t.exponent >= self.min_t_exponent && t.logpow <= self.max_log_power)
    }
}

/// Which of the two integrals of the `(log r_0)^m` family to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prop44Variant {
    /// Kernel `(t + ρ)^{-1}`.
    K,
    /// Kernel `log(t + ρ)`.
    J,
}

fn unknown_term(label: String, exponent: Rational) -> SingExpansion {
    SingExpansion::from_terms([LogPowTerm::new(Coefficient::unknown(label), exponent, 0)])
}

// ---------------------------------------------------------------------------
// Euler-recurrence route for the named families

fn check_alpha(alpha: &Rational) -> Result<(), NestedError> {
    if is_nonneg_integer(alpha) {
        return Err(NestedError::NonnegIntegerAlpha(fmt_rational(alpha)));
    }
    Ok(())
}

/// `∫_0^δ dρ_1/ρ_1 ⋯ ∫_0^{ρ_{j-1}} (t + ρ_j)^α dρ_j`, full expansion
/// (holomorphic parts included where they are known to be needed).
fn j_full(alpha: &Rational, j: u32) -> SingExpansion {
    let s = alpha + Rational::one();
    if is_nonneg_integer(alpha) {
        // A polynomial in t of degree α + j - 1 at most; coefficients unknown.
        let top = as_i64(alpha).unwrap_or(0) + j as i64;
        return SingExpansion::from_terms(
            (0..=top).map(|k| LogPowTerm::new(Coefficient::unknown(format!("J{k}")), int(k), 0)),
        );
    }
    let mut cur = if s.is_zero() {
        SingExpansion::monomial(-Rational::one(), Rational::zero(), 1)
            .add(&unknown_term("J1@0".into(), Rational::zero()))
    } else {
        SingExpansion::monomial(-s.recip(), s.clone(), 0)
    };
    let op = EulerOp::new(s);
    for k in 2..=j {
        cur = op.solve_labeled(&cur.neg(), &format!("J{k}@{}", fmt_rational(&op.shift)));
    }
    cur
}

/// Iterated `dρ/ρ` integral of `(t + ρ_j)^α`, `j` levels deep.
#[allow(non_snake_case)]
pub fn eval_J(alpha: &Rational, j: u32) -> Result<SingExpansion, NestedError> {
    check_alpha(alpha)?;
    if j == 0 {
        return Err(NestedError::ZeroIndex("j"));
    }
    Ok(j_full(alpha, j).singular_part())
}

/// Same chain with an extra factor `ρ_j` in the innermost integrand.
#[allow(non_snake_case)]
pub fn eval_K42(alpha: &Rational, j: u32) -> Result<SingExpansion, NestedError> {
    check_alpha(alpha)?;
    if j == 0 {
        return Err(NestedError::ZeroIndex("j"));
    }
    let shifted = j_full(&(alpha + Rational::one()), j);
    let plain = j_full(alpha, j).mul_monomial(&Rational::one(), 0);
    Ok(shifted.sub(&plain).singular_part())
}

fn i42_full(n: u32, j: u32) -> Result<SingExpansion, NestedError> {
    // The (n+1)-th derivative is n! J(-1, j) up to a holomorphic function.
    let mut cur = j_full(&-Rational::one(), j).scale(&factorial(n));
    for _ in 0..=n {
        cur = cur.antiderivative()?;
    }
    Ok(cur)
}

/// Chain with innermost integrand `(t + ρ_j)^n log(t + ρ_j)`.
#[allow(non_snake_case)]
pub fn eval_I42(n: u32, j: u32) -> Result<SingExpansion, NestedError> {
    if j == 0 {
        return Err(NestedError::ZeroIndex("j"));
    }
    Ok(i42_full(n, j)?.singular_part())
}

/// Chain with innermost integrand `ρ_j (t + ρ_j)^n log(t + ρ_j)`.
#[allow(non_snake_case)]
pub fn eval_Itilde(n: u32, j: u32) -> Result<SingExpansion, NestedError> {
    if j == 0 {
        return Err(NestedError::ZeroIndex("j"));
    }
    let hi = i42_full(n + 1, j)?;
    let lo = i42_full(n, j)?.mul_monomial(&Rational::one(), 0);
    Ok(hi.sub(&lo).singular_part())
}

fn l41_full(m: u32, a: &Rational) -> SingExpansion {
    let log_a = to_f64(a).ln();
    // L_0 = log(t + a) - log t
    let mut cur = SingExpansion::monomial(-Rational::one(), Rational::zero(), 1)
        .add(&unknown_term("L0".into(), Rational::zero()));
    let op = EulerOp::new(Rational::zero());
    for k in 1..=m {
        let mut next = op.solve_labeled(&cur.scale(&int(k as i64)), &format!("M{k}"));
        if !a.is_one() {
            let c = Coefficient::numeric(-log_a.powi(k as i32));
            next = next.add(&SingExpansion::from_terms([LogPowTerm::new(c, Rational::zero(), 1)]));
        }
        cur = next;
    }
    cur
}

/// `∫_0^a (log w)^m / (t + w + i0) dw`.
#[allow(non_snake_case)]
pub fn eval_L41(m: u32, a: &Rational) -> Result<SingExpansion, NestedError> {
    if m == 0 {
        return Err(NestedError::ZeroIndex("m"));
    }
    if !a.is_positive() {
        return Err(NestedError::InvalidSpec(format!("a = {} must be positive", fmt_rational(a))));
    }
    Ok(l41_full(m, a).singular_part())
}

/// The `(log r_0)^m` family with `n` further unit-interval variables, via
/// `(−t d/dt)^n K = L_m` and `dJ/dt = K`.
pub fn eval_prop44(n: u32, m: u32, which: Prop44Variant) -> Result<SingExpansion, NestedError> {
    if n == 0 {
        return Err(NestedError::ZeroIndex("n"));
    }
    if m == 0 {
        return Err(NestedError::ZeroIndex("m"));
    }
    let op = EulerOp::new(Rational::zero());
    let mut k = l41_full(m, &Rational::one());
    for i in 1..=n {
        k = op.solve_labeled(&k.neg(), &format!("K{i}"));
    }
    Ok(match which {
        Prop44Variant::K => k.singular_part(),
        Prop44Variant::J => k.antiderivative()?.singular_part(),
    })
}

// ---------------------------------------------------------------------------
// General reduction through the σ-chain weight

/// `∫_x^1 f(σ) dσ` for a log-polynomial `f`, as a function of `x`.
fn integrate_to_one(f: &SingExpansion) -> Result<SingExpansion, NestedError> {
    let mut out = SingExpansion::zero();
    for term in f.terms() {
        let k = term.logpow;
        let piece = if term.exponent == -Rational::one() {
            // ∫_x^1 σ^{-1} (log σ)^k dσ = −(log x)^{k+1}/(k+1)
            SingExpansion::from_terms([LogPowTerm::new(
                term.coeff.scale(&-Rational::new(1.into(), (k + 1).into())),
                Rational::zero(),
                k + 1,
            )])
        } else {
            let q = &term.exponent + Rational::one();
            let at_one = neg_one_pow(k as i64) * factorial(k) / powi(&q, k as i64 + 1);
            let prim = SingExpansion::from_terms([term.clone()]).antiderivative()?;
            SingExpansion::from_terms([LogPowTerm::new(term.coeff.scale(&at_one), Rational::zero(), 0)])
                .sub(&prim)
        };
        out = out.add(&piece);
    }
    Ok(out)
}

/// Exponents in the order the reduction uses: all sorted descending when
/// there is no outer log, otherwise the first kept and the rest sorted.
fn chain_order(spec: &IntegralSpec) -> Vec<u32> {
    let mut e = spec.measure_exponents.clone();
    let start = if spec.outer_log_power == 0 { 0 } else { 1 };
    e[start..].sort_by(|a, b| b.cmp(a));
    e
}

fn chain_weight_of(exps: &[u32], m: u32) -> Result<SingExpansion, NestedError> {
    // σ_1 = r_1, σ_k = r_1⋯r_k; the measure becomes
    // σ_1^{d_1 - 1} dσ_1 ⋯ σ_n^{e_n} dσ_n with d_k = e_k − e_{k+1}.
    let mut v = SingExpansion::monomial(Rational::one(), Rational::zero(), m);
    for w in exps.windows(2) {
        let d = w[0] as i64 - w[1] as i64;
        v = integrate_to_one(&v.mul_monomial(&int(d - 1), 0))?;
    }
    let last = *exps.last().expect("nonempty chain");
    Ok(v.mul_monomial(&int(last as i64), 0))
}

/// Density `ω(σ)` of `σ = r_1⋯r_n` under the integral's measure (with `δ = 1`),
/// so that the integral equals `∫_0^1 ω(σ) g(t + σ) dσ`.
pub fn weight_density(spec: &IntegralSpec) -> Result<SingExpansion, NestedError> {
    spec.validate()?;
    chain_weight_of(&chain_order(spec), spec.outer_log_power)
}

/// The same density from the partial fractions of its Mellin transform
/// `(−1)^m m! / (s + e_1)^{m+1} · Π_{j>1} 1/(s + e_j)`.
pub fn mellin_density(spec: &IntegralSpec) -> Result<SingExpansion, NestedError> {
    spec.validate()?;
    let m = spec.outer_log_power;
    let mut mult: BTreeMap<u32, u32> = BTreeMap::new();
    for (i, &e) in spec.measure_exponents.iter().enumerate() {
        *mult.entry(e).or_default() += if i == 0 { m + 1 } else { 1 };
    }
    let pref = neg_one_pow(m as i64) * factorial(m);
    let mut terms = Vec::new();
    for (&e, &mu) in &mult {
        // Taylor series in h = s + e of Π_{f≠e} (h + f − e)^{−μ_f}, to order μ−1.
        let mut series = vec![Rational::zero(); mu as usize];
        series[0] = Rational::one();
        for (&f, &mf) in &mult {
            if f == e {
                continue;
            }
            let c = int(f as i64 - e as i64);
            let factor: Vec<Rational> = (0..mu as usize)
                .map(|k| {
                    neg_one_pow(k as i64) * binomial(mf + k as u32 - 1, k as u32)
                        * powi(&c, -(mf as i64) - k as i64)
                })
                .collect();
            let mut next = vec![Rational::zero(); mu as usize];
            for (i, a) in series.iter().enumerate() {
                for (j, b) in factor.iter().enumerate().take(mu as usize - i) {
                    next[i + j] += a * b;
                }
            }
            series = next;
        }
        for k in 0..mu {
            // coefficient of (s+e)^{−(k+1)} is series[μ−1−k]; its inverse
            // transform is σ^e (−log σ)^k / k!
            let a = &pref * &series[(mu - 1 - k) as usize];
            let c = a * neg_one_pow(k as i64) / factorial(k);
            terms.push(LogPowTerm::exact(c, int(e as i64), k));
        }
    }
    Ok(SingExpansion::from_terms(terms))
}

/// `F_{a,k}(t) = ∫_0^1 σ^a (log σ)^k g(t + σ) dσ` for `k = 0..=kmax`,
/// via `(t d/dt − s) F_{a,k} = k F_{a,k−1} + holomorphic`.
fn kernel_family(kernel: &Kernel, a: u32, kmax: u32) -> Vec<SingExpansion> {
    let (s, f0) = match kernel.log_degree() {
        Some(d) => {
            let sum: Rational = (0..=a)
                .map(|i| binomial(a, i) * neg_one_pow((a - i) as i64) / int((d + i + 1) as i64))
                .sum();
            let s = int((d + a + 1) as i64);
            (s.clone(), SingExpansion::monomial(-sum, s, 1))
        }
        None => {
            let Kernel::Power(alpha) = kernel else { unreachable!() };
            let s = alpha + int(a as i64 + 1);
            let terms = (0..=a).map(|i| {
                let c = binomial(a, i) * neg_one_pow((a - i) as i64);
                let q = alpha + int(i as i64 + 1);
                if q.is_zero() {
                    LogPowTerm::exact(-c, s.clone(), 1)
                } else {
                    LogPowTerm::exact(-c / q, s.clone(), 0)
                }
            });
            (s.clone(), SingExpansion::from_terms(terms))
        }
    };
    let op = EulerOp::new(s.clone());
    let resonant_hol = is_nonneg_integer(&s);
    let mut out = vec![f0];
    for k in 1..=kmax {
        let mut rhs = out[k as usize - 1].scale(&int(k as i64));
        if resonant_hol {
            rhs = rhs.add(&unknown_term(format!("h{a}.{k}"), s.clone()));
        }
        out.push(op.solve_labeled(&rhs, &format!("F{a}.{k}")));
    }
    out
}

/// Full expansion (holomorphic bookkeeping included) at `δ = 1`, for
/// exponents already in chain order.
fn eval_unit(exps: &[u32], m: u32, kernel: &Kernel) -> Result<SingExpansion, NestedError> {
    let w = chain_weight_of(exps, m)?;
    let mut kmax: BTreeMap<u32, u32> = BTreeMap::new();
    for t in w.terms() {
        let a = as_i64(&t.exponent).expect("integer weight exponent") as u32;
        let e = kmax.entry(a).or_default();
        *e = (*e).max(t.logpow);
    }
    let families: BTreeMap<u32, Vec<SingExpansion>> =
        kmax.iter().map(|(&a, &k)| (a, kernel_family(kernel, a, k))).collect();
    let mut out = SingExpansion::zero();
    for t in w.terms() {
        let a = as_i64(&t.exponent).expect("integer weight exponent") as u32;
        out = out.add(&families[&a][t.logpow as usize].scale_coeff(&t.coeff));
    }
    Ok(out)
}

/// Undo the canonicalization `δ = 1`: `I_δ(t) = δ^{e_1+1+κ} Σ_i C(m,i) (log δ)^{m−i} I^{(i)}_1(t/δ)`.
fn rescale<F>(spec: &IntegralSpec, unit: F) -> Result<SingExpansion, NestedError>
where
    F: Fn(u32) -> Result<SingExpansion, NestedError>,
{
    let m = spec.outer_log_power;
    if spec.delta.is_one() {
        return unit(m);
    }
    let delta = &spec.delta;
    let log_delta = to_f64(delta).ln();
    let mut sum = unit(m)?;
    for i in 0..m {
        let c = Coefficient::numeric(to_f64(&binomial(m, i)) * log_delta.powi((m - i) as i32));
        sum = sum.add(&unit(i)?.scale_coeff(&c));
    }
    let base = int(spec.measure_exponents[0] as i64 + 1) + spec.kernel.scaling();
    let mut out = Vec::new();
    for t in sum.terms() {
        let p = &base - &t.exponent;
        let scale = if is_integer(&p) {
            t.coeff.scale(&powi(delta, as_i64(&p).expect("small exponent")))
        } else {
            t.coeff.scale_f64(to_f64(delta).powf(to_f64(&p)))
        };
        for r in 0..=t.logpow {
            let c = if r == t.logpow {
                scale.clone()
            } else {
                let k = to_f64(&binomial(t.logpow, r)) * (-log_delta).powi((t.logpow - r) as i32);
                scale.scale_f64(k)
            };
            out.push(LogPowTerm::new(c, t.exponent.clone(), r));
        }
    }
    Ok(SingExpansion::from_terms(out))
}

/// Singular expansion of any [`IntegralSpec`] by the σ-chain reduction.
pub fn eval_nested(spec: &IntegralSpec) -> Result<SingExpansion, NestedError> {
    spec.validate()?;
    if let Kernel::Power(a) = &spec.kernel {
        if is_nonneg_integer(a) {
            return Ok(SingExpansion::zero());
        }
    }
    let order = chain_order(spec);
    let full = rescale(spec, |i| eval_unit(&order, i, &spec.kernel))?;
    Ok(full.singular_part())
}

fn min_exponent(spec: &IntegralSpec) -> u32 {
    *spec.measure_exponents.iter().min().expect("validated spec")
}

/// Nested integral without outer log; returns the expansion and the bound
/// on its terms (exponent `≥ min e_j + 1`, log power `≤ n`; for a power
/// kernel the exponents are shifted by `α` and the log power drops by one
/// unless `α` is an integer).
pub fn eval_prop43(spec: &IntegralSpec) -> Result<(SingExpansion, StructureBound), NestedError> {
    spec.validate()?;
    if spec.outer_log_power != 0 {
        return Err(NestedError::InvalidSpec("outer log power must be 0".into()));
    }
    let n = spec.dimension() as u32;
    let emin = int(min_exponent(spec) as i64 + 1);
    let bound = match &spec.kernel {
        Kernel::Log => StructureBound { min_t_exponent: emin, max_log_power: n },
        Kernel::Power(a) => StructureBound {
            min_t_exponent: a + emin,
            max_log_power: if is_integer(a) { n } else { n - 1 },
        },
        Kernel::PowerLog(_) => {
            return Err(NestedError::Unsupported("power-log kernel in the plain nested family".into()))
        }
    };
    Ok((eval_nested(spec)?, bound))
}

/// The `(log r_0)^m r_0^{e_0}` family with a log kernel. When `e_0` is below
/// the largest remaining exponent the reduction runs through the
/// integration-by-parts recursion in `m` and `n`.
pub fn eval_prop45(spec: &IntegralSpec) -> Result<(SingExpansion, StructureBound), NestedError> {
    spec.validate()?;
    if spec.kernel != Kernel::Log {
        return Err(NestedError::Unsupported("the outer-log family needs a log kernel".into()));
    }
    let m = spec.outer_log_power;
    if m == 0 {
        return Err(NestedError::ZeroIndex("outer log power"));
    }
    let order = chain_order(spec);
    let n = order.len() - 1;
    let cap = n + m as usize + 5;
    let full = rescale(spec, |i| by_parts(order[0], &order[1..], i, 0, cap))?;
    let bound = StructureBound {
        min_t_exponent: int(min_exponent(spec) as i64 + 1),
        max_log_power: n as u32 + m + 1,
    };
    Ok((full.singular_part(), bound))
}

/// `d_0 L(e_0; e_1..e_n; m) = −m L(e_0; e_1..e_n; m−1) − L(e_0; e_2..e_n; m)`
/// for `d_0 = e_0 − e_1 < 0`; boundary terms vanish.
fn by_parts(e0: u32, rest: &[u32], m: u32, depth: usize, cap: usize) -> Result<SingExpansion, NestedError> {
    if depth > cap {
        return Err(NestedError::DepthExceeded { cap });
    }
    let mut exps = vec![e0];
    exps.extend_from_slice(rest);
    if m == 0 {
        exps.sort_by(|a, b| b.cmp(a));
        return eval_unit(&exps, 0, &Kernel::Log);
    }
    match rest.first() {
        Some(&e1) if e1 > e0 => {
            let d0 = int(e0 as i64 - e1 as i64);
            let a3 = by_parts(e0, rest, m - 1, depth + 1, cap)?.scale(&int(m as i64));
            let a4 = by_parts(e0, &rest[1..], m, depth + 1, cap)?;
            Ok(a3.add(&a4).scale(&(-d0.recip())))
        }
        _ => eval_unit(&exps, m, &Kernel::Log),
    }
}

#[cfg(test)]
mod tests;

/// A named integral family together with the nested spec the oracle
/// integrates for it.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    J { alpha: Rational, j: u32 },
    K42 { alpha: Rational, j: u32 },
    I42 { n: u32, j: u32 },
    Itilde { n: u32, j: u32 },
    L41 { m: u32, a: Rational },
    Prop44 { n: u32, m: u32, which: Prop44Variant },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::J { .. } => "J",
            Family::K42 { .. } => "K42",
            Family::I42 { .. } => "I42",
            Family::Itilde { .. } => "Itilde",
            Family::L41 { .. } => "L41",
            Family::Prop44 { which: Prop44Variant::K, .. } => "prop44-K",
            Family::Prop44 { which: Prop44Variant::J, .. } => "prop44-J",
        }
    }

    pub fn symbolic(&self) -> Result<SingExpansion, NestedError> {
        match self {
            Family::J { alpha, j } => eval_J(alpha, *j),
            Family::K42 { alpha, j } => eval_K42(alpha, *j),
            Family::I42 { n, j } => eval_I42(*n, *j),
            Family::Itilde { n, j } => eval_Itilde(*n, *j),
            Family::L41 { m, a } => eval_L41(*m, a),
            Family::Prop44 { n, m, which } => eval_prop44(*n, *m, *which),
        }
    }

    /// The same integral in the `r_k ∈ [0, 1]` variables with
    /// `ρ_k = r_1⋯r_k`.
    pub fn spec(&self) -> IntegralSpec {
        let zeros = |k: u32| vec![0; k as usize];
        let ones = |k: u32| vec![1; k as usize];
        match self {
            Family::J { alpha, j } => IntegralSpec::new(zeros(*j), Kernel::Power(alpha.clone())),
            Family::K42 { alpha, j } => IntegralSpec::new(ones(*j), Kernel::Power(alpha.clone())),
            Family::I42 { n, j } => IntegralSpec::new(zeros(*j), Kernel::PowerLog(*n)),
            Family::Itilde { n, j } => IntegralSpec::new(ones(*j), Kernel::PowerLog(*n)),
            Family::L41 { m, a } => {
                IntegralSpec::new(vec![0], Kernel::Power(-Rational::one())).with_outer_log(*m).with_delta(a.clone())
            }
            Family::Prop44 { n, m, which } => {
                let kernel = match which {
                    Prop44Variant::K => Kernel::Power(-Rational::one()),
                    Prop44Variant::J => Kernel::Log,
                };
                IntegralSpec::new(zeros(n + 1), kernel).with_outer_log(*m)
            }
        }
    }
}
