//! Piecewise functions built from `c (x−o)^n (log(x−o))^m` and the integral
//! operators that map such functions to functions of the same shape.
//!
//! A [`FormF`] is exact on `[0, exact_hi]`. Some operators produce
//! integrals that leave the class (for instance `∫ log(h−1)/h dh`); past the
//! first point where that happens the function is carried by a numeric
//! evaluator instead, and everything below it stays symbolic.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::logpow::{Coefficient, LogPowTerm, SingExpansion};
use crate::quad::tanh_sinh;
use crate::rational::{as_i64, binomial, fmt_rational, int, is_nonneg_integer, powi, to_f64, Rational};

pub mod chain;
mod selfenergy;

pub use chain::{ChainExpr, ChainVar, Factor};
pub use selfenergy::{self_energy_weight, SelfEnergyReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormFError {
    #[error("weights must be positive, got {0}")]
    NonPositiveWeight(String),
    #[error("constants must be nonnegative, got {0}")]
    NegativeConstant(String),
    #[error("operator needs a function that vanishes beyond its support")]
    NonzeroBeyondSupport,
    #[error("not of form F: {0}")]
    Invalid(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// `Σ c y^n (log y)^m` in the local variable `y = x − origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub origin: Rational,
    pub body: SingExpansion,
}

impl Component {
    pub fn new(origin: Rational, body: SingExpansion) -> Self {
        Component { origin, body }
    }

    pub fn is_polynomial(&self) -> bool {
        self.body.terms().iter().all(|t| t.logpow == 0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_local(&self.body, x - to_f64(&self.origin))
    }

    /// Multiplies by `x^j`.
    fn mul_power(&self, j: u32) -> Component {
        Component::new(self.origin.clone(), self.body.mul(&shifted_power(j, &self.origin)))
    }

    fn shifted(&self, c: &Rational) -> Component {
        Component::new(&self.origin + c, self.body.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub lo: Rational,
    pub hi: Rational,
    pub components: Vec<Component>,
}

impl Piece {
    pub fn new(lo: Rational, hi: Rational, components: Vec<Component>) -> Self {
        Piece { lo, hi, components: normalize_components(components) }
    }

    fn zero(lo: Rational, hi: Rational) -> Self {
        Piece { lo, hi, components: Vec::new() }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.eval(x)).sum()
    }

    pub fn max_logpow(&self) -> u32 {
        self.components.iter().filter_map(|c| c.body.max_logpow()).max().unwrap_or(0)
    }

    /// All components folded into one body, if they share origin 0.
    fn origin_zero_body(&self) -> Option<SingExpansion> {
        let mut acc = SingExpansion::zero();
        for c in &self.components {
            if !c.origin.is_zero() {
                return None;
            }
            acc = acc.add(&c.body);
        }
        Some(acc)
    }
}

type TailFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
struct Tail {
    /// Points in `(exact_hi, support_hi)` where the tail may have kinks.
    breaks: Vec<Rational>,
    f: TailFn,
}

/// A function on `[0, ∞)`: exact pieces on `[0, exact_hi]`, an optional
/// numeric evaluator up to `support_hi`, and the constant `after` beyond.
#[derive(Clone)]
pub struct FormF {
    pieces: Vec<Piece>,
    tail: Option<Tail>,
    support_hi: Rational,
    after: Coefficient,
}

impl fmt::Debug for FormF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FormF")
            .field("pieces", &self.pieces)
            .field("numeric_tail", &self.tail.is_some())
            .field("support_hi", &self.support_hi)
            .field("after", &self.after)
            .finish()
    }
}

impl FormF {
    /// `body(x)` on `[lo, hi]`, zero elsewhere.
    pub fn on_interval(lo: Rational, hi: Rational, body: SingExpansion) -> Self {
        let mut pieces = Vec::new();
        if lo.is_positive() {
            pieces.push(Piece::zero(int(0), lo.clone()));
        }
        pieces.push(Piece::new(lo, hi.clone(), vec![Component::new(int(0), body)]));
        FormF { pieces, tail: None, support_hi: hi, after: Coefficient::exact(int(0)) }
    }

    /// `body(x)` on `[0, 1]`.
    pub fn unit(body: SingExpansion) -> Self {
        FormF::on_interval(int(0), int(1), body)
    }

    /// Pieces must tile `[0, hi]` without gaps.
    pub fn from_pieces(pieces: Vec<Piece>, after: Coefficient) -> Result<Self, FormFError> {
        let support_hi = pieces.last().map(|p| p.hi.clone()).unwrap_or_else(|| int(0));
        let pieces = pieces.into_iter().map(|p| Piece::new(p.lo, p.hi, p.components)).collect();
        let f = FormF { pieces, tail: None, support_hi, after };
        f.check_tiling()?;
        Ok(f)
    }

    /// Density of `w·x` for `x` uniform on `[0, 1]` with measure `x^e dx`.
    pub fn leaf_density(w: &Rational, e: u32) -> Self {
        let c = powi(w, -(e as i64) - 1);
        FormF::on_interval(int(0), w.clone(), SingExpansion::monomial(c, int(e as i64), 0))
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn exact_hi(&self) -> Rational {
        self.pieces.last().map(|p| p.hi.clone()).unwrap_or_else(|| int(0))
    }

    pub fn support_hi(&self) -> &Rational {
        &self.support_hi
    }

    pub fn after(&self) -> &Coefficient {
        &self.after
    }

    pub fn has_numeric_tail(&self) -> bool {
        self.tail.is_some()
    }

    /// The exact piece covering `x`, if `x` lies in the exact region.
    pub fn piece_at(&self, x: &Rational) -> Option<&Piece> {
        self.pieces.iter().find(|p| &p.lo <= x && x <= &p.hi)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let hi = to_f64(&self.support_hi);
        if x > hi {
            return self.after.value().unwrap_or(f64::NAN);
        }
        for p in &self.pieces {
            if x <= to_f64(&p.hi) {
                return p.eval(x);
            }
        }
        match &self.tail {
            Some(t) => (t.f)(x),
            None => self.after.value().unwrap_or(f64::NAN),
        }
    }

    /// Largest log power over the exact pieces.
    pub fn max_logpow(&self) -> u32 {
        self.pieces.iter().map(Piece::max_logpow).max().unwrap_or(0)
    }

    /// Every term on the first piece carries a positive power of `x`, so
    /// the function tends to zero at the origin.
    pub fn vanishes_at_origin(&self) -> bool {
        match self.pieces.first() {
            None => true,
            Some(p) => p
                .components
                .iter()
                .all(|c| !c.origin.is_zero() || c.body.terms().iter().all(|t| t.exponent.is_positive())),
        }
    }

    /// Endpoints of all exact pieces and tail kinks, ascending.
    pub fn breakpoints(&self) -> Vec<Rational> {
        let mut out = vec![int(0)];
        for p in &self.pieces {
            out.push(p.hi.clone());
        }
        if let Some(t) = &self.tail {
            out.extend(t.breaks.iter().cloned());
        }
        out.push(self.support_hi.clone());
        out.sort();
        out.dedup();
        out
    }

    /// Zero outside `[lo, hi]`. Both ends must lie in the exact region.
    pub fn restrict(&self, lo: &Rational, hi: &Rational) -> Result<FormF, FormFError> {
        if lo > hi || hi > &self.exact_hi() || lo.is_negative() {
            return Err(FormFError::Unsupported(format!(
                "restriction to [{}, {}] outside exact region [0, {}]",
                fmt_rational(lo),
                fmt_rational(hi),
                fmt_rational(&self.exact_hi())
            )));
        }
        let refined = self.refined(&[lo.clone(), hi.clone()]);
        let pieces = refined
            .pieces
            .into_iter()
            .filter(|p| &p.hi <= hi)
            .map(|p| if &p.lo >= lo { p } else { Piece::zero(p.lo, p.hi) })
            .collect();
        Ok(FormF { pieces, tail: None, support_hi: hi.clone(), after: Coefficient::exact(int(0)) })
    }

    /// Splits exact pieces at the given points.
    fn refined(&self, points: &[Rational]) -> FormF {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            let mut cuts: Vec<Rational> = points.iter().filter(|x| *x > &p.lo && *x < &p.hi).cloned().collect();
            cuts.sort();
            cuts.dedup();
            let mut lo = p.lo.clone();
            for c in cuts {
                pieces.push(Piece { lo: lo.clone(), hi: c.clone(), components: p.components.clone() });
                lo = c;
            }
            pieces.push(Piece { lo, hi: p.hi.clone(), components: p.components.clone() });
        }
        FormF { pieces, ..self.clone() }
    }

    /// Multiplies by `x^j`.
    pub fn mul_power(&self, j: u32) -> FormF {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece::new(p.lo.clone(), p.hi.clone(), p.components.iter().map(|c| c.mul_power(j)).collect()))
            .collect();
        let tail = self.tail.as_ref().map(|t| {
            let f = t.f.clone();
            Tail { breaks: t.breaks.clone(), f: Arc::new(move |x: f64| x.powi(j as i32) * f(x)) }
        });
        let after = if self.after.is_exact_zero() {
            self.after.clone()
        } else {
            Coefficient::numeric(f64::NAN)
        };
        FormF { pieces, tail, support_hi: self.support_hi.clone(), after }
    }

    fn check_tiling(&self) -> Result<(), FormFError> {
        let mut at = int(0);
        for p in &self.pieces {
            if p.lo != at {
                return Err(FormFError::Invalid(format!("gap or overlap at {}", fmt_rational(&at))));
            }
            if p.hi <= p.lo {
                return Err(FormFError::Invalid(format!("empty piece at {}", fmt_rational(&p.lo))));
            }
            at = p.hi.clone();
        }
        if at > self.support_hi {
            return Err(FormFError::Invalid("pieces extend past the support".into()));
        }
        Ok(())
    }
}

/// Checks the form-F invariants: pieces tile the exact region, every
/// component has `x − o > 0` inside its piece and nonnegative integer powers.
/// With `strict`, the function must also be bounded: a log term with `n = 0`
/// may not sit at its own origin.
pub fn check_form_f(f: &FormF, strict: bool) -> Result<(), FormFError> {
    f.check_tiling()?;
    for p in &f.pieces {
        for c in &p.components {
            if c.origin > p.lo {
                return Err(FormFError::Invalid(format!(
                    "origin {} above piece start {}",
                    fmt_rational(&c.origin),
                    fmt_rational(&p.lo)
                )));
            }
            for t in c.body.terms() {
                if !is_nonneg_integer(&t.exponent) {
                    return Err(FormFError::Invalid(format!("power {} is not a nonnegative integer", t.exponent)));
                }
                if strict && t.logpow > 0 && t.exponent.is_zero() && c.origin == p.lo {
                    return Err(FormFError::Invalid(format!(
                        "unbounded (log)^{} at {}",
                        t.logpow,
                        fmt_rational(&p.lo)
                    )));
                }
            }
        }
    }
    Ok(())
}

fn eval_local(body: &SingExpansion, y: f64) -> f64 {
    if y < 0.0 {
        return f64::NAN;
    }
    let ly = y.ln();
    let mut acc = 0.0;
    for t in body.terms() {
        let c = t.coeff.value().unwrap_or(f64::NAN);
        let n = to_f64(&t.exponent);
        if y == 0.0 {
            if n > 0.0 {
                continue;
            }
            if t.logpow > 0 {
                return if (t.logpow % 2 == 0) == (c > 0.0) { f64::INFINITY } else { f64::NEG_INFINITY };
            }
            acc += c;
            continue;
        }
        acc += c * y.powf(n) * ly.powi(t.logpow as i32);
    }
    acc
}

fn constant(c: Coefficient) -> SingExpansion {
    SingExpansion::from_terms([LogPowTerm::new(c, int(0), 0)])
}

/// `(y + s)^j` as a polynomial in `y`.
fn shifted_power(j: u32, s: &Rational) -> SingExpansion {
    SingExpansion::from_terms(
        (0..=j).map(|i| LogPowTerm::exact(binomial(j, i) * powi(s, (j - i) as i64), int(i as i64), 0)),
    )
}

/// `p(y + s)` for a polynomial `p`.
fn substitute_shift(poly: &SingExpansion, s: &Rational) -> SingExpansion {
    let mut acc = SingExpansion::zero();
    for t in poly.terms() {
        debug_assert_eq!(t.logpow, 0);
        let n = as_i64(&t.exponent).expect("integer power") as u32;
        acc = acc.add(&shifted_power(n, s).scale_coeff(&t.coeff));
    }
    acc
}

/// Polynomial parts move to origin 0; log parts stay at their origin.
fn normalize_components(comps: Vec<Component>) -> Vec<Component> {
    let mut base = SingExpansion::zero();
    let mut logs: Vec<Component> = Vec::new();
    for c in comps {
        if c.origin.is_zero() {
            base = base.add(&c.body);
            continue;
        }
        let (poly, log): (Vec<LogPowTerm>, Vec<LogPowTerm>) =
            c.body.terms().iter().cloned().partition(|t| t.logpow == 0);
        base = base.add(&substitute_shift(&SingExpansion::from_terms(poly), &-c.origin.clone()));
        let log = SingExpansion::from_terms(log);
        if log.is_empty() {
            continue;
        }
        match logs.iter_mut().find(|l| l.origin == c.origin) {
            Some(l) => l.body = l.body.add(&log),
            None => logs.push(Component::new(c.origin, log)),
        }
    }
    logs.retain(|l| !l.body.is_empty());
    logs.sort_by(|a, b| a.origin.cmp(&b.origin));
    let mut out = Vec::with_capacity(logs.len() + 1);
    if !base.is_empty() {
        out.push(Component::new(int(0), base));
    }
    out.extend(logs);
    out
}

/// Value at a rational point, kept exact when no logarithm survives.
fn value_at(body: &SingExpansion, y0: &Rational) -> Coefficient {
    let mut acc = Coefficient::exact(int(0));
    for t in body.terms() {
        let n = as_i64(&t.exponent).expect("integer power");
        if y0.is_zero() {
            if n > 0 {
                continue;
            }
            if n == 0 && t.logpow == 0 {
                acc = acc.add(&t.coeff);
                continue;
            }
            return Coefficient::numeric(f64::NAN);
        }
        let mut c = t.coeff.scale(&powi(y0, n));
        if t.logpow > 0 {
            if y0.is_one() {
                continue;
            }
            c = c.scale_f64(to_f64(y0).ln().powi(t.logpow as i32));
        }
        acc = acc.add(&c);
    }
    acc
}

/// `∫ y^p body(y) dy` with no constant, including the `y^{-1}` case.
fn weighted_antiderivative(body: &SingExpansion, p: i64) -> SingExpansion {
    let shifted = body.mul_monomial(&int(p), 0);
    let (recip, rest): (Vec<LogPowTerm>, Vec<LogPowTerm>) =
        shifted.terms().iter().cloned().partition(|t| t.exponent == int(-1));
    let mut out = SingExpansion::from_terms(rest).antiderivative().expect("reciprocal terms split off");
    for t in recip {
        let m = t.logpow + 1;
        out = out.add(&SingExpansion::from_terms([LogPowTerm::new(t.coeff.scale(&Rational::new(1.into(), m.into())), int(0), m)]));
    }
    out
}

/// `g(u/w)` rewritten in `u`.
fn rescale(g: &SingExpansion, w: &Rational) -> SingExpansion {
    if w.is_one() {
        return g.clone();
    }
    let lw = to_f64(w).ln();
    let mut out = Vec::new();
    for t in g.terms() {
        let n = as_i64(&t.exponent).expect("integer power");
        let c = t.coeff.scale(&powi(w, -n));
        // (log u − log w)^m
        for i in 0..=t.logpow {
            let k = binomial(t.logpow, i);
            let mut ci = c.scale(&k);
            let r = t.logpow - i;
            if r > 0 {
                ci = ci.scale_f64((-lw).powi(r as i32));
            }
            out.push(LogPowTerm::new(ci, t.exponent.clone(), i));
        }
    }
    SingExpansion::from_terms(out)
}

const NUMERIC_TOL: f64 = 1e-12;
const NUMERIC_LEVEL: u32 = 7;

/// `∫_a^b weight(x) f(x) dx`, integrating each component in its own local
/// variable so that endpoint logarithms stay resolved.
fn integrate_num(f: &FormF, a: f64, b: f64, weight: &dyn Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut total = 0.0;
    for p in &f.pieces {
        let (lo, hi) = (to_f64(&p.lo).max(a), to_f64(&p.hi).min(b));
        if hi <= lo {
            continue;
        }
        for c in &p.components {
            let o = to_f64(&c.origin);
            let g = |y: f64| weight(y + o) * eval_local(&c.body, y);
            total += tanh_sinh(g, lo - o, hi - o, NUMERIC_TOL, NUMERIC_LEVEL).value;
        }
    }
    let exact_hi = to_f64(&f.exact_hi());
    let support = to_f64(&f.support_hi);
    if let Some(t) = &f.tail {
        let mut cuts: Vec<f64> = vec![exact_hi];
        cuts.extend(t.breaks.iter().map(to_f64));
        cuts.push(support);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0].max(a), w[1].min(b));
            if hi > lo {
                total += tanh_sinh(|x| weight(x) * (t.f)(x), lo, hi, NUMERIC_TOL, NUMERIC_LEVEL).value;
            }
        }
    }
    if b > support && !f.after.is_exact_zero() {
        let c = f.after.value().unwrap_or(f64::NAN);
        total += c * tanh_sinh(weight, support.max(a), b, NUMERIC_TOL, NUMERIC_LEVEL).value;
    }
    total
}

fn require_positive(w: &Rational) -> Result<(), FormFError> {
    if w.is_positive() {
        Ok(())
    } else {
        Err(FormFError::NonPositiveWeight(fmt_rational(w)))
    }
}

fn require_compact(f: &FormF) -> Result<(), FormFError> {
    if f.after.is_exact_zero() {
        Ok(())
    } else {
        Err(FormFError::NonzeroBeyondSupport)
    }
}

/// `h ↦ ∫_h^1 I(x) dx/x` for `I` supported on `[0, 1]`.
pub fn mult_conv(i: &FormF) -> Result<FormF, FormFError> {
    mult_conv_var(i, &int(1), 0)
}

/// Density of `w·x·R` when `R` has density `h` and `x` has measure
/// `x^e dx` on `[0, 1]`:
/// `D(u) = (1/w) (u/w)^e ∫_{u/w}^∞ s^{−e−1} h(s) ds`.
pub fn mult_conv_var(h: &FormF, w: &Rational, e: u32) -> Result<FormF, FormFError> {
    require_positive(w)?;
    require_compact(h)?;
    let p = -(e as i64) - 1;
    let support = h.support_hi.clone();
    // Integrals of shifted-origin logarithms against s^p are not elementary;
    // the exact part stops at the first piece carrying one.
    let cut_idx = h
        .pieces
        .iter()
        .position(|pc| pc.components.iter().any(|c| !c.origin.is_zero()))
        .unwrap_or(h.pieces.len());
    let cut = h.pieces.get(cut_idx).map(|pc| pc.lo.clone()).unwrap_or_else(|| h.exact_hi());
    let weight = move |x: f64| x.powi(p as i32);
    let mut above = if cut < support {
        Coefficient::numeric(integrate_num(h, to_f64(&cut), to_f64(&support), &weight))
    } else {
        Coefficient::exact(int(0))
    };
    let mut out = Vec::with_capacity(cut_idx);
    for pc in h.pieces[..cut_idx].iter().rev() {
        let body = pc.origin_zero_body().expect("origin-zero piece below the cut");
        let anti = weighted_antiderivative(&body, p);
        let top = value_at(&anti, &pc.hi);
        let g = anti.neg().add(&constant(top.add(&above)));
        let d = rescale(&g.mul_monomial(&int(e as i64), 0), w).scale(&w.recip());
        out.push(Piece::new(w * &pc.lo, w * &pc.hi, vec![Component::new(int(0), d)]));
        if !pc.lo.is_zero() {
            above = above.add(&value_at(&anti, &pc.hi)).add(&value_at(&anti, &pc.lo).neg());
        }
    }
    out.reverse();
    let tail = (cut < support).then(|| {
        let src = h.clone();
        let (wf, top) = (to_f64(w), to_f64(&support));
        let breaks = h.breakpoints().into_iter().filter(|b| b > &cut && b < &support).map(|b| w * b).collect();
        Tail {
            breaks,
            f: Arc::new(move |u: f64| {
                let y = u / wf;
                if y >= top {
                    return 0.0;
                }
                y.powi(e as i32) / wf * integrate_num(&src, y, top, &weight)
            }) as TailFn,
        }
    });
    Ok(FormF { pieces: out, tail, support_hi: w * support, after: Coefficient::exact(int(0)) })
}

/// Density of `R + x` for `R` with density `i` on `[0, 1]` and `x` uniform:
/// `H(h) = ∫_{max(0,h−1)}^{min(1,h)} I(g) dg`.
pub fn add_conv(i: &FormF) -> Result<FormF, FormFError> {
    add_conv_leaf(i, &int(1), 0)
}

/// Density of `R + w·x` where `x` has measure `x^e dx` on `[0, 1]`.
///
/// With `B_k(y) = ∫_0^y g^k I(g) dg`,
/// `H(h) = w^{−e−1} Σ_k C(e,k) (−1)^k h^{e−k} [B_k(min(h,S)) − B_k(max(h−w,0))]`.
pub fn add_conv_leaf(i: &FormF, w: &Rational, e: u32) -> Result<FormF, FormFError> {
    require_positive(w)?;
    require_compact(i)?;
    let support = i.support_hi.clone();
    let exact = i.exact_hi();
    let cums: Vec<FormF> = (0..=e).map(|k| cumulative(&i.mul_power(k))).collect::<Result<_, _>>()?;
    let out_exact = if i.tail.is_some() { exact.clone() } else { &support + w };
    let mut cuts: Vec<Rational> = vec![int(0), w.clone(), out_exact.clone()];
    for b in i.breakpoints() {
        cuts.push(&b + w);
        cuts.push(b);
    }
    cuts.retain(|c| c <= &out_exact);
    cuts.sort();
    cuts.dedup();
    let scale = powi(w, -(e as i64) - 1);
    let mut pieces = Vec::new();
    for win in cuts.windows(2) {
        let (h0, h1) = (&win[0], &win[1]);
        let mut comps = Vec::new();
        for (k, cum) in cums.iter().enumerate() {
            let k = k as u32;
            let c = &scale * binomial(e, k) * if k % 2 == 0 { int(1) } else { int(-1) };
            let mut diff: Vec<Component> = if h1 <= &support {
                cum.piece_at(&((h0 + h1) / int(2))).expect("inside exact region").components.clone()
            } else {
                vec![Component::new(int(0), constant(cum.after.clone()))]
            };
            if h0 >= w {
                let mid = (h0 + h1) / int(2) - w;
                for comp in &cum.piece_at(&mid).expect("inside exact region").components {
                    let s = comp.shifted(w);
                    diff.push(Component::new(s.origin, s.body.neg()));
                }
            }
            for comp in diff {
                let m = comp.mul_power(e - k);
                comps.push(Component::new(m.origin, m.body.scale(&c)));
            }
        }
        pieces.push(Piece::new(h0.clone(), h1.clone(), comps));
    }
    let total = &support + w;
    let tail = (out_exact < total).then(|| {
        let src = i.clone();
        let (wf, sf) = (to_f64(w), to_f64(&support));
        let sc = to_f64(&scale);
        let mut breaks: Vec<Rational> = i.breakpoints().into_iter().flat_map(|b| [&b + w, b]).collect();
        breaks.retain(|b| b > &out_exact && b < &total);
        Tail {
            breaks,
            f: Arc::new(move |h: f64| {
                let kernel = |g: f64| sc * (h - g).max(0.0).powi(e as i32);
                integrate_num(&src, (h - wf).max(0.0), h.min(sf), &kernel)
            }) as TailFn,
        }
    });
    Ok(FormF { pieces, tail, support_hi: total, after: Coefficient::exact(int(0)) })
}

/// `x ↦ f(x − c)`: the density of `c + R`.
pub fn shift(f: &FormF, c: &Rational) -> Result<FormF, FormFError> {
    if c.is_negative() {
        return Err(FormFError::NegativeConstant(fmt_rational(c)));
    }
    if c.is_zero() {
        return Ok(f.clone());
    }
    let mut pieces = vec![Piece::zero(int(0), c.clone())];
    for p in &f.pieces {
        pieces.push(Piece::new(&p.lo + c, &p.hi + c, p.components.iter().map(|comp| comp.shifted(c)).collect()));
    }
    let tail = f.tail.as_ref().map(|t| {
        let g = t.f.clone();
        let cf = to_f64(c);
        Tail { breaks: t.breaks.iter().map(|b| b + c).collect(), f: Arc::new(move |x: f64| g(x - cf)) as TailFn }
    });
    Ok(FormF { pieces, tail, support_hi: &f.support_hi + c, after: f.after.clone() })
}

/// `x ↦ ∫_0^x f`.
pub fn cumulative(f: &FormF) -> Result<FormF, FormFError> {
    require_compact(f)?;
    let mut acc = Coefficient::exact(int(0));
    let mut pieces = Vec::with_capacity(f.pieces.len());
    for p in &f.pieces {
        let mut comps = vec![Component::new(int(0), constant(acc.clone()))];
        for c in &p.components {
            let anti = c.body.antiderivative().map_err(|e| FormFError::Invalid(e.to_string()))?;
            let start = value_at(&anti, &(&p.lo - &c.origin));
            let end = value_at(&anti, &(&p.hi - &c.origin));
            comps.push(Component::new(c.origin.clone(), anti.add(&constant(start.neg()))));
            acc = acc.add(&end).add(&start.neg());
        }
        pieces.push(Piece::new(p.lo.clone(), p.hi.clone(), comps));
    }
    let exact_hi = f.exact_hi();
    let (tail, after) = match &f.tail {
        None => (None, acc),
        Some(t) => {
            let src = f.clone();
            let base = acc.value().unwrap_or(f64::NAN);
            let lo = to_f64(&exact_hi);
            let total = base + integrate_num(f, lo, to_f64(&f.support_hi), &|_| 1.0);
            let tail = Tail {
                breaks: t.breaks.clone(),
                f: Arc::new(move |x: f64| base + integrate_num(&src, lo, x, &|_| 1.0)) as TailFn,
            };
            (Some(tail), Coefficient::numeric(total))
        }
    };
    Ok(FormF { pieces, tail, support_hi: f.support_hi.clone(), after })
}

/// `f(r₀) = ∫_0^1 dx ∫ dh Θ(r₀ − x h) H(h)`.
pub fn theta_reduce(h: &FormF) -> Result<FormF, FormFError> {
    theta_reduce_var(h, &int(1), 0)
}

/// As [`theta_reduce`] with the outer variable weighted by `w` and carrying
/// the measure `x^e dx`.
pub fn theta_reduce_var(h: &FormF, w: &Rational, e: u32) -> Result<FormF, FormFError> {
    cumulative(&mult_conv_var(h, w, e)?)
}

/// Density of the value of `p` under its product measure.
pub fn density(p: &ChainExpr) -> Result<FormF, FormFError> {
    p.validate()?;
    density_unchecked(p)
}

fn density_unchecked(p: &ChainExpr) -> Result<FormF, FormFError> {
    let ChainVar { weight, exponent } = &p.var;
    let Some(factor) = &p.factor else {
        return Ok(FormF::leaf_density(weight, *exponent));
    };
    let (compound, leaves): (Vec<&ChainExpr>, Vec<&ChainExpr>) =
        factor.terms.iter().partition(|t| t.factor.is_some());
    if compound.len() > 1 {
        return Err(FormFError::Unsupported("a sum may hold at most one product term".into()));
    }
    let mut inner = compound.first().map(|c| density_unchecked(c)).transpose()?;
    for leaf in leaves {
        inner = Some(match inner {
            None => FormF::leaf_density(&leaf.var.weight, leaf.var.exponent),
            Some(i) => add_conv_leaf(&i, &leaf.var.weight, leaf.var.exponent)?,
        });
    }
    match inner {
        None => Ok(FormF::leaf_density(&(weight * &factor.constant), *exponent)),
        Some(i) => mult_conv_var(&shift(&i, &factor.constant)?, weight, *exponent),
    }
}

/// `f(r₀) = ∫ Π dx_j x_j^{e_j} Θ(r₀ − P)` over the unit cube.
pub fn smear(p: &ChainExpr) -> Result<FormF, FormFError> {
    cumulative(&density(p)?)
}

fn fmt_body(body: &SingExpansion, var: &str, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if body.is_empty() {
        return write!(f, "0");
    }
    for (k, t) in body.terms().iter().enumerate() {
        if k > 0 {
            write!(f, " + ")?;
        }
        write!(f, "{}", t.coeff)?;
        if !t.exponent.is_zero() {
            if t.exponent.is_one() {
                write!(f, "·{var}")?;
            } else {
                write!(f, "·{var}^{}", fmt_rational(&t.exponent))?;
            }
        }
        match t.logpow {
            0 => {}
            1 => write!(f, "·log {var}")?,
            m => write!(f, "·(log {var})^{m}")?,
        }
    }
    Ok(())
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.origin.is_zero() {
            fmt_body(&self.body, "x", f)
        } else {
            fmt_body(&self.body, &format!("(x-{})", fmt_rational(&self.origin)), f)
        }
    }
}

impl fmt::Display for FormF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, p) in self.pieces.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "[{}, {}]: ", fmt_rational(&p.lo), fmt_rational(&p.hi))?;
            if p.components.is_empty() {
                write!(f, "0")?;
            }
            for (j, c) in p.components.iter().enumerate() {
                if j > 0 {
                    write!(f, " + ")?;
                }
                write!(f, "{c}")?;
            }
        }
        if self.tail.is_some() {
            write!(f, "\n[{}, {}]: numeric", fmt_rational(&self.exact_hi()), fmt_rational(&self.support_hi))?;
        }
        Ok(())
    }
}

impl FormF {
    /// Terms of the first piece, when it has a single origin at zero.
    pub fn first_piece_expansion(&self) -> Option<SingExpansion> {
        self.pieces.first().and_then(Piece::origin_zero_body)
    }
}
