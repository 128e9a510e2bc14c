//! Exact algebra of singular expansions `Σ c · t^p · (log t)^m`.
//!
//! An expansion describes a function of `t` near `t = 0`, taken as the
//! boundary value from `Im t > 0`, modulo a function holomorphic at the
//! origin. Terms that are themselves holomorphic (`logpow == 0` and a
//! nonnegative integer exponent) may be carried along, because they can
//! resonate with a later Euler operator; [`SingExpansion::singular_part`]
//! strips them.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{factorial, fmt_rational, int, is_nonneg_integer, to_f64, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LogPowError {
    #[error("antiderivative of a t^-1 term needs the Euler solver (logpow {logpow})")]
    ReciprocalTerm { logpow: u32 },
    #[error("expansion is empty")]
    Empty,
    #[error("leading coefficient is not exact: {0}")]
    NotExact(String),
}

/// A coefficient of a single term.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Exact(Rational),
    /// Not fixed by the recurrences. The lineage records which unknowns fed
    /// into it so merges stay traceable.
    Undetermined(BTreeSet<String>),
    /// A floating value, either fitted from data or a transcendental constant
    /// evaluated in closed form (then `stderr == 0`).
    Fitted { value: f64, stderr: f64 },
}

impl Coefficient {
    pub fn exact(r: Rational) -> Self {
        Coefficient::Exact(r)
    }

    pub fn unknown(label: impl Into<String>) -> Self {
        let mut s = BTreeSet::new();
        s.insert(label.into());
        Coefficient::Undetermined(s)
    }

    pub fn numeric(value: f64) -> Self {
        Coefficient::Fitted { value, stderr: 0.0 }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, Coefficient::Exact(r) if r.is_zero())
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Coefficient::Exact(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_undetermined(&self) -> bool {
        matches!(self, Coefficient::Undetermined(_))
    }

    /// Numeric value, if the coefficient has one.
    pub fn value(&self) -> Option<f64> {
        match self {
            Coefficient::Exact(r) => Some(to_f64(r)),
            Coefficient::Fitted { value, .. } => Some(*value),
            Coefficient::Undetermined(_) => None,
        }
    }

    pub fn add(&self, other: &Coefficient) -> Coefficient {
        use Coefficient::*;
        match (self, other) {
            (Exact(a), Exact(b)) => Exact(a + b),
            (Undetermined(a), Undetermined(b)) => Undetermined(a.union(b).cloned().collect()),
            (Undetermined(a), _) | (_, Undetermined(a)) => Undetermined(a.clone()),
            (Fitted { value, stderr }, Exact(b)) | (Exact(b), Fitted { value, stderr }) => Fitted {
                value: value + to_f64(b),
                stderr: *stderr,
            },
            (Fitted { value: v1, stderr: s1 }, Fitted { value: v2, stderr: s2 }) => Fitted {
                value: v1 + v2,
                stderr: s1.hypot(*s2),
            },
        }
    }

    pub fn scale(&self, r: &Rational) -> Coefficient {
        match self {
            Coefficient::Exact(a) => Coefficient::Exact(a * r),
            Coefficient::Undetermined(_) if r.is_zero() => Coefficient::Exact(Rational::zero()),
            Coefficient::Undetermined(s) => Coefficient::Undetermined(s.clone()),
            Coefficient::Fitted { value, stderr } => {
                let f = to_f64(r);
                Coefficient::Fitted { value: value * f, stderr: stderr * f.abs() }
            }
        }
    }

    /// Multiplies by a float constant; an exact coefficient becomes numeric
    /// unless the factor is zero.
    pub fn scale_f64(&self, x: f64) -> Coefficient {
        match self {
            Coefficient::Exact(a) if a.is_zero() => self.clone(),
            Coefficient::Exact(a) => Coefficient::numeric(to_f64(a) * x),
            Coefficient::Undetermined(s) => Coefficient::Undetermined(s.clone()),
            Coefficient::Fitted { value, stderr } => Coefficient::Fitted {
                value: value * x,
                stderr: stderr * x.abs(),
            },
        }
    }

    pub fn mul(&self, other: &Coefficient) -> Coefficient {
        use Coefficient::*;
        match (self, other) {
            (Exact(a), _) => other.scale(a),
            (_, Exact(b)) => self.scale(b),
            (Undetermined(a), Undetermined(b)) => Undetermined(a.union(b).cloned().collect()),
            (Undetermined(a), _) | (_, Undetermined(a)) => Undetermined(a.clone()),
            (Fitted { value: v1, stderr: s1 }, Fitted { value: v2, stderr: s2 }) => Fitted {
                value: v1 * v2,
                stderr: (v2 * s1).hypot(v1 * s2),
            },
        }
    }

    pub fn neg(&self) -> Coefficient {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Exact(r) => write!(f, "{}", fmt_rational(r)),
            Coefficient::Undetermined(s) => {
                let labels: Vec<&str> = s.iter().map(String::as_str).collect();
                write!(f, "U[{}]", labels.join(","))
            }
            Coefficient::Fitted { value, stderr } if *stderr == 0.0 => write!(f, "{value:.12e}"),
            Coefficient::Fitted { value, stderr } => write!(f, "{value:.6e}±{stderr:.1e}"),
        }
    }
}

/// `coeff · t^exponent · (log t)^logpow`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPowTerm {
    pub coeff: Coefficient,
    pub exponent: Rational,
    pub logpow: u32,
}

impl LogPowTerm {
    pub fn new(coeff: Coefficient, exponent: Rational, logpow: u32) -> Self {
        LogPowTerm { coeff, exponent, logpow }
    }

    pub fn exact(c: Rational, exponent: Rational, logpow: u32) -> Self {
        LogPowTerm::new(Coefficient::Exact(c), exponent, logpow)
    }

    pub fn is_holomorphic(&self) -> bool {
        self.logpow == 0 && is_nonneg_integer(&self.exponent)
    }

    pub fn key(&self) -> (Rational, u32) {
        (self.exponent.clone(), self.logpow)
    }
}

/// Boundary value marker. Only `t + i0` (approach from `Im t > 0`) exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    #[default]
    UpperHalfPlane,
}

/// A finite sum of [`LogPowTerm`]s, kept normalized: unique keys, no exact
/// zeros, sorted by exponent ascending then log power descending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SingExpansion {
    terms: Vec<LogPowTerm>,
    branch: Branch,
}

impl SingExpansion {
    pub fn zero() -> Self {
        SingExpansion::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = LogPowTerm>) -> Self {
        let mut e = SingExpansion { terms: terms.into_iter().collect(), branch: Branch::UpperHalfPlane };
        e.normalize_in_place();
        e
    }

    /// Single exact monomial `c · t^p · (log t)^m`.
    pub fn monomial(c: Rational, exponent: Rational, logpow: u32) -> Self {
        SingExpansion::from_terms([LogPowTerm::exact(c, exponent, logpow)])
    }

    pub fn terms(&self) -> &[LogPowTerm] {
        &self.terms
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn normalize(&self) -> SingExpansion {
        let mut e = self.clone();
        e.normalize_in_place();
        e
    }

    fn normalize_in_place(&mut self) {
        let mut terms = std::mem::take(&mut self.terms);
        terms.sort_by(|a, b| a.exponent.cmp(&b.exponent).then(b.logpow.cmp(&a.logpow)));
        let mut out: Vec<LogPowTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match out.last_mut() {
                Some(last) if last.exponent == t.exponent && last.logpow == t.logpow => {
                    last.coeff = last.coeff.add(&t.coeff);
                }
                _ => out.push(t),
            }
        }
        out.retain(|t| !t.coeff.is_exact_zero());
        self.terms = out;
    }

    pub fn add(&self, other: &SingExpansion) -> SingExpansion {
        SingExpansion::from_terms(self.terms.iter().chain(other.terms.iter()).cloned())
    }

    pub fn sub(&self, other: &SingExpansion) -> SingExpansion {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SingExpansion {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, r: &Rational) -> SingExpansion {
        SingExpansion::from_terms(self.terms.iter().map(|t| LogPowTerm {
            coeff: t.coeff.scale(r),
            ..t.clone()
        }))
    }

    pub fn scale_coeff(&self, c: &Coefficient) -> SingExpansion {
        SingExpansion::from_terms(self.terms.iter().map(|t| LogPowTerm {
            coeff: t.coeff.mul(c),
            ..t.clone()
        }))
    }

    /// Multiplies every term by `t^exponent (log t)^logpow`.
    pub fn mul_monomial(&self, exponent: &Rational, logpow: u32) -> SingExpansion {
        SingExpansion::from_terms(self.terms.iter().map(|t| LogPowTerm {
            coeff: t.coeff.clone(),
            exponent: &t.exponent + exponent,
            logpow: t.logpow + logpow,
        }))
    }

    /// Product of two expansions, term by term.
    pub fn mul(&self, other: &SingExpansion) -> SingExpansion {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                out.push(LogPowTerm {
                    coeff: a.coeff.mul(&b.coeff),
                    exponent: &a.exponent + &b.exponent,
                    logpow: a.logpow + b.logpow,
                });
            }
        }
        SingExpansion::from_terms(out)
    }

    /// Termwise `∫^t s^p (log s)^m ds`, with no integration constant.
    pub fn antiderivative(&self) -> Result<SingExpansion, LogPowError> {
        let mut out = Vec::new();
        for t in &self.terms {
            let q = &t.exponent + Rational::one();
            if q.is_zero() {
                return Err(LogPowError::ReciprocalTerm { logpow: t.logpow });
            }
            out.extend(antiderivative_term(&t.coeff, &q, t.logpow));
        }
        Ok(SingExpansion::from_terms(out))
    }

    /// Drops holomorphic terms.
    pub fn singular_part(&self) -> SingExpansion {
        SingExpansion::from_terms(self.terms.iter().filter(|t| !t.is_holomorphic()).cloned())
    }

    /// The most singular term: smallest exponent, then largest log power.
    pub fn leading(&self) -> Option<&LogPowTerm> {
        self.terms.first()
    }

    /// Copy with the leading coefficient multiplied by `r`.
    pub fn scale_leading(&self, r: &Rational) -> SingExpansion {
        let mut terms = self.terms.clone();
        if let Some(first) = terms.first_mut() {
            first.coeff = first.coeff.scale(r);
        }
        SingExpansion::from_terms(terms)
    }

    pub fn max_logpow(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.logpow).max()
    }

    pub fn min_exponent(&self) -> Option<&Rational> {
        self.terms.first().map(|t| &t.exponent)
    }

    pub fn coefficient(&self, exponent: &Rational, logpow: u32) -> Option<&Coefficient> {
        self.terms
            .iter()
            .find(|t| &t.exponent == exponent && t.logpow == logpow)
            .map(|t| &t.coeff)
    }

    /// Keys `(exponent, logpow)` of every term.
    pub fn catalog(&self) -> Vec<(Rational, u32)> {
        self.terms.iter().map(LogPowTerm::key).collect()
    }

    /// Evaluates at a complex point with the principal logarithm. `None`
    /// when some coefficient is undetermined.
    pub fn eval(&self, t: Complex64) -> Option<Complex64> {
        let lt = t.ln();
        let mut acc = Complex64::zero();
        for term in &self.terms {
            let c = term.coeff.value()?;
            acc += c * (to_f64(&term.exponent) * lt).exp() * lt.powu(term.logpow);
        }
        Some(acc)
    }

    /// Rewrites every coefficient that is not exact as `Undetermined`,
    /// keeping its lineage label.
    pub fn with_exact_or_unknown(&self, label: &str) -> SingExpansion {
        SingExpansion::from_terms(self.terms.iter().map(|t| LogPowTerm {
            coeff: match &t.coeff {
                Coefficient::Fitted { .. } => Coefficient::unknown(label),
                c => c.clone(),
            },
            ..t.clone()
        }))
    }
}

fn antiderivative_term(c: &Coefficient, q: &Rational, m: u32) -> Vec<LogPowTerm> {
    // ∫ t^(q-1) L^m = t^q Σ_r (-1)^r m!/(m-r)! L^(m-r) / q^(r+1)
    let mfact = factorial(m);
    let mut out = Vec::with_capacity(m as usize + 1);
    let mut qpow = q.clone();
    for r in 0..=m {
        let sign = if r % 2 == 0 { Rational::one() } else { -Rational::one() };
        let k = sign * &mfact / factorial(m - r) / &qpow;
        out.push(LogPowTerm::new(c.scale(&k), q.clone(), m - r));
        qpow *= q;
    }
    out
}

/// Leading-term comparison: exponent, log power and exact coefficient.
pub fn equal_leading(a: &SingExpansion, b: &SingExpansion) -> Result<bool, LogPowError> {
    let la = a.leading().ok_or(LogPowError::Empty)?;
    let lb = b.leading().ok_or(LogPowError::Empty)?;
    let ca = la.coeff.as_exact().ok_or_else(|| LogPowError::NotExact(la.coeff.to_string()))?;
    let cb = lb.coeff.as_exact().ok_or_else(|| LogPowError::NotExact(lb.coeff.to_string()))?;
    Ok(la.exponent == lb.exponent && la.logpow == lb.logpow && ca == cb)
}

/// The Euler operator `t d/dt − shift`.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerOp {
    pub shift: Rational,
}

impl EulerOp {
    pub fn new(shift: Rational) -> Self {
        EulerOp { shift }
    }

    /// `(t d/dt − s) c t^p L^m = c (p − s) t^p L^m + c m t^p L^(m−1)`.
    pub fn apply(&self, f: &SingExpansion) -> SingExpansion {
        let mut out = Vec::new();
        for t in f.terms() {
            let d = &t.exponent - &self.shift;
            out.push(LogPowTerm::new(t.coeff.scale(&d), t.exponent.clone(), t.logpow));
            if t.logpow > 0 {
                out.push(LogPowTerm::new(
                    t.coeff.scale(&int(t.logpow as i64)),
                    t.exponent.clone(),
                    t.logpow - 1,
                ));
            }
        }
        SingExpansion::from_terms(out)
    }

    /// A particular solution of `(t d/dt − s) f = rhs`, plus the homogeneous
    /// solution `U · t^s` with an undetermined coefficient labelled `label`.
    pub fn solve_labeled(&self, rhs: &SingExpansion, label: &str) -> SingExpansion {
        let s = &self.shift;
        let mut out = Vec::new();
        for t in rhs.terms() {
            let m = t.logpow;
            if &t.exponent == s {
                // resonance: (k+1) a_{k+1} = c δ_{km}
                out.push(LogPowTerm::new(
                    t.coeff.scale(&Rational::new(1.into(), (m + 1).into())),
                    t.exponent.clone(),
                    m + 1,
                ));
            } else {
                // (p − s) a_k + (k+1) a_{k+1} = c δ_{km}
                let inv = (&t.exponent - s).recip();
                let mut a = t.coeff.scale(&inv);
                out.push(LogPowTerm::new(a.clone(), t.exponent.clone(), m));
                for k in (0..m).rev() {
                    a = a.scale(&(-int(k as i64 + 1) * &inv));
                    out.push(LogPowTerm::new(a.clone(), t.exponent.clone(), k));
                }
            }
        }
        out.push(LogPowTerm::new(Coefficient::unknown(label), s.clone(), 0));
        SingExpansion::from_terms(out)
    }

    pub fn solve(&self, rhs: &SingExpansion) -> SingExpansion {
        let label = format!("h{}", fmt_rational(&self.shift));
        self.solve_labeled(rhs, &label)
    }
}

/// Free-function form of [`EulerOp::solve`].
pub fn euler_solve(op: &EulerOp, rhs: &SingExpansion) -> SingExpansion {
    op.solve(rhs)
}

fn fmt_power(exponent: &Rational, logpow: u32, var: &str) -> String {
    let mut parts = Vec::new();
    if !exponent.is_zero() {
        if exponent == &Rational::one() {
            parts.push(var.to_string());
        } else if exponent.is_negative() || !exponent.is_integer() {
            parts.push(format!("{var}^({})", fmt_rational(exponent)));
        } else {
            parts.push(format!("{var}^{}", fmt_rational(exponent)));
        }
    }
    match logpow {
        0 => {}
        1 => parts.push(format!("log {var}")),
        m => parts.push(format!("(log {var})^{m}")),
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("·")
    }
}

impl fmt::Display for LogPowTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·{}", self.coeff, fmt_power(&self.exponent, self.logpow, "t"))
    }
}

impl LogPowTerm {
    /// Like `Display`, with `var` in place of `t`.
    pub fn display_in(&self, var: &str) -> String {
        format!("{}·{}", self.coeff, fmt_power(&self.exponent, self.logpow, var))
    }
}

impl SingExpansion {
    /// Like `Display`, with `var` in place of `t`.
    pub fn display_in(&self, var: &str) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms.iter().map(|t| t.display_in(var)).collect::<Vec<_>>().join(" + ")
    }
}

impl fmt::Display for SingExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let s: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", s.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn mono(c: Rational, p: Rational, m: u32) -> SingExpansion {
        SingExpansion::monomial(c, p, m)
    }

    #[test]
    fn additive_inverse_cancels() {
        let a = mono(int(1), int(1), 1);
        assert!(a.add(&a.neg()).is_empty());
    }

    #[test]
    fn disjoint_keys_merge_sorted() {
        let s = mono(rat(1, 2), int(0), 2).add(&mono(int(3), int(0), 1));
        assert_eq!(s.len(), 2);
        assert_eq!(s.terms()[0].logpow, 2);
        assert_eq!(s.terms()[1].coeff, Coefficient::Exact(int(3)));
    }

    #[test]
    fn undetermined_propagates() {
        let a = mono(int(1), int(1), 0);
        let b = SingExpansion::from_terms([LogPowTerm::new(Coefficient::unknown("u"), int(1), 0)]);
        let s = a.add(&b);
        assert_eq!(s.len(), 1);
        assert!(s.terms()[0].coeff.is_undetermined());
    }

    #[test]
    fn monomial_shifts() {
        let l = mono(int(1), int(0), 1);
        assert_eq!(l.mul_monomial(&int(1), 0), mono(int(1), int(1), 1));
        let t = mono(int(1), int(1), 0);
        assert_eq!(t.mul_monomial(&int(0), 1), mono(int(1), int(1), 1));
        let x = mono(int(1), int(2), 2);
        assert_eq!(x.mul_monomial(&int(-1), 0), mono(int(1), int(1), 2));
    }

    #[test]
    fn antiderivative_of_t_log_t() {
        // t²/2 (log t − 1/2)
        let a = mono(int(1), int(1), 1).antiderivative().unwrap();
        let want = mono(rat(1, 2), int(2), 1).add(&mono(rat(-1, 4), int(2), 0));
        assert_eq!(a, want);
        assert_eq!(mono(int(1), int(0), 0).antiderivative().unwrap(), mono(int(1), int(1), 0));
        assert_eq!(
            mono(int(1), rat(1, 2), 0).antiderivative().unwrap(),
            mono(rat(2, 3), rat(3, 2), 0)
        );
    }

    #[test]
    fn antiderivative_rejects_reciprocal() {
        let e = mono(int(1), int(-1), 2);
        assert_eq!(e.antiderivative(), Err(LogPowError::ReciprocalTerm { logpow: 2 }));
    }

    #[test]
    fn euler_examples() {
        let f = EulerOp::new(int(1)).solve(&mono(int(1), int(1), 1));
        assert_eq!(f.singular_part(), mono(rat(1, 2), int(1), 2));

        let f = EulerOp::new(int(0)).solve(&mono(int(1), int(0), 1));
        assert_eq!(f.singular_part(), mono(rat(1, 2), int(0), 2));

        let f = EulerOp::new(rat(1, 2)).solve(&mono(int(1), rat(3, 2), 0));
        assert_eq!(f.len(), 2);
        assert_eq!(f.coefficient(&rat(3, 2), 0), Some(&Coefficient::Exact(int(1))));
        assert!(f.coefficient(&rat(1, 2), 0).unwrap().is_undetermined());
    }

    #[test]
    fn equal_leading_cases() {
        let u = SingExpansion::from_terms([LogPowTerm::new(Coefficient::unknown("c1"), int(0), 1)]);
        let a = mono(rat(1, 2), int(0), 2).add(&u);
        let b = mono(rat(1, 2), int(0), 2).add(&mono(int(7), int(0), 1));
        assert_eq!(equal_leading(&a, &b), Ok(true));
        assert_eq!(equal_leading(&mono(int(1), int(1), 1), &mono(int(1), int(1), 2)), Ok(false));
        assert_eq!(equal_leading(&SingExpansion::zero(), &SingExpansion::zero()), Err(LogPowError::Empty));
        assert!(matches!(equal_leading(&u, &a), Err(LogPowError::NotExact(_))));
    }

    #[test]
    fn display_reads_naturally() {
        assert_eq!(mono(rat(1, 2), int(0), 2).to_string(), "1/2·(log t)^2");
        assert_eq!(mono(int(2), rat(1, 2), 1).to_string(), "2·t^(1/2)·log t");
    }
}
