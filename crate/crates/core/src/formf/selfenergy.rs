use num_traits::Signed;

use super::{eval_local, rescale, value_at, FormFError};
use crate::logpow::{Coefficient, SingExpansion};
use crate::quad::tanh_sinh;
use crate::rational::{fmt_rational, int, is_nonneg_integer, to_f64, Rational};

/// Both sides of
/// `∫_0^1 dλ ∫_0^λ dλ′ f((λ−λ′)k) = ∫_0^1 dh f(hk)(1−h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfEnergyReport {
    pub lhs: Coefficient,
    pub rhs: Coefficient,
    pub lhs_numeric: f64,
    pub rhs_numeric: f64,
}

impl SelfEnergyReport {
    /// Both sides exact and equal as rationals.
    pub fn exact_match(&self) -> bool {
        matches!((self.lhs.as_exact(), self.rhs.as_exact()), (Some(a), Some(b)) if a == b)
    }

    pub fn symbolic_difference(&self) -> f64 {
        self.lhs.value().unwrap_or(f64::NAN) - self.rhs.value().unwrap_or(f64::NAN)
    }

    pub fn numeric_difference(&self) -> f64 {
        self.lhs_numeric - self.rhs_numeric
    }
}

/// Evaluates both sides for `f(x) = Σ c x^n (log x)^m`: symbolically, the
/// left side as a double antiderivative and the right as a weighted single
/// integral; numerically, by nested and single tanh–sinh rules.
pub fn self_energy_weight(f: &SingExpansion, k: &Rational) -> Result<SelfEnergyReport, FormFError> {
    if !k.is_positive() {
        return Err(FormFError::NonPositiveWeight(fmt_rational(k)));
    }
    if let Some(t) = f.terms().iter().find(|t| !is_nonneg_integer(&t.exponent)) {
        return Err(FormFError::Invalid(format!("power {} is not a nonnegative integer", t.exponent)));
    }
    let invalid = |e: crate::logpow::LogPowError| FormFError::Invalid(e.to_string());
    let g = rescale(f, &k.recip());
    let definite = |anti: &SingExpansion| value_at(anti, &int(1)).add(&value_at(anti, &int(0)).neg());

    let weighted = g.sub(&g.mul_monomial(&int(1), 0));
    let rhs = definite(&weighted.antiderivative().map_err(invalid)?);
    let inner = g.antiderivative().map_err(invalid)?;
    let lhs = definite(&inner.antiderivative().map_err(invalid)?);

    let kf = to_f64(k);
    let fx = |x: f64| eval_local(f, x);
    let rhs_numeric = tanh_sinh(|h| fx(h * kf) * (1.0 - h), 0.0, 1.0, 1e-14, 9).value;
    let lhs_numeric = tanh_sinh(
        |lam| tanh_sinh(|lp| fx((lam - lp) * kf), 0.0, lam, 1e-14, 9).value,
        0.0,
        1.0,
        1e-14,
        9,
    )
    .value;
    Ok(SelfEnergyReport { lhs, rhs, lhs_numeric, rhs_numeric })
}
