//! Order-one Weierstrass preparation of a black-box analytic function and
//! the scenario runner that feeds the normalized variable into the nested
//! integral evaluators.
//!
//! For `Φ(q, ρ)` with `∂Φ/∂ρ ≠ 0` at the base point, [`weierstrass_prep`]
//! finds the root `ρ = R(q)` and the non-vanishing factor `B` with
//! `Φ(q, ρ) = B(q, ρ) (ρ − φ(q)/C(q))`, where `φ(q) = Φ(q, 0)` and
//! `C(q) = −B(q, 0)`. Everything is certified on a grid by explicit residuals.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::oracle::{CriterionResult, Verdict};

mod scenario;

pub use scenario::{
    difference_expansion, difference_numeric, prepare_grid, preset, preset_names, run_scenario, CrossCheck,
    Normalization, Reduction, Scenario, ScenarioReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrepError {
    #[error("|∂Φ/∂ρ| = {derivative:e} at the base point is below the floor {floor:e}")]
    Hypothesis { derivative: f64, floor: f64 },
    #[error("Newton iteration diverged at q = {q:?}; |Φ| trace {trace:?}")]
    NewtonDiverged { q: Vec<Complex64>, trace: Vec<f64> },
    #[error("min |B| = {min_abs_b:e} on the grid is below half the floor {floor:e}")]
    Vanishing { min_abs_b: f64, floor: f64 },
    #[error("root identity R = φ/C off by {error:e}")]
    Identity { error: f64 },
    #[error("{0}")]
    Scenario(String),
}

pub type SurfaceFn = Arc<dyn Fn(&[Complex64], Complex64) -> Complex64 + Send + Sync>;

/// `Φ(q, ρ)` given only as an evaluator, declared analytic near `(q̂, 0)`.
#[derive(Clone)]
pub struct AnalyticSurface {
    pub name: String,
    f: SurfaceFn,
    base: Vec<Complex64>,
    derivative_floor: f64,
    /// Radius of the circles used for Cauchy-integral derivatives.
    radius: f64,
}

impl std::fmt::Debug for AnalyticSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnalyticSurface")
            .field("name", &self.name)
            .field("base", &self.base)
            .field("derivative_floor", &self.derivative_floor)
            .finish()
    }
}

const CAUCHY_POINTS: usize = 32;
const DEFAULT_RADIUS: f64 = 0.05;

impl AnalyticSurface {
    /// Checks `|∂Φ/∂ρ(q̂, 0)| ≥ derivative_floor`.
    pub fn new(
        name: impl Into<String>,
        f: SurfaceFn,
        base: Vec<Complex64>,
        derivative_floor: f64,
    ) -> Result<Self, PrepError> {
        let s = AnalyticSurface { name: name.into(), f, base, derivative_floor, radius: DEFAULT_RADIUS };
        let d = s.d_rho(&s.base, Complex64::new(0.0, 0.0)).norm();
        if !(d >= derivative_floor) {
            return Err(PrepError::Hypothesis { derivative: d, floor: derivative_floor });
        }
        Ok(s)
    }

    pub fn base(&self) -> &[Complex64] {
        &self.base
    }

    pub fn derivative_floor(&self) -> f64 {
        self.derivative_floor
    }

    pub fn eval(&self, q: &[Complex64], rho: Complex64) -> Complex64 {
        (self.f)(q, rho)
    }

    /// `φ(q) = Φ(q, 0)`.
    pub fn phi(&self, q: &[Complex64]) -> Complex64 {
        self.eval(q, Complex64::new(0.0, 0.0))
    }

    /// `∂Φ/∂ρ` from the Cauchy integral on a small circle.
    pub fn d_rho(&self, q: &[Complex64], rho: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..CAUCHY_POINTS {
            let w = Complex64::from_polar(self.radius, 2.0 * PI * k as f64 / CAUCHY_POINTS as f64);
            acc += self.eval(q, rho + w) / w;
        }
        acc / CAUCHY_POINTS as f64
    }

    /// `Φ = e^ρ (ρ − q)`: root `q`, `B = e^ρ`, `C = −1`.
    pub fn toy_exponential() -> Self {
        let f: SurfaceFn = Arc::new(|q, rho| rho.exp() * (rho - q[0]));
        AnalyticSurface::new("exponential", f, vec![Complex64::new(0.0, 0.0)], 0.5).expect("valid toy")
    }

    /// `Φ = (ρ − q)(2 + ρ)`: root `q`, `B = 2 + ρ`, `C = −2`.
    pub fn toy_linear() -> Self {
        let f: SurfaceFn = Arc::new(|q, rho| (rho - q[0]) * (2.0 + rho));
        AnalyticSurface::new("linear", f, vec![Complex64::new(0.0, 0.0)], 0.5).expect("valid toy")
    }

    /// `Φ = (2 + ρ)(ρ + q)`: root `−q`, `φ = 2q`, `C = −2`.
    pub fn toy_shifted() -> Self {
        let f: SurfaceFn = Arc::new(|q, rho| (2.0 + rho) * (rho + q[0]));
        AnalyticSurface::new("shifted", f, vec![Complex64::new(0.0, 0.0)], 0.5).expect("valid toy")
    }

    /// `Φ = ρ² − q`, whose ρ-derivative vanishes at the base point.
    pub fn toy_critical() -> Result<Self, PrepError> {
        let f: SurfaceFn = Arc::new(|q, rho| rho * rho - q[0]);
        AnalyticSurface::new("critical", f, vec![Complex64::new(0.0, 0.0)], 0.5)
    }
}

/// Controls for [`weierstrass_prep_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct PrepOptions {
    pub max_iter: usize,
    /// Multiplies the first Newton step.
    pub first_step_scale: f64,
    /// Values of `ρ` at which the factorization residual is measured, in
    /// addition to `0` and the root.
    pub probes: Vec<Complex64>,
}

impl Default for PrepOptions {
    fn default() -> Self {
        let p = 0.1;
        PrepOptions {
            max_iter: 60,
            first_step_scale: 1.0,
            probes: vec![
                Complex64::new(p, 0.0),
                Complex64::new(-p, 0.0),
                Complex64::new(0.0, p),
                Complex64::new(0.0, -p),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub q: Vec<Complex64>,
    pub root: Complex64,
    pub phi: Complex64,
    pub b0: Complex64,
    pub c: Complex64,
    pub newton_trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PrepResult {
    pub surface: AnalyticSurface,
    pub grid: Vec<GridPoint>,
    /// `max |Φ − B (ρ − φ/C)|` over grid points and probes.
    pub residual_grid: f64,
    pub min_abs_b: f64,
    /// `max |R − φ/C|`.
    pub identity_error: f64,
    pub tol: f64,
}

impl PrepResult {
    pub fn root(&self, q: &[Complex64]) -> Result<Complex64, PrepError> {
        newton_root(&self.surface, q, self.tol, &PrepOptions::default()).map(|(r, _)| r)
    }

    pub fn b(&self, q: &[Complex64], rho: Complex64) -> Result<Complex64, PrepError> {
        Ok(factor_b(&self.surface, q, self.root(q)?, rho))
    }

    pub fn c(&self, q: &[Complex64]) -> Result<Complex64, PrepError> {
        Ok(-self.b(q, Complex64::new(0.0, 0.0))?)
    }
}

fn newton_root(
    s: &AnalyticSurface,
    q: &[Complex64],
    tol: f64,
    opts: &PrepOptions,
) -> Result<(Complex64, Vec<f64>), PrepError> {
    let mut rho = Complex64::new(0.0, 0.0);
    let mut trace = Vec::new();
    for k in 0..opts.max_iter {
        let v = s.eval(q, rho);
        trace.push(v.norm());
        if v.norm() < tol {
            return Ok((rho, trace));
        }
        let d = s.d_rho(q, rho);
        let mut step = v / d;
        if k == 0 {
            step *= opts.first_step_scale;
        }
        rho -= step;
        if !rho.is_finite() {
            break;
        }
    }
    Err(PrepError::NewtonDiverged { q: q.to_vec(), trace })
}

/// `Φ(q, ρ)/(ρ − R)`, switching to the Cauchy integral near the root.
fn factor_b(s: &AnalyticSurface, q: &[Complex64], root: Complex64, rho: Complex64) -> Complex64 {
    if (rho - root).norm() >= 0.5 * s.radius {
        return s.eval(q, rho) / (rho - root);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..CAUCHY_POINTS {
        let w = Complex64::from_polar(s.radius, 2.0 * PI * k as f64 / CAUCHY_POINTS as f64);
        let z = root + w;
        acc += s.eval(q, z) / w * w / (z - rho);
    }
    acc / CAUCHY_POINTS as f64
}

pub fn weierstrass_prep(surface: &AnalyticSurface, q_grid: &[Vec<Complex64>], tol: f64) -> Result<PrepResult, PrepError> {
    weierstrass_prep_with(surface, q_grid, tol, &PrepOptions::default())
}

pub fn weierstrass_prep_with(
    surface: &AnalyticSurface,
    q_grid: &[Vec<Complex64>],
    tol: f64,
    opts: &PrepOptions,
) -> Result<PrepResult, PrepError> {
    let zero = Complex64::new(0.0, 0.0);
    let mut grid = Vec::with_capacity(q_grid.len());
    let (mut residual, mut min_b, mut ident) = (0.0f64, f64::INFINITY, 0.0f64);
    for q in q_grid {
        let (root, trace) = newton_root(surface, q, tol, opts)?;
        let phi = surface.phi(q);
        let b0 = factor_b(surface, q, root, zero);
        let c = -b0;
        ident = ident.max((root - phi / c).norm());
        let mut probes = vec![zero, root];
        probes.extend(opts.probes.iter().copied());
        for rho in probes {
            let b = factor_b(surface, q, root, rho);
            min_b = min_b.min(b.norm());
            residual = residual.max((surface.eval(q, rho) - b * (rho - phi / c)).norm());
        }
        grid.push(GridPoint { q: q.clone(), root, phi, b0, c, newton_trace: trace });
    }
    if min_b < 0.5 * surface.derivative_floor {
        return Err(PrepError::Vanishing { min_abs_b: min_b, floor: surface.derivative_floor });
    }
    if ident > tol.max(1e-300) * 1e3 {
        return Err(PrepError::Identity { error: ident });
    }
    Ok(PrepResult { surface: surface.clone(), grid, residual_grid: residual, min_abs_b: min_b, identity_error: ident, tol })
}

/// `n × n` grid of complex offsets `a + ib`, `a, b ∈ [−w, w]`, applied to the
/// first coordinate of `center`.
pub fn complex_grid(center: &[Complex64], half_width: f64, n: usize) -> Vec<Vec<Complex64>> {
    let step = if n > 1 { 2.0 * half_width / (n - 1) as f64 } else { 0.0 };
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut q = center.to_vec();
            q[0] += Complex64::new(-half_width + i as f64 * step, -half_width + j as f64 * step);
            out.push(q);
        }
    }
    out
}

/// Compares the finite-difference gradient of `phi` at `point` with
/// `expected`, both read as `slots` blocks of equal size, after removing the
/// common translation of all blocks. Passes when the cosine similarity
/// exceeds `1 − tol`.
pub fn gradient_check(
    phi: &dyn Fn(&[f64]) -> f64,
    point: &[f64],
    expected: &[f64],
    slots: usize,
    tol: f64,
) -> CriterionResult {
    let name = "gradient direction";
    if slots == 0 || point.len() != expected.len() || point.len() % slots != 0 {
        return CriterionResult::new(name, Verdict::Inconclusive, "shape mismatch");
    }
    let grad = |h: f64| -> Vec<f64> {
        (0..point.len())
            .map(|i| {
                let mut a = point.to_vec();
                let mut b = point.to_vec();
                a[i] += h;
                b[i] -= h;
                (phi(&a) - phi(&b)) / (2.0 * h)
            })
            .collect()
    };
    let h = 1e-4;
    let (g1, g2) = (grad(h), grad(h / 2.0));
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a - b).collect();
    if norm(&diff) > 1e-6 * norm(&g2).max(1e-300) {
        return CriterionResult::new(
            name,
            Verdict::Inconclusive,
            format!("finite differences disagree by {:.1e}", norm(&diff)),
        );
    }
    let (g, e) = (gauge_quotient(&g2, slots), gauge_quotient(expected, slots));
    let (ng, ne) = (norm(&g), norm(&e));
    if ng == 0.0 || ne == 0.0 {
        return CriterionResult::new(name, Verdict::Inconclusive, "zero gradient after gauge quotient");
    }
    let cos = g.iter().zip(&e).map(|(a, b)| a * b).sum::<f64>() / (ng * ne);
    let v = if cos > 1.0 - tol { Verdict::Pass } else { Verdict::Fail };
    CriterionResult::new(name, v, format!("cosine {cos:.12}, need > {}", 1.0 - tol))
}

/// Subtracts the mean over slots, componentwise.
fn gauge_quotient(v: &[f64], slots: usize) -> Vec<f64> {
    let d = v.len() / slots;
    let mut out = v.to_vec();
    for i in 0..d {
        let mean = (0..slots).map(|s| v[s * d + i]).sum::<f64>() / slots as f64;
        for s in 0..slots {
            out[s * d + i] -= mean;
        }
    }
    out
}
