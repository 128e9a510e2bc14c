//! Quadrature rules and compensated summation.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// `P_n` from the Chebyshev-like initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

/// Nodes and weights of a composite rule: `panels` equal panels on
/// `[a, b]`, `order` Gauss points each.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(mid + 0.5 * h * x);
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

/// Neumaier's compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of complex values, componentwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Result of an adaptive one-dimensional rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
}

/// Tanh–sinh rule on `[a, b]`, halving the step until successive levels
/// agree to `tol` (relative) or `max_level` is reached. Endpoint
/// singularities of logarithmic or algebraic type are handled.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_level: u32) -> QuadEstimate {
    let r = 0.5 * (b - a);
    let tmax = 3.5;
    // Abscissas as distances to the nearer endpoint, to keep f finite near them.
    let eval = |t: f64| -> f64 {
        let u = 0.5 * PI * t.sinh();
        let ch = u.cosh();
        let w = 0.5 * PI * t.cosh() / (ch * ch);
        let dist = r / (u.exp() * ch); // r (1 − tanh u)
        if dist <= 0.0 || !w.is_finite() {
            return 0.0;
        }
        w * r * (f(a + dist) + f(b - dist))
    };
    let mut h = 1.0;
    let mut sum = KahanSum::default();
    sum.add(0.5 * PI * r * f(a + r));
    let mut k = 1;
    while (k as f64) * h <= tmax {
        sum.add(eval(k as f64 * h));
        k += 1;
    }
    let mut prev = h * sum.value();
    let mut err = f64::INFINITY;
    for _ in 1..=max_level {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= tmax {
            sum.add(eval(k as f64 * h));
            k += 2;
        }
        let cur = h * sum.value();
        err = (cur - prev).abs();
        prev = cur;
        if err <= tol * cur.abs().max(1e-300) {
            break;
        }
    }
    QuadEstimate { value: prev, error: err }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        for n in [4usize, 8, 12, 20] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-14);
            let deg = 2 * n - 1;
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            assert!((got - 2.0 / deg as f64).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn tanh_sinh_handles_endpoint_logs() {
        let e = tanh_sinh(|x| x.ln(), 0.0, 1.0, 1e-14, 10);
        assert!((e.value + 1.0).abs() < 1e-13, "{e:?}");
        let e = tanh_sinh(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12, 10);
        assert!((e.value - 2.0).abs() < 1e-10, "{e:?}");
        let e = tanh_sinh(|x| x * x.ln(), 0.0, 2.0, 1e-14, 10);
        assert!((e.value - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = KahanSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
