//! Order-one Weierstrass preparation of black-box analytic functions and
//! the gauge-quotiented gradient check.
//!
//! `cargo run --example weierstrass`

use singulog::prep::{gradient_check, prepare_grid, AnalyticSurface};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for s in [AnalyticSurface::toy_exponential(), AnalyticSurface::toy_linear(), AnalyticSurface::toy_shifted()] {
        let p = prepare_grid(&s, 0.2, 1e-13)?;
        let g = &p.grid[12];
        println!(
            "{:12} residual {:.1e}, min |B| {:.3}, C(q = {:.2}) = {:.6}",
            s.name, p.residual_grid, p.min_abs_b, g.q[0], g.c
        );
    }
    match AnalyticSurface::toy_critical() {
        Ok(_) => println!("critical surface unexpectedly accepted"),
        Err(e) => println!("critical surface rejected: {e}"),
    }

    // φ = a·q1 − c·q3 over three two-dimensional slots.
    let phi = |x: &[f64]| 1.5 * x[0] - 2.0 * x[4] + 0.25 * x[5];
    let expected = [1.5, 0.0, 0.0, 0.0, -2.0, 0.25];
    let shifted: Vec<f64> = expected.iter().map(|e| e + 0.7).collect();
    let at = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
    println!("{:?}", gradient_check(&phi, &at, &expected, 3, 1e-6));
    println!("{:?}", gradient_check(&phi, &at, &shifted, 3, 1e-6));
    Ok(())
}
