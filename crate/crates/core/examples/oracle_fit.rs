//! Numerical check of a symbolic expansion: sample the integral along a ray
//! towards t = 0, fit blind and guided, compare.
//!
//! `cargo run --release --example oracle_fit`

use singulog::nested::{eval_nested, IntegralSpec, Kernel};
use singulog::oracle::{verify, SampleRay, VerifyOptions};
use singulog::rational::rat;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // ∫_0^1 (t + r)^(-3/2) dr, leading -2·t^(-1/2).
    let spec = IntegralSpec::new(vec![0], Kernel::Power(rat(-3, 2)));
    let symbolic = eval_nested(&spec)?;
    println!("symbolic: {symbolic}");

    let opts = VerifyOptions { ray: SampleRay::geometric(std::f64::consts::FRAC_PI_2, 1e-2, 1e-5, 16)?, ..VerifyOptions::default() };
    let report = verify(&spec, &symbolic, &opts);
    if let Some(b) = &report.blind {
        println!("blind fit leading: t^{} (log t)^{}, coefficient {:.6}", b.exponent, b.logpow, b.coefficient);
    }
    for c in &report.criteria {
        println!("[{:?}] {}: {}", c.verdict, c.name, c.detail);
    }
    println!("verdict: {:?} in {:.2} s", report.verdict(), report.seconds);
    Ok(())
}
