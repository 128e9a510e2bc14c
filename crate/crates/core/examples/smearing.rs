//! Piecewise log-power functions: Θ-smearing of unit-interval products,
//! the convolution operators, and a Monte Carlo cross-check.
//!
//! `cargo run --release --example smearing`

use singulog::formf::chain::ChainExpr;
use singulog::formf::{check_form_f, mult_conv, smear, theta_reduce, FormF};
use singulog::oracle::mc_theta;
use singulog::rational::int;
use singulog::SingExpansion;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let one = FormF::unit(SingExpansion::monomial(int(1), int(0), 0));
    println!("mult_conv(1)     = {}", mult_conv(&one)?);
    println!("theta_reduce(1)  = {}", theta_reduce(&one)?);

    for text in ["x*x", "x*x*x", "x*(1 + x)", "2*x*x"] {
        let p: ChainExpr = text.parse()?;
        let f = smear(&p)?;
        check_form_f(&f, false)?;
        println!("smear({p}) = {f}");
        for r0 in [0.05, 0.1, 0.5] {
            let (mean, se) = mc_theta(&p, r0, 200_000, 7)?;
            println!("  r0 = {r0}: exact {:.6}, Monte Carlo {mean:.6} ± {se:.1e}", f.eval(r0));
        }
    }
    Ok(())
}
