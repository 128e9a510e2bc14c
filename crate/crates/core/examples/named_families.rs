//! Leading terms of the named nested-integral families.
//!
//! `cargo run --example named_families`

use singulog::nested::{eval_I42, eval_J, eval_K42, eval_L41, eval_prop44, Prop44Variant};
use singulog::rational::{int, rat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("J(α, j): iterated dρ/ρ chain with innermost (t + ρ)^α");
    for alpha in [rat(-1, 2), rat(-3, 2), rat(-5, 2), int(-1)] {
        for j in 1..=3 {
            let e = eval_J(&alpha, j)?;
            println!("  α = {alpha:>4}, j = {j}: {}", e.leading().expect("singular"));
        }
    }
    println!("K42(-1, 1) = {}", eval_K42(&int(-1), 1)?);
    for n in 0..=2 {
        println!("I42({n}, 2) leading {}", eval_I42(n, 2)?.leading().expect("singular"));
    }
    println!("L41(2, 1) = {}", eval_L41(2, &int(1))?);
    println!("K(1, 1) = {}", eval_prop44(1, 1, Prop44Variant::K)?);
    println!("J(1, 1) = {}", eval_prop44(1, 1, Prop44Variant::J)?);
    Ok(())
}
