//! General nested integrals with a log kernel and the bounds their
//! expansions satisfy.
//!
//! `cargo run --example structure_bounds`

use singulog::nested::{eval_prop43, eval_prop45, IntegralSpec, Kernel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for exps in [vec![0, 0], vec![1, 0], vec![2, 1, 0]] {
        let spec = IntegralSpec::new(exps.clone(), Kernel::Log);
        let (e, b) = eval_prop43(&spec)?;
        println!("measure {exps:?}: {e}");
        println!("  exponent >= {}, log power <= {}, admitted: {}", b.min_t_exponent, b.max_log_power, b.admits(&e));
    }
    // Outer (log r)^1 with the first exponent below the second.
    let spec = IntegralSpec::new(vec![0, 1], Kernel::Log).with_outer_log(1);
    let (e, b) = eval_prop45(&spec)?;
    println!("outer log, measure [0, 1]: {e}");
    println!("  exponent >= {}, log power <= {}, admitted: {}", b.min_t_exponent, b.max_log_power, b.admits(&e));
    Ok(())
}
