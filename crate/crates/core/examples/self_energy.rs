//! Collapsing a double integral over two proper times to a single weighted
//! integral.
//!
//! `cargo run --release --example self_energy`

use singulog::formf::self_energy_weight;
use singulog::rational::{int, rat};
use singulog::{LogPowTerm, SingExpansion};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fs = [
        ("1", SingExpansion::monomial(int(1), int(0), 0)),
        ("x^2", SingExpansion::monomial(int(1), int(2), 0)),
        ("x log x", SingExpansion::from_terms([LogPowTerm::exact(int(1), int(1), 1)])),
    ];
    for (name, f) in &fs {
        for k in [rat(1, 2), int(1), int(2)] {
            let r = self_energy_weight(f, &k)?;
            println!(
                "f = {name:8} k = {k:>3}: lhs {}  rhs {}  exact {}  numeric diff {:.1e}",
                r.lhs,
                r.rhs,
                r.exact_match(),
                r.numeric_difference()
            );
        }
    }
    Ok(())
}
