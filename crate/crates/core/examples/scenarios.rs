//! The bundled scenarios: a nested reduction in t, the normalization
//! t = −φ/C, and the leading behavior in φ.
//!
//! `cargo run --release --example scenarios`

use singulog::prep::{preset, preset_names, run_scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in preset_names() {
        let r = run_scenario(&preset(name)?)?;
        println!("{name}: {}", r.in_phi.display_in("φ"));
        for c in &r.criteria {
            println!("  [{:?}] {}: {}", c.verdict, c.name, c.detail);
        }
    }
    Ok(())
}
