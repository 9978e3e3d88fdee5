//! Optimal 1D transition profiles q'' = dW(q) between wells, their
//! equipartition of energy, and the closed forms they reproduce.
//!
//! ```
//! cargo run --release --example transition_profiles
//! ```

use mcfpf::geodesic::{optimal_profile, ProfileParams};
use mcfpf::potential::{DoubleWell, UnitWell01};

fn main() -> mcfpf::Result<()> {
    let params = ProfileParams::default();

    // unit_well01: q(s) = 1 / (1 + e^{-6s}).
    let pot = UnitWell01::new();
    let prof = optimal_profile(&pot, 0, 1, &params)?;
    println!("unit_well01 profile vs logistic:");
    for s in [-0.5, -0.2, 0.0, 0.2, 0.5] {
        let q = prof.eval(s)[0];
        let exact = 1.0 / (1.0 + (-6.0 * s).exp());
        println!("  q({s:+.1}) = {q:.8}  (exact {exact:.8})");
    }
    println!("  max relative equipartition gap: {:.2e}", prof.equipartition_gap(&pot));

    // double_well: q(s) = tanh(s / sqrt(2)), odd around the midpoint.
    let pot = DoubleWell::new();
    let prof = optimal_profile(&pot, 0, 1, &params)?;
    println!("double_well profile vs tanh:");
    for s in [-1.0, 0.0, 1.0] {
        let q = prof.eval(s)[0];
        let exact = (s / std::f64::consts::SQRT_2).tanh();
        println!("  q({s:+.1}) = {q:+.8}  (exact {exact:+.8})");
    }
    println!("  max relative equipartition gap: {:.2e}", prof.equipartition_gap(&pot));
    Ok(())
}
