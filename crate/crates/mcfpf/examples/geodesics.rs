//! Surface tensions from geodesics in the degenerate metric 2 W(u) <.,.>.
//!
//! ```
//! cargo run --release --example geodesics
//! ```

use mcfpf::geodesic::{geodesic_distance, surface_tension_matrix, GeodesicParams};
use mcfpf::potential::{DoubleWell, Potential, TripleWell, UnitWell01};

fn main() -> mcfpf::Result<()> {
    let params = GeodesicParams::default();
    for pot in [
        Box::new(DoubleWell::new()) as Box<dyn Potential>,
        Box::new(UnitWell01::new()),
        Box::new(TripleWell::new()),
    ] {
        let sigma = surface_tension_matrix(pot.as_ref(), &params)?;
        println!("{}:", pot.name());
        for i in 0..sigma.phases() {
            let row: Vec<String> =
                (0..sigma.phases()).map(|j| format!("{:.6}", sigma.get(i, j))).collect();
            println!("  sigma[{i}] = [{}]", row.join(", "));
        }
        println!("  triangle defect = {:.2e}", sigma.triangle_defect());
    }

    // The double-well tension has the closed form 2 sqrt(2) / 3.
    let dw = DoubleWell::new();
    let curve = geodesic_distance(&dw, &[-1.0], &[1.0], &params)?;
    println!(
        "double_well geodesic: {} nodes, length {:.8} (exact {:.8})",
        curve.nodes.len(),
        curve.length,
        2.0 * std::f64::consts::SQRT_2 / 3.0
    );
    Ok(())
}
