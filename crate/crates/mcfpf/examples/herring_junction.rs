//! Herring's angle condition: for the symmetric three-well potential all
//! surface tensions are equal, so the triple junction relaxes to three
//! 120-degree angles.
//!
//! ```
//! cargo run --release --example herring_junction
//! ```

use mcfpf::field::Grid;
use mcfpf::geodesic::ProfileParams;
use mcfpf::numerics::periodic_distance;
use mcfpf::potential::TripleWell;
use mcfpf::sharp_interface::{interface_mesh, junction_angles};
use mcfpf::solver::{
    initial_data::ProfileTable, prepare_initial_data, run, Dynamics, Geometry, ObserverConfig,
    Scheme, StepperConfig,
};

fn main() -> mcfpf::Result<()> {
    let pot = TripleWell::new();
    let grid = Grid::new(2, 256, 1.0)?;
    let eps = 0.02;
    let geom = Geometry::Tripod { wells: [0, 1, 2] };
    let profiles = ProfileTable::for_geometry(&geom, &pot, &ProfileParams::default())?;
    let initial = prepare_initial_data(&geom, &pot, &profiles, &grid, eps)?;
    println!("relaxing the tripod to t = 0.02 ...");
    let out = run(
        &pot,
        initial,
        &Dynamics::Plain,
        &StepperConfig::new(Scheme::SemiImplicit, eps * eps / 10.0),
        0.02,
        &ObserverConfig { stride: Some(125), ..Default::default() },
    )
    .map_err(|a| mcfpf::Error::from(*a))?;

    let mesh = interface_mesh(&pot, &out.final_state)?;
    println!(
        "mesh: {} elements, {} junctions detected",
        mesh.elements.len(),
        mesh.junctions.len()
    );
    for j in junction_angles(&mesh) {
        let angles: Vec<String> = j.angles_deg.iter().map(|a| format!("{a:.1}")).collect();
        let central = periodic_distance(&j.position, &[0.5, 0.5], 1.0) < 0.1;
        println!(
            "junction at ({:.3}, {:.3}){}: angles [{}]",
            j.position[0],
            j.position[1],
            if central { " [central]" } else { "" },
            angles.join(", ")
        );
    }
    Ok(())
}
