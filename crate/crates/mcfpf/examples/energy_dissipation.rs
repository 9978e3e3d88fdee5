//! Energy-dissipation bookkeeping along a run:
//! E(T) + int eps |du/dt|^2 dx dt = E(0) up to first-order scheme error,
//! halving dt halves the residual.
//!
//! ```
//! cargo run --release --example energy_dissipation
//! ```

use mcfpf::diagnostics::dissipation_residual;
use mcfpf::field::Grid;
use mcfpf::geodesic::ProfileParams;
use mcfpf::potential::DoubleWell;
use mcfpf::solver::{
    initial_data::ProfileTable, prepare_initial_data, run, Dynamics, Geometry, ObserverConfig,
    Scheme, StepperConfig,
};

fn residual_for(dt: f64) -> mcfpf::Result<(f64, f64)> {
    let pot = DoubleWell::new();
    let grid = Grid::new(2, 128, 1.0)?;
    let eps = 0.03;
    let geom = Geometry::Circle { center: vec![0.5, 0.5], radius: 0.3, inside: 1, outside: 0 };
    let profiles = ProfileTable::for_geometry(&geom, &pot, &ProfileParams::default())?;
    let initial = prepare_initial_data(&geom, &pot, &profiles, &grid, eps)?;
    let out = run(
        &pot,
        initial,
        &Dynamics::Plain,
        &StepperConfig::new(Scheme::SemiImplicit, dt),
        0.02,
        &ObserverConfig { stride: Some(((0.02 / dt) as usize).max(1)), ..Default::default() },
    )
    .map_err(|a| mcfpf::Error::from(*a))?;
    let e0 = out.trajectory.reports[0].energy.total;
    Ok((dissipation_residual(&out.trajectory.reports)?, e0))
}

fn main() -> mcfpf::Result<()> {
    let eps: f64 = 0.03;
    let base_dt = eps * eps / 10.0;
    let mut prev: Option<f64> = None;
    for halvings in 0..3 {
        let dt = base_dt / f64::powi(2.0, halvings);
        let (residual, e0) = residual_for(dt)?;
        let rel = residual.abs() / e0;
        match prev {
            None => println!("dt = {dt:.3e}: |residual|/E0 = {rel:.4e}"),
            Some(p) => println!("dt = {dt:.3e}: |residual|/E0 = {rel:.4e}  (ratio {:.2})", p / rel),
        }
        prev = Some(rel);
    }
    Ok(())
}
