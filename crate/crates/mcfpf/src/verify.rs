//! Named verification recipes behind `mcfpf verify <suite>`: end-to-end
//! benchmark runs with every tolerance pinned in code. Each recipe prints
//! one measured-vs-expected line per criterion through [`SuiteReport`].
//!
//! Suites: geodesic, dissipation, circle, equipartition, weakidentity,
//! volume, forced, herring.

use crate::diagnostics::{
    self, dissipation_residual, equipartition_report, forced_dissipation_slack,
    weak_identity_residual, PairingScheme,
};
use crate::error::{Error, Result};
use crate::field::spectral::Spectral;
use crate::field::{plateau_vector_field, plateau_window, Grid, PhaseField};
use crate::geodesic::{surface_tension_matrix, GeodesicParams, ProfileParams};
use crate::numerics::linear_fit;
use crate::potential::{DoubleWell, Potential, TripleWell, UnitWell01};
use crate::sharp_interface::{
    convergence_monitor, extract_partition, interface_mesh, junction_angles, radius_estimate,
};
use crate::solver::{
    initial_data::ProfileTable, prepare_initial_data, run, Disk, Dynamics, Forcing, Geometry,
    ObserverConfig, Scheme, Stepper, StepperConfig,
};

/// One verified criterion.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Human-readable target, e.g. "|x - 2/3| < 1e-3".
    pub requirement: String,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, requirement: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), measured, requirement: requirement.into(), pass }
    }
}

/// All checks of one suite.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// One line per criterion: name, measured value, requirement, verdict.
    pub fn print(&self) {
        for c in &self.checks {
            println!(
                "[{}] {} :: measured = {:.6e}, requires {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.requirement
            );
        }
    }
}

/// Known suite names, in the order the spec lists them.
pub const SUITES: [&str; 8] = [
    "dissipation",
    "equipartition",
    "circle",
    "herring",
    "volume",
    "forced",
    "weakidentity",
    "geodesic",
];

/// Runs one named suite.
pub fn run_suite(name: &str) -> Result<SuiteReport> {
    match name {
        "geodesic" => geodesic_suite(),
        "dissipation" => dissipation_suite(),
        "circle" => circle_suite(),
        "equipartition" => equipartition_suite(),
        "weakidentity" => weak_identity_suite(),
        "volume" => volume_suite(),
        "forced" => forced_suite(),
        "herring" => herring_suite(),
        other => Err(Error::Config(format!(
            "unknown verify suite '{other}'; expected one of {SUITES:?}"
        ))),
    }
}

/// Surface tensions: double_well sigma = 2 sqrt(2)/3, unit_well01 sigma = 1,
/// triple_well symmetric, triangle inequality.
pub fn geodesic_suite() -> Result<SuiteReport> {
    let params = GeodesicParams::default();
    let mut checks = Vec::new();

    let dw = surface_tension_matrix(&DoubleWell::new(), &params)?;
    let sigma_dw_exact = 2.0 * std::f64::consts::SQRT_2 / 3.0;
    let err = (dw.get(0, 1) - sigma_dw_exact).abs();
    checks.push(Check::new(
        "double_well sigma = 2*sqrt(2)/3",
        dw.get(0, 1),
        format!("|sigma - {sigma_dw_exact:.6}| < 1e-3"),
        err < 1e-3,
    ));

    let uw = surface_tension_matrix(&UnitWell01::new(), &params)?;
    checks.push(Check::new(
        "unit_well01 sigma = 1",
        uw.get(0, 1),
        "|sigma - 1| < 1e-3",
        (uw.get(0, 1) - 1.0).abs() < 1e-3,
    ));

    let tw_params = GeodesicParams { nodes: 65, ..params };
    let tw = surface_tension_matrix(&TripleWell::new(), &tw_params)?;
    let offs = [tw.get(0, 1), tw.get(0, 2), tw.get(1, 2)];
    let spread = offs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - offs.iter().cloned().fold(f64::INFINITY, f64::min);
    checks.push(Check::new(
        "triple_well off-diagonals equal",
        spread,
        "max - min < 1e-3",
        spread < 1e-3,
    ));
    let defect = tw.triangle_defect().max(dw.triangle_defect()).max(uw.triangle_defect());
    checks.push(Check::new(
        "triangle inequality",
        defect,
        "defect <= 1e-9",
        defect <= 1e-9,
    ));
    Ok(SuiteReport { suite: "geodesic".into(), checks })
}

/// Shrinking-circle benchmark run: double_well circle of radius 0.3 in the
/// unit box. Returns the run output with meshes and a radius series.
struct CircleRun {
    reports: Vec<diagnostics::DiagnosticsReport>,
    meshes: Vec<(f64, crate::sharp_interface::InterfaceMesh)>,
    radii: Vec<(f64, f64)>,
}

fn shrinking_circle_run(
    n: usize,
    epsilon: f64,
    dt: f64,
    t_end: f64,
    observations: usize,
    with_meshes: bool,
) -> Result<CircleRun> {
    let pot = DoubleWell::new();
    let grid = Grid::new(2, n, 1.0)?;
    let geom = Geometry::Circle { center: vec![0.5, 0.5], radius: 0.3, inside: 1, outside: 0 };
    let profiles = ProfileTable::for_geometry(&geom, &pot, &ProfileParams::default())?;
    let initial = prepare_initial_data(&geom, &pot, &profiles, &grid, epsilon)?;
    let n_steps = (t_end / dt).round() as usize;
    let obs = ObserverConfig {
        stride: Some((n_steps / observations).max(1)),
        record_meshes: with_meshes,
        window: None,
        snapshots: None,
    };
    let out = run(&pot, initial, &Dynamics::Plain, &StepperConfig::new(Scheme::SemiImplicit, dt), t_end, &obs)
        .map_err(|a| Error::from(*a))?;
    // Radius series needs the fields; recompute from meshes is not possible,
    // so extract radii by re-running the partition on snapshots is avoided:
    // instead we reconstruct radii from the recorded mesh lengths
    // (R = length / 2 pi), falling back to the final state's partition.
    let mut radii = Vec::new();
    if with_meshes {
        for (t, mesh) in &out.trajectory.meshes {
            radii.push((*t, mesh.total_measure() / (2.0 * std::f64::consts::PI)));
        }
    }
    let part = extract_partition(&pot, &out.final_state);
    let _ = radius_estimate(&part, 1)?;
    Ok(CircleRun { reports: out.trajectory.reports, meshes: out.trajectory.meshes, radii })
}

/// Energy-dissipation identity on the pinned shrinking-circle run, plus the
/// minimizing-movements a-priori estimate.
pub fn dissipation_suite() -> Result<SuiteReport> {
    let mut checks = Vec::new();

    // Criterion: n = 256, eps = 0.015, semi-implicit, dt = eps^2/10,
    // t_end = 0.02; relative residual < 1e-2, halving dt gains >= 1.7x.
    let eps = 0.015;
    let dt = eps * eps / 10.0;
    let run1 = shrinking_circle_run(256, eps, dt, 0.02, 10, false)?;
    let e0 = run1.reports[0].energy.total;
    let res1 = dissipation_residual(&run1.reports)?.abs() / e0;
    checks.push(Check::new(
        "energy-dissipation residual (dt = eps^2/10)",
        res1,
        "|E(T) + D - E(0)| / E(0) < 1e-2",
        res1 < 1e-2,
    ));
    let run2 = shrinking_circle_run(256, eps, 0.5 * dt, 0.02, 10, false)?;
    let res2 = dissipation_residual(&run2.reports)?.abs() / run2.reports[0].energy.total;
    let ratio = res1 / res2.max(1e-300);
    checks.push(Check::new(
        "residual halves with dt",
        ratio,
        "residual(dt) / residual(dt/2) >= 1.7",
        ratio >= 1.7,
    ));

    // Minimizing movements: E nonincreasing over 50 steps, exactly.
    let pot = UnitWell01::new();
    let grid = Grid::new(1, 128, 1.0)?;
    let geom = Geometry::Stripe { axis: 0, width: 0.5, inside: 1, outside: 0 };
    let profiles = ProfileTable::for_geometry(&geom, &pot, &ProfileParams::default())?;
    let mut state = prepare_initial_data(&geom, &pot, &profiles, &grid, 0.05)?;
    let cfg = StepperConfig::new(Scheme::MinimizingMovement, 2e-4);
    let stepper = Stepper::new(&pot, &grid, cfg);
    let mut worst_increase = f64::NEG_INFINITY;
    let mut energy_prev = diagnostics::energy(&pot, &state, None, stepper.spectral())?.total;
    for _ in 0..50 {
        let (next, _) = stepper.step(&state, &Dynamics::Plain)?;
        let energy_next = diagnostics::energy(&pot, &next, None, stepper.spectral())?.total;
        worst_increase = worst_increase.max(energy_next - energy_prev);
        energy_prev = energy_next;
        state = next;
    }
    checks.push(Check::new(
        "minimizing movements: E nonincreasing over 50 steps",
        worst_increase,
        "max energy increase <= 0 (exact)",
        worst_increase <= 0.0,
    ));

    // Richardson: (MM(dt) - u)/dt matches the explicit right-hand side to
    // first order in dt.
    let vals: Vec<f64> = (0..grid.cells())
        .map(|i| {
            let x = i as f64 * grid.spacing();
            0.5 + 0.3 * (2.0 * std::f64::consts::PI * x).sin()
        })
        .collect();
    let smooth = PhaseField::new(grid, vec![vals], 0.2, 0.0)?;
    let sp = Spectral::new(&grid);
    let lap = sp.laplacian(&smooth.components[0]);
    let mut dw_field = vec![0.0; grid.cells()];
    let mut g = [0.0];
    for (i, out) in dw_field.iter_mut().enumerate() {
        pot.gradient(&[smooth.components[0][i]], &mut g);
        *out = g[0];
    }
    let eps2 = smooth.epsilon * smooth.epsilon;
    let rhs: Vec<f64> = (0..grid.cells()).map(|i| lap[i] - dw_field[i] / eps2).collect();
    let velocity_err = |dt: f64| -> Result<f64> {
        let mut cfg = StepperConfig::new(Scheme::MinimizingMovement, dt);
        cfg.mm_inner_tol = 1e-11;
        let stepper = Stepper::new(&pot, &grid, cfg);
        let (next, _) = stepper.step(&smooth, &Dynamics::Plain)?;
        Ok((0..grid.cells())
            .map(|i| {
                let v = (next.components[0][i] - smooth.components[0][i]) / dt;
                (v - rhs[i]) * (v - rhs[i])
            })
            .sum::<f64>()
            .sqrt())
    };
    let e1 = velocity_err(2e-5)?;
    let e2 = velocity_err(1e-5)?;
    let mm_ratio = e1 / e2.max(1e-300);
    checks.push(Check::new(
        "minimizing movements matches explicit step to O(dt)",
        mm_ratio,
        "Richardson ratio in [1.5, 2.5]",
        (1.5..=2.5).contains(&mm_ratio),
    ));
    Ok(SuiteReport { suite: "dissipation".into(), checks })
}

/// Shrinking-circle law R(t)^2 = R(0)^2 - 2t and the convergence-assumption
/// monitor across the epsilon sweep.
pub fn circle_suite() -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let sigma = 2.0 * std::f64::consts::SQRT_2 / 3.0;
    let family = [(0.03f64, 128usize), (0.015, 256), (0.0075, 512)];
    let mut gaps = Vec::new();
    let mut slopes = Vec::new();
    let mut liminf_worst: f64 = f64::NEG_INFINITY;
    for &(eps, n) in &family {
        let dt = eps * eps / 10.0;
        let run = shrinking_circle_run(n, eps, dt, 0.02, 40, true)?;
        // Slope of R^2 vs t.
        let ts: Vec<f64> = run.radii.iter().map(|(t, _)| *t).collect();
        let r2: Vec<f64> = run.radii.iter().map(|(_, r)| r * r).collect();
        let (_, slope) = linear_fit(&ts, &r2);
        slopes.push(slope);
        // Time-integrated gap |int E_eps - sigma int 2 pi R| (trapezoid).
        let mut int_e = 0.0;
        let mut int_perim = 0.0;
        for k in 1..run.reports.len() {
            let dt_obs = run.reports[k].time - run.reports[k - 1].time;
            int_e += 0.5
                * dt_obs
                * (run.reports[k].energy.total + run.reports[k - 1].energy.total);
            int_perim += 0.5
                * dt_obs
                * (2.0 * std::f64::consts::PI * (run.radii[k].1 + run.radii[k - 1].1));
        }
        gaps.push((int_e - sigma * int_perim).abs());
        // Liminf flag through the monitor (mesh-based partition energy).
        let sm = surface_tension_matrix(&DoubleWell::new(), &GeodesicParams::default())?;
        let monitor = convergence_monitor(&run.reports, &run.meshes, &sm, 1e-6)?;
        for row in &monitor.rows {
            liminf_worst = liminf_worst.max(row.energy_sharp - row.energy_eps);
        }
    }
    checks.push(Check::new(
        "circle law slope at eps = 0.015 (n = 256)",
        slopes[1],
        "|slope + 2| <= 0.14 (7%)",
        (slopes[1] + 2.0).abs() <= 0.14,
    ));
    checks.push(Check::new(
        "circle law slope at eps = 0.0075 (n = 512)",
        slopes[2],
        "|slope + 2| <= 0.08 (4%)",
        (slopes[2] + 2.0).abs() <= 0.08,
    ));
    let monotone = gaps[0] > gaps[1] && gaps[1] > gaps[2];
    checks.push(Check::new(
        "integrated energy gap decreases across eps sweep",
        gaps[2],
        format!("monotone decrease: {:.3e} > {:.3e} > {:.3e}", gaps[0], gaps[1], gaps[2]),
        monotone,
    ));
    checks.push(Check::new(
        "partition energy below phase-field energy",
        liminf_worst,
        "E(partition) - E_eps <= 1e-6 at all times",
        liminf_worst <= 1e-6,
    ));
    Ok(SuiteReport { suite: "circle".into(), checks })
}

/// Equipartition on the 1D optimal profile with eps = 8h.
pub fn equipartition_suite() -> Result<SuiteReport> {
    let pot = UnitWell01::new();
    let grid = Grid::new(1, 256, 1.0)?;
    let eps = 8.0 * grid.spacing(); // box = 32 eps >= 20 eps
    let geom = Geometry::Stripe { axis: 0, width: 0.5, inside: 1, outside: 0 };
    let profiles = ProfileTable::for_geometry(&geom, &pot, &ProfileParams::default())?;
    let u = prepare_initial_data(&geom, &pot, &profiles, &grid, eps)?;
    let sp = Spectral::new(&grid);
    // Window over the single interface at x = 0.25.
    let window = plateau_window(&grid, &[0.25], 0.2, 0.5);
    let rep = equipartition_report(&pot, &u, Some(&window), &sp)?;
    let mut checks = vec![Check::new(
        "three equipartition measures agree",
        rep.max_rel_gap,
        "max pairwise relative gap < 1e-3",
        rep.max_rel_gap < 1e-3,
    )];
    checks.push(Check::new(
        "localized energy equals sigma",
        rep.localized_energy,
        "|E(window) - 1| < 1e-3",
        (rep.localized_energy - 1.0).abs() < 1e-3,
    ));
    Ok(SuiteReport { suite: "equipartition".into(), checks })
}

/// Tested weak identity: round-off-level for the explicit stepper (pairing
/// against the pre-step state, whose increment the step literally adds) and
/// first-order decay under dt halving for the semi-implicit stepper.
pub fn weak_identity_suite() -> Result<SuiteReport> {
    let pot = DoubleWell::new();
    let grid = Grid::new(2, 128, 1.0)?;
    let eps = 0.03;
    let geom = Geometry::Circle { center: vec![0.5, 0.5], radius: 0.3, inside: 1, outside: 0 };
    let profiles = ProfileTable::for_geometry(&geom, &pot, &ProfileParams::default())?;
    let initial = prepare_initial_data(&geom, &pot, &profiles, &grid, eps)?;
    // Window offset from the circle center: a centered window would cancel
    // both pairings by radial symmetry.
    let xi = plateau_vector_field(&grid, &[0.68, 0.52], 0.28, 0.6, &[0.6, 0.8]);
    let mut checks = Vec::new();

    // Explicit: 5 consecutive steps, each residual at round-off level.
    let cfg = StepperConfig::new(Scheme::Explicit, 1e-6);
    let stepper = Stepper::new(&pot, &grid, cfg);
    let mut state = initial.clone();
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let (next, _) = stepper.step(&state, &Dynamics::Plain)?;
        let check = weak_identity_residual(
            &pot,
            &state,
            &next,
            cfg.dt,
            &xi,
            PairingScheme::BeginState,
            None,
            stepper.spectral(),
        )?;
        worst = worst.max(check.normalized);
        state = next;
    }
    checks.push(Check::new(
        "explicit weak identity per step",
        worst,
        "normalized residual < 1e-8",
        worst < 1e-8,
    ));

    // Forced variant: the residual is exactly the forcing pairing, which the
    // check subtracts; the remainder stays at round-off.
    let forcing = Forcing::Constant { amplitude: vec![0.2] };
    let dynamics = Dynamics::Forced { forcing: forcing.clone() };
    let (next, _) = stepper.step(&initial, &dynamics)?;
    let f_field = forcing.field(&grid, initial.time);
    let check = weak_identity_residual(
        &pot,
        &initial,
        &next,
        cfg.dt,
        &xi,
        PairingScheme::BeginState,
        Some(&f_field),
        stepper.spectral(),
    )?;
    checks.push(Check::new(
        "forced weak identity per step",
        check.normalized,
        "normalized residual < 1e-8",
        check.normalized < 1e-8,
    ));

    // Semi-implicit: midpoint pairing, first-order decay under dt halving.
    let si_residual = |dt: f64| -> Result<f64> {
        let cfg = StepperConfig::new(Scheme::SemiImplicit, dt);
        let stepper = Stepper::new(&pot, &grid, cfg);
        let (next, _) = stepper.step(&initial, &Dynamics::Plain)?;
        Ok(weak_identity_residual(
            &pot,
            &initial,
            &next,
            dt,
            &xi,
            PairingScheme::Midpoint,
            None,
            stepper.spectral(),
        )?
        .normalized)
    };
    let r1 = si_residual(2e-5)?;
    let r2 = si_residual(1e-5)?;
    let ratio = r1 / r2.max(1e-300);
    checks.push(Check::new(
        "semi-implicit weak identity decays with dt",
        ratio,
        "residual(dt)/residual(dt/2) in [1.5, 2.8]",
        (1.5..=2.8).contains(&ratio),
    ));
    Ok(SuiteReport { suite: "weakidentity".into(), checks })
}

/// Volume-preserving variant: exact mean conservation, stationary circle,
/// two-circle coarsening with conserved total area, bounded multiplier.
pub fn volume_suite() -> Result<SuiteReport> {
    let pot = UnitWell01::new();
    let mut checks = Vec::new();

    // Mean drift over 1e4 steps on rough 1D data.
    let grid = Grid::new(1, 64, 1.0)?;
    let vals: Vec<f64> = (0..64)
        .map(|i| {
            let x = i as f64 / 64.0;
            0.45 + 0.4 * (2.0 * std::f64::consts::PI * x).sin()
                + 0.1 * (6.0 * std::f64::consts::PI * x).cos()
        })
        .collect();
    let u = PhaseField::new(grid, vec![vals], 0.05, 0.0)?;
    let mean0 = u.means()[0];
    let out = run(
        &pot,
        u,
        &Dynamics::VolumePreserving,
        &StepperConfig::new(Scheme::SemiImplicit, 1e-4),
        1.0, // 10^4 steps
        &ObserverConfig { stride: Some(1000), ..Default::default() },
    )
    .map_err(|a| Error::from(*a))?;
    let drift = (out.final_state.means()[0] - mean0).abs();
    checks.push(Check::new(
        "mean drift over 1e4 steps",
        drift,
        "|mean(T) - mean(0)| < 1e-12",
        drift < 1e-12,
    ));

    // Single circle stays put for t = 0.05.
    let grid = Grid::new(2, 256, 1.0)?;
    let eps = 8.0 * grid.spacing();
    let geom = Geometry::Circle { center: vec![0.5, 0.5], radius: 0.3, inside: 1, outside: 0 };
    let profiles = ProfileTable::for_geometry(&geom, &pot, &ProfileParams::default())?;
    let initial = prepare_initial_data(&geom, &pot, &profiles, &grid, eps)?;
    let r0 = radius_estimate(&extract_partition(&pot, &initial), 1)?;
    let out = run(
        &pot,
        initial,
        &Dynamics::VolumePreserving,
        &StepperConfig::new(Scheme::SemiImplicit, eps * eps / 10.0),
        0.05,
        &ObserverConfig { stride: Some(64), ..Default::default() },
    )
    .map_err(|a| Error::from(*a))?;
    let r1 = radius_estimate(&extract_partition(&pot, &out.final_state), 1)?;
    let rel_drift = (r1 - r0).abs() / r0;
    checks.push(Check::new(
        "single circle radius drift over t = 0.05",
        rel_drift,
        "|R(T) - R(0)| / R(0) < 0.02",
        rel_drift < 0.02,
    ));
    let last = out.trajectory.reports.last().unwrap();
    checks.push(Check::new(
        "Lagrange multiplier square-integral finite",
        last.lambda_sq_accum,
        "0 <= int lambda^2 dt < inf",
        last.lambda_sq_accum.is_finite() && last.lambda_sq_accum >= 0.0,
    ));

    // Two circles: the small one shrinks, the large one grows, total
    // phase-field area (integral of u) conserved to 1e-10 relative.
    let eps = 0.025;
    let centers = [[0.3, 0.3], [0.7, 0.7]];
    let geom = Geometry::Circles {
        disks: vec![
            Disk { center: centers[0].to_vec(), radius: 0.15 },
            Disk { center: centers[1].to_vec(), radius: 0.25 },
        ],
        inside: 1,
        outside: 0,
    };
    let profiles = ProfileTable::for_geometry(&geom, &pot, &ProfileParams::default())?;
    let initial = prepare_initial_data(&geom, &pot, &profiles, &grid, eps)?;
    let area0 = initial.means()[0];
    // The kappa: = 18 stabilization at dt = eps^2/10 slows the coarsening
    // rate roughly 3x; t = 0.02 leaves the radii changes well above the
    // cell-count quantization either way.
    let circle_radii = |state: &PhaseField| -> (f64, f64) {
        let part = extract_partition(&pot, state);
        let mut counts = [0usize; 2];
        for idx in 0..grid.cells() {
            if part.labels[idx] == 1 {
                let pnt = grid.point(idx);
                let d0 = grid.distance(&pnt[..2], &centers[0]);
                let d1 = grid.distance(&pnt[..2], &centers[1]);
                counts[usize::from(d1 < d0)] += 1;
            }
        }
        let h = grid.spacing();
        (
            (counts[0] as f64 * h * h / std::f64::consts::PI).sqrt(),
            (counts[1] as f64 * h * h / std::f64::consts::PI).sqrt(),
        )
    };
    let (small0, large0) = circle_radii(&initial);
    let out = run(
        &pot,
        initial,
        &Dynamics::VolumePreserving,
        &StepperConfig::new(Scheme::SemiImplicit, eps * eps / 10.0),
        0.02,
        &ObserverConfig { stride: Some(80), ..Default::default() },
    )
    .map_err(|a| Error::from(*a))?;
    let (small1, large1) = circle_radii(&out.final_state);
    let area1 = out.final_state.means()[0];
    let h = grid.spacing();
    checks.push(Check::new(
        "small circle shrinks",
        small0 - small1,
        format!("R_small drops by > 2h = {:.4}", 2.0 * h),
        small0 - small1 > 2.0 * h,
    ));
    checks.push(Check::new(
        "large circle grows",
        large1 - large0,
        format!("R_large grows by > h/2 = {:.4}", 0.5 * h),
        large1 - large0 > 0.5 * h,
    ));
    let area_drift = (area1 - area0).abs() / area0.abs().max(1e-300);
    checks.push(Check::new(
        "total phase area conserved",
        area_drift,
        "relative drift < 1e-10",
        area_drift < 1e-10,
    ));
    Ok(SuiteReport { suite: "volume".into(), checks })
}

/// Forced variant: zero force reproduces the plain dynamics bitwise; a
/// constant force translates a 1D interface at constant speed; the energy
/// inequality slack (against the exact work identity) stays above -1e-6.
pub fn forced_suite() -> Result<SuiteReport> {
    let mut checks = Vec::new();

    // Bitwise agreement under f = 0 for both steppers.
    let pot = DoubleWell::new();
    let grid = Grid::new(2, 64, 1.0)?;
    let geom = Geometry::Circle { center: vec![0.5, 0.5], radius: 0.3, inside: 1, outside: 0 };
    let profiles = ProfileTable::for_geometry(&geom, &pot, &ProfileParams::default())?;
    let initial = prepare_initial_data(&geom, &pot, &profiles, &grid, 0.0625)?;
    let zero = Dynamics::Forced { forcing: Forcing::Constant { amplitude: vec![0.0] } };
    let mut identical = true;
    for (scheme, dt) in [(Scheme::Explicit, 1e-6), (Scheme::SemiImplicit, 1e-4)] {
        let stepper = Stepper::new(&pot, &grid, StepperConfig::new(scheme, dt));
        let mut a = initial.clone();
        let mut b = initial.clone();
        for _ in 0..5 {
            a = stepper.step(&a, &Dynamics::Plain)?.0;
            b = stepper.step(&b, &zero)?.0;
        }
        identical &= a.components[0]
            .iter()
            .zip(&b.components[0])
            .all(|(x, y)| x.to_bits() == y.to_bits());
    }
    checks.push(Check::new(
        "zero force reproduces plain bitwise",
        if identical { 0.0 } else { 1.0 },
        "bitwise equal over 5 steps, both steppers",
        identical,
    ));

    // Constant force on a 1D stripe: both interfaces translate outward at
    // speed |f| (sigma = 1, wells one apart), measured from the mesh.
    // eps = 16h and a small dt keep both the finite-eps correction and the
    // stabilized scheme's O(dt kappa/eps^2) retardation at the percent level.
    let pot = UnitWell01::new();
    let grid = Grid::new(1, 256, 1.0)?;
    let eps = 16.0 * grid.spacing();
    let geom = Geometry::Stripe { axis: 0, width: 0.5, inside: 1, outside: 0 };
    let profiles = ProfileTable::for_geometry(&geom, &pot, &ProfileParams::default())?;
    let initial = prepare_initial_data(&geom, &pot, &profiles, &grid, eps)?;
    let force = 0.5;
    let dynamics = Dynamics::Forced { forcing: Forcing::Constant { amplitude: vec![force] } };
    let dt = 5e-6;
    let t_end = 0.1;
    let out = run(
        &pot,
        initial,
        &dynamics,
        &StepperConfig::new(Scheme::SemiImplicit, dt),
        t_end,
        &ObserverConfig { stride: Some(500), record_meshes: true, ..Default::default() },
    )
    .map_err(|a| Error::from(*a))?;
    // Track the left interface (pair (0,1) transition nearest x = 0.25).
    let mut positions = Vec::new();
    for (t, mesh) in &out.trajectory.meshes {
        let candidate = mesh
            .elements
            .iter()
            .map(|e| e.midpoint[0])
            .min_by(|a, b| {
                let da = crate::numerics::periodic_delta(*a, 0.25, 1.0).abs();
                let db = crate::numerics::periodic_delta(*b, 0.25, 1.0).abs();
                da.total_cmp(&db)
            });
        if let Some(x) = candidate {
            positions.push((*t, x));
        }
    }
    // Unwrap periodic jumps relative to the first position.
    let x0 = positions[0].1;
    let track: Vec<(f64, f64)> = positions
        .iter()
        .map(|(t, x)| (*t, x0 + crate::numerics::periodic_delta(*x, x0, 1.0)))
        .collect();
    let half = track.len() / 2;
    let fit = |slice: &[(f64, f64)]| -> f64 {
        let ts: Vec<f64> = slice.iter().map(|p| p.0).collect();
        let xs: Vec<f64> = slice.iter().map(|p| p.1).collect();
        linear_fit(&ts, &xs).1
    };
    let speed_a = fit(&track[..half]);
    let speed_b = fit(&track[half..]);
    let speed = fit(&track);
    // The left interface moves left: speed = -f * (alpha_1 - alpha_0) / sigma.
    checks.push(Check::new(
        "interface speed matches -f",
        speed,
        format!("|speed + {force}| < 0.1 * {force}"),
        (speed + force).abs() < 0.1 * force,
    ));
    let consistency = (speed_a - speed_b).abs() / speed.abs().max(1e-300);
    checks.push(Check::new(
        "translation speed constant in time",
        consistency,
        "first/second half speeds agree within 5%",
        consistency < 0.05,
    ));
    let slack = forced_dissipation_slack(&out.trajectory.reports)?;
    checks.push(Check::new(
        "forced dissipation inequality slack",
        slack,
        "E(0) + work - E(T) - D >= -1e-6",
        slack >= -1e-6,
    ));
    Ok(SuiteReport { suite: "forced".into(), checks })
}

/// Herring angle condition: the equal-tension tripod relaxed to t = 0.02
/// shows 120-degree junction angles.
pub fn herring_suite() -> Result<SuiteReport> {
    let pot = TripleWell::new();
    let grid = Grid::new(2, 256, 1.0)?;
    let eps = 0.02;
    let geom = Geometry::Tripod { wells: [0, 1, 2] };
    let profiles = ProfileTable::for_geometry(&geom, &pot, &ProfileParams::default())?;
    let initial = prepare_initial_data(&geom, &pot, &profiles, &grid, eps)?;
    let out = run(
        &pot,
        initial,
        &Dynamics::Plain,
        &StepperConfig::new(Scheme::SemiImplicit, eps * eps / 10.0),
        0.02,
        &ObserverConfig { stride: Some(100), ..Default::default() },
    )
    .map_err(|a| Error::from(*a))?;
    let mesh = interface_mesh(&pot, &out.final_state)?;
    let junctions = junction_angles(&mesh);
    let central = junctions
        .iter()
        .filter(|j| {
            let dx = crate::numerics::periodic_delta(j.position[0], 0.5, 1.0);
            let dy = crate::numerics::periodic_delta(j.position[1], 0.5, 1.0);
            (dx * dx + dy * dy).sqrt() < 0.1
        })
        .min_by(|a, b| {
            let da = crate::numerics::periodic_distance(&a.position, &[0.5, 0.5], 1.0);
            let db = crate::numerics::periodic_distance(&b.position, &[0.5, 0.5], 1.0);
            da.total_cmp(&db)
        })
        .ok_or_else(|| Error::Config("no central junction detected".into()))?;
    let mut checks = Vec::new();
    let worst = central
        .angles_deg
        .iter()
        .map(|a| (a - 120.0).abs())
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::new(
        "junction angles near 120 degrees",
        worst,
        "each angle within 120 +/- 5",
        central.angles_deg.len() == 3 && worst <= 5.0,
    ));
    let sum: f64 = central.angles_deg.iter().sum();
    checks.push(Check::new(
        "junction angles sum to 360",
        sum,
        "sum within 360 +/- 2",
        (sum - 360.0).abs() <= 2.0,
    ));
    Ok(SuiteReport { suite: "herring".into(), checks })
}
