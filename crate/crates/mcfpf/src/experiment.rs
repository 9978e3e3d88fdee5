//! Experiment runner: resolves a config into a run, writes the manifest,
//! diagnostics CSV, mesh CSVs and snapshots, and drives sweeps over
//! (epsilon, n, dt) with one output directory per point.
//!
//! All CSVs use '.' decimals, ',' separators, a header row and LF endings.
//! Reductions inside a run are sequential, so identical config + seed gives
//! identical bytes; concurrency exists only across sweep points.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{ExperimentConfig, WindowSpec};
use crate::diagnostics::DiagnosticsReport;
use crate::error::{Error, Result};
use crate::field::{plateau_window, Grid};
use crate::geodesic::ProfileParams;
use crate::solver::{
    self, initial_data::ProfileTable, ObserverConfig, RunOutput, StepperConfig,
};
use crate::sharp_interface::InterfaceMesh;

/// Run manifest: written with status "running" before the run and finalized
/// afterwards, so truncated runs are detectable.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub status: String,
    pub outputs: Vec<String>,
    pub wall_seconds: f64,
}

/// Products of one run.
pub struct ExperimentArtifacts {
    pub output: RunOutput,
    pub manifest_path: PathBuf,
    pub diagnostics_csv: PathBuf,
}

fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Frozen diagnostics CSV column order. Componentwise means occupy one
/// column per component (mean_0, mean_1, ...); inapplicable columns are
/// empty.
pub fn diagnostics_csv_header(num_components: usize) -> String {
    let mut cols = vec![
        "time".to_string(),
        "dirichlet".into(),
        "potential".into(),
        "total".into(),
        "dissipation_increment".into(),
        "dissipation_accum".into(),
        "equip_grad_sq".into(),
        "equip_potential".into(),
        "equip_geodesic".into(),
        "equip_localized_energy".into(),
        "equip_max_rel_gap".into(),
    ];
    for c in 0..num_components {
        cols.push(format!("mean_{c}"));
    }
    cols.extend(
        [
            "lambda_formula",
            "lambda_projection",
            "lambda_sq_accum",
            "forcing_work_accum",
            "forcing_l2",
            "forcing_dt_l2",
            "forcing_grad_l2",
        ]
        .map(String::from),
    );
    cols.join(",")
}

fn diagnostics_csv_row(r: &DiagnosticsReport) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut cols = vec![
        r.time.to_string(),
        r.energy.dirichlet.to_string(),
        r.energy.potential.to_string(),
        r.energy.total.to_string(),
        r.dissipation_increment.to_string(),
        r.dissipation_accum.to_string(),
        r.equipartition.grad_sq.to_string(),
        r.equipartition.potential_twice.to_string(),
        r.equipartition.geodesic.to_string(),
        r.equipartition.localized_energy.to_string(),
        r.equipartition.max_rel_gap.to_string(),
    ];
    for m in &r.volume_means {
        cols.push(m.to_string());
    }
    cols.push(opt(r.lambda.map(|l| l.0)));
    cols.push(opt(r.lambda.map(|l| l.1)));
    cols.push(r.lambda_sq_accum.to_string());
    cols.push(opt(r.forcing_work_accum));
    cols.push(opt(r.forcing_norms.map(|f| f.l2)));
    cols.push(opt(r.forcing_norms.map(|f| f.dt_l2)));
    cols.push(opt(r.forcing_norms.map(|f| f.grad_l2)));
    cols.join(",")
}

/// Writes the diagnostics series; returns the path.
pub fn write_diagnostics_csv(
    dir: &Path,
    reports: &[DiagnosticsReport],
    num_components: usize,
) -> Result<PathBuf> {
    let path = dir.join("diagnostics.csv");
    let mut out = String::new();
    out.push_str(&diagnostics_csv_header(num_components));
    out.push('\n');
    for r in reports {
        out.push_str(&diagnostics_csv_row(r));
        out.push('\n');
    }
    fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Mesh dump: x,y of the element midpoint, phase pair, normal, length.
pub fn write_mesh_csv(path: &Path, mesh: &InterfaceMesh) -> Result<()> {
    let mut out = String::from("x,y,pair_i,pair_j,nx,ny,length\n");
    for e in &mesh.elements {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            e.midpoint[0], e.midpoint[1], e.pair.0, e.pair.1, e.normal[0], e.normal[1], e.measure
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn resolve_window(spec: &Option<WindowSpec>, grid: &Grid) -> Option<Vec<f64>> {
    spec.as_ref()
        .map(|w| plateau_window(grid, &w.center, w.radius, w.smoothness))
}

/// Executes one run described by `cfg` into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentArtifacts> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let manifest_path = out_dir.join("manifest.json");
    let mut manifest = RunManifest {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: "running".into(),
        outputs: Vec::new(),
        wall_seconds: 0.0,
    };
    write_manifest(&manifest_path, &manifest)?;
    let started = Instant::now();

    let finish_failed = |mut manifest: RunManifest, started: Instant, err: Error| -> Error {
        manifest.status = format!("failed: {err}");
        manifest.wall_seconds = started.elapsed().as_secs_f64();
        let _ = write_manifest(&manifest_path, &manifest);
        err
    };

    let result = (|| -> Result<ExperimentArtifacts> {
        let pot = cfg.potential.build()?;
        let grid = cfg.grid.build()?;
        let geometry = cfg.geometry.build()?;
        let profile_params = ProfileParams {
            half_width: cfg.profile_half_width,
            samples: cfg.profile_samples,
            ..ProfileParams::default()
        };
        let profiles = ProfileTable::for_geometry(&geometry, pot.as_ref(), &profile_params)?;
        let initial = solver::prepare_initial_data(
            &geometry,
            pot.as_ref(),
            &profiles,
            &grid,
            cfg.epsilon,
        )?;
        let dynamics = cfg.dynamics()?;
        let stepper_cfg = StepperConfig::new(cfg.scheme, cfg.dt);
        let obs = ObserverConfig {
            stride: cfg.observers.stride,
            record_meshes: cfg.observers.meshes && grid.dim() <= 2,
            window: resolve_window(&cfg.window, &grid),
            snapshots: Some((out_dir.to_path_buf(), cfg.observers.snapshot_stride.unwrap_or(usize::MAX))),
        };
        let output = solver::run(pot.as_ref(), initial, &dynamics, &stepper_cfg, cfg.t_end, &obs)
            .map_err(|abort| Error::from(*abort))?;

        let diagnostics_csv =
            write_diagnostics_csv(out_dir, &output.trajectory.reports, pot.dim())?;
        let mut outputs = vec![diagnostics_csv.display().to_string()];
        for (k, (_t, mesh)) in output.trajectory.meshes.iter().enumerate() {
            let path = out_dir.join(format!("mesh_{k:06}.csv"));
            write_mesh_csv(&path, mesh)?;
            outputs.push(path.display().to_string());
        }
        // Final snapshot always.
        let final_snap = out_dir.join("final.bin");
        crate::field::snapshot::save_snapshot(&output.final_state, &final_snap)?;
        outputs.push(final_snap.display().to_string());
        for p in &output.trajectory.snapshot_paths {
            outputs.push(p.display().to_string());
        }
        Ok(ExperimentArtifacts {
            output,
            manifest_path: manifest_path.clone(),
            diagnostics_csv,
        })
    })();

    match result {
        Ok(artifacts) => {
            manifest.status = "completed".into();
            manifest.wall_seconds = started.elapsed().as_secs_f64();
            manifest.outputs = vec![artifacts.diagnostics_csv.display().to_string()];
            for p in fs::read_dir(out_dir).map_err(|e| Error::io(out_dir, e))? {
                let p = p.map_err(|e| Error::io(out_dir, e))?.path();
                if p != manifest_path {
                    manifest.outputs.push(p.display().to_string());
                }
            }
            manifest.outputs.sort();
            manifest.outputs.dedup();
            write_manifest(&manifest_path, &manifest)?;
            Ok(artifacts)
        }
        Err(e) => Err(finish_failed(manifest, started, e)),
    }
}

/// One row of the sweep aggregate.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub epsilon: f64,
    pub n: usize,
    pub dt: f64,
    pub status: String,
    pub energy_final: Option<f64>,
    pub dissipation_total: Option<f64>,
    pub residual: Option<f64>,
    pub mean_drift: Option<f64>,
    pub lambda_sq_integral: Option<f64>,
    pub wall_seconds: f64,
}

/// Sweep summary plus the aggregate CSV path.
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    pub aggregate_csv: PathBuf,
    pub any_failed: bool,
}

/// Frozen aggregate CSV columns.
pub const SWEEP_CSV_HEADER: &str =
    "epsilon,n,dt,status,energy_final,dissipation_total,residual,mean_drift,lambda_sq_integral,wall_seconds";

/// Runs the cartesian sweep with at most `threads` concurrent runs, one
/// subdirectory per point. Individual failures are recorded and the sweep
/// continues.
pub fn run_sweep(cfg: &ExperimentConfig, out_root: &Path, threads: usize) -> Result<SweepSummary> {
    cfg.validate()?;
    let points = cfg.sweep_points()?;
    fs::create_dir_all(out_root).map_err(|e| Error::io(out_root, e))?;
    let jobs: Vec<(usize, (f64, usize, f64))> = points.into_iter().enumerate().collect();
    let results: std::sync::Mutex<Vec<(usize, SweepRow)>> =
        std::sync::Mutex::new(Vec::with_capacity(jobs.len()));
    let queue = std::sync::Mutex::new(std::collections::VecDeque::from(jobs));
    let worker_count = threads.max(1);

    std::thread::scope(|scope| {
        for _ in 0..worker_count {
            scope.spawn(|| loop {
                let job = queue.lock().unwrap().pop_front();
                let Some((idx, (eps, n, dt))) = job else { break };
                let started = Instant::now();
                let mut point_cfg = cfg.clone();
                point_cfg.epsilon = eps;
                point_cfg.grid.n = n;
                point_cfg.dt = dt;
                point_cfg.sweep = None;
                let dir = out_root.join(format!("run_eps{eps:e}_n{n}_dt{dt:e}"));
                let row = match run_experiment(&point_cfg, &dir) {
                    Ok(artifacts) => {
                        let reports = &artifacts.output.trajectory.reports;
                        let first = reports.first();
                        let last = reports.last();
                        let energy_final = last.map(|r| r.energy.total);
                        let dissipation_total = last.map(|r| r.dissipation_accum);
                        let residual =
                            crate::diagnostics::dissipation_residual(reports).ok();
                        let mean_drift = match (first, last) {
                            (Some(a), Some(b)) => {
                                Some((b.volume_means[0] - a.volume_means[0]).abs())
                            }
                            _ => None,
                        };
                        SweepRow {
                            epsilon: eps,
                            n,
                            dt,
                            status: "completed".into(),
                            energy_final,
                            dissipation_total,
                            residual,
                            mean_drift,
                            lambda_sq_integral: last.map(|r| r.lambda_sq_accum),
                            wall_seconds: started.elapsed().as_secs_f64(),
                        }
                    }
                    Err(e) => SweepRow {
                        epsilon: eps,
                        n,
                        dt,
                        status: format!("failed: {e}"),
                        energy_final: None,
                        dissipation_total: None,
                        residual: None,
                        mean_drift: None,
                        lambda_sq_integral: None,
                        wall_seconds: started.elapsed().as_secs_f64(),
                    },
                };
                results.lock().unwrap().push((idx, row));
            });
        }
    });

    let mut rows = results.into_inner().unwrap();
    rows.sort_by_key(|(idx, _)| *idx);
    let rows: Vec<SweepRow> = rows.into_iter().map(|(_, r)| r).collect();
    let any_failed = rows.iter().any(|r| r.status != "completed");

    let aggregate_csv = out_root.join("sweep.csv");
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.epsilon,
            r.n,
            r.dt,
            r.status.replace(',', ";"),
            opt(r.energy_final),
            opt(r.dissipation_total),
            opt(r.residual),
            opt(r.mean_drift),
            opt(r.lambda_sq_integral),
            r.wall_seconds
        ));
    }
    fs::write(&aggregate_csv, out).map_err(|e| Error::io(&aggregate_csv, e))?;
    Ok(SweepSummary { rows, aggregate_csv, any_failed })
}
