//! Time integration of the Allen-Cahn dynamics
//!
//! ```text
//!   du/dt = lap(u) - dW(u)/eps^2 + (forcing term)/eps
//! ```
//!
//! in three variants (plain, forced, volume-preserving) by three steppers:
//! explicit Euler, a semi-implicit spectral solve with stabilization
//! kappa = C_tilde, and De Giorgi's minimizing movements.

pub mod initial_data;

pub use initial_data::{prepare_initial_data, Disk, Geometry, ProfileTable};

use std::path::PathBuf;

use crate::diagnostics::{
    self, DiagnosticsReport, EnergyBreakdown, ForcingNorms,
};
use crate::error::{Error, Result};
use crate::field::snapshot::save_snapshot;
use crate::field::spectral::Spectral;
use crate::field::{integrate, Grid, PhaseField};
use crate::numerics::pairwise_sum_with;
use crate::potential::{stiffness_bound, Potential};
use crate::sharp_interface::{interface_mesh, InterfaceMesh};

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Explicit,
    SemiImplicit,
    MinimizingMovement,
}

/// Stepper parameters. The explicit scheme requires
/// dt <= min(h^2/(2d), eps^2/(2 * stiffness)) with the stiffness sampled
/// from the Hessian of W near the wells; note the spectral Laplacian's own
/// stability limit 2 h^2 / (d pi^2) is tighter than h^2/(2d), so explicit
/// runs should stay well below the gate.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct StepperConfig {
    pub scheme: Scheme,
    pub dt: f64,
    #[serde(default = "default_mm_tol")]
    pub mm_inner_tol: f64,
    #[serde(default = "default_mm_cap")]
    pub mm_iter_cap: usize,
}

fn default_mm_tol() -> f64 {
    1e-7
}

fn default_mm_cap() -> usize {
    100_000
}

impl StepperConfig {
    pub fn new(scheme: Scheme, dt: f64) -> Self {
        assert!(dt > 0.0, "dt must be positive");
        Self { scheme, dt, mm_inner_tol: default_mm_tol(), mm_iter_cap: default_mm_cap() }
    }
}

/// Time-dependent external force f(t, x) in state space.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Forcing {
    /// f = amplitude, constant in time and space.
    Constant { amplitude: Vec<f64> },
    /// f = amplitude * cos(2 pi modes.x / L - omega t), one spatial mode.
    PlaneWave { amplitude: Vec<f64>, modes: Vec<i64>, omega: f64 },
}

impl Forcing {
    /// Number of state components the force addresses.
    pub fn num_components(&self) -> usize {
        match self {
            Forcing::Constant { amplitude } => amplitude.len(),
            Forcing::PlaneWave { amplitude, .. } => amplitude.len(),
        }
    }

    fn phase(&self, grid: &Grid, idx: usize, t: f64) -> f64 {
        match self {
            Forcing::Constant { .. } => 0.0,
            Forcing::PlaneWave { modes, omega, .. } => {
                let p = grid.point(idx);
                let mut arg = -omega * t;
                for (a, &m) in modes.iter().enumerate().take(grid.dim()) {
                    arg += 2.0 * std::f64::consts::PI * m as f64 * p[a] / grid.box_len();
                }
                arg
            }
        }
    }

    /// Samples f(t, .) on the grid, component-major.
    pub fn field(&self, grid: &Grid, t: f64) -> Vec<Vec<f64>> {
        let amp = match self {
            Forcing::Constant { amplitude } => amplitude,
            Forcing::PlaneWave { amplitude, .. } => amplitude,
        };
        amp.iter()
            .map(|&a| {
                (0..grid.cells())
                    .map(|idx| match self {
                        Forcing::Constant { .. } => a,
                        Forcing::PlaneWave { .. } => a * self.phase(grid, idx, t).cos(),
                    })
                    .collect()
            })
            .collect()
    }

    /// Samples df/dt(t, .) on the grid.
    pub fn dt_field(&self, grid: &Grid, t: f64) -> Vec<Vec<f64>> {
        match self {
            Forcing::Constant { amplitude } => {
                amplitude.iter().map(|_| vec![0.0; grid.cells()]).collect()
            }
            Forcing::PlaneWave { amplitude, omega, .. } => amplitude
                .iter()
                .map(|&a| {
                    (0..grid.cells())
                        .map(|idx| a * omega * self.phase(grid, idx, t).sin())
                        .collect()
                })
                .collect(),
        }
    }

    /// Instantaneous norms used by the forced-variant hypotheses.
    pub fn norms(&self, grid: &Grid, t: f64, sp: &Spectral) -> ForcingNorms {
        let f = self.field(grid, t);
        let df = self.dt_field(grid, t);
        let sq = |fields: &[Vec<f64>]| -> f64 {
            fields
                .iter()
                .map(|c| {
                    integrate(grid, &c.iter().map(|x| x * x).collect::<Vec<_>>(), None).unwrap()
                })
                .sum()
        };
        let mut grad_l2 = 0.0;
        for comp in &f {
            for axis in 0..grid.dim() {
                let d = sp.gradient_axis(comp, axis);
                grad_l2 +=
                    integrate(grid, &d.iter().map(|x| x * x).collect::<Vec<_>>(), None).unwrap();
            }
        }
        ForcingNorms { l2: sq(&f), dt_l2: sq(&df), grad_l2 }
    }
}

/// Dynamics variant of the run.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dynamics {
    Plain,
    Forced { forcing: Forcing },
    /// Scalar order parameter with the mean enforced exactly each step.
    VolumePreserving,
}

/// Per-step record: Lagrange multipliers (volume-preserving), the step's
/// dissipation integral and the forcing work increment.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepInfo {
    /// (formula, projection): the average of W'(u)/eps, and the multiplier
    /// actually applied so the discrete mean is conserved exactly.
    pub lambda: Option<(f64, f64)>,
    /// eps * dt * |(u+ - u)/dt|^2 integrated over the torus.
    pub dissipation: f64,
    /// integral f(t + dt/2) . (u+ - u) dx (forced runs only).
    pub forcing_work: f64,
}

/// A stepper bound to one potential and grid (owns the FFT plans).
pub struct Stepper<'a> {
    pot: &'a dyn Potential,
    spectral: Spectral,
    cfg: StepperConfig,
    stiffness: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(pot: &'a dyn Potential, grid: &Grid, cfg: StepperConfig) -> Self {
        Self { pot, spectral: Spectral::new(grid), cfg, stiffness: stiffness_bound(pot) }
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    /// Explicit CFL gate min(h^2/(2d), eps^2/(2 stiffness)).
    pub fn cfl_limit(&self, u: &PhaseField) -> f64 {
        let h = u.grid.spacing();
        let diffusion = h * h / (2.0 * u.grid.dim() as f64);
        let reaction = u.epsilon * u.epsilon / (2.0 * self.stiffness.max(1e-300));
        diffusion.min(reaction)
    }

    fn check_components(&self, u: &PhaseField, dynamics: &Dynamics) -> Result<()> {
        if u.num_components() != self.pot.dim() {
            return Err(Error::ShapeMismatch {
                got: u.num_components(),
                expected: self.pot.dim(),
            });
        }
        if matches!(dynamics, Dynamics::VolumePreserving) && u.num_components() != 1 {
            return Err(Error::RequiresScalar(u.num_components()));
        }
        if let Dynamics::Forced { forcing } = dynamics {
            if forcing.num_components() != u.num_components() {
                return Err(Error::ShapeMismatch {
                    got: forcing.num_components(),
                    expected: u.num_components(),
                });
            }
        }
        Ok(())
    }

    /// W'(u) per component, evaluated cellwise.
    fn grad_w(&self, u: &PhaseField) -> Vec<Vec<f64>> {
        let cells = u.grid.cells();
        let ncomp = u.num_components();
        let mut out = vec![vec![0.0; cells]; ncomp];
        let mut state = vec![0.0; ncomp];
        let mut g = vec![0.0; ncomp];
        for idx in 0..cells {
            u.state_at(idx, &mut state);
            self.pot.gradient(&state, &mut g);
            for c in 0..ncomp {
                out[c][idx] = g[c];
            }
        }
        out
    }

    fn mean(values: &[f64]) -> f64 {
        pairwise_sum_with(values.len(), &|i| values[i]) / values.len() as f64
    }

    /// One explicit Euler step. Forced runs add dt f/eps; volume-preserving
    /// runs add the constant that restores the discrete mean exactly.
    pub fn step_explicit(
        &self,
        u: &PhaseField,
        dynamics: &Dynamics,
    ) -> Result<(PhaseField, StepInfo)> {
        self.check_components(u, dynamics)?;
        let dt = self.cfg.dt;
        let limit = self.cfl_limit(u);
        if dt > limit {
            return Err(Error::CflViolation { dt, limit });
        }
        let eps = u.epsilon;
        let inv_eps2 = 1.0 / (eps * eps);
        let dw = self.grad_w(u);
        let mut info = StepInfo::default();
        let mut components = Vec::with_capacity(u.num_components());
        match dynamics {
            Dynamics::Plain => {
                for (c, comp) in u.components.iter().enumerate() {
                    let lap = self.spectral.laplacian(comp);
                    components.push(
                        (0..comp.len())
                            .map(|i| comp[i] + dt * (lap[i] - inv_eps2 * dw[c][i]))
                            .collect(),
                    );
                }
            }
            Dynamics::Forced { forcing } => {
                let f = forcing.field(&u.grid, u.time);
                for (c, comp) in u.components.iter().enumerate() {
                    let lap = self.spectral.laplacian(comp);
                    components.push(
                        (0..comp.len())
                            .map(|i| {
                                comp[i] + dt * (lap[i] - inv_eps2 * dw[c][i] + f[c][i] / eps)
                            })
                            .collect(),
                    );
                }
            }
            Dynamics::VolumePreserving => {
                let comp = &u.components[0];
                let lap = self.spectral.laplacian(comp);
                let mut tentative: Vec<f64> = (0..comp.len())
                    .map(|i| comp[i] + dt * (lap[i] - inv_eps2 * dw[0][i]))
                    .collect();
                let target = Self::mean(comp);
                let shift = target - Self::mean(&tentative);
                for v in &mut tentative {
                    *v += shift;
                }
                let lambda_projection = shift * eps / dt;
                let lambda_formula = Self::mean(&dw[0]) / eps;
                info.lambda = Some((lambda_formula, lambda_projection));
                components.push(tentative);
            }
        }
        self.finish_step(u, dynamics, components, info)
    }

    /// One semi-implicit step: the Laplacian and a stabilizing kappa/eps^2
    /// term implicit (spectral solve), the remaining nonlinearity explicit.
    /// kappa is the potential's perturbation Hessian bound, making the
    /// implicit part dominate the convex part of W.
    pub fn step_semi_implicit(
        &self,
        u: &PhaseField,
        dynamics: &Dynamics,
    ) -> Result<(PhaseField, StepInfo)> {
        self.check_components(u, dynamics)?;
        let dt = self.cfg.dt;
        let eps = u.epsilon;
        let inv_eps2 = 1.0 / (eps * eps);
        let kappa = self.pot.perturbation_hessian_bound().max(0.0);
        let shift = kappa * inv_eps2;
        let dw = self.grad_w(u);
        let mut info = StepInfo::default();
        let mut components = Vec::with_capacity(u.num_components());
        let forcing_field = match dynamics {
            Dynamics::Forced { forcing } => Some(forcing.field(&u.grid, u.time)),
            _ => None,
        };
        for (c, comp) in u.components.iter().enumerate() {
            let rhs: Vec<f64> = (0..comp.len())
                .map(|i| {
                    let mut r = comp[i] + dt * (shift * comp[i] - inv_eps2 * dw[c][i]);
                    if let Some(f) = &forcing_field {
                        r += dt * f[c][i] / eps;
                    }
                    r
                })
                .collect();
            components.push(self.spectral.helmholtz_solve(&rhs, dt, shift));
        }
        if matches!(dynamics, Dynamics::VolumePreserving) {
            let target = Self::mean(&u.components[0]);
            let drift = target - Self::mean(&components[0]);
            for v in &mut components[0] {
                *v += drift;
            }
            // The applied constant passes through the (1 + dt kappa/eps^2)
            // factor of the zero mode.
            let lambda_projection = drift * (1.0 + dt * shift) * eps / dt;
            let lambda_formula = Self::mean(&dw[0]) / eps;
            info.lambda = Some((lambda_formula, lambda_projection));
        }
        self.finish_step(u, dynamics, components, info)
    }

    /// One minimizing-movement step: descends
    /// J(v) = E(v) + eps/(2 dt) |v - u|^2 by gradient descent with
    /// backtracking, accepting only strict decrease, so E(u+) <= E(u) holds
    /// exactly by comparison with v = u. Plain dynamics only.
    pub fn step_minimizing_movement(
        &self,
        u: &PhaseField,
        dynamics: &Dynamics,
    ) -> Result<(PhaseField, StepInfo)> {
        if !matches!(dynamics, Dynamics::Plain) {
            return Err(Error::MinimizingMovementVariant);
        }
        self.check_components(u, dynamics)?;
        let dt = self.cfg.dt;
        let eps = u.epsilon;
        let grid = u.grid;
        let cells = grid.cells();
        let ncomp = u.num_components();
        let cellvol = grid.cell_volume();
        let penalty_weight = 0.5 * eps / dt;

        let objective = |v: &PhaseField| -> f64 {
            let e = diagnostics::energy(self.pot, v, None, &self.spectral).unwrap().total;
            let pen = pairwise_sum_with(cells * ncomp, &|k| {
                let (c, i) = (k / cells, k % cells);
                let d = v.components[c][i] - u.components[c][i];
                d * d
            });
            e + penalty_weight * cellvol * pen
        };

        // L2 gradient of J: -eps div(grad v) + dW(v)/eps + (eps/dt)(v - u).
        // div(grad) rather than the full Laplacian keeps the gradient exactly
        // adjoint to the energy quadrature.
        let gradient = |v: &PhaseField| -> Vec<Vec<f64>> {
            let dw = self.grad_w(v);
            let mut out = Vec::with_capacity(ncomp);
            for c in 0..ncomp {
                let lap = self.spectral.laplacian_div_grad(&v.components[c]);
                out.push(
                    (0..cells)
                        .map(|i| {
                            -eps * lap[i]
                                + dw[c][i] / eps
                                + eps / dt * (v.components[c][i] - u.components[c][i])
                        })
                        .collect(),
                );
            }
            out
        };

        let mut v = u.clone();
        let mut j_current = objective(&v);
        let mut step = dt / eps; // natural scale of the metric term's inverse
        let mut iterations = 0;
        loop {
            let g = gradient(&v);
            let gnorm_sq =
                cellvol * pairwise_sum_with(cells * ncomp, &|k| g[k / cells][k % cells].powi(2));
            let gnorm = gnorm_sq.sqrt();
            if gnorm <= self.cfg.mm_inner_tol {
                break;
            }
            if iterations >= self.cfg.mm_iter_cap {
                return Err(Error::MinimizingMovementStalled {
                    iterations,
                    grad_norm: gnorm,
                    tol: self.cfg.mm_inner_tol,
                    best: v.components,
                });
            }
            iterations += 1;
            let mut accepted = false;
            for _ in 0..60 {
                let mut trial = v.clone();
                for c in 0..ncomp {
                    for i in 0..cells {
                        trial.components[c][i] -= step * g[c][i];
                    }
                }
                let j_trial = objective(&trial);
                if j_trial < j_current {
                    v = trial;
                    j_current = j_trial;
                    step *= 1.5;
                    accepted = true;
                    break;
                }
                step *= 0.5;
                if step < 1e-20 {
                    break;
                }
            }
            if !accepted {
                // No strict decrease found at any step size: the objective
                // has reached its floating-point floor. Return the best
                // iterate; only the iteration cap is an error.
                break;
            }
        }
        let info = StepInfo::default();
        self.finish_step(u, dynamics, v.components, info)
    }

    /// Dispatch on the configured scheme.
    pub fn step(&self, u: &PhaseField, dynamics: &Dynamics) -> Result<(PhaseField, StepInfo)> {
        match self.cfg.scheme {
            Scheme::Explicit => self.step_explicit(u, dynamics),
            Scheme::SemiImplicit => self.step_semi_implicit(u, dynamics),
            Scheme::MinimizingMovement => self.step_minimizing_movement(u, dynamics),
        }
    }

    fn finish_step(
        &self,
        u: &PhaseField,
        dynamics: &Dynamics,
        components: Vec<Vec<f64>>,
        mut info: StepInfo,
    ) -> Result<(PhaseField, StepInfo)> {
        let dt = self.cfg.dt;
        let next = PhaseField::new(u.grid, components, u.epsilon, u.time + dt)?;
        let cells = u.grid.cells();
        let ncomp = u.num_components();
        // Backward-difference dissipation: eps dt |(u+ - u)/dt|^2 summed.
        let sum_sq = pairwise_sum_with(cells * ncomp, &|k| {
            let (c, i) = (k / cells, k % cells);
            let d = next.components[c][i] - u.components[c][i];
            d * d
        });
        info.dissipation = u.epsilon / dt * u.grid.cell_volume() * sum_sq;
        if let Dynamics::Forced { forcing } = dynamics {
            let f = forcing.field(&u.grid, u.time + 0.5 * dt);
            info.forcing_work = u.grid.cell_volume()
                * pairwise_sum_with(cells * ncomp, &|k| {
                    let (c, i) = (k / cells, k % cells);
                    f[c][i] * (next.components[c][i] - u.components[c][i])
                });
        }
        Ok((next, info))
    }
}

/// The Lagrange multiplier of the volume-preserving flow: the cell average
/// of W'(u)/eps. The second expression (through the Laplacian) agrees to
/// round-off; see [`diagnostics::lambda_consistency`].
pub fn lagrange_multiplier(pot: &dyn Potential, u: &PhaseField, sp: &Spectral) -> Result<f64> {
    let (formula, defect) = diagnostics::lambda_consistency(pot, u, sp)?;
    debug_assert!(defect <= 1e-10 * formula.abs().max(1.0), "lambda defect {defect}");
    Ok(formula)
}

/// Observation configuration for [`run`].
#[derive(Debug, Clone, Default)]
pub struct ObserverConfig {
    /// Steps between diagnostics observations; `None` picks
    /// max(1, round(0.1 eps^2 / dt)) so diagnostics stay cheaper than stepping.
    pub stride: Option<usize>,
    /// Extract interface meshes at observations (d <= 2 only).
    pub record_meshes: bool,
    /// Optional [0,1] window for the localized equipartition measures.
    pub window: Option<Vec<f64>>,
    /// Snapshot output: directory and stride in observations.
    pub snapshots: Option<(PathBuf, usize)>,
}

/// Recorded trajectory: one diagnostics row per observation plus optional
/// interface meshes at the same times.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub reports: Vec<DiagnosticsReport>,
    pub meshes: Vec<(f64, InterfaceMesh)>,
    pub snapshot_paths: Vec<PathBuf>,
}

/// Final state plus the recorded trajectory.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: PhaseField,
    pub trajectory: Trajectory,
}

/// A run abort carrying the partial trajectory.
#[derive(Debug, thiserror::Error)]
#[error("run aborted at step {step} (t = {time}): {source}")]
pub struct RunAbort {
    pub step: usize,
    pub time: f64,
    pub source: Box<Error>,
    pub partial: Box<RunOutput>,
}

impl From<RunAbort> for Error {
    fn from(a: RunAbort) -> Self {
        Error::RunAborted { step: a.step, time: a.time, source: a.source }
    }
}

/// Advances `initial` to `t_end`, recording diagnostics at the configured
/// stride. The volume-preserving variant conserves the discrete mean exactly
/// at every step. Stepper errors abort with the partial trajectory preserved.
pub fn run(
    pot: &dyn Potential,
    initial: PhaseField,
    dynamics: &Dynamics,
    cfg: &StepperConfig,
    t_end: f64,
    obs: &ObserverConfig,
) -> std::result::Result<RunOutput, Box<RunAbort>> {
    assert!(t_end >= initial.time, "t_end must not precede the initial time");
    let stepper = Stepper::new(pot, &initial.grid, *cfg);
    let n_steps = ((t_end - initial.time) / cfg.dt).round() as usize;
    let stride = obs.stride.unwrap_or_else(|| {
        ((0.1 * initial.epsilon * initial.epsilon / cfg.dt).round() as usize).max(1)
    });

    let mut trajectory = Trajectory::default();
    let mut dissipation_accum = 0.0;
    let mut lambda_sq_accum = 0.0;
    let mut forcing_work_accum = match dynamics {
        Dynamics::Forced { .. } => Some(0.0),
        _ => None,
    };
    let mut last_lambda = None;
    let mut dissipation_last_obs = 0.0;
    let mut obs_counter = 0usize;

    let observe = |state: &PhaseField,
                   trajectory: &mut Trajectory,
                   dissipation_accum: f64,
                   dissipation_increment: f64,
                   lambda: Option<(f64, f64)>,
                   lambda_sq_accum: f64,
                   forcing_work_accum: Option<f64>,
                   obs_counter: &mut usize|
     -> Result<()> {
        let sp = stepper.spectral();
        let energy = diagnostics::energy(pot, state, obs.window.as_deref(), sp)?;
        let equipartition =
            diagnostics::equipartition_report(pot, state, obs.window.as_deref(), sp)?;
        let forcing_norms = match dynamics {
            Dynamics::Forced { forcing } => Some(forcing.norms(&state.grid, state.time, sp)),
            _ => None,
        };
        trajectory.reports.push(DiagnosticsReport {
            time: state.time,
            energy,
            dissipation_increment,
            dissipation_accum,
            equipartition,
            volume_means: state.means(),
            lambda,
            lambda_sq_accum,
            forcing_work_accum,
            forcing_norms,
        });
        if obs.record_meshes && state.grid.dim() <= 2 {
            trajectory.meshes.push((state.time, interface_mesh(pot, state)?));
        }
        if let Some((dir, snap_stride)) = &obs.snapshots {
            if obs_counter.is_multiple_of((*snap_stride).max(1)) {
                let path = dir.join(format!("snap_{:08}.bin", trajectory.reports.len() - 1));
                save_snapshot(state, &path)?;
                trajectory.snapshot_paths.push(path);
            }
        }
        *obs_counter += 1;
        Ok(())
    };

    let mut state = initial;
    let abort = |step: usize,
                 time: f64,
                 e: Error,
                 state: PhaseField,
                 trajectory: Trajectory|
     -> Box<RunAbort> {
        Box::new(RunAbort {
            step,
            time,
            source: Box::new(e),
            partial: Box::new(RunOutput { final_state: state, trajectory }),
        })
    };

    if let Err(e) = observe(
        &state,
        &mut trajectory,
        0.0,
        0.0,
        None,
        0.0,
        forcing_work_accum,
        &mut obs_counter,
    ) {
        let t = state.time;
        return Err(abort(0, t, e, state, trajectory));
    }

    for step_idx in 1..=n_steps {
        let (next, info) = match stepper.step(&state, dynamics) {
            Ok(r) => r,
            Err(e) => {
                let t = state.time;
                return Err(abort(step_idx, t, e, state, trajectory));
            }
        };
        dissipation_accum += info.dissipation;
        dissipation_last_obs += info.dissipation;
        if let Some((_, proj)) = info.lambda {
            lambda_sq_accum += cfg.dt * proj * proj;
            last_lambda = info.lambda;
        }
        if let Some(acc) = forcing_work_accum.as_mut() {
            *acc += info.forcing_work;
        }
        state = next;
        if step_idx.is_multiple_of(stride) || step_idx == n_steps {
            if let Err(e) = observe(
                &state,
                &mut trajectory,
                dissipation_accum,
                dissipation_last_obs,
                last_lambda,
                lambda_sq_accum,
                forcing_work_accum,
                &mut obs_counter,
            ) {
                let t = state.time;
                return Err(abort(step_idx, t, e, state, trajectory));
            }
            dissipation_last_obs = 0.0;
        }
    }
    Ok(RunOutput { final_state: state, trajectory })
}

/// Convenience: energy of a state with the run's spectral operators.
pub fn state_energy(pot: &dyn Potential, u: &PhaseField) -> Result<EnergyBreakdown> {
    let sp = Spectral::new(&u.grid);
    diagnostics::energy(pot, u, None, &sp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::potential::{DoubleWell, GrowthBounds, TripleWell, UnitWell01};

    /// W = 0: the dynamics reduce to the heat equation.
    struct ZeroPotential;
    impl Potential for ZeroPotential {
        fn dim(&self) -> usize {
            1
        }
        fn wells(&self) -> &[Vec<f64>] {
            std::slice::from_ref(&ZERO_WELL.0)
        }
        fn value(&self, _u: &[f64]) -> f64 {
            0.0
        }
        fn gradient(&self, _u: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
        fn convex_value(&self, _u: &[f64]) -> f64 {
            0.0
        }
        fn convex_gradient(&self, _u: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
        fn perturbation_value(&self, _u: &[f64]) -> f64 {
            0.0
        }
        fn perturbation_gradient(&self, _u: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
        fn growth(&self) -> GrowthBounds {
            GrowthBounds { exponent: 2.0, radius: 1.0, lower: 0.0, upper: 1.0 }
        }
        fn perturbation_hessian_bound(&self) -> f64 {
            0.0
        }
        fn name(&self) -> &str {
            "zero"
        }
    }
    struct ZeroWell(Vec<f64>);
    static ZERO_WELL: std::sync::LazyLock<ZeroWell> =
        std::sync::LazyLock::new(|| ZeroWell(vec![0.0]));

    fn smooth_field(grid: Grid, eps: f64) -> PhaseField {
        let vals: Vec<f64> = (0..grid.cells())
            .map(|i| {
                let x = i as f64 * grid.spacing();
                0.5 + 0.3 * (2.0 * std::f64::consts::PI * x).sin()
            })
            .collect();
        PhaseField::new(grid, vec![vals], eps, 0.0).unwrap()
    }

    #[test]
    fn wells_are_fixed_points_bitwise_explicit() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let u = PhaseField::constant(grid, &[1.0], 0.1).unwrap();
        let stepper = Stepper::new(&pot, &grid, StepperConfig::new(Scheme::Explicit, 1e-5));
        let (next, _) = stepper.step_explicit(&u, &Dynamics::Plain).unwrap();
        for (a, b) in next.components[0].iter().zip(&u.components[0]) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn wells_are_fixed_points_all_steppers() {
        let pot = TripleWell::new();
        let grid = Grid::new(2, 16, 1.0).unwrap();
        let w = pot.wells()[1].clone();
        let u = PhaseField::constant(grid, &w, 0.1).unwrap();
        for scheme in [Scheme::Explicit, Scheme::SemiImplicit, Scheme::MinimizingMovement] {
            let stepper = Stepper::new(&pot, &grid, StepperConfig::new(scheme, 1e-5));
            let (next, _) = stepper.step(&u, &Dynamics::Plain).unwrap();
            for c in 0..2 {
                for (a, b) in next.components[c].iter().zip(&u.components[c]) {
                    assert!((a - b).abs() < 1e-12, "{scheme:?} moved a well state");
                }
            }
        }
    }

    #[test]
    fn uniform_half_state_is_unchanged() {
        // W'(1/2) = 0 for the unit well: one explicit step leaves u alone.
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let u = PhaseField::constant(grid, &[0.5], 0.1).unwrap();
        let stepper = Stepper::new(&pot, &grid, StepperConfig::new(Scheme::Explicit, 1e-5));
        let (next, _) = stepper.step_explicit(&u, &Dynamics::Plain).unwrap();
        for (a, b) in next.components[0].iter().zip(&u.components[0]) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn cfl_violation_is_an_error() {
        let pot = DoubleWell::new();
        let grid = Grid::new(2, 64, 1.0).unwrap();
        let u = PhaseField::constant(grid, &[1.0], 0.05).unwrap();
        let stepper = Stepper::new(&pot, &grid, StepperConfig::new(Scheme::Explicit, 1.0));
        assert!(matches!(
            stepper.step_explicit(&u, &Dynamics::Plain),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn forced_zero_equals_plain_bitwise() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 128, 1.0).unwrap();
        let u = smooth_field(grid, 0.1);
        let zero = Dynamics::Forced { forcing: Forcing::Constant { amplitude: vec![0.0] } };
        for scheme in [Scheme::Explicit, Scheme::SemiImplicit] {
            let stepper = Stepper::new(&pot, &grid, StepperConfig::new(scheme, 1e-6));
            let (a, _) = stepper.step(&u, &Dynamics::Plain).unwrap();
            let (b, _) = stepper.step(&u, &zero).unwrap();
            for (x, y) in a.components[0].iter().zip(&b.components[0]) {
                assert_eq!(x.to_bits(), y.to_bits(), "{scheme:?} differs under zero force");
            }
        }
    }

    #[test]
    fn semi_implicit_heat_mode_decay_is_exact() {
        let pot = ZeroPotential;
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let k = 2.0 * std::f64::consts::PI;
        let vals: Vec<f64> = (0..64).map(|i| (k * i as f64 * grid.spacing()).sin()).collect();
        let u = PhaseField::new(grid, vec![vals.clone()], 1.0, 0.0).unwrap();
        let dt = 0.01;
        let stepper = Stepper::new(&pot, &grid, StepperConfig::new(Scheme::SemiImplicit, dt));
        let (next, _) = stepper.step_semi_implicit(&u, &Dynamics::Plain).unwrap();
        let factor = 1.0 / (1.0 + dt * k * k);
        for (n, v) in next.components[0].iter().zip(&vals) {
            assert!((n - factor * v).abs() < 1e-12, "{n} vs {}", factor * v);
        }
    }

    #[test]
    fn semi_implicit_matches_explicit_to_second_order() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let u = smooth_field(grid, 0.2);
        let diff = |dt: f64| -> f64 {
            let se = Stepper::new(&pot, &grid, StepperConfig::new(Scheme::Explicit, dt));
            let si = Stepper::new(&pot, &grid, StepperConfig::new(Scheme::SemiImplicit, dt));
            let (a, _) = se.step_explicit(&u, &Dynamics::Plain).unwrap();
            let (b, _) = si.step_semi_implicit(&u, &Dynamics::Plain).unwrap();
            a.components[0]
                .iter()
                .zip(&b.components[0])
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        };
        let e1 = diff(4e-6);
        let e2 = diff(2e-6);
        let ratio = e1 / e2;
        assert!((3.0..5.0).contains(&ratio), "O(dt^2) ratio {ratio}");
    }

    #[test]
    fn minimizing_movement_descends_energy() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let u = smooth_field(grid, 0.1);
        let mut cfg = StepperConfig::new(Scheme::MinimizingMovement, 1e-4);
        cfg.mm_inner_tol = 1e-8;
        let stepper = Stepper::new(&pot, &grid, cfg);
        let e0 = diagnostics::energy(&pot, &u, None, stepper.spectral()).unwrap().total;
        let (next, _) = stepper.step_minimizing_movement(&u, &Dynamics::Plain).unwrap();
        let e1 = diagnostics::energy(&pot, &next, None, stepper.spectral()).unwrap().total;
        assert!(e1 <= e0, "MM raised energy {e0} -> {e1}");
    }

    #[test]
    fn minimizing_movement_velocity_is_first_order_in_dt() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let u = smooth_field(grid, 0.2);
        let sp = Spectral::new(&grid);
        // Explicit right-hand side at u.
        let lap = sp.laplacian(&u.components[0]);
        let mut dw = vec![0.0; grid.cells()];
        let mut g = [0.0];
        for (i, out) in dw.iter_mut().enumerate() {
            pot.gradient(&[u.components[0][i]], &mut g);
            *out = g[0];
        }
        let eps2 = u.epsilon * u.epsilon;
        let rhs: Vec<f64> = (0..grid.cells()).map(|i| lap[i] - dw[i] / eps2).collect();
        let err = |dt: f64| -> f64 {
            let mut cfg = StepperConfig::new(Scheme::MinimizingMovement, dt);
            cfg.mm_inner_tol = 1e-11;
            let stepper = Stepper::new(&pot, &grid, cfg);
            let (next, _) = stepper.step_minimizing_movement(&u, &Dynamics::Plain).unwrap();
            (0..grid.cells())
                .map(|i| {
                    let v = (next.components[0][i] - u.components[0][i]) / dt;
                    (v - rhs[i]) * (v - rhs[i])
                })
                .sum::<f64>()
                .sqrt()
        };
        let e1 = err(2e-5);
        let e2 = err(1e-5);
        let ratio = e1 / e2;
        assert!((1.5..2.5).contains(&ratio), "O(dt) ratio {ratio}");
    }

    #[test]
    fn minimizing_movement_rejects_other_variants() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let u = smooth_field(grid, 0.1);
        let stepper =
            Stepper::new(&pot, &grid, StepperConfig::new(Scheme::MinimizingMovement, 1e-4));
        assert!(matches!(
            stepper.step_minimizing_movement(&u, &Dynamics::VolumePreserving),
            Err(Error::MinimizingMovementVariant)
        ));
    }

    #[test]
    fn zero_step_run_returns_initial() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let u = smooth_field(grid, 0.1);
        let orig = u.components[0].clone();
        let out = run(
            &pot,
            u,
            &Dynamics::Plain,
            &StepperConfig::new(Scheme::SemiImplicit, 1e-4),
            0.0,
            &ObserverConfig::default(),
        )
        .unwrap();
        assert_eq!(out.trajectory.reports.len(), 1);
        for (a, b) in out.final_state.components[0].iter().zip(&orig) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn volume_preserving_conserves_mean_exactly() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let u = smooth_field(grid, 0.1);
        let mean0 = u.means()[0];
        let out = run(
            &pot,
            u,
            &Dynamics::VolumePreserving,
            &StepperConfig::new(Scheme::SemiImplicit, 1e-4),
            0.1, // 1000 steps
            &ObserverConfig::default(),
        )
        .unwrap();
        let drift = (out.final_state.means()[0] - mean0).abs();
        assert!(drift < 1e-12, "mean drift {drift}");
        let last = out.trajectory.reports.last().unwrap();
        assert!(last.lambda.is_some());
        assert!(last.lambda_sq_accum.is_finite() && last.lambda_sq_accum >= 0.0);
    }

    #[test]
    fn aborted_run_preserves_partial_trajectory() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let u = smooth_field(grid, 0.1);
        // Unsatisfiable inner tolerance with a tiny iteration cap.
        let cfg = StepperConfig {
            scheme: Scheme::MinimizingMovement,
            dt: 1e-4,
            mm_inner_tol: 1e-300,
            mm_iter_cap: 1,
        };
        let err = run(&pot, u, &Dynamics::Plain, &cfg, 0.01, &ObserverConfig::default())
            .expect_err("must stall");
        assert!(!err.partial.trajectory.reports.is_empty());
        assert!(matches!(*err.source, Error::MinimizingMovementStalled { .. }));
    }

    #[test]
    fn explicit_step_increments_time_and_dissipation() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let u = smooth_field(grid, 0.1);
        let stepper = Stepper::new(&pot, &grid, StepperConfig::new(Scheme::Explicit, 1e-6));
        let (next, info) = stepper.step_explicit(&u, &Dynamics::Plain).unwrap();
        assert!((next.time - 1e-6).abs() < 1e-18);
        assert!(info.dissipation > 0.0);
    }
}
