//! Phase-field diagnostics: the energy split, dissipation bookkeeping,
//! equipartition measures, distance-to-well compositions, tilt-excess and
//! the first-variation / velocity pairings of the tested weak identity.
//!
//! All pairings use the same spectral calculus as the solver, so the weak
//! identity holds to round-off for the explicit stepper and modeling error
//! is isolated from quadrature error.

use crate::error::{Error, Result};
use crate::field::spectral::Spectral;
use crate::field::{check_window_range, integrate, Grid, PhaseField};
use crate::geodesic::{geodesic_distance, GeodesicParams};
use crate::numerics::pairwise_sum_with;
use crate::potential::Potential;

/// Ginzburg-Landau energy split: `dirichlet` is the eps/2 |grad u|^2 part,
/// `potential` the W(u)/eps part.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    pub potential: f64,
    pub total: f64,
}

/// Pointwise energy ingredients reused by several diagnostics.
struct EnergyFields {
    /// |grad u|^2 summed over components and axes.
    grad_sq: Vec<f64>,
    /// W(u) per cell.
    potential: Vec<f64>,
}

fn energy_fields(pot: &dyn Potential, u: &PhaseField, sp: &Spectral) -> EnergyFields {
    let cells = u.grid.cells();
    let mut grad_sq = vec![0.0; cells];
    for comp in &u.components {
        for axis in 0..u.grid.dim() {
            let d = sp.gradient_axis(comp, axis);
            for (g, di) in grad_sq.iter_mut().zip(&d) {
                *g += di * di;
            }
        }
    }
    let n = u.num_components();
    let mut state = vec![0.0; n];
    let mut potential = vec![0.0; cells];
    for (idx, w) in potential.iter_mut().enumerate() {
        u.state_at(idx, &mut state);
        *w = pot.value(&state);
    }
    EnergyFields { grad_sq, potential }
}

/// Localized Ginzburg-Landau energy E(window, u); `window = None` means 1.
pub fn energy(
    pot: &dyn Potential,
    u: &PhaseField,
    window: Option<&[f64]>,
    sp: &Spectral,
) -> Result<EnergyBreakdown> {
    let f = energy_fields(pot, u, sp);
    let eps = u.epsilon;
    let dirichlet = 0.5 * eps * integrate(&u.grid, &f.grad_sq, window)?;
    let potential = integrate(&u.grid, &f.potential, window)? / eps;
    Ok(EnergyBreakdown { dirichlet, potential, total: dirichlet + potential })
}

/// The localized equipartition measures: in the sharp-interface limit all
/// three agree with twice the localized energy.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct EquipartitionReport {
    /// integral of window * eps |grad u|^2.
    pub grad_sq: f64,
    /// integral of window * (2/eps) W(u).
    pub potential_twice: f64,
    /// integral of window * sqrt(2 W) |grad u|.
    pub geodesic: f64,
    /// E(window, u), for comparability (2x this matches the measures above).
    pub localized_energy: f64,
    /// Max relative pairwise gap among the first three measures.
    pub max_rel_gap: f64,
}

/// Computes the equipartition measures under a [0,1]-valued window.
pub fn equipartition_report(
    pot: &dyn Potential,
    u: &PhaseField,
    window: Option<&[f64]>,
    sp: &Spectral,
) -> Result<EquipartitionReport> {
    if let Some(w) = window {
        check_window_range(w)?;
    }
    let f = energy_fields(pot, u, sp);
    let eps = u.epsilon;
    let grad_sq = eps * integrate(&u.grid, &f.grad_sq, window)?;
    let potential_twice = 2.0 / eps * integrate(&u.grid, &f.potential, window)?;
    let geo_density: Vec<f64> = f
        .grad_sq
        .iter()
        .zip(&f.potential)
        .map(|(&g, &w)| (2.0 * w.max(0.0)).sqrt() * g.sqrt())
        .collect();
    let geodesic = integrate(&u.grid, &geo_density, window)?;
    let localized_energy = 0.5 * (grad_sq + potential_twice);
    let vals = [grad_sq, potential_twice, geodesic];
    let scale = vals.iter().cloned().fold(0.0f64, f64::max).max(1e-300);
    let mut max_rel_gap: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            max_rel_gap = max_rel_gap.max((vals[i] - vals[j]).abs() / scale);
        }
    }
    Ok(EquipartitionReport { grad_sq, potential_twice, geodesic, localized_energy, max_rel_gap })
}

/// Per-observation record emitted by the runner.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DiagnosticsReport {
    pub time: f64,
    pub energy: EnergyBreakdown,
    /// integral of eps |du/dt|^2 dx dt over the last observation interval
    /// (backward differences per step).
    pub dissipation_increment: f64,
    /// Running total of the dissipation integral from t0.
    pub dissipation_accum: f64,
    pub equipartition: EquipartitionReport,
    /// Componentwise means of u (the conserved volumes).
    pub volume_means: Vec<f64>,
    /// (formula, projection) Lagrange multipliers of the last step, for the
    /// volume-preserving variant.
    pub lambda: Option<(f64, f64)>,
    /// Running integral of lambda_projection^2 dt.
    pub lambda_sq_accum: f64,
    /// Running integral of f . du accumulated per step (forced variant).
    pub forcing_work_accum: Option<f64>,
    pub forcing_norms: Option<ForcingNorms>,
}

/// Instantaneous forcing norms at an observation time.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ForcingNorms {
    /// integral |f|^2 dx.
    pub l2: f64,
    /// integral |df/dt|^2 dx.
    pub dt_l2: f64,
    /// integral |grad f|^2 dx.
    pub grad_l2: f64,
}

/// Energy-dissipation residual E(T) + D - E(0) over a recorded trajectory;
/// near zero for accurate plain runs, and <= 0 by construction for
/// minimizing movements.
pub fn dissipation_residual(reports: &[DiagnosticsReport]) -> Result<f64> {
    if reports.len() < 2 {
        return Err(Error::TooFewStates { needed: 2, got: reports.len() });
    }
    let first = &reports[0];
    let last = &reports[reports.len() - 1];
    Ok(last.energy.total + (last.dissipation_accum - first.dissipation_accum)
        - first.energy.total)
}

/// Slack of the forced energy inequality, measured against the exact
/// discrete work identity E(T) + D = E(0) + integral f . du: returns
/// E(0) + W - E(T) - D, expected >= -tol for accurate runs (any admissible
/// Gronwall constant only loosens the bound further).
pub fn forced_dissipation_slack(reports: &[DiagnosticsReport]) -> Result<f64> {
    if reports.len() < 2 {
        return Err(Error::TooFewStates { needed: 2, got: reports.len() });
    }
    let first = &reports[0];
    let last = &reports[reports.len() - 1];
    let (w0, w1) = match (first.forcing_work_accum, last.forcing_work_accum) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Config("trajectory carries no forcing work".into())),
    };
    Ok(first.energy.total + (w1 - w0)
        - last.energy.total
        - (last.dissipation_accum - first.dissipation_accum))
}

/// Distance-to-well composition phi_i(u(x)) and its discrete total
/// variation (centered differences).
#[derive(Debug, Clone)]
pub struct WellDistanceField {
    pub values: Vec<f64>,
    pub total_variation: f64,
}

/// Tabulated phi_i for scalar potentials: cumulative Simpson on a fine
/// lattice spanning the field range, then linear interpolation.
struct ScalarPhiTable {
    lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl ScalarPhiTable {
    fn build(pot: &dyn Potential, well: usize, lo: f64, hi: f64) -> Self {
        let well_pos = pot.wells()[well][0];
        let lo = lo.min(well_pos) - 1e-6;
        let hi = hi.max(well_pos) + 1e-6;
        let res = 4096usize;
        let step = (hi - lo) / (res - 1) as f64;
        // phi(u) = |int_alpha^u sqrt(2W)|: integrate the weight once over the
        // lattice and anchor at the well.
        let weight = |s: f64| (2.0 * pot.value(&[s]).max(0.0)).sqrt();
        let mut cumulative = vec![0.0; res];
        for k in 1..res {
            let a = lo + (k - 1) as f64 * step;
            let b = a + step;
            let inc = (b - a) / 6.0 * (weight(a) + 4.0 * weight(0.5 * (a + b)) + weight(b));
            cumulative[k] = cumulative[k - 1] + inc;
        }
        let at = |u: f64, cum: &[f64]| -> f64 {
            let x = ((u - lo) / step).clamp(0.0, (res - 1) as f64);
            let k = (x.floor() as usize).min(res - 2);
            let t = x - k as f64;
            cum[k] + t * (cum[k + 1] - cum[k])
        };
        let anchor = at(well_pos, &cumulative);
        let values = cumulative.iter().map(|&c| (c - anchor).abs()).collect();
        Self { lo, step, values }
    }

    fn eval(&self, u: f64) -> f64 {
        let res = self.values.len();
        let x = ((u - self.lo) / self.step).clamp(0.0, (res - 1) as f64);
        let k = (x.floor() as usize).min(res - 2);
        let t = x - k as f64;
        self.values[k] + t * (self.values[k + 1] - self.values[k])
    }
}

/// Cached phi_i on a state-space lattice for vector potentials (N = 2).
pub struct PhiCache {
    well: usize,
    lo: [f64; 2],
    step: [f64; 2],
    res: usize,
    values: Vec<f64>,
}

impl PhiCache {
    /// Builds the lattice over `[lo, hi]` per component with one geodesic
    /// solve per lattice node.
    pub fn build(
        pot: &dyn Potential,
        well: usize,
        lo: [f64; 2],
        hi: [f64; 2],
        res: usize,
        params: &GeodesicParams,
    ) -> Result<Self> {
        if pot.dim() != 2 {
            return Err(Error::UnsupportedDimension(pot.dim()));
        }
        if well >= pot.wells().len() {
            return Err(Error::WellIndex { index: well, wells: pot.wells().len() });
        }
        assert!(res >= 4);
        let step = [
            (hi[0] - lo[0]) / (res - 1) as f64,
            (hi[1] - lo[1]) / (res - 1) as f64,
        ];
        let target = pot.wells()[well].clone();
        let mut values = vec![0.0; res * res];
        for j in 0..res {
            for i in 0..res {
                let u = [lo[0] + i as f64 * step[0], lo[1] + j as f64 * step[1]];
                values[j * res + i] = geodesic_distance(pot, &u, &target, params)?.length;
            }
        }
        Ok(Self { well, lo, step, res, values })
    }

    pub fn well(&self) -> usize {
        self.well
    }

    /// Bilinear interpolation of phi_i(u), clamped to the lattice box.
    pub fn eval(&self, u: &[f64]) -> f64 {
        let x = ((u[0] - self.lo[0]) / self.step[0]).clamp(0.0, (self.res - 1) as f64);
        let y = ((u[1] - self.lo[1]) / self.step[1]).clamp(0.0, (self.res - 1) as f64);
        let i = (x.floor() as usize).min(self.res - 2);
        let j = (y.floor() as usize).min(self.res - 2);
        let (tx, ty) = (x - i as f64, y - j as f64);
        let v00 = self.values[j * self.res + i];
        let v10 = self.values[j * self.res + i + 1];
        let v01 = self.values[(j + 1) * self.res + i];
        let v11 = self.values[(j + 1) * self.res + i + 1];
        v00 * (1.0 - tx) * (1.0 - ty) + v10 * tx * (1.0 - ty) + v01 * (1.0 - tx) * ty + v11 * tx * ty
    }

    /// Lattice-step central differences of phi_i at u.
    pub fn gradient(&self, u: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for a in 0..2 {
            let mut up = [u[0], u[1]];
            let mut dn = [u[0], u[1]];
            up[a] += self.step[a];
            dn[a] -= self.step[a];
            g[a] = (self.eval(&up) - self.eval(&dn)) / (2.0 * self.step[a]);
        }
        g
    }
}

/// Field of phi_i(u(x)) with its total variation.
///
/// Scalar potentials use the closed-form primitive; vector potentials need a
/// prebuilt [`PhiCache`] (per-cell geodesic solves are cached on a lattice).
pub fn well_distance_field(
    pot: &dyn Potential,
    u: &PhaseField,
    well: usize,
    cache: Option<&PhiCache>,
) -> Result<WellDistanceField> {
    if well >= pot.wells().len() {
        return Err(Error::WellIndex { index: well, wells: pot.wells().len() });
    }
    let cells = u.grid.cells();
    let mut values = vec![0.0; cells];
    match pot.dim() {
        1 => {
            let comp = &u.components[0];
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &v in comp {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let table = ScalarPhiTable::build(pot, well, lo, hi);
            for (v, &ui) in values.iter_mut().zip(comp) {
                *v = table.eval(ui);
            }
        }
        2 => {
            let cache = cache.ok_or_else(|| {
                Error::Config("vector potential needs a prebuilt phi cache".into())
            })?;
            if cache.well() != well {
                return Err(Error::Config("phi cache built for a different well".into()));
            }
            let mut state = [0.0; 2];
            for (idx, v) in values.iter_mut().enumerate() {
                state[0] = u.components[0][idx];
                state[1] = u.components[1][idx];
                *v = cache.eval(&state);
            }
        }
        d => return Err(Error::UnsupportedDimension(d)),
    }
    // Total variation with centered differences; spectral gradients would
    // ring on the kinks of phi composed with near-sharp data.
    let grid = &u.grid;
    let h = grid.spacing();
    let mut tv_density = vec![0.0; cells];
    for (idx, out) in tv_density.iter_mut().enumerate() {
        let mut sq = 0.0;
        for axis in 0..grid.dim() {
            let plus = values[grid.neighbor(idx, axis, 1)];
            let minus = values[grid.neighbor(idx, axis, -1)];
            let d = (plus - minus) / (2.0 * h);
            sq += d * d;
        }
        *out = sq.sqrt();
    }
    let total_variation = integrate(grid, &tv_density, None)?;
    Ok(WellDistanceField { values, total_variation })
}

/// Result of the cellwise Lipschitz chain-rule check: how far
/// |grad(phi_i o u)| exceeds sqrt(2 W(u)) |grad u| (centered differences on
/// both sides), and the peak bound value for normalization. Discretization
/// leaves an O((h/eps)^2) relative defect even on smooth states.
#[derive(Debug, Clone, Copy)]
pub struct LipschitzCheck {
    /// Max over cells of |grad(phi o u)| - sqrt(2W)|grad u| (<= 0: exact).
    pub max_defect: f64,
    /// Max over cells of the bound sqrt(2W)|grad u|.
    pub scale: f64,
}

/// Checks the Lipschitz composition bound cellwise.
pub fn lipschitz_composition_check(
    pot: &dyn Potential,
    u: &PhaseField,
    phi: &WellDistanceField,
) -> LipschitzCheck {
    let grid = &u.grid;
    let h = grid.spacing();
    let ncomp = u.num_components();
    let mut state = vec![0.0; ncomp];
    let mut worst = f64::NEG_INFINITY;
    let mut scale: f64 = 0.0;
    for idx in 0..grid.cells() {
        let mut phi_sq = 0.0;
        let mut grad_u_sq = 0.0;
        for axis in 0..grid.dim() {
            let p = grid.neighbor(idx, axis, 1);
            let m = grid.neighbor(idx, axis, -1);
            let d = (phi.values[p] - phi.values[m]) / (2.0 * h);
            phi_sq += d * d;
            for comp in &u.components {
                let du = (comp[p] - comp[m]) / (2.0 * h);
                grad_u_sq += du * du;
            }
        }
        u.state_at(idx, &mut state);
        let bound = (2.0 * pot.value(&state).max(0.0)).sqrt() * grad_u_sq.sqrt();
        worst = worst.max(phi_sq.sqrt() - bound);
        scale = scale.max(bound);
    }
    LipschitzCheck { max_defect: worst, scale }
}

/// Localized tilt-excess query: phase index, frozen direction nu* (the
/// approximate inner normal of the phase) and a [0,1] window.
#[derive(Debug, Clone)]
pub struct TiltExcessQuery {
    pub phase: usize,
    pub direction: Vec<f64>,
    pub window: Vec<f64>,
}

/// Tilt-excess of one phase:
///
/// ```text
///   E^i = integral window * (1/eps) | eps grad u + dphi_i(u) (x) nu* |^2,
/// ```
///
/// zero exactly on the optimal profile when nu* is the inner normal of
/// phase i. For scalar potentials dphi_i(u) = sign(u - alpha_i) sqrt(2W(u));
/// for vector potentials the chain rule is inverted where |grad u| > 0 and
/// the lattice gradient of the cached phi_i is used otherwise.
pub fn tilt_excess(
    pot: &dyn Potential,
    u: &PhaseField,
    query: &TiltExcessQuery,
    sp: &Spectral,
    cache: Option<&PhiCache>,
) -> Result<f64> {
    let norm: f64 = query.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnitDirection(norm));
    }
    check_window_range(&query.window)?;
    if query.phase >= pot.wells().len() {
        return Err(Error::WellIndex { index: query.phase, wells: pot.wells().len() });
    }
    let grid = &u.grid;
    let dim = grid.dim();
    let ncomp = u.num_components();
    let eps = u.epsilon;
    let cells = grid.cells();

    // Spectral Jacobian d_a u_c, component-major.
    let mut jac: Vec<Vec<f64>> = Vec::with_capacity(ncomp * dim);
    for comp in &u.components {
        for axis in 0..dim {
            jac.push(sp.gradient_axis(comp, axis));
        }
    }

    // dphi per cell, component-major within each cell.
    let mut dphi = vec![0.0; cells * ncomp];
    match pot.dim() {
        1 => {
            let alpha = pot.wells()[query.phase][0];
            for (idx, out) in dphi.iter_mut().enumerate() {
                let v = u.components[0][idx];
                let w = (2.0 * pot.value(&[v]).max(0.0)).sqrt();
                *out = if v >= alpha { w } else { -w };
            }
        }
        2 => {
            let cache = cache.ok_or_else(|| {
                Error::Config("vector potential needs a prebuilt phi cache".into())
            })?;
            let phi = well_distance_field(pot, u, query.phase, Some(cache))?;
            let mut max_grad: f64 = 0.0;
            for idx in 0..cells {
                let mut s = 0.0;
                for c in 0..ncomp {
                    for a in 0..dim {
                        let j = jac[c * dim + a][idx];
                        s += j * j;
                    }
                }
                max_grad = max_grad.max(s);
            }
            let threshold = 1e-12 * max_grad.max(1e-300);
            let h = grid.spacing();
            let mut state = [0.0; 2];
            for idx in 0..cells {
                let mut jj = [[0.0; 2]; 2]; // J J^T for N = 2
                let mut rhs = [0.0; 2];
                let mut grad_phi = [0.0; 3];
                for (a, g) in grad_phi.iter_mut().enumerate().take(dim) {
                    let p = grid.neighbor(idx, a, 1);
                    let m = grid.neighbor(idx, a, -1);
                    *g = (phi.values[p] - phi.values[m]) / (2.0 * h);
                }
                let mut frob = 0.0;
                for c in 0..ncomp {
                    for cc in 0..ncomp {
                        for a in 0..dim {
                            jj[c][cc] += jac[c * dim + a][idx] * jac[cc * dim + a][idx];
                        }
                    }
                    for a in 0..dim {
                        rhs[c] += jac[c * dim + a][idx] * grad_phi[a];
                        frob += jac[c * dim + a][idx] * jac[c * dim + a][idx];
                    }
                }
                let det = jj[0][0] * jj[1][1] - jj[0][1] * jj[1][0];
                if frob > threshold && det.abs() > 1e-14 * frob * frob {
                    dphi[idx * 2] = (jj[1][1] * rhs[0] - jj[0][1] * rhs[1]) / det;
                    dphi[idx * 2 + 1] = (-jj[1][0] * rhs[0] + jj[0][0] * rhs[1]) / det;
                } else {
                    state[0] = u.components[0][idx];
                    state[1] = u.components[1][idx];
                    let g = cache.gradient(&state);
                    dphi[idx * 2] = g[0];
                    dphi[idx * 2 + 1] = g[1];
                }
            }
        }
        d => return Err(Error::UnsupportedDimension(d)),
    }

    let density: Vec<f64> = (0..cells)
        .map(|idx| {
            let mut sq = 0.0;
            for c in 0..ncomp {
                for a in 0..dim {
                    let term = eps * jac[c * dim + a][idx]
                        + dphi[idx * ncomp + c] * query.direction[a];
                    sq += term * term;
                }
            }
            sq / eps
        })
        .collect();
    integrate(grid, &density, Some(&query.window))
}

/// First-variation pairing
/// `integral (eps lap u - dW(u)/eps) . (xi . grad) u dx`.
pub fn first_variation_pairing(
    pot: &dyn Potential,
    u: &PhaseField,
    xi: &[Vec<f64>],
    sp: &Spectral,
) -> Result<f64> {
    let grid = &u.grid;
    let cells = grid.cells();
    if xi.len() != grid.dim() {
        return Err(Error::ShapeMismatch { got: xi.len(), expected: grid.dim() });
    }
    for comp in xi {
        if comp.len() != cells {
            return Err(Error::ShapeMismatch { got: comp.len(), expected: cells });
        }
    }
    let eps = u.epsilon;
    let ncomp = u.num_components();
    let mut state = vec![0.0; ncomp];
    let mut dw = vec![0.0; ncomp];
    let mut density = vec![0.0; cells];
    for (c, comp) in u.components.iter().enumerate() {
        let lap = sp.laplacian(comp);
        let grads: Vec<Vec<f64>> = (0..grid.dim()).map(|a| sp.gradient_axis(comp, a)).collect();
        for idx in 0..cells {
            u.state_at(idx, &mut state);
            pot.gradient(&state, &mut dw);
            let mut advect = 0.0;
            for a in 0..grid.dim() {
                advect += xi[a][idx] * grads[a][idx];
            }
            density[idx] += (eps * lap[idx] - dw[c] / eps) * advect;
        }
    }
    integrate(grid, &density, None)
}

/// Constant C(d) in the discrete bound |first variation| <= C |grad xi|_inf E:
/// from the integrated-by-parts form, |Id - N (x) N|_F <= d - 1 and
/// |div xi| <= sqrt(d) |grad xi|_F give C = 2(d-1) + 2 sqrt(d).
pub fn first_variation_bound_constant(dim: usize) -> f64 {
    2.0 * (dim as f64 - 1.0) + 2.0 * (dim as f64).sqrt()
}

/// Velocity pairing `integral eps (xi . grad) u_mid . (u_after - u_before)/dt`
/// with u_mid the midpoint average, consistent with backward-difference
/// time derivatives.
pub fn velocity_pairing(
    before: &PhaseField,
    after: &PhaseField,
    dt: f64,
    xi: &[Vec<f64>],
    sp: &Spectral,
) -> Result<f64> {
    if before.grid != after.grid || before.num_components() != after.num_components() {
        return Err(Error::ShapeMismatch {
            got: after.grid.cells(),
            expected: before.grid.cells(),
        });
    }
    let grid = &before.grid;
    let cells = grid.cells();
    let eps = before.epsilon;
    let mut density = vec![0.0; cells];
    for (bc, ac) in before.components.iter().zip(&after.components) {
        let mid: Vec<f64> = bc.iter().zip(ac).map(|(&b, &a)| 0.5 * (b + a)).collect();
        let grads: Vec<Vec<f64>> = (0..grid.dim()).map(|a| sp.gradient_axis(&mid, a)).collect();
        for idx in 0..cells {
            let mut advect = 0.0;
            for a in 0..grid.dim() {
                advect += xi[a][idx] * grads[a][idx];
            }
            density[idx] += eps * advect * (ac[idx] - bc[idx]) / dt;
        }
    }
    integrate(grid, &density, None)
}

/// Which side of the weak identity a check pairs against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairingScheme {
    /// Pair against the pre-step state; exact to round-off for the explicit
    /// stepper because the step literally adds dt times the paired quantity.
    BeginState,
    /// Midpoint velocity pairing vs trapezoidal first variation; first-order
    /// accurate, used for the implicit steppers.
    Midpoint,
}

/// Result of one weak-identity check.
#[derive(Debug, Clone, Copy)]
pub struct WeakIdentityCheck {
    pub velocity: f64,
    pub first_variation: f64,
    pub forcing: f64,
    /// velocity - first_variation - forcing.
    pub residual: f64,
    /// |residual| / (|velocity| + |first_variation| + E(before)).
    pub normalized: f64,
}

/// Residual of the tested weak identity over one step. `forcing_field`, when
/// present, is f sampled at the scheme-consistent time; its pairing
/// `integral f . (xi . grad) u` moves to the right-hand side.
#[allow(clippy::too_many_arguments)]
pub fn weak_identity_residual(
    pot: &dyn Potential,
    before: &PhaseField,
    after: &PhaseField,
    dt: f64,
    xi: &[Vec<f64>],
    scheme: PairingScheme,
    forcing_field: Option<&[Vec<f64>]>,
    sp: &Spectral,
) -> Result<WeakIdentityCheck> {
    if before.grid != after.grid {
        return Err(Error::ShapeMismatch {
            got: after.grid.cells(),
            expected: before.grid.cells(),
        });
    }
    let grid = &before.grid;
    let cells = grid.cells();
    let eps = before.epsilon;

    // Velocity and forcing pairings against (xi . grad) of `weights`.
    let pair_with = |weights: &PhaseField| -> Result<(f64, f64)> {
        let mut vel_density = vec![0.0; cells];
        let mut force_density = vec![0.0; cells];
        for (c, comp) in weights.components.iter().enumerate() {
            let grads: Vec<Vec<f64>> =
                (0..grid.dim()).map(|a| sp.gradient_axis(comp, a)).collect();
            for idx in 0..cells {
                let mut advect = 0.0;
                for a in 0..grid.dim() {
                    advect += xi[a][idx] * grads[a][idx];
                }
                let delta = after.components[c][idx] - before.components[c][idx];
                vel_density[idx] += eps * advect * delta / dt;
                if let Some(f) = forcing_field {
                    force_density[idx] += f[c][idx] * advect;
                }
            }
        }
        Ok((
            integrate(grid, &vel_density, None)?,
            integrate(grid, &force_density, None)?,
        ))
    };

    let (velocity, first_variation, forcing) = match scheme {
        PairingScheme::BeginState => {
            let (vel, forcing) = pair_with(before)?;
            let fv = first_variation_pairing(pot, before, xi, sp)?;
            (vel, fv, forcing)
        }
        PairingScheme::Midpoint => {
            let mid_components: Vec<Vec<f64>> = before
                .components
                .iter()
                .zip(&after.components)
                .map(|(b, a)| b.iter().zip(a).map(|(&x, &y)| 0.5 * (x + y)).collect())
                .collect();
            let mid = PhaseField::new(before.grid, mid_components, eps, before.time)?;
            let (vel, forcing) = pair_with(&mid)?;
            let fv_before = first_variation_pairing(pot, before, xi, sp)?;
            let fv_after = first_variation_pairing(pot, after, xi, sp)?;
            (vel, 0.5 * (fv_before + fv_after), forcing)
        }
    };
    let residual = velocity - first_variation - forcing;
    let energy_scale = energy(pot, before, None, sp)?.total;
    let normalized =
        residual.abs() / (velocity.abs() + first_variation.abs() + energy_scale).max(1e-300);
    Ok(WeakIdentityCheck { velocity, first_variation, forcing, residual, normalized })
}

/// The two expressions for the Lagrange multiplier of the volume-preserving
/// flow: `formula` is the cell average of W'(u)/eps; the second entry is the
/// difference against -avg(eps lap u - W'(u)/eps), which vanishes to
/// round-off because the spectral Laplacian has exact zero mean.
pub fn lambda_consistency(
    pot: &dyn Potential,
    u: &PhaseField,
    sp: &Spectral,
) -> Result<(f64, f64)> {
    if u.num_components() != 1 {
        return Err(Error::RequiresScalar(u.num_components()));
    }
    let grid = &u.grid;
    let cells = grid.cells() as f64;
    let eps = u.epsilon;
    let comp = &u.components[0];
    let mut dw = vec![0.0; grid.cells()];
    let mut g = [0.0];
    for (idx, out) in dw.iter_mut().enumerate() {
        pot.gradient(&[comp[idx]], &mut g);
        *out = g[0];
    }
    let formula = pairwise_sum_with(dw.len(), &|i| dw[i]) / cells / eps;
    let lap = sp.laplacian(comp);
    let other = -pairwise_sum_with(lap.len(), &|i| eps * lap[i] - dw[i] / eps) / cells;
    Ok((formula, (formula - other).abs()))
}

/// All-ones window (helper for "window = 1 equals no window" checks).
pub fn unit_window(grid: &Grid) -> Vec<f64> {
    vec![1.0; grid.cells()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::geodesic::{optimal_profile, ProfileParams};
    use crate::potential::{DoubleWell, TripleWell, UnitWell01};

    fn profile_field_1d(pot: &dyn Potential, n: usize, eps_over_h: f64) -> (PhaseField, Spectral) {
        // Stripe with interfaces at L/4 and 3L/4 built from the optimal profile.
        let grid = Grid::new(1, n, 1.0).unwrap();
        let eps = eps_over_h * grid.spacing();
        let prof = optimal_profile(pot, 0, 1, &ProfileParams::default()).unwrap();
        let mut vals = vec![0.0; n];
        let mut q = [0.0];
        for (i, v) in vals.iter_mut().enumerate() {
            let x = i as f64 * grid.spacing();
            // signed distance to the stripe [1/4, 3/4], positive inside
            let s = 0.25 - (x - 0.5).abs();
            prof.eval_into(s / eps, &mut q);
            *v = q[0];
        }
        let u = PhaseField::new(grid, vec![vals], eps, 0.0).unwrap();
        let sp = Spectral::new(&grid);
        (u, sp)
    }

    #[test]
    fn well_state_has_zero_energy() {
        let pot = UnitWell01::new();
        let grid = Grid::new(2, 16, 1.0).unwrap();
        let u = PhaseField::constant(grid, &[1.0], 0.1).unwrap();
        let sp = Spectral::new(&grid);
        let e = energy(&pot, &u, None, &sp).unwrap();
        assert_eq!(e.total, 0.0);
    }

    #[test]
    fn stripe_energy_is_twice_sigma() {
        let pot = UnitWell01::new();
        let (u, sp) = profile_field_1d(&pot, 256, 8.0);
        let e = energy(&pot, &u, None, &sp).unwrap();
        assert!((e.total - 2.0).abs() < 2e-3, "E = {}", e.total);
        // Localized on a single interface: sigma = 1.
        let w = crate::field::plateau_window(&u.grid, &[0.25], 0.2, 0.5);
        let loc = energy(&pot, &u, Some(&w), &sp).unwrap();
        assert!((loc.total - 1.0).abs() < 1e-3, "local E = {}", loc.total);
    }

    #[test]
    fn unit_window_equals_no_window_bitwise() {
        let pot = DoubleWell::new();
        let (u, sp) = profile_field_1d(&pot, 128, 8.0);
        let w = unit_window(&u.grid);
        let a = energy(&pot, &u, None, &sp).unwrap();
        let b = energy(&pot, &u, Some(&w), &sp).unwrap();
        assert_eq!(a.total.to_bits(), b.total.to_bits());
    }

    #[test]
    fn equipartition_on_profile_and_ramp() {
        let pot = UnitWell01::new();
        let (u, sp) = profile_field_1d(&pot, 256, 8.0);
        let w = crate::field::plateau_window(&u.grid, &[0.25], 0.2, 0.5);
        let rep = equipartition_report(&pot, &u, Some(&w), &sp).unwrap();
        assert!(rep.max_rel_gap < 1e-3, "gap {}", rep.max_rel_gap);
        assert!((rep.geodesic - 1.0).abs() < 1e-3);

        // Far-from-profile ramp: O(1) gap is reported, not failed.
        let grid = u.grid;
        let vals: Vec<f64> = (0..grid.cells())
            .map(|i| {
                let x = i as f64 * grid.spacing();
                0.5 + 0.4 * (2.0 * std::f64::consts::PI * x).sin()
            })
            .collect();
        let ramp = PhaseField::new(grid, vec![vals], u.epsilon, 0.0).unwrap();
        let rep = equipartition_report(&pot, &ramp, None, &sp).unwrap();
        assert!(rep.max_rel_gap > 0.1);
    }

    #[test]
    fn equipartition_zero_on_well() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let u = PhaseField::constant(grid, &[0.0], 0.1).unwrap();
        let sp = Spectral::new(&grid);
        let rep = equipartition_report(&pot, &u, None, &sp).unwrap();
        assert_eq!(rep.grad_sq, 0.0);
        assert_eq!(rep.potential_twice, 0.0);
        assert_eq!(rep.geodesic, 0.0);
    }

    #[test]
    fn young_domination_holds() {
        let pot = DoubleWell::new();
        let (u, sp) = profile_field_1d(&pot, 128, 6.0);
        let w = crate::field::plateau_window(&u.grid, &[0.3], 0.25, 0.7);
        let rep = equipartition_report(&pot, &u, Some(&w), &sp).unwrap();
        assert!(rep.geodesic <= rep.localized_energy + 1e-12);
        // And for a rough non-profile state.
        let grid = u.grid;
        let vals: Vec<f64> = (0..grid.cells())
            .map(|i| ((i * 2654435761) % 1000) as f64 / 1000.0 * 2.0 - 1.0)
            .collect();
        let rough = PhaseField::new(grid, vec![vals], u.epsilon, 0.0).unwrap();
        let rep = equipartition_report(&pot, &rough, Some(&w), &sp).unwrap();
        assert!(rep.geodesic <= rep.localized_energy + 1e-12);
    }

    #[test]
    fn well_distance_field_constants() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let at_well = PhaseField::constant(grid, &[0.0], 0.1).unwrap();
        let f = well_distance_field(&pot, &at_well, 0, None).unwrap();
        assert!(f.values.iter().all(|&v| v.abs() < 1e-9));
        let at_other = PhaseField::constant(grid, &[1.0], 0.1).unwrap();
        let f = well_distance_field(&pot, &at_other, 0, None).unwrap();
        for &v in &f.values {
            assert!((v - 1.0).abs() < 1e-4, "phi = {v}");
        }
        assert!(f.total_variation.abs() < 1e-9);
    }

    #[test]
    fn well_distance_tv_recovers_sigma_across_profile() {
        let pot = UnitWell01::new();
        let (u, _) = profile_field_1d(&pot, 256, 8.0);
        let f = well_distance_field(&pot, &u, 0, None).unwrap();
        // Two interfaces, each contributing sigma = 1.
        assert!((f.total_variation - 2.0).abs() < 2e-3, "tv {}", f.total_variation);
    }

    #[test]
    fn lipschitz_composition_bound_on_smooth_state() {
        let pot = DoubleWell::new();
        let (u, _) = profile_field_1d(&pot, 256, 8.0);
        let f = well_distance_field(&pot, &u, 0, None).unwrap();
        let check = lipschitz_composition_check(&pot, &u, &f);
        assert!(
            check.max_defect <= 1e-2 * check.scale,
            "defect {} vs scale {}",
            check.max_defect,
            check.scale
        );
    }

    #[test]
    fn tilt_excess_sign_cases_scalar() {
        let pot = UnitWell01::new();
        let (u, sp) = profile_field_1d(&pot, 256, 8.0);
        let window = crate::field::plateau_window(&u.grid, &[0.25], 0.15, 0.5);
        // Left interface: u goes 0 -> 1 moving right, so phase 0 sits left of
        // it and its inner normal is -e1.
        let aligned = tilt_excess(
            &pot,
            &u,
            &TiltExcessQuery { phase: 0, direction: vec![-1.0], window: window.clone() },
            &sp,
            None,
        )
        .unwrap();
        let anti = tilt_excess(
            &pot,
            &u,
            &TiltExcessQuery { phase: 0, direction: vec![1.0], window: window.clone() },
            &sp,
            None,
        )
        .unwrap();
        let sigma = 1.0;
        assert!(aligned < 1e-2 * sigma, "aligned excess {aligned}");
        // Anti-aligned: |a + b|^2 with aligned signs = 4x the Dirichlet
        // measure, which equipartition ties to 4x the potential measure.
        let rep = equipartition_report(&pot, &u, Some(&window), &sp).unwrap();
        assert!(
            (anti - 4.0 * rep.grad_sq).abs() < 0.01 * rep.grad_sq.max(1e-12),
            "anti {anti} vs 4x dirichlet {}",
            4.0 * rep.grad_sq
        );
        assert!(
            (anti - 4.0 * rep.potential_twice).abs() < 0.05 * rep.potential_twice.max(1e-12),
            "anti {anti} vs 4x potential {}",
            4.0 * rep.potential_twice
        );
        // Well state: zero excess.
        let wellstate = PhaseField::constant(u.grid, &[0.0], u.epsilon).unwrap();
        let z = tilt_excess(
            &pot,
            &wellstate,
            &TiltExcessQuery { phase: 0, direction: vec![1.0], window },
            &sp,
            None,
        )
        .unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn tilt_excess_rejects_bad_direction() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let u = PhaseField::constant(grid, &[0.0], 0.1).unwrap();
        let sp = Spectral::new(&grid);
        let q = TiltExcessQuery { phase: 0, direction: vec![0.5], window: unit_window(&grid) };
        assert!(matches!(tilt_excess(&pot, &u, &q, &sp, None), Err(Error::NotUnitDirection(_))));
    }

    #[test]
    fn first_variation_zero_for_well_and_constant_xi() {
        let pot = DoubleWell::new();
        let (u, sp) = profile_field_1d(&pot, 128, 8.0);
        // Constant vector field: the integrand is a total derivative.
        let xi = vec![vec![0.7; u.grid.cells()]];
        let fv = first_variation_pairing(&pot, &u, &xi, &sp).unwrap();
        let e = energy(&pot, &u, None, &sp).unwrap().total;
        assert!(fv.abs() <= 1e-8 * e.max(1.0), "fv {fv}");

        let well = PhaseField::constant(u.grid, &[1.0], u.epsilon).unwrap();
        let fv = first_variation_pairing(&pot, &well, &xi, &sp).unwrap();
        assert_eq!(fv, 0.0);
    }

    #[test]
    fn first_variation_bound_holds() {
        let pot = UnitWell01::new();
        let (u, sp) = profile_field_1d(&pot, 256, 8.0);
        let xi: Vec<Vec<f64>> = vec![(0..u.grid.cells())
            .map(|i| {
                let x = i as f64 * u.grid.spacing();
                0.3 * (2.0 * std::f64::consts::PI * x).sin()
            })
            .collect()];
        let fv = first_variation_pairing(&pot, &u, &xi, &sp).unwrap();
        let e = energy(&pot, &u, None, &sp).unwrap().total;
        let grad_norm = crate::field::max_gradient_norm(&u.grid, &sp, &xi);
        let c = first_variation_bound_constant(1);
        assert!(fv.abs() <= c * grad_norm * e, "|fv| = {} bound = {}", fv.abs(), c * grad_norm * e);
    }

    #[test]
    fn lambda_consistency_examples() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let sp = Spectral::new(&grid);
        let zero = PhaseField::constant(grid, &[0.0], 0.1).unwrap();
        let (l, defect) = lambda_consistency(&pot, &zero, &sp).unwrap();
        assert_eq!(l, 0.0);
        assert!(defect < 1e-10);

        let quart = PhaseField::constant(grid, &[0.25], 0.1).unwrap();
        let (l, defect) = lambda_consistency(&pot, &quart, &sp).unwrap();
        let expect = 36.0 * 0.25 * 0.75 * 0.5 / 0.1;
        assert!((l - expect).abs() < 1e-12 * expect);
        assert!(defect < 1e-10);

        // Odd-symmetric double-well state: W' odd composed with odd-symmetric
        // u integrates to zero.
        let dw = DoubleWell::new();
        let vals: Vec<f64> = (0..64)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / 64.0).sin())
            .collect();
        let odd = PhaseField::new(grid, vec![vals], 0.1, 0.0).unwrap();
        let (l, _) = lambda_consistency(&dw, &odd, &sp).unwrap();
        assert!(l.abs() < 1e-12);
    }

    #[test]
    fn lambda_requires_scalar() {
        let pot = TripleWell::new();
        let grid = Grid::new(2, 16, 1.0).unwrap();
        let u = PhaseField::constant(grid, &[0.0, 0.0], 0.1).unwrap();
        let sp = Spectral::new(&grid);
        assert!(matches!(lambda_consistency(&pot, &u, &sp), Err(Error::RequiresScalar(2))));
    }

    #[test]
    fn dissipation_residual_requires_two_states() {
        assert!(matches!(
            dissipation_residual(&[]),
            Err(Error::TooFewStates { needed: 2, got: 0 })
        ));
    }
}
