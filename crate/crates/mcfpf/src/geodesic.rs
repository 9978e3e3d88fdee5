//! Geodesic distances in the degenerate metric 2 W(u) <.,.> on state space,
//! the surface-tension matrix sigma_ij between wells, the distance-to-well
//! primitives and optimal 1D transition profiles.
//!
//! The length of a discrete curve gamma_0..gamma_{M-1} is the midpoint rule
//!
//! ```text
//!   L = sum_k sqrt(2 W((gamma_k + gamma_{k+1})/2)) |gamma_{k+1} - gamma_k|,
//! ```
//!
//! minimized over interior nodes with the endpoints fixed. The metric
//! degenerates at the wells (W = 0), so after every accepted descent step the
//! nodes are redistributed to equal Euclidean chord length; this prevents
//! node pile-up where the integrand vanishes.

use crate::error::{Error, Result};
use crate::numerics::adaptive_simpson;
use crate::potential::Potential;

/// Discrete curve in state space with its weighted length.
#[derive(Debug, Clone)]
pub struct GeodesicCurve {
    /// M nodes, each of dimension N; endpoints are the query points.
    pub nodes: Vec<Vec<f64>>,
    /// Value of the discretized length functional.
    pub length: f64,
}

/// Surface tensions sigma_ij = d_W(alpha_i, alpha_j).
///
/// Symmetric with zero diagonal and positive off-diagonal entries; the
/// triangle inequality holds up to solver tolerance.
#[derive(Debug, Clone)]
pub struct SurfaceTensionMatrix {
    pub sigma: Vec<Vec<f64>>,
}

impl SurfaceTensionMatrix {
    pub fn phases(&self) -> usize {
        self.sigma.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sigma[i][j]
    }

    /// Largest violation of sigma_ij <= sigma_ik + sigma_kj over all triples
    /// (negative when the triangle inequality holds strictly).
    pub fn triangle_defect(&self) -> f64 {
        let p = self.phases();
        let mut worst = f64::NEG_INFINITY;
        for i in 0..p {
            for j in 0..p {
                for k in 0..p {
                    worst = worst.max(self.sigma[i][j] - self.sigma[i][k] - self.sigma[k][j]);
                }
            }
        }
        worst
    }
}

/// Parameters of the curve optimizer.
#[derive(Debug, Clone, Copy)]
pub struct GeodesicParams {
    /// Number of curve nodes including endpoints (>= 3).
    pub nodes: usize,
    /// Relative length change per sweep below which iteration stops.
    pub tol: f64,
    /// Hard cap on descent sweeps.
    pub iter_cap: usize,
}

impl Default for GeodesicParams {
    fn default() -> Self {
        Self { nodes: 129, tol: 1e-10, iter_cap: 100_000 }
    }
}

fn weight(pot: &dyn Potential, u: &[f64]) -> f64 {
    (2.0 * pot.value(u).max(0.0)).sqrt()
}

fn curve_length(pot: &dyn Potential, nodes: &[Vec<f64>]) -> f64 {
    let n = pot.dim();
    let mut mid = vec![0.0; n];
    let mut total = 0.0;
    for k in 0..nodes.len() - 1 {
        let (a, b) = (&nodes[k], &nodes[k + 1]);
        let mut seg = 0.0;
        for c in 0..n {
            mid[c] = 0.5 * (a[c] + b[c]);
            let d = b[c] - a[c];
            seg += d * d;
        }
        total += weight(pot, &mid) * seg.sqrt();
    }
    total
}

/// Gradient of the discrete length w.r.t. interior nodes. The weight's
/// gradient dW / sqrt(2W) is clamped to zero where W vanishes.
fn length_gradient(pot: &dyn Potential, nodes: &[Vec<f64>], grad: &mut [Vec<f64>]) {
    let n = pot.dim();
    let m = nodes.len();
    for g in grad.iter_mut() {
        g.iter_mut().for_each(|x| *x = 0.0);
    }
    let mut mid = vec![0.0; n];
    let mut dw = vec![0.0; n];
    for k in 0..m - 1 {
        let (a, b) = (&nodes[k], &nodes[k + 1]);
        let mut seg = 0.0;
        for c in 0..n {
            mid[c] = 0.5 * (a[c] + b[c]);
            let d = b[c] - a[c];
            seg += d * d;
        }
        let seg = seg.sqrt();
        let w2 = 2.0 * pot.value(&mid).max(0.0);
        let w = w2.sqrt();
        // d/dnode [ w(mid) * seg ]: chord direction term + weight term.
        let dwdmid_scale = if w2 > 1e-28 { seg / w } else { 0.0 };
        pot.gradient(&mid, &mut dw);
        for c in 0..n {
            let chord = if seg > 1e-300 { (b[c] - a[c]) / seg } else { 0.0 };
            let wterm = 0.5 * dwdmid_scale * dw[c];
            if k > 0 {
                grad[k - 1][c] += -w * chord + wterm;
            }
            if k + 1 < m - 1 {
                grad[k][c] += w * chord + wterm;
            }
        }
    }
}

/// Resamples the polyline so nodes sit at equal Euclidean arclength.
fn redistribute(nodes: &mut [Vec<f64>]) {
    let m = nodes.len();
    let n = nodes[0].len();
    let mut cum = vec![0.0; m];
    for k in 1..m {
        let mut seg = 0.0;
        for c in 0..n {
            let d = nodes[k][c] - nodes[k - 1][c];
            seg += d * d;
        }
        cum[k] = cum[k - 1] + seg.sqrt();
    }
    let total = cum[m - 1];
    if total <= 1e-300 {
        return;
    }
    let old: Vec<Vec<f64>> = nodes.to_vec();
    let mut seg_idx = 0;
    for (k, node) in nodes.iter_mut().enumerate().take(m - 1).skip(1) {
        let target = total * k as f64 / (m - 1) as f64;
        while seg_idx + 2 < m && cum[seg_idx + 1] < target {
            seg_idx += 1;
        }
        let denom = cum[seg_idx + 1] - cum[seg_idx];
        let t = if denom > 1e-300 { (target - cum[seg_idx]) / denom } else { 0.0 };
        for c in 0..n {
            node[c] = old[seg_idx][c] + t * (old[seg_idx + 1][c] - old[seg_idx][c]);
        }
    }
}

fn optimize_curve(
    pot: &dyn Potential,
    mut nodes: Vec<Vec<f64>>,
    params: &GeodesicParams,
) -> Result<GeodesicCurve> {
    let m = nodes.len();
    let dim = pot.dim();
    redistribute(&mut nodes);
    let mut length = curve_length(pot, &nodes);
    if length == 0.0 {
        return Ok(GeodesicCurve { nodes, length });
    }
    let mut grad = vec![vec![0.0; dim]; m - 2];
    let mut step = 1e-2;
    let mut trial = nodes.clone();
    for _ in 0..params.iter_cap {
        length_gradient(pot, &nodes, &mut grad);
        let gnorm_sq: f64 = grad.iter().flat_map(|g| g.iter().map(|x| x * x)).sum();
        if gnorm_sq == 0.0 {
            return Ok(GeodesicCurve { nodes, length });
        }
        // Backtracking line search on the interior nodes.
        let mut accepted = false;
        for _ in 0..60 {
            for k in 0..m - 2 {
                for c in 0..dim {
                    trial[k + 1][c] = nodes[k + 1][c] - step * grad[k][c];
                }
            }
            let new_len = curve_length(pot, &trial);
            if new_len < length {
                for k in 1..m - 1 {
                    nodes[k].copy_from_slice(&trial[k]);
                }
                redistribute(&mut nodes);
                let redistributed = curve_length(pot, &nodes);
                let rel_change = (length - redistributed).abs() / length.max(1e-300);
                length = redistributed;
                step *= 1.5;
                accepted = true;
                if rel_change < params.tol {
                    return Ok(GeodesicCurve { nodes, length });
                }
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                break;
            }
        }
        if !accepted {
            // No descent direction at this resolution: converged.
            return Ok(GeodesicCurve { nodes, length });
        }
        trial = nodes.clone();
    }
    Err(Error::GeodesicStalled {
        iterations: params.iter_cap,
        best_length: length,
        best: Box::new(GeodesicCurve { nodes, length }),
    })
}

fn straight_segment(a: &[f64], b: &[f64], m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|k| {
            let t = k as f64 / (m - 1) as f64;
            a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
        })
        .collect()
}

fn two_leg_path(a: &[f64], via: &[f64], b: &[f64], m: usize) -> Vec<Vec<f64>> {
    let half = m / 2;
    let mut nodes = straight_segment(a, via, half + 1);
    nodes.extend(straight_segment(via, b, m - half).into_iter().skip(1));
    nodes
}

/// Geodesic distance d_W(a, b) as an optimized discrete curve.
///
/// Initialization is the straight segment plus, for vector state spaces,
/// restarts threading each other well; geodesics need not be unique and the
/// best local minimum found is returned.
pub fn geodesic_distance(
    pot: &dyn Potential,
    a: &[f64],
    b: &[f64],
    params: &GeodesicParams,
) -> Result<GeodesicCurve> {
    assert!(params.nodes >= 3, "need at least 3 curve nodes");
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let same = a.iter().zip(b).all(|(x, y)| x == y);
    if same {
        return Ok(GeodesicCurve { nodes: straight_segment(a, b, params.nodes), length: 0.0 });
    }
    let mut best: Option<GeodesicCurve> = None;
    let mut stalled = None;
    let mut consider = |result: Result<GeodesicCurve>| match result {
        Ok(c) => {
            if best.as_ref().is_none_or(|b| c.length < b.length) {
                best = Some(c);
            }
        }
        Err(e) => stalled = Some(e),
    };
    consider(optimize_curve(pot, straight_segment(a, b, params.nodes), params));
    if pot.dim() >= 2 {
        for well in pot.wells() {
            let near_endpoint = |p: &[f64]| {
                well.iter().zip(p).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() < 1e-20
            };
            if near_endpoint(a) || near_endpoint(b) {
                continue;
            }
            consider(optimize_curve(pot, two_leg_path(a, well, b, params.nodes), params));
        }
    }
    match (best, stalled) {
        (Some(c), _) => Ok(c),
        (None, Some(e)) => Err(e),
        (None, None) => unreachable!("at least one optimization attempted"),
    }
}

/// Surface-tension matrix: sigma_ij from geodesics between wells, the (i, j)
/// and (j, i) runs averaged, diagonal forced to exact zero.
pub fn surface_tension_matrix(
    pot: &dyn Potential,
    params: &GeodesicParams,
) -> Result<SurfaceTensionMatrix> {
    let wells = pot.wells();
    let p = wells.len();
    let mut sigma = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in i + 1..p {
            let fwd = geodesic_distance(pot, &wells[i], &wells[j], params)?;
            let bwd = geodesic_distance(pot, &wells[j], &wells[i], params)?;
            let s = 0.5 * (fwd.length + bwd.length);
            sigma[i][j] = s;
            sigma[j][i] = s;
        }
    }
    Ok(SurfaceTensionMatrix { sigma })
}

/// Distance to the i-th well: d_W(u, alpha_i).
///
/// For scalar potentials this is the closed-form primitive
/// |integral_{alpha_i}^{u} sqrt(2 W)| by adaptive quadrature; for vector
/// state spaces it falls back to the curve optimizer.
pub fn distance_to_well(
    pot: &dyn Potential,
    well: usize,
    u: &[f64],
    params: &GeodesicParams,
) -> Result<f64> {
    let wells = pot.wells();
    if well >= wells.len() {
        return Err(Error::WellIndex { index: well, wells: wells.len() });
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    if pot.dim() == 1 {
        let a = wells[well][0];
        let b = u[0];
        let val = adaptive_simpson(&|s| weight(pot, &[s]), a, b, 1e-12);
        Ok(val.abs())
    } else {
        Ok(geodesic_distance(pot, u, &wells[well], params)?.length)
    }
}

/// Tabulated 1D transition profile q(s) between two wells, solving
/// q'' = dW(q) with q(-inf) = alpha_i, q(+inf) = alpha_j.
///
/// Evaluation is linear interpolation on the sample grid, clamped to the
/// wells outside [-half_width, half_width].
#[derive(Debug, Clone)]
pub struct TransitionProfile {
    /// Uniform sample abscissae on [-half_width, half_width].
    pub s: Vec<f64>,
    /// Sample values, component-major: values[c][k] = q_c(s_k).
    pub values: Vec<Vec<f64>>,
    pub well_left: Vec<f64>,
    pub well_right: Vec<f64>,
    pub half_width: f64,
}

impl TransitionProfile {
    pub fn samples(&self) -> usize {
        self.s.len()
    }

    /// q(s) by clamped linear interpolation, written into `out`.
    pub fn eval_into(&self, s: f64, out: &mut [f64]) {
        let m = self.s.len();
        if s <= self.s[0] {
            out.copy_from_slice(&self.well_left);
            return;
        }
        if s >= self.s[m - 1] {
            out.copy_from_slice(&self.well_right);
            return;
        }
        let ds = self.s[1] - self.s[0];
        let x = (s - self.s[0]) / ds;
        let k = (x.floor() as usize).min(m - 2);
        let t = x - k as f64;
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.values[c][k] + t * (self.values[c][k + 1] - self.values[c][k]);
        }
    }

    pub fn eval(&self, s: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.values.len()];
        self.eval_into(s, &mut out);
        out
    }

    /// Max relative equipartition gap |q'|^2/2 vs W(q) over interior samples
    /// whose energy density exceeds 1e-4 of the peak. The ratio is
    /// meaningless in the well tails: both sides vanish there, and the
    /// clamped-interval solution carries a first-integral offset of order
    /// exp(-2 rate S) that dominates once the density is comparably small.
    pub fn equipartition_gap(&self, pot: &dyn Potential) -> f64 {
        let m = self.s.len();
        let n = self.values.len();
        let ds = self.s[1] - self.s[0];
        let mut q = vec![0.0; n];
        let mut densities = Vec::with_capacity(m - 2);
        for k in 1..m - 1 {
            let mut kinetic = 0.0;
            for c in 0..n {
                let d = (self.values[c][k + 1] - self.values[c][k - 1]) / (2.0 * ds);
                kinetic += d * d;
            }
            kinetic *= 0.5;
            for (c, qc) in q.iter_mut().enumerate() {
                *qc = self.values[c][k];
            }
            densities.push((kinetic, pot.value(&q)));
        }
        let peak = densities
            .iter()
            .map(|(a, b)| a.max(*b))
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let mut gap: f64 = 0.0;
        for (kin, pot_v) in densities {
            if kin.max(pot_v) >= 1e-4 * peak {
                gap = gap.max((kin - pot_v).abs() / kin.max(pot_v));
            }
        }
        gap
    }
}

/// Parameters for the profile relaxation.
#[derive(Debug, Clone, Copy)]
pub struct ProfileParams {
    /// Half width S of the computational interval [-S, S].
    pub half_width: f64,
    /// Number of samples (>= 16).
    pub samples: usize,
    /// Steady-state residual: max |q'' - dW(q)| below this stops.
    pub residual_tol: f64,
    pub iter_cap: usize,
}

impl Default for ProfileParams {
    fn default() -> Self {
        Self { half_width: 8.0, samples: 4097, residual_tol: 1e-8, iter_cap: 2_000_000 }
    }
}

/// Optimal transition profile between wells i and j by relaxation: the 1D
/// gradient flow q_t = q_ss - dW(q) with clamped ends is run to a steady
/// state, then the profile is recentered so the geodesic-arclength midpoint
/// sits at s = 0.
pub fn optimal_profile(
    pot: &dyn Potential,
    i: usize,
    j: usize,
    params: &ProfileParams,
) -> Result<TransitionProfile> {
    let wells = pot.wells();
    if i >= wells.len() {
        return Err(Error::WellIndex { index: i, wells: wells.len() });
    }
    if j >= wells.len() {
        return Err(Error::WellIndex { index: j, wells: wells.len() });
    }
    assert_ne!(i, j, "profile endpoints must be distinct wells");
    let n = pot.dim();
    let m = params.samples;
    assert!(m >= 16, "need at least 16 profile samples");
    let s_grid: Vec<f64> = (0..m)
        .map(|k| -params.half_width + 2.0 * params.half_width * k as f64 / (m - 1) as f64)
        .collect();
    let ds = s_grid[1] - s_grid[0];

    // tanh ramp between the wells as the starting guess.
    let mut q = vec![vec![0.0; m]; n];
    for k in 0..m {
        let t = 0.5 * (1.0 + (2.0 * s_grid[k]).tanh());
        for (c, qc) in q.iter_mut().enumerate() {
            qc[k] = wells[i][c] + t * (wells[j][c] - wells[i][c]);
        }
    }

    // Semi-implicit relaxation: diffusion by a tridiagonal (Thomas) solve,
    // reaction explicit. Stable for dt below the reaction scale.
    let dt = 0.4 / (pot.perturbation_hessian_bound() + 10.0);
    let alpha = dt / (ds * ds);
    let mut state = vec![0.0; n];
    let mut dw = vec![0.0; n];
    let mut rhs = vec![0.0; m];
    let mut cprime = vec![0.0; m];
    let mut dprime = vec![0.0; m];
    let mut residual = f64::INFINITY;
    let mut iterations = 0usize;
    while iterations < params.iter_cap {
        iterations += 1;
        // Assemble the reaction term cellwise.
        for c in 0..n {
            rhs[0] = q[c][0];
            rhs[m - 1] = q[c][m - 1];
            for k in 1..m - 1 {
                for (cc, sc) in state.iter_mut().enumerate() {
                    *sc = q[cc][k];
                }
                pot.gradient(&state, &mut dw);
                rhs[k] = q[c][k] - dt * dw[c];
            }
            // Thomas solve of (I - alpha D2) q_new = rhs, Dirichlet ends.
            cprime[0] = 0.0;
            dprime[0] = rhs[0];
            for k in 1..m - 1 {
                let a = -alpha;
                let b = 1.0 + 2.0 * alpha;
                let cc = -alpha;
                let denom = b - a * cprime[k - 1];
                cprime[k] = cc / denom;
                dprime[k] = (rhs[k] - a * dprime[k - 1]) / denom;
            }
            dprime[m - 1] = rhs[m - 1];
            q[c][m - 1] = dprime[m - 1];
            for k in (1..m - 1).rev() {
                q[c][k] = dprime[k] - cprime[k] * q[c][k + 1];
            }
            q[c][0] = rhs[0];
        }
        // Check the steady-state residual every few sweeps.
        if iterations % 25 == 0 {
            residual = 0.0;
            for k in 1..m - 1 {
                for (cc, sc) in state.iter_mut().enumerate() {
                    *sc = q[cc][k];
                }
                pot.gradient(&state, &mut dw);
                for c in 0..n {
                    let d2 = (q[c][k + 1] - 2.0 * q[c][k] + q[c][k - 1]) / (ds * ds);
                    residual = residual.max((d2 - dw[c]).abs());
                }
            }
            if residual < params.residual_tol {
                break;
            }
        }
    }
    if residual >= params.residual_tol {
        return Err(Error::ProfileNotConverged { residual, tol: params.residual_tol });
    }

    // Recenter: find where the cumulative geodesic arclength reaches half.
    let mut cum = vec![0.0; m];
    for k in 1..m {
        let mut seg = 0.0;
        for qc in q.iter() {
            let d = qc[k] - qc[k - 1];
            seg += d * d;
        }
        for (cc, sc) in state.iter_mut().enumerate() {
            *sc = 0.5 * (q[cc][k] + q[cc][k - 1]);
        }
        cum[k] = cum[k - 1] + weight(pot, &state) * seg.sqrt();
    }
    let half = 0.5 * cum[m - 1];
    let mut mid_idx = 0;
    while mid_idx + 1 < m && cum[mid_idx + 1] < half {
        mid_idx += 1;
    }
    let t = if cum[mid_idx + 1] > cum[mid_idx] {
        (half - cum[mid_idx]) / (cum[mid_idx + 1] - cum[mid_idx])
    } else {
        0.0
    };
    let s_mid = s_grid[mid_idx] + t * ds;

    // Resample onto the symmetric grid around the midpoint.
    let tmp = TransitionProfile {
        s: s_grid.clone(),
        values: q,
        well_left: wells[i].clone(),
        well_right: wells[j].clone(),
        half_width: params.half_width,
    };
    let mut values = vec![vec![0.0; m]; n];
    let mut buf = vec![0.0; n];
    for (k, &sk) in s_grid.iter().enumerate() {
        tmp.eval_into(sk + s_mid, &mut buf);
        for c in 0..n {
            values[c][k] = buf[c];
        }
    }
    Ok(TransitionProfile {
        s: s_grid,
        values,
        well_left: wells[i].clone(),
        well_right: wells[j].clone(),
        half_width: params.half_width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{DoubleWell, TripleWell, UnitWell01};

    const SIGMA_DW: f64 = 0.9428090415820634; // 2 sqrt(2) / 3

    #[test]
    fn coincident_endpoints_have_zero_length() {
        let pot = DoubleWell::new();
        let c = geodesic_distance(&pot, &[1.0], &[1.0], &GeodesicParams::default()).unwrap();
        assert_eq!(c.length, 0.0);
    }

    #[test]
    fn double_well_tension_matches_quadrature() {
        let pot = DoubleWell::new();
        let c = geodesic_distance(&pot, &[-1.0], &[1.0], &GeodesicParams::default()).unwrap();
        assert!((c.length - SIGMA_DW).abs() < 1e-3, "length {}", c.length);
    }

    #[test]
    fn unit_well_tension_is_one() {
        let pot = UnitWell01::new();
        let c = geodesic_distance(&pot, &[0.0], &[1.0], &GeodesicParams::default()).unwrap();
        assert!((c.length - 1.0).abs() < 1e-3, "length {}", c.length);
    }

    #[test]
    fn sigma_matrix_shape_and_symmetry() {
        let pot = DoubleWell::new();
        let sm = surface_tension_matrix(&pot, &GeodesicParams::default()).unwrap();
        assert_eq!(sm.get(0, 0), 0.0);
        assert_eq!(sm.get(1, 1), 0.0);
        assert_eq!(sm.get(0, 1), sm.get(1, 0));
        assert!((sm.get(0, 1) - SIGMA_DW).abs() < 1e-3);
    }

    #[test]
    fn triple_well_tensions_symmetric_and_triangular() {
        let pot = TripleWell::new();
        let params = GeodesicParams { nodes: 65, tol: 1e-9, iter_cap: 100_000 };
        let sm = surface_tension_matrix(&pot, &params).unwrap();
        let offs = [sm.get(0, 1), sm.get(0, 2), sm.get(1, 2)];
        for s in offs {
            assert!(s > 0.0);
            assert!((s - offs[0]).abs() < 1e-3, "asymmetric sigma {offs:?}");
        }
        assert!(sm.triangle_defect() <= 1e-9);
    }

    #[test]
    fn refinement_never_increases_length() {
        let pot = DoubleWell::new();
        for m in [17, 33, 65] {
            let coarse = geodesic_distance(
                &pot,
                &[-1.0],
                &[1.0],
                &GeodesicParams { nodes: m, tol: 1e-12, iter_cap: 200_000 },
            )
            .unwrap();
            let fine = geodesic_distance(
                &pot,
                &[-1.0],
                &[1.0],
                &GeodesicParams { nodes: 2 * m - 1, tol: 1e-12, iter_cap: 200_000 },
            )
            .unwrap();
            assert!(
                fine.length <= coarse.length + 1e-9,
                "refinement increased length: {} -> {}",
                coarse.length,
                fine.length
            );
        }
    }

    #[test]
    fn distance_to_well_examples() {
        let uw = UnitWell01::new();
        let p = GeodesicParams::default();
        assert_eq!(distance_to_well(&uw, 0, &[0.0], &p).unwrap(), 0.0);
        assert!((distance_to_well(&uw, 0, &[1.0], &p).unwrap() - 1.0).abs() < 1e-6);
        let dw = DoubleWell::new();
        let expect = std::f64::consts::SQRT_2 / 3.0;
        assert!((distance_to_well(&dw, 0, &[0.0], &p).unwrap() - expect).abs() < 1e-6);
    }

    #[test]
    fn distance_to_well_matches_sigma_between_wells() {
        let pot = TripleWell::new();
        let params = GeodesicParams { nodes: 65, tol: 1e-9, iter_cap: 100_000 };
        let sm = surface_tension_matrix(&pot, &params).unwrap();
        let d = distance_to_well(&pot, 1, &pot.wells()[0].clone(), &params).unwrap();
        assert!((d - sm.get(0, 1)).abs() < 2e-3);
    }

    #[test]
    fn lipschitz_bound_along_curve() {
        // |phi_i(b) - phi_i(a)| <= max sqrt(2W) on the segment * |b - a|.
        let pot = DoubleWell::new();
        let params = GeodesicParams { nodes: 33, tol: 1e-10, iter_cap: 100_000 };
        let curve = geodesic_distance(&pot, &[-1.0], &[1.0], &params).unwrap();
        for k in 0..curve.nodes.len() - 1 {
            let a = &curve.nodes[k];
            let b = &curve.nodes[k + 1];
            let pa = distance_to_well(&pot, 0, a, &params).unwrap();
            let pb = distance_to_well(&pot, 0, b, &params).unwrap();
            let mut wmax: f64 = 0.0;
            for t in 0..=8 {
                let u = a[0] + (b[0] - a[0]) * t as f64 / 8.0;
                wmax = wmax.max(weight(&pot, &[u]));
            }
            let seg = (b[0] - a[0]).abs();
            assert!(
                (pb - pa).abs() <= wmax * seg + 1e-9,
                "Lipschitz violated: {} vs {}",
                (pb - pa).abs(),
                wmax * seg
            );
        }
    }

    #[test]
    fn unit_well_profile_is_logistic() {
        let pot = UnitWell01::new();
        let prof = optimal_profile(&pot, 0, 1, &ProfileParams::default()).unwrap();
        let mut q = [0.0];
        for s in [-1.0, -0.4, 0.0, 0.3, 0.9] {
            prof.eval_into(s, &mut q);
            let expect = 1.0 / (1.0 + (-6.0 * s).exp());
            assert!((q[0] - expect).abs() < 1e-4, "q({s}) = {} vs {}", q[0], expect);
        }
    }

    #[test]
    fn double_well_profile_odd_symmetry() {
        let pot = DoubleWell::new();
        let prof = optimal_profile(&pot, 0, 1, &ProfileParams::default()).unwrap();
        let q0 = prof.eval(0.0)[0];
        assert!(q0.abs() < 1e-6, "profile midpoint {q0}");
    }

    #[test]
    fn profile_equipartition() {
        for pot in [
            Box::new(DoubleWell::new()) as Box<dyn Potential>,
            Box::new(UnitWell01::new()),
        ] {
            let prof = optimal_profile(pot.as_ref(), 0, 1, &ProfileParams::default()).unwrap();
            let gap = prof.equipartition_gap(pot.as_ref());
            assert!(gap < 1e-3, "{}: equipartition gap {gap}", pot.name());
        }
    }
}
