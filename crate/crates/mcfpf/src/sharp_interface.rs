//! Sharp-interface geometry extracted from a phase field: the nearest-well
//! partition, sub-cell interface meshes (marching squares in 2D), weighted
//! partition energy, junction angles, radius estimates, the convergence-gap
//! monitor and normal-velocity/curvature sampling.
//!
//! Perimeters always come from sub-cell contours, never from lattice total
//! variation of the labels: label TV overestimates length anisotropically
//! (up to sqrt(2) in 2D) and would poison the convergence monitor.

use crate::error::{Error, Result};
use crate::field::{Grid, PhaseField};
use crate::geodesic::SurfaceTensionMatrix;
use crate::numerics::periodic_delta;
use crate::potential::Potential;

/// Per-cell phase labels (nearest well, ties to the lowest index).
#[derive(Debug, Clone)]
pub struct Partition {
    pub labels: Vec<usize>,
    pub grid: Grid,
    pub phases: usize,
}

/// One sub-cell interface element between phases `pair.0 < pair.1`.
#[derive(Debug, Clone, Copy)]
pub struct InterfaceElement {
    /// Segment endpoints (2D) or the transition point twice (1D).
    pub endpoints: [[f64; 2]; 2],
    /// Element midpoint.
    pub midpoint: [f64; 2],
    /// Unordered phase pair (i, j), i < j.
    pub pair: (usize, usize),
    /// Length (2D) or 1 (1D counting measure).
    pub measure: f64,
    /// Unit normal pointing into phase `pair.0`.
    pub normal: [f64; 2],
}

/// A detected junction: three or more pairwise contours meeting within a
/// two-cell radius.
#[derive(Debug, Clone)]
pub struct Junction {
    pub position: [f64; 2],
    pub pairs: Vec<(usize, usize)>,
}

/// Sub-cell interface mesh with junction list.
#[derive(Debug, Clone)]
pub struct InterfaceMesh {
    pub dim: usize,
    pub grid: Grid,
    pub elements: Vec<InterfaceElement>,
    pub junctions: Vec<Junction>,
}

impl InterfaceMesh {
    /// Total interface measure (length in 2D, transition count in 1D).
    pub fn total_measure(&self) -> f64 {
        self.elements.iter().map(|e| e.measure).sum()
    }
}

/// Nearest-well labels: label(x) = argmin_j |u(x) - alpha_j|, ties broken by
/// the lowest index.
pub fn extract_partition(pot: &dyn Potential, u: &PhaseField) -> Partition {
    let wells = pot.wells();
    let ncomp = u.num_components();
    let mut state = vec![0.0; ncomp];
    let labels = (0..u.grid.cells())
        .map(|idx| {
            u.state_at(idx, &mut state);
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (j, w) in wells.iter().enumerate() {
                let d: f64 = state.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            best
        })
        .collect();
    Partition { labels, grid: u.grid, phases: wells.len() }
}

/// Pairwise discriminant psi_ij(u) = |u - alpha_i| - |u - alpha_j|;
/// negative where u is closer to well i.
fn discriminant(wells: &[Vec<f64>], i: usize, j: usize, state: &[f64]) -> f64 {
    let di: f64 = state.iter().zip(&wells[i]).map(|(a, b)| (a - b) * (a - b)).sum();
    let dj: f64 = state.iter().zip(&wells[j]).map(|(a, b)| (a - b) * (a - b)).sum();
    di.sqrt() - dj.sqrt()
}

/// Extracts the interface mesh. 1D: transition points by linear interpolation
/// of the pairwise discriminant. 2D: marching squares of psi_ij restricted to
/// cells where i, j are the locally dominant wells. 3D is unsupported.
pub fn interface_mesh(pot: &dyn Potential, u: &PhaseField) -> Result<InterfaceMesh> {
    match u.grid.dim() {
        1 => interface_mesh_1d(pot, u),
        2 => interface_mesh_2d(pot, u),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

fn interface_mesh_1d(pot: &dyn Potential, u: &PhaseField) -> Result<InterfaceMesh> {
    let part = extract_partition(pot, u);
    let grid = u.grid;
    let n = grid.n();
    let h = grid.spacing();
    let ncomp = u.num_components();
    let wells = pot.wells();
    let mut sa = vec![0.0; ncomp];
    let mut sb = vec![0.0; ncomp];
    let mut elements = Vec::new();
    for idx in 0..n {
        let next = (idx + 1) % n;
        let (la, lb) = (part.labels[idx], part.labels[next]);
        if la == lb {
            continue;
        }
        let (i, j) = (la.min(lb), la.max(lb));
        u.state_at(idx, &mut sa);
        u.state_at(next, &mut sb);
        let pa = discriminant(wells, i, j, &sa);
        let pb = discriminant(wells, i, j, &sb);
        let t = if (pb - pa).abs() > 1e-300 { pa / (pa - pb) } else { 0.5 };
        let x = (idx as f64 + t.clamp(0.0, 1.0)) * h % grid.box_len();
        // Normal points into phase i (the lower index): +1 if i sits right.
        let normal = if la == i { [-1.0, 0.0] } else { [1.0, 0.0] };
        elements.push(InterfaceElement {
            endpoints: [[x, 0.0], [x, 0.0]],
            midpoint: [x, 0.0],
            pair: (i, j),
            measure: 1.0,
            normal,
        });
    }
    Ok(InterfaceMesh { dim: 1, grid, elements, junctions: Vec::new() })
}

/// Marching-squares edge interpolation: crossing on the segment a-b.
fn edge_cross(pa: f64, pb: f64) -> f64 {
    if (pa - pb).abs() > 1e-300 {
        (pa / (pa - pb)).clamp(0.0, 1.0)
    } else {
        0.5
    }
}

fn interface_mesh_2d(pot: &dyn Potential, u: &PhaseField) -> Result<InterfaceMesh> {
    let part = extract_partition(pot, u);
    let grid = u.grid;
    let n = grid.n();
    let h = grid.spacing();
    let ncomp = u.num_components();
    let wells = pot.wells();
    let mut elements = Vec::new();
    let mut corner_state = vec![vec![0.0; ncomp]; 4];

    for cy in 0..n {
        for cx in 0..n {
            // Corners in marching-squares order: (0,0), (1,0), (1,1), (0,1).
            let ids = [
                grid.index(&[cx, cy]),
                grid.index(&[(cx + 1) % n, cy]),
                grid.index(&[(cx + 1) % n, (cy + 1) % n]),
                grid.index(&[cx, (cy + 1) % n]),
            ];
            let labels = [
                part.labels[ids[0]],
                part.labels[ids[1]],
                part.labels[ids[2]],
                part.labels[ids[3]],
            ];
            let mut present: Vec<usize> = labels.to_vec();
            present.sort_unstable();
            present.dedup();
            if present.len() < 2 {
                continue;
            }
            for (k, id) in ids.iter().enumerate() {
                u.state_at(*id, &mut corner_state[k]);
            }
            let multi = present.len() > 2;
            for a in 0..present.len() {
                for b in a + 1..present.len() {
                    let (i, j) = (present[a], present[b]);
                    let psi: [f64; 4] = std::array::from_fn(|k| {
                        discriminant(wells, i, j, &corner_state[k])
                    });
                    emit_cell_segments(
                        &mut elements,
                        &psi,
                        (i, j),
                        cx,
                        cy,
                        h,
                        grid.box_len(),
                        multi.then_some((&corner_state, wells)),
                    );
                }
            }
        }
    }
    let junctions = detect_junctions(&grid, &elements);
    Ok(InterfaceMesh { dim: 2, grid, elements, junctions })
}

/// Emits the marching-squares segments of psi = 0 inside one cell.
/// In junction cells (`dominance` set) segments are kept only where the two
/// nearest wells at the segment midpoint are exactly the queried pair.
#[allow(clippy::too_many_arguments)]
fn emit_cell_segments(
    elements: &mut Vec<InterfaceElement>,
    psi: &[f64; 4],
    pair: (usize, usize),
    cx: usize,
    cy: usize,
    h: f64,
    box_len: f64,
    dominance: Option<(&Vec<Vec<f64>>, &[Vec<f64>])>,
) {
    // Corner k offsets within the cell.
    const OFF: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    // Edges as corner pairs: bottom, right, top, left.
    const EDGES: [(usize, usize); 4] = [(0, 1), (1, 2), (2, 3), (3, 0)];

    let inside: [bool; 4] = std::array::from_fn(|k| psi[k] < 0.0);
    let case = (inside[0] as usize)
        | (inside[1] as usize) << 1
        | (inside[2] as usize) << 2
        | (inside[3] as usize) << 3;
    if case == 0 || case == 15 {
        return;
    }
    let crossing = |edge: usize| -> [f64; 2] {
        let (a, b) = EDGES[edge];
        let t = edge_cross(psi[a], psi[b]);
        [
            (cx as f64 + OFF[a][0] + t * (OFF[b][0] - OFF[a][0])) * h,
            (cy as f64 + OFF[a][1] + t * (OFF[b][1] - OFF[a][1])) * h,
        ]
    };
    // Edge pairs per case; saddles (5, 10) disambiguated by the center value.
    let center = 0.25 * (psi[0] + psi[1] + psi[2] + psi[3]);
    let segs: &[(usize, usize)] = match case {
        1 => &[(3, 0)],
        2 => &[(0, 1)],
        3 => &[(3, 1)],
        4 => &[(1, 2)],
        5 => {
            if center < 0.0 {
                &[(3, 2), (1, 0)]
            } else {
                &[(3, 0), (1, 2)]
            }
        }
        6 => &[(0, 2)],
        7 => &[(3, 2)],
        8 => &[(2, 3)],
        9 => &[(0, 2)],
        10 => {
            if center < 0.0 {
                &[(0, 1), (2, 3)]
            } else {
                &[(0, 3), (2, 1)]
            }
        }
        11 => &[(1, 2)],
        12 => &[(1, 3)],
        13 => &[(0, 1)],
        14 => &[(3, 0)],
        _ => &[],
    };
    for &(e1, e2) in segs {
        let p1 = crossing(e1);
        let p2 = crossing(e2);
        let dx = p2[0] - p1[0];
        let dy = p2[1] - p1[1];
        let len = (dx * dx + dy * dy).sqrt();
        if len < 1e-12 * h {
            continue;
        }
        let midpoint = [
            (0.5 * (p1[0] + p2[0])).rem_euclid(box_len),
            (0.5 * (p1[1] + p2[1])).rem_euclid(box_len),
        ];
        if let Some((corners, wells)) = dominance {
            // Bilinear state at the midpoint of the cell-local coordinates.
            let lx = (0.5 * (p1[0] + p2[0]) / h - cx as f64).clamp(0.0, 1.0);
            let ly = (0.5 * (p1[1] + p2[1]) / h - cy as f64).clamp(0.0, 1.0);
            let ncomp = corners[0].len();
            let mut state = vec![0.0; ncomp];
            for (c, s) in state.iter_mut().enumerate() {
                *s = corners[0][c] * (1.0 - lx) * (1.0 - ly)
                    + corners[1][c] * lx * (1.0 - ly)
                    + corners[2][c] * lx * ly
                    + corners[3][c] * (1.0 - lx) * ly;
            }
            let mut dist: Vec<(f64, usize)> = wells
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    let d: f64 =
                        state.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum();
                    (d, k)
                })
                .collect();
            dist.sort_by(|a, b| a.0.total_cmp(&b.0));
            let nearest = (dist[0].1.min(dist[1].1), dist[0].1.max(dist[1].1));
            if nearest != pair {
                continue;
            }
        }
        // Normal into phase pair.0: psi < 0 on that side, so walk against
        // the in-cell gradient of psi (bilinear estimate at the midpoint).
        let lx = (0.5 * (p1[0] + p2[0]) / h - cx as f64).clamp(0.0, 1.0);
        let ly = (0.5 * (p1[1] + p2[1]) / h - cy as f64).clamp(0.0, 1.0);
        let dpsi_dx = (psi[1] - psi[0]) * (1.0 - ly) + (psi[2] - psi[3]) * ly;
        let dpsi_dy = (psi[3] - psi[0]) * (1.0 - lx) + (psi[2] - psi[1]) * lx;
        let gnorm = (dpsi_dx * dpsi_dx + dpsi_dy * dpsi_dy).sqrt();
        let normal = if gnorm > 1e-300 {
            [-dpsi_dx / gnorm, -dpsi_dy / gnorm]
        } else {
            // Degenerate: fall back to the segment perpendicular.
            [-dy / len, dx / len]
        };
        elements.push(InterfaceElement {
            endpoints: [
                [p1[0].rem_euclid(box_len), p1[1].rem_euclid(box_len)],
                [p2[0].rem_euclid(box_len), p2[1].rem_euclid(box_len)],
            ],
            midpoint,
            pair,
            measure: len,
            normal,
        });
    }
}

/// Junctions: locations where elements of three or more distinct pairs lie
/// within a two-cell radius. The position is refined by mean shift over all
/// nearby element midpoints (the seed centroid alone is biased toward the
/// seeding arm, which would skew the angle fit). Candidates within three
/// cells are merged.
fn detect_junctions(grid: &Grid, elements: &[InterfaceElement]) -> Vec<Junction> {
    let h = grid.spacing();
    let radius = 2.0 * h;
    let mut junctions: Vec<Junction> = Vec::new();
    for (idx, e) in elements.iter().enumerate() {
        let mut pairs = vec![e.pair];
        for (other_idx, o) in elements.iter().enumerate() {
            if other_idx == idx || o.pair == e.pair {
                continue;
            }
            let d = periodic_pair_distance(grid, &e.midpoint, &o.midpoint);
            if d <= radius && !pairs.contains(&o.pair) {
                pairs.push(o.pair);
            }
        }
        if pairs.len() < 3 {
            continue;
        }
        // Mean shift: centroid of every element midpoint (any pair) within
        // 2.5h, iterated to the symmetric fixed point.
        let mut center = e.midpoint;
        for _ in 0..12 {
            let nearby: Vec<[f64; 2]> = elements
                .iter()
                .filter(|o| periodic_pair_distance(grid, &center, &o.midpoint) <= 2.5 * h)
                .map(|o| o.midpoint)
                .collect();
            if nearby.is_empty() {
                break;
            }
            let next = periodic_centroid(grid, &nearby);
            if periodic_pair_distance(grid, &center, &next) < 1e-3 * h {
                center = next;
                break;
            }
            center = next;
        }
        let duplicate = junctions
            .iter()
            .any(|j| periodic_pair_distance(grid, &j.position, &center) < 3.0 * h);
        if !duplicate {
            pairs.sort_unstable();
            junctions.push(Junction { position: center, pairs });
        }
    }
    junctions
}

fn periodic_pair_distance(grid: &Grid, a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let dx = periodic_delta(a[0], b[0], grid.box_len());
    let dy = periodic_delta(a[1], b[1], grid.box_len());
    (dx * dx + dy * dy).sqrt()
}

/// Centroid on the torus: anchor at the first point, average the wrapped
/// offsets.
fn periodic_centroid(grid: &Grid, points: &[[f64; 2]]) -> [f64; 2] {
    let anchor = points[0];
    let l = grid.box_len();
    let mut acc = [0.0; 2];
    for p in points {
        acc[0] += periodic_delta(p[0], anchor[0], l);
        acc[1] += periodic_delta(p[1], anchor[1], l);
    }
    [
        (anchor[0] + acc[0] / points.len() as f64).rem_euclid(l),
        (anchor[1] + acc[1] / points.len() as f64).rem_euclid(l),
    ]
}

/// Optimal partition energy of a mesh: sum over elements of sigma_ij times
/// the element measure.
pub fn partition_energy(mesh: &InterfaceMesh, sigma: &SurfaceTensionMatrix) -> f64 {
    mesh.elements
        .iter()
        .map(|e| sigma.get(e.pair.0, e.pair.1) * e.measure)
        .sum()
}

/// Angles (degrees) between adjacent interface arms at one junction.
#[derive(Debug, Clone)]
pub struct JunctionAngles {
    pub position: [f64; 2],
    pub angles_deg: Vec<f64>,
}

/// Fits one ray per pair-type to the contour points within 6h of each
/// junction (excluding the innermost 2h) and reports the angles between
/// adjacent rays. The arm direction is the principal axis of its points
/// (robust against small errors in the junction position, unlike raw ray
/// angles), oriented away from the junction. Junctions with fewer than three
/// resolvable arms are skipped; an empty mesh yields an empty list.
pub fn junction_angles(mesh: &InterfaceMesh) -> Vec<JunctionAngles> {
    let h = mesh.grid.spacing();
    let l = mesh.grid.box_len();
    let mut out = Vec::new();
    for junction in &mesh.junctions {
        let mut arm_points: std::collections::BTreeMap<(usize, usize), Vec<[f64; 2]>> =
            std::collections::BTreeMap::new();
        for e in &mesh.elements {
            let dx = periodic_delta(e.midpoint[0], junction.position[0], l);
            let dy = periodic_delta(e.midpoint[1], junction.position[1], l);
            let r = (dx * dx + dy * dy).sqrt();
            if r < 2.0 * h || r > 6.0 * h {
                continue;
            }
            arm_points.entry(e.pair).or_default().push([dx, dy]);
        }
        let mut directions: Vec<f64> = Vec::new();
        for (_, pts) in arm_points {
            if pts.len() < 2 {
                continue;
            }
            let n = pts.len() as f64;
            let cx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
            let cy = pts.iter().map(|p| p[1]).sum::<f64>() / n;
            let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
            for p in &pts {
                let (dx, dy) = (p[0] - cx, p[1] - cy);
                sxx += dx * dx;
                sxy += dx * dy;
                syy += dy * dy;
            }
            // Principal eigenvector of the 2x2 covariance.
            let trace_half = 0.5 * (sxx + syy);
            let det = sxx * syy - sxy * sxy;
            let lam = trace_half + (trace_half * trace_half - det).max(0.0).sqrt();
            let (mut vx, mut vy) = if sxy.abs() > 1e-300 {
                (lam - syy, sxy)
            } else if sxx >= syy {
                (1.0, 0.0)
            } else {
                (0.0, 1.0)
            };
            // Orient away from the junction (the arm centroid side).
            if vx * cx + vy * cy < 0.0 {
                vx = -vx;
                vy = -vy;
            }
            directions.push(vy.atan2(vx));
        }
        if directions.len() < 3 {
            continue;
        }
        directions.sort_by(|a, b| a.total_cmp(b));
        let mut gaps: Vec<f64> = directions
            .windows(2)
            .map(|w| (w[1] - w[0]).to_degrees())
            .collect();
        gaps.push(360.0 - gaps.iter().sum::<f64>());
        out.push(JunctionAngles { position: junction.position, angles_deg: gaps });
    }
    out
}

/// Radius estimate of a 2D phase: R = sqrt(area / pi) with the area counted
/// from the partition labels.
pub fn radius_estimate(part: &Partition, phase: usize) -> Result<f64> {
    if part.grid.dim() != 2 {
        return Err(Error::UnsupportedDimension(part.grid.dim()));
    }
    let count = part.labels.iter().filter(|&&l| l == phase).count();
    if count == 0 {
        return Err(Error::PhaseAbsent(phase));
    }
    let h = part.grid.spacing();
    Ok((count as f64 * h * h / std::f64::consts::PI).sqrt())
}

/// One row of the convergence monitor.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MonitorRow {
    pub time: f64,
    pub energy_eps: f64,
    pub energy_sharp: f64,
    pub gap: f64,
}

/// Time series of the phase-field energy, the sharp partition energy and
/// their gap, plus the trapezoidal time-integrated gap.
#[derive(Debug, Clone)]
pub struct MonitorReport {
    pub rows: Vec<MonitorRow>,
    /// |int E_eps dt - int E(partition) dt| by the trapezoidal rule.
    pub integrated_gap: f64,
    /// Times where E(partition) > E_eps + tol, which would contradict the
    /// liminf inequality and indicates a measurement bug.
    pub liminf_violations: Vec<f64>,
}

/// Builds the monitor from matched diagnostics and mesh series.
pub fn convergence_monitor(
    reports: &[crate::diagnostics::DiagnosticsReport],
    meshes: &[(f64, InterfaceMesh)],
    sigma: &SurfaceTensionMatrix,
    liminf_tol: f64,
) -> Result<MonitorReport> {
    if reports.len() != meshes.len() {
        return Err(Error::TimeGridMismatch(reports.len().min(meshes.len())));
    }
    let mut rows = Vec::with_capacity(reports.len());
    for (k, (report, (t, mesh))) in reports.iter().zip(meshes).enumerate() {
        if (report.time - t).abs() > 1e-12 * t.abs().max(1.0) {
            return Err(Error::TimeGridMismatch(k));
        }
        let energy_sharp = partition_energy(mesh, sigma);
        rows.push(MonitorRow {
            time: *t,
            energy_eps: report.energy.total,
            energy_sharp,
            gap: report.energy.total - energy_sharp,
        });
    }
    let mut int_eps = 0.0;
    let mut int_sharp = 0.0;
    for w in rows.windows(2) {
        let dt = w[1].time - w[0].time;
        int_eps += 0.5 * dt * (w[0].energy_eps + w[1].energy_eps);
        int_sharp += 0.5 * dt * (w[0].energy_sharp + w[1].energy_sharp);
    }
    let liminf_violations = rows
        .iter()
        .filter(|r| r.energy_sharp > r.energy_eps + liminf_tol)
        .map(|r| r.time)
        .collect();
    Ok(MonitorReport {
        rows,
        integrated_gap: (int_eps - int_sharp).abs(),
        liminf_violations,
    })
}

/// Per-element motion sample between two consecutive meshes.
#[derive(Debug, Clone, Copy)]
pub struct MotionSample {
    pub time: f64,
    pub pair: (usize, usize),
    /// Normal velocity, positive when the interface moves out of phase
    /// `pair.0` (a shrinking convex phase has V < 0).
    pub velocity: f64,
    /// Curvature from a local circle fit, positive when the circle center
    /// lies on the `pair.0` side (inward).
    pub curvature: f64,
    /// Set when the closest-point displacement exceeded 3h (likely topology
    /// change); such samples keep their raw values but should be discounted.
    pub flagged: bool,
}

/// Estimates normal velocities (closest-point correspondence between
/// consecutive meshes, displacement capped at 3h) and curvatures (circle fit
/// through the 5 nearest same-pair element midpoints).
pub fn motion_samples(meshes: &[(f64, InterfaceMesh)]) -> Vec<MotionSample> {
    let mut out = Vec::new();
    for w in meshes.windows(2) {
        let (t0, ref m0) = w[0];
        let (t1, ref m1) = w[1];
        let dt = t1 - t0;
        if dt <= 0.0 {
            continue;
        }
        let grid = &m0.grid;
        let cap = 3.0 * grid.spacing();
        for e in &m0.elements {
            // Closest same-pair midpoint in the next mesh.
            let mut best: Option<(f64, [f64; 2])> = None;
            for o in m1.elements.iter().filter(|o| o.pair == e.pair) {
                let d = periodic_pair_distance(grid, &e.midpoint, &o.midpoint);
                if best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, o.midpoint));
                }
            }
            let Some((dist, target)) = best else { continue };
            let flagged = dist > cap;
            let dx = periodic_delta(target[0], e.midpoint[0], grid.box_len());
            let dy = periodic_delta(target[1], e.midpoint[1], grid.box_len());
            // Displacement along the inner normal of pair.0; moving into the
            // phase means the phase shrinks, so velocity is its negative.
            let along_inner = dx * e.normal[0] + dy * e.normal[1];
            let velocity = -along_inner / dt;
            let curvature = circle_fit_curvature(grid, m0, e);
            out.push(MotionSample { time: t1, pair: e.pair, velocity, curvature, flagged });
        }
    }
    out
}

/// Signed curvature by an algebraic circle fit through the 5 nearest
/// same-pair midpoints (including the element itself).
fn circle_fit_curvature(grid: &Grid, mesh: &InterfaceMesh, e: &InterfaceElement) -> f64 {
    let mut neighbors: Vec<([f64; 2], f64)> = mesh
        .elements
        .iter()
        .filter(|o| o.pair == e.pair)
        .map(|o| (o.midpoint, periodic_pair_distance(grid, &e.midpoint, &o.midpoint)))
        .collect();
    neighbors.sort_by(|a, b| a.1.total_cmp(&b.1));
    neighbors.truncate(5);
    if neighbors.len() < 3 {
        return 0.0;
    }
    // Local coordinates around the element midpoint (unwrap periodicity).
    let l = grid.box_len();
    let pts: Vec<[f64; 2]> = neighbors
        .iter()
        .map(|(p, _)| {
            [periodic_delta(p[0], e.midpoint[0], l), periodic_delta(p[1], e.midpoint[1], l)]
        })
        .collect();
    // Kasa fit: minimize |x|^2 + |y|^2 + D x + E y + F.
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    for p in &pts {
        let (x, y) = (p[0], p[1]);
        let z = -(x * x + y * y);
        let row = [x, y, 1.0];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += row[r] * row[c];
            }
            b[r] += row[r] * z;
        }
    }
    let Some(sol) = solve3(a, b) else { return 0.0 };
    let cx = -0.5 * sol[0];
    let cy = -0.5 * sol[1];
    let r_sq = cx * cx + cy * cy - sol[2];
    if r_sq <= 0.0 {
        return 0.0;
    }
    let r = r_sq.sqrt();
    // Positive when the fitted center lies on the inner-normal side.
    let side = cx * e.normal[0] + cy * e.normal[1];
    if side >= 0.0 {
        1.0 / r
    } else {
        -1.0 / r
    }
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let mut pivot = col;
        for r in col + 1..3 {
            if a[r][col].abs() > a[pivot][col].abs() {
                pivot = r;
            }
        }
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let mut acc = b[r];
        for c in r + 1..3 {
            acc -= a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PhaseField;
    use crate::geodesic::{optimal_profile, ProfileParams};
    use crate::potential::{TripleWell, UnitWell01};

    fn circle_field(n: usize, eps: f64, radius: f64) -> (UnitWell01, PhaseField) {
        let pot = UnitWell01::new();
        let grid = Grid::new(2, n, 1.0).unwrap();
        let prof = optimal_profile(&pot, 0, 1, &ProfileParams::default()).unwrap();
        let mut vals = vec![0.0; grid.cells()];
        let mut q = [0.0];
        for (idx, v) in vals.iter_mut().enumerate() {
            let p = grid.point(idx);
            let d = grid.distance(&p[..2], &[0.5, 0.5]);
            prof.eval_into((radius - d) / eps, &mut q);
            *v = q[0];
        }
        (pot, PhaseField::new(grid, vec![vals], eps, 0.0).unwrap())
    }

    #[test]
    fn constant_field_has_uniform_labels() {
        let pot = UnitWell01::new();
        let grid = Grid::new(2, 16, 1.0).unwrap();
        let u = PhaseField::constant(grid, &[1.0], 0.1).unwrap();
        let part = extract_partition(&pot, &u);
        assert!(part.labels.iter().all(|&l| l == 1));
    }

    #[test]
    fn tie_breaks_to_lower_index() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 16, 1.0).unwrap();
        let u = PhaseField::constant(grid, &[0.5], 0.1).unwrap();
        let part = extract_partition(&pot, &u);
        assert!(part.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn circle_labels_match_geometry() {
        let (pot, u) = circle_field(128, 0.05, 0.3);
        let part = extract_partition(&pot, &u);
        let grid = u.grid;
        let h = grid.spacing();
        for idx in 0..grid.cells() {
            let p = grid.point(idx);
            let d = grid.distance(&p[..2], &[0.5, 0.5]);
            if (d - 0.3).abs() > h {
                let expect = usize::from(d < 0.3);
                assert_eq!(part.labels[idx], expect, "cell at distance {d}");
            }
        }
    }

    #[test]
    fn single_phase_mesh_is_empty() {
        let pot = UnitWell01::new();
        let grid = Grid::new(2, 16, 1.0).unwrap();
        let u = PhaseField::constant(grid, &[0.0], 0.1).unwrap();
        let mesh = interface_mesh(&pot, &u).unwrap();
        assert!(mesh.elements.is_empty());
        assert!(junction_angles(&mesh).is_empty());
    }

    #[test]
    fn three_d_mesh_unsupported() {
        let pot = UnitWell01::new();
        let grid = Grid::new(3, 8, 1.0).unwrap();
        let u = PhaseField::constant(grid, &[0.0], 0.3).unwrap();
        assert!(matches!(
            interface_mesh(&pot, &u),
            Err(Error::UnsupportedDimension(3))
        ));
    }

    #[test]
    fn three_d_partition_and_volumes_supported() {
        // Partition extraction and volumes work in 3D; only the perimeter
        // and angle machinery is 2D.
        use crate::geodesic::ProfileParams;
        use crate::solver::{initial_data::ProfileTable, prepare_initial_data, Geometry};
        let pot = UnitWell01::new();
        let grid = Grid::new(3, 16, 1.0).unwrap();
        let geom = Geometry::Circle {
            center: vec![0.5, 0.5, 0.5],
            radius: 0.3,
            inside: 1,
            outside: 0,
        };
        let profiles =
            ProfileTable::for_geometry(&geom, &pot, &ProfileParams::default()).unwrap();
        let u = prepare_initial_data(&geom, &pot, &profiles, &grid, 0.125).unwrap();
        let part = extract_partition(&pot, &u);
        let count = part.labels.iter().filter(|&&l| l == 1).count();
        let volume = count as f64 * grid.cell_volume();
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 0.3f64.powi(3);
        assert!((volume - exact).abs() < 0.15 * exact, "ball volume {volume} vs {exact}");
        // The diffuse volume (mean of u) also approximates the ball volume.
        assert!((u.means()[0] - exact).abs() < 0.1 * exact);
        assert!(matches!(radius_estimate(&part, 1), Err(Error::UnsupportedDimension(3))));
    }

    #[test]
    fn stripe_mesh_length_near_two_box_lengths() {
        let pot = UnitWell01::new();
        let grid = Grid::new(2, 128, 1.0).unwrap();
        let eps = 8.0 * grid.spacing();
        let prof = optimal_profile(&pot, 0, 1, &ProfileParams::default()).unwrap();
        let mut vals = vec![0.0; grid.cells()];
        let mut q = [0.0];
        for (idx, v) in vals.iter_mut().enumerate() {
            let p = grid.point(idx);
            let s = 0.25 - (p[0] - 0.5).abs();
            prof.eval_into(s / eps, &mut q);
            *v = q[0];
        }
        let u = PhaseField::new(grid, vec![vals], eps, 0.0).unwrap();
        let mesh = interface_mesh(&pot, &u).unwrap();
        let total = mesh.total_measure();
        assert!((total - 2.0).abs() < 0.02, "stripe length {total}");
    }

    #[test]
    fn circle_mesh_length_matches_circumference() {
        let (pot, u) = circle_field(256, 8.0 / 256.0, 0.3);
        let mesh = interface_mesh(&pot, &u).unwrap();
        let total = mesh.total_measure();
        let expect = 2.0 * std::f64::consts::PI * 0.3;
        assert!(
            (total - expect).abs() < 0.01 * expect,
            "circle length {total} vs {expect}"
        );
        assert!(mesh.junctions.is_empty());
    }

    #[test]
    fn partition_energy_examples() {
        let (pot, u) = circle_field(256, 8.0 / 256.0, 0.3);
        let mesh = interface_mesh(&pot, &u).unwrap();
        let sigma = SurfaceTensionMatrix { sigma: vec![vec![0.0, 1.0], vec![1.0, 0.0]] };
        let e = partition_energy(&mesh, &sigma);
        let expect = 2.0 * std::f64::consts::PI * 0.3;
        assert!((e - expect).abs() < 0.01 * expect);
        let empty = InterfaceMesh {
            dim: 2,
            grid: u.grid,
            elements: Vec::new(),
            junctions: Vec::new(),
        };
        assert_eq!(partition_energy(&empty, &sigma), 0.0);
        let _ = pot;
    }

    #[test]
    fn partition_energy_relabel_invariance() {
        let (pot, u) = circle_field(128, 8.0 / 128.0, 0.3);
        let mesh = interface_mesh(&pot, &u).unwrap();
        let s1 = SurfaceTensionMatrix { sigma: vec![vec![0.0, 0.7], vec![0.7, 0.0]] };
        // Swapping both labels and the matrix rows/cols leaves E unchanged.
        let mut swapped = mesh.clone();
        for e in &mut swapped.elements {
            e.pair = (e.pair.0.min(e.pair.1), e.pair.1.max(e.pair.0)); // already ordered
        }
        assert!((partition_energy(&mesh, &s1) - partition_energy(&swapped, &s1)).abs() < 1e-12);
    }

    #[test]
    fn radius_estimate_examples() {
        let (pot, u) = circle_field(256, 8.0 / 256.0, 0.3);
        let part = extract_partition(&pot, &u);
        let r = radius_estimate(&part, 1).unwrap();
        assert!((r - 0.3).abs() <= u.grid.spacing(), "radius {r}");
        assert!(matches!(radius_estimate(&part, 7), Err(Error::PhaseAbsent(7))));
        // Full-domain phase.
        let full = Partition { labels: vec![0; part.grid.cells()], grid: part.grid, phases: 2 };
        let r = radius_estimate(&full, 0).unwrap();
        assert!((r - (1.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tripod_junction_has_three_arms_at_120_degrees() {
        // Prepared tripod briefly relaxed: the equal-tension junction at the
        // box center equilibrates to the symmetric 120-degree configuration.
        // (At t = 0 the blending construction leaves the arms bent by a few
        // degrees near the core, which the flow removes quickly.)
        use crate::geodesic::ProfileParams;
        use crate::solver::{
            initial_data::ProfileTable, prepare_initial_data, run, Dynamics, Geometry,
            ObserverConfig, Scheme, StepperConfig,
        };
        let pot = TripleWell::new();
        let grid = Grid::new(2, 128, 1.0).unwrap();
        let eps = 4.0 * grid.spacing();
        let geom = Geometry::Tripod { wells: [0, 1, 2] };
        let profiles =
            ProfileTable::for_geometry(&geom, &pot, &ProfileParams::default()).unwrap();
        let u0 = prepare_initial_data(&geom, &pot, &profiles, &grid, eps).unwrap();
        let cfg = StepperConfig::new(Scheme::SemiImplicit, eps * eps / 10.0);
        let out =
            run(&pot, u0, &Dynamics::Plain, &cfg, 0.005, &ObserverConfig::default()).unwrap();
        let mesh = interface_mesh(&pot, &out.final_state).unwrap();
        let central: Vec<_> = junction_angles(&mesh)
            .into_iter()
            .filter(|j| periodic_pair_distance(&grid, &j.position, &[0.5, 0.5]) < 0.1)
            .collect();
        assert!(!central.is_empty(), "no central junction found");
        let angles = &central[0].angles_deg;
        assert_eq!(angles.len(), 3);
        let sum: f64 = angles.iter().sum();
        assert!((sum - 360.0).abs() < 2.0, "angle sum {sum}");
        for a in angles {
            assert!((a - 120.0).abs() < 6.0, "angle {a} too far from 120");
        }
    }

    #[test]
    fn motion_samples_on_synthetic_circles() {
        // Two analytic circle meshes: R then R - delta. V = -delta/dt, H = 1/R.
        let grid = Grid::new(2, 128, 1.0).unwrap();
        let make = |r: f64| -> InterfaceMesh {
            let m = 256;
            let elements = (0..m)
                .map(|k| {
                    let a0 = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                    let a1 = 2.0 * std::f64::consts::PI * (k + 1) as f64 / m as f64;
                    let p0 = [0.5 + r * a0.cos(), 0.5 + r * a0.sin()];
                    let p1 = [0.5 + r * a1.cos(), 0.5 + r * a1.sin()];
                    let mid = [0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])];
                    let len = ((p1[0] - p0[0]).powi(2) + (p1[1] - p0[1]).powi(2)).sqrt();
                    let am = 0.5 * (a0 + a1);
                    InterfaceElement {
                        endpoints: [p0, p1],
                        midpoint: mid,
                        pair: (0, 1),
                        measure: len,
                        // Phase 0 inside: inner normal points to the center.
                        normal: [-am.cos(), -am.sin()],
                    }
                })
                .collect();
            InterfaceMesh { dim: 2, grid, elements, junctions: Vec::new() }
        };
        let dt = 0.01;
        let r = 0.3;
        let delta = 0.005;
        let meshes = vec![(0.0, make(r)), (dt, make(r - delta))];
        let samples = motion_samples(&meshes);
        assert!(!samples.is_empty());
        for s in &samples {
            assert!(!s.flagged);
            // Interface moves toward the center = into phase 0: V < 0.
            assert!(
                (s.velocity + delta / dt).abs() < 0.15 * (delta / dt),
                "V = {} expected {}",
                s.velocity,
                -delta / dt
            );
            assert!((s.curvature - 1.0 / r).abs() < 0.1 / r, "H = {}", s.curvature);
        }
    }

    #[test]
    fn monitor_flags_time_mismatch() {
        let sigma = SurfaceTensionMatrix { sigma: vec![vec![0.0, 1.0], vec![1.0, 0.0]] };
        assert!(matches!(
            convergence_monitor(&[], &[], &sigma, 1e-6),
            Ok(MonitorReport { .. })
        ));
        let (pot, u) = circle_field(64, 8.0 / 64.0, 0.3);
        let sp = crate::field::spectral::Spectral::new(&u.grid);
        let report = crate::diagnostics::DiagnosticsReport {
            time: 0.0,
            energy: crate::diagnostics::energy(&pot, &u, None, &sp).unwrap(),
            dissipation_increment: 0.0,
            dissipation_accum: 0.0,
            equipartition: crate::diagnostics::equipartition_report(&pot, &u, None, &sp)
                .unwrap(),
            volume_means: u.means(),
            lambda: None,
            lambda_sq_accum: 0.0,
            forcing_work_accum: None,
            forcing_norms: None,
        };
        let mesh = interface_mesh(&pot, &u).unwrap();
        let bad = convergence_monitor(&[report], &[(1.0, mesh)], &sigma, 1e-6);
        assert!(matches!(bad, Err(Error::TimeGridMismatch(0))));
    }
}
