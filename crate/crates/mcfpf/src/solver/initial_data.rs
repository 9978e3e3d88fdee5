//! Well-prepared initial data: the sharp geometry is smoothed by the optimal
//! 1D transition profile across each interface, u0(x) = q(s(x)/eps) with s
//! the signed distance to the interface (positive inside), so the initial
//! energy approaches the weighted perimeter as eps -> 0.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid, PhaseField};
use crate::geodesic::{optimal_profile, ProfileParams, TransitionProfile};
use crate::numerics::periodic_delta;
use crate::potential::Potential;

/// One disk of a multi-circle geometry.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disk {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Sharp initial geometry.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    /// Disk (interval in 1D, ball in 3D) of `inside` phase in an `outside` sea.
    Circle { center: Vec<f64>, radius: f64, inside: usize, outside: usize },
    /// Union of disjoint disks, all of the `inside` phase.
    Circles { disks: Vec<Disk>, inside: usize, outside: usize },
    /// Band of width `width` centered at L/2 along `axis`.
    Stripe { axis: usize, width: f64, inside: usize, outside: usize },
    /// Three 120-degree sectors meeting at the box center (2D, P >= 3).
    Tripod { wells: [usize; 3] },
}

impl Geometry {
    /// Ordered well pairs whose transition profiles the construction needs.
    pub fn profile_pairs(&self) -> Vec<(usize, usize)> {
        match self {
            Geometry::Circle { inside, outside, .. }
            | Geometry::Circles { inside, outside, .. }
            | Geometry::Stripe { inside, outside, .. } => vec![(*outside, *inside)],
            Geometry::Tripod { wells } => {
                let mut pairs = Vec::new();
                for a in 0..3 {
                    for b in 0..3 {
                        if a != b {
                            pairs.push((wells[a], wells[b]));
                        }
                    }
                }
                pairs
            }
        }
    }
}

/// Transition profiles per unordered well pair; the reversed orientation is
/// evaluated by flipping the argument (q(-s) solves the swapped endpoints).
pub struct ProfileTable {
    profiles: HashMap<(usize, usize), TransitionProfile>,
}

impl ProfileTable {
    /// Computes the profiles a geometry needs.
    pub fn for_geometry(
        geometry: &Geometry,
        pot: &dyn Potential,
        params: &ProfileParams,
    ) -> Result<Self> {
        let mut profiles = HashMap::new();
        for (from, to) in geometry.profile_pairs() {
            let key = (from.min(to), from.max(to));
            if let std::collections::hash_map::Entry::Vacant(e) = profiles.entry(key) {
                e.insert(optimal_profile(pot, key.0, key.1, params)?);
            }
        }
        Ok(Self { profiles })
    }

    /// Builds a table from precomputed profiles (keys are ordered pairs
    /// (i, j) with i < j and q(-inf) = alpha_i).
    pub fn from_profiles(profiles: HashMap<(usize, usize), TransitionProfile>) -> Self {
        Self { profiles }
    }

    /// q_{from -> to}(s), written into `out`.
    pub fn eval_into(&self, from: usize, to: usize, s: f64, out: &mut [f64]) -> Result<()> {
        let key = (from.min(to), from.max(to));
        let profile = self.profiles.get(&key).ok_or_else(|| {
            Error::Geometry(format!("no transition profile for well pair {key:?}"))
        })?;
        if from < to {
            profile.eval_into(s, out);
        } else {
            profile.eval_into(-s, out);
        }
        Ok(())
    }
}

/// Builds u0 from a sharp geometry: u0(x) = q(s(x)/eps) across each
/// interface, with multi-junction geometries blended by nearest-interface
/// distance. Overlapping circles are an error; a circle of radius <= 0
/// degenerates to the outside well everywhere.
pub fn prepare_initial_data(
    geometry: &Geometry,
    pot: &dyn Potential,
    profiles: &ProfileTable,
    grid: &Grid,
    epsilon: f64,
) -> Result<PhaseField> {
    let wells = pot.wells();
    let p = wells.len();
    let validate_phase = |idx: usize| -> Result<()> {
        if idx >= p {
            return Err(Error::WellIndex { index: idx, wells: p });
        }
        Ok(())
    };
    let ncomp = pot.dim();
    let cells = grid.cells();
    let mut components = vec![vec![0.0; cells]; ncomp];
    let mut state = vec![0.0; ncomp];

    let mut fill = |signed_distance: &dyn Fn(&[f64]) -> f64,
                    from: usize,
                    to: usize,
                    components: &mut Vec<Vec<f64>>|
     -> Result<()> {
        for idx in 0..cells {
            let pnt = grid.point(idx);
            let s = signed_distance(&pnt[..grid.dim()]);
            profiles.eval_into(from, to, s / epsilon, &mut state)?;
            for (c, comp) in components.iter_mut().enumerate() {
                comp[idx] = state[c];
            }
        }
        Ok(())
    };

    match geometry {
        Geometry::Circle { center, radius, inside, outside } => {
            validate_phase(*inside)?;
            validate_phase(*outside)?;
            if *radius <= 0.0 {
                return PhaseField::constant(*grid, &wells[*outside], epsilon);
            }
            let c = center.clone();
            let r = *radius;
            fill(
                &|x: &[f64]| r - grid.distance(x, &c),
                *outside,
                *inside,
                &mut components,
            )?;
        }
        Geometry::Circles { disks, inside, outside } => {
            validate_phase(*inside)?;
            validate_phase(*outside)?;
            for (a, da) in disks.iter().enumerate() {
                for db in disks.iter().skip(a + 1) {
                    let d = grid.distance(&da.center, &db.center);
                    if d < da.radius + db.radius {
                        return Err(Error::Geometry(format!(
                            "circles at {:?} and {:?} overlap",
                            da.center, db.center
                        )));
                    }
                }
            }
            let disks = disks.clone();
            fill(
                &|x: &[f64]| {
                    disks
                        .iter()
                        .map(|d| d.radius - grid.distance(x, &d.center))
                        .fold(f64::NEG_INFINITY, f64::max)
                },
                *outside,
                *inside,
                &mut components,
            )?;
        }
        Geometry::Stripe { axis, width, inside, outside } => {
            validate_phase(*inside)?;
            validate_phase(*outside)?;
            if *axis >= grid.dim() {
                return Err(Error::Geometry(format!(
                    "stripe axis {axis} out of range for d = {}",
                    grid.dim()
                )));
            }
            let mid = 0.5 * grid.box_len();
            let half = 0.5 * width;
            let ax = *axis;
            fill(
                &|x: &[f64]| half - periodic_delta(x[ax], mid, grid.box_len()).abs(),
                *outside,
                *inside,
                &mut components,
            )?;
        }
        Geometry::Tripod { wells: sector_wells } => {
            if grid.dim() != 2 {
                return Err(Error::Geometry("tripod geometry requires d = 2".into()));
            }
            for &w in sector_wells {
                validate_phase(w)?;
            }
            prepare_tripod(sector_wells, profiles, grid, epsilon, &mut components)?;
        }
    }
    PhaseField::new(*grid, components, epsilon, 0.0)
}

/// Sector label of an angle for the tripod: boundaries at 90, 210 and 330
/// degrees around the box center.
fn tripod_sector(angle: f64) -> usize {
    let two_pi = 2.0 * std::f64::consts::PI;
    let a = (angle - std::f64::consts::FRAC_PI_2).rem_euclid(two_pi);
    ((a / (two_pi / 3.0)) as usize).min(2)
}

/// Tripod construction: sharp sector labels, then per-cell blending by the
/// distance to the nearest label interface (sub-cell midpoints between
/// differently-labeled neighbors), crossing toward that interface's other
/// phase.
fn prepare_tripod(
    sector_wells: &[usize; 3],
    profiles: &ProfileTable,
    grid: &Grid,
    epsilon: f64,
    components: &mut [Vec<f64>],
) -> Result<()> {
    let n = grid.n();
    let cells = grid.cells();
    let center = [0.5 * grid.box_len(), 0.5 * grid.box_len()];
    let labels: Vec<usize> = (0..cells)
        .map(|idx| {
            let p = grid.point(idx);
            let ang = (p[1] - center[1]).atan2(p[0] - center[0]);
            sector_wells[tripod_sector(ang)]
        })
        .collect();

    // Interface sample points: midpoints between differently-labeled
    // neighbors, periodic in both axes.
    struct IfacePoint {
        pos: [f64; 2],
        labels: (usize, usize),
    }
    let h = grid.spacing();
    let mut points = Vec::new();
    for idx in 0..cells {
        let p = grid.point(idx);
        for axis in 0..2 {
            let nb = grid.neighbor(idx, axis, 1);
            if labels[idx] != labels[nb] {
                let mut pos = [p[0], p[1]];
                pos[axis] = (pos[axis] + 0.5 * h).rem_euclid(grid.box_len());
                points.push(IfacePoint { pos, labels: (labels[idx], labels[nb]) });
            }
        }
    }
    if points.is_empty() {
        return Err(Error::Geometry("tripod produced no interfaces".into()));
    }

    let mut state = vec![0.0; components.len()];
    for idx in 0..cells {
        let p = grid.point(idx);
        let own = labels[idx];
        let mut best = f64::INFINITY;
        let mut other = own;
        for ip in &points {
            let dx = periodic_delta(p[0], ip.pos[0], grid.box_len());
            let dy = periodic_delta(p[1], ip.pos[1], grid.box_len());
            let d = (dx * dx + dy * dy).sqrt();
            if d < best {
                best = d;
                // Cross toward the interface's other phase; if the cell's own
                // label is not part of the pair (possible right at the
                // junction), fall back to the pair's first phase.
                other = if ip.labels.0 == own { ip.labels.1 } else { ip.labels.0 };
            }
        }
        profiles.eval_into(other, own, best / epsilon, &mut state)?;
        for (c, comp) in components.iter_mut().enumerate() {
            comp[idx] = state[c];
        }
    }
    let _ = n;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics;
    use crate::field::spectral::Spectral;
    use crate::potential::{TripleWell, UnitWell01};
    use crate::sharp_interface::extract_partition;

    fn table(pot: &dyn Potential, geometry: &Geometry) -> ProfileTable {
        ProfileTable::for_geometry(geometry, pot, &ProfileParams::default()).unwrap()
    }

    #[test]
    fn zero_radius_is_outside_well_everywhere() {
        let pot = UnitWell01::new();
        let grid = Grid::new(2, 32, 1.0).unwrap();
        let geom = Geometry::Circle {
            center: vec![0.5, 0.5],
            radius: 0.0,
            inside: 1,
            outside: 0,
        };
        let u = prepare_initial_data(&geom, &pot, &table(&pot, &geom), &grid, 0.05).unwrap();
        assert!(u.components[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stripe_partition_has_expected_widths() {
        let pot = UnitWell01::new();
        let grid = Grid::new(1, 128, 1.0).unwrap();
        let geom = Geometry::Stripe { axis: 0, width: 0.5, inside: 1, outside: 0 };
        let u =
            prepare_initial_data(&geom, &pot, &table(&pot, &geom), &grid, 0.03).unwrap();
        let part = extract_partition(&pot, &u);
        let inside = part.labels.iter().filter(|&&l| l == 1).count();
        assert!((inside as f64 / 128.0 - 0.5).abs() < 0.03);
    }

    #[test]
    fn circle_energy_approaches_sigma_perimeter() {
        let pot = UnitWell01::new();
        let geom = Geometry::Circle {
            center: vec![0.5, 0.5],
            radius: 0.3,
            inside: 1,
            outside: 0,
        };
        let profiles = table(&pot, &geom);
        let perimeter = 2.0 * std::f64::consts::PI * 0.3;
        // The symmetric profile makes the curvature correction exponentially
        // small, so the prepared energy matches sigma * 2 pi R very tightly.
        for (n, eps) in [(128usize, 0.04), (256usize, 0.02)] {
            let grid = Grid::new(2, n, 1.0).unwrap();
            let u = prepare_initial_data(&geom, &pot, &profiles, &grid, eps).unwrap();
            let sp = Spectral::new(&grid);
            let e = diagnostics::energy(&pot, &u, None, &sp).unwrap().total;
            assert!(
                (e - perimeter).abs() < 1e-3 * perimeter,
                "n = {n}: E = {e} vs {perimeter}"
            );
        }
    }

    #[test]
    fn overlapping_circles_error() {
        let pot = UnitWell01::new();
        let grid = Grid::new(2, 32, 1.0).unwrap();
        let geom = Geometry::Circles {
            disks: vec![
                Disk { center: vec![0.3, 0.5], radius: 0.2 },
                Disk { center: vec![0.5, 0.5], radius: 0.2 },
            ],
            inside: 1,
            outside: 0,
        };
        assert!(matches!(
            prepare_initial_data(&geom, &pot, &table(&pot, &geom), &grid, 0.05),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn tripod_covers_all_three_phases() {
        let pot = TripleWell::new();
        let grid = Grid::new(2, 64, 1.0).unwrap();
        let geom = Geometry::Tripod { wells: [0, 1, 2] };
        let u = prepare_initial_data(&geom, &pot, &table(&pot, &geom), &grid, 0.05).unwrap();
        let part = extract_partition(&pot, &u);
        for phase in 0..3 {
            let count = part.labels.iter().filter(|&&l| l == phase).count();
            assert!(
                count > grid.cells() / 10,
                "phase {phase} underrepresented: {count}"
            );
        }
    }
}
