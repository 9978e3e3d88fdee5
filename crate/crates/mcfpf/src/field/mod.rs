//! Periodic uniform-grid fields on the flat torus [0, L)^d.
//!
//! Scalar fields are flat `Vec<f64>` in row-major order with x fastest;
//! vector test fields are one scalar field per axis. All reductions use a
//! fixed-order pairwise summation so output bytes are reproducible.

pub mod snapshot;
pub mod spectral;

use crate::error::{Error, Result};
use crate::numerics::{pairwise_sum_with, periodic_delta};

/// Uniform periodic grid: n^d cells of spacing h = box_len / n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    box_len: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, box_len: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::BadGridResolution(n));
        }
        assert!(box_len > 0.0, "box length must be positive");
        Ok(Self { dim, n, box_len })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    /// Grid spacing h.
    pub fn spacing(&self) -> f64 {
        self.box_len / self.n as f64
    }

    /// Total number of cells n^d.
    pub fn cells(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Cell volume h^d.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Index of the cell at integer coordinates (x fastest).
    pub fn index(&self, coords: &[usize]) -> usize {
        let mut idx = 0;
        for &c in coords.iter().rev() {
            idx = idx * self.n + c;
        }
        idx
    }

    /// Integer coordinates of a flat index.
    pub fn coords(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for c in out.iter_mut().take(self.dim) {
            *c = idx % self.n;
            idx /= self.n;
        }
        out
    }

    /// Physical position of a cell (collocation point i * h per axis).
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let h = self.spacing();
        [c[0] as f64 * h, c[1] as f64 * h, c[2] as f64 * h]
    }

    /// Flat index of the neighbor one cell along `axis` (periodic).
    pub fn neighbor(&self, idx: usize, axis: usize, step: isize) -> usize {
        let mut c = self.coords(idx);
        let n = self.n as isize;
        c[axis] = ((c[axis] as isize + step).rem_euclid(n)) as usize;
        self.index(&c[..self.dim])
    }

    /// Periodic Euclidean distance between two points of the torus.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for axis in 0..self.dim {
            let d = periodic_delta(a[axis], b[axis], self.box_len);
            s += d * d;
        }
        s.sqrt()
    }
}

/// Order parameter u on a grid: N scalar components, the interface width
/// epsilon and the simulation time.
#[derive(Debug, Clone)]
pub struct PhaseField {
    pub grid: Grid,
    pub components: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub time: f64,
    /// Set when epsilon < 2h at construction; the run proceeds regardless.
    pub resolution_warning: bool,
}

impl PhaseField {
    pub fn new(grid: Grid, components: Vec<Vec<f64>>, epsilon: f64, time: f64) -> Result<Self> {
        assert!(epsilon > 0.0, "epsilon must be positive");
        assert!(time >= 0.0, "time must be nonnegative");
        for c in &components {
            if c.len() != grid.cells() {
                return Err(Error::ShapeMismatch { got: c.len(), expected: grid.cells() });
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteInput);
            }
        }
        let resolution_warning = epsilon < 2.0 * grid.spacing();
        Ok(Self { grid, components, epsilon, time, resolution_warning })
    }

    /// Constant field u = value (one entry per component).
    pub fn constant(grid: Grid, value: &[f64], epsilon: f64) -> Result<Self> {
        let components = value.iter().map(|&v| vec![v; grid.cells()]).collect();
        Self::new(grid, components, epsilon, 0.0)
    }

    /// Number of state components N.
    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    /// State vector at a cell, written into `buf`.
    pub fn state_at(&self, idx: usize, buf: &mut [f64]) {
        for (c, comp) in self.components.iter().enumerate() {
            buf[c] = comp[idx];
        }
    }

    /// Componentwise means (pairwise deterministic sums).
    pub fn means(&self) -> Vec<f64> {
        let cells = self.grid.cells() as f64;
        self.components
            .iter()
            .map(|c| pairwise_sum_with(c.len(), &|i| c[i]) / cells)
            .collect()
    }
}

/// Midpoint-rule integral h^d * sum f * window; `window = None` means 1.
///
/// The summation order is fixed (pairwise), so results are reproducible.
pub fn integrate(grid: &Grid, f: &[f64], window: Option<&[f64]>) -> Result<f64> {
    if f.len() != grid.cells() {
        return Err(Error::ShapeMismatch { got: f.len(), expected: grid.cells() });
    }
    let sum = match window {
        None => pairwise_sum_with(f.len(), &|i| f[i]),
        Some(w) => {
            if w.len() != f.len() {
                return Err(Error::ShapeMismatch { got: w.len(), expected: f.len() });
            }
            pairwise_sum_with(f.len(), &|i| f[i] * w[i])
        }
    };
    Ok(grid.cell_volume() * sum)
}

/// Validates that a scalar window takes values in [0, 1].
pub fn check_window_range(window: &[f64]) -> Result<()> {
    for &v in window {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::WindowRange(v));
        }
    }
    Ok(())
}

/// Scalar plateau window: 1 inside radius r1 = radius * (1 - smoothness),
/// cosine roll-off to 0 at `radius`, measured in periodic distance from
/// `center`. Values lie in [0, 1].
pub fn plateau_window(grid: &Grid, center: &[f64], radius: f64, smoothness: f64) -> Vec<f64> {
    assert!(radius > 0.0);
    assert!((0.0..=1.0).contains(&smoothness));
    let r1 = radius * (1.0 - smoothness);
    let mut w = vec![0.0; grid.cells()];
    for (idx, v) in w.iter_mut().enumerate() {
        let p = grid.point(idx);
        let r = grid.distance(&p[..grid.dim()], center);
        *v = if r <= r1 {
            1.0
        } else if r >= radius {
            0.0
        } else {
            0.5 * (1.0 + (std::f64::consts::PI * (r - r1) / (radius - r1)).cos())
        };
    }
    w
}

/// Vector test field xi = g(r) * direction with the same plateau profile g.
pub fn plateau_vector_field(
    grid: &Grid,
    center: &[f64],
    radius: f64,
    smoothness: f64,
    direction: &[f64],
) -> Vec<Vec<f64>> {
    let scalar = plateau_window(grid, center, radius, smoothness);
    (0..grid.dim())
        .map(|a| scalar.iter().map(|&s| s * direction[a]).collect())
        .collect()
}

/// Radial vector test field xi = g(r) * e_r around `center` (2D).
pub fn radial_vector_field(
    grid: &Grid,
    center: &[f64],
    radius: f64,
    smoothness: f64,
) -> Vec<Vec<f64>> {
    let scalar = plateau_window(grid, center, radius, smoothness);
    let mut out = vec![vec![0.0; grid.cells()]; grid.dim()];
    for idx in 0..grid.cells() {
        let p = grid.point(idx);
        let mut delta = [0.0; 3];
        let mut norm = 0.0;
        for a in 0..grid.dim() {
            delta[a] = periodic_delta(p[a], center[a], grid.box_len());
            norm += delta[a] * delta[a];
        }
        let norm = norm.sqrt();
        if norm > 1e-12 {
            for a in 0..grid.dim() {
                out[a][idx] = scalar[idx] * delta[a] / norm;
            }
        }
    }
    out
}

/// Max cellwise Frobenius norm of the gradient of a vector field, computed
/// spectrally; used in the first-variation bound.
pub fn max_gradient_norm(grid: &Grid, spectral: &spectral::Spectral, xi: &[Vec<f64>]) -> f64 {
    let mut max_sq: f64 = 0.0;
    let mut frob = vec![0.0; grid.cells()];
    for comp in xi {
        for axis in 0..grid.dim() {
            let d = spectral.gradient_axis(comp, axis);
            for (idx, g) in d.iter().enumerate() {
                frob[idx] += g * g;
            }
        }
    }
    for &v in &frob {
        max_sq = max_sq.max(v);
    }
    max_sq.sqrt()
}
