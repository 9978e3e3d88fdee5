//! Spectral calculus on the periodic grid.
//!
//! One discrete calculus serves both the solver and every diagnostic: the
//! forward DFT, a symbol multiplication with wavenumbers k = 2 pi m / L, and
//! the inverse DFT. Discrete integration by parts <D f, g> = -<f, D g> then
//! holds to round-off (Parseval), which the weak-identity residual relies on.
//!
//! Conventions: first derivatives zero the Nyquist mode (the standard choice
//! keeping odd derivatives of real data real); the Laplacian keeps it. The
//! mean is subtracted before differentiation so constants map to exact zeros.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::Grid;
use crate::numerics::pairwise_sum_with;

/// FFT plans plus scratch for one grid size.
pub struct Spectral {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Signed integer frequencies m(i) for i = 0..n.
    freq: Vec<i64>,
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n();
        let freq = (0..n)
            .map(|i| if i <= n / 2 { i as i64 } else { i as i64 - n as i64 })
            .collect();
        Self {
            grid: *grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            freq,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn wavenumber(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.freq[i] as f64 / self.grid.box_len()
    }

    /// True if index i is the Nyquist frequency n/2.
    fn is_nyquist(&self, i: usize) -> bool {
        2 * i == self.grid.n()
    }

    /// Forward transform of a real field into a complex buffer.
    fn forward_into(&self, src: &[f64], buf: &mut Vec<Complex<f64>>) {
        buf.clear();
        buf.extend(src.iter().map(|&x| Complex::new(x, 0.0)));
        self.transform_all_axes(buf, true);
    }

    /// Inverse transform; writes the real part into `dst`, normalized.
    fn inverse_into(&self, buf: &mut [Complex<f64>], dst: &mut [f64]) {
        self.transform_all_axes_slice(buf, false);
        let scale = 1.0 / self.grid.cells() as f64;
        for (d, c) in dst.iter_mut().zip(buf.iter()) {
            *d = c.re * scale;
        }
    }

    fn transform_all_axes(&self, buf: &mut Vec<Complex<f64>>, fwd: bool) {
        self.transform_all_axes_slice(buf.as_mut_slice(), fwd);
    }

    fn transform_all_axes_slice(&self, buf: &mut [Complex<f64>], fwd: bool) {
        let n = self.grid.n();
        let dim = self.grid.dim();
        let plan = if fwd { &self.forward } else { &self.inverse };
        let mut line = vec![Complex::new(0.0, 0.0); n];
        for axis in 0..dim {
            let stride = n.pow(axis as u32);
            let lines = self.grid.cells() / n;
            for l in 0..lines {
                // Base index of this line: split the line counter around the axis.
                let inner = l % stride;
                let outer = l / stride;
                let base = outer * stride * n + inner;
                for (j, c) in line.iter_mut().enumerate() {
                    *c = buf[base + j * stride];
                }
                plan.process(&mut line);
                for (j, c) in line.iter().enumerate() {
                    buf[base + j * stride] = *c;
                }
            }
        }
    }

    /// Applies a multiplier `sym(freq_indices) -> Complex` in wavenumber space.
    fn apply_symbol(
        &self,
        src: &[f64],
        subtract_mean: bool,
        sym: impl Fn(&[usize; 3]) -> Complex<f64>,
    ) -> Vec<f64> {
        let cells = self.grid.cells();
        debug_assert_eq!(src.len(), cells);
        let mut work: Vec<f64>;
        let data = if subtract_mean {
            let mean = pairwise_sum_with(cells, &|i| src[i]) / cells as f64;
            work = src.to_vec();
            for v in &mut work {
                *v -= mean;
            }
            &work[..]
        } else {
            src
        };
        let mut buf = Vec::new();
        self.forward_into(data, &mut buf);
        let n = self.grid.n();
        let dim = self.grid.dim();
        for (idx, c) in buf.iter_mut().enumerate() {
            let mut rem = idx;
            let mut ki = [0usize; 3];
            for k in ki.iter_mut().take(dim) {
                *k = rem % n;
                rem /= n;
            }
            *c *= sym(&ki);
        }
        let mut out = vec![0.0; cells];
        self.inverse_into(&mut buf, &mut out);
        out
    }

    /// Spectral Laplacian: multiply by -|k|^2. Exact for band-limited fields;
    /// constants map to exact zeros.
    pub fn laplacian(&self, src: &[f64]) -> Vec<f64> {
        self.apply_symbol(src, true, |ki| {
            let mut k2 = 0.0;
            for a in 0..self.grid.dim() {
                let k = self.wavenumber(ki[a]);
                k2 += k * k;
            }
            Complex::new(-k2, 0.0)
        })
    }

    /// Laplacian realized as div(grad): per-axis Nyquist modes are zeroed so
    /// it equals the composition of `gradient_axis` calls; this is the
    /// operator adjoint-consistent with the Dirichlet energy quadrature.
    pub fn laplacian_div_grad(&self, src: &[f64]) -> Vec<f64> {
        self.apply_symbol(src, true, |ki| {
            let mut k2 = 0.0;
            for a in 0..self.grid.dim() {
                if !self.is_nyquist(ki[a]) {
                    let k = self.wavenumber(ki[a]);
                    k2 += k * k;
                }
            }
            Complex::new(-k2, 0.0)
        })
    }

    /// Spectral first derivative along one axis (multiply by i k).
    pub fn gradient_axis(&self, src: &[f64], axis: usize) -> Vec<f64> {
        self.apply_symbol(src, true, |ki| {
            if self.is_nyquist(ki[axis]) {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(0.0, self.wavenumber(ki[axis]))
            }
        })
    }

    /// All first derivatives of a scalar field.
    pub fn gradient(&self, src: &[f64]) -> Vec<Vec<f64>> {
        (0..self.grid.dim()).map(|a| self.gradient_axis(src, a)).collect()
    }

    /// Solves (1 + dt (|k|^2 + shift)) u = rhs in wavenumber space -- the
    /// semi-implicit Helmholtz step. `shift` >= 0.
    pub fn helmholtz_solve(&self, rhs: &[f64], dt: f64, shift: f64) -> Vec<f64> {
        self.apply_symbol(rhs, false, |ki| {
            let mut k2 = 0.0;
            for a in 0..self.grid.dim() {
                let k = self.wavenumber(ki[a]);
                k2 += k * k;
            }
            Complex::new(1.0 / (1.0 + dt * (k2 + shift)), 0.0)
        })
    }

    /// Sum over wavenumber space of |f_hat|^2 / n^d -- equals the grid sum of
    /// f^2 by Parseval; used by tests.
    pub fn spectral_power(&self, src: &[f64]) -> f64 {
        let mut buf = Vec::new();
        self.forward_into(src, &mut buf);
        let cells = self.grid.cells() as f64;
        pairwise_sum_with(buf.len(), &|i| buf[i].norm_sqr()) / cells
    }

    /// Band-limited pseudo-random field: modes with |m_a| <= max_mode get
    /// O(1) amplitudes from a seeded generator; mean zero.
    pub fn random_band_limited(&self, seed: u64, max_mode: i64) -> Vec<f64> {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cells = self.grid.cells();
        let mut out = vec![0.0; cells];
        let dim = self.grid.dim();
        let two_pi = 2.0 * std::f64::consts::PI;
        // Sum of a few real cosine modes; cheap and exactly band-limited.
        let mut modes = Vec::new();
        for _ in 0..8 {
            let m: Vec<i64> = (0..dim).map(|_| rng.gen_range(-max_mode..=max_mode)).collect();
            if m.iter().all(|&x| x == 0) {
                continue;
            }
            let amp: f64 = rng.gen_range(-1.0..1.0);
            let phase: f64 = rng.gen_range(0.0..two_pi);
            modes.push((m, amp, phase));
        }
        for (idx, v) in out.iter_mut().enumerate() {
            let p = self.grid.point(idx);
            for (m, amp, phase) in &modes {
                let mut arg = *phase;
                for (a, &ma) in m.iter().enumerate() {
                    arg += two_pi * ma as f64 * p[a] / self.grid.box_len();
                }
                *v += amp * arg.cos();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::integrate;

    fn grid1(n: usize) -> Grid {
        Grid::new(1, n, 1.0).unwrap()
    }

    #[test]
    fn laplacian_of_constant_is_exactly_zero() {
        let g = Grid::new(2, 32, 1.5).unwrap();
        let sp = Spectral::new(&g);
        let f = vec![0.7; g.cells()];
        let lap = sp.laplacian(&f);
        assert!(lap.iter().all(|&x| x == 0.0));
        let grad = sp.gradient_axis(&f, 1);
        assert!(grad.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn laplacian_eigenfunction() {
        let lambda = 2.0;
        let g = Grid::new(1, 64, lambda).unwrap();
        let sp = Spectral::new(&g);
        let k = 2.0 * std::f64::consts::PI / lambda;
        let f: Vec<f64> = (0..64).map(|i| (k * i as f64 * g.spacing()).sin()).collect();
        let lap = sp.laplacian(&f);
        for (l, fi) in lap.iter().zip(&f) {
            assert!((l + k * k * fi).abs() < 1e-12 * (1.0 + k * k));
        }
    }

    #[test]
    fn laplacian_linearity_on_two_modes() {
        let g = grid1(64);
        let sp = Spectral::new(&g);
        let k1 = 2.0 * std::f64::consts::PI;
        let k2 = 3.0 * k1;
        let f: Vec<f64> = (0..64)
            .map(|i| {
                let x = i as f64 * g.spacing();
                (k1 * x).sin() + 0.5 * (k2 * x).cos()
            })
            .collect();
        let lap = sp.laplacian(&f);
        for (i, l) in lap.iter().enumerate() {
            let x = i as f64 * g.spacing();
            let expect = -k1 * k1 * (k1 * x).sin() - 0.5 * k2 * k2 * (k2 * x).cos();
            assert!((l - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_of_cosine() {
        let g = grid1(64);
        let sp = Spectral::new(&g);
        let k = 2.0 * std::f64::consts::PI;
        let f: Vec<f64> = (0..64).map(|i| (k * i as f64 * g.spacing()).cos()).collect();
        let d = sp.gradient_axis(&f, 0);
        for (i, di) in d.iter().enumerate() {
            let x = i as f64 * g.spacing();
            assert!((di + k * (k * x).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_integrates_to_zero() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let sp = Spectral::new(&g);
        let f = sp.random_band_limited(5, 6);
        for axis in 0..2 {
            let d = sp.gradient_axis(&f, axis);
            let total = integrate(&g, &d, None).unwrap();
            assert!(total.abs() < 1e-10 * g.cells() as f64);
        }
    }

    #[test]
    fn parseval_identity() {
        let g = Grid::new(2, 32, 2.0).unwrap();
        let sp = Spectral::new(&g);
        let f = sp.random_band_limited(9, 10);
        let grid_sum: f64 = integrate(&g, &f.iter().map(|x| x * x).collect::<Vec<_>>(), None).unwrap();
        let spec_sum = sp.spectral_power(&f) * g.cell_volume();
        assert!(
            (grid_sum - spec_sum).abs() <= 1e-10 * grid_sum.abs().max(1e-30),
            "{grid_sum} vs {spec_sum}"
        );
    }

    #[test]
    fn divergence_of_gradient_matches_laplacian() {
        let g = Grid::new(2, 64, 1.0).unwrap();
        let sp = Spectral::new(&g);
        let f = sp.random_band_limited(3, 12);
        let lap = sp.laplacian(&f);
        let mut div = vec![0.0; g.cells()];
        for axis in 0..2 {
            let d1 = sp.gradient_axis(&f, axis);
            let d2 = sp.gradient_axis(&d1, axis);
            for (o, v) in div.iter_mut().zip(&d2) {
                *o += v;
            }
        }
        let scale: f64 = lap.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-30);
        for (a, b) in lap.iter().zip(&div) {
            assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn integration_by_parts_is_exact() {
        let g = grid1(64);
        let sp = Spectral::new(&g);
        let f = sp.random_band_limited(1, 20);
        let h = sp.random_band_limited(2, 20);
        let df = sp.gradient_axis(&f, 0);
        let dh = sp.gradient_axis(&h, 0);
        let lhs: f64 = (0..64).map(|i| df[i] * h[i]).sum();
        let rhs: f64 = (0..64).map(|i| -f[i] * dh[i]).sum();
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }
}
