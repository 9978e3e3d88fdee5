//! Small numeric helpers shared across the crate: deterministic summation,
//! adaptive quadrature and least-squares fits.

/// Pairwise (cascade) summation over an indexed term generator.
///
/// The reduction tree depends only on `len`, so results are bit-reproducible
/// for a fixed input order, and the rounding error grows like O(log n)
/// instead of O(n) for the naive loop.
pub fn pairwise_sum_with(len: usize, term: &impl Fn(usize) -> f64) -> f64 {
    fn go(offset: usize, len: usize, term: &impl Fn(usize) -> f64) -> f64 {
        if len <= 64 {
            let mut acc = 0.0;
            for i in 0..len {
                acc += term(offset + i);
            }
            acc
        } else {
            let half = len / 2;
            go(offset, half, term) + go(offset + half, len - half, term)
        }
    }
    go(0, len, term)
}

/// Pairwise summation of a slice.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise_sum_with(values.len(), &|i| values[i])
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
///
/// Classic recursion with the 1/15 error estimate; `tol` is an absolute
/// tolerance on the result.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn go(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            go(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + go(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    go(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Ordinary least-squares line fit `y = intercept + slope * x`.
///
/// Returns `(intercept, slope)`. Requires at least two distinct abscissae.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let sx = pairwise_sum(xs);
    let sy = pairwise_sum(ys);
    let mx = sx / n;
    let my = sy / n;
    let sxx = pairwise_sum_with(xs.len(), &|i| (xs[i] - mx) * (xs[i] - mx));
    let sxy = pairwise_sum_with(xs.len(), &|i| (xs[i] - mx) * (ys[i] - my));
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Distance on the circle of circumference `len`.
pub fn periodic_delta(a: f64, b: f64, len: f64) -> f64 {
    let mut d = (a - b) % len;
    if d > 0.5 * len {
        d -= len;
    } else if d < -0.5 * len {
        d += len;
    }
    d
}

/// Euclidean distance on the flat torus `[0, len)^dim`.
pub fn periodic_distance(a: &[f64], b: &[f64], len: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = periodic_delta(x, y, len);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let v: Vec<f64> = (0..257).map(|i| (i as f64).sin()).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-12);
    }

    #[test]
    fn simpson_integrates_polynomials_exactly() {
        // x^3 on [0, 2] = 4.
        let val = adaptive_simpson(&|x| x * x * x, 0.0, 2.0, 1e-12);
        assert!((val - 4.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_handles_nonsmooth_integrand() {
        // |x| on [-1, 2] = 0.5 + 2 = 2.5.
        let val = adaptive_simpson(&|x: f64| x.abs(), -1.0, 2.0, 1e-10);
        assert!((val - 2.5).abs() < 1e-8);
    }

    #[test]
    fn linear_fit_recovers_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let (b, m) = linear_fit(&xs, &ys);
        assert!((b - 3.0).abs() < 1e-12);
        assert!((m + 2.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_delta_wraps() {
        assert!((periodic_delta(0.1, 0.9, 1.0) - 0.2).abs() < 1e-15);
        assert!((periodic_delta(0.9, 0.1, 1.0) + 0.2).abs() < 1e-15);
    }
}
