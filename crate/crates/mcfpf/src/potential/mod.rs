//! Multi-well potentials W: R^N -> [0, inf) and their calculus.
//!
//! A potential carries its zeros (the wells alpha_1..alpha_P, one per phase),
//! a convex/perturbation split W = W_conv + W_pert used by the stabilized
//! stepper, and declared growth constants (c, C, R, p) that are verified by
//! sampling rather than assumed:
//!
//! ```text
//!   c |u|^p <= W(u) <= C |u|^p          for |u| >= R,
//!   |dW(u)| <= C |u|^(p-1)              for |u| >= R,
//!   d^2 W_pert <= C_tilde               (directional second differences).
//! ```

mod builtins;
mod polynomial;

pub use builtins::{DoubleWell, TripleWell, UnitWell01};
pub use polynomial::{Monomial, PolynomialPotential};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Declared polynomial growth envelope of a potential.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct GrowthBounds {
    /// Growth exponent p >= 2.
    pub exponent: f64,
    /// Radius R beyond which the envelope is claimed.
    pub radius: f64,
    /// Lower constant c in c|u|^p <= W(u).
    pub lower: f64,
    /// Upper constant C in W(u) <= C|u|^p and |dW(u)| <= C|u|^(p-1).
    pub upper: f64,
}

/// A smooth multi-well potential on R^N.
///
/// Evaluation is pure and reentrant; implementations must be safe to call
/// concurrently from data-parallel grid sweeps.
pub trait Potential: Send + Sync {
    /// State-space dimension N.
    fn dim(&self) -> usize;

    /// The zeros alpha_1..alpha_P of W, each of length `dim()`.
    fn wells(&self) -> &[Vec<f64>];

    /// W(u).
    fn value(&self, u: &[f64]) -> f64;

    /// dW(u), written into `out` (length `dim()`).
    fn gradient(&self, u: &[f64], out: &mut [f64]);

    /// Convex part W_conv(u).
    fn convex_value(&self, u: &[f64]) -> f64;

    /// dW_conv(u).
    fn convex_gradient(&self, u: &[f64], out: &mut [f64]);

    /// Perturbation part W_pert(u) = W(u) - W_conv(u).
    fn perturbation_value(&self, u: &[f64]) -> f64;

    /// dW_pert(u).
    fn perturbation_gradient(&self, u: &[f64], out: &mut [f64]);

    /// Declared growth envelope.
    fn growth(&self) -> GrowthBounds;

    /// Bound C_tilde on the second differences of W_pert; also used as the
    /// stabilization constant of the semi-implicit stepper.
    fn perturbation_hessian_bound(&self) -> f64;

    /// Human-readable name (used in configs and reports).
    fn name(&self) -> &str;
}

/// Number of phases P.
pub fn well_count(pot: &dyn Potential) -> usize {
    pot.wells().len()
}

/// Checked evaluation: W(u) with a domain error on non-finite input.
pub fn eval_potential(pot: &dyn Potential, u: &[f64]) -> Result<f64> {
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    Ok(pot.value(u))
}

/// Checked evaluation of dW(u).
pub fn grad_potential(pot: &dyn Potential, u: &[f64]) -> Result<Vec<f64>> {
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let mut g = vec![0.0; pot.dim()];
    pot.gradient(u, &mut g);
    Ok(g)
}

/// Max sampled eigenvalue of the Hessian of W near the wells, estimated by
/// directional second differences. Feeds the explicit stepper's CFL bound.
pub fn stiffness_bound(pot: &dyn Potential) -> f64 {
    let n = pot.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5713);
    // Probe radius: a tenth of the smallest well separation.
    let mut sep = f64::INFINITY;
    let wells = pot.wells();
    for i in 0..wells.len() {
        for j in i + 1..wells.len() {
            let d: f64 = wells[i]
                .iter()
                .zip(&wells[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            sep = sep.min(d);
        }
    }
    if !sep.is_finite() {
        sep = 1.0; // single-well potential: probe a unit neighborhood
    }
    let radius = 0.1 * sep;
    let h = 1e-4 * sep.max(1.0);
    let mut bound: f64 = 0.0;
    let mut base = vec![0.0; n];
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    for well in wells {
        for _ in 0..200 {
            let dir = random_unit(&mut rng, n);
            for c in 0..n {
                base[c] = well[c] + radius * (2.0 * rng.gen::<f64>() - 1.0);
                plus[c] = base[c] + h * dir[c];
                minus[c] = base[c] - h * dir[c];
            }
            let dd =
                (pot.value(&plus) - 2.0 * pot.value(&base) + pot.value(&minus)) / (h * h);
            bound = bound.max(dd);
        }
    }
    bound
}

/// One sampled hypothesis check.
#[derive(Debug, Clone)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub passed: bool,
    pub samples: usize,
    /// Worst signed violation observed (<= 0 means the check held everywhere).
    pub worst_violation: f64,
    pub detail: String,
}

/// Result of [`verify_hypotheses`]; failures are entries, never errors.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        // Gaussian via Box-Muller, normalized.
        let v: Vec<f64> = (0..n)
            .map(|_| {
                let u1: f64 = rng.gen::<f64>().max(1e-300);
                let u2: f64 = rng.gen();
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// Verifies the declared potential hypotheses on deterministic pseudo-random
/// samples: wells are zeros, nonnegativity, the growth sandwich on
/// |u| in [R, 10R], the derivative growth, split consistency, midpoint
/// convexity of W_conv and boundedness of the second differences of W_pert.
///
/// User-defined potentials are opaque callables, so verification is sampled,
/// not symbolic; a failed check is a report entry, not an error.
pub fn verify_hypotheses(
    pot: &dyn Potential,
    sample_count: usize,
    seed: u64,
) -> HypothesisReport {
    assert!(sample_count >= 1, "sample_count must be >= 1");
    let n = pot.dim();
    let growth = pot.growth();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // Wells are zeros of W and dW.
    {
        let mut worst: f64 = 0.0;
        let mut grad = vec![0.0; n];
        for well in pot.wells() {
            worst = worst.max(pot.value(well).abs());
            pot.gradient(well, &mut grad);
            worst = worst.max(grad.iter().map(|g| g.abs()).fold(0.0, f64::max));
        }
        checks.push(HypothesisCheck {
            name: "wells_are_critical_zeros",
            passed: worst <= 1e-12,
            samples: pot.wells().len(),
            worst_violation: worst - 1e-12,
            detail: format!("max |W|, |dW| over wells = {worst:.3e}"),
        });
    }

    let box_half = 2.0 * growth.radius;
    let sample_box = |rng: &mut ChaCha8Rng, out: &mut [f64]| {
        for x in out.iter_mut() {
            *x = box_half * (2.0 * rng.gen::<f64>() - 1.0);
        }
    };

    // Nonnegativity of W.
    {
        let mut worst = f64::NEG_INFINITY;
        let mut u = vec![0.0; n];
        for _ in 0..sample_count {
            sample_box(&mut rng, &mut u);
            worst = worst.max(-pot.value(&u));
        }
        checks.push(HypothesisCheck {
            name: "nonnegative",
            passed: worst <= 1e-12,
            samples: sample_count,
            worst_violation: worst,
            detail: format!("max(-W) = {worst:.3e}"),
        });
    }

    // Growth sandwich and derivative growth on |u| in [R, 10R].
    {
        let mut worst_low = f64::NEG_INFINITY;
        let mut worst_high = f64::NEG_INFINITY;
        let mut worst_grad = f64::NEG_INFINITY;
        let mut u = vec![0.0; n];
        let mut g = vec![0.0; n];
        for _ in 0..sample_count {
            let r = growth.radius * (1.0 + 9.0 * rng.gen::<f64>());
            let dir = random_unit(&mut rng, n);
            for c in 0..n {
                u[c] = r * dir[c];
            }
            let w = pot.value(&u);
            let rp = r.powf(growth.exponent);
            // Relative slack so large |u| values do not trip on round-off.
            let tol = 1e-9 * rp.max(1.0);
            worst_low = worst_low.max(growth.lower * rp - w - tol);
            worst_high = worst_high.max(w - growth.upper * rp - tol);
            pot.gradient(&u, &mut g);
            let gn: f64 = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            let rq = r.powf(growth.exponent - 1.0);
            worst_grad = worst_grad.max(gn - growth.upper * rq - 1e-9 * rq.max(1.0));
        }
        checks.push(HypothesisCheck {
            name: "growth_lower",
            passed: worst_low <= 0.0,
            samples: sample_count,
            worst_violation: worst_low,
            detail: format!("max(c|u|^p - W) = {worst_low:.3e}"),
        });
        checks.push(HypothesisCheck {
            name: "growth_upper",
            passed: worst_high <= 0.0,
            samples: sample_count,
            worst_violation: worst_high,
            detail: format!("max(W - C|u|^p) = {worst_high:.3e}"),
        });
        checks.push(HypothesisCheck {
            name: "growth_derivative",
            passed: worst_grad <= 0.0,
            samples: sample_count,
            worst_violation: worst_grad,
            detail: format!("max(|dW| - C|u|^(p-1)) = {worst_grad:.3e}"),
        });
    }

    // Split consistency W = W_conv + W_pert.
    {
        let mut worst = f64::NEG_INFINITY;
        let mut u = vec![0.0; n];
        for _ in 0..sample_count {
            sample_box(&mut rng, &mut u);
            let w = pot.value(&u);
            let split = pot.convex_value(&u) + pot.perturbation_value(&u);
            worst = worst.max((w - split).abs() - 1e-12 * w.abs().max(1.0));
        }
        checks.push(HypothesisCheck {
            name: "split_consistency",
            passed: worst <= 0.0,
            samples: sample_count,
            worst_violation: worst,
            detail: format!("max |W - (W_conv + W_pert)| beyond tol = {worst:.3e}"),
        });
    }

    // Midpoint convexity of W_conv on random segments.
    {
        let mut worst = f64::NEG_INFINITY;
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut m = vec![0.0; n];
        for _ in 0..sample_count {
            sample_box(&mut rng, &mut a);
            sample_box(&mut rng, &mut b);
            for c in 0..n {
                m[c] = 0.5 * (a[c] + b[c]);
            }
            let wa = pot.convex_value(&a);
            let wb = pot.convex_value(&b);
            let wm = pot.convex_value(&m);
            let tol = 1e-12 * (wa.abs() + wb.abs()).max(1.0);
            worst = worst.max(wm - 0.5 * (wa + wb) - tol);
        }
        checks.push(HypothesisCheck {
            name: "convexity_of_convex_part",
            passed: worst <= 0.0,
            samples: sample_count,
            worst_violation: worst,
            detail: format!("max midpoint violation = {worst:.3e}"),
        });
    }

    // Directional second differences of W_pert bounded by C_tilde.
    {
        let c_tilde = pot.perturbation_hessian_bound();
        let h = 1e-3;
        let mut worst = f64::NEG_INFINITY;
        let mut u = vec![0.0; n];
        let mut up = vec![0.0; n];
        let mut um = vec![0.0; n];
        for _ in 0..sample_count {
            sample_box(&mut rng, &mut u);
            let dir = random_unit(&mut rng, n);
            for c in 0..n {
                up[c] = u[c] + h * dir[c];
                um[c] = u[c] - h * dir[c];
            }
            let dd = (pot.perturbation_value(&up) - 2.0 * pot.perturbation_value(&u)
                + pot.perturbation_value(&um))
                / (h * h);
            worst = worst.max(dd - c_tilde - 1e-6 * c_tilde.abs().max(1.0));
        }
        checks.push(HypothesisCheck {
            name: "perturbation_hessian_bound",
            passed: worst <= 0.0,
            samples: sample_count,
            worst_violation: worst,
            detail: format!("max(d2 W_pert - C_tilde) = {worst:.3e}"),
        });
    }

    // Gradient consistency: dW matches central differences of W.
    {
        let mut worst = f64::NEG_INFINITY;
        let mut u = vec![0.0; n];
        let mut g = vec![0.0; n];
        let mut up = vec![0.0; n];
        let mut um = vec![0.0; n];
        let h = 1e-5;
        for _ in 0..sample_count.min(200) {
            sample_box(&mut rng, &mut u);
            pot.gradient(&u, &mut g);
            let gn: f64 = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            for c in 0..n {
                up.copy_from_slice(&u);
                um.copy_from_slice(&u);
                up[c] += h;
                um[c] -= h;
                let fd = (pot.value(&up) - pot.value(&um)) / (2.0 * h);
                worst = worst.max((g[c] - fd).abs() - 1e-6 * gn.max(1.0));
            }
        }
        checks.push(HypothesisCheck {
            name: "gradient_consistency",
            passed: worst <= 0.0,
            samples: sample_count.min(200),
            worst_violation: worst,
            detail: format!("max |dW - FD| beyond tol = {worst:.3e}"),
        });
    }

    HypothesisReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct WrongGrowth<P>(P, GrowthBounds);
    impl<P: Potential> Potential for WrongGrowth<P> {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn wells(&self) -> &[Vec<f64>] {
            self.0.wells()
        }
        fn value(&self, u: &[f64]) -> f64 {
            self.0.value(u)
        }
        fn gradient(&self, u: &[f64], out: &mut [f64]) {
            self.0.gradient(u, out)
        }
        fn convex_value(&self, u: &[f64]) -> f64 {
            self.0.convex_value(u)
        }
        fn convex_gradient(&self, u: &[f64], out: &mut [f64]) {
            self.0.convex_gradient(u, out)
        }
        fn perturbation_value(&self, u: &[f64]) -> f64 {
            self.0.perturbation_value(u)
        }
        fn perturbation_gradient(&self, u: &[f64], out: &mut [f64]) {
            self.0.perturbation_gradient(u, out)
        }
        fn growth(&self) -> GrowthBounds {
            self.1
        }
        fn perturbation_hessian_bound(&self) -> f64 {
            self.0.perturbation_hessian_bound()
        }
        fn name(&self) -> &str {
            "wrong_growth"
        }
    }

    #[test]
    fn eval_examples() {
        let dw = DoubleWell::new();
        assert_eq!(eval_potential(&dw, &[1.0]).unwrap(), 0.0);
        assert!((eval_potential(&dw, &[0.0]).unwrap() - 0.25).abs() < 1e-15);
        let uw = UnitWell01::new();
        assert!((eval_potential(&uw, &[0.5]).unwrap() - 1.125).abs() < 1e-15);
    }

    #[test]
    fn grad_examples() {
        let dw = DoubleWell::new();
        assert_eq!(grad_potential(&dw, &[-1.0]).unwrap()[0], 0.0);
        assert!((grad_potential(&dw, &[0.5]).unwrap()[0] + 0.375).abs() < 1e-15);
        let tw = TripleWell::new();
        let g = grad_potential(&tw, &tw.wells()[0].clone()).unwrap();
        assert!(g.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn non_finite_input_is_domain_error() {
        let dw = DoubleWell::new();
        assert!(matches!(
            eval_potential(&dw, &[f64::NAN]),
            Err(Error::NonFiniteInput)
        ));
        assert!(matches!(
            grad_potential(&dw, &[f64::INFINITY]),
            Err(Error::NonFiniteInput)
        ));
    }

    #[test]
    fn builtins_pass_hypothesis_checks() {
        for pot in [
            Box::new(DoubleWell::new()) as Box<dyn Potential>,
            Box::new(UnitWell01::new()),
            Box::new(TripleWell::new()),
        ] {
            let report = verify_hypotheses(pot.as_ref(), 500, 42);
            assert!(
                report.all_passed(),
                "{} failed: {:?}",
                pot.name(),
                report.failed()
            );
        }
    }

    #[test]
    fn wrong_exponent_fails_growth_check() {
        let mut g = DoubleWell::new().growth();
        g.exponent = 2.0; // W grows quartically, not quadratically
        let wrapped = WrongGrowth(DoubleWell::new(), g);
        let report = verify_hypotheses(&wrapped, 500, 42);
        assert!(!report.all_passed());
        assert!(report
            .failed()
            .iter()
            .any(|c| c.name == "growth_upper" || c.name == "growth_lower"));
    }

    #[test]
    fn gradient_matches_finite_differences_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for pot in [
            Box::new(DoubleWell::new()) as Box<dyn Potential>,
            Box::new(UnitWell01::new()),
            Box::new(TripleWell::new()),
        ] {
            let n = pot.dim();
            let mut g = vec![0.0; n];
            for _ in 0..100 {
                let u: Vec<f64> = (0..n).map(|_| 4.0 * (2.0 * rng.gen::<f64>() - 1.0)).collect();
                pot.gradient(&u, &mut g);
                let gn: f64 = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                for c in 0..n {
                    let h = 1e-5;
                    let mut up = u.clone();
                    let mut um = u.clone();
                    up[c] += h;
                    um[c] -= h;
                    let fd = (pot.value(&up) - pot.value(&um)) / (2.0 * h);
                    assert!(
                        (g[c] - fd).abs() <= 1e-6 * gn.max(1.0),
                        "{}: grad mismatch {} vs {}",
                        pot.name(),
                        g[c],
                        fd
                    );
                }
            }
        }
    }

    #[test]
    fn triple_well_rotation_symmetry() {
        let tw = TripleWell::new();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (c, s) = ((2.0 * std::f64::consts::PI / 3.0).cos(), (2.0 * std::f64::consts::PI / 3.0).sin());
        for _ in 0..100 {
            let u = [2.0 * rng.gen::<f64>() - 1.0, 2.0 * rng.gen::<f64>() - 1.0];
            let ru = [c * u[0] - s * u[1], s * u[0] + c * u[1]];
            assert!((tw.value(&u) - tw.value(&ru)).abs() < 1e-12);
        }
        // The rotation permutes the wells.
        for w in tw.wells() {
            let rw = [c * w[0] - s * w[1], s * w[0] + c * w[1]];
            let matched = tw
                .wells()
                .iter()
                .any(|v| (v[0] - rw[0]).abs() < 1e-12 && (v[1] - rw[1]).abs() < 1e-12);
            assert!(matched);
        }
    }

    #[test]
    fn convex_part_midpoint_inequality_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for pot in [
            Box::new(DoubleWell::new()) as Box<dyn Potential>,
            Box::new(UnitWell01::new()),
            Box::new(TripleWell::new()),
        ] {
            let n = pot.dim();
            for _ in 0..100 {
                let a: Vec<f64> = (0..n).map(|_| 4.0 * (2.0 * rng.gen::<f64>() - 1.0)).collect();
                let b: Vec<f64> = (0..n).map(|_| 4.0 * (2.0 * rng.gen::<f64>() - 1.0)).collect();
                let m: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
                let (wa, wb, wm) =
                    (pot.convex_value(&a), pot.convex_value(&b), pot.convex_value(&m));
                assert!(wm <= 0.5 * (wa + wb) + 1e-12 * (wa + wb).abs().max(1.0));
            }
        }
    }

    #[test]
    fn stiffness_bound_is_positive_and_sane() {
        let s_dw = stiffness_bound(&DoubleWell::new());
        assert!(s_dw > 2.0 && s_dw < 3.5, "double well stiffness {s_dw}");
        let s = stiffness_bound(&UnitWell01::new());
        assert!(s > 30.0 && s < 70.0, "unit well stiffness {s}");
    }
}
