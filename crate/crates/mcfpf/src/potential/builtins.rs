//! Built-in potentials with closed-form splits and verified growth constants.

use super::{GrowthBounds, Potential};

/// Classical two-well potential W(u) = (u^2 - 1)^2 / 4 with wells at -1, +1.
///
/// Split: W_conv = u^4/4 + 1/4, W_pert = -u^2/2. W_pert is concave
/// (d^2 W_pert = -1 everywhere), so the sharp one-sided Hessian bound is 0;
/// declaring it keeps the semi-implicit stepper unstabilized, which the
/// energy-dissipation benchmark needs (and W'' <= 2 on the well range makes
/// the unstabilized scheme stable for dt <= eps^2).
#[derive(Debug, Clone)]
pub struct DoubleWell {
    wells: Vec<Vec<f64>>,
}

impl DoubleWell {
    #[allow(clippy::new_without_default)]
    pub fn new() -> Self {
        Self { wells: vec![vec![-1.0], vec![1.0]] }
    }
}

impl Potential for DoubleWell {
    fn dim(&self) -> usize {
        1
    }
    fn wells(&self) -> &[Vec<f64>] {
        &self.wells
    }
    fn value(&self, u: &[f64]) -> f64 {
        let s = u[0] * u[0] - 1.0;
        0.25 * s * s
    }
    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        out[0] = u[0] * (u[0] * u[0] - 1.0);
    }
    fn convex_value(&self, u: &[f64]) -> f64 {
        0.25 * u[0] * u[0] * u[0] * u[0] + 0.25
    }
    fn convex_gradient(&self, u: &[f64], out: &mut [f64]) {
        out[0] = u[0] * u[0] * u[0];
    }
    fn perturbation_value(&self, u: &[f64]) -> f64 {
        -0.5 * u[0] * u[0]
    }
    fn perturbation_gradient(&self, u: &[f64], out: &mut [f64]) {
        out[0] = -u[0];
    }
    fn growth(&self) -> GrowthBounds {
        GrowthBounds { exponent: 4.0, radius: 2.0, lower: 0.125, upper: 1.0 }
    }
    fn perturbation_hessian_bound(&self) -> f64 {
        0.0
    }
    fn name(&self) -> &str {
        "double_well"
    }
}

/// Scalar two-well potential W(u) = 18 u^2 (1-u)^2 with wells at 0 and 1,
/// normalized so the surface tension between the wells is exactly 1:
/// integral of sqrt(2 W) from 0 to 1 = integral of 6 u (1-u) du = 1.
///
/// Split: W_conv = W + 9 (u - 1/2)^2 (second derivative 54 (2u-1)^2 >= 0),
/// W_pert = -9 (u - 1/2)^2.
#[derive(Debug, Clone)]
pub struct UnitWell01 {
    wells: Vec<Vec<f64>>,
}

impl UnitWell01 {
    #[allow(clippy::new_without_default)]
    pub fn new() -> Self {
        Self { wells: vec![vec![0.0], vec![1.0]] }
    }
}

impl Potential for UnitWell01 {
    fn dim(&self) -> usize {
        1
    }
    fn wells(&self) -> &[Vec<f64>] {
        &self.wells
    }
    fn value(&self, u: &[f64]) -> f64 {
        let v = u[0];
        let w = 1.0 - v;
        18.0 * v * v * w * w
    }
    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        let v = u[0];
        out[0] = 36.0 * v * (1.0 - v) * (1.0 - 2.0 * v);
    }
    fn convex_value(&self, u: &[f64]) -> f64 {
        let d = u[0] - 0.5;
        self.value(u) + 9.0 * d * d
    }
    fn convex_gradient(&self, u: &[f64], out: &mut [f64]) {
        self.gradient(u, out);
        out[0] += 18.0 * (u[0] - 0.5);
    }
    fn perturbation_value(&self, u: &[f64]) -> f64 {
        let d = u[0] - 0.5;
        -9.0 * d * d
    }
    fn perturbation_gradient(&self, u: &[f64], out: &mut [f64]) {
        out[0] = -18.0 * (u[0] - 0.5);
    }
    fn growth(&self) -> GrowthBounds {
        GrowthBounds { exponent: 4.0, radius: 2.0, lower: 4.0, upper: 150.0 }
    }
    fn perturbation_hessian_bound(&self) -> f64 {
        18.0
    }
    fn name(&self) -> &str {
        "unit_well01"
    }
}

/// Vector potential on R^2 with three wells at the vertices of a unit
/// equilateral triangle centered at the origin:
///
/// ```text
///   W(u) = |u - a_1|^2 |u - a_2|^2 |u - a_3|^2.
/// ```
///
/// Degree 6, invariant under the 120-degree rotation that permutes the wells.
/// Split: W_conv = W + |u|^2 / 2, W_pert = -|u|^2 / 2 (the sampled minimum
/// Hessian eigenvalue of W is about -0.80, so adding the identity convexifies).
#[derive(Debug, Clone)]
pub struct TripleWell {
    wells: Vec<Vec<f64>>,
}

impl TripleWell {
    #[allow(clippy::new_without_default)]
    pub fn new() -> Self {
        let r = 1.0 / 3.0f64.sqrt(); // circumradius of a unit-side triangle
        let wells = (0..3)
            .map(|k| {
                let theta = std::f64::consts::FRAC_PI_2
                    + 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                vec![r * theta.cos(), r * theta.sin()]
            })
            .collect();
        Self { wells }
    }

    fn dist_sq(u: &[f64], w: &[f64]) -> f64 {
        let dx = u[0] - w[0];
        let dy = u[1] - w[1];
        dx * dx + dy * dy
    }
}

impl Potential for TripleWell {
    fn dim(&self) -> usize {
        2
    }
    fn wells(&self) -> &[Vec<f64>] {
        &self.wells
    }
    fn value(&self, u: &[f64]) -> f64 {
        self.wells
            .iter()
            .map(|w| Self::dist_sq(u, w))
            .product()
    }
    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        let q: Vec<f64> = self.wells.iter().map(|w| Self::dist_sq(u, w)).collect();
        out[0] = 0.0;
        out[1] = 0.0;
        for (i, w) in self.wells.iter().enumerate() {
            let mut prod = 2.0;
            for (j, &qj) in q.iter().enumerate() {
                if j != i {
                    prod *= qj;
                }
            }
            out[0] += prod * (u[0] - w[0]);
            out[1] += prod * (u[1] - w[1]);
        }
    }
    fn convex_value(&self, u: &[f64]) -> f64 {
        self.value(u) + 0.5 * (u[0] * u[0] + u[1] * u[1])
    }
    fn convex_gradient(&self, u: &[f64], out: &mut [f64]) {
        self.gradient(u, out);
        out[0] += u[0];
        out[1] += u[1];
    }
    fn perturbation_value(&self, u: &[f64]) -> f64 {
        -0.5 * (u[0] * u[0] + u[1] * u[1])
    }
    fn perturbation_gradient(&self, u: &[f64], out: &mut [f64]) {
        out[0] = -u[0];
        out[1] = -u[1];
    }
    fn growth(&self) -> GrowthBounds {
        // Sampled on |u| in [2, 20]: W/|u|^6 in [0.95, 1.05], |dW|/|u|^5 <= 6.2.
        GrowthBounds { exponent: 6.0, radius: 2.0, lower: 0.9, upper: 7.0 }
    }
    fn perturbation_hessian_bound(&self) -> f64 {
        1.0
    }
    fn name(&self) -> &str {
        "triple_well"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wells_have_unit_separation() {
        let tw = TripleWell::new();
        for i in 0..3 {
            for j in i + 1..3 {
                let d = TripleWell::dist_sq(&tw.wells[i], &tw.wells[j]).sqrt();
                assert!((d - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn split_adds_up() {
        let tw = TripleWell::new();
        let u = [0.3, -0.4];
        assert!(
            (tw.value(&u) - tw.convex_value(&u) - tw.perturbation_value(&u)).abs() < 1e-14
        );
    }

    #[test]
    fn unit_well_derivative_zero_at_half() {
        let uw = UnitWell01::new();
        let mut g = [0.0];
        uw.gradient(&[0.5], &mut g);
        assert_eq!(g[0], 0.0);
    }
}
