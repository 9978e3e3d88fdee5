//! User-defined polynomial potentials, loadable from the config file.
//!
//! The convex and perturbation parts are given separately as coefficient
//! lists; each term is `coeff * u_1^e_1 * ... * u_N^e_N`. W is their sum.

use serde::{Deserialize, Serialize};

use super::{GrowthBounds, Potential};
use crate::error::{Error, Result};

/// One monomial term `coeff * prod_c u_c^exponents[c]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

impl Monomial {
    fn eval(&self, u: &[f64]) -> f64 {
        let mut v = self.coeff;
        for (x, &e) in u.iter().zip(&self.exponents) {
            v *= x.powi(e as i32);
        }
        v
    }

    fn grad_component(&self, u: &[f64], c: usize) -> f64 {
        let e = self.exponents[c];
        if e == 0 {
            return 0.0;
        }
        let mut v = self.coeff * e as f64 * u[c].powi(e as i32 - 1);
        for (k, (x, &ek)) in u.iter().zip(&self.exponents).enumerate() {
            if k != c {
                v *= x.powi(ek as i32);
            }
        }
        v
    }
}

/// Polynomial potential W = W_conv + W_pert with user-declared constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialPotential {
    pub dim: usize,
    pub wells: Vec<Vec<f64>>,
    pub convex_terms: Vec<Monomial>,
    pub pert_terms: Vec<Monomial>,
    pub growth: GrowthBounds,
    pub pert_hessian_bound: f64,
    #[serde(default = "default_name")]
    pub label: String,
}

fn default_name() -> String {
    "polynomial".to_string()
}

impl PolynomialPotential {
    /// Validates dimensions of wells and terms against `dim`.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("polynomial potential: dim must be >= 1".into()));
        }
        if self.wells.len() < 2 {
            return Err(Error::Config("polynomial potential: need at least 2 wells".into()));
        }
        for w in &self.wells {
            if w.len() != self.dim {
                return Err(Error::Config(format!(
                    "polynomial potential: well of length {} but dim = {}",
                    w.len(),
                    self.dim
                )));
            }
        }
        for t in self.convex_terms.iter().chain(&self.pert_terms) {
            if t.exponents.len() != self.dim {
                return Err(Error::Config(format!(
                    "polynomial potential: term with {} exponents but dim = {}",
                    t.exponents.len(),
                    self.dim
                )));
            }
        }
        Ok(())
    }
}

impl Potential for PolynomialPotential {
    fn dim(&self) -> usize {
        self.dim
    }
    fn wells(&self) -> &[Vec<f64>] {
        &self.wells
    }
    fn value(&self, u: &[f64]) -> f64 {
        self.convex_value(u) + self.perturbation_value(u)
    }
    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        for c in 0..self.dim {
            out[c] = self
                .convex_terms
                .iter()
                .chain(&self.pert_terms)
                .map(|t| t.grad_component(u, c))
                .sum();
        }
    }
    fn convex_value(&self, u: &[f64]) -> f64 {
        self.convex_terms.iter().map(|t| t.eval(u)).sum()
    }
    fn convex_gradient(&self, u: &[f64], out: &mut [f64]) {
        for c in 0..self.dim {
            out[c] = self.convex_terms.iter().map(|t| t.grad_component(u, c)).sum();
        }
    }
    fn perturbation_value(&self, u: &[f64]) -> f64 {
        self.pert_terms.iter().map(|t| t.eval(u)).sum()
    }
    fn perturbation_gradient(&self, u: &[f64], out: &mut [f64]) {
        for c in 0..self.dim {
            out[c] = self.pert_terms.iter().map(|t| t.grad_component(u, c)).sum();
        }
    }
    fn growth(&self) -> GrowthBounds {
        self.growth
    }
    fn perturbation_hessian_bound(&self) -> f64 {
        self.pert_hessian_bound
    }
    fn name(&self) -> &str {
        &self.label
    }
}

#[cfg(test)]
mod tests {
    use super::super::verify_hypotheses;
    use super::*;

    /// The double well expressed as a polynomial: W = u^4/4 - u^2/2 + 1/4.
    fn poly_double_well() -> PolynomialPotential {
        PolynomialPotential {
            dim: 1,
            wells: vec![vec![-1.0], vec![1.0]],
            convex_terms: vec![
                Monomial { coeff: 0.25, exponents: vec![4] },
                Monomial { coeff: 0.25, exponents: vec![0] },
            ],
            pert_terms: vec![Monomial { coeff: -0.5, exponents: vec![2] }],
            growth: GrowthBounds { exponent: 4.0, radius: 2.0, lower: 0.125, upper: 1.0 },
            pert_hessian_bound: 1.0,
            label: "poly_double_well".into(),
        }
    }

    #[test]
    fn polynomial_double_well_matches_builtin() {
        let poly = poly_double_well();
        poly.validate().unwrap();
        let builtin = super::super::DoubleWell::new();
        for u in [-1.7, -0.3, 0.0, 0.6, 2.2] {
            assert!((poly.value(&[u]) - builtin.value(&[u])).abs() < 1e-14);
            let mut gp = [0.0];
            let mut gb = [0.0];
            poly.gradient(&[u], &mut gp);
            builtin.gradient(&[u], &mut gb);
            assert!((gp[0] - gb[0]).abs() < 1e-13);
        }
        assert!(verify_hypotheses(&poly, 300, 1).all_passed());
    }

    #[test]
    fn validation_catches_bad_shapes() {
        let mut p = poly_double_well();
        p.wells.push(vec![0.0, 0.0]);
        assert!(p.validate().is_err());
    }
}
