//! Multi-phase Allen-Cahn phase-field simulation and verification on the
//! flat torus.
//!
//! The crate integrates the vector Allen-Cahn dynamics
//!
//! ```text
//!   du/dt = lap(u) - dW(u) / eps^2  (+ f / eps, or + lambda / eps)
//! ```
//!
//! with spectral operators on periodic grids, and measures every quantity
//! the sharp-interface limit (multi-phase mean-curvature flow with geodesic
//! surface tensions) is characterized by: energy and its dissipation,
//! equipartition, tilt-excess, first-variation and velocity pairings,
//! extracted partitions with interface geometry, junction angles and the
//! convergence-gap monitor.
//!
//! Entry points:
//! - [`potential`]: multi-well potentials W and hypothesis verification.
//! - [`geodesic`]: surface tensions sigma_ij, well distances, 1D profiles.
//! - [`field`]: periodic grids, spectral calculus, snapshots.
//! - [`solver`]: explicit / semi-implicit / minimizing-movement steppers,
//!   forced and volume-preserving variants, prepared initial data.
//! - [`diagnostics`]: the measured quantities above.
//! - [`sharp_interface`]: partition extraction and interface geometry.
//! - [`config`] / [`experiment`]: TOML-driven runs, sweeps, CSV output.
//! - [`verify`]: the named acceptance recipes behind `mcfpf verify`.
//!
//! The `examples/` directory holds one runnable example per capability; see
//! the README for the map.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod field;
pub mod geodesic;
pub mod numerics;
pub mod potential;
pub mod sharp_interface;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
