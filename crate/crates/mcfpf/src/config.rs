//! Experiment configuration: the TOML schema behind `mcfpf run` / `sweep` /
//! `geodesics` / `profile`. Unknown keys are schema errors, reported with
//! their key paths before any compute.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{DoubleWell, PolynomialPotential, Potential, TripleWell, UnitWell01};
use crate::solver::{Disk, Dynamics, Forcing, Geometry, Scheme};

/// Which potential a run uses: a builtin by name or a user polynomial.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialSpec {
    Builtin(String),
    Custom { custom: PolynomialPotential },
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Box<dyn Potential>> {
        match self {
            PotentialSpec::Builtin(name) => match name.as_str() {
                "double_well" => Ok(Box::new(DoubleWell::new())),
                "unit_well01" => Ok(Box::new(UnitWell01::new())),
                "triple_well" => Ok(Box::new(TripleWell::new())),
                other => Err(Error::Config(format!(
                    "unknown potential '{other}' (expected double_well, unit_well01, \
                     triple_well, or a custom table)"
                ))),
            },
            PotentialSpec::Custom { custom } => {
                custom.validate()?;
                Ok(Box::new(custom.clone()))
            }
        }
    }
}

/// Grid block.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    pub n: usize,
    pub lambda: f64,
}

impl GridConfig {
    pub fn build(&self) -> Result<crate::field::Grid> {
        crate::field::Grid::new(self.d, self.n, self.lambda)
    }
}

/// Observer strides, in steps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ObserverSpec {
    /// Diagnostics stride; defaults to max(1, round(0.1 eps^2/dt)).
    pub stride: Option<usize>,
    /// Record interface meshes at observations.
    #[serde(default)]
    pub meshes: bool,
    /// Snapshot stride in observations (unset: initial and final only).
    pub snapshot_stride: Option<usize>,
}

/// Scalar window specification (plateau bump).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    pub smoothness: f64,
}

/// Geometry block. A flat deny-unknown struct rather than the solver enum:
/// serde's tagged enums silently drop unknown keys, and unknown config keys
/// must be schema errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub kind: String,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub disks: Option<Vec<Disk>>,
    pub axis: Option<usize>,
    pub width: Option<f64>,
    pub inside: Option<usize>,
    pub outside: Option<usize>,
    pub wells: Option<Vec<usize>>,
}

impl GeometrySpec {
    pub fn build(&self) -> Result<Geometry> {
        let need = |name: &str| Error::Config(format!("geometry '{}' needs '{name}'", self.kind));
        match self.kind.as_str() {
            "circle" => Ok(Geometry::Circle {
                center: self.center.clone().ok_or_else(|| need("center"))?,
                radius: self.radius.ok_or_else(|| need("radius"))?,
                inside: self.inside.ok_or_else(|| need("inside"))?,
                outside: self.outside.ok_or_else(|| need("outside"))?,
            }),
            "circles" => Ok(Geometry::Circles {
                disks: self.disks.clone().ok_or_else(|| need("disks"))?,
                inside: self.inside.ok_or_else(|| need("inside"))?,
                outside: self.outside.ok_or_else(|| need("outside"))?,
            }),
            "stripe" => Ok(Geometry::Stripe {
                axis: self.axis.ok_or_else(|| need("axis"))?,
                width: self.width.ok_or_else(|| need("width"))?,
                inside: self.inside.ok_or_else(|| need("inside"))?,
                outside: self.outside.ok_or_else(|| need("outside"))?,
            }),
            "tripod" => {
                let wells = self.wells.clone().ok_or_else(|| need("wells"))?;
                let wells: [usize; 3] = wells.try_into().map_err(|_| {
                    Error::Config("tripod geometry needs exactly three wells".into())
                })?;
                Ok(Geometry::Tripod { wells })
            }
            other => Err(Error::Config(format!(
                "unknown geometry kind '{other}' (circle, circles, stripe, tripod)"
            ))),
        }
    }
}

/// Forcing block, deny-unknown for the same reason as [`GeometrySpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    pub kind: String,
    pub amplitude: Option<Vec<f64>>,
    pub modes: Option<Vec<i64>>,
    pub omega: Option<f64>,
}

impl ForcingSpec {
    pub fn build(&self) -> Result<Forcing> {
        let need =
            |name: &str| Error::Config(format!("forcing '{}' needs '{name}'", self.kind));
        match self.kind.as_str() {
            "constant" => Ok(Forcing::Constant {
                amplitude: self.amplitude.clone().ok_or_else(|| need("amplitude"))?,
            }),
            "plane_wave" => Ok(Forcing::PlaneWave {
                amplitude: self.amplitude.clone().ok_or_else(|| need("amplitude"))?,
                modes: self.modes.clone().ok_or_else(|| need("modes"))?,
                omega: self.omega.ok_or_else(|| need("omega"))?,
            }),
            other => Err(Error::Config(format!(
                "unknown forcing kind '{other}' (constant, plane_wave)"
            ))),
        }
    }
}

/// Sweep axes; the cartesian product is run.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub dt: Vec<f64>,
}

/// The dynamics variant by name, with the forcing spec when forced.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VariantSpec {
    #[default]
    Plain,
    Forced,
    VolumePreserving,
}

/// Top-level experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub potential: PotentialSpec,
    pub grid: GridConfig,
    pub epsilon: f64,
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub variant: VariantSpec,
    pub forcing: Option<ForcingSpec>,
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub observers: ObserverSpec,
    pub window: Option<WindowSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub output_dir: Option<String>,
    /// Permit eps < 2 lambda / n (under-resolved interfaces).
    #[serde(default)]
    pub allow_underresolved: bool,
    /// Profile table parameters for the prepared initial data.
    #[serde(default = "default_profile_half_width")]
    pub profile_half_width: f64,
    #[serde(default = "default_profile_samples")]
    pub profile_samples: usize,
}

fn default_seed() -> u64 {
    0
}

fn default_profile_half_width() -> f64 {
    8.0
}

fn default_profile_samples() -> usize {
    4097
}

impl ExperimentConfig {
    /// Parses TOML with unknown-key rejection; the error carries key paths.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Static validation before any compute.
    pub fn validate(&self) -> Result<()> {
        if self.dt <= 0.0 {
            return Err(Error::Config("dt must be positive".into()));
        }
        if self.t_end < 0.0 {
            return Err(Error::Config("t_end must be nonnegative".into()));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        self.grid.build()?;
        let check_resolution = |eps: f64, n: usize| -> Result<()> {
            let floor = 2.0 * self.grid.lambda / n as f64;
            if eps < floor && !self.allow_underresolved {
                return Err(Error::Config(format!(
                    "epsilon = {eps} under-resolves the grid (needs >= {floor}); \
                     set allow_underresolved = true to override"
                )));
            }
            Ok(())
        };
        check_resolution(self.epsilon, self.grid.n)?;
        self.geometry.build()?;
        if let Some(f) = &self.forcing {
            f.build()?;
        }
        if matches!(self.variant, VariantSpec::Forced) && self.forcing.is_none() {
            return Err(Error::Config("variant = 'forced' requires a [forcing] table".into()));
        }
        if matches!(self.scheme, Scheme::MinimizingMovement)
            && !matches!(self.variant, VariantSpec::Plain)
        {
            return Err(Error::Config(
                "minimizing movements supports only the plain variant".into(),
            ));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.epsilon.is_empty() && sweep.n.is_empty() && sweep.dt.is_empty() {
                return Err(Error::Config("sweep tables must list at least one axis".into()));
            }
            let n_axis: Vec<usize> =
                if sweep.n.is_empty() { vec![self.grid.n] } else { sweep.n.clone() };
            let eps_axis: Vec<f64> = if sweep.epsilon.is_empty() {
                vec![self.epsilon]
            } else {
                sweep.epsilon.clone()
            };
            for &eps in &eps_axis {
                for &n in &n_axis {
                    check_resolution(eps, n)?;
                }
            }
        }
        Ok(())
    }

    /// The dynamics variant, wiring in the forcing spec.
    pub fn dynamics(&self) -> Result<Dynamics> {
        Ok(match self.variant {
            VariantSpec::Plain => Dynamics::Plain,
            VariantSpec::VolumePreserving => Dynamics::VolumePreserving,
            VariantSpec::Forced => {
                let forcing = self
                    .forcing
                    .as_ref()
                    .ok_or_else(|| Error::Config("missing [forcing] table".into()))?
                    .build()?;
                Dynamics::Forced { forcing }
            }
        })
    }

    /// Sweep points as (epsilon, n, dt) triples; missing axes fall back to
    /// the top-level values.
    pub fn sweep_points(&self) -> Result<Vec<(f64, usize, f64)>> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Config("missing [sweep] table".into()))?;
        let eps_axis: Vec<f64> = if sweep.epsilon.is_empty() {
            vec![self.epsilon]
        } else {
            sweep.epsilon.clone()
        };
        let n_axis: Vec<usize> =
            if sweep.n.is_empty() { vec![self.grid.n] } else { sweep.n.clone() };
        let dt_axis: Vec<f64> = if sweep.dt.is_empty() { vec![self.dt] } else { sweep.dt.clone() };
        let mut points = Vec::new();
        for &eps in &eps_axis {
            for &n in &n_axis {
                for &dt in &dt_axis {
                    points.push((eps, n, dt));
                }
            }
        }
        Ok(points)
    }
}
