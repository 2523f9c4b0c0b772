//! TOML problem description. Every physical quantity carries its unit in the key name.
//!
//! ```toml
//! [grid]
//! cells = [20, 20, 70]
//! spacing_cm = [0.1, 0.1, 0.1]
//!
//! [phantom]
//! background_hu = 0.0
//! [[phantom.box]]
//! min_cm = [1.0, 0.0, 2.0]
//! max_cm = [2.0, 2.0, 5.0]
//! hu = -400.0
//!
//! [[beam]]
//! direction = [0.0, 0.0, 1.0]
//! energy_mev = 90.0
//! entry_cm = [1.0, 1.0, 0.0]
//!
//! [output]
//! dir = "out/homogeneous"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use protonlr_core::dlra::TruncationPolicy;
use protonlr_core::physics::ScatteringModel;
use protonlr_core::pipeline::{CollisionModel, SolverSettings, TruncateAfter};
use protonlr_core::raytracer::{BeamSource, RayBundle, DEFAULT_MAX_STEP_CM};
use protonlr_core::spatial::{Boundary, Grid3D};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

/// Smallest number of cells along a used axis (width of the upwind stencil).
pub const MIN_CELLS_PER_AXIS: usize = 3;

/// Default cap of the adaptive rank; lowered to min(cells, moments) when that is smaller.
pub const DEFAULT_MAX_RANK: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub phantom: PhantomConfig,
    #[serde(rename = "beam")]
    pub beams: Vec<BeamConfig>,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub data: DataConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub cells: [usize; 3],
    pub spacing_cm: [f64; 3],
    #[serde(default)]
    pub origin_cm: [f64; 3],
}

/// Analytic boxes composited in order over a background, or a volume file of HU values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomConfig {
    #[serde(default)]
    pub background_hu: f64,
    #[serde(default, rename = "box", skip_serializing_if = "Vec::is_empty")]
    pub boxes: Vec<BoxConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub min_cm: [f64; 3],
    pub max_cm: [f64; 3],
    pub hu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub direction: [f64; 3],
    pub energy_mev: f64,
    /// Defaults to 1 % of `energy_mev`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_sigma_mev: Option<f64>,
    pub entry_cm: [f64; 3],
    #[serde(default = "default_lateral_sigma")]
    pub lateral_sigma_cm: f64,
    #[serde(default = "one")]
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Boltzmann,
    FokkerPlanck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    #[serde(default)]
    pub model: ModelKind,
    /// P_N degree N.
    #[serde(default = "default_degree")]
    pub degree: usize,
    /// Extended transport correction of the Boltzmann moments.
    #[serde(default = "yes")]
    pub transport_correction: bool,
    /// Strength of the Fokker–Planck correction in [0, 1].
    #[serde(default = "one")]
    pub fp_correction_strength: f64,
    #[serde(default = "one")]
    pub denominator_power: f64,
    #[serde(default)]
    pub rutherford_prefactor: bool,
    #[serde(default = "yes")]
    pub lab_frame: bool,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Boltzmann,
            degree: default_degree(),
            transport_correction: true,
            fp_correction_strength: 1.0,
            denominator_power: 1.0,
            rutherford_prefactor: false,
            lab_frame: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TruncateAfterKind {
    #[default]
    Both,
    Scattering,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    #[default]
    Vacuum,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Truncation tolerance ϑ on the discarded singular-value tail.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_min_rank")]
    pub min_rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rank: Option<usize>,
    #[serde(default)]
    pub truncate_after: TruncateAfterKind,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "one")]
    pub energy_min_mev: f64,
    /// Fixed pseudo-time step; the CFL rule applies when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_step_mev: Option<f64>,
    #[serde(default = "default_groups")]
    pub energy_groups: usize,
    #[serde(default = "default_march_step")]
    pub max_march_step_cm: f64,
    #[serde(default = "default_rays")]
    pub rays_per_axis: usize,
    #[serde(default = "default_extent")]
    pub bundle_extent_sigmas: f64,
    #[serde(default)]
    pub boundary: BoundaryKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            threshold: default_threshold(),
            min_rank: default_min_rank(),
            max_rank: None,
            truncate_after: TruncateAfterKind::Both,
            cfl: default_cfl(),
            energy_min_mev: 1.0,
            energy_step_mev: None,
            energy_groups: default_groups(),
            max_march_step_cm: default_march_step(),
            rays_per_axis: default_rays(),
            bundle_extent_sigmas: default_extent(),
            boundary: BoundaryKind::Vacuum,
            seed: default_seed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Depth profiles; one per beam along its axis when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub depth_profile: Vec<LineConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lateral_profile: Vec<LineConfig>,
}

/// A grid line through the cell containing `point_cm`, along `axis`.
/// Depth profiles measure depth from the face the axis direction enters through.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineConfig {
    pub point_cm: [f64; 3],
    pub axis: Axis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "x")]
    X,
    #[serde(rename = "y")]
    Y,
    #[serde(rename = "z")]
    Z,
    #[serde(rename = "-x")]
    NegX,
    #[serde(rename = "-y")]
    NegY,
    #[serde(rename = "-z")]
    NegZ,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X | Axis::NegX => 0,
            Axis::Y | Axis::NegY => 1,
            Axis::Z | Axis::NegZ => 2,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Axis::X | Axis::Y | Axis::Z => 1.0,
            _ => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
            Axis::NegX => "-x",
            Axis::NegY => "-y",
            Axis::NegZ => "-z",
        }
    }

    /// The signed axis closest to a direction.
    pub fn dominant(dir: [f64; 3]) -> Self {
        let (axis, sign) = protonlr_core::pipeline::dominant_axis(dir);
        match (axis, sign > 0.0) {
            (0, true) => Axis::X,
            (1, true) => Axis::Y,
            (2, true) => Axis::Z,
            (0, false) => Axis::NegX,
            (1, false) => Axis::NegY,
            _ => Axis::NegZ,
        }
    }
}

fn default_lateral_sigma() -> f64 {
    0.3
}
fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_degree() -> usize {
    7
}
fn default_threshold() -> f64 {
    0.01
}
fn default_min_rank() -> usize {
    2
}
fn default_cfl() -> f64 {
    0.7
}
fn default_groups() -> usize {
    128
}
fn default_march_step() -> f64 {
    DEFAULT_MAX_STEP_CM
}
fn default_rays() -> usize {
    21
}
fn default_extent() -> f64 {
    3.0
}
fn default_seed() -> u64 {
    0x5eed
}

fn invalid(field: &str, message: impl std::fmt::Display) -> AppError {
    AppError::Config(format!("{field}: {message}"))
}

impl ProblemConfig {
    pub fn from_toml(text: &str) -> AppResult<Self> {
        toml::from_str(text).map_err(|e| AppError::Config(e.to_string()))
    }

    /// Reads, parses and validates a config; relative paths are resolved against its directory.
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            AppError::Config(m) => AppError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serialisable")
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output.dir);
        if let Some(v) = self.phantom.volume.as_mut() {
            fix(v);
        }
        if let Some(d) = self.data.dir.as_mut() {
            fix(d);
        }
    }

    pub fn moments(&self) -> usize {
        (self.physics.degree + 1) * (self.physics.degree + 1)
    }

    pub fn cells(&self) -> usize {
        self.grid.cells.iter().product()
    }

    /// Rank cap after applying the default.
    pub fn max_rank(&self) -> usize {
        self.solver.max_rank.unwrap_or_else(|| DEFAULT_MAX_RANK.min(self.cells().min(self.moments())))
    }

    /// Cross-field checks; runs before anything is allocated.
    pub fn validate(&self) -> AppResult<()> {
        let g = &self.grid;
        for d in 0..3 {
            let c = g.cells[d];
            if c == 0 || (c > 1 && c < MIN_CELLS_PER_AXIS) {
                return Err(invalid(
                    "grid.cells",
                    format!("axis {d} has {c} cells; use 1 (unused axis) or at least {MIN_CELLS_PER_AXIS}"),
                ));
            }
            if !(g.spacing_cm[d] > 0.0 && g.spacing_cm[d].is_finite()) {
                return Err(invalid("grid.spacing_cm", format!("axis {d} spacing must be positive, got {}", g.spacing_cm[d])));
            }
            if !g.origin_cm[d].is_finite() {
                return Err(invalid("grid.origin_cm", "must be finite"));
            }
        }
        if self.phantom.volume.is_some() && !self.phantom.boxes.is_empty() {
            return Err(invalid("phantom", "give either `volume` or `box` entries, not both"));
        }
        for (k, b) in self.phantom.boxes.iter().enumerate() {
            if (0..3).any(|d| !(b.max_cm[d] > b.min_cm[d])) {
                return Err(invalid(&format!("phantom.box[{k}]"), "max_cm must exceed min_cm on every axis"));
            }
        }
        if self.beams.is_empty() {
            return Err(invalid("beam", "at least one [[beam]] is required"));
        }
        for (k, b) in self.beams.iter().enumerate() {
            let field = |f: &str| format!("beam[{k}].{f}");
            let norm = b.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(invalid(&field("direction"), "must be a nonzero vector"));
            }
            if !(b.energy_mev > self.solver.energy_min_mev && b.energy_mev.is_finite()) {
                return Err(invalid(
                    &field("energy_mev"),
                    format!("must exceed solver.energy_min_mev = {}, got {}", self.solver.energy_min_mev, b.energy_mev),
                ));
            }
            if let Some(s) = b.energy_sigma_mev {
                if !(s > 0.0) {
                    return Err(invalid(&field("energy_sigma_mev"), format!("must be positive, got {s}")));
                }
            }
            if !(b.lateral_sigma_cm > 0.0) {
                return Err(invalid(&field("lateral_sigma_cm"), format!("must be positive, got {}", b.lateral_sigma_cm)));
            }
            if !(b.weight >= 0.0 && b.weight.is_finite()) {
                return Err(invalid(&field("weight"), format!("must be nonnegative, got {}", b.weight)));
            }
        }
        let p = &self.physics;
        if p.degree < 1 {
            return Err(invalid("physics.degree", "P_N degree must be at least 1"));
        }
        if !(0.0..=1.0).contains(&p.fp_correction_strength) {
            return Err(invalid("physics.fp_correction_strength", format!("must lie in [0, 1], got {}", p.fp_correction_strength)));
        }
        if !(p.denominator_power > 0.0) {
            return Err(invalid("physics.denominator_power", format!("must be positive, got {}", p.denominator_power)));
        }
        let s = &self.solver;
        if !(s.threshold > 0.0 && s.threshold.is_finite()) {
            return Err(invalid("solver.threshold", format!("truncation tolerance must be positive, got {}", s.threshold)));
        }
        let cap = self.cells().min(self.moments());
        if s.min_rank == 0 || s.min_rank > self.max_rank() {
            return Err(invalid(
                "solver.min_rank",
                format!("need 1 <= min_rank <= max_rank, got {} and {}", s.min_rank, self.max_rank()),
            ));
        }
        if self.max_rank() > cap {
            return Err(invalid(
                "solver.max_rank",
                format!("{} exceeds min(cells, moments) = {cap}; lower it or refine the grid/degree", self.max_rank()),
            ));
        }
        if !(s.cfl > 0.0 && s.cfl.is_finite()) {
            return Err(invalid("solver.cfl", format!("must be positive, got {}", s.cfl)));
        }
        if !(s.energy_min_mev > 0.0) {
            return Err(invalid("solver.energy_min_mev", format!("must be positive, got {}", s.energy_min_mev)));
        }
        if let Some(de) = s.energy_step_mev {
            if !(de > 0.0 && de.is_finite()) {
                return Err(invalid("solver.energy_step_mev", format!("must be positive, got {de}")));
            }
        }
        if s.energy_groups == 0 {
            return Err(invalid("solver.energy_groups", "must be positive"));
        }
        if !(s.max_march_step_cm > 0.0) {
            return Err(invalid("solver.max_march_step_cm", format!("must be positive, got {}", s.max_march_step_cm)));
        }
        if s.rays_per_axis == 0 || !(s.bundle_extent_sigmas > 0.0) {
            return Err(invalid("solver.rays_per_axis", "ray bundle needs rays and a positive extent"));
        }
        for (k, l) in self.output.depth_profile.iter().chain(&self.output.lateral_profile).enumerate() {
            if l.point_cm.iter().any(|x| !x.is_finite()) {
                return Err(invalid(&format!("output profile {k}"), "point_cm must be finite"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> AppResult<Grid3D> {
        Ok(Grid3D::new(self.grid.cells, self.grid.spacing_cm, self.grid.origin_cm)?)
    }

    pub fn beam_sources(&self) -> AppResult<Vec<BeamSource>> {
        self.beams
            .iter()
            .map(|b| {
                let norm = b.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
                let mut beam = BeamSource::new(b.direction.map(|x| x / norm), b.energy_mev, b.entry_cm, b.weight)?;
                if let Some(s) = b.energy_sigma_mev {
                    beam.energy_sigma = s;
                }
                beam.lateral_sigma = b.lateral_sigma_cm;
                beam.validate()?;
                Ok(beam)
            })
            .collect()
    }

    pub fn solver_settings(&self) -> SolverSettings {
        let p = &self.physics;
        let s = &self.solver;
        SolverSettings {
            degree: p.degree,
            model: match p.model {
                ModelKind::Boltzmann => CollisionModel::Boltzmann { corrected: p.transport_correction },
                ModelKind::FokkerPlanck => CollisionModel::FokkerPlanck { strength: p.fp_correction_strength },
            },
            scattering: ScatteringModel {
                denominator_power: p.denominator_power,
                rutherford_prefactor: p.rutherford_prefactor,
                lab_frame: p.lab_frame,
            },
            truncation: TruncationPolicy { threshold: s.threshold, min_rank: s.min_rank, max_rank: self.max_rank() },
            truncate_after: match s.truncate_after {
                TruncateAfterKind::Both => TruncateAfter::Both,
                TruncateAfterKind::Scattering => TruncateAfter::Scattering,
            },
            cfl: s.cfl,
            energy_min: s.energy_min_mev,
            energy_step: s.energy_step_mev,
            energy_groups: s.energy_groups,
            max_march_step: s.max_march_step_cm,
            bundle: RayBundle { rays_per_axis: s.rays_per_axis, extent_sigmas: s.bundle_extent_sigmas },
            boundary: match s.boundary {
                BoundaryKind::Vacuum => Boundary::Vacuum,
                BoundaryKind::Periodic => Boundary::Periodic,
            },
            seed: s.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[grid]
cells = [8, 8, 8]
spacing_cm = [0.1, 0.1, 0.1]

[[beam]]
direction = [0.0, 0.0, 1.0]
energy_mev = 20.0
entry_cm = [0.4, 0.4, 0.0]

[output]
dir = "out"
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ProblemConfig::from_toml(MINIMAL).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.physics.degree, 7);
        assert_eq!(cfg.max_rank(), 64);
        assert_eq!(cfg.beams[0].lateral_sigma_cm, 0.3);
        let s = cfg.solver_settings();
        assert_eq!(s.truncation.threshold, 0.01);
        assert_eq!(s.model, CollisionModel::Boltzmann { corrected: true });
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ProblemConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(ProblemConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = MINIMAL.replace("cells = [8, 8, 8]", "cells = [8, 2, 8]");
        let e = ProblemConfig::from_toml(&bad).unwrap().validate().unwrap_err();
        assert!(e.to_string().contains("grid.cells"), "{e}");

        let bad = MINIMAL.replace("[output]", "[solver]\nthreshold = 0.0\n[output]");
        let e = ProblemConfig::from_toml(&bad).unwrap().validate().unwrap_err();
        assert!(e.to_string().contains("solver.threshold"), "{e}");

        let bad = MINIMAL.replace("[output]", "[physics]\ndegree = 0\n[output]");
        let e = ProblemConfig::from_toml(&bad).unwrap().validate().unwrap_err();
        assert!(e.to_string().contains("physics.degree"), "{e}");

        let bad = MINIMAL.replace("energy_mev = 20.0", "energy_mev = 20.0\nspin = 1");
        let e = ProblemConfig::from_toml(&bad).unwrap_err();
        assert!(e.to_string().contains("spin"), "{e}");
    }

    #[test]
    fn max_rank_above_cap_is_rejected() {
        let bad = MINIMAL.replace("[output]", "[solver]\nmax_rank = 65\n[output]");
        let e = ProblemConfig::from_toml(&bad).unwrap().validate().unwrap_err();
        assert!(e.to_string().contains("solver.max_rank"), "{e}");
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let mut cfg = ProblemConfig::from_toml(MINIMAL).unwrap();
        cfg.resolve_paths(Path::new("/tmp/case"));
        assert_eq!(cfg.output.dir, PathBuf::from("/tmp/case/out"));
    }
}
