use std::path::{Path, PathBuf};

use esm_core::forward::MfsConfig;
use esm_core::geometry::{Boundary, DirectionSet, SamplingGrid, Shape};
use esm_core::imaging::IndicatorConfig;
use esm_core::refdisk::RefDiskKind;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CONFIG_HELP: &str = "\
CONFIG (JSON, every key optional, unknown keys rejected):
  scene.shape          disk | star | peanut                   [peanut]
  scene.shift          obstacle center [x, y]                 [[1.0, 1.0]]
  scene.scale          boundary scale (disk radius)           [1.0]
  scene.kappa          wavenumber                             [2.0]
  directions           \"inc1\" | \"inc2\" | \"inc4\" | [angles]    [\"inc4\"]
                       inc1 = {pi}, inc2 = {pi/4, 3pi/4}, inc4 = {0, pi/2, pi, 3pi/2}
  noise.delta          relative noise level, 0 = clean        [0.0]
  noise.seed           noise seed                             [1]
  esm.kind             dirichlet | neumann (sampling disk)    [dirichlet]
  esm.alpha            spectral cutoff                        [1e-4]
  esm.R0               initial sampling radius                [0.5]
  esm.gamma            radius growth factor                   [1.25]
  esm.p_max            last refinement step                   [8]
  esm.n_trunc          retained disk modes |n| <= n_trunc     [10]
  esm.N                observation angles                     [32]
  esm.threshold        artifact level relative to max W       [0.5]
  esm.grid.x_range     sampling window in x                   [[-4.0, 4.0]]
  esm.grid.y_range     sampling window in y                   [[-4.0, 4.0]]
  esm.grid.nx          nodes in x                             [100]
  esm.grid.ny          nodes in y                             [100]
  mfs.m_src            MFS source points                      [200]
  mfs.m_col            MFS collocation points                 [400]
  mfs.source_curve     offset | scaled                        [offset]
  mfs.offset           inward normal offset / scale           [0.15]
  mfs.tau              scaled-curve factor                    [0.7]
  output.directory     output directory                       [\"out\"]
  output.emit_heatmap  write PNG heatmaps                     [true]

Flags override the matching keys: --out (output.directory), --seed (noise.seed),
--heatmap (output.emit_heatmap). ESM_THREADS caps worker threads (0 = all cores).";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scene: Scene,
    pub directions: Directions,
    pub noise: Noise,
    pub esm: Esm,
    pub mfs: MfsConfig,
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scene {
    pub shape: Shape,
    pub shift: [f64; 2],
    pub scale: f64,
    pub kappa: f64,
}

impl Default for Scene {
    fn default() -> Self {
        Scene { shape: Shape::Peanut, shift: [1.0, 1.0], scale: 1.0, kappa: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Directions {
    Named(String),
    Angles(Vec<f64>),
}

impl Default for Directions {
    fn default() -> Self {
        Directions::Named("inc4".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Noise {
    pub delta: f64,
    pub seed: u64,
}

impl Default for Noise {
    fn default() -> Self {
        Noise { delta: 0.0, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Esm {
    pub kind: RefDiskKind,
    pub alpha: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
    pub gamma: f64,
    pub p_max: u32,
    pub n_trunc: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub threshold: f64,
    pub grid: SamplingGrid,
}

impl Default for Esm {
    fn default() -> Self {
        let d = IndicatorConfig::default();
        Esm {
            kind: d.kind,
            alpha: d.alpha,
            r0: d.r0,
            gamma: d.gamma,
            p_max: d.p_max,
            n_trunc: d.n_trunc,
            n: esm_core::spectral::DEFAULT_N,
            threshold: d.threshold,
            grid: d.grid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub directory: PathBuf,
    pub emit_heatmap: bool,
}

impl Default for Output {
    fn default() -> Self {
        Output { directory: PathBuf::from("out"), emit_heatmap: true }
    }
}

fn config_error(key: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {err}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| CliError::Config(format!("{}: {}: {}", path.display(), e.path(), e.inner())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.boundary()?;
        self.direction_set()?;
        if !(self.scene.kappa > 0.0 && self.scene.kappa.is_finite()) {
            return Err(config_error("scene.kappa", "must be positive"));
        }
        if !(self.noise.delta >= 0.0 && self.noise.delta < 1.0) {
            return Err(config_error("noise.delta", "must lie in [0, 1)"));
        }
        self.mfs.validate().map_err(|e| config_error("mfs", e))?;
        self.indicator().validate().map_err(|e| config_error("esm", e))?;
        if self.esm.n < 2 * self.esm.n_trunc + 2 {
            return Err(config_error("esm.N", format!("must be at least 2 n_trunc + 2 = {}", 2 * self.esm.n_trunc + 2)));
        }
        Ok(())
    }

    pub fn boundary(&self) -> Result<Boundary, CliError> {
        Boundary::new(self.scene.shape, self.scene.scale, self.scene.shift).map_err(|e| config_error("scene", e))
    }

    pub fn direction_set(&self) -> Result<DirectionSet, CliError> {
        match &self.directions {
            Directions::Named(name) => DirectionSet::named(name).ok_or_else(|| {
                config_error("directions", format!("unknown set {name:?} (expected inc1, inc2, inc4 or a list of angles)"))
            }),
            Directions::Angles(angles) => DirectionSet::new(angles.clone()).map_err(|e| config_error("directions", e)),
        }
    }

    pub fn indicator(&self) -> IndicatorConfig {
        IndicatorConfig {
            alpha: self.esm.alpha,
            grid: self.esm.grid,
            r0: self.esm.r0,
            gamma: self.esm.gamma,
            p_max: self.esm.p_max,
            kind: self.esm.kind,
            n_trunc: self.esm.n_trunc,
            threshold: self.esm.threshold,
        }
    }
}
