//! Sampling indicators, grid sweeps and the radius-refinement loop.
//!
//! For a sampling disk `B_z` with far-field eigensystem `(lambda_j, v_j)` the indicator is
//! `W(z) = [sum_{|lambda_j| >= alpha} |<u, v_j>|^2 / |lambda_j|]^{-1}` with
//! `<u, v> = sum_i u_i conj(v_i)`, summed over incident directions for multi-direction
//! data.

use std::collections::VecDeque;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::FarFieldDataset;
use crate::error::{EsmError, Result};
use crate::geometry::{dist, Point, SamplingGrid};
use crate::refdisk::{eigenvalue_exclusion_check, ExclusionCheck, RefDiskKind, RefDiskSpec, DEFAULT_EXCLUSION_TOL};
use crate::spectral::{assemble, eig_circulant, eig_dense, translate_spectrum, Spectrum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndicatorConfig {
    pub alpha: f64,
    pub grid: SamplingGrid,
    #[serde(rename = "R0")]
    pub r0: f64,
    pub gamma: f64,
    pub p_max: u32,
    pub kind: RefDiskKind,
    pub n_trunc: usize,
    /// Level, relative to the maximum, of the set whose components count as artifacts.
    pub threshold: f64,
}

impl Default for IndicatorConfig {
    fn default() -> Self {
        IndicatorConfig {
            alpha: 1e-4,
            grid: SamplingGrid::default(),
            r0: 0.5,
            gamma: 1.25,
            p_max: 8,
            kind: RefDiskKind::Dirichlet,
            n_trunc: crate::refdisk::DEFAULT_N_TRUNC,
            threshold: 0.5,
        }
    }
}

impl IndicatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(EsmError::invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(EsmError::invalid(format!("gamma must exceed 1, got {}", self.gamma)));
        }
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(EsmError::invalid(format!("R0 must be positive, got {}", self.r0)));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(EsmError::invalid(format!("threshold must lie in (0, 1], got {}", self.threshold)));
        }
        if self.n_trunc == 0 {
            return Err(EsmError::invalid("n_trunc must be at least 1"));
        }
        self.grid.validate()
    }

    /// `R_p = gamma^p R0`
    pub fn radius(&self, p: u32) -> f64 {
        self.r0 * self.gamma.powi(p as i32)
    }
}

/// `W` for one far-field column, or `None` when no eigenvalue reaches `alpha` or the
/// truncated Picard sum vanishes.
pub fn indicator_single(u: &[Complex64], s: &Spectrum, alpha: f64) -> Option<f64> {
    assert_eq!(u.len(), s.eigenvectors.nrows(), "data and spectrum use different N");
    let mut sum = 0.0;
    let mut terms = 0;
    for (j, lambda) in s.eigenvalues.iter().enumerate() {
        let modulus = lambda.norm();
        if modulus < alpha {
            continue;
        }
        let v = s.eigenvectors.column(j);
        let mut pairing = Complex64::new(0.0, 0.0);
        for (ui, vi) in u.iter().zip(v.iter()) {
            pairing += ui * vi.conj();
        }
        sum += pairing.norm_sqr() / modulus;
        terms += 1;
    }
    (terms > 0 && sum > 0.0 && sum.is_finite()).then(|| 1.0 / sum)
}

/// Sum of the per-direction indicators; invalid columns contribute nothing and the
/// result is invalid only when every column is.
pub fn indicator_multi(ds: &FarFieldDataset, s: &Spectrum, alpha: f64) -> Option<f64> {
    let mut total = 0.0;
    let mut valid = 0;
    for col in &ds.columns {
        if let Some(w) = indicator_single(col, s, alpha) {
            total += w;
            valid += 1;
        }
    }
    if valid < ds.n_inc() && valid > 0 {
        log::trace!("{} of {} directions degenerate", ds.n_inc() - valid, ds.n_inc());
    }
    (valid > 0).then_some(total)
}

/// Eigenpairs with `|lambda| >= alpha`, in the original order.
pub fn retained(s: &Spectrum, alpha: f64) -> Spectrum {
    let keep: Vec<usize> = (0..s.len()).filter(|&j| s.eigenvalues[j].norm() >= alpha).collect();
    Spectrum {
        eigenvalues: keep.iter().map(|&j| s.eigenvalues[j]).collect(),
        eigenvectors: s.eigenvectors.select_columns(&keep),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorGrid {
    pub grid: SamplingGrid,
    /// Row-major, `x` fastest; `None` marks a degenerate node.
    pub values: Vec<Option<f64>>,
    pub kind: RefDiskKind,
    pub radius: f64,
    pub kappa: f64,
    pub n_inc: usize,
    pub delta: f64,
    pub exclusion: ExclusionCheck,
}

impl IndicatorGrid {
    pub fn valid_count(&self) -> usize {
        self.values.iter().flatten().count()
    }

    /// Largest value and its node index; the first node wins ties.
    pub fn max(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (k, v) in self.values.iter().enumerate() {
            if let Some(w) = *v {
                if best.is_none_or(|(_, b)| w > b) {
                    best = Some((k, w));
                }
            }
        }
        best
    }

    pub fn argmax(&self) -> Option<Point> {
        self.max().map(|(k, _)| self.grid.node(k))
    }

    pub fn to_csv(&self) -> String {
        crate::data::grid_csv(&self.grid, &self.values)
    }
}

/// How each node's spectrum is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepPath {
    /// One circulant origin spectrum, modulated per node.
    Circulant,
    /// Dense eigendecomposition of the assembled matrix at every node.
    Dense,
}

fn sweep_spec(ds: &FarFieldDataset, cfg: &IndicatorConfig, radius: f64) -> Result<RefDiskSpec> {
    cfg.validate()?;
    ds.validate()?;
    if !ds.has_equispaced_angles() {
        return Err(EsmError::invalid("dataset observation angles are not the equispaced layout 2 pi i / N"));
    }
    RefDiskSpec::with_truncation(cfg.kind, radius, ds.kappa, cfg.n_trunc)
}

pub fn sweep(ds: &FarFieldDataset, cfg: &IndicatorConfig, radius: f64) -> Result<IndicatorGrid> {
    sweep_with_path(ds, cfg, radius, SweepPath::Circulant)
}

pub fn sweep_with_path(ds: &FarFieldDataset, cfg: &IndicatorConfig, radius: f64, path: SweepPath) -> Result<IndicatorGrid> {
    let spec = sweep_spec(ds, cfg, radius)?;
    let exclusion = eigenvalue_exclusion_check(&spec, DEFAULT_EXCLUSION_TOL);
    if let ExclusionCheck::Warning { mode, value } = exclusion {
        log::warn!(
            "kappa^2 is near a {} eigenvalue of the sampling disk R = {radius} (mode {mode}, {value:.2e})",
            cfg.kind
        );
    }
    let n = ds.n();
    let nodes = cfg.grid.nodes();
    let values: Vec<Option<f64>> = match path {
        SweepPath::Circulant => {
            let origin = retained(&eig_circulant(&spec, n)?, cfg.alpha);
            nodes
                .par_iter()
                .map(|&z| indicator_multi(ds, &translate_spectrum(&origin, z, ds.kappa, &ds.angles), cfg.alpha))
                .collect()
        }
        SweepPath::Dense => nodes
            .par_iter()
            .map(|&z| {
                let s = eig_dense(&assemble(&spec, z, n)?)?;
                Ok(indicator_multi(ds, &s, cfg.alpha))
            })
            .collect::<Result<_>>()?,
    };
    let grid = IndicatorGrid {
        grid: cfg.grid,
        values,
        kind: cfg.kind,
        radius,
        kappa: ds.kappa,
        n_inc: ds.n_inc(),
        delta: ds.delta,
        exclusion,
    };
    if grid.valid_count() == 0 {
        return Err(EsmError::AllInvalid);
    }
    Ok(grid)
}

/// 4-connected components of `{W >= threshold * max W}` over valid nodes.
/// Returns a component label per node and the component count.
pub fn superlevel_components(g: &IndicatorGrid, threshold: f64) -> (Vec<Option<usize>>, usize) {
    let (nx, ny) = (g.grid.nx, g.grid.ny);
    let mut labels = vec![None; g.values.len()];
    let Some((_, top)) = g.max() else {
        return (labels, 0);
    };
    let level = threshold * top;
    let inside = |k: usize| g.values[k].is_some_and(|w| w >= level);
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..g.values.len() {
        if labels[start].is_some() || !inside(start) {
            continue;
        }
        labels[start] = Some(count);
        queue.push_back(start);
        while let Some(k) = queue.pop_front() {
            let (ix, iy) = (k % nx, k / nx);
            let mut neighbours = [None; 4];
            if ix > 0 {
                neighbours[0] = Some(k - 1);
            }
            if ix + 1 < nx {
                neighbours[1] = Some(k + 1);
            }
            if iy > 0 {
                neighbours[2] = Some(k - nx);
            }
            if iy + 1 < ny {
                neighbours[3] = Some(k + nx);
            }
            for m in neighbours.into_iter().flatten() {
                if labels[m].is_none() && inside(m) {
                    labels[m] = Some(count);
                    queue.push_back(m);
                }
            }
        }
        count += 1;
    }
    (labels, count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactReport {
    pub artifact_free: bool,
    pub components: usize,
}

pub fn artifact_free(g: &IndicatorGrid, threshold: f64) -> ArtifactReport {
    let (_, components) = superlevel_components(g, threshold);
    ArtifactReport { artifact_free: components == 1, components }
}

/// Whether the grid node nearest to `p` lies in the super-level set at `threshold`.
pub fn in_superlevel_set(g: &IndicatorGrid, threshold: f64, p: Point) -> bool {
    let (labels, _) = superlevel_components(g, threshold);
    labels[g.grid.nearest(p)].is_some()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub p: u32,
    pub radius: f64,
    /// `None` when every node was degenerate at this radius.
    pub components: Option<usize>,
    pub artifact_free: bool,
    pub exclusion: ExclusionCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalDisk {
    pub center: Point,
    pub radius: f64,
    pub p_star: u32,
    /// False when no radius up to `p_max` was artifact free.
    pub converged: bool,
    pub reports: Vec<RadiusReport>,
}

#[derive(Debug, Clone)]
pub struct Refinement {
    pub optimal: OptimalDisk,
    /// Grid per examined radius, `None` where all nodes were degenerate.
    pub grids: Vec<Option<IndicatorGrid>>,
}

impl Refinement {
    pub fn chosen_grid(&self) -> &IndicatorGrid {
        self.grids[self.optimal.p_star as usize].as_ref().expect("chosen radius has a valid grid")
    }
}

/// Grow the sampling radius `R_p = gamma^p R0` until the indicator has a single
/// half-max component; the optimal disk is centered at that grid's maximum.
pub fn refine(ds: &FarFieldDataset, cfg: &IndicatorConfig) -> Result<Refinement> {
    cfg.validate()?;
    let mut reports = Vec::new();
    let mut grids = Vec::new();
    let mut chosen = None;
    for p in 0..=cfg.p_max {
        let radius = cfg.radius(p);
        let grid = match sweep(ds, cfg, radius) {
            Ok(g) => Some(g),
            Err(EsmError::AllInvalid) => None,
            Err(e) => return Err(e),
        };
        let exclusion = match &grid {
            Some(g) => g.exclusion,
            None => eigenvalue_exclusion_check(
                &RefDiskSpec::with_truncation(cfg.kind, radius, ds.kappa, cfg.n_trunc)?,
                DEFAULT_EXCLUSION_TOL,
            ),
        };
        let report = grid.as_ref().map(|g| artifact_free(g, cfg.threshold));
        log::info!(
            "p = {p}, R = {radius:.4}: {}",
            match report {
                Some(r) => format!("{} component(s)", r.components),
                None => "all nodes degenerate".to_string(),
            }
        );
        reports.push(RadiusReport {
            p,
            radius,
            components: report.map(|r| r.components),
            artifact_free: report.is_some_and(|r| r.artifact_free),
            exclusion,
        });
        grids.push(grid);
        if report.is_some_and(|r| r.artifact_free) {
            chosen = Some((p, true));
            break;
        }
    }
    let (p_star, converged) = match chosen {
        Some(c) => c,
        None => {
            let best = reports
                .iter()
                .filter_map(|r| r.components.map(|c| (c, r.p)))
                .min()
                .ok_or(EsmError::AllInvalid)?;
            log::warn!("no artifact-free radius up to p = {}; using p = {} with {} components", cfg.p_max, best.1, best.0);
            (best.1, false)
        }
    };
    let grid = grids[p_star as usize].as_ref().expect("chosen radius has a valid grid");
    let center = grid.argmax().expect("valid grid has a maximum");
    let optimal = OptimalDisk { center, radius: cfg.radius(p_star), p_star, converged, reports };
    Ok(Refinement { optimal, grids })
}

/// Distance from the optimal-disk center to a reference point.
pub fn center_error(d: &OptimalDisk, p: Point) -> f64 {
    dist(d.center, p)
}
