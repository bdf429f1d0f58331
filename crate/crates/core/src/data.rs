//! Far-field datasets, the relative noise model, and file formats.
//!
//! Datasets are stored as versioned JSON (`.ffd.json`); indicator grids export to CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EsmError, Result};
use crate::forward::FarFieldVector;
use crate::geometry::{unit_circle_angles, SamplingGrid};

pub const FORMAT_VERSION: u32 = 1;

/// `U(i, l) = u_inf(x_hat_i, d_l)`, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldDataset {
    pub kappa: f64,
    pub angles: Vec<f64>,
    /// Incident direction angles.
    pub directions: Vec<f64>,
    pub columns: Vec<Vec<Complex64>>,
    pub delta: f64,
    pub seed: Option<u64>,
}

impl FarFieldDataset {
    pub fn new(kappa: f64, angles: Vec<f64>, directions: Vec<f64>, columns: Vec<Vec<Complex64>>) -> Result<Self> {
        let ds = FarFieldDataset { kappa, angles, directions, columns, delta: 0.0, seed: None };
        ds.validate()?;
        Ok(ds)
    }

    /// Stack far fields that share a wavenumber and observation angles.
    pub fn from_farfields(fields: &[FarFieldVector]) -> Result<Self> {
        let first = fields.first().ok_or_else(|| EsmError::invalid("dataset needs at least one far field"))?;
        let mut directions = Vec::with_capacity(fields.len());
        for f in fields {
            if f.kappa != first.kappa || f.angles != first.angles {
                return Err(EsmError::invalid("far fields disagree on wavenumber or observation angles"));
            }
            let d = f.direction.ok_or_else(|| EsmError::invalid("far field has no incident direction"))?;
            directions.push(d[1].atan2(d[0]).rem_euclid(std::f64::consts::TAU));
        }
        Self::new(first.kappa, first.angles.clone(), directions, fields.iter().map(|f| f.values.clone()).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(EsmError::invalid(format!("wavenumber must be positive, got {}", self.kappa)));
        }
        if self.angles.is_empty() || self.directions.is_empty() {
            return Err(EsmError::invalid("dataset needs at least one observation angle and one direction"));
        }
        if self.columns.len() != self.directions.len() {
            return Err(EsmError::invalid(format!(
                "{} data columns for {} incident directions",
                self.columns.len(),
                self.directions.len()
            )));
        }
        for (l, col) in self.columns.iter().enumerate() {
            if col.len() != self.angles.len() {
                return Err(EsmError::invalid(format!(
                    "column {l} has {} entries, expected N = {}",
                    col.len(),
                    self.angles.len()
                )));
            }
            if col.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                return Err(EsmError::invalid(format!("column {l} has non-finite entries")));
            }
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(EsmError::invalid(format!("noise level must lie in [0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.angles.len()
    }

    pub fn n_inc(&self) -> usize {
        self.directions.len()
    }

    pub fn column(&self, l: usize) -> &[Complex64] {
        &self.columns[l]
    }

    /// Whether the observation angles are the default equispaced layout.
    pub fn has_equispaced_angles(&self) -> bool {
        let n = self.n();
        unit_circle_angles(n).iter().zip(&self.angles).all(|(a, b)| (a - b).abs() <= 1e-12)
    }

    /// Keep only the listed direction columns, in the given order.
    pub fn select(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&l| l >= self.n_inc()) {
            return Err(EsmError::invalid(format!("direction index {bad} out of range")));
        }
        Ok(FarFieldDataset {
            directions: columns.iter().map(|&l| self.directions[l]).collect(),
            columns: columns.iter().map(|&l| self.columns[l].clone()).collect(),
            ..self.clone()
        })
    }
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Uniform on `[-1, 1)` from the top 53 bits of a ChaCha20 word.
fn symmetric_uniform(rng: &mut ChaCha20Rng) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * u - 1.0
}

/// The noise vector `eta` for column `l`: ChaCha20 keyed by `seed`, stream `l`,
/// drawing real then imaginary part per entry.
pub fn noise_vector(seed: u64, l: usize, n: usize) -> Vec<Complex64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(l as u64);
    (0..n)
        .map(|_| {
            let re = symmetric_uniform(&mut rng);
            let im = symmetric_uniform(&mut rng);
            Complex64::new(re, im)
        })
        .collect()
}

/// `u_delta = u + delta ||u||_2 / ||eta||_2 eta`, with a fresh `eta` per direction.
pub fn add_noise(ds: &FarFieldDataset, delta: f64, seed: u64) -> Result<FarFieldDataset> {
    if ds.delta != 0.0 {
        return Err(EsmError::invalid(format!("dataset already carries noise (delta = {})", ds.delta)));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(EsmError::invalid(format!("noise level must lie in (0, 1), got {delta}")));
    }
    let mut columns = Vec::with_capacity(ds.n_inc());
    for (l, col) in ds.columns.iter().enumerate() {
        let size = norm2(col);
        if size == 0.0 {
            return Err(EsmError::ZeroColumn { column: l });
        }
        let eta = noise_vector(seed, l, col.len());
        let scale = delta * size / norm2(&eta);
        columns.push(col.iter().zip(&eta).map(|(u, e)| u + e * scale).collect());
    }
    Ok(FarFieldDataset { columns, delta, seed: Some(seed), ..ds.clone() })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    format_version: u32,
    kappa: f64,
    #[serde(rename = "N")]
    n: usize,
    angles: Vec<f64>,
    directions: Vec<f64>,
    delta: f64,
    seed: Option<u64>,
    /// Row `i` holds `[re, im]` for every direction at angle `i`.
    rows: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

pub fn to_json(ds: &FarFieldDataset) -> Result<String> {
    ds.validate()?;
    let rows = (0..ds.n()).map(|i| ds.columns.iter().map(|c| [c[i].re, c[i].im]).collect()).collect();
    let file = DatasetFile {
        format_version: FORMAT_VERSION,
        kappa: ds.kappa,
        n: ds.n(),
        angles: ds.angles.clone(),
        directions: ds.directions.clone(),
        delta: ds.delta,
        seed: ds.seed,
        rows,
    };
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| EsmError::invalid(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn from_json(text: &str, path: &Path) -> Result<FarFieldDataset> {
    let parse_error = |message: String| EsmError::Parse { path: path.to_path_buf(), message };
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| parse_error(e.to_string()))?;
    if probe.format_version != FORMAT_VERSION {
        return Err(EsmError::Version { path: path.to_path_buf(), found: probe.format_version, expected: FORMAT_VERSION });
    }
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: DatasetFile = serde_path_to_error::deserialize(de)
        .map_err(|e| parse_error(format!("field `{}`: {}", e.path(), e.inner())))?;
    if file.angles.len() != file.n {
        return Err(parse_error(format!("field `angles`: {} angles for N = {}", file.angles.len(), file.n)));
    }
    if file.rows.len() != file.n {
        return Err(parse_error(format!("field `rows`: {} rows for N = {}", file.rows.len(), file.n)));
    }
    let n_inc = file.directions.len();
    if let Some((i, row)) = file.rows.iter().enumerate().find(|(_, r)| r.len() != n_inc) {
        return Err(parse_error(format!("field `rows[{i}]`: {} entries for {n_inc} directions", row.len())));
    }
    let columns = (0..n_inc)
        .map(|l| file.rows.iter().map(|r| Complex64::new(r[l][0], r[l][1])).collect())
        .collect();
    let ds = FarFieldDataset {
        kappa: file.kappa,
        angles: file.angles,
        directions: file.directions,
        columns,
        delta: file.delta,
        seed: file.seed,
    };
    ds.validate().map_err(|e| parse_error(e.to_string()))?;
    Ok(ds)
}

pub fn save(ds: &FarFieldDataset, path: &Path) -> Result<()> {
    let text = to_json(ds)?;
    fs::write(path, text).map_err(|source| EsmError::Io { path: path.to_path_buf(), source })
}

pub fn load(path: &Path) -> Result<FarFieldDataset> {
    let text = fs::read_to_string(path).map_err(|source| EsmError::Io { path: path.to_path_buf(), source })?;
    from_json(&text, path)
}

/// CSV with header `x,y,W,valid`, one row per node in grid order, 17 significant digits.
/// Invalid nodes carry `W = NaN` and `valid = 0`.
pub fn grid_csv(grid: &SamplingGrid, values: &[Option<f64>]) -> String {
    let mut out = String::with_capacity(64 * values.len() + 16);
    out.push_str("x,y,W,valid\n");
    for (k, v) in values.iter().enumerate() {
        let [x, y] = grid.node(k);
        match v {
            Some(w) => writeln!(out, "{x:.16e},{y:.16e},{w:.16e},1"),
            None => writeln!(out, "{x:.16e},{y:.16e},NaN,0"),
        }
        .expect("writing to a String");
    }
    out
}

pub fn write_grid_csv(path: &Path, grid: &SamplingGrid, values: &[Option<f64>]) -> Result<()> {
    fs::write(path, grid_csv(grid, values)).map_err(|source| EsmError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> FarFieldDataset {
        let angles = unit_circle_angles(4);
        let col = vec![Complex64::new(1.0, 0.5), Complex64::new(-0.25, 2.0), Complex64::new(0.1, 0.0), Complex64::new(0.0, -1.0)];
        FarFieldDataset::new(2.0, angles, vec![0.0, 1.0], vec![col.clone(), col]).unwrap()
    }

    #[test]
    fn uniform_draws_cover_symmetric_interval() {
        let eta = noise_vector(3, 0, 2000);
        let (mut lo, mut hi) = (1.0f64, -1.0f64);
        for e in &eta {
            for v in [e.re, e.im] {
                assert!((-1.0..1.0).contains(&v));
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        assert!(lo < -0.99 && hi > 0.99);
    }

    #[test]
    fn streams_differ_between_columns() {
        let ds = add_noise(&small(), 0.1, 9).unwrap();
        assert_ne!(ds.columns[0], ds.columns[1]);
    }

    #[test]
    fn rejects_double_noise_and_bad_delta() {
        let noisy = add_noise(&small(), 0.1, 9).unwrap();
        assert!(add_noise(&noisy, 0.1, 9).is_err());
        assert!(add_noise(&small(), 0.0, 9).is_err());
        assert!(add_noise(&small(), 1.0, 9).is_err());
    }

    #[test]
    fn zero_column_is_an_error() {
        let mut ds = small();
        ds.columns[1] = vec![Complex64::new(0.0, 0.0); 4];
        assert!(matches!(add_noise(&ds, 0.1, 1), Err(EsmError::ZeroColumn { column: 1 })));
    }

    #[test]
    fn csv_layout() {
        let grid = SamplingGrid::new([-1.0, 1.0], [0.0, 1.0], 2, 2).unwrap();
        let text = grid_csv(&grid, &[Some(1.0), None, Some(0.5), Some(1.0 / 3.0)]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,W,valid");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[2], "1.0000000000000000e0,0.0000000000000000e0,NaN,0");
        assert_eq!(lines[4].split(',').nth(2).unwrap().parse::<f64>().unwrap(), 1.0 / 3.0);
    }
}
