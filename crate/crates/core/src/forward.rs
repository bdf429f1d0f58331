//! Forward solvers for the clamped biharmonic obstacle.
//!
//! The scattered field splits as `u^s = u^s_H + u^s_M` into a radiating Helmholtz
//! part and an evanescent modified-Helmholtz part. Only `u^s_H` reaches the far
//! field, normalized so that a monopole `Phi_H(., y) = (i/4) H_0^(1)(kappa |. - y|)`
//! has far-field pattern `exp(-i kappa x_hat . y)`.
//!
//! Two solvers are provided: the separation-of-variables series for a disk, and a
//! method-of-fundamental-solutions (MFS) fit with Helmholtz and modified-Helmholtz
//! monopoles on a curve inside the obstacle.

use std::f64::consts::{FRAC_1_PI, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EsmError, Result};
use crate::geometry::{dot, unit, unit_circle_angles, Boundary, BoundarySample, Point};
use crate::specfun::{bessel_j_seq, bessel_k_seq, hankel1_seq};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative SVD cutoff for the MFS least-squares solve.
pub const MFS_SVD_CUTOFF: f64 = 1e-12;
/// Relative boundary residual above which an MFS solve is rejected.
pub const MFS_RESIDUAL_LIMIT: f64 = 1e-6;

/// Incident plane wave `exp(i kappa x . d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub kappa: f64,
    pub direction: Point,
}

impl PlaneWave {
    pub fn new(kappa: f64, direction: Point) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(EsmError::invalid(format!("wavenumber must be positive, got {kappa}")));
        }
        let len = direction[0].hypot(direction[1]);
        if (len - 1.0).abs() > 1e-12 {
            return Err(EsmError::invalid(format!("incident direction must be a unit vector (|d| = {len})")));
        }
        Ok(PlaneWave { kappa, direction })
    }

    pub fn from_angle(kappa: f64, angle: f64) -> Result<Self> {
        Self::new(kappa, unit(angle))
    }

    pub fn angle(&self) -> f64 {
        self.direction[1].atan2(self.direction[0])
    }

    pub fn value(&self, x: Point) -> Complex64 {
        Complex64::from_polar(1.0, self.kappa * dot(x, self.direction))
    }

    /// `d/d nu exp(i kappa x . d) = i kappa (d . nu) exp(i kappa x . d)`
    pub fn normal_derivative(&self, x: Point, normal: Point) -> Complex64 {
        I * self.kappa * dot(self.direction, normal) * self.value(x)
    }
}

/// Far-field pattern sampled at observation angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldVector {
    pub kappa: f64,
    pub angles: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Incident direction, when the field came from a single plane wave.
    pub direction: Option<Point>,
}

impl FarFieldVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `max_i |a_i - b_i| / max_i |b_i|`
    pub fn max_rel_diff(&self, reference: &FarFieldVector) -> f64 {
        max_rel_diff(&self.values, &reference.values)
    }
}

pub(crate) fn max_rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    diff / scale.max(f64::MIN_POSITIVE)
}

/// Phase relating the far field of an obstacle shifted by `c` to the unshifted one:
/// `exp(-i kappa c . (x_hat - d))`.
pub fn translation_phase(kappa: f64, shift: Point, x_hat: Point, d: Point) -> Complex64 {
    Complex64::from_polar(1.0, -kappa * dot(shift, [x_hat[0] - d[0], x_hat[1] - d[1]]))
}

/// Separation-of-variables solution for a clamped disk.
///
/// Mode `n` of the scattered field is `i^|n| (a_m H_m(kr) + b_m K_m(kr)) e^{in(theta - phi_d)}`
/// with `m = |n|`, chosen so that `u^s + u^i` and its radial derivative vanish on `r = radius`.
#[derive(Debug, Clone)]
pub struct ClampedDisk {
    pub radius: f64,
    pub center: Point,
    pub wave: PlaneWave,
    h_coeffs: Vec<Complex64>,
    k_coeffs: Vec<Complex64>,
}

impl ClampedDisk {
    pub fn solve(radius: f64, center: Point, wave: PlaneWave, n_max: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(EsmError::invalid(format!("disk radius must be positive, got {radius}")));
        }
        let x = wave.kappa * radius;
        let js = bessel_j_seq(n_max + 1, x);
        let hs = hankel1_seq(n_max + 1, x)?;
        let ks = bessel_k_seq(n_max + 1, x)?;
        let mut h_coeffs = Vec::with_capacity(n_max + 1);
        let mut k_coeffs = Vec::with_capacity(n_max + 1);
        for m in 0..=n_max {
            // J_{-1} = -J_1, H_{-1} = -H_1, K_{-1} = K_1
            let (jd, hd, kd) = if m == 0 {
                (-js[1], -hs[1], -ks[1])
            } else {
                (
                    0.5 * (js[m - 1] - js[m + 1]),
                    0.5 * (hs[m - 1] - hs[m + 1]),
                    -0.5 * (ks[m - 1] + ks[m + 1]),
                )
            };
            let (j, h, k) = (js[m], hs[m], ks[m]);
            let det = h * kd - hd * k;
            let scale = h.norm() * kd.abs() + hd.norm() * k.abs();
            let relative_det = det.norm() / scale;
            if !(relative_det >= 1e-14) {
                return Err(EsmError::SingularMode { mode: m, relative_det });
            }
            h_coeffs.push((k * jd - j * kd) / det);
            k_coeffs.push((j * hd - h * jd) / det);
        }
        Ok(ClampedDisk { radius, center, wave, h_coeffs, k_coeffs })
    }

    pub fn n_max(&self) -> usize {
        self.h_coeffs.len() - 1
    }

    /// Far field `(4/i) [a_0 + 2 sum a_m cos(m (theta - phi_d))]`, translated to the center.
    pub fn farfield(&self, angles: &[f64]) -> FarFieldVector {
        let phi_d = self.wave.angle();
        let values = angles
            .iter()
            .map(|&theta| {
                let psi = theta - phi_d;
                let mut s = self.h_coeffs[0];
                for (m, a) in self.h_coeffs.iter().enumerate().skip(1) {
                    s += 2.0 * a * (m as f64 * psi).cos();
                }
                let origin = -4.0 * I * s;
                origin * translation_phase(self.wave.kappa, self.center, unit(theta), self.wave.direction)
            })
            .collect();
        FarFieldVector {
            kappa: self.wave.kappa,
            angles: angles.to_vec(),
            values,
            direction: Some(self.wave.direction),
        }
    }

    /// Scattered field and its radial derivative at polar position `(r, theta)` about the
    /// center (for `r >= radius`).
    pub fn scattered_polar(&self, r: f64, theta: f64) -> Result<(Complex64, Complex64)> {
        let kappa = self.wave.kappa;
        let x = kappa * r;
        let n_max = self.n_max();
        let hs = hankel1_seq(n_max + 1, x)?;
        let ks = bessel_k_seq(n_max + 1, x)?;
        let phase0 = Complex64::from_polar(1.0, kappa * dot(self.center, self.wave.direction));
        let psi = theta - self.wave.angle();
        let mut u = Complex64::new(0.0, 0.0);
        let mut du = Complex64::new(0.0, 0.0);
        for m in 0..=n_max {
            let (hd, kd) = if m == 0 {
                (-hs[1], -ks[1])
            } else {
                (0.5 * (hs[m - 1] - hs[m + 1]), -0.5 * (ks[m - 1] + ks[m + 1]))
            };
            let radial = self.h_coeffs[m] * hs[m] + self.k_coeffs[m] * ks[m];
            let dradial = kappa * (self.h_coeffs[m] * hd + self.k_coeffs[m] * kd);
            let angular = if m == 0 { 1.0 } else { 2.0 * (m as f64 * psi).cos() };
            let im = I.powu(m as u32);
            u += im * radial * angular;
            du += im * dradial * angular;
        }
        Ok((phase0 * u, phase0 * du))
    }
}

/// Far field of a clamped disk of radius `radius` centered at `center`.
pub fn disk_farfield_series(
    radius: f64,
    center: Point,
    wave: PlaneWave,
    angles: &[f64],
    n_max: usize,
) -> Result<FarFieldVector> {
    Ok(ClampedDisk::solve(radius, center, wave, n_max)?.farfield(angles))
}

/// Truncation used when the caller does not pick one: well past `kappa * radius`.
pub fn default_series_order(kappa: f64, radius: f64) -> usize {
    (kappa * radius).ceil() as usize + 30
}

/// Placement of the MFS source points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceCurve {
    /// Boundary moved inward along its normal by `offset * scale`.
    Offset,
    /// Boundary pulled toward its center by `tau`.
    Scaled,
}

/// MFS discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MfsConfig {
    pub m_src: usize,
    pub m_col: usize,
    pub source_curve: SourceCurve,
    pub tau: f64,
    pub offset: f64,
}

impl Default for MfsConfig {
    fn default() -> Self {
        MfsConfig { m_src: 200, m_col: 400, source_curve: SourceCurve::Offset, tau: 0.7, offset: 0.15 }
    }
}

impl MfsConfig {
    pub fn scaled(m_src: usize, m_col: usize, tau: f64) -> Self {
        MfsConfig { m_src, m_col, source_curve: SourceCurve::Scaled, tau, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_src == 0 || self.m_col < 2 * self.m_src {
            return Err(EsmError::invalid(format!(
                "MFS needs m_col >= 2 m_src > 0 (m_src = {}, m_col = {})",
                self.m_src, self.m_col
            )));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(EsmError::invalid(format!("MFS tau must lie in (0, 1), got {}", self.tau)));
        }
        if !(self.offset > 0.0 && self.offset.is_finite()) {
            return Err(EsmError::invalid(format!("MFS offset must be positive, got {}", self.offset)));
        }
        Ok(())
    }

    pub fn sources(&self, boundary: &Boundary) -> Result<Vec<Point>> {
        let sources: Vec<Point> = match self.source_curve {
            SourceCurve::Scaled => {
                boundary.scaled_about_center(self.tau).samples(self.m_src).iter().map(|s| s.point).collect()
            }
            SourceCurve::Offset => boundary.inward_offset(self.m_src, self.offset * boundary.scale),
        };
        if let Some(p) = sources.iter().find(|&&p| !boundary.contains(p)) {
            return Err(EsmError::invalid(format!(
                "MFS source ({:.4}, {:.4}) lies outside the {} boundary; reduce the offset",
                p[0],
                p[1],
                boundary.shape.name()
            )));
        }
        Ok(sources)
    }
}

/// `Phi_H(x, y) = (i/4) H_0(kappa r)` and its normal derivative in `x`.
fn helmholtz_monopole(kappa: f64, x: Point, normal: Point, y: Point) -> Result<(Complex64, Complex64)> {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r = d[0].hypot(d[1]);
    let h = hankel1_seq(1, kappa * r)?;
    let value = 0.25 * I * h[0];
    let dn = -0.25 * I * kappa * h[1] * dot(d, normal) / r;
    Ok((value, dn))
}

/// `Phi_M(x, y) = K_0(kappa r) / (2 pi)` and its normal derivative in `x`.
fn modified_monopole(kappa: f64, x: Point, normal: Point, y: Point) -> Result<(f64, f64)> {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r = d[0].hypot(d[1]);
    let k = bessel_k_seq(1, kappa * r)?;
    let value = 0.5 * FRAC_1_PI * k[0];
    let dn = -0.5 * FRAC_1_PI * kappa * k[1] * dot(d, normal) / r;
    Ok((value, dn))
}

/// `A = U diag(s) V^H`, returned as `(U, s, V^H)`.
fn thin_svd(a: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, DVector<f64>, DMatrix<Complex64>)> {
    let m = faer::Mat::<faer::c64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let svd = m.thin_svd().map_err(|_| EsmError::invalid("MFS collocation SVD did not converge"))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    Ok((
        DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]),
        DVector::from_fn(s.nrows(), |k, _| s[k].re),
        DMatrix::from_fn(v.ncols(), v.nrows(), |i, j| v[(j, i)].conj()),
    ))
}

/// Collocation matrix and its SVD for one boundary and wavenumber; reusable across
/// incident fields.
///
/// Rows `0..m_col` enforce `u^s = -u^i`, rows `m_col..2 m_col` enforce
/// `kappa^{-1} d_nu u^s = -kappa^{-1} d_nu u^i`. Columns `0..m_src` are Helmholtz
/// monopoles, `m_src..2 m_src` modified-Helmholtz monopoles.
pub struct MfsSystem {
    kappa: f64,
    sources: Vec<Point>,
    collocation: Vec<BoundarySample>,
    u: DMatrix<Complex64>,
    singular_values: DVector<f64>,
    v_t: DMatrix<Complex64>,
    rank: usize,
    matrix: DMatrix<Complex64>,
}

impl MfsSystem {
    pub fn new(boundary: &Boundary, kappa: f64, cfg: MfsConfig) -> Result<Self> {
        cfg.validate()?;
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(EsmError::invalid(format!("wavenumber must be positive, got {kappa}")));
        }
        let sources = cfg.sources(boundary)?;
        let collocation = boundary.samples(cfg.m_col);
        let (m_col, m_src) = (cfg.m_col, cfg.m_src);
        let mut matrix = DMatrix::<Complex64>::zeros(2 * m_col, 2 * m_src);
        for (i, c) in collocation.iter().enumerate() {
            for (j, &y) in sources.iter().enumerate() {
                let (h, dh) = helmholtz_monopole(kappa, c.point, c.normal, y)?;
                let (k, dk) = modified_monopole(kappa, c.point, c.normal, y)?;
                matrix[(i, j)] = h;
                matrix[(i, m_src + j)] = Complex64::new(k, 0.0);
                matrix[(m_col + i, j)] = dh / kappa;
                matrix[(m_col + i, m_src + j)] = Complex64::new(dk / kappa, 0.0);
            }
        }
        let (u, singular_values, v_t) = thin_svd(&matrix)?;
        let smax = singular_values.max();
        let rank = singular_values.iter().filter(|&&s| s > MFS_SVD_CUTOFF * smax).count();
        Ok(MfsSystem { kappa, sources, collocation, u, singular_values, v_t, rank, matrix })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn m_src(&self) -> usize {
        self.sources.len()
    }

    pub fn sources(&self) -> &[Point] {
        &self.sources
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn condition_estimate(&self) -> f64 {
        self.singular_values.max() / self.singular_values.min()
    }

    /// Right-hand side `-(u^i, kappa^{-1} d_nu u^i)` on the collocation points.
    pub fn incident_rhs(&self, wave: &PlaneWave) -> DVector<Complex64> {
        let m_col = self.collocation.len();
        let mut b = DVector::<Complex64>::zeros(2 * m_col);
        for (i, c) in self.collocation.iter().enumerate() {
            b[i] = -wave.value(c.point);
            b[m_col + i] = -wave.normal_derivative(c.point, c.normal) / self.kappa;
        }
        b
    }

    /// Truncated-SVD least-squares coefficients and the relative residual `|Ac - b| / |b|`.
    pub fn solve_rhs(&self, rhs: &DVector<Complex64>) -> (DVector<Complex64>, f64) {
        let mut coeffs = DVector::<Complex64>::zeros(self.v_t.ncols());
        for k in 0..self.rank {
            let proj = self.u.column(k).dotc(rhs) / self.singular_values[k];
            for j in 0..coeffs.len() {
                coeffs[j] += self.v_t[(k, j)].conj() * proj;
            }
        }
        let residual = (&self.matrix * &coeffs - rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
        (coeffs, residual)
    }

    fn model(&self, coeffs: DVector<Complex64>, residual: f64, wave: Option<PlaneWave>) -> MfsModel {
        let m = self.sources.len();
        MfsModel {
            kappa: self.kappa,
            sources: self.sources.clone(),
            h_coeffs: coeffs.rows(0, m).iter().copied().collect(),
            m_coeffs: coeffs.rows(m, m).iter().copied().collect(),
            collocation: self.collocation.iter().map(|c| c.point).collect(),
            residual,
            wave,
        }
    }

    /// Solve for an arbitrary boundary datum; no residual check.
    pub fn solve_with_rhs(&self, rhs: &DVector<Complex64>) -> MfsModel {
        let (c, res) = self.solve_rhs(rhs);
        self.model(c, res, None)
    }

    /// Solve for a plane wave, rejecting fits whose residual exceeds the limit.
    pub fn solve(&self, wave: &PlaneWave) -> Result<MfsModel> {
        if (wave.kappa - self.kappa).abs() > 1e-14 * self.kappa {
            return Err(EsmError::invalid("plane wave and MFS system use different wavenumbers"));
        }
        let (c, residual) = self.solve_rhs(&self.incident_rhs(wave));
        if !(residual <= MFS_RESIDUAL_LIMIT) {
            return Err(EsmError::MfsConvergence { residual, tolerance: MFS_RESIDUAL_LIMIT });
        }
        Ok(self.model(c, residual, Some(*wave)))
    }
}

/// A solved MFS representation of `u^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct MfsModel {
    pub kappa: f64,
    pub sources: Vec<Point>,
    pub h_coeffs: Vec<Complex64>,
    pub m_coeffs: Vec<Complex64>,
    pub collocation: Vec<Point>,
    /// Relative boundary residual of the least-squares fit.
    pub residual: f64,
    pub wave: Option<PlaneWave>,
}

impl MfsModel {
    /// `u^inf(x_hat) = sum_m c^H_m exp(-i kappa x_hat . y_m)`. The modified-Helmholtz
    /// coefficients do not radiate and are not read.
    pub fn farfield(&self, angles: &[f64]) -> FarFieldVector {
        let values = angles
            .iter()
            .map(|&theta| {
                let xh = unit(theta);
                self.sources
                    .iter()
                    .zip(&self.h_coeffs)
                    .map(|(&y, &c)| c * Complex64::from_polar(1.0, -self.kappa * dot(xh, y)))
                    .sum()
            })
            .collect();
        FarFieldVector {
            kappa: self.kappa,
            angles: angles.to_vec(),
            values,
            direction: self.wave.map(|w| w.direction),
        }
    }

    /// Helmholtz (radiating) part of the scattered field at `x`.
    pub fn scattered_h(&self, x: Point) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for (&y, &c) in self.sources.iter().zip(&self.h_coeffs) {
            s += c * helmholtz_monopole(self.kappa, x, [1.0, 0.0], y)?.0;
        }
        Ok(s)
    }

    /// Full scattered field `u^s_H + u^s_M` at `x`.
    pub fn scattered(&self, x: Point) -> Result<Complex64> {
        let mut s = self.scattered_h(x)?;
        for (&y, &c) in self.sources.iter().zip(&self.m_coeffs) {
            s += c * modified_monopole(self.kappa, x, [1.0, 0.0], y)?.0;
        }
        Ok(s)
    }
}

/// Solve the clamped problem for one plane wave with sources on the scaled boundary.
pub fn mfs_solve(boundary: &Boundary, wave: &PlaneWave, m_src: usize, m_col: usize, tau: f64) -> Result<MfsModel> {
    MfsSystem::new(boundary, wave.kappa, MfsConfig::scaled(m_src, m_col, tau))?.solve(wave)
}

pub fn mfs_solve_with(boundary: &Boundary, wave: &PlaneWave, cfg: MfsConfig) -> Result<MfsModel> {
    MfsSystem::new(boundary, wave.kappa, cfg)?.solve(wave)
}

pub fn mfs_farfield(model: &MfsModel, angles: &[f64]) -> FarFieldVector {
    model.farfield(angles)
}

/// Far fields of one obstacle for several incident angles, sharing one factorization.
/// Returns the far fields and the per-direction boundary residuals.
pub fn mfs_farfields(
    boundary: &Boundary,
    kappa: f64,
    directions: &[f64],
    n_obs: usize,
    cfg: MfsConfig,
) -> Result<(Vec<FarFieldVector>, Vec<f64>)> {
    let system = MfsSystem::new(boundary, kappa, cfg)?;
    let angles = unit_circle_angles(n_obs);
    let mut fields = Vec::with_capacity(directions.len());
    let mut residuals = Vec::with_capacity(directions.len());
    for &phi in directions {
        let model = system.solve(&PlaneWave::from_angle(kappa, phi)?)?;
        residuals.push(model.residual);
        fields.push(model.farfield(&angles));
    }
    Ok((fields, residuals))
}

/// Reciprocity defect `max |u(x_hat, d) - u(-d, -x_hat)|` relative to `max |u|`, over
/// the supplied angle set used both as observation and incidence. Diagnostic only.
pub fn reciprocity_defect(boundary: &Boundary, kappa: f64, angles: &[f64], cfg: MfsConfig) -> Result<f64> {
    let system = MfsSystem::new(boundary, kappa, cfg)?;
    let n = angles.len();
    let mut table = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (l, &phi) in angles.iter().enumerate() {
        let ff = system.solve(&PlaneWave::from_angle(kappa, phi)?)?.farfield(angles);
        for (row, v) in table.iter_mut().zip(&ff.values) {
            row[l] = *v;
        }
    }
    let opposite = |idx: usize| -> Option<usize> {
        let target = (angles[idx] + PI).rem_euclid(2.0 * PI);
        angles.iter().position(|&a| {
            let g = (a - target).abs();
            g.min(2.0 * PI - g) < 1e-12
        })
    };
    let scale = table.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for i in 0..n {
        for l in 0..n {
            if let (Some(ri), Some(rl)) = (opposite(l), opposite(i)) {
                worst = worst.max((table[i][l] - table[ri][rl]).norm());
            }
        }
    }
    Ok(worst / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn angles32() -> Vec<f64> {
        unit_circle_angles(32)
    }

    #[test]
    fn disk_series_satisfies_clamped_conditions() {
        let wave = PlaneWave::from_angle(2.0, 0.3).unwrap();
        let disk = ClampedDisk::solve(1.0, [0.0, 0.0], wave, 30).unwrap();
        let mut worst = 0.0f64;
        for theta in unit_circle_angles(37) {
            let (us, dus) = disk.scattered_polar(1.0, theta).unwrap();
            let x = unit(theta);
            let ui = wave.value(x);
            let dui = wave.normal_derivative(x, x);
            worst = worst.max((us + ui).norm()).max((dus + dui).norm());
        }
        assert!(worst < 1e-10, "boundary defect {worst}");
    }

    #[test]
    fn disk_series_translation() {
        let wave = PlaneWave::from_angle(2.0, 0.0).unwrap();
        let a = angles32();
        let u0 = disk_farfield_series(1.0, [0.0, 0.0], wave, &a, 30).unwrap();
        let u1 = disk_farfield_series(1.0, [1.0, 1.0], wave, &a, 30).unwrap();
        for (i, &t) in a.iter().enumerate() {
            let want = u0.values[i] * translation_phase(2.0, [1.0, 1.0], unit(t), wave.direction);
            assert!((u1.values[i] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn disk_series_truncation_converged() {
        let wave = PlaneWave::from_angle(2.0, 0.0).unwrap();
        let a = angles32();
        let u30 = disk_farfield_series(1.0, [0.0, 0.0], wave, &a, 30).unwrap();
        let u40 = disk_farfield_series(1.0, [0.0, 0.0], wave, &a, 40).unwrap();
        let d = u30.values.iter().zip(&u40.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(d < 1e-12);
    }

    #[test]
    fn single_monopole_farfields() {
        let model = MfsModel {
            kappa: 2.0,
            sources: vec![[0.0, 0.0]],
            h_coeffs: vec![Complex64::new(1.0, 0.0)],
            m_coeffs: vec![Complex64::new(5.0, -3.0)],
            collocation: vec![],
            residual: 0.0,
            wave: None,
        };
        for v in mfs_farfield(&model, &angles32()).values {
            assert!((v - 1.0).norm() < 1e-15);
        }
        let shifted = MfsModel { sources: vec![[1.0, 0.0]], ..model };
        let a = angles32();
        for (v, &t) in shifted.farfield(&a).values.iter().zip(&a) {
            let want = Complex64::from_polar(1.0, -2.0 * t.cos());
            assert!((v - want).norm() < 1e-15);
        }
    }

    #[test]
    fn mfs_matches_disk_series() {
        let wave = PlaneWave::from_angle(2.0, 0.0).unwrap();
        let disk = Boundary::disk(1.0, [0.0, 0.0]).unwrap();
        let model = mfs_solve(&disk, &wave, 60, 180, 0.7).unwrap();
        let a = angles32();
        let err = model.farfield(&a).max_rel_diff(&disk_farfield_series(1.0, [0.0, 0.0], wave, &a, 40).unwrap());
        assert!(err < 1e-6, "MFS vs series {err:e}");
    }

    #[test]
    fn modified_helmholtz_coefficients_do_not_radiate() {
        let wave = PlaneWave::from_angle(2.0, 1.0).unwrap();
        let model = mfs_solve(&Boundary::peanut([0.0, 0.0]), &wave, 80, 240, 0.7).unwrap();
        let a = angles32();
        let before = model.farfield(&a);
        let mut perturbed = model.clone();
        for c in &mut perturbed.m_coeffs {
            *c += Complex64::new(1.0, -2.0);
        }
        assert_eq!(before.values, perturbed.farfield(&a).values);
    }

    #[test]
    fn star_converges_with_default_sources() {
        let wave = PlaneWave::from_angle(2.0, 0.0).unwrap();
        let star = Boundary::star([0.0, 0.0]);
        let cfg = MfsConfig::default();
        let fine = mfs_solve_with(&star, &wave, cfg).unwrap();
        assert!(fine.residual < 1e-8, "residual {:e}", fine.residual);
        let half = MfsConfig { m_src: cfg.m_src / 2, m_col: cfg.m_col / 2, ..cfg };
        let system = MfsSystem::new(&star, 2.0, half).unwrap();
        let coarse = system.solve_with_rhs(&system.incident_rhs(&wave));
        let a = angles32();
        let change = coarse.farfield(&a).max_rel_diff(&fine.farfield(&a));
        assert!(change < 1e-7, "doubling m_src changed u_inf by {change:e}");
    }

    #[test]
    fn mfs_rejects_bad_config() {
        let wave = PlaneWave::from_angle(2.0, 0.0).unwrap();
        let disk = Boundary::disk(1.0, [0.0, 0.0]).unwrap();
        assert!(mfs_solve(&disk, &wave, 60, 100, 0.7).is_err());
        assert!(mfs_solve(&disk, &wave, 60, 180, 1.0).is_err());
        let deep = MfsConfig { offset: 3.0, ..Default::default() };
        assert!(MfsSystem::new(&Boundary::star([0.0, 0.0]), 2.0, deep).is_err());
        assert!(PlaneWave::new(2.0, [1.0, 1.0]).is_err());
        assert!(PlaneWave::new(0.0, [1.0, 0.0]).is_err());
    }

    #[test]
    fn too_coarse_mfs_reports_residual() {
        let wave = PlaneWave::from_angle(2.0, 0.0).unwrap();
        match mfs_solve(&Boundary::star([0.0, 0.0]), &wave, 4, 8, 0.7) {
            Err(EsmError::MfsConvergence { residual, .. }) => assert!(residual > MFS_RESIDUAL_LIMIT),
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }
}
