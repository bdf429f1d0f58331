//! Far-field kernels of sound-soft and sound-hard reference disks.
//!
//! For a disk of radius `R` at the origin the kernel is a difference kernel
//! `U(x_hat, y_hat) = sum_{|n| <= n_trunc} c_n exp(i n (theta_x - theta_y))` with
//! `c_n = -(4/i) ratio_|n|(kappa R)`. A disk centered at `z` multiplies it by
//! `exp(-i kappa z . (x_hat - y_hat))`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EsmError, Result};
use crate::geometry::{dot, unit, Point};
use crate::specfun::{bessel_j_seq, hankel1_seq};

const FOUR_OVER_I: Complex64 = Complex64 { re: 0.0, im: -4.0 };

pub const DEFAULT_N_TRUNC: usize = 10;
pub const DEFAULT_EXCLUSION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefDiskKind {
    /// Sound-soft disk.
    Dirichlet,
    /// Sound-hard disk.
    Neumann,
}

impl RefDiskKind {
    pub fn name(&self) -> &'static str {
        match self {
            RefDiskKind::Dirichlet => "dirichlet",
            RefDiskKind::Neumann => "neumann",
        }
    }
}

impl fmt::Display for RefDiskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RefDiskKind {
    type Err = EsmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "soft" => Ok(RefDiskKind::Dirichlet),
            "neumann" | "hard" => Ok(RefDiskKind::Neumann),
            other => Err(EsmError::invalid(format!(
                "unknown reference disk kind {other:?} (expected dirichlet or neumann)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefDiskSpec {
    pub kind: RefDiskKind,
    pub radius: f64,
    pub kappa: f64,
    pub n_trunc: usize,
}

impl RefDiskSpec {
    pub fn new(kind: RefDiskKind, radius: f64, kappa: f64) -> Result<Self> {
        Self::with_truncation(kind, radius, kappa, DEFAULT_N_TRUNC)
    }

    pub fn with_truncation(kind: RefDiskKind, radius: f64, kappa: f64, n_trunc: usize) -> Result<Self> {
        let spec = RefDiskSpec { kind, radius, kappa, n_trunc };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(EsmError::invalid(format!("reference disk radius must be positive, got {}", self.radius)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(EsmError::invalid(format!("wavenumber must be positive, got {}", self.kappa)));
        }
        if self.n_trunc == 0 {
            return Err(EsmError::invalid("reference disk truncation must be at least 1"));
        }
        Ok(())
    }

    pub fn size_parameter(&self) -> f64 {
        self.kappa * self.radius
    }
}

/// Fourier coefficients `c_n`, `n = -n_trunc..=n_trunc`, of the origin kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct MieCoefficients {
    n_trunc: usize,
    values: Vec<Complex64>,
}

impl MieCoefficients {
    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    /// `c_n`, zero outside the retained range.
    pub fn get(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.n_trunc {
            return Complex64::new(0.0, 0.0);
        }
        self.values[(n + self.n_trunc as i64) as usize]
    }

    /// Coefficients in index order `-n_trunc..=n_trunc`.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    /// `c_0 + 2 sum_{n>=1} c_n cos(n t)`, summed from the highest mode down.
    pub fn resum(&self, t: f64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for n in (1..=self.n_trunc).rev() {
            s += 2.0 * self.get(n as i64) * (n as f64 * t).cos();
        }
        s + self.get(0)
    }
}

/// `ratio_n` for `n = 0..=n_trunc`.
fn mode_ratios(spec: &RefDiskSpec) -> Vec<Complex64> {
    let x = spec.size_parameter();
    let n = spec.n_trunc;
    let js = bessel_j_seq(n + 1, x);
    // x > 0 is guaranteed by validation, so the Hankel sequence cannot fail.
    let hs = hankel1_seq(n + 1, x).expect("positive argument");
    match spec.kind {
        RefDiskKind::Dirichlet => (0..=n).map(|m| js[m] / hs[m]).collect(),
        RefDiskKind::Neumann => (0..=n)
            .map(|m| if m == 0 { js[1] / hs[1] } else { (js[m - 1] - js[m + 1]) / (hs[m - 1] - hs[m + 1]) })
            .collect(),
    }
}

pub fn mie_eigen_coefficients(spec: &RefDiskSpec) -> MieCoefficients {
    let ratios = mode_ratios(spec);
    let n = spec.n_trunc;
    let values = (0..=2 * n).map(|k| -FOUR_OVER_I * ratios[k.abs_diff(n)]).collect();
    MieCoefficients { n_trunc: n, values }
}

pub fn kernel_origin(spec: &RefDiskSpec, theta_x: f64, theta_y: f64) -> Complex64 {
    mie_eigen_coefficients(spec).resum(theta_x - theta_y)
}

/// `exp(-i kappa z . (x_hat - y_hat))`
pub fn translation_factor(kappa: f64, z: Point, theta_x: f64, theta_y: f64) -> Complex64 {
    let (x, y) = (unit(theta_x), unit(theta_y));
    Complex64::from_polar(1.0, -kappa * dot(z, [x[0] - y[0], x[1] - y[1]]))
}

pub fn kernel_translated(spec: &RefDiskSpec, z: Point, theta_x: f64, theta_y: f64) -> Complex64 {
    let origin = kernel_origin(spec, theta_x, theta_y);
    if z == [0.0, 0.0] {
        return origin;
    }
    origin * translation_factor(spec.kappa, z, theta_x, theta_y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ExclusionCheck {
    Ok,
    /// `kappa^2` is close to an interior eigenvalue of the reference disk through mode `n`.
    Warning { mode: usize, value: f64 },
}

impl ExclusionCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, ExclusionCheck::Ok)
    }
}

/// Flags modes whose boundary factor nearly vanishes at `kappa R`.
///
/// The factor is `J_n` (Dirichlet) or `J_n'` (Neumann), measured relative to the local
/// envelope `hypot(J_n, J_n')` so that the small-argument decay of high orders is not
/// mistaken for a zero.
pub fn eigenvalue_exclusion_check(spec: &RefDiskSpec, tol: f64) -> ExclusionCheck {
    let x = spec.size_parameter();
    let n = spec.n_trunc;
    let js = bessel_j_seq(n + 1, x);
    let measure = |m: usize| {
        let j = js[m];
        let dj = if m == 0 { -js[1] } else { 0.5 * (js[m - 1] - js[m + 1]) };
        let envelope = j.hypot(dj);
        match spec.kind {
            RefDiskKind::Dirichlet => j.abs() / envelope,
            RefDiskKind::Neumann => dj.abs() / envelope,
        }
    };
    let (mode, value) = (0..=n)
        .map(|m| (m, measure(m)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    if value < tol {
        ExclusionCheck::Warning { mode, value }
    } else {
        ExclusionCheck::Ok
    }
}
