//! Discrete reference-disk far-field matrices and their eigensystems.
//!
//! `F_z(i, j) = U_{B_z}(x_hat_i, x_hat_j)` at `N` equispaced angles, without quadrature
//! weights. `F_0` is circulant, and `F_z = D_z F_0 D_z^{-1}` with
//! `D_z = diag(exp(-i kappa z . x_hat_i))`, so every `F_z` shares the spectrum of `F_0`.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{EsmError, Result};
use crate::geometry::{dot, unit, unit_circle_angles, Point};
use crate::refdisk::{mie_eigen_coefficients, translation_factor, RefDiskSpec};

pub const DEFAULT_N: usize = 32;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;
/// Off-diagonal mass of the Schur factor, relative to `||F||`, above which the matrix
/// is treated as non-normal.
const NORMALITY_TOL: f64 = 1e-9;
/// Relative modulus gap below which two eigenvalues are ordered by phase.
const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldMatrix {
    pub spec: RefDiskSpec,
    pub z: Point,
    pub angles: Vec<f64>,
    pub matrix: DMatrix<Complex64>,
}

impl FarFieldMatrix {
    pub fn n(&self) -> usize {
        self.angles.len()
    }

    /// Max-entry norm.
    pub fn max_norm(&self) -> f64 {
        self.matrix.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn check_size(spec: &RefDiskSpec, n: usize) -> Result<()> {
    spec.validate()?;
    if n < 2 * spec.n_trunc + 2 {
        return Err(EsmError::invalid(format!(
            "N = {n} observation angles cannot resolve {} retained modes (need N >= {})",
            2 * spec.n_trunc + 1,
            2 * spec.n_trunc + 2
        )));
    }
    Ok(())
}

pub fn assemble(spec: &RefDiskSpec, z: Point, n: usize) -> Result<FarFieldMatrix> {
    check_size(spec, n)?;
    let angles = unit_circle_angles(n);
    let column = origin_column(spec, n);
    let origin = z == [0.0, 0.0];
    let matrix = DMatrix::from_fn(n, n, |i, j| {
        let k = column[(i + n - j) % n];
        if origin {
            k
        } else {
            k * translation_factor(spec.kappa, z, angles[i], angles[j])
        }
    });
    Ok(FarFieldMatrix { spec: *spec, z, angles, matrix })
}

/// Origin kernel at `theta_i - theta_0`, evaluated at the folded difference
/// `2 pi min(i, N - i) / N` so that `F_0` is exactly symmetric and circulant.
fn origin_column(spec: &RefDiskSpec, n: usize) -> Vec<Complex64> {
    let c = mie_eigen_coefficients(spec);
    (0..n).map(|i| c.resum(TAU * i.min(n - i) as f64 / n as f64)).collect()
}

/// Eigenvalues with orthonormal eigenvectors stored as matrix columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, j: usize) -> nalgebra::DVectorView<'_, Complex64> {
        self.eigenvectors.column(j)
    }

    /// `max_j ||F v_j - lambda_j v_j||_2`.
    pub fn max_residual(&self, f: &DMatrix<Complex64>) -> f64 {
        (0..self.len())
            .map(|j| {
                let v = self.eigenvectors.column(j);
                (f * v - v * self.eigenvalues[j]).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Number of eigenvalues with modulus above `threshold`.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.eigenvalues.iter().filter(|l| l.norm() > threshold).count()
    }

    fn sorted(eigenvalues: Vec<Complex64>, eigenvectors: DMatrix<Complex64>) -> Spectrum {
        let order = sort_order(&eigenvalues);
        let values = order.iter().map(|&k| eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(eigenvectors.nrows(), order.len(), |i, j| eigenvectors[(i, order[j])]);
        Spectrum { eigenvalues: values, eigenvectors: vectors }
    }
}

fn phase(z: Complex64) -> f64 {
    z.arg().rem_euclid(TAU)
}

/// Descending modulus; runs of equal modulus (within `TIE_TOL`) by ascending phase.
fn sort_order(values: &[Complex64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].norm().total_cmp(&values[a].norm()).then(a.cmp(&b)));
    let mut start = 0;
    while start < order.len() {
        let head = values[order[start]].norm();
        let mut end = start + 1;
        while end < order.len() && head - values[order[end]].norm() <= TIE_TOL * head.max(f64::MIN_POSITIVE) {
            end += 1;
        }
        order[start..end].sort_by(|&a, &b| {
            phase(values[a]).partial_cmp(&phase(values[b])).unwrap_or(Ordering::Equal).then(a.cmp(&b))
        });
        start = end;
    }
    order
}

/// Eigensystem of a normal matrix from its complex Schur form `F = Q T Q*`.
///
/// For a normal matrix `T` is diagonal, so the Schur vectors are an orthonormal
/// eigenbasis even across degenerate eigenvalues.
pub fn eig_dense_matrix(f: &DMatrix<Complex64>) -> Result<Spectrum> {
    let n = f.nrows();
    if n != f.ncols() {
        return Err(EsmError::invalid(format!("eigendecomposition needs a square matrix, got {}x{}", n, f.ncols())));
    }
    if f.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(EsmError::invalid("matrix has non-finite entries"));
    }
    let schur = nalgebra::linalg::Schur::try_new(f.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or(EsmError::EigenConvergence { iterations: SCHUR_MAX_ITER, size: n })?;
    let (q, t) = schur.unpack();
    let scale = f.norm().max(f64::MIN_POSITIVE);
    let off: f64 = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).map(|(i, j)| t[(i, j)].norm_sqr()).sum::<f64>().sqrt();
    if off > NORMALITY_TOL * scale {
        return Err(EsmError::invalid(format!(
            "matrix is not normal (Schur off-diagonal norm {:.3e} relative)",
            off / scale
        )));
    }
    let eigenvalues = (0..n).map(|k| t[(k, k)]).collect();
    Ok(Spectrum::sorted(eigenvalues, q))
}

pub fn eig_dense(f: &FarFieldMatrix) -> Result<Spectrum> {
    eig_dense_matrix(&f.matrix)
}

/// Spectrum of the origin matrix from its circulant structure: eigenvectors
/// `f_k(j) = exp(i k theta_j) / sqrt(N)`, eigenvalues the forward DFT of the first column.
pub fn eig_circulant(spec: &RefDiskSpec, n: usize) -> Result<Spectrum> {
    check_size(spec, n)?;
    let mut column = origin_column(spec, n);
    FftPlanner::new().plan_fft_forward(n).process(&mut column);
    let norm = 1.0 / (n as f64).sqrt();
    let vectors = DMatrix::from_fn(n, n, |j, k| Complex64::from_polar(norm, TAU * ((j * k) % n) as f64 / n as f64));
    Ok(Spectrum::sorted(column, vectors))
}

/// `exp(-i kappa z . x_hat_i)`
pub fn modulation(kappa: f64, z: Point, angles: &[f64]) -> DVector<Complex64> {
    DVector::from_iterator(angles.len(), angles.iter().map(|&t| Complex64::from_polar(1.0, -kappa * dot(z, unit(t)))))
}

/// Spectrum of `F_z` from that of `F_0`: eigenvalues unchanged, eigenvectors modulated.
pub fn translate_spectrum(s: &Spectrum, z: Point, kappa: f64, angles: &[f64]) -> Spectrum {
    if z == [0.0, 0.0] {
        return s.clone();
    }
    let d = modulation(kappa, z, angles);
    let mut vectors = s.eigenvectors.clone();
    for (i, mut row) in vectors.row_iter_mut().enumerate() {
        row *= d[i];
    }
    Spectrum { eigenvalues: s.eigenvalues.clone(), eigenvectors: vectors }
}

/// Greedy nearest-neighbour matching distance between two eigenvalue multisets:
/// each value of `a`, in order of descending modulus, takes the closest unused value of `b`.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[j].norm().total_cmp(&a[i].norm()));
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for i in order {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, v)| (k, (a[i] - v).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("equal lengths");
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// `max |F F* - F* F|`
pub fn normality_defect(f: &DMatrix<Complex64>) -> f64 {
    let a = f * f.adjoint();
    let b = f.adjoint() * f;
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}
