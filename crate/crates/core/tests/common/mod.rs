#![allow(dead_code)]

use esm_core::data::{add_noise, FarFieldDataset};
use esm_core::forward::{mfs_farfields, MfsConfig};
use esm_core::geometry::{Boundary, DirectionSet};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const N: usize = 32;

pub fn clean(boundary: &Boundary, kappa: f64, dirs: &DirectionSet, cfg: MfsConfig) -> FarFieldDataset {
    let (fields, residuals) = mfs_farfields(boundary, kappa, dirs.angles(), N, cfg).unwrap();
    assert!(residuals.iter().all(|&r| r < 1e-8), "{residuals:?}");
    FarFieldDataset::from_farfields(&fields).unwrap()
}

pub fn noisy(ds: &FarFieldDataset, delta: f64, seed: u64) -> FarFieldDataset {
    add_noise(ds, delta, seed).unwrap()
}

pub fn peanut(dirs: &DirectionSet) -> FarFieldDataset {
    clean(&Boundary::peanut([1.0, 1.0]), 2.0, dirs, MfsConfig::default())
}

pub fn star(kappa: f64, dirs: &DirectionSet) -> FarFieldDataset {
    clean(&Boundary::star([-1.0, -1.0]), kappa, dirs, MfsConfig::default())
}

pub fn random_dataset(seed: u64, kappa: f64, n_inc: usize) -> FarFieldDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let columns = (0..n_inc)
        .map(|_| (0..N).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect();
    let directions = (0..n_inc).map(|l| l as f64).collect();
    FarFieldDataset::new(kappa, esm_core::geometry::unit_circle_angles(N), directions, columns).unwrap()
}
