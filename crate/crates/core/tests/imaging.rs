mod common;

use esm_core::data::FarFieldDataset;
use esm_core::error::EsmError;
use esm_core::geometry::{dist, Boundary, DirectionSet, SamplingGrid};
use esm_core::imaging::{
    artifact_free, in_superlevel_set, indicator_multi, indicator_single, refine, sweep, sweep_with_path,
    IndicatorConfig, SweepPath,
};
use esm_core::refdisk::{RefDiskKind, RefDiskSpec};
use esm_core::spectral::{eig_circulant, translate_spectrum};
use num_complex::Complex64;
use proptest::prelude::*;

use common::{noisy, peanut, random_dataset, N};

fn small_config(kind: RefDiskKind, n: usize) -> IndicatorConfig {
    IndicatorConfig { grid: SamplingGrid::new([-4.0, 4.0], [-4.0, 4.0], n, n).unwrap(), kind, ..Default::default() }
}

fn rel_close(a: &[Option<f64>], b: &[Option<f64>], tol: f64) -> f64 {
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        match (x, y) {
            (Some(x), Some(y)) => worst = worst.max((x - y).abs() / y.abs()),
            (None, None) => {}
            _ => return f64::INFINITY,
        }
    }
    assert!(worst < tol, "{worst:e}");
    worst
}

#[test]
fn fast_and_dense_sweeps_agree() {
    let data = noisy(&peanut(&DirectionSet::inc4()), 0.02, 1);
    for kind in [RefDiskKind::Dirichlet, RefDiskKind::Neumann] {
        let cfg = small_config(kind, 20);
        for (ds, radius) in [(&data, 0.78125), (&random_dataset(3, 2.0, 2), 0.5)] {
            let fast = sweep_with_path(ds, &cfg, radius, SweepPath::Circulant).unwrap();
            let dense = sweep_with_path(ds, &cfg, radius, SweepPath::Dense).unwrap();
            rel_close(&fast.values, &dense.values, 1e-8);
        }
    }
}

#[test]
fn single_term_picard_sum() {
    let spec = RefDiskSpec::new(RefDiskKind::Dirichlet, 0.78125, 2.0).unwrap();
    let s = translate_spectrum(&eig_circulant(&spec, N).unwrap(), [0.3, -1.2], 2.0, &common_angles());
    let c = Complex64::new(0.6, -2.0);
    let u: Vec<Complex64> = s.vector(0).iter().map(|v| v * c).collect();
    let w = indicator_single(&u, &s, 1e-4).unwrap();
    let want = s.eigenvalues[0].norm() / c.norm_sqr();
    assert!((w - want).abs() < 1e-12 * want);
    assert_eq!(indicator_single(&vec![Complex64::new(0.0, 0.0); N], &s, 1e-4), None);
    assert_eq!(indicator_single(&u, &s, 1e6), None);
}

fn common_angles() -> Vec<f64> {
    esm_core::geometry::unit_circle_angles(N)
}

#[test]
fn multi_direction_sums_columns() {
    let ds = random_dataset(5, 2.0, 1);
    let spec = RefDiskSpec::new(RefDiskKind::Neumann, 1.0, 2.0).unwrap();
    let s = translate_spectrum(&eig_circulant(&spec, N).unwrap(), [1.0, 0.5], 2.0, &ds.angles);
    let single = indicator_single(ds.column(0), &s, 1e-4).unwrap();
    assert_eq!(indicator_multi(&ds, &s, 1e-4), Some(single));
    let doubled = FarFieldDataset::new(2.0, ds.angles.clone(), vec![0.0, 1.0], vec![ds.columns[0].clone(); 2]).unwrap();
    assert_eq!(indicator_multi(&doubled, &s, 1e-4), Some(2.0 * single));
    let mut half_zero = doubled.clone();
    half_zero.columns[1] = vec![Complex64::new(0.0, 0.0); N];
    assert_eq!(indicator_multi(&half_zero, &s, 1e-4), Some(single));
}

#[test]
fn four_direction_peanut_is_positive_at_center() {
    let ds = noisy(&peanut(&DirectionSet::inc4()), 0.02, 1);
    let spec = RefDiskSpec::new(RefDiskKind::Dirichlet, 0.78125, 2.0).unwrap();
    let s = translate_spectrum(&eig_circulant(&spec, N).unwrap(), [1.0, 1.0], 2.0, &ds.angles);
    let w = indicator_multi(&ds, &s, 1e-4).unwrap();
    assert!(w > 0.0 && w.is_finite());
}

#[test]
fn zero_data_gives_all_invalid_error() {
    let mut ds = random_dataset(1, 2.0, 1);
    ds.columns[0] = vec![Complex64::new(0.0, 0.0); N];
    let err = sweep(&ds, &small_config(RefDiskKind::Dirichlet, 5), 0.5).unwrap_err();
    assert!(matches!(err, EsmError::AllInvalid));
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let ds = random_dataset(8, 2.0, 3);
    let cfg = small_config(RefDiskKind::Dirichlet, 30);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| sweep(&ds, &cfg, 0.78125).unwrap())
    };
    let one = run(1);
    let many = run(4);
    let bits = |g: &esm_core::imaging::IndicatorGrid| g.values.iter().map(|v| v.map(f64::to_bits)).collect::<Vec<_>>();
    assert_eq!(bits(&one), bits(&many));
    assert_eq!(one.to_csv(), many.to_csv());
}

#[test]
fn peanut_two_directions_localizes_at_refined_radius() {
    let ds = noisy(&peanut(&DirectionSet::inc2()), 0.02, 1);
    let cfg = IndicatorConfig::default();
    let g = sweep(&ds, &cfg, 0.78125).unwrap();
    let z = g.argmax().unwrap();
    assert!(dist(z, [1.0, 1.0]) < 0.5, "{z:?}");
    assert!(in_superlevel_set(&g, 0.5, [1.0, 1.0]));
}

#[test]
fn peanut_two_directions_has_artifacts_at_initial_radius() {
    let ds = noisy(&peanut(&DirectionSet::inc2()), 0.02, 1);
    let g = sweep(&ds, &IndicatorConfig::default(), 0.5).unwrap();
    let report = artifact_free(&g, 0.5);
    assert!(report.components >= 2, "{report:?}");
}

#[test]
fn refine_radius_tracks_disk_size() {
    for a in [0.75, 1.0] {
        let ds = noisy(&common::clean(&Boundary::disk(a, [1.0, 1.0]).unwrap(), 2.0, &DirectionSet::inc4(), esm_core::forward::MfsConfig::default()), 0.02, 1);
        let r = refine(&ds, &IndicatorConfig::default()).unwrap();
        let ratio = r.optimal.radius / a;
        assert!((1.0 / 1.25..=1.25).contains(&ratio), "a = {a}: R* = {} ({:?})", r.optimal.radius, r.optimal.reports);
        assert!(in_superlevel_set(r.chosen_grid(), 0.5, [1.0, 1.0]));
    }
}

#[test]
fn refine_reports_every_examined_radius() {
    let ds = noisy(&peanut(&DirectionSet::inc4()), 0.02, 2);
    let cfg = IndicatorConfig { p_max: 3, ..small_config(RefDiskKind::Dirichlet, 40) };
    let r = refine(&ds, &cfg).unwrap();
    let d = &r.optimal;
    assert_eq!(d.reports.len(), d.p_star as usize + 1);
    assert_eq!(d.radius, cfg.radius(d.p_star));
    assert_eq!(Some(d.center), r.chosen_grid().argmax());
    assert!(d.reports[..d.p_star as usize].iter().all(|rep| !rep.artifact_free));
    assert!(!d.converged || d.reports.last().unwrap().artifact_free);
}

#[test]
fn exclusion_warning_reaches_the_grid() {
    let ds = random_dataset(4, 2.0, 1);
    let radius = 2.404825557695773 / 2.0;
    let g = sweep(&ds, &small_config(RefDiskKind::Dirichlet, 5), radius).unwrap();
    assert!(!g.exclusion.is_ok());
    let g = sweep(&ds, &small_config(RefDiskKind::Dirichlet, 5), 0.5).unwrap();
    assert!(g.exclusion.is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scaling_covariance(seed in 0u64..1000, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let c = Complex64::new(re, im);
        prop_assume!(c.norm() > 0.05);
        let ds = random_dataset(seed, 2.0, 2);
        let mut scaled = ds.clone();
        scaled.columns.iter_mut().flatten().for_each(|v| *v *= c);
        let cfg = small_config(RefDiskKind::Dirichlet, 15);
        let a = sweep(&ds, &cfg, 0.78125).unwrap();
        let b = sweep(&scaled, &cfg, 0.78125).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            let (x, y) = (x.unwrap(), y.unwrap());
            prop_assert!((y * c.norm_sqr() - x).abs() <= 1e-10 * x);
        }
        prop_assert_eq!(a.max().unwrap().0, b.max().unwrap().0);
        prop_assert_eq!(artifact_free(&a, 0.5), artifact_free(&b, 0.5));
    }

    #[test]
    fn additive_over_directions(seed in 0u64..1000, zx in -4.0f64..4.0, zy in -4.0f64..4.0) {
        let ds = random_dataset(seed, 2.0, 3);
        let spec = RefDiskSpec::new(RefDiskKind::Neumann, 0.78125, 2.0).unwrap();
        let s = translate_spectrum(&eig_circulant(&spec, N).unwrap(), [zx, zy], 2.0, &ds.angles);
        let total = indicator_multi(&ds, &s, 1e-4).unwrap();
        let parts: f64 = (0..3).map(|l| indicator_single(ds.column(l), &s, 1e-4).unwrap()).sum();
        prop_assert!((total - parts).abs() <= 1e-14 * total);
    }

    #[test]
    fn monotone_in_alpha(seed in 0u64..1000, zx in -4.0f64..4.0, zy in -4.0f64..4.0, radius in 0.3f64..2.0) {
        let ds = random_dataset(seed, 2.0, 2);
        let spec = RefDiskSpec::new(RefDiskKind::Dirichlet, radius, 2.0).unwrap();
        let s = translate_spectrum(&eig_circulant(&spec, N).unwrap(), [zx, zy], 2.0, &ds.angles);
        let mut last = 0.0;
        for alpha in [1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 1e-1, 0.5] {
            if let Some(w) = indicator_multi(&ds, &s, alpha) {
                prop_assert!(w >= last);
                last = w;
            }
        }
    }
}
