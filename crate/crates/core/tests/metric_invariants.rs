//! Generic metric properties: identity, symmetry, range, determinism and
//! quality-map consistency, over random 8-bit images.

use holoqa::metrics::{gmsd, uqi, score_complex, score_parts_avg, score_real, MetricId, MetricParams, MetricSpec};
use holoqa::metrics::filter::{filter_same_symmetric, gaussian_taps, mean};
use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth random texture with a noise component, in 8-bit code values.
fn image(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let white = Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0));
    let smooth = filter_same_symmetric(&white, &gaussian_taps(7, 1.5));
    let grain = Array2::from_shape_fn((rows, cols), |_| rng.random_range(-20.0..20.0));
    (smooth * 300.0 + grain + 128.0).mapv(|v: f64| v.round().clamp(0.0, 255.0))
}

fn distort(img: &Array2<f64>, amount: f64, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    img.mapv(|v| (v + rng.random_range(-amount..=amount)).round().clamp(0.0, 255.0))
}

/// Large enough for every metric, including the five-scale ones.
const SIDE: usize = 180;

fn params() -> MetricParams {
    MetricParams::default()
}

fn value(id: MetricId, r: &Array2<f64>, d: &Array2<f64>) -> f64 {
    score_real(id, r, d, &params(), false).unwrap().value
}

#[test]
fn every_real_metric_is_perfect_on_identical_inputs() {
    for seed in 0..3 {
        let a = image(SIDE, SIDE + 7, seed);
        for id in MetricId::ALL {
            let v = value(id, &a, &a);
            assert_eq!(v, id.perfect_value(), "{id} on seed {seed}");
        }
    }
}

#[test]
fn every_complex_metric_is_perfect_on_identical_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = Array2::from_shape_fn((40, 36), |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    for id in MetricId::COMPLEX {
        let v = score_complex(id, &f, &f, &params()).unwrap().value;
        assert_eq!(v, id.perfect_value(), "{id}_C");
    }
}

#[test]
fn all_eighteen_specs_are_distinct() {
    let names: Vec<String> = MetricSpec::all().iter().map(ToString::to_string).collect();
    assert_eq!(names.len(), 18);
    let mut sorted = names.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), 18);
    for n in &names {
        assert_eq!(n.parse::<MetricSpec>().unwrap().to_string(), *n);
    }
}

/// Metrics whose definition treats both inputs alike.
const SYMMETRIC: [MetricId; 8] = [
    MetricId::Mse,
    MetricId::Psnr,
    MetricId::Ssim,
    MetricId::Msssim,
    MetricId::Uqi,
    MetricId::Gmsd,
    MetricId::Fsim,
    MetricId::Nlpd,
];

fn in_range(id: MetricId, v: f64) -> bool {
    match id {
        MetricId::Mse | MetricId::Nmse | MetricId::Gmsd | MetricId::Nlpd | MetricId::Vifp => v >= 0.0,
        MetricId::Psnr => v > 0.0,
        MetricId::Ssim | MetricId::Uqi => (-1.0..=1.0).contains(&v),
        MetricId::Msssim | MetricId::Iwssim | MetricId::Fsim | MetricId::Ssrm | MetricId::Ssrmt => (0.0..=1.0).contains(&v),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn symmetric_metrics_commute(seed in any::<u64>(), amount in 1.0f64..60.0) {
        let a = image(SIDE, SIDE, seed);
        let b = distort(&a, amount, seed ^ 1);
        for id in SYMMETRIC {
            let (ab, ba) = (value(id, &a, &b), value(id, &b, &a));
            prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0), "{} {} vs {}", id, ab, ba);
        }
    }

    #[test]
    fn scores_stay_in_range_and_are_deterministic(seed in any::<u64>(), amount in 1.0f64..120.0) {
        let a = image(SIDE, SIDE, seed);
        let b = distort(&a, amount, seed ^ 2);
        for id in MetricId::ALL {
            let v = value(id, &a, &b);
            prop_assert!(in_range(id, v), "{} = {}", id, v);
            prop_assert_eq!(v.to_bits(), value(id, &a, &b).to_bits());
        }
    }

    #[test]
    fn maps_pool_to_the_score(seed in any::<u64>(), rows in 24usize..64, cols in 24usize..64, amount in 1.0f64..80.0) {
        let a = image(rows, cols, seed);
        let b = distort(&a, amount, seed ^ 3);
        for id in MetricId::ALL.into_iter().filter(|id| id.produces_map()) {
            let s = score_real(id, &a, &b, &params(), true).unwrap();
            let map = s.quality_map.expect("map requested");
            let pooled = match id {
                MetricId::Ssim => mean(&map),
                MetricId::Uqi => uqi::pool(&map),
                MetricId::Gmsd => gmsd::pool(&map),
                other => unreachable!("{other} has no map"),
            };
            prop_assert_eq!(pooled.to_bits(), s.value.to_bits());
            prop_assert!(score_real(id, &a, &b, &params(), false).unwrap().quality_map.is_none());
        }
    }

    #[test]
    fn fidelity_metrics_order_with_noise(seed in any::<u64>()) {
        let a = image(48, 48, seed);
        let light = distort(&a, 5.0, seed ^ 4);
        let heavy = distort(&a, 40.0, seed ^ 4);
        prop_assert!(value(MetricId::Mse, &a, &light) < value(MetricId::Mse, &a, &heavy));
        prop_assert!(value(MetricId::Psnr, &a, &light) > value(MetricId::Psnr, &a, &heavy));
        prop_assert!(value(MetricId::Ssim, &a, &light) > value(MetricId::Ssim, &a, &heavy));
    }
}

#[test]
fn complex_mse_is_the_sum_of_the_plane_averages() {
    // With unit affine records the complex error is |dre|^2 + |dim|^2 while
    // the averaging adapter halves that sum.
    let (re, im) = (image(32, 32, 5), image(32, 32, 6));
    let (dre, dim) = (distort(&re, 9.0, 7), distort(&im, 9.0, 8));
    let to_c = |a: &Array2<f64>, b: &Array2<f64>| ndarray::Zip::from(a).and(b).map_collect(|&x, &y| Complex64::new(x, y));
    let complex = score_complex(MetricId::Mse, &to_c(&re, &im), &to_c(&dre, &dim), &params()).unwrap().value;
    let avg = score_parts_avg(MetricId::Mse, (&re, &im), (&dre, &dim), &params()).unwrap().value;
    assert!((2.0 * avg - complex).abs() < 1e-9 * complex);
}

#[test]
fn mismatched_and_small_inputs_are_rejected() {
    let a = image(32, 32, 1);
    let b = image(32, 30, 1);
    for id in MetricId::ALL {
        assert!(score_real(id, &a, &b, &params(), false).is_err(), "{id}");
    }
    for id in [MetricId::Msssim, MetricId::Iwssim, MetricId::Vifp] {
        let tiny = image(20, 20, 2);
        assert!(score_real(id, &tiny, &tiny, &params(), false).is_err(), "{id}");
    }
}
