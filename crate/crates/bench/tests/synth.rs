//! Point-cloud hologram geometry and distortion properties.

use holoqa::field::{quantize_components, ApertureSpec, QuantizedField};
use holoqa::metrics::fidelity::mse;
use holoqa::transform::{reconstruct_view, reference_distance};
use holoqa_bench::synth::{synth_distort, synth_hologram, Distortion, PointSource};
use holoqa_bench::BenchError;
use ndarray::Array2;
use proptest::prelude::*;

const N: usize = 256;
const PITCH: f64 = 8e-6;
const WAVELENGTH: f64 = 640e-9;

fn median(a: &Array2<f64>) -> f64 {
    let mut v: Vec<f64> = a.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn argmax(a: &Array2<f64>) -> ((usize, usize), f64) {
    a.indexed_iter().map(|(i, v)| (i, *v)).max_by(|x, y| x.1.total_cmp(&y.1)).unwrap()
}

#[test]
fn nominal_distance_of_the_example_optics() {
    assert!((reference_distance((N, N), PITCH, WAVELENGTH) - 0.0256).abs() < 1e-15);
}

#[test]
fn on_axis_point_focuses_to_a_dominant_peak() {
    let field = synth_hologram(&[PointSource::new(0.0, 0.0, 0.0, 1.0)], (N, N), PITCH, WAVELENGTH).unwrap();
    let view = reconstruct_view(&field, &ApertureSpec::full(N, N), 0.0).unwrap();
    let (at, peak) = argmax(&view);
    assert_eq!(at, (N / 2, N / 2));
    let db = 20.0 * (peak / median(&view).max(f64::MIN_POSITIVE)).log10();
    assert!(db >= 20.0, "{db} dB");
}

#[test]
fn two_points_land_at_predicted_bins() {
    // Bin offset of a point at the nominal plane is -x / pitch.
    let points = [
        PointSource::new(20.0 * PITCH, -12.0 * PITCH, 0.0, 1.0),
        PointSource::new(-35.0 * PITCH, 30.0 * PITCH, 0.0, 0.8),
    ];
    let field = synth_hologram(&points, (N, N), PITCH, WAVELENGTH).unwrap();
    let view = reconstruct_view(&field, &ApertureSpec::full(N, N), 0.0).unwrap();
    let c = (N / 2) as i64;
    for p in &points {
        let r = (c - (p.y / PITCH).round() as i64) as usize;
        let col = (c - (p.x / PITCH).round() as i64) as usize;
        let local = view[[r, col]];
        let db = 20.0 * (local / median(&view)).log10();
        assert!(db >= 20.0, "point {p:?}: {db} dB");
        // The bin is a local maximum of its 5x5 neighbourhood.
        for dr in -2i64..=2 {
            for dc in -2i64..=2 {
                let v = view[[(r as i64 + dr) as usize, (col as i64 + dc) as usize]];
                assert!(v <= local);
            }
        }
    }
}

#[test]
fn defocused_point_refocuses_at_its_depth() {
    let dz = 2e-3;
    let field = synth_hologram(&[PointSource::new(0.0, 0.0, dz, 1.0)], (N, N), PITCH, WAVELENGTH).unwrap();
    let ap = ApertureSpec::full(N, N);
    let sharp = argmax(&reconstruct_view(&field, &ap, dz).unwrap()).1;
    let blurred = argmax(&reconstruct_view(&field, &ap, 0.0).unwrap()).1;
    assert!(sharp > 2.0 * blurred, "{sharp} vs {blurred}");
}

#[test]
fn empty_scene_is_rejected() {
    assert!(matches!(synth_hologram(&[], (N, N), PITCH, WAVELENGTH), Err(BenchError::ZeroScene)));
}

fn scene_field(seed: u64) -> QuantizedField {
    let points: Vec<PointSource> = (0..8)
        .map(|i| {
            let t = (seed.wrapping_mul(31) + i) as f64;
            PointSource {
                x: (t * 0.37).sin() * 10.0 * PITCH,
                y: (t * 0.91).cos() * 10.0 * PITCH,
                z: 0.0,
                amplitude: 0.5 + 0.5 * (t * 0.13).sin().abs(),
                phase: t,
            }
        })
        .collect();
    quantize_components(&synth_hologram(&points, (32, 32), PITCH, WAVELENGTH).unwrap()).unwrap()
}

fn code_mse(a: &QuantizedField, b: &QuantizedField) -> f64 {
    mse(&a.real_codes(), &b.real_codes()) + mse(&a.imag_codes(), &b.imag_codes())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn requantization_is_nested(seed in 0u64..1000, hi in 2u8..=8, drop in 1u8..=6) {
        let q = scene_field(seed);
        let lo = hi.saturating_sub(drop).max(1);
        prop_assume!(lo < hi);
        let fine = synth_distort(&q, Distortion::Requantize(hi), 0).unwrap();
        let coarse = synth_distort(&q, Distortion::Requantize(lo), 0).unwrap();
        // Coarsening an already quantized field lands on the same levels.
        prop_assert_eq!(&synth_distort(&fine, Distortion::Requantize(lo), 0).unwrap(), &coarse);
        prop_assert_eq!(&synth_distort(&coarse, Distortion::Requantize(lo), 0).unwrap(), &coarse);
        prop_assert!(code_mse(&q, &coarse) >= code_mse(&q, &fine));
    }

    #[test]
    fn distortions_are_deterministic(seed in 0u64..1000, sigma in 0.0f64..20.0, radius in 0.0f64..3.0, rng_seed in any::<u64>()) {
        let q = scene_field(seed);
        for kind in [Distortion::AdditiveNoise(sigma), Distortion::Blur(radius), Distortion::Requantize(5)] {
            let a = synth_distort(&q, kind, rng_seed).unwrap();
            prop_assert_eq!(&a, &synth_distort(&q, kind, rng_seed).unwrap());
            prop_assert_eq!(a.real_affine, q.real_affine);
            prop_assert_eq!(a.dim(), q.dim());
        }
    }
}

#[test]
fn identity_distortions() {
    let q = scene_field(3);
    assert_eq!(synth_distort(&q, Distortion::Requantize(8), 1).unwrap(), q);
    assert_eq!(synth_distort(&q, Distortion::AdditiveNoise(0.0), 1).unwrap(), q);
    assert!(code_mse(&q, &synth_distort(&q, Distortion::Requantize(5), 0).unwrap())
        > code_mse(&q, &synth_distort(&q, Distortion::Requantize(7), 0).unwrap()));
}
