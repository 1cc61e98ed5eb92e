//! Synthetic point-cloud holograms and codec stand-in distortions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use holoqa::fft::centered_coord;
use holoqa::field::{Form, Optics, QuantizedField, WaveField};
use holoqa::metrics::filter::{filter_same_symmetric, gaussian_taps};
use holoqa::transform::reference_distance;
use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// A luminous point of the scene.
///
/// `x`, `y` are lateral object coordinates in meters, measured from the
/// optical axis; `z` is the depth offset in meters from the nominal focal
/// plane of the Fourier hologram (positive is farther away).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSource {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub amplitude: f64,
    /// Initial phase in radians.
    #[serde(default)]
    pub phase: f64,
}

impl PointSource {
    pub fn new(x: f64, y: f64, z: f64, amplitude: f64) -> Self {
        Self {
            x,
            y,
            z,
            amplitude,
            phase: 0.0,
        }
    }
}

/// Fourier hologram of a point cloud.
///
/// Every point contributes a spherical wave, in the paraxial approximation,
/// from its position at distance `z_ref + z` and the Fourier-plane reference
/// curvature `exp(-i pi r^2 / (lambda z_ref))` is removed, so a point at the
/// nominal plane becomes a plane wave whose centered DFT peaks at bin
/// `center - x / pitch`. The sum is scaled to unit peak modulus.
pub fn synth_hologram(points: &[PointSource], dims: (usize, usize), pitch: f64, wavelength: f64) -> Result<WaveField> {
    let optics = Optics::new(pitch, wavelength, Form::Fourier)?;
    if dims.0 == 0 || dims.1 == 0 {
        return Err(BenchError::Config(format!("empty hologram grid {}x{}", dims.0, dims.1)));
    }
    let lit: Vec<&PointSource> = points.iter().filter(|p| p.amplitude != 0.0).collect();
    if lit.is_empty() {
        return Err(BenchError::ZeroScene);
    }
    let z_ref = reference_distance(dims, pitch, wavelength);
    for p in &lit {
        let finite = [p.x, p.y, p.z, p.amplitude, p.phase].iter().all(|v| v.is_finite());
        if !finite || !(z_ref + p.z > 0.0) {
            return Err(BenchError::Config(format!("point {p:?} is not in front of the hologram")));
        }
    }
    let xs: Vec<f64> = (0..dims.1).map(|c| centered_coord(c, dims.1, pitch)).collect();
    let ys: Vec<f64> = (0..dims.0).map(|r| centered_coord(r, dims.0, pitch)).collect();
    let k = PI / wavelength;

    let samples: Vec<Complex64> = (0..dims.0)
        .into_par_iter()
        .flat_map_iter(|r| {
            let y = ys[r];
            let lit = &lit;
            xs.iter().map(move |&x| {
                let reference = -k * (x * x + y * y) / z_ref;
                lit.iter()
                    .map(|p| {
                        let (dx, dy) = (x - p.x, y - p.y);
                        let phase = p.phase + k * (dx * dx + dy * dy) / (z_ref + p.z) + reference;
                        Complex64::from_polar(p.amplitude, phase)
                    })
                    .sum::<Complex64>()
            })
        })
        .collect();
    let mut data = Array2::from_shape_vec(dims, samples).expect("one sample per grid point");
    let peak = data.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(BenchError::ZeroScene);
    }
    data.mapv_inplace(|v| v / peak);
    Ok(WaveField::new(data, optics)?)
}

/// Distortion applied to both 8-bit planes of a quantized hologram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distortion {
    /// Keep the `bits` most significant bits, reconstructing at bin centers.
    Requantize(u8),
    /// Zero-mean Gaussian noise with the given standard deviation in code units.
    AdditiveNoise(f64),
    /// Gaussian blur with the given standard deviation in pixels.
    Blur(f64),
}

impl fmt::Display for Distortion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distortion::Requantize(b) => write!(f, "requant:{b}"),
            Distortion::AdditiveNoise(s) => write!(f, "noise:{s}"),
            Distortion::Blur(r) => write!(f, "blur:{r}"),
        }
    }
}

impl FromStr for Distortion {
    type Err = BenchError;

    /// Parses `requant:<bits>`, `noise:<sigma>` or `blur:<radius>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || BenchError::Config(format!("distortion {s:?} is not requant:<bits>, noise:<sigma> or blur:<radius>"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        let d = match kind {
            "requant" => Distortion::Requantize(value.parse().map_err(|_| bad())?),
            "noise" => Distortion::AdditiveNoise(value.parse().map_err(|_| bad())?),
            "blur" => Distortion::Blur(value.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        d.validate()?;
        Ok(d)
    }
}

impl Distortion {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Distortion::Requantize(b) => (1..=8).contains(&b),
            Distortion::AdditiveNoise(s) => s.is_finite() && s >= 0.0,
            Distortion::Blur(r) => r.is_finite() && r >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(BenchError::Config(format!("invalid distortion parameter in {self}")))
        }
    }
}

fn to_codes(plane: &Array2<f64>) -> Array2<u8> {
    plane.mapv(|v| v.round().clamp(0.0, 255.0) as u8)
}

fn requantize(plane: &Array2<u8>, bits: u8) -> Array2<u8> {
    let shift = 8 - u32::from(bits);
    if shift == 0 {
        return plane.clone();
    }
    let half = 1u16 << (shift - 1);
    plane.mapv(|c| ((((u16::from(c) >> shift) << shift) + half).min(255)) as u8)
}

fn add_noise(plane: &Array2<u8>, normal: &Normal<f64>, rng: &mut ChaCha8Rng) -> Array2<u8> {
    plane.mapv(|c| (f64::from(c) + normal.sample(rng)).round().clamp(0.0, 255.0) as u8)
}

fn blur(plane: &Array2<u8>, radius: f64) -> Array2<u8> {
    let half = (3.0 * radius).ceil() as usize;
    let taps = gaussian_taps(2 * half + 1, radius);
    to_codes(&filter_same_symmetric(&plane.mapv(f64::from), &taps))
}

/// Applies `kind` to both planes with identical parameters; the affine
/// records are kept, as a codec operating on the code planes would.
/// Noise draws the real plane first, then the imaginary plane, from a
/// generator seeded with `seed`.
pub fn synth_distort(q: &QuantizedField, kind: Distortion, seed: u64) -> Result<QuantizedField> {
    kind.validate()?;
    let (re, im) = match kind {
        Distortion::Requantize(bits) => (requantize(&q.real_plane, bits), requantize(&q.imag_plane, bits)),
        Distortion::AdditiveNoise(sigma) if sigma == 0.0 => (q.real_plane.clone(), q.imag_plane.clone()),
        Distortion::AdditiveNoise(sigma) => {
            let normal = Normal::new(0.0, sigma).expect("sigma validated");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let re = add_noise(&q.real_plane, &normal, &mut rng);
            let im = add_noise(&q.imag_plane, &normal, &mut rng);
            (re, im)
        }
        Distortion::Blur(radius) if radius == 0.0 => (q.real_plane.clone(), q.imag_plane.clone()),
        Distortion::Blur(radius) => (blur(&q.real_plane, radius), blur(&q.imag_plane, radius)),
    };
    Ok(q.with_planes(re, im)?)
}
