//! Wavefield transforms: band-limited upsampling, Fourier/Fresnel conversion,
//! numerical reconstruction of amplitude views and their 8-bit rendering.
//!
//! Physical sample coordinates are `x = (index - len / 2) * pitch` on every
//! axis (see [`crate::fft`] for the DFT convention).

use std::f64::consts::PI;
use std::fs;
use std::io::Cursor;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fft::{centered_coord, fft2c, resample2};
use crate::field::{extract_aperture, ApertureSpec, FieldError, Form, Optics, WaveField};

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("upsampling factor must be an integer >= 2, got {0}")]
    InvalidFactor(usize),
    #[error("expected a {expected:?} hologram, got {got:?}")]
    FormMismatch { expected: Form, got: Form },
    #[error("conversion plan does not match field: {0}")]
    PlanMismatch(String),
    #[error("reference amplitude is degenerate: {0}")]
    DegenerateAmplitude(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("image format error: {0}")]
    Image(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub type Result<T> = std::result::Result<T, TransformError>;

/// Demodulation distance that puts the largest hologram frequency at the
/// Nyquist limit after upsampling by `m`: `z = m / (m - 1) * N * p^2 / lambda`,
/// with `N` and `p` the post-upsampling size and pitch.
pub fn compute_focus_distance(n: usize, pitch: f64, wavelength: f64, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(TransformError::InvalidFactor(m));
    }
    if n == 0 || !(pitch > 0.0) || !(wavelength > 0.0) {
        return Err(TransformError::InvalidParameter(format!(
            "focus distance needs positive N, pitch and wavelength (got {n}, {pitch}, {wavelength})"
        )));
    }
    let m = m as f64;
    Ok(m / (m - 1.0) * n as f64 * pitch * pitch / wavelength)
}

/// Band-limited interpolation by `m` per axis; pitch becomes `p / m`.
pub fn upsample_field(field: &WaveField, m: usize) -> Result<WaveField> {
    if m < 2 {
        return Err(TransformError::InvalidFactor(m));
    }
    let (rows, cols) = field.dim();
    let data = resample2(field.data(), rows * m, cols * m);
    let optics = Optics {
        pixel_pitch: field.pixel_pitch() / m as f64,
        ..field.optics()
    };
    Ok(WaveField::with_data(data, optics, field.focus_offset))
}

/// Inverse of [`upsample_field`]: projects onto the `1/m` band and resamples.
pub fn downsample_field(field: &WaveField, m: usize) -> Result<WaveField> {
    if m < 2 {
        return Err(TransformError::InvalidFactor(m));
    }
    let (rows, cols) = field.dim();
    if rows % m != 0 || cols % m != 0 {
        return Err(TransformError::InvalidParameter(format!(
            "{rows}x{cols} field is not divisible by factor {m}"
        )));
    }
    let data = resample2(field.data(), rows / m, cols / m);
    let optics = Optics {
        pixel_pitch: field.pixel_pitch() * m as f64,
        ..field.optics()
    };
    Ok(WaveField::with_data(data, optics, field.focus_offset))
}

/// Everything needed to undo a Fourier-to-Fresnel conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConversionPlan {
    pub factor: usize,
    /// Demodulation distance in meters.
    pub distance: f64,
    pub source_dims: (usize, usize),
    pub target_dims: (usize, usize),
    pub target_pitch: f64,
    pub wavelength: f64,
}

impl ConversionPlan {
    pub fn new(source_dims: (usize, usize), source_pitch: f64, wavelength: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(TransformError::InvalidFactor(m));
        }
        let target_dims = (source_dims.0 * m, source_dims.1 * m);
        let target_pitch = source_pitch / m as f64;
        let n = target_dims.0.max(target_dims.1);
        let distance = compute_focus_distance(n, target_pitch, wavelength, m)?;
        Ok(Self {
            factor: m,
            distance,
            source_dims,
            target_dims,
            target_pitch,
            wavelength,
        })
    }

    /// `K(z)` on the target grid.
    pub fn kernel(&self) -> Array2<Complex64> {
        quadratic_phase(self.target_dims, (0, 0), self.target_dims, self.target_pitch, PI / (self.wavelength * self.distance))
    }
}

/// `exp(i * curvature * (x^2 + y^2))` over a `dims` window whose top-left
/// sample sits at `offset` within a `full` grid; coordinates are centered on
/// the full grid.
fn quadratic_phase(dims: (usize, usize), offset: (usize, usize), full: (usize, usize), pitch: f64, curvature: f64) -> Array2<Complex64> {
    let ys: Vec<f64> = (0..dims.0).map(|r| centered_coord(r + offset.0, full.0, pitch)).collect();
    let xs: Vec<f64> = (0..dims.1).map(|c| centered_coord(c + offset.1, full.1, pitch)).collect();
    Array2::from_shape_fn(dims, |(r, c)| Complex64::from_polar(1.0, curvature * (xs[c] * xs[c] + ys[r] * ys[r])))
}

/// `H_fres = K(z) * US(H_four)`.
pub fn fourier_to_fresnel(field: &WaveField, m: usize) -> Result<(WaveField, ConversionPlan)> {
    if field.form() != Form::Fourier {
        return Err(TransformError::FormMismatch {
            expected: Form::Fourier,
            got: field.form(),
        });
    }
    let plan = ConversionPlan::new(field.dim(), field.pixel_pitch(), field.wavelength(), m)?;
    let up = upsample_field(field, m)?;
    let data = up.data() * &plan.kernel();
    let optics = Optics {
        form: Form::Fresnel,
        ..up.optics()
    };
    Ok((WaveField::with_data(data, optics, field.focus_offset), plan))
}

/// Multiplies by `K(z)*` and decimates back to the Fourier form.
pub fn fresnel_to_fourier(field: &WaveField, plan: &ConversionPlan) -> Result<WaveField> {
    if field.form() != Form::Fresnel {
        return Err(TransformError::FormMismatch {
            expected: Form::Fresnel,
            got: field.form(),
        });
    }
    if field.dim() != plan.target_dims {
        return Err(TransformError::PlanMismatch(format!(
            "field is {:?}, plan expects {:?}",
            field.dim(),
            plan.target_dims
        )));
    }
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
    if !rel(field.pixel_pitch(), plan.target_pitch) || !rel(field.wavelength(), plan.wavelength) {
        return Err(TransformError::PlanMismatch(format!(
            "optics (pitch {}, wavelength {}) differ from plan (pitch {}, wavelength {})",
            field.pixel_pitch(),
            field.wavelength(),
            plan.target_pitch,
            plan.wavelength
        )));
    }
    let demod = field.data() * &plan.kernel().mapv(|k| k.conj());
    let optics = Optics {
        form: Form::Fourier,
        ..field.optics()
    };
    let tmp = WaveField::with_data(demod, optics, field.focus_offset);
    downsample_field(&tmp, plan.factor)
}

/// Nominal reconstruction distance of a Fourier hologram, `N * p^2 / lambda`
/// with `N` the larger dimension: the distance at which the reconstructed
/// object-plane pitch equals the hologram pitch.
pub fn reference_distance(dims: (usize, usize), pitch: f64, wavelength: f64) -> f64 {
    dims.0.max(dims.1) as f64 * pitch * pitch / wavelength
}

/// Curvature `pi / (lambda * d_eff)` of the refocus kernel for a focal shift
/// `delta`, with `1 / d_eff = 1 / (z_ref + delta) - 1 / z_ref`.
pub fn refocus_curvature(z_ref: f64, delta: f64, wavelength: f64) -> Result<f64> {
    if delta == 0.0 {
        return Ok(0.0);
    }
    let z = z_ref + delta;
    if !(z > 0.0) {
        return Err(TransformError::InvalidParameter(format!(
            "focal offset {delta} m puts the focus behind the hologram (nominal distance {z_ref} m)"
        )));
    }
    Ok(-PI / wavelength * (1.0 / z - 1.0 / z_ref))
}

/// Amplitude of the centered DFT of an aperture of a Fourier hologram,
/// refocused by `focal_offset` meters relative to the nominal plane.
///
/// The transform is unnormalized, so `sum A^2 = h * w * sum |field_ap|^2`.
/// Refocus coordinates are measured from the center of the full hologram.
pub fn reconstruct_view(field: &WaveField, ap: &ApertureSpec, focal_offset: f64) -> Result<Array2<f64>> {
    if field.form() != Form::Fourier {
        return Err(TransformError::FormMismatch {
            expected: Form::Fourier,
            got: field.form(),
        });
    }
    let crop = extract_aperture(field, ap)?;
    let z_ref = reference_distance(field.dim(), field.pixel_pitch(), field.wavelength());
    let curvature = refocus_curvature(z_ref, focal_offset, field.wavelength())?;
    let mut data = crop.into_data();
    if curvature != 0.0 {
        let q = quadratic_phase(
            (ap.height, ap.width),
            (ap.row_offset, ap.col_offset),
            field.dim(),
            field.pixel_pitch(),
            curvature,
        );
        data = data * q;
    }
    Ok(fft2c(&data).mapv(|v| v.norm()))
}

/// Linear-interpolated percentile (0..=100) of a set of samples.
pub fn percentile(values: &[f64], pct: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty set");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let pos = (pct / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Shared clip-then-quantize mapping of a reference/distorted amplitude pair.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedViews {
    pub reference: Array2<u8>,
    pub distorted: Array2<u8>,
    pub clip_bound: f64,
}

/// Clips both amplitudes at the reference's `clip_percentile` and maps
/// `[0, bound]` to codes `round(255 * a / bound)`.
pub fn clip_and_quantize_view(reference: &Array2<f64>, distorted: &Array2<f64>, clip_percentile: f64) -> Result<QuantizedViews> {
    if reference.dim() != distorted.dim() {
        return Err(TransformError::InvalidParameter(format!(
            "amplitude grids differ in shape: {:?} vs {:?}",
            reference.dim(),
            distorted.dim()
        )));
    }
    if !(0.0..=100.0).contains(&clip_percentile) {
        return Err(TransformError::InvalidParameter(format!("clip percentile {clip_percentile} outside [0, 100]")));
    }
    if reference.iter().chain(distorted.iter()).any(|v| !v.is_finite() || *v < 0.0) {
        return Err(TransformError::InvalidParameter("amplitudes must be finite and non-negative".into()));
    }
    let samples: Vec<f64> = reference.iter().copied().collect();
    let clip_bound = percentile(&samples, clip_percentile);
    if !(clip_bound > 0.0) {
        return Err(TransformError::DegenerateAmplitude(format!(
            "{clip_percentile}th percentile of the reference is {clip_bound}"
        )));
    }
    let map = |a: &f64| (255.0 * a.min(clip_bound) / clip_bound).round() as u8;
    Ok(QuantizedViews {
        reference: reference.map(map),
        distorted: distorted.map(map),
        clip_bound,
    })
}

/// An 8-bit rendered view with its rendering metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewImage {
    pub pixels: Array2<u8>,
    pub clip_bound: f64,
    pub aperture: ApertureSpec,
    /// Focal offset relative to the nominal plane, meters.
    pub focal_distance: f64,
    pub source_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ViewMeta {
    rows: usize,
    cols: usize,
    clip_bound: f64,
    aperture: ApertureSpec,
    focal_distance: f64,
    source_id: String,
}

impl ViewImage {
    /// Writes `<prefix>.pgm` (binary P5) and `<prefix>.meta.json`.
    pub fn save(&self, prefix: impl AsRef<Path>) -> Result<()> {
        let prefix = prefix.as_ref();
        write_pgm(&self.pixels, with_suffix(prefix, ".pgm"))?;
        let meta = ViewMeta {
            rows: self.pixels.nrows(),
            cols: self.pixels.ncols(),
            clip_bound: self.clip_bound,
            aperture: self.aperture,
            focal_distance: self.focal_distance,
            source_id: self.source_id.clone(),
        };
        let path = with_suffix(prefix, ".meta.json");
        let text = serde_json::to_string_pretty(&meta).expect("view metadata serializes");
        fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))
    }

    pub fn load(prefix: impl AsRef<Path>) -> Result<Self> {
        let prefix = prefix.as_ref();
        let pixels = read_pgm(with_suffix(prefix, ".pgm"))?;
        let path = with_suffix(prefix, ".meta.json");
        let text = fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
        let meta: ViewMeta = serde_json::from_str(&text)
            .map_err(|e| FieldError::CorruptInput(format!("{}: {e}", path.display())))?;
        if meta.rows != pixels.nrows() || meta.cols != pixels.ncols() {
            return Err(FieldError::CorruptInput(format!("{}: size disagrees with image", path.display())).into());
        }
        Ok(Self {
            pixels,
            clip_bound: meta.clip_bound,
            aperture: meta.aperture,
            focal_distance: meta.focal_distance,
            source_id: meta.source_id,
        })
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> std::path::PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    s.into()
}

fn io_error(path: &Path, source: std::io::Error) -> TransformError {
    FieldError::Io {
        path: path.display().to_string(),
        source,
    }
    .into()
}

/// Writes an 8-bit grayscale grid as binary PGM (P5).
pub fn write_pgm(pixels: &Array2<u8>, path: impl AsRef<Path>) -> Result<()> {
    use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
    use image::{ExtendedColorType, ImageEncoder};
    let path = path.as_ref();
    let (rows, cols) = pixels.dim();
    let buf: Vec<u8> = pixels.iter().copied().collect();
    let mut out = Vec::with_capacity(buf.len() + 32);
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&buf, cols as u32, rows as u32, ExtendedColorType::L8)
        .map_err(|e| TransformError::Image(e.to_string()))?;
    fs::write(path, out).map_err(|e| io_error(path, e))
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Array2<u8>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    let img = image::ImageReader::with_format(Cursor::new(bytes), image::ImageFormat::Pnm)
        .decode()
        .map_err(|e| TransformError::Image(format!("{}: {e}", path.display())))?
        .to_luma8();
    let (w, h) = img.dimensions();
    Ok(Array2::from_shape_vec((h as usize, w as usize), img.into_raw()).expect("luma buffer is h*w"))
}
