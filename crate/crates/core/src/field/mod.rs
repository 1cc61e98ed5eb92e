//! Hologram data model: complex wavefields, 8-bit component quantization and
//! synthetic-aperture windows.

mod io;

pub use io::{
    load_field, load_quantized, read_meta, store_field, store_field_with, store_quantized, to_single_precision, Dtype,
    FieldFiles, FieldMeta, StoredField,
};

use ndarray::{s, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("aperture {height}x{width} at ({row}, {col}) does not fit a {rows}x{cols} field")]
    ApertureOutOfBounds {
        row: usize,
        col: usize,
        height: usize,
        width: usize,
        rows: usize,
        cols: usize,
    },
    #[error("corrupt input: {0}")]
    CorruptInput(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, FieldError>;

/// Which plane the object wavefront focuses in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Fourier,
    Fresnel,
}

/// Sampling and illumination metadata shared by a field and its derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optics {
    /// Square pixel pitch in meters.
    pub pixel_pitch: f64,
    /// Wavelength in meters.
    pub wavelength: f64,
    pub form: Form,
}

impl Optics {
    pub fn new(pixel_pitch: f64, wavelength: f64, form: Form) -> Result<Self> {
        let optics = Self {
            pixel_pitch,
            wavelength,
            form,
        };
        optics.validate()?;
        Ok(optics)
    }

    fn validate(&self) -> Result<()> {
        if !(self.pixel_pitch.is_finite() && self.pixel_pitch > 0.0) {
            return Err(FieldError::InvalidField(format!("pixel pitch must be positive, got {}", self.pixel_pitch)));
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(FieldError::InvalidField(format!("wavelength must be positive, got {}", self.wavelength)));
        }
        Ok(())
    }
}

/// A monochromatic complex wavefield sampled on a rectangular grid.
///
/// The sample grid is row-major; `data[[r, c]]` is row `r`, column `c`.
/// Every constructor checks that the grid is non-empty, the optics are
/// physical and all samples are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    data: Array2<Complex64>,
    optics: Optics,
    /// Focal offset in meters relative to the nominal plane.
    pub focus_offset: f64,
}

impl WaveField {
    pub fn new(data: Array2<Complex64>, optics: Optics) -> Result<Self> {
        optics.validate()?;
        let (rows, cols) = data.dim();
        if rows == 0 || cols == 0 {
            return Err(FieldError::InvalidField(format!("empty grid {rows}x{cols}")));
        }
        if let Some(((r, c), v)) = data.indexed_iter().find(|(_, v)| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(FieldError::InvalidField(format!("non-finite sample {v} at ({r}, {c})")));
        }
        Ok(Self {
            data,
            optics,
            focus_offset: 0.0,
        })
    }

    /// Builds a field from separate real and imaginary planes.
    pub fn from_parts(re: &Array2<f64>, im: &Array2<f64>, optics: Optics) -> Result<Self> {
        if re.dim() != im.dim() {
            return Err(FieldError::InvalidField(format!(
                "component planes differ in shape: {:?} vs {:?}",
                re.dim(),
                im.dim()
            )));
        }
        let data = ndarray::Zip::from(re).and(im).map_collect(|&a, &b| Complex64::new(a, b));
        Self::new(data, optics)
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn dim(&self) -> (usize, usize) {
        self.data.dim()
    }

    pub fn data(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<Complex64> {
        self.data
    }

    pub fn optics(&self) -> Optics {
        self.optics
    }

    pub fn form(&self) -> Form {
        self.optics.form
    }

    pub fn pixel_pitch(&self) -> f64 {
        self.optics.pixel_pitch
    }

    pub fn wavelength(&self) -> f64 {
        self.optics.wavelength
    }

    pub fn real_part(&self) -> Array2<f64> {
        self.data.mapv(|v| v.re)
    }

    pub fn imag_part(&self) -> Array2<f64> {
        self.data.mapv(|v| v.im)
    }

    /// Same samples, new optics. Used by transforms that change pitch or form.
    pub(crate) fn with_data(data: Array2<Complex64>, optics: Optics, focus_offset: f64) -> Self {
        Self {
            data,
            optics,
            focus_offset,
        }
    }
}

/// Affine map between 8-bit codes and physical component values:
/// `value = offset + scale * code`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub offset: f64,
    pub scale: f64,
}

impl Affine {
    /// Min/max mapping spanning codes 0..=255. A constant plane gets scale 1.
    pub fn spanning(min: f64, max: f64) -> Self {
        let scale = if max > min { (max - min) / 255.0 } else { 1.0 };
        Self { offset: min, scale }
    }

    pub fn encode(&self, v: f64) -> u8 {
        ((v - self.offset) / self.scale).round().clamp(0.0, 255.0) as u8
    }

    pub fn decode(&self, code: u8) -> f64 {
        self.offset + self.scale * f64::from(code)
    }
}

/// Paired 8-bit real/imaginary planes with their dequantization records.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedField {
    pub real_plane: Array2<u8>,
    pub imag_plane: Array2<u8>,
    pub real_affine: Affine,
    pub imag_affine: Affine,
    pub optics: Optics,
}

impl QuantizedField {
    pub fn new(
        real_plane: Array2<u8>,
        imag_plane: Array2<u8>,
        real_affine: Affine,
        imag_affine: Affine,
        optics: Optics,
    ) -> Result<Self> {
        if real_plane.dim() != imag_plane.dim() {
            return Err(FieldError::InvalidField(format!(
                "quantized planes differ in shape: {:?} vs {:?}",
                real_plane.dim(),
                imag_plane.dim()
            )));
        }
        if real_plane.is_empty() {
            return Err(FieldError::InvalidField("empty quantized planes".into()));
        }
        for a in [real_affine, imag_affine] {
            if !(a.scale.is_finite() && a.scale > 0.0 && a.offset.is_finite()) {
                return Err(FieldError::InvalidField(format!("bad affine record {a:?}")));
            }
        }
        optics.validate()?;
        Ok(Self {
            real_plane,
            imag_plane,
            real_affine,
            imag_affine,
            optics,
        })
    }

    pub fn dim(&self) -> (usize, usize) {
        self.real_plane.dim()
    }

    /// Planes as `f64` code values, the input format of the real-valued metrics.
    pub fn real_codes(&self) -> Array2<f64> {
        self.real_plane.mapv(f64::from)
    }

    pub fn imag_codes(&self) -> Array2<f64> {
        self.imag_plane.mapv(f64::from)
    }

    /// Replaces the planes while keeping the affine records, as a codec would.
    pub fn with_planes(&self, real_plane: Array2<u8>, imag_plane: Array2<u8>) -> Result<Self> {
        Self::new(real_plane, imag_plane, self.real_affine, self.imag_affine, self.optics)
    }

    pub fn crop(&self, ap: &ApertureSpec) -> Result<Self> {
        let (rows, cols) = self.dim();
        ap.check(rows, cols)?;
        let win = s![ap.row_offset..ap.row_offset + ap.height, ap.col_offset..ap.col_offset + ap.width];
        Ok(Self {
            real_plane: self.real_plane.slice(win).to_owned(),
            imag_plane: self.imag_plane.slice(win).to_owned(),
            ..self.clone()
        })
    }
}

fn component_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Quantizes each component to 8 bits with its own min/max affine map.
pub fn quantize_components(field: &WaveField) -> Result<QuantizedField> {
    if let Some(v) = field.data.iter().find(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(FieldError::InvalidField(format!("non-finite sample {v}")));
    }
    let (rmin, rmax) = component_range(field.data.iter().map(|v| v.re));
    let (imin, imax) = component_range(field.data.iter().map(|v| v.im));
    quantize_with(field, Affine::spanning(rmin, rmax), Affine::spanning(imin, imax))
}

/// Quantizes with given affine records, clamping codes to 0..=255.
///
/// Used to map a distorted field onto its reference's code grid.
pub fn quantize_with(field: &WaveField, real_affine: Affine, imag_affine: Affine) -> Result<QuantizedField> {
    if let Some(v) = field.data.iter().find(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(FieldError::InvalidField(format!("non-finite sample {v}")));
    }
    let real_plane = field.data.mapv(|v| real_affine.encode(v.re));
    let imag_plane = field.data.mapv(|v| imag_affine.encode(v.im));
    QuantizedField::new(real_plane, imag_plane, real_affine, imag_affine, field.optics)
}

pub fn dequantize_components(q: &QuantizedField) -> WaveField {
    let data = ndarray::Zip::from(&q.real_plane)
        .and(&q.imag_plane)
        .map_collect(|&r, &i| Complex64::new(q.real_affine.decode(r), q.imag_affine.decode(i)));
    WaveField::with_data(data, q.optics, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApertureLabel {
    Center,
    RightCorner,
    Custom,
}

/// Rectangular window selecting one viewing perspective of a hologram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ApertureSpec {
    pub row_offset: usize,
    pub col_offset: usize,
    pub height: usize,
    pub width: usize,
    pub label: ApertureLabel,
}

impl ApertureSpec {
    pub fn full(rows: usize, cols: usize) -> Self {
        Self::custom(0, 0, rows, cols)
    }

    pub fn custom(row_offset: usize, col_offset: usize, height: usize, width: usize) -> Self {
        Self {
            row_offset,
            col_offset,
            height,
            width,
            label: ApertureLabel::Custom,
        }
    }

    /// Window centered in a `rows`x`cols` field; odd slack puts the extra
    /// pixel after the window (offset `(rows - height) / 2`, rounded down).
    pub fn center(rows: usize, cols: usize, height: usize, width: usize) -> Result<Self> {
        let ap = Self {
            row_offset: rows.saturating_sub(height) / 2,
            col_offset: cols.saturating_sub(width) / 2,
            height,
            width,
            label: ApertureLabel::Center,
        };
        ap.check(rows, cols)?;
        Ok(ap)
    }

    /// Window flush with the bottom-right corner.
    pub fn right_corner(rows: usize, cols: usize, height: usize, width: usize) -> Result<Self> {
        let ap = Self {
            row_offset: rows.saturating_sub(height),
            col_offset: cols.saturating_sub(width),
            height,
            width,
            label: ApertureLabel::RightCorner,
        };
        ap.check(rows, cols)?;
        Ok(ap)
    }

    /// Resolves a label against a field size.
    pub fn resolve(label: ApertureLabel, rows: usize, cols: usize, height: usize, width: usize) -> Result<Self> {
        match label {
            ApertureLabel::Center => Self::center(rows, cols, height, width),
            ApertureLabel::RightCorner => Self::right_corner(rows, cols, height, width),
            ApertureLabel::Custom => {
                let ap = Self::custom(0, 0, height, width);
                ap.check(rows, cols)?;
                Ok(ap)
            }
        }
    }

    pub fn check(&self, rows: usize, cols: usize) -> Result<()> {
        let fits = self.height > 0
            && self.width > 0
            && self.row_offset + self.height <= rows
            && self.col_offset + self.width <= cols;
        if fits {
            Ok(())
        } else {
            Err(FieldError::ApertureOutOfBounds {
                row: self.row_offset,
                col: self.col_offset,
                height: self.height,
                width: self.width,
                rows,
                cols,
            })
        }
    }

    /// The window `inner` (relative to this one) expressed in source coordinates.
    pub fn compose(&self, inner: &ApertureSpec) -> ApertureSpec {
        ApertureSpec::custom(
            self.row_offset + inner.row_offset,
            self.col_offset + inner.col_offset,
            inner.height,
            inner.width,
        )
    }

    /// Same window on a grid upsampled by `m` per axis.
    pub fn scaled(&self, m: usize) -> ApertureSpec {
        ApertureSpec {
            row_offset: self.row_offset * m,
            col_offset: self.col_offset * m,
            height: self.height * m,
            width: self.width * m,
            label: self.label,
        }
    }
}

pub fn extract_aperture(field: &WaveField, ap: &ApertureSpec) -> Result<WaveField> {
    let (rows, cols) = field.dim();
    ap.check(rows, cols)?;
    let data = field
        .data
        .slice(s![ap.row_offset..ap.row_offset + ap.height, ap.col_offset..ap.col_offset + ap.width])
        .to_owned();
    Ok(WaveField::with_data(data, field.optics, field.focus_offset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn optics() -> Optics {
        Optics::new(8e-6, 640e-9, Form::Fourier).unwrap()
    }

    fn field_from(re: Vec<f64>, im: Vec<f64>, rows: usize, cols: usize) -> WaveField {
        let re = Array2::from_shape_vec((rows, cols), re).unwrap();
        let im = Array2::from_shape_vec((rows, cols), im).unwrap();
        WaveField::from_parts(&re, &im, optics()).unwrap()
    }

    #[test]
    fn rejects_non_finite_and_bad_optics() {
        let mut data = Array2::from_elem((2, 2), Complex64::new(0.0, 0.0));
        data[[1, 0]] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(WaveField::new(data, optics()), Err(FieldError::InvalidField(_))));
        assert!(Optics::new(0.0, 1e-6, Form::Fourier).is_err());
        assert!(Optics::new(1e-6, -1.0, Form::Fresnel).is_err());
        let empty = Array2::<Complex64>::zeros((0, 3));
        assert!(WaveField::new(empty, optics()).is_err());
    }

    #[test]
    fn constant_plane_uses_degenerate_scale() {
        let f = field_from(vec![3.0; 4], vec![-1.0, 0.0, 0.5, 1.0], 2, 2);
        let q = quantize_components(&f).unwrap();
        assert!(q.real_plane.iter().all(|&c| c == 0));
        assert_eq!(q.real_affine, Affine { offset: 3.0, scale: 1.0 });
    }

    #[test]
    fn midpoint_code() {
        let f = field_from(vec![-1.0, 0.0, 1.0, 0.5], vec![0.0; 4], 2, 2);
        let q = quantize_components(&f).unwrap();
        assert_eq!(q.real_plane[[0, 1]], 128);
        assert_eq!(q.real_plane[[0, 0]], 0);
        assert_eq!(q.real_plane[[1, 0]], 255);
    }

    #[test]
    fn end_codes_decode_to_range() {
        let f = field_from(vec![-2.0, 0.3, 5.0, 1.0], vec![0.0, 1.0, 2.0, 3.0], 2, 2);
        let q = quantize_components(&f).unwrap();
        assert_eq!(q.real_affine.decode(0), -2.0);
        assert!((q.real_affine.decode(255) - 5.0).abs() < 1e-12);
        let back = dequantize_components(&q);
        assert_eq!(back.optics(), f.optics());
    }

    #[test]
    fn small_crop_and_full_aperture() {
        let re: Vec<f64> = (0..16).map(f64::from).collect();
        let f = field_from(re, vec![0.0; 16], 4, 4);
        let crop = extract_aperture(&f, &ApertureSpec::custom(0, 0, 2, 2)).unwrap();
        let got: Vec<f64> = crop.data().iter().map(|v| v.re).collect();
        assert_eq!(got, vec![0.0, 1.0, 4.0, 5.0]);
        let full = extract_aperture(&f, &ApertureSpec::full(4, 4)).unwrap();
        assert_eq!(full, f);
        let err = extract_aperture(&f, &ApertureSpec::custom(3, 0, 2, 2));
        assert!(matches!(err, Err(FieldError::ApertureOutOfBounds { .. })));
    }

    #[test]
    fn labelled_windows_resolve_to_placement_formula() {
        for (n, h) in [(16usize, 8usize), (17, 8), (16, 7), (9, 9)] {
            let c = ApertureSpec::center(n, n, h, h).unwrap();
            assert_eq!(c.row_offset, (n - h) / 2);
            assert_eq!(c.col_offset, (n - h) / 2);
            // Centered: slack before and after differ by at most one pixel.
            let after = n - h - c.row_offset;
            assert!(after == c.row_offset || after == c.row_offset + 1);
            let rc = ApertureSpec::right_corner(n, n, h, h).unwrap();
            assert_eq!(rc.row_offset + rc.height, n);
            assert_eq!(rc.col_offset + rc.width, n);
            assert_eq!(rc.label, ApertureLabel::RightCorner);
        }
        assert!(ApertureSpec::center(4, 4, 5, 2).is_err());
    }

    fn arb_field() -> impl Strategy<Value = WaveField> {
        (1usize..12, 1usize..12).prop_flat_map(|(r, c)| {
            (
                proptest::collection::vec(-1e3f64..1e3, r * c),
                proptest::collection::vec(-1e3f64..1e3, r * c),
            )
                .prop_map(move |(re, im)| field_from(re, im, r, c))
        })
    }

    proptest! {
        #[test]
        fn round_trip_within_half_step(f in arb_field()) {
            let q = quantize_components(&f).unwrap();
            let back = dequantize_components(&q);
            for (a, b) in f.data().iter().zip(back.data().iter()) {
                prop_assert!((a.re - b.re).abs() <= q.real_affine.scale / 2.0 * (1.0 + 1e-9));
                prop_assert!((a.im - b.im).abs() <= q.imag_affine.scale / 2.0 * (1.0 + 1e-9));
            }
        }

        #[test]
        fn requantization_is_idempotent_on_codes(f in arb_field()) {
            let q = quantize_components(&f).unwrap();
            let q2 = quantize_components(&dequantize_components(&q)).unwrap();
            prop_assert_eq!(&q.real_plane, &q2.real_plane);
            prop_assert_eq!(&q.imag_plane, &q2.imag_plane);
        }

        #[test]
        fn nested_apertures_compose(f in arb_field(), a in (0usize..4, 0usize..4), b in (0usize..4, 0usize..4)) {
            let (rows, cols) = f.dim();
            let outer = ApertureSpec::custom(a.0.min(rows - 1), a.1.min(cols - 1), rows - a.0.min(rows - 1), cols - a.1.min(cols - 1));
            let inner_h = outer.height - b.0.min(outer.height - 1);
            let inner_w = outer.width - b.1.min(outer.width - 1);
            let inner = ApertureSpec::custom(b.0.min(outer.height - 1), b.1.min(outer.width - 1), inner_h, inner_w);
            let twice = extract_aperture(&extract_aperture(&f, &outer).unwrap(), &inner).unwrap();
            let once = extract_aperture(&f, &outer.compose(&inner)).unwrap();
            prop_assert_eq!(twice, once);
        }
    }
}
