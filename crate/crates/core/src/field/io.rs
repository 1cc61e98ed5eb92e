//! Raw plane files plus a JSON sidecar.
//!
//! A field stored under prefix `dir/id` occupies `dir/id.re.<ext>`,
//! `dir/id.im.<ext>` and `dir/id.meta.json`. Planes are row-major and
//! little-endian; `<ext>` is `f32` for float fields and `u8` for quantized
//! fields. Float samples are written in single precision.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Affine, FieldError, Form, Optics, QuantizedField, Result, WaveField};
use crate::transform::ConversionPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F32,
    U8,
}

impl Dtype {
    pub fn extension(self) -> &'static str {
        match self {
            Dtype::F32 => "f32",
            Dtype::U8 => "u8",
        }
    }

    fn sample_bytes(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::U8 => 1,
        }
    }
}

/// Sidecar metadata document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub rows: usize,
    pub cols: usize,
    pub pixel_pitch: f64,
    pub wavelength: f64,
    pub form: Form,
    /// Kept as a string so that unknown values surface as `UnsupportedFormat`.
    pub dtype: String,
    #[serde(default)]
    pub focus_offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_affine: Option<Affine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag_affine: Option<Affine>,
    /// Present on fields produced by a Fourier-to-Fresnel conversion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conversion: Option<ConversionPlan>,
}

impl FieldMeta {
    pub fn dtype(&self) -> Result<Dtype> {
        match self.dtype.as_str() {
            "f32" => Ok(Dtype::F32),
            "u8" => Ok(Dtype::U8),
            other => Err(FieldError::UnsupportedFormat(format!("dtype {other:?}"))),
        }
    }

    pub fn optics(&self) -> Result<Optics> {
        Optics::new(self.pixel_pitch, self.wavelength, self.form)
    }
}

/// Resolved file paths of one stored field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldFiles {
    pub re: PathBuf,
    pub im: PathBuf,
    pub meta: PathBuf,
}

impl FieldFiles {
    pub fn new(prefix: impl AsRef<Path>, dtype: Dtype) -> Self {
        let p = prefix.as_ref().as_os_str().to_owned();
        let with = |suffix: &str| {
            let mut s = p.clone();
            s.push(suffix);
            PathBuf::from(s)
        };
        Self {
            re: with(&format!(".re.{}", dtype.extension())),
            im: with(&format!(".im.{}", dtype.extension())),
            meta: with(".meta.json"),
        }
    }
}

/// Either kind of stored field, as found on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum StoredField {
    Float(WaveField),
    Quantized(QuantizedField),
}

impl StoredField {
    pub fn load(prefix: impl AsRef<Path>) -> Result<Self> {
        let meta = read_meta(&prefix)?;
        match meta.dtype()? {
            Dtype::F32 => load_field(prefix).map(StoredField::Float),
            Dtype::U8 => load_quantized(prefix).map(StoredField::Quantized),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FieldError + '_ {
    move |source| FieldError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn meta_path(prefix: &Path) -> PathBuf {
    FieldFiles::new(prefix, Dtype::U8).meta
}

pub fn read_meta(prefix: impl AsRef<Path>) -> Result<FieldMeta> {
    let path = meta_path(prefix.as_ref());
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| FieldError::CorruptInput(format!("{}: {e}", path.display())))
}

fn write_meta(path: &Path, meta: &FieldMeta) -> Result<()> {
    let text = serde_json::to_string_pretty(meta).expect("metadata serializes");
    fs::write(path, text + "\n").map_err(io_err(path))
}

fn read_plane(path: &Path, meta: &FieldMeta, dtype: Dtype) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let expected = meta.rows * meta.cols * dtype.sample_bytes();
    if bytes.len() != expected {
        return Err(FieldError::CorruptInput(format!(
            "{}: {} bytes, metadata {}x{} {} implies {expected}",
            path.display(),
            bytes.len(),
            meta.rows,
            meta.cols,
            dtype.extension()
        )));
    }
    Ok(bytes)
}

fn decode_f32(bytes: &[u8], rows: usize, cols: usize) -> Array2<f64> {
    let values: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    Array2::from_shape_vec((rows, cols), values).expect("length checked")
}

fn encode_f32(values: impl Iterator<Item = f64>) -> Vec<u8> {
    values.flat_map(|v| (v as f32).to_le_bytes()).collect()
}

fn load_meta_checked(prefix: &Path, want: Dtype) -> Result<FieldMeta> {
    let meta = read_meta(prefix)?;
    let dtype = meta.dtype()?;
    if dtype != want {
        return Err(FieldError::UnsupportedFormat(format!(
            "{} holds {} planes, expected {}",
            prefix.display(),
            dtype.extension(),
            want.extension()
        )));
    }
    if meta.rows == 0 || meta.cols == 0 {
        return Err(FieldError::CorruptInput(format!("{}: empty grid in metadata", prefix.display())));
    }
    Ok(meta)
}

pub fn load_field(prefix: impl AsRef<Path>) -> Result<WaveField> {
    let prefix = prefix.as_ref();
    let meta = load_meta_checked(prefix, Dtype::F32)?;
    let files = FieldFiles::new(prefix, Dtype::F32);
    let re = decode_f32(&read_plane(&files.re, &meta, Dtype::F32)?, meta.rows, meta.cols);
    let im = decode_f32(&read_plane(&files.im, &meta, Dtype::F32)?, meta.rows, meta.cols);
    let mut field = WaveField::from_parts(&re, &im, meta.optics()?)?;
    field.focus_offset = meta.focus_offset;
    Ok(field)
}

/// Writes a float field; samples are rounded to single precision.
pub fn store_field(field: &WaveField, prefix: impl AsRef<Path>) -> Result<FieldFiles> {
    store_field_with(field, prefix, None)
}

/// Writes a converted field together with the plan needed to invert it.
pub fn store_field_with(field: &WaveField, prefix: impl AsRef<Path>, conversion: Option<ConversionPlan>) -> Result<FieldFiles> {
    let files = FieldFiles::new(prefix, Dtype::F32);
    let meta = FieldMeta {
        rows: field.rows(),
        cols: field.cols(),
        pixel_pitch: field.pixel_pitch(),
        wavelength: field.wavelength(),
        form: field.form(),
        dtype: "f32".into(),
        focus_offset: field.focus_offset,
        real_affine: None,
        imag_affine: None,
        conversion,
    };
    let re = encode_f32(field.data().iter().map(|v| v.re));
    let im = encode_f32(field.data().iter().map(|v| v.im));
    fs::write(&files.re, re).map_err(io_err(&files.re))?;
    fs::write(&files.im, im).map_err(io_err(&files.im))?;
    write_meta(&files.meta, &meta)?;
    Ok(files)
}

pub fn load_quantized(prefix: impl AsRef<Path>) -> Result<QuantizedField> {
    let prefix = prefix.as_ref();
    let meta = load_meta_checked(prefix, Dtype::U8)?;
    let files = FieldFiles::new(prefix, Dtype::U8);
    let (Some(real_affine), Some(imag_affine)) = (meta.real_affine, meta.imag_affine) else {
        return Err(FieldError::CorruptInput(format!("{}: u8 field without affine records", files.meta.display())));
    };
    let shape = (meta.rows, meta.cols);
    let re = Array2::from_shape_vec(shape, read_plane(&files.re, &meta, Dtype::U8)?).expect("length checked");
    let im = Array2::from_shape_vec(shape, read_plane(&files.im, &meta, Dtype::U8)?).expect("length checked");
    QuantizedField::new(re, im, real_affine, imag_affine, meta.optics()?)
}

pub fn store_quantized(q: &QuantizedField, prefix: impl AsRef<Path>) -> Result<FieldFiles> {
    let files = FieldFiles::new(prefix, Dtype::U8);
    let (rows, cols) = q.dim();
    let meta = FieldMeta {
        rows,
        cols,
        pixel_pitch: q.optics.pixel_pitch,
        wavelength: q.optics.wavelength,
        form: q.optics.form,
        dtype: "u8".into(),
        focus_offset: 0.0,
        real_affine: Some(q.real_affine),
        imag_affine: Some(q.imag_affine),
        conversion: None,
    };
    let re: Vec<u8> = q.real_plane.iter().copied().collect();
    let im: Vec<u8> = q.imag_plane.iter().copied().collect();
    fs::write(&files.re, re).map_err(io_err(&files.re))?;
    fs::write(&files.im, im).map_err(io_err(&files.im))?;
    write_meta(&files.meta, &meta)?;
    Ok(files)
}

/// Single-precision view of a field, as `store_field` would persist it.
pub fn to_single_precision(field: &WaveField) -> WaveField {
    let data = field
        .data()
        .mapv(|v| Complex64::new(f64::from(v.re as f32), f64::from(v.im as f32)));
    WaveField::with_data(data, field.optics(), field.focus_offset)
}
