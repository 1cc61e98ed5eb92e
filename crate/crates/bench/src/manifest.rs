//! Dataset manifest: which holograms to compare, under which views.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use holoqa::field::{quantize_components, ApertureLabel, ApertureSpec, Form, Optics, QuantizedField, StoredField};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingScale {
    pub min: f64,
    pub max: f64,
}

/// Placement of a view's aperture; offsets are only read for `custom`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApertureRef {
    pub position: ApertureLabel,
    pub height: usize,
    pub width: usize,
    #[serde(default)]
    pub row_offset: usize,
    #[serde(default)]
    pub col_offset: usize,
}

impl ApertureRef {
    pub fn resolve(&self, rows: usize, cols: usize) -> Result<ApertureSpec> {
        let ap = match self.position {
            ApertureLabel::Custom => {
                let ap = ApertureSpec::custom(self.row_offset, self.col_offset, self.height, self.width);
                ap.check(rows, cols)?;
                ap
            }
            label => ApertureSpec::resolve(label, rows, cols, self.height, self.width)?,
        };
        Ok(ap)
    }
}

/// One viewing perspective and the focal offsets (meters, relative to the
/// nominal plane) it is rendered at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewEntry {
    pub label: String,
    pub aperture: ApertureRef,
    pub focal_distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortedEntry {
    /// Stimulus id, the key of the MOS records.
    pub id: String,
    pub codec: String,
    pub rate: String,
    /// Field prefix, relative to the manifest directory.
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusEntry {
    pub id: String,
    pub reference: PathBuf,
    pub optics: Optics,
    pub views: Vec<ViewEntry>,
    pub distorted: Vec<DistortedEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub rating_scale: RatingScale,
    pub stimuli: Vec<StimulusEntry>,
    /// Directory field paths are resolved against.
    #[serde(skip)]
    pub root: PathBuf,
}

fn same_optics(a: &Optics, b: &Optics) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs());
    a.form == b.form && close(a.pixel_pitch, b.pixel_pitch) && close(a.wavelength, b.wavelength)
}

impl DatasetManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut manifest: DatasetManifest = serde_json::from_str(&text).map_err(|e| BenchError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        manifest.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(io_err(path))
    }

    /// Structural checks that need no file access.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BenchError::Manifest(m));
        let RatingScale { min, max } = self.rating_scale;
        if !(min.is_finite() && max.is_finite() && min < max) {
            return bad(format!("rating scale [{min}, {max}] is empty"));
        }
        if self.stimuli.is_empty() {
            return bad("no stimuli".into());
        }
        let mut ids = HashSet::new();
        for s in &self.stimuli {
            if !ids.insert(s.id.as_str()) {
                return bad(format!("duplicate id {:?}", s.id));
            }
            if s.optics.form != Form::Fourier {
                return bad(format!("stimulus {:?}: reference holograms must be in Fourier form", s.id));
            }
            if s.views.is_empty() {
                return bad(format!("stimulus {:?} has no views", s.id));
            }
            let mut labels = HashSet::new();
            for v in &s.views {
                if !labels.insert(v.label.as_str()) {
                    return bad(format!("stimulus {:?}: duplicate view {:?}", s.id, v.label));
                }
                if v.focal_distances.is_empty() || v.focal_distances.iter().any(|d| !d.is_finite()) {
                    return bad(format!("stimulus {:?}, view {:?}: focal distances must be finite and non-empty", s.id, v.label));
                }
            }
            if s.distorted.is_empty() {
                return bad(format!("stimulus {:?} has no distorted versions", s.id));
            }
            for d in &s.distorted {
                if !ids.insert(d.id.as_str()) {
                    return bad(format!("duplicate id {:?}", d.id));
                }
            }
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.root.join(path)
    }

    /// Loads a stored hologram as 8-bit planes. Float fields are quantized
    /// per component, as they would be on storage.
    pub fn load_hologram(&self, stimulus: &StimulusEntry, path: &Path) -> Result<QuantizedField> {
        let q = match StoredField::load(self.resolve(path))? {
            StoredField::Quantized(q) => q,
            StoredField::Float(f) => quantize_components(&f)?,
        };
        if !same_optics(&q.optics, &stimulus.optics) {
            return Err(BenchError::Manifest(format!(
                "{}: optics {:?} differ from stimulus {:?} ({:?})",
                path.display(),
                q.optics,
                stimulus.id,
                stimulus.optics
            )));
        }
        Ok(q)
    }
}
