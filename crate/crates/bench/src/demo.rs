//! Self-contained demo dataset: synthetic point-cloud holograms, codec
//! stand-in distortions and synthetic MOS, written as a regular manifest.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use holoqa::field::{quantize_components, store_quantized, ApertureLabel, Form, Optics};
use holoqa::stats::{write_mos, Display, MosRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{io_err, Result};
use crate::manifest::{ApertureRef, DatasetManifest, DistortedEntry, RatingScale, StimulusEntry, ViewEntry};
use crate::synth::{synth_distort, synth_hologram, Distortion, PointSource};

#[derive(Debug, Clone, PartialEq)]
pub struct DemoSpec {
    pub holograms: usize,
    /// Side of the square holograms.
    pub size: usize,
    pub pitch: f64,
    pub wavelength: f64,
    pub points: usize,
    /// Distortion levels, mildest first.
    pub levels: Vec<Distortion>,
    /// Square aperture side as a fraction of the hologram side.
    pub aperture_fraction: f64,
    /// Views are the center and bottom-right apertures, in that order.
    pub views: usize,
    pub focal_distances: Vec<f64>,
    pub seed: u64,
}

impl Default for DemoSpec {
    fn default() -> Self {
        Self {
            holograms: 4,
            size: 256,
            pitch: 8e-6,
            wavelength: 640e-9,
            points: 60,
            levels: vec![Distortion::Requantize(6), Distortion::Requantize(5), Distortion::Requantize(4)],
            aperture_fraction: 0.75,
            views: 2,
            focal_distances: vec![0.0, 1e-3],
            seed: 7,
        }
    }
}

/// Random scene: points spread over the central part of the object plane,
/// within the depth range spanned by the focal distances.
pub fn demo_scene(spec: &DemoSpec, rng: &mut ChaCha8Rng) -> Vec<PointSource> {
    let half = 0.3 * spec.size as f64 * spec.pitch;
    let (zmin, zmax) = spec
        .focal_distances
        .iter()
        .fold((0.0f64, 0.0f64), |(lo, hi), &z| (lo.min(z), hi.max(z)));
    (0..spec.points)
        .map(|_| PointSource {
            x: rng.random_range(-half..half),
            y: rng.random_range(-half..half),
            z: if zmax > zmin { rng.random_range(zmin..zmax) } else { zmin },
            amplitude: rng.random_range(0.3..1.0),
            phase: rng.random_range(0.0..std::f64::consts::TAU),
        })
        .collect()
}

fn level_tag(d: &Distortion) -> (String, String) {
    match d {
        Distortion::Requantize(b) => ("requant".into(), b.to_string()),
        Distortion::AdditiveNoise(s) => ("noise".into(), s.to_string()),
        Distortion::Blur(r) => ("blur".into(), r.to_string()),
    }
}

/// Synthetic opinion scores: quality falls linearly with the level index,
/// with a display-dependent offset and per-record jitter.
fn synthetic_mos(manifest: &DatasetManifest, levels: usize, rng: &mut ChaCha8Rng) -> Vec<MosRecord> {
    let jitter = Normal::new(0.0, 0.2).expect("valid deviation");
    let step = 3.2 / levels.max(1) as f64;
    let mut out = Vec::new();
    for (d_idx, display) in Display::ALL.into_iter().enumerate() {
        for s in &manifest.stimuli {
            for (level, d) in s.distorted.iter().enumerate() {
                for v in &s.views {
                    for k in 0..v.focal_distances.len() {
                        let mos = 4.7 - step * level as f64 - 0.1 * d_idx as f64 + jitter.sample(rng);
                        out.push(MosRecord {
                            stimulus_id: d.id.clone(),
                            display,
                            view: v.label.clone(),
                            focal_index: k,
                            mos: mos.clamp(1.0, 5.0),
                            std: rng.random_range(0.5..0.9),
                            n: 15,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Generates the dataset under `dir`; returns the manifest and MOS paths.
pub fn generate_demo(dir: &Path, spec: &DemoSpec) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let optics = Optics::new(spec.pitch, spec.wavelength, Form::Fourier)?;
    let side = ((spec.size as f64 * spec.aperture_fraction).round() as usize).clamp(1, spec.size);
    let positions = [("center", ApertureLabel::Center), ("right_corner", ApertureLabel::RightCorner)];
    let views: Vec<ViewEntry> = positions
        .iter()
        .take(spec.views.clamp(1, positions.len()))
        .map(|(label, position)| ViewEntry {
            label: label.to_string(),
            aperture: ApertureRef {
                position: *position,
                height: side,
                width: side,
                row_offset: 0,
                col_offset: 0,
            },
            focal_distances: spec.focal_distances.clone(),
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut stimuli = Vec::new();
    for h in 0..spec.holograms {
        let id = format!("h{}", h + 1);
        let sub = dir.join(&id);
        fs::create_dir_all(&sub).map_err(io_err(&sub))?;
        let points = demo_scene(spec, &mut rng);
        let field = synth_hologram(&points, (spec.size, spec.size), spec.pitch, spec.wavelength)?;
        let reference = quantize_components(&field)?;
        store_quantized(&reference, sub.join("ref"))?;
        let mut distorted = Vec::new();
        for (l, level) in spec.levels.iter().enumerate() {
            let (codec, rate) = level_tag(level);
            let name = format!("{codec}{rate}");
            let q = synth_distort(&reference, *level, rng.random())?;
            store_quantized(&q, sub.join(&name))?;
            distorted.push(DistortedEntry {
                id: format!("{id}_l{}", l + 1),
                codec,
                rate,
                path: PathBuf::from(&id).join(&name),
            });
        }
        stimuli.push(StimulusEntry {
            id: id.clone(),
            reference: PathBuf::from(&id).join("ref"),
            optics,
            views: views.clone(),
            distorted,
        });
    }
    let manifest = DatasetManifest {
        rating_scale: RatingScale { min: 1.0, max: 5.0 },
        stimuli,
        root: dir.to_path_buf(),
    };
    manifest.validate()?;
    let manifest_path = dir.join("manifest.json");
    manifest.save(&manifest_path)?;

    let mos = synthetic_mos(&manifest, spec.levels.len(), &mut rng);
    let mos_path = dir.join("mos.csv");
    let file = File::create(&mos_path).map_err(io_err(&mos_path))?;
    write_mos(BufWriter::new(file), &mos)?;
    Ok((manifest_path, mos_path))
}
