//! The four evaluation tracks: hologram-domain (QA1, QA2) and rendered-view
//! (QA3, QA4) scoring followed by the statistical evaluation per display.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use holoqa::denoise::{wiener_denoise, WienerParams};
use holoqa::field::{dequantize_components, quantize_components, quantize_with, ApertureSpec, QuantizedField, WaveField};
use holoqa::metrics::{score_hologram, score_real, MetricError, MetricId, MetricParams, MetricSpec};
use holoqa::stats::significance::ALPHA;
use holoqa::stats::{
    evaluate_metric, rank_aggregate, significance_matrix, CriteriaRow, Display, MosRecord, RankSums, ResidualSet,
    SignificanceMatrix, StatsError, TTest,
};
use holoqa::transform::{clip_and_quantize_view, fourier_to_fresnel, reconstruct_view, write_pgm};
use log::warn;
use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, BenchError, Result};
use crate::manifest::{DatasetManifest, StimulusEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Track {
    Qa1,
    Qa2,
    Qa3,
    Qa4,
}

impl Track {
    pub const ALL: [Track; 4] = [Track::Qa1, Track::Qa2, Track::Qa3, Track::Qa4];

    pub fn number(self) -> u8 {
        match self {
            Track::Qa1 => 1,
            Track::Qa2 => 2,
            Track::Qa3 => 3,
            Track::Qa4 => 4,
        }
    }

    /// Whether the track scores rendered amplitude views rather than holograms.
    pub fn renders(self) -> bool {
        matches!(self, Track::Qa3 | Track::Qa4)
    }

    /// Every metric the track can evaluate: the 18 hologram-domain variants
    /// for QA1/QA2, the 13 real metrics for the rendered tracks.
    pub fn default_metrics(self) -> Vec<MetricSpec> {
        if self.renders() {
            MetricId::ALL.into_iter().map(MetricSpec::real).collect()
        } else {
            MetricSpec::all()
        }
    }
}

impl fmt::Display for Track {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "qa{}", self.number())
    }
}

impl FromStr for Track {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        Track::ALL
            .into_iter()
            .find(|t| t.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| BenchError::Config(format!("unknown track {s:?}; expected qa1, qa2, qa3 or qa4")))
    }
}

/// Parses a comma-separated metric list, or `all` for the track default.
pub fn parse_metrics(list: &str, track: Track) -> std::result::Result<Vec<MetricSpec>, MetricError> {
    if list.trim() == "all" {
        return Ok(track.default_metrics());
    }
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackConfig {
    pub track: Track,
    pub metrics: Vec<MetricSpec>,
    pub upsample_m: usize,
    pub clip_percentile: f64,
    pub wiener: WienerParams,
    pub emit_maps: bool,
    /// Directory for quality maps; reports are written by `emit_report`.
    pub out: Option<PathBuf>,
    pub ttest: TTest,
    pub params: MetricParams,
}

impl TrackConfig {
    pub fn new(track: Track) -> Self {
        Self {
            track,
            metrics: track.default_metrics(),
            upsample_m: 2,
            clip_percentile: 99.9,
            wiener: WienerParams::default(),
            emit_maps: false,
            out: None,
            ttest: TTest::Paired,
            params: MetricParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BenchError::Config(m));
        if self.metrics.is_empty() {
            return bad("the metric list is empty".into());
        }
        if self.track.renders() {
            if let Some(s) = self.metrics.iter().find(|s| s.complex) {
                return bad(format!("{s} needs a complex field; track {} scores rendered views", self.track));
            }
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(s) = self.metrics.iter().find(|s| !seen.insert(**s)) {
            return bad(format!("metric {s} is listed twice"));
        }
        if self.upsample_m < 2 {
            return bad(format!("upsampling factor must be >= 2, got {}", self.upsample_m));
        }
        if !(self.clip_percentile > 0.0 && self.clip_percentile <= 100.0) {
            return bad(format!("clip percentile {} outside (0, 100]", self.clip_percentile));
        }
        self.wiener.validate()?;
        self.params.validate()?;
        Ok(())
    }

    pub fn metric_names(&self) -> Vec<String> {
        self.metrics.iter().map(ToString::to_string).collect()
    }

    /// JSON echo of the run configuration.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "track": self.track,
            "metrics": self.metric_names(),
            "upsample_m": self.upsample_m,
            "clip_percentile": self.clip_percentile,
            "wiener": self.wiener,
            "emit_maps": self.emit_maps,
            "ttest": self.ttest,
            "alpha": ALPHA,
            "dynamic_range": self.params.dynamic_range,
        })
    }
}

/// Scores of one rendered view or hologram aperture of one distorted stimulus.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleScore {
    pub stimulus_id: String,
    pub reference_id: String,
    pub codec: String,
    pub rate: String,
    pub view: String,
    /// `None` for the hologram-domain tracks, which ignore focus.
    pub focal_index: Option<usize>,
    pub scores: Vec<f64>,
}

/// Scores of one correlation unit, in configuration metric order.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitScore {
    pub unit: String,
    pub stimulus_id: String,
    /// The perspective for QA1/QA2; `None` when views are averaged.
    pub view: Option<String>,
    pub scores: Vec<f64>,
}

/// Evaluation against one display's MOS.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplayTable {
    pub display: Display,
    /// Averaged MOS per unit; `stimulus_id` holds the unit name.
    pub mos: Vec<MosRecord>,
    pub rows: Vec<CriteriaRow>,
    pub significance: SignificanceMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub config: TrackConfig,
    pub samples: Vec<SampleScore>,
    pub units: Vec<UnitScore>,
    pub tables: Vec<DisplayTable>,
    pub rank_sums: RankSums,
    /// Units left out of a display's table, with the reason.
    pub exclusions: Vec<String>,
    /// Scores or criteria that could not be computed.
    pub failures: Vec<String>,
}

impl EvalReport {
    pub fn table(&self, display: Display) -> Option<&DisplayTable> {
        self.tables.iter().find(|t| t.display == display)
    }
}

fn unit_name(stimulus: &str, view: Option<&str>) -> String {
    match view {
        Some(v) => format!("{stimulus}@{v}"),
        None => stimulus.to_string(),
    }
}

/// Maps an amplitude pair to the shared 8-bit rendering and, for QA4,
/// applies the Wiener filter with parameters resolved on the reference.
/// With `wiener = None` this is exactly the QA3 rendering path.
pub fn prepare_views(
    reference: &Array2<f64>,
    distorted: &Array2<f64>,
    clip_percentile: f64,
    wiener: Option<&WienerParams>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let views = clip_and_quantize_view(reference, distorted, clip_percentile)?;
    let r = views.reference.mapv(f64::from);
    let d = views.distorted.mapv(f64::from);
    match wiener {
        None => Ok((r, d)),
        Some(params) => {
            let shared = params.resolved_on(&r)?;
            let to_codes = |a: Array2<f64>| a.mapv(|v| v.round().clamp(0.0, 255.0));
            Ok((to_codes(wiener_denoise(&r, &shared)?), to_codes(wiener_denoise(&d, &shared)?)))
        }
    }
}

/// The reference side of a stimulus, prepared once for all its distortions.
enum Prepared {
    /// Quantized hologram (Fourier for QA1, Fresnel for QA2) and apertures.
    Hologram { reference: QuantizedField, apertures: Vec<ApertureSpec> },
    /// Dequantized Fourier hologram, apertures and reference amplitudes per
    /// (view, focal index).
    Rendered {
        apertures: Vec<ApertureSpec>,
        amplitudes: Vec<Vec<Array2<f64>>>,
    },
}

struct Scorer<'a> {
    manifest: &'a DatasetManifest,
    config: &'a TrackConfig,
}

impl Scorer<'_> {
    fn apertures(&self, stimulus: &StimulusEntry, dims: (usize, usize)) -> Result<Vec<ApertureSpec>> {
        stimulus.views.iter().map(|v| v.aperture.resolve(dims.0, dims.1)).collect()
    }

    /// Prepares the reference and returns it with the hologram size.
    fn prepare(&self, stimulus: &StimulusEntry) -> Result<(Prepared, (usize, usize))> {
        let q = self.manifest.load_hologram(stimulus, &stimulus.reference)?;
        let dims = q.dim();
        let apertures = self.apertures(stimulus, dims)?;
        let prepared = match self.config.track {
            Track::Qa1 => Prepared::Hologram { reference: q, apertures },
            Track::Qa2 => {
                let m = self.config.upsample_m;
                let (fresnel, _) = fourier_to_fresnel(&dequantize_components(&q), m)?;
                Prepared::Hologram {
                    reference: quantize_components(&fresnel)?,
                    apertures: apertures.iter().map(|a| a.scaled(m)).collect(),
                }
            }
            Track::Qa3 | Track::Qa4 => {
                let field = dequantize_components(&q);
                let amplitudes = stimulus
                    .views
                    .iter()
                    .zip(&apertures)
                    .map(|(v, ap)| v.focal_distances.iter().map(|&z| Ok(reconstruct_view(&field, ap, z)?)).collect())
                    .collect::<Result<_>>()?;
                Prepared::Rendered { apertures, amplitudes }
            }
        };
        Ok((prepared, dims))
    }

    fn distorted_hologram(&self, reference: &QuantizedField, distorted: QuantizedField) -> Result<QuantizedField> {
        match self.config.track {
            Track::Qa2 => {
                let (fresnel, _) = fourier_to_fresnel(&dequantize_components(&distorted), self.config.upsample_m)?;
                Ok(quantize_with(&fresnel, reference.real_affine, reference.imag_affine)?)
            }
            _ => Ok(distorted),
        }
    }

    /// Scores every configured metric; failures become `NaN` and a note.
    fn score_all(&self, mut score: impl FnMut(MetricSpec) -> std::result::Result<f64, MetricError>, what: &str, failures: &mut Vec<String>) -> Vec<f64> {
        self.config
            .metrics
            .iter()
            .map(|&spec| {
                score(spec).unwrap_or_else(|e| {
                    failures.push(format!("{what}: {spec}: {e}"));
                    f64::NAN
                })
            })
            .collect()
    }

    fn save_maps(&self, what: &str, maps: &[(MetricSpec, Array2<f64>)]) -> Result<()> {
        let Some(dir) = &self.config.out else {
            return Ok(());
        };
        let dir = dir.join("maps");
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        for (spec, map) in maps {
            let pixels = map.mapv(|v| if v.is_nan() { 0 } else { (v.clamp(0.0, 1.0) * 255.0).round() as u8 });
            write_pgm(&pixels, dir.join(format!("{}_{what}_{spec}.pgm", self.config.track)))?;
        }
        Ok(())
    }

    fn score_stimulus(&self, stimulus: &StimulusEntry) -> Result<(Vec<SampleScore>, Vec<String>)> {
        let (prepared, dims) = self.prepare(stimulus)?;
        let params = &self.config.params;
        let mut samples = Vec::new();
        let mut failures = Vec::new();
        let scored: Vec<(Vec<SampleScore>, Vec<String>)> = stimulus
            .distorted
            .par_iter()
            .map(|entry| {
                let mut out = Vec::new();
                let mut notes = Vec::new();
                let sample = |view: &str, focal_index, scores| SampleScore {
                    stimulus_id: entry.id.clone(),
                    reference_id: stimulus.id.clone(),
                    codec: entry.codec.clone(),
                    rate: entry.rate.clone(),
                    view: view.to_string(),
                    focal_index,
                    scores,
                };
                let loaded = self.manifest.load_hologram(stimulus, &entry.path)?;
                if loaded.dim() != dims {
                    return Err(BenchError::Manifest(format!("{}: size differs from its reference", entry.id)));
                }
                match &prepared {
                    Prepared::Hologram { reference, apertures } => {
                        let distorted = self.distorted_hologram(reference, loaded)?;
                        for (view, ap) in stimulus.views.iter().zip(apertures) {
                            let r = reference.crop(ap)?;
                            let d = distorted.crop(ap)?;
                            let what = unit_name(&entry.id, Some(&view.label));
                            let scores = self.score_all(|spec| Ok(score_hologram(spec, &r, &d, params)?.value), &what, &mut notes);
                            out.push(sample(&view.label, None, scores));
                        }
                    }
                    Prepared::Rendered { apertures, amplitudes } => {
                        let field: WaveField = dequantize_components(&loaded);
                        let wiener = (self.config.track == Track::Qa4).then_some(&self.config.wiener);
                        for ((view, ap), refs) in stimulus.views.iter().zip(apertures).zip(amplitudes) {
                            for (k, (&z, a_ref)) in view.focal_distances.iter().zip(refs).enumerate() {
                                let a_dist = reconstruct_view(&field, ap, z)?;
                                let (r, d) = prepare_views(a_ref, &a_dist, self.config.clip_percentile, wiener)?;
                                let what = format!("{}_f{k}", unit_name(&entry.id, Some(&view.label)));
                                let mut maps = Vec::new();
                                let scores = self.score_all(
                                    |spec| {
                                        let want = self.config.emit_maps && spec.id.produces_map();
                                        let s = score_real(spec.id, &r, &d, params, want)?;
                                        if let Some(map) = s.quality_map {
                                            maps.push((spec, map));
                                        }
                                        Ok(s.value)
                                    },
                                    &what,
                                    &mut notes,
                                );
                                self.save_maps(&what, &maps)?;
                                out.push(sample(&view.label, Some(k), scores));
                            }
                        }
                    }
                }
                Ok((out, notes))
            })
            .collect::<Result<_>>()?;
        for (s, n) in scored {
            samples.extend(s);
            failures.extend(n);
        }
        Ok((samples, failures))
    }
}

/// Groups samples into correlation units: one per (stimulus, view) for the
/// hologram-domain tracks, one per stimulus with scores averaged over all
/// its views and focal distances for the rendered tracks.
fn build_units(track: Track, samples: &[SampleScore]) -> Vec<UnitScore> {
    if !track.renders() {
        return samples
            .iter()
            .map(|s| UnitScore {
                unit: unit_name(&s.stimulus_id, Some(&s.view)),
                stimulus_id: s.stimulus_id.clone(),
                view: Some(s.view.clone()),
                scores: s.scores.clone(),
            })
            .collect();
    }
    let mut units: Vec<UnitScore> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    for s in samples {
        match units.last_mut() {
            Some(u) if u.stimulus_id == s.stimulus_id => {
                u.scores.iter_mut().zip(&s.scores).for_each(|(a, b)| *a += b);
                *counts.last_mut().expect("one count per unit") += 1.0;
            }
            _ => {
                units.push(UnitScore {
                    unit: unit_name(&s.stimulus_id, None),
                    stimulus_id: s.stimulus_id.clone(),
                    view: None,
                    scores: s.scores.clone(),
                });
                counts.push(1.0);
            }
        }
    }
    for (u, n) in units.iter_mut().zip(counts) {
        u.scores.iter_mut().for_each(|v| *v /= n);
    }
    units
}

/// Averages the MOS records of one unit. The averaged record carries the
/// standard error of the mean of means as its deviation, with `n = 1`, so
/// that its confidence interval is that of the averaged score.
pub fn average_mos(unit: &str, display: Display, view: &str, records: &[&MosRecord]) -> MosRecord {
    let k = records.len() as f64;
    let mos = records.iter().map(|r| r.mos).sum::<f64>() / k;
    let var = records.iter().map(|r| r.std * r.std / f64::from(r.n)).sum::<f64>();
    MosRecord {
        stimulus_id: unit.to_string(),
        display,
        view: view.to_string(),
        focal_index: 0,
        mos,
        std: var.sqrt() / k,
        n: 1,
    }
}

/// MOS records of a unit on one display. Hologram-domain units match one
/// perspective; rendered units match every view of the stimulus.
fn unit_records<'a>(
    manifest: &DatasetManifest,
    unit: &UnitScore,
    display: Display,
    mos: &'a [MosRecord],
) -> Vec<&'a MosRecord> {
    let stimulus = manifest
        .stimuli
        .iter()
        .find(|s| s.distorted.iter().any(|d| d.id == unit.stimulus_id))
        .expect("units come from the manifest");
    mos.iter()
        .filter(|r| r.display == display && r.stimulus_id == unit.stimulus_id)
        .filter(|r| unit.view.as_ref().is_none_or(|v| &r.view == v))
        .filter(|r| {
            stimulus
                .views
                .iter()
                .any(|v| v.label == r.view && r.focal_index < v.focal_distances.len())
        })
        .collect()
}

fn evaluate_display(
    config: &TrackConfig,
    display: Display,
    units: &[&UnitScore],
    mos: Vec<MosRecord>,
    failures: &mut Vec<String>,
) -> Result<DisplayTable> {
    let names = config.metric_names();
    let unit_names: Vec<String> = units.iter().map(|u| u.unit.clone()).collect();
    let mut rows = Vec::with_capacity(names.len());
    let mut sets = Vec::with_capacity(names.len());
    for (m, (spec, name)) in config.metrics.iter().zip(&names).enumerate() {
        let scores: Vec<f64> = units.iter().map(|u| u.scores[m]).collect();
        let (row, residuals) = match evaluate_metric(name, spec.id.is_distance(), &scores, &mos) {
            Ok(e) => (e.row, e.abs_residuals),
            Err(e) => {
                failures.push(format!("{display}: {name}: {e}"));
                (CriteriaRow::undefined(name), vec![f64::NAN; units.len()])
            }
        };
        rows.push(row);
        sets.push(ResidualSet {
            metric: name.clone(),
            stimuli: unit_names.clone(),
            abs_residuals: residuals,
        });
    }
    let significance = match significance_matrix(&sets, config.ttest, ALPHA) {
        Ok(s) => s,
        Err(e @ StatsError::TooFewSamples { .. }) => {
            failures.push(format!("{display}: significance: {e}"));
            SignificanceMatrix {
                metrics: names.clone(),
                entries: vec![vec![0; names.len()]; names.len()],
            }
        }
        Err(e) => return Err(e.into()),
    };
    Ok(DisplayTable {
        display,
        mos,
        rows,
        significance,
    })
}

/// Runs one track over `manifest` against the MOS records `mos`.
pub fn run_track(manifest: &DatasetManifest, mos: &[MosRecord], config: &TrackConfig) -> Result<EvalReport> {
    config.validate()?;
    manifest.validate()?;
    for r in mos {
        r.validate()?;
    }
    let scorer = Scorer { manifest, config };
    let per_stimulus: Vec<(Vec<SampleScore>, Vec<String>)> =
        manifest.stimuli.par_iter().map(|s| scorer.score_stimulus(s)).collect::<Result<_>>()?;
    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for (s, f) in per_stimulus {
        samples.extend(s);
        failures.extend(f);
    }
    let units = build_units(config.track, &samples);

    let mut exclusions = Vec::new();
    let mut tables = Vec::new();
    for display in Display::ALL {
        if !mos.iter().any(|r| r.display == display) {
            continue;
        }
        let mut kept = Vec::new();
        let mut averaged = Vec::new();
        for u in &units {
            let records = unit_records(manifest, u, display, mos);
            if records.is_empty() {
                let note = format!("{display}: {}: no MOS record", u.unit);
                warn!("skipping {note}");
                exclusions.push(note);
                continue;
            }
            averaged.push(average_mos(&u.unit, display, u.view.as_deref().unwrap_or("all"), &records));
            kept.push(u);
        }
        if kept.is_empty() {
            continue;
        }
        tables.push(evaluate_display(config, display, &kept, averaged, &mut failures)?);
    }
    if tables.is_empty() {
        return Err(BenchError::NoOverlap(config.track.to_string()));
    }
    let labelled: Vec<(String, Vec<CriteriaRow>)> =
        tables.iter().map(|t| (t.display.to_string(), t.rows.clone())).collect();
    let rank_sums = rank_aggregate(&labelled)?;
    Ok(EvalReport {
        config: config.clone(),
        samples,
        units,
        tables,
        rank_sums,
        exclusions,
        failures,
    })
}
