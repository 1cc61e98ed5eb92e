//! Full-reference image quality metrics.
//!
//! Every metric is a pure function of a reference and a distorted grid.
//! Real-valued metrics consume 8-bit data held as `f64`; the fidelity metrics
//! and the spectral rank metrics also accept complex fields directly.

pub mod fidelity;
pub mod filter;
pub mod fsim;
pub mod gmsd;
pub mod iwssim;
pub mod nlpd;
pub mod ssim;
pub mod ssrm;
pub mod uqi;
pub mod vif;

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::QuantizedField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("reference is {reference:?} but distorted is {distorted:?}")]
    DimMismatch {
        reference: (usize, usize),
        distorted: (usize, usize),
    },
    #[error("{0}: reference carries no energy")]
    DegenerateReference(MetricId),
    #[error("{metric}: {rows}x{cols} input is smaller than the required {min}x{min}")]
    InputTooSmall {
        metric: MetricId,
        rows: usize,
        cols: usize,
        min: usize,
    },
    #[error("{0} has no complex-valued form")]
    UnsupportedMode(MetricId),
    #[error("unknown metric '{0}' (known: {known})", known = known_names())]
    UnknownMetric(String),
    #[error("invalid metric parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, MetricError>;

fn known_names() -> String {
    MetricSpec::all().iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricId {
    Mse,
    Nmse,
    Psnr,
    Ssrm,
    Ssrmt,
    Ssim,
    Iwssim,
    Msssim,
    Uqi,
    Gmsd,
    Fsim,
    Nlpd,
    Vifp,
}

impl MetricId {
    /// Registry order, also used for report columns.
    pub const ALL: [MetricId; 13] = [
        MetricId::Mse,
        MetricId::Nmse,
        MetricId::Psnr,
        MetricId::Ssrm,
        MetricId::Ssrmt,
        MetricId::Ssim,
        MetricId::Iwssim,
        MetricId::Msssim,
        MetricId::Uqi,
        MetricId::Gmsd,
        MetricId::Fsim,
        MetricId::Nlpd,
        MetricId::Vifp,
    ];

    pub const COMPLEX: [MetricId; 5] = [MetricId::Mse, MetricId::Nmse, MetricId::Psnr, MetricId::Ssrm, MetricId::Ssrmt];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::Mse => "mse",
            MetricId::Nmse => "nmse",
            MetricId::Psnr => "psnr",
            MetricId::Ssrm => "ssrm",
            MetricId::Ssrmt => "ssrmt",
            MetricId::Ssim => "ssim",
            MetricId::Iwssim => "iwssim",
            MetricId::Msssim => "msssim",
            MetricId::Uqi => "uqi",
            MetricId::Gmsd => "gmsd",
            MetricId::Fsim => "fsim",
            MetricId::Nlpd => "nlpd",
            MetricId::Vifp => "vifp",
        }
    }

    pub fn supports_complex(self) -> bool {
        Self::COMPLEX.contains(&self)
    }

    /// Distance metrics score 0 for a perfect match and grow with distortion.
    pub fn is_distance(self) -> bool {
        matches!(self, MetricId::Mse | MetricId::Nmse | MetricId::Gmsd | MetricId::Nlpd)
    }

    /// Score on identical inputs.
    pub fn perfect_value(self) -> f64 {
        match self {
            MetricId::Psnr => f64::INFINITY,
            id if id.is_distance() => 0.0,
            _ => 1.0,
        }
    }

    pub fn produces_map(self) -> bool {
        matches!(self, MetricId::Ssim | MetricId::Uqi | MetricId::Gmsd)
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricId {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| MetricError::UnknownMetric(s.to_string()))
    }
}

/// How a score was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// A real-valued metric on a single real grid (rendered views).
    Real,
    /// A real-valued metric averaged over the real and imaginary planes.
    RealAvg,
    /// A complex-capable metric on the complex field itself.
    Complex,
}

/// A metric id together with its evaluation flavor, e.g. `mse` or `mse_C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MetricSpec {
    pub id: MetricId,
    pub complex: bool,
}

impl MetricSpec {
    pub const fn real(id: MetricId) -> Self {
        Self { id, complex: false }
    }

    pub fn complex(id: MetricId) -> Result<Self> {
        if id.supports_complex() {
            Ok(Self { id, complex: true })
        } else {
            Err(MetricError::UnsupportedMode(id))
        }
    }

    /// The 13 real metrics followed by the 5 complex variants.
    pub fn all() -> Vec<MetricSpec> {
        MetricId::ALL
            .into_iter()
            .map(Self::real)
            .chain(MetricId::COMPLEX.into_iter().map(|id| Self { id, complex: true }))
            .collect()
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.complex {
            write!(f, "{}_C", self.id)
        } else {
            write!(f, "{}", self.id)
        }
    }
}

impl FromStr for MetricSpec {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_suffix("_C") {
            Some(base) => {
                let id: MetricId = base.parse().map_err(|_| MetricError::UnknownMetric(s.to_string()))?;
                Self::complex(id).map_err(|_| MetricError::UnknownMetric(s.to_string()))
            }
            None => s.parse().map(Self::real),
        }
    }
}

/// Tunable constants shared by the metric family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    pub dynamic_range: f64,
    pub ssim_exponents: (f64, f64, f64),
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub ssim_window: usize,
    pub ssim_sigma: f64,
    pub uqi_block: usize,
    pub gmsd_t: f64,
    pub fsim_t1: f64,
    pub fsim_t2: f64,
    /// Chrominance threshold; carried for completeness, unused on grayscale.
    pub fsim_t3: f64,
    pub nlpd_levels: usize,
    pub msssim_scales: usize,
    pub psnr_peak_real: f64,
    pub psnr_peak_complex: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self::with_dynamic_range(255.0)
    }
}

impl MetricParams {
    pub fn with_dynamic_range(l: f64) -> Self {
        let c2 = (0.03 * l).powi(2);
        Self {
            dynamic_range: l,
            ssim_exponents: (1.0, 1.0, 1.0),
            c1: (0.01 * l).powi(2),
            c2,
            c3: c2 / 2.0,
            ssim_window: 11,
            ssim_sigma: 1.5,
            uqi_block: 8,
            gmsd_t: 170.0,
            fsim_t1: 0.85,
            fsim_t2: 160.0,
            fsim_t3: 200.0,
            nlpd_levels: 5,
            msssim_scales: 5,
            psnr_peak_real: l,
            psnr_peak_complex: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b, g) = self.ssim_exponents;
        let reals = [
            ("dynamic_range", self.dynamic_range),
            ("ssim_exponents.0", a),
            ("ssim_exponents.1", b),
            ("ssim_exponents.2", g),
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("ssim_sigma", self.ssim_sigma),
            ("gmsd_t", self.gmsd_t),
            ("fsim_t1", self.fsim_t1),
            ("fsim_t2", self.fsim_t2),
            ("fsim_t3", self.fsim_t3),
            ("psnr_peak_real", self.psnr_peak_real),
            ("psnr_peak_complex", self.psnr_peak_complex),
        ];
        for (name, v) in reals {
            if !(v.is_finite() && v > 0.0) {
                return Err(MetricError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        let counts = [
            ("ssim_window", self.ssim_window),
            ("uqi_block", self.uqi_block),
            ("nlpd_levels", self.nlpd_levels),
            ("msssim_scales", self.msssim_scales),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(MetricError::InvalidParams(format!("{name} must be positive")));
            }
        }
        if self.msssim_scales > ssim::MSSSIM_WEIGHTS.len() {
            return Err(MetricError::InvalidParams(format!(
                "msssim_scales must not exceed {}",
                ssim::MSSSIM_WEIGHTS.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricScore {
    pub metric: MetricId,
    pub mode: Mode,
    pub value: f64,
    pub quality_map: Option<Array2<f64>>,
}

impl MetricScore {
    pub fn spec(&self) -> MetricSpec {
        MetricSpec {
            id: self.metric,
            complex: self.mode == Mode::Complex,
        }
    }
}

pub(crate) fn check_dims<T, U>(r: &Array2<T>, d: &Array2<U>) -> Result<()> {
    if r.dim() != d.dim() {
        return Err(MetricError::DimMismatch {
            reference: r.dim(),
            distorted: d.dim(),
        });
    }
    Ok(())
}

pub(crate) fn check_min_size(metric: MetricId, img: &Array2<f64>, min: usize) -> Result<()> {
    let (rows, cols) = img.dim();
    if rows < min || cols < min {
        return Err(MetricError::InputTooSmall { metric, rows, cols, min });
    }
    Ok(())
}

/// The immutable metric registry, in report order.
pub fn registry() -> &'static [MetricId] {
    &MetricId::ALL
}

/// Scores a real-valued pair; `want_map` requests the local quality map for
/// the metrics that produce one.
pub fn score_real(id: MetricId, r: &Array2<f64>, d: &Array2<f64>, params: &MetricParams, want_map: bool) -> Result<MetricScore> {
    params.validate()?;
    check_dims(r, d)?;
    let (value, map) = match id {
        MetricId::Mse => (fidelity::mse(r, d), None),
        MetricId::Nmse => (fidelity::nmse(r, d)?, None),
        MetricId::Psnr => (fidelity::psnr(r, d, params.psnr_peak_real), None),
        MetricId::Ssrm => (ssrm::ssrm(&to_complex(r), &to_complex(d))?, None),
        MetricId::Ssrmt => (ssrm::ssrmt(&to_complex(r), &to_complex(d))?, None),
        MetricId::Ssim => {
            let map = ssim::ssim_map(r, d, params)?;
            (filter::mean(&map), Some(map))
        }
        MetricId::Iwssim => (iwssim::iw_ssim(r, d, params)?, None),
        MetricId::Msssim => (ssim::ms_ssim(r, d, params)?, None),
        MetricId::Uqi => {
            let map = uqi::uqi_map(r, d, params.uqi_block)?;
            (uqi::pool(&map), Some(map))
        }
        MetricId::Gmsd => {
            let map = gmsd::gms_map(r, d, params.gmsd_t)?;
            (gmsd::pool(&map), Some(map))
        }
        MetricId::Fsim => (fsim::fsim(r, d, params)?, None),
        MetricId::Nlpd => (nlpd::nlpd(r, d, params)?, None),
        MetricId::Vifp => (vif::vifp(r, d)?, None),
    };
    Ok(MetricScore {
        metric: id,
        mode: Mode::Real,
        value,
        quality_map: if want_map { map } else { None },
    })
}

/// Scores a complex-valued pair with one of the complex-capable metrics.
pub fn score_complex(id: MetricId, r: &Array2<Complex64>, d: &Array2<Complex64>, params: &MetricParams) -> Result<MetricScore> {
    params.validate()?;
    check_dims(r, d)?;
    let value = match id {
        MetricId::Mse => fidelity::mse(r, d),
        MetricId::Nmse => fidelity::nmse(r, d)?,
        MetricId::Psnr => fidelity::psnr(r, d, params.psnr_peak_complex),
        MetricId::Ssrm => ssrm::ssrm(r, d)?,
        MetricId::Ssrmt => ssrm::ssrmt(r, d)?,
        other => return Err(MetricError::UnsupportedMode(other)),
    };
    Ok(MetricScore {
        metric: id,
        mode: Mode::Complex,
        value,
        quality_map: None,
    })
}

/// Arithmetic mean of a real metric over the real and the imaginary planes.
pub fn score_parts_avg(
    id: MetricId,
    reference: (&Array2<f64>, &Array2<f64>),
    distorted: (&Array2<f64>, &Array2<f64>),
    params: &MetricParams,
) -> Result<MetricScore> {
    let re = score_real(id, reference.0, distorted.0, params, false)?;
    let im = score_real(id, reference.1, distorted.1, params, false)?;
    Ok(MetricScore {
        metric: id,
        mode: Mode::RealAvg,
        value: 0.5 * (re.value + im.value),
        quality_map: None,
    })
}

/// [`score_parts_avg`] on the 8-bit code planes of two quantized fields.
pub fn score_components_avg(id: MetricId, reference: &QuantizedField, distorted: &QuantizedField, params: &MetricParams) -> Result<MetricScore> {
    let (rr, ri) = (reference.real_codes(), reference.imag_codes());
    let (dr, di) = (distorted.real_codes(), distorted.imag_codes());
    score_parts_avg(id, (&rr, &ri), (&dr, &di), params)
}

/// Scores a hologram-domain pair under `spec`: complex metrics on the
/// dequantized fields, real metrics through the averaging adapter.
pub fn score_hologram(spec: MetricSpec, reference: &QuantizedField, distorted: &QuantizedField, params: &MetricParams) -> Result<MetricScore> {
    if spec.complex {
        let r = crate::field::dequantize_components(reference);
        let d = crate::field::dequantize_components(distorted);
        score_complex(spec.id, r.data(), d.data(), params)
    } else {
        score_components_avg(spec.id, reference, distorted, params)
    }
}

fn to_complex(a: &Array2<f64>) -> Array2<Complex64> {
    a.mapv(|v| Complex64::new(v, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        let all = MetricSpec::all();
        assert_eq!(all.len(), 18);
        for spec in &all {
            assert_eq!(spec.to_string().parse::<MetricSpec>().unwrap(), *spec);
        }
        assert_eq!("psnr_C".parse::<MetricSpec>().unwrap(), MetricSpec { id: MetricId::Psnr, complex: true });
        assert!(matches!("ssim_C".parse::<MetricSpec>(), Err(MetricError::UnknownMetric(_))));
        let err = "foo".parse::<MetricSpec>().unwrap_err().to_string();
        assert!(err.contains("vifp") && err.contains("ssrmt_C"), "{err}");
    }

    #[test]
    fn default_constants() {
        let p = MetricParams::default();
        assert_eq!(p.c1, (0.01f64 * 255.0).powi(2));
        assert_eq!(p.c3, p.c2 / 2.0);
        assert!(p.validate().is_ok());
        let bad = MetricParams { gmsd_t: 0.0, ..MetricParams::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn complex_mode_rejects_real_only_metrics() {
        let a = Array2::<Complex64>::zeros((4, 4));
        assert_eq!(
            score_complex(MetricId::Ssim, &a, &a, &MetricParams::default()),
            Err(MetricError::UnsupportedMode(MetricId::Ssim))
        );
    }

    #[test]
    fn dim_mismatch_is_reported() {
        let a = Array2::<f64>::zeros((4, 4));
        let b = Array2::<f64>::zeros((4, 5));
        for id in MetricId::ALL {
            assert!(matches!(
                score_real(id, &a, &b, &MetricParams::default(), false),
                Err(MetricError::DimMismatch { .. })
            ));
        }
    }
}
