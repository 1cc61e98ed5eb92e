//! Subjective score records and the six evaluation criteria.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::correlation::{krcc, pcc, srocc};
use super::logistic::{fit_logistic4, LogisticFit};
use super::{Result, StatsError};

/// Normal-approximation multiplier of the 95% confidence interval.
pub const CI_MULTIPLIER: f64 = 1.96;

/// Presentation device the opinion scores were collected on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Display {
    #[serde(rename = "OPT")]
    Opt,
    #[serde(rename = "LF")]
    Lf,
    #[serde(rename = "2D")]
    TwoD,
}

impl Display {
    pub const ALL: [Display; 3] = [Display::Opt, Display::Lf, Display::TwoD];

    pub fn as_str(self) -> &'static str {
        match self {
            Display::Opt => "OPT",
            Display::Lf => "LF",
            Display::TwoD => "2D",
        }
    }

    /// Lower-case token used in report file names.
    pub fn file_token(self) -> &'static str {
        match self {
            Display::Opt => "opt",
            Display::Lf => "lf",
            Display::TwoD => "2d",
        }
    }
}

impl fmt::Display for Display {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Display {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "OPT" => Ok(Display::Opt),
            "LF" => Ok(Display::Lf),
            "2D" | "TWOD" => Ok(Display::TwoD),
            other => Err(StatsError::Parse(format!("unknown display '{other}'"))),
        }
    }
}

/// Opinion-score statistics of one stimulus on one display.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosRecord {
    pub stimulus_id: String,
    pub display: Display,
    pub view: String,
    pub focal_index: usize,
    pub mos: f64,
    pub std: f64,
    pub n: u32,
}

impl MosRecord {
    pub fn validate(&self) -> Result<()> {
        if !self.mos.is_finite() || !(self.std.is_finite() && self.std >= 0.0) || self.n == 0 {
            return Err(StatsError::Parse(format!(
                "invalid MOS record for '{}': mos {}, std {}, n {}",
                self.stimulus_id, self.mos, self.std, self.n
            )));
        }
        Ok(())
    }

    pub fn half_width(&self) -> f64 {
        CI_MULTIPLIER * self.std / f64::from(self.n).sqrt()
    }

    /// Closed 95% confidence interval of the mean.
    pub fn confidence_interval(&self) -> (f64, f64) {
        let h = self.half_width();
        (self.mos - h, self.mos + h)
    }
}

/// The six evaluation criteria of a metric on one MOS set.
///
/// Rank and no-fit correlations of distance metrics are reported as absolute
/// values; the signed values are kept alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaRow {
    pub metric: String,
    pub srocc: f64,
    pub krcc: f64,
    pub pcc_nofit: f64,
    pub pcc_fitted: f64,
    pub rmse: f64,
    pub outlier_ratio: f64,
    pub srocc_signed: f64,
    pub krcc_signed: f64,
    pub pcc_nofit_signed: f64,
    pub fit_converged: bool,
}

/// Criterion names in table order.
pub const CRITERIA: [&str; 6] = ["SROCC", "KRCC", "PCC_NoFit", "PCC_Fitted", "RMSE", "OutlierRatio"];

impl CriteriaRow {
    pub fn values(&self) -> [f64; 6] {
        [self.srocc, self.krcc, self.pcc_nofit, self.pcc_fitted, self.rmse, self.outlier_ratio]
    }

    /// A row of `NaN` criteria for a metric that could not be evaluated.
    pub fn undefined(metric: &str) -> Self {
        Self {
            metric: metric.to_string(),
            srocc: f64::NAN,
            krcc: f64::NAN,
            pcc_nofit: f64::NAN,
            pcc_fitted: f64::NAN,
            rmse: f64::NAN,
            outlier_ratio: f64::NAN,
            srocc_signed: f64::NAN,
            krcc_signed: f64::NAN,
            pcc_nofit_signed: f64::NAN,
            fit_converged: false,
        }
    }
}

/// Whether larger criterion values are better (false for RMSE and outliers).
pub fn higher_is_better(criterion: usize) -> bool {
    criterion < 4
}

pub fn rmse_fitted(fit: &LogisticFit, scores: &[f64], mos: &[f64]) -> f64 {
    let n = scores.len() as f64;
    (scores.iter().zip(mos).map(|(s, m)| (fit.predict(*s) - m).powi(2)).sum::<f64>() / n).sqrt()
}

/// Fraction of fitted predictions outside the 95% interval of their MOS.
pub fn outlier_ratio(fit: &LogisticFit, scores: &[f64], records: &[MosRecord]) -> f64 {
    let predictions = fit.predict_all(scores);
    outlier_ratio_of(&predictions, records)
}

pub fn outlier_ratio_of(predictions: &[f64], records: &[MosRecord]) -> f64 {
    let outside = predictions
        .iter()
        .zip(records)
        .filter(|(p, r)| {
            let (lo, hi) = r.confidence_interval();
            **p < lo || **p > hi
        })
        .count();
    outside as f64 / predictions.len() as f64
}

/// Replaces `+inf` scores by one step past the largest finite score, where
/// the step is the mean spacing of the distinct finite scores (1 if fewer
/// than two are distinct). Rank order is unchanged.
pub fn replace_infinite(scores: &[f64]) -> Vec<f64> {
    let mut finite: Vec<f64> = scores.iter().cloned().filter(|v| v.is_finite()).collect();
    if finite.len() == scores.len() {
        return scores.to_vec();
    }
    finite.sort_by(f64::total_cmp);
    finite.dedup();
    let (max, step) = match finite.len() {
        0 => (0.0, 1.0),
        1 => (finite[0], 1.0),
        k => (finite[k - 1], (finite[k - 1] - finite[0]) / (k - 1) as f64),
    };
    scores
        .iter()
        .map(|&v| if v == f64::INFINITY { max + step } else { v })
        .collect()
}

/// Fitted predictions and absolute residuals `|f(score) - mos|`.
pub struct Evaluation {
    pub row: CriteriaRow,
    pub fit: LogisticFit,
    pub predictions: Vec<f64>,
    pub abs_residuals: Vec<f64>,
}

/// Computes all six criteria of `scores` against `records`.
pub fn evaluate_metric(metric: &str, is_distance: bool, scores: &[f64], records: &[MosRecord]) -> Result<Evaluation> {
    if scores.len() != records.len() {
        return Err(StatsError::LengthMismatch {
            left: scores.len(),
            right: records.len(),
        });
    }
    if scores.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
        return Err(StatsError::NonFinite);
    }
    let x = replace_infinite(scores);
    let mos: Vec<f64> = records.iter().map(|r| r.mos).collect();
    let s = srocc(&x, &mos)?;
    let k = krcc(&x, &mos)?;
    let p = pcc(&x, &mos)?;
    let fit = fit_logistic4(&x, &mos)?;
    let predictions = fit.predict_all(&x);
    let pcc_fitted = pcc(&predictions, &mos).unwrap_or(0.0);
    let abs_residuals: Vec<f64> = predictions.iter().zip(&mos).map(|(a, b)| (a - b).abs()).collect();
    let rmse = rmse_fitted(&fit, &x, &mos);
    let fold = |v: f64| if is_distance { v.abs() } else { v };
    let row = CriteriaRow {
        metric: metric.to_string(),
        srocc: fold(s),
        krcc: fold(k),
        pcc_nofit: fold(p),
        pcc_fitted,
        rmse,
        outlier_ratio: outlier_ratio_of(&predictions, records),
        srocc_signed: s,
        krcc_signed: k,
        pcc_nofit_signed: p,
        fit_converged: fit.converged,
    };
    Ok(Evaluation {
        row,
        fit,
        predictions,
        abs_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: usize, mos: f64, std: f64, n: u32) -> MosRecord {
        MosRecord {
            stimulus_id: format!("s{id}"),
            display: Display::Opt,
            view: "center".into(),
            focal_index: 0,
            mos,
            std,
            n,
        }
    }

    #[test]
    fn display_parsing() {
        assert_eq!("opt".parse::<Display>().unwrap(), Display::Opt);
        assert_eq!("TwoD".parse::<Display>().unwrap(), Display::TwoD);
        assert_eq!("2D".parse::<Display>().unwrap(), Display::TwoD);
        assert!("crt".parse::<Display>().is_err());
    }

    #[test]
    fn hand_constructed_outliers() {
        // Identity predictor; CI half width 1.96 * 1 / 2 = 0.98.
        let fit = LogisticFit::from_betas(-1e6, 1e6, 0.0, 5e5);
        let records: Vec<MosRecord> = (0..10).map(|i| record(i, i as f64, 2.0 / 1.96 * 0.98, 4)).collect();
        let mut scores: Vec<f64> = (0..10).map(|i| i as f64).collect();
        scores[1] += 5.0;
        scores[4] -= 3.0;
        scores[8] += 1.5;
        scores[6] += 0.5;
        let predictions = fit.predict_all(&scores);
        for (p, s) in predictions.iter().zip(&scores) {
            assert!((p - s).abs() < 1e-3);
        }
        assert_eq!(outlier_ratio_of(&predictions, &records), 0.3);
    }

    #[test]
    fn outliers_do_not_grow_as_intervals_widen() {
        let fit = LogisticFit::from_betas(0.0, 10.0, 5.0, 2.0);
        let scores: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let mut last = 1.0;
        for std in [0.0, 0.2, 0.5, 1.0, 3.0, 10.0] {
            let recs: Vec<MosRecord> = (0..12).map(|i| record(i, i as f64 * 0.8 + 1.0, std, 5)).collect();
            let r = outlier_ratio(&fit, &scores, &recs);
            assert!(r <= last);
            last = r;
        }
    }

    #[test]
    fn infinite_scores_are_replaced_above_the_maximum() {
        assert_eq!(replace_infinite(&[10.0, f64::INFINITY, 20.0, 30.0]), vec![10.0, 40.0, 20.0, 30.0]);
        assert_eq!(replace_infinite(&[f64::INFINITY, 5.0]), vec![6.0, 5.0]);
        assert_eq!(replace_infinite(&[f64::INFINITY]), vec![1.0]);
    }

    #[test]
    fn scores_equal_to_mos() {
        let recs: Vec<MosRecord> = (0..8).map(|i| record(i, 1.0 + 0.5 * i as f64, 0.5, 10)).collect();
        let scores: Vec<f64> = recs.iter().map(|r| r.mos).collect();
        let e = evaluate_metric("m", false, &scores, &recs).unwrap();
        assert_eq!(e.row.srocc, 1.0);
        assert_eq!(e.row.krcc, 1.0);
        assert!((e.row.pcc_nofit - 1.0).abs() < 1e-12);
        assert!(e.row.rmse < 1e-6);
        assert_eq!(e.row.outlier_ratio, 0.0);
    }

    #[test]
    fn distance_metric_reports_absolute_correlations() {
        let recs: Vec<MosRecord> = (0..10).map(|i| record(i, 1.0 + 0.4 * i as f64, 0.5, 10)).collect();
        let scores: Vec<f64> = (0..10).map(|i| 100.0 / (1.0 + i as f64)).collect();
        let e = evaluate_metric("gmsd", true, &scores, &recs).unwrap();
        assert_eq!(e.row.srocc_signed, -1.0);
        assert_eq!(e.row.srocc, 1.0);
        assert!(e.row.pcc_fitted > 0.0);
        assert!(e.row.pcc_nofit_signed < 0.0 && e.row.pcc_nofit > 0.0);
    }
}
