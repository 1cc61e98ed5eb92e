//! Spectral rank similarity.
//!
//! Both inputs are transformed with a 2D DFT and their coefficient magnitudes
//! are ranked in descending order (ties share the mid-rank). Each coefficient
//! contributes the agreement `1 - |rank_ref - rank_dist| / (M - 1)` of its two
//! ranks, weighted by its share of the reference magnitude sum, so the
//! significant (large) reference coefficients dominate.
//!
//! * `ssrmt` ranks all coefficients together, DC included.
//! * `ssrm` ranks only the AC coefficients and scores DC on its own by the
//!   relative difference `1 - |F_r0 - F_d0| / (|F_r0| + |F_d0|)`; the two parts
//!   are combined with the reference DC magnitude share as weight.
//!
//! Both scores lie in `[0, 1]` and equal 1 for identical inputs.

use ndarray::Array2;
use num_complex::Complex64;

use super::{MetricError, MetricId, Result};
use crate::fft::fft2;
use crate::stats::rank::mid_ranks;

/// Decomposition of an `ssrm` score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsrmParts {
    pub dc: f64,
    pub ac: f64,
    /// Share of the reference magnitude sum held by DC.
    pub dc_weight: f64,
}

impl SsrmParts {
    pub fn score(&self) -> f64 {
        (self.dc_weight * self.dc + (1.0 - self.dc_weight) * self.ac).clamp(0.0, 1.0)
    }
}

fn descending_ranks(magnitudes: &[f64]) -> Vec<f64> {
    let negated: Vec<f64> = magnitudes.iter().map(|m| -m).collect();
    mid_ranks(&negated)
}

/// Significance-weighted rank agreement of two magnitude sets.
fn rank_agreement(reference: &[f64], distorted: &[f64]) -> f64 {
    let total: f64 = reference.iter().sum();
    if total == 0.0 {
        return if distorted.iter().all(|&m| m == 0.0) { 1.0 } else { 0.0 };
    }
    let m = reference.len();
    if m == 1 {
        return 1.0;
    }
    let rr = descending_ranks(reference);
    let rd = descending_ranks(distorted);
    let span = (m - 1) as f64;
    let score: f64 = reference
        .iter()
        .zip(rr.iter().zip(rd.iter()))
        .map(|(w, (a, b))| w * (1.0 - (a - b).abs() / span))
        .sum();
    (score / total).clamp(0.0, 1.0)
}

fn spectra(r: &Array2<Complex64>, d: &Array2<Complex64>) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    super::check_dims(r, d)?;
    let fr = fft2(r);
    let fd = fft2(d);
    if fr.iter().all(|v| v.norm_sqr() == 0.0) {
        return Err(MetricError::DegenerateReference(MetricId::Ssrm));
    }
    Ok((fr.iter().copied().collect(), fd.iter().copied().collect()))
}

pub fn ssrm_parts(r: &Array2<Complex64>, d: &Array2<Complex64>) -> Result<SsrmParts> {
    let (fr, fd) = spectra(r, d)?;
    let (r0, d0) = (fr[0], fd[0]);
    let dc_den = r0.norm() + d0.norm();
    let dc = if dc_den == 0.0 { 1.0 } else { 1.0 - (r0 - d0).norm() / dc_den };
    let mr: Vec<f64> = fr[1..].iter().map(|v| v.norm()).collect();
    let md: Vec<f64> = fd[1..].iter().map(|v| v.norm()).collect();
    let ac = if mr.is_empty() { 1.0 } else { rank_agreement(&mr, &md) };
    let total = r0.norm() + mr.iter().sum::<f64>();
    Ok(SsrmParts {
        dc: dc.clamp(0.0, 1.0),
        ac,
        dc_weight: r0.norm() / total,
    })
}

pub fn ssrm(r: &Array2<Complex64>, d: &Array2<Complex64>) -> Result<f64> {
    Ok(ssrm_parts(r, d)?.score())
}

pub fn ssrmt(r: &Array2<Complex64>, d: &Array2<Complex64>) -> Result<f64> {
    let (fr, fd) = spectra(r, d).map_err(|e| match e {
        MetricError::DegenerateReference(_) => MetricError::DegenerateReference(MetricId::Ssrmt),
        other => other,
    })?;
    let mr: Vec<f64> = fr.iter().map(|v| v.norm()).collect();
    let md: Vec<f64> = fd.iter().map(|v| v.norm()).collect();
    Ok(rank_agreement(&mr, &md))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Array2<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((rows, cols), |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn identical_is_one() {
        let a = random(8, 9, 1);
        assert_eq!(ssrm(&a, &a).unwrap(), 1.0);
        assert_eq!(ssrmt(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn positive_scaling_keeps_ac_ranks() {
        let a = random(10, 10, 2);
        let b = a.mapv(|v| v * 3.0);
        let parts = ssrm_parts(&a, &b).unwrap();
        assert_eq!(parts.ac, 1.0);
        assert_eq!(ssrmt(&a, &b).unwrap(), 1.0);
        assert!(parts.dc < 1.0);
    }

    #[test]
    fn variants_diverge_on_dc_discrepancy() {
        // Zero-mean reference: DC is the weakest coefficient. A large offset
        // turns it into the strongest one.
        let mut a = random(8, 8, 3);
        let mean = a.sum() / 64.0;
        a.mapv_inplace(|v| v - mean + 1e-3);
        let b = a.mapv(|v| v + 5.0);
        let (s, t) = (ssrm(&a, &b).unwrap(), ssrmt(&a, &b).unwrap());
        assert!((s - t).abs() > 1e-3, "ssrm {s} ssrmt {t}");
        assert!((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t));
    }

    #[test]
    fn zero_reference_is_degenerate() {
        let z = Array2::<Complex64>::zeros((4, 4));
        let a = random(4, 4, 4);
        assert_eq!(ssrm(&z, &a), Err(MetricError::DegenerateReference(MetricId::Ssrm)));
        assert_eq!(ssrmt(&z, &a), Err(MetricError::DegenerateReference(MetricId::Ssrmt)));
    }

    #[test]
    fn agreement_decreases_with_noise() {
        let a = random(16, 16, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let noise = Array2::from_shape_fn((16, 16), |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let mut last = 1.0;
        for amp in [0.01, 0.1, 0.5, 2.0] {
            let v = ssrmt(&a, &(&a + &noise.mapv(|n| n * amp))).unwrap();
            assert!(v < last, "{amp}: {v} >= {last}");
            last = v;
        }
    }
}
