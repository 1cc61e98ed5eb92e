//! Pointwise fidelity: MSE, NMSE and PSNR on real or complex grids.

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use super::{MetricError, MetricId, Result};

/// Element type with a squared modulus.
pub trait Sample: Copy + Send + Sync {
    fn sq_norm(self) -> f64;
    fn sq_dist(self, other: Self) -> f64;
}

impl Sample for f64 {
    fn sq_norm(self) -> f64 {
        self * self
    }

    fn sq_dist(self, other: Self) -> f64 {
        (self - other) * (self - other)
    }
}

impl Sample for Complex64 {
    fn sq_norm(self) -> f64 {
        self.norm_sqr()
    }

    fn sq_dist(self, other: Self) -> f64 {
        (self - other).norm_sqr()
    }
}

fn sum_sq_dist<T: Sample>(r: &Array2<T>, d: &Array2<T>) -> f64 {
    Zip::from(r).and(d).fold(0.0, |acc, &a, &b| acc + a.sq_dist(b))
}

/// `mean |d - r|^2`; callers check dimensions.
pub fn mse<T: Sample>(r: &Array2<T>, d: &Array2<T>) -> f64 {
    sum_sq_dist(r, d) / r.len() as f64
}

/// `sum |d - r|^2 / sum |r|^2`.
pub fn nmse<T: Sample>(r: &Array2<T>, d: &Array2<T>) -> Result<f64> {
    let energy: f64 = r.iter().map(|v| v.sq_norm()).sum();
    if energy == 0.0 {
        return Err(MetricError::DegenerateReference(MetricId::Nmse));
    }
    Ok(sum_sq_dist(r, d) / energy)
}

/// PSNR in dB for a given MSE; `+inf` when the MSE vanishes.
pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

pub fn psnr<T: Sample>(r: &Array2<T>, d: &Array2<T>, peak: f64) -> f64 {
    psnr_from_mse(mse(r, d), peak)
}
