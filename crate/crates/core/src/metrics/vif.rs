//! Pixel-domain visual information fidelity over four scales.

use ndarray::{Array2, Zip};

use super::filter::{filter_valid, subsample2, Window};
use super::{check_dims, MetricError, MetricId, Result};

/// Variance of the additive neural noise in the HVS channel model.
const SIGMA_NSQ: f64 = 2.0;
const EPS: f64 = 1e-10;
const SCALES: u32 = 4;

fn window(scale: u32) -> Window {
    let n = (1usize << (SCALES + 1 - scale)) + 1;
    Window::gaussian(n, n as f64 / 5.0)
}

/// Smallest side accepted: every scale must leave a non-empty valid region.
pub fn min_size() -> usize {
    // Work backwards from one valid sample at the coarsest scale.
    let mut need = window(SCALES).size();
    for scale in (2..=SCALES).rev() {
        need = 2 * need - 1 + window(scale).size() - 1;
    }
    need.max(window(1).size())
}

/// Accumulated (distorted information, reference information).
fn information(r: &Array2<f64>, d: &Array2<f64>) -> (f64, f64) {
    let (mut x, mut y) = (r.clone(), d.clone());
    let (mut num, mut den) = (0.0, 0.0);
    for scale in 1..=SCALES {
        let w = window(scale);
        if scale > 1 {
            x = subsample2(&filter_valid(&x, &w));
            y = subsample2(&filter_valid(&y, &w));
        }
        let mu1 = filter_valid(&x, &w);
        let mu2 = filter_valid(&y, &w);
        let s11 = filter_valid(&(&x * &x), &w);
        let s22 = filter_valid(&(&y * &y), &w);
        let s12 = filter_valid(&(&x * &y), &w);
        Zip::from(&mu1)
            .and(&mu2)
            .and(&s11)
            .and(&s22)
            .and(&s12)
            .for_each(|&m1, &m2, &a, &b, &c| {
                let mut sigma1 = (a - m1 * m1).max(0.0);
                let sigma2 = (b - m2 * m2).max(0.0);
                let sigma12 = c - m1 * m2;
                let (mut g, mut sv);
                if sigma1 < EPS {
                    g = 0.0;
                    sv = sigma2;
                    sigma1 = 0.0;
                } else {
                    g = sigma12 / sigma1;
                    sv = sigma2 - g * sigma12;
                }
                if sigma2 < EPS {
                    g = 0.0;
                    sv = 0.0;
                }
                if g < 0.0 {
                    sv = sigma2;
                    g = 0.0;
                }
                sv = sv.max(0.0);
                num += (1.0 + g * g * sigma1 / (sv + SIGMA_NSQ)).log10();
                den += (1.0 + sigma1 / SIGMA_NSQ).log10();
            });
    }
    (num, den)
}

/// Ratio of the information preserved in the distorted image to the
/// information in the reference. A reference without any local variance
/// carries no information; the ratio is then defined as 1.
pub fn vifp(r: &Array2<f64>, d: &Array2<f64>) -> Result<f64> {
    check_dims(r, d)?;
    let (rows, cols) = r.dim();
    let min = min_size();
    if rows < min || cols < min {
        return Err(MetricError::InputTooSmall {
            metric: MetricId::Vifp,
            rows,
            cols,
            min,
        });
    }
    let (num, den) = information(r, d);
    Ok(if den == 0.0 { 1.0 } else { num / den })
}
