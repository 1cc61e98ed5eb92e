//! Gradient magnitude similarity deviation.

use ndarray::{array, Array2, Zip};

use super::filter::correlate_valid;
use super::{check_dims, check_min_size, MetricId, Result};

fn prewitt() -> (Array2<f64>, Array2<f64>) {
    let hx = array![[1.0, 0.0, -1.0], [1.0, 0.0, -1.0], [1.0, 0.0, -1.0]] / 3.0;
    let hy = hx.t().to_owned();
    (hx, hy)
}

/// Prewitt gradient magnitude over the valid region.
pub fn gradient_magnitude(img: &Array2<f64>) -> Array2<f64> {
    let (hx, hy) = prewitt();
    let gx = correlate_valid(img, &hx);
    let gy = correlate_valid(img, &hy);
    Zip::from(&gx).and(&gy).map_collect(|&a, &b| (a * a + b * b).sqrt())
}

/// Pointwise gradient similarity `(2 g_r g_d + T) / (g_r^2 + g_d^2 + T)`.
pub fn gms_map(r: &Array2<f64>, d: &Array2<f64>, t: f64) -> Result<Array2<f64>> {
    check_dims(r, d)?;
    check_min_size(MetricId::Gmsd, r, 3)?;
    let gr = gradient_magnitude(r);
    let gd = gradient_magnitude(d);
    Ok(Zip::from(&gr)
        .and(&gd)
        .map_collect(|&a, &b| (2.0 * a * b + t) / (a * a + b * b + t)))
}

/// Population standard deviation of the similarity map.
pub fn pool(map: &Array2<f64>) -> f64 {
    let n = map.len() as f64;
    let mean = map.sum() / n;
    (map.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

pub fn gmsd(r: &Array2<f64>, d: &Array2<f64>, t: f64) -> Result<f64> {
    Ok(pool(&gms_map(r, d, t)?))
}
