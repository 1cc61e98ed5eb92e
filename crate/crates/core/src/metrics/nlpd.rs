//! Normalized Laplacian pyramid distance.
//!
//! Each band of a Laplacian pyramid is divided by a weighted sum of the
//! neighbouring band amplitudes plus a per-level stabilizer; the distance is
//! the root of the mean, over levels, of the mean squared normalized-band
//! difference.

use ndarray::{array, Array2, Zip};

use super::filter::{laplacian_pyramid, reflect};
use super::{check_dims, MetricError, MetricParams, Result};

/// Per-level stabilizers; the last entry serves the low-pass residual.
const SIGMAS: [f64; 6] = [0.0248, 0.0185, 0.0179, 0.0191, 0.0220, 0.2782];

fn neighbour_weights(level: usize) -> Array2<f64> {
    match level {
        0 => array![[0.0, 0.1011, 0.0], [0.1493, 0.0, 0.1460], [0.0, 0.1015, 0.0]],
        1 => array![[0.0, 0.0757, 0.0], [0.1986, 0.0, 0.1846], [0.0, 0.0837, 0.0]],
        2 => array![[0.0, 0.0477, 0.0], [0.2138, 0.0, 0.2243], [0.0, 0.0467, 0.0]],
        3 => array![[0.0, 0.0, 0.0], [0.2503, 0.0, 0.2616], [0.0, 0.0, 0.0]],
        4 => array![[0.0, 0.0, 0.0], [0.2598, 0.0, 0.2552], [0.0, 0.0, 0.0]],
        _ => array![[0.0, 0.0, 0.0], [0.2215, 0.0, 0.0717], [0.0, 0.0, 0.0]],
    }
}

/// Parameter set used for band `k` of an `levels`-deep pyramid: bands use
/// the per-level sets in order, the residual always uses the last set.
fn parameter_index(k: usize, levels: usize) -> usize {
    if k + 1 == levels {
        SIGMAS.len() - 1
    } else {
        k.min(SIGMAS.len() - 2)
    }
}

fn correlate_same_symmetric(img: &Array2<f64>, kernel: &Array2<f64>) -> Array2<f64> {
    let (rows, cols) = img.dim();
    Array2::from_shape_fn((rows, cols), |(r, c)| {
        let mut acc = 0.0;
        for ((i, j), w) in kernel.indexed_iter() {
            if *w != 0.0 {
                let y = reflect(r as isize + i as isize - 1, rows);
                let x = reflect(c as isize + j as isize - 1, cols);
                acc += w * img[[y, x]];
            }
        }
        acc
    })
}

/// Divisively normalized pyramid of an image scaled to `[0, 1]`.
pub fn normalized_pyramid(img: &Array2<f64>, levels: usize, dynamic_range: f64) -> Vec<Array2<f64>> {
    let scaled = img.mapv(|v| v / dynamic_range);
    laplacian_pyramid(&scaled, levels)
        .into_iter()
        .enumerate()
        .map(|(k, band)| {
            let idx = parameter_index(k, levels);
            let amplitude = correlate_same_symmetric(&band.mapv(f64::abs), &neighbour_weights(idx));
            Zip::from(&band).and(&amplitude).map_collect(|&y, &a| y / (SIGMAS[idx] + a))
        })
        .collect()
}

pub fn nlpd(r: &Array2<f64>, d: &Array2<f64>, params: &MetricParams) -> Result<f64> {
    check_dims(r, d)?;
    let levels = params.nlpd_levels;
    let (rows, cols) = r.dim();
    let min = 1usize << (levels - 1);
    if rows < min || cols < min {
        return Err(MetricError::InputTooSmall {
            metric: super::MetricId::Nlpd,
            rows,
            cols,
            min,
        });
    }
    let pr = normalized_pyramid(r, levels, params.dynamic_range);
    let pd = normalized_pyramid(d, levels, params.dynamic_range);
    let total: f64 = pr
        .iter()
        .zip(pd.iter())
        .map(|(a, b)| Zip::from(a).and(b).fold(0.0, |acc, &x, &y| acc + (x - y).powi(2)) / a.len() as f64)
        .sum();
    Ok((total / levels as f64).sqrt())
}
