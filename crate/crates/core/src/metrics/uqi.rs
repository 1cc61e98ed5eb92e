//! Universal quality index on sliding square blocks.

use ndarray::Array2;

use super::{check_dims, check_min_size, MetricId, Result};

/// Inclusive-exclusive summed-area table with a leading zero row and column.
fn integral(img: &Array2<f64>) -> Array2<f64> {
    let (rows, cols) = img.dim();
    let mut s = Array2::<f64>::zeros((rows + 1, cols + 1));
    for r in 0..rows {
        let mut acc = 0.0;
        for c in 0..cols {
            acc += img[[r, c]];
            s[[r + 1, c + 1]] = s[[r, c + 1]] + acc;
        }
    }
    s
}

fn block_sum(s: &Array2<f64>, r: usize, c: usize, b: usize) -> f64 {
    s[[r + b, c + b]] - s[[r, c + b]] - s[[r + b, c]] + s[[r, c]]
}

/// Per-block index; `NaN` marks blocks whose index is undefined and that are
/// excluded from pooling. Two identical constant blocks score 1.
///
/// Everything is expressed through raw block sums, which are exact for 8-bit
/// data, so the zero-denominator tests are exact as well.
pub fn uqi_map(r: &Array2<f64>, d: &Array2<f64>, block: usize) -> Result<Array2<f64>> {
    check_dims(r, d)?;
    check_min_size(MetricId::Uqi, r, block)?;
    let (rows, cols) = r.dim();
    let sx = integral(r);
    let sy = integral(d);
    let sxx = integral(&(r * r));
    let syy = integral(&(d * d));
    let sxy = integral(&(r * d));
    let n = (block * block) as f64;
    Ok(Array2::from_shape_fn((rows - block + 1, cols - block + 1), |(i, j)| {
        let bx = block_sum(&sx, i, j, block);
        let by = block_sum(&sy, i, j, block);
        let var_sum = n * block_sum(&sxx, i, j, block) - bx * bx + n * block_sum(&syy, i, j, block) - by * by;
        let mean_sq = bx * bx + by * by;
        if var_sum == 0.0 || mean_sq == 0.0 {
            let identical_constant = var_sum == 0.0 && bx == by;
            return if identical_constant { 1.0 } else { f64::NAN };
        }
        let cov = n * block_sum(&sxy, i, j, block) - bx * by;
        // Each factor is bounded by 1 in magnitude; the clamp only absorbs
        // rounding.
        ((2.0 * cov / var_sum) * (2.0 * bx * by / mean_sq)).clamp(-1.0, 1.0)
    }))
}

/// Mean over the defined blocks (0 when none is defined).
pub fn pool(map: &Array2<f64>) -> f64 {
    let (sum, count) = map
        .iter()
        .filter(|v| !v.is_nan())
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

pub fn uqi(r: &Array2<f64>, d: &Array2<f64>, block: usize) -> Result<f64> {
    Ok(pool(&uqi_map(r, d, block)?))
}
