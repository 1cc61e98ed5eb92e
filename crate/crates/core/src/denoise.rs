//! Adaptive local Wiener filtering of reconstructed amplitude views.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DenoiseError {
    #[error("{window_h}x{window_w} window does not fit a {rows}x{cols} image")]
    WindowTooLarge {
        window_h: usize,
        window_w: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid Wiener parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, DenoiseError>;

/// Noise power used by the filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseVariance {
    /// Mean of the local variances of the image it is resolved on.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WienerParams {
    pub window_h: usize,
    pub window_w: usize,
    pub noise: NoiseVariance,
}

impl Default for WienerParams {
    fn default() -> Self {
        Self {
            window_h: 5,
            window_w: 5,
            noise: NoiseVariance::Auto,
        }
    }
}

impl WienerParams {
    pub fn square(window: usize, noise: NoiseVariance) -> Self {
        Self {
            window_h: window,
            window_w: window,
            noise,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for w in [self.window_h, self.window_w] {
            if w < 3 || w % 2 == 0 {
                return Err(DenoiseError::InvalidParams(format!("window sides must be odd and >= 3, got {w}")));
            }
        }
        if let NoiseVariance::Fixed(v) = self.noise {
            if !(v.is_finite() && v >= 0.0) {
                return Err(DenoiseError::InvalidParams(format!("noise variance must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Pins `Auto` to the value estimated on `image`, so the same noise power
    /// can be reused for the other member of a stimulus pair.
    pub fn resolved_on(&self, image: &Array2<f64>) -> Result<WienerParams> {
        self.validate()?;
        let noise = match self.noise {
            NoiseVariance::Auto => {
                let (_, var) = local_stats(image, self.window_h, self.window_w)?;
                NoiseVariance::Fixed(var.mean().unwrap_or(0.0))
            }
            fixed => fixed,
        };
        Ok(WienerParams { noise, ..*self })
    }
}

/// Mirror index for symmetric padding (`d c b a | a b c d | d c b a`).
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut k = i.rem_euclid(period);
    if k >= n {
        k = period - 1 - k;
    }
    k as usize
}

/// Local window mean and population variance with symmetric boundaries.
pub fn local_stats(image: &Array2<f64>, window_h: usize, window_w: usize) -> Result<(Array2<f64>, Array2<f64>)> {
    let (rows, cols) = image.dim();
    if window_h > rows || window_w > cols {
        return Err(DenoiseError::WindowTooLarge {
            window_h,
            window_w,
            rows,
            cols,
        });
    }
    let (rh, rw) = ((window_h / 2) as isize, (window_w / 2) as isize);
    let (ph, pw) = (rows + window_h - 1, cols + window_w - 1);
    // Summed-area tables over the padded image, one extra leading row/col.
    let mut s1 = Array2::<f64>::zeros((ph + 1, pw + 1));
    let mut s2 = Array2::<f64>::zeros((ph + 1, pw + 1));
    for r in 0..ph {
        let sr = reflect(r as isize - rh, rows);
        let mut acc1 = 0.0;
        let mut acc2 = 0.0;
        for c in 0..pw {
            let v = image[[sr, reflect(c as isize - rw, cols)]];
            acc1 += v;
            acc2 += v * v;
            s1[[r + 1, c + 1]] = s1[[r, c + 1]] + acc1;
            s2[[r + 1, c + 1]] = s2[[r, c + 1]] + acc2;
        }
    }
    let count = (window_h * window_w) as f64;
    let boxed = |s: &Array2<f64>, r: usize, c: usize| {
        s[[r + window_h, c + window_w]] - s[[r, c + window_w]] - s[[r + window_h, c]] + s[[r, c]]
    };
    let mean = Array2::from_shape_fn((rows, cols), |(r, c)| boxed(&s1, r, c) / count);
    let var = Array2::from_shape_fn((rows, cols), |(r, c)| {
        let m = mean[[r, c]];
        (boxed(&s2, r, c) / count - m * m).max(0.0)
    });
    Ok((mean, var))
}

const VARIANCE_FLOOR: f64 = 1e-12;

/// Pixel-wise Wiener estimate `mu + max(var - noise, 0) / max(var, eps) * (x - mu)`.
pub fn wiener_denoise(image: &Array2<f64>, params: &WienerParams) -> Result<Array2<f64>> {
    let params = params.resolved_on(image)?;
    let NoiseVariance::Fixed(noise) = params.noise else {
        unreachable!("resolved parameters carry a fixed noise power")
    };
    let (mean, var) = local_stats(image, params.window_h, params.window_w)?;
    if noise == 0.0 {
        return Ok(image.clone());
    }
    Ok(ndarray::Zip::from(image).and(&mean).and(&var).map_collect(|&x, &mu, &v| {
        let gain = (v - noise).max(0.0) / v.max(VARIANCE_FLOOR);
        mu + gain * (x - mu)
    }))
}
