//! Structural similarity and its multi-scale extension.

use ndarray::{Array2, Zip};

use super::filter::{average_downsample2, filter_valid, mean, Window};
use super::{check_dims, check_min_size, MetricId, MetricParams, Result};

/// Standard multi-scale exponents, finest scale first.
pub const MSSSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];

/// Window and stabilizing constants of one SSIM evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SsimConfig {
    pub window: Window,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub exponents: (f64, f64, f64),
}

impl SsimConfig {
    pub fn from_params(p: &MetricParams) -> Self {
        Self {
            window: Window::gaussian(p.ssim_window, p.ssim_sigma),
            c1: p.c1,
            c2: p.c2,
            c3: p.c3,
            exponents: p.ssim_exponents,
        }
    }
}

/// Local luminance term and combined contrast-structure term, both over the
/// valid region of the window.
#[derive(Debug, Clone)]
pub struct SsimMaps {
    pub luminance: Array2<f64>,
    pub contrast_structure: Array2<f64>,
}

impl SsimMaps {
    /// `l^alpha * (c^beta * s^gamma)`.
    pub fn combined(&self, alpha: f64) -> Array2<f64> {
        Zip::from(&self.luminance)
            .and(&self.contrast_structure)
            .map_collect(|&l, &cs| signed_pow(l, alpha) * cs)
    }
}

fn signed_pow(v: f64, e: f64) -> f64 {
    if e == 1.0 {
        v
    } else {
        v.signum() * v.abs().powf(e)
    }
}

pub fn ssim_maps(x: &Array2<f64>, y: &Array2<f64>, cfg: &SsimConfig) -> SsimMaps {
    let w = &cfg.window;
    let mu_x = filter_valid(x, w);
    let mu_y = filter_valid(y, w);
    let sxx = filter_valid(&(x * x), w);
    let syy = filter_valid(&(y * y), w);
    let sxy = filter_valid(&(x * y), w);
    let (c1, c2, c3) = (cfg.c1, cfg.c2, cfg.c3);
    let (_, beta, gamma) = cfg.exponents;
    let luminance = Zip::from(&mu_x)
        .and(&mu_y)
        .map_collect(|&mx, &my| ((2.0 * mx * my + c1) / (mx * mx + my * my + c1)).min(1.0));
    let closed_form = beta == 1.0 && gamma == 1.0 && c3 == c2 / 2.0 && c2 > 0.0;
    let mut contrast_structure = Array2::<f64>::zeros(mu_x.dim());
    Zip::from(&mut contrast_structure)
        .and(&mu_x)
        .and(&mu_y)
        .and(&sxx)
        .and(&syy)
        .and(&sxy)
        .for_each(|cs, &mx, &my, &xx, &yy, &xy| {
            let (vx, vy) = (xx - mx * mx, yy - my * my);
            let cov = xy - mx * my;
            *cs = if closed_form {
                // Variances left unclamped so that identical inputs give exactly 1;
                // the outer clamp only absorbs rounding.
                ((2.0 * cov + c2) / (vx + vy + c2)).clamp(-1.0, 1.0)
            } else {
                let (vx, vy) = (vx.max(0.0), vy.max(0.0));
                let (sx, sy) = (vx.sqrt(), vy.sqrt());
                let c = (2.0 * sx * sy + c2) / (vx + vy + c2);
                let s = (cov + c3) / (sx * sy + c3);
                signed_pow(c, beta) * signed_pow(s, gamma)
            };
        });
    SsimMaps {
        luminance,
        contrast_structure,
    }
}

/// Local SSIM map; its mean is the SSIM score.
pub fn ssim_map(r: &Array2<f64>, d: &Array2<f64>, params: &MetricParams) -> Result<Array2<f64>> {
    check_dims(r, d)?;
    check_min_size(MetricId::Ssim, r, params.ssim_window)?;
    let cfg = SsimConfig::from_params(params);
    Ok(ssim_maps(r, d, &cfg).combined(cfg.exponents.0))
}

pub fn ssim(r: &Array2<f64>, d: &Array2<f64>, params: &MetricParams) -> Result<f64> {
    Ok(mean(&ssim_map(r, d, params)?))
}

/// Exponents for the first `scales` levels, renormalized to sum to one.
pub fn scale_weights(scales: usize) -> Vec<f64> {
    let used = &MSSSIM_WEIGHTS[..scales];
    let total: f64 = used.iter().sum();
    used.iter().map(|w| w / total).collect()
}

/// Combines per-scale scores: contrast-structure at all scales but the
/// coarsest, full SSIM at the coarsest.
pub(crate) fn combine_scales(per_scale: &[f64]) -> f64 {
    let weights = scale_weights(per_scale.len());
    per_scale.iter().zip(weights).map(|(v, w)| v.max(0.0).powf(w)).product()
}

pub fn ms_ssim(r: &Array2<f64>, d: &Array2<f64>, params: &MetricParams) -> Result<f64> {
    check_dims(r, d)?;
    let scales = params.msssim_scales;
    check_min_size(MetricId::Msssim, r, (1 << (scales - 1)) * params.ssim_window)?;
    let cfg = SsimConfig::from_params(params);
    let (mut x, mut y) = (r.clone(), d.clone());
    let mut per_scale = Vec::with_capacity(scales);
    for s in 0..scales {
        let maps = ssim_maps(&x, &y, &cfg);
        if s + 1 == scales {
            per_scale.push(mean(&maps.combined(cfg.exponents.0)));
        } else {
            per_scale.push(mean(&maps.contrast_structure));
            x = average_downsample2(&x);
            y = average_downsample2(&y);
        }
    }
    Ok(combine_scales(&per_scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn textured(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((rows, cols), |(r, c)| {
            let base = 128.0 + 60.0 * ((r as f64) / 7.0).sin() * ((c as f64) / 11.0).cos();
            (base + rng.random_range(-20.0..20.0)).round().clamp(0.0, 255.0)
        })
    }

    #[test]
    fn identical_is_exactly_one() {
        let a = textured(40, 37, 1);
        assert_eq!(ssim(&a, &a, &MetricParams::default()).unwrap(), 1.0);
        let big = textured(200, 190, 2);
        assert_eq!(ms_ssim(&big, &big, &MetricParams::default()).unwrap(), 1.0);
    }

    #[test]
    fn constant_shift_on_mid_gray() {
        // Closed form on a constant image: structure term is 1 and the
        // luminance term is (2*128*138 + C1) / (128^2 + 138^2 + C1).
        let r = Array2::from_elem((64, 64), 128.0);
        let d = r.mapv(|v| v + 10.0);
        let p = MetricParams::default();
        let expected = (2.0 * 128.0 * 138.0 + p.c1) / (128.0f64.powi(2) + 138.0f64.powi(2) + p.c1);
        let v = ssim(&r, &d, &p).unwrap();
        assert!((v - expected).abs() < 1e-12, "{v} vs {expected}");
        assert!(v < 1.0 && v > 0.9);
    }

    #[test]
    fn single_scale_msssim_equals_ssim() {
        let a = textured(48, 52, 3);
        let b = textured(48, 52, 4);
        let p = MetricParams {
            msssim_scales: 1,
            ..MetricParams::default()
        };
        assert_eq!(ms_ssim(&a, &b, &p).unwrap(), ssim(&a, &b, &p).unwrap());
    }

    #[test]
    fn general_path_matches_closed_form() {
        let a = textured(30, 30, 5);
        let b = textured(30, 30, 6);
        let p = MetricParams::default();
        let mut cfg = SsimConfig::from_params(&p);
        let closed = ssim_maps(&a, &b, &cfg).combined(1.0);
        // A C3 one ulp away from C2/2 forces the separate c and s terms.
        cfg.c3 = p.c2 / 2.0 * (1.0 + f64::EPSILON);
        let general = ssim_maps(&a, &b, &cfg).combined(1.0);
        for (x, y) in closed.iter().zip(general.iter()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn too_small_inputs() {
        let a = Array2::zeros((10, 20));
        assert!(ssim(&a, &a, &MetricParams::default()).is_err());
        let b = Array2::zeros((175, 200));
        assert!(ms_ssim(&b, &b, &MetricParams::default()).is_err());
        let c = Array2::from_elem((176, 176), 3.0);
        assert_eq!(ms_ssim(&c, &c, &MetricParams::default()).unwrap(), 1.0);
    }

    #[test]
    fn weights_are_normalized() {
        for k in 1..=5 {
            assert!((scale_weights(k).iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }
}
