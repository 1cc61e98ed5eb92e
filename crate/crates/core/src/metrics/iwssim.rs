//! Information-content weighted multi-scale SSIM.
//!
//! SSIM maps are computed on the Gaussian levels of both images. At every
//! scale but the coarsest, the contrast-structure map is pooled with weights
//! measuring the mutual information a Gaussian scale mixture model assigns to
//! the corresponding Laplacian band (3x3 neighbourhoods, no parent band).

use nalgebra::{SMatrix, SVector, SymmetricEigen};
use ndarray::{s, Array2, Zip};

use super::filter::{filter_valid, gaussian_pyramid, mean, pyr_expand, Window};
use super::ssim::{combine_scales, ssim_maps, SsimConfig};
use super::{check_dims, check_min_size, MetricId, MetricParams, Result};

/// Variance of the visual noise added in the channel model.
pub const SIGMA_NSQ: f64 = 0.4;
const BLOCK: usize = 3;
const DIM: usize = BLOCK * BLOCK;
const EPS: f64 = 1e-10;

type Cov = SMatrix<f64, DIM, DIM>;
type Vector = SVector<f64, DIM>;

fn neighbourhood(band: &Array2<f64>, r: usize, c: usize) -> Vector {
    Vector::from_fn(|k, _| band[[r + k / BLOCK, c + k % BLOCK]])
}

/// Information content weights of a band pair over the valid 3x3 region.
/// Every weight is finite and non-negative.
pub fn information_weights(reference: &Array2<f64>, distorted: &Array2<f64>, sigma_nsq: f64) -> Array2<f64> {
    let (rows, cols) = reference.dim();
    let (orows, ocols) = (rows + 1 - BLOCK, cols + 1 - BLOCK);
    let positions = (orows * ocols) as f64;

    // Zero-mean GSM covariance of the reference neighbourhood vectors.
    let mut cov = Cov::zeros();
    for r in 0..orows {
        for c in 0..ocols {
            let y = neighbourhood(reference, r, c);
            cov += y * y.transpose();
        }
    }
    cov /= positions;
    let eig = SymmetricEigen::new(cov);
    let lambdas: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let largest = lambdas.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..DIM).filter(|&k| lambdas[k] > 1e-12 * largest && largest > 0.0).collect();

    // Local gain and residual variance of the distortion channel.
    let w = Window::uniform(BLOCK);
    let mu1 = filter_valid(reference, &w);
    let mu2 = filter_valid(distorted, &w);
    let s11 = filter_valid(&(reference * reference), &w);
    let s22 = filter_valid(&(distorted * distorted), &w);
    let s12 = filter_valid(&(reference * distorted), &w);

    let nsq2 = sigma_nsq * sigma_nsq;
    Array2::from_shape_fn((orows, ocols), |(r, c)| {
        let (m1, m2) = (mu1[[r, c]], mu2[[r, c]]);
        let sigma1 = (s11[[r, c]] - m1 * m1).max(0.0);
        let sigma2 = (s22[[r, c]] - m2 * m2).max(0.0);
        let sigma12 = s12[[r, c]] - m1 * m2;
        let (mut g, mut vv) = if sigma1 < EPS {
            (0.0, sigma2)
        } else {
            let g = sigma12 / sigma1;
            (g, sigma2 - g * sigma12)
        };
        if sigma2 < EPS {
            g = 0.0;
            vv = 0.0;
        }
        if g < 0.0 {
            vv = sigma2;
            g = 0.0;
        }
        vv = vv.max(EPS);

        let y = neighbourhood(reference, r, c);
        let ss = keep
            .iter()
            .map(|&k| {
                let proj = eig.eigenvectors.column(k).dot(&y);
                proj * proj / lambdas[k]
            })
            .sum::<f64>()
            / DIM as f64;

        0.5 * lambdas
            .iter()
            .map(|&l| (1.0 + ((vv + (1.0 + g * g) * sigma_nsq) * ss * l + sigma_nsq * vv) / nsq2).log2())
            .sum::<f64>()
    })
}

/// Weighted mean of `values` under `weights`; unweighted when all weights vanish.
fn weighted_mean(values: &Array2<f64>, weights: &Array2<f64>) -> f64 {
    let (num, total) = Zip::from(values)
        .and(weights)
        .fold((0.0, 0.0), |(n, t), &v, &w| (n + v * w, t + w));
    if total > 0.0 {
        num / total
    } else {
        mean(values)
    }
}

pub fn iw_ssim(r: &Array2<f64>, d: &Array2<f64>, params: &MetricParams) -> Result<f64> {
    check_dims(r, d)?;
    let scales = params.msssim_scales;
    check_min_size(MetricId::Iwssim, r, (1 << (scales - 1)) * params.ssim_window)?;
    let cfg = SsimConfig::from_params(params);
    let gr = gaussian_pyramid(r, scales);
    let gd = gaussian_pyramid(d, scales);
    // Offset aligning the 3x3 weight map with the valid SSIM map.
    let crop = (params.ssim_window - BLOCK) / 2;
    let mut per_scale = Vec::with_capacity(scales);
    for s in 0..scales {
        let maps = ssim_maps(&gr[s], &gd[s], &cfg);
        if s + 1 == scales {
            per_scale.push(mean(&maps.combined(cfg.exponents.0)));
            continue;
        }
        let (rows, cols) = gr[s].dim();
        let band_r = &gr[s] - &pyr_expand(&gr[s + 1], rows, cols);
        let band_d = &gd[s] - &pyr_expand(&gd[s + 1], rows, cols);
        let weights = information_weights(&band_r, &band_d, SIGMA_NSQ);
        let (wr, wc) = weights.dim();
        let aligned = weights.slice(s![crop..wr - crop, crop..wc - crop]).to_owned();
        per_scale.push(weighted_mean(&maps.contrast_structure, &aligned));
    }
    Ok(combine_scales(&per_scale))
}
