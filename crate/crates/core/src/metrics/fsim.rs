//! Feature similarity from phase congruency and gradient magnitude.

use std::f64::consts::PI;

use ndarray::{array, Array2, Zip};
use num_complex::Complex64;

use super::filter::correlate_same_zero;
use super::{check_dims, check_min_size, MetricId, MetricParams, Result};
use crate::fft::{fft2, ifft2, ifftshift};

/// Log-Gabor bank parameters.
const NSCALE: usize = 4;
const NORIENT: usize = 4;
const MIN_WAVELENGTH: f64 = 6.0;
const MULT: f64 = 2.0;
const SIGMA_ONF: f64 = 0.55;
const D_THETA_ON_SIGMA: f64 = 1.2;
/// Noise threshold in standard deviations above the mean noise energy.
const NOISE_K: f64 = 2.0;
const EPSILON: f64 = 1e-4;
const LOWPASS_CUTOFF: f64 = 0.45;
const LOWPASS_ORDER: i32 = 15;

/// Normalized frequency coordinates along an axis, origin at the center.
fn frequency_range(n: usize) -> Vec<f64> {
    if n % 2 == 1 {
        let h = (n as f64 - 1.0) / 2.0;
        (0..n).map(|i| if n == 1 { 0.0 } else { (i as f64 - h) / (n as f64 - 1.0) }).collect()
    } else {
        (0..n).map(|i| (i as f64 - (n / 2) as f64) / n as f64).collect()
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Phase congruency map, each value in `[0, 1]`.
pub fn phase_congruency(img: &Array2<f64>) -> Array2<f64> {
    let (rows, cols) = img.dim();
    let n = (rows * cols) as f64;
    let xr = frequency_range(cols);
    let yr = frequency_range(rows);
    let mut radius = ifftshift(&Array2::from_shape_fn((rows, cols), |(r, c)| (xr[c] * xr[c] + yr[r] * yr[r]).sqrt()));
    let theta = ifftshift(&Array2::from_shape_fn((rows, cols), |(r, c)| (-yr[r]).atan2(xr[c])));
    let lowpass = radius.mapv(|rad| 1.0 / (1.0 + (rad / LOWPASS_CUTOFF).powi(2 * LOWPASS_ORDER)));
    radius[[0, 0]] = 1.0;

    let log_gabor: Vec<Array2<f64>> = (0..NSCALE)
        .map(|s| {
            let fo = 1.0 / (MIN_WAVELENGTH * MULT.powi(s as i32));
            let denom = 2.0 * SIGMA_ONF.ln().powi(2);
            let mut g = Zip::from(&radius)
                .and(&lowpass)
                .map_collect(|&rad, &lp| (-(rad / fo).ln().powi(2) / denom).exp() * lp);
            g[[0, 0]] = 0.0;
            g
        })
        .collect();

    let theta_sigma = PI / NORIENT as f64 / D_THETA_ON_SIGMA;
    let spectrum = fft2(&img.mapv(|v| Complex64::new(v, 0.0)));
    let mut energy_all = Array2::<f64>::zeros((rows, cols));
    let mut an_all = Array2::<f64>::zeros((rows, cols));

    for o in 0..NORIENT {
        let angle = o as f64 * PI / NORIENT as f64;
        let (ca, sa) = (angle.cos(), angle.sin());
        let spread = theta.mapv(|t| {
            let (st, ct) = t.sin_cos();
            let ds = st * ca - ct * sa;
            let dc = ct * ca + st * sa;
            let dtheta = ds.atan2(dc).abs();
            (-dtheta * dtheta / (2.0 * theta_sigma * theta_sigma)).exp()
        });

        let mut eo = Vec::with_capacity(NSCALE);
        let mut spatial = Vec::with_capacity(NSCALE);
        let mut sum_e = Array2::<f64>::zeros((rows, cols));
        let mut sum_o = Array2::<f64>::zeros((rows, cols));
        let mut sum_an = Array2::<f64>::zeros((rows, cols));
        let mut em_n = 0.0;
        for (s, gabor) in log_gabor.iter().enumerate() {
            let filter = gabor * &spread;
            if s == 0 {
                em_n = filter.iter().map(|v| v * v).sum::<f64>();
            }
            let kernel = ifft2(&filter.mapv(|v| Complex64::new(v, 0.0))).mapv(|v| v.re * n.sqrt());
            spatial.push(kernel);
            let resp = ifft2(&Zip::from(&spectrum).and(&filter).map_collect(|&x, &f| x * f));
            Zip::from(&mut sum_e)
                .and(&mut sum_o)
                .and(&mut sum_an)
                .and(&resp)
                .for_each(|e, od, an, v| {
                    *e += v.re;
                    *od += v.im;
                    *an += v.norm();
                });
            eo.push(resp);
        }

        let mut energy = Array2::<f64>::zeros((rows, cols));
        for resp in &eo {
            Zip::from(&mut energy)
                .and(resp)
                .and(&sum_e)
                .and(&sum_o)
                .for_each(|en, v, &se, &so| {
                    let x_energy = (se * se + so * so).sqrt() + EPSILON;
                    let (me, mo) = (se / x_energy, so / x_energy);
                    *en += v.re * me + v.im * mo - (v.re * mo - v.im * me).abs();
                });
        }

        // Noise energy estimated from the finest-scale response.
        let median_e2n = median(eo[0].iter().map(|v| v.norm_sqr()).collect());
        let mean_e2n = -median_e2n / 0.5f64.ln();
        let noise_power = if em_n > 0.0 { mean_e2n / em_n } else { 0.0 };
        let mut sum_an2 = 0.0;
        let mut sum_aiaj = 0.0;
        for i in 0..NSCALE {
            sum_an2 += spatial[i].iter().map(|v| v * v).sum::<f64>();
            for j in i + 1..NSCALE {
                sum_aiaj += Zip::from(&spatial[i]).and(&spatial[j]).fold(0.0, |acc, a, b| acc + a * b);
            }
        }
        let noise_energy2 = 2.0 * noise_power * sum_an2 + 4.0 * noise_power * sum_aiaj;
        let tau = (noise_energy2 / 2.0).max(0.0).sqrt();
        let noise_mean = tau * (PI / 2.0).sqrt();
        let noise_sigma = ((2.0 - PI / 2.0) * tau * tau).sqrt();
        let threshold = (noise_mean + NOISE_K * noise_sigma) / 1.7;

        Zip::from(&mut energy_all)
            .and(&mut an_all)
            .and(&energy)
            .and(&sum_an)
            .for_each(|ea, aa, &en, &an| {
                *ea += (en - threshold).max(0.0);
                *aa += an;
            });
    }
    Zip::from(&energy_all)
        .and(&an_all)
        .map_collect(|&e, &a| if a > 0.0 { (e / a).clamp(0.0, 1.0) } else { 0.0 })
}

/// Scharr gradient magnitude, zero-padded to the input size.
pub fn gradient_magnitude(img: &Array2<f64>) -> Array2<f64> {
    let dx = array![[3.0, 0.0, -3.0], [10.0, 0.0, -10.0], [3.0, 0.0, -3.0]] / 16.0;
    let dy = dx.t().to_owned();
    let gx = correlate_same_zero(img, &dx);
    let gy = correlate_same_zero(img, &dy);
    Zip::from(&gx).and(&gy).map_collect(|&a, &b| (a * a + b * b).sqrt())
}

fn downsample(img: &Array2<f64>, f: usize) -> Array2<f64> {
    if f <= 1 {
        return img.clone();
    }
    let kernel = Array2::from_elem((f, f), 1.0 / (f * f) as f64);
    let smooth = correlate_same_zero(img, &kernel);
    smooth.slice(ndarray::s![..;f, ..;f]).to_owned()
}

pub fn fsim(r: &Array2<f64>, d: &Array2<f64>, params: &MetricParams) -> Result<f64> {
    check_dims(r, d)?;
    check_min_size(MetricId::Fsim, r, 3)?;
    let (rows, cols) = r.dim();
    let f = ((rows.min(cols) as f64 / 256.0).round() as usize).max(1);
    let (y1, y2) = (downsample(r, f), downsample(d, f));
    let pc1 = phase_congruency(&y1);
    let pc2 = phase_congruency(&y2);
    let g1 = gradient_magnitude(&y1);
    let g2 = gradient_magnitude(&y2);
    let (t1, t2) = (params.fsim_t1, params.fsim_t2);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut plain = 0.0;
    Zip::from(&pc1).and(&pc2).and(&g1).and(&g2).for_each(|&p1, &p2, &a, &b| {
        let s_pc = (2.0 * p1 * p2 + t1) / (p1 * p1 + p2 * p2 + t1);
        let s_g = (2.0 * a * b + t2) / (a * a + b * b + t2);
        let pcm = p1.max(p2);
        num += s_pc * s_g * pcm;
        den += pcm;
        plain += s_pc * s_g;
    });
    Ok(if den > 0.0 { num / den } else { plain / pc1.len() as f64 })
}
