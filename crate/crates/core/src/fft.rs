//! 2D DFT helpers.
//!
//! Convention used throughout the crate:
//! * forward transform `X[k] = sum_n x[n] exp(-2 pi i k n / N)`, unnormalized;
//! * inverse transform carries the `1/N` factor;
//! * "centered" transforms place sample and frequency origin at index
//!   `N / 2` (integer division), i.e. `fftshift(fft(ifftshift(x)))`.
//!
//! With this convention `sum |fft2(x)|^2 = rows * cols * sum |x|^2`.

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

fn transform_rows(data: &mut Array2<Complex64>, direction: FftDirection, planner: &mut FftPlanner<f64>) {
    let cols = data.ncols();
    if cols == 0 {
        return;
    }
    let fft = planner.plan_fft(cols, direction);
    if let Some(buf) = data.as_slice_mut() {
        fft.process(buf);
    } else {
        for mut row in data.rows_mut() {
            let mut tmp = row.to_vec();
            fft.process(&mut tmp);
            row.iter_mut().zip(tmp).for_each(|(d, s)| *d = s);
        }
    }
}

/// Unnormalized transform along the given axis.
pub fn fft_axis(data: &Array2<Complex64>, axis: Axis, direction: FftDirection) -> Array2<Complex64> {
    let mut planner = FftPlanner::new();
    match axis.index() {
        1 => {
            let mut out = data.as_standard_layout().into_owned();
            transform_rows(&mut out, direction, &mut planner);
            out
        }
        _ => {
            let mut t = data.t().as_standard_layout().into_owned();
            transform_rows(&mut t, direction, &mut planner);
            t.t().as_standard_layout().into_owned()
        }
    }
}

/// Unnormalized forward 2D transform.
pub fn fft2(data: &Array2<Complex64>) -> Array2<Complex64> {
    let rows_done = fft_axis(data, Axis(1), FftDirection::Forward);
    fft_axis(&rows_done, Axis(0), FftDirection::Forward)
}

/// Inverse 2D transform including the `1 / (rows * cols)` factor.
pub fn ifft2(data: &Array2<Complex64>) -> Array2<Complex64> {
    let n = (data.nrows() * data.ncols()) as f64;
    let rows_done = fft_axis(data, Axis(1), FftDirection::Inverse);
    let mut out = fft_axis(&rows_done, Axis(0), FftDirection::Inverse);
    out.mapv_inplace(|v| v / n);
    out
}

fn roll<T: Clone>(data: &Array2<T>, shift_r: usize, shift_c: usize) -> Array2<T> {
    let (rows, cols) = data.dim();
    Array2::from_shape_fn((rows, cols), |(r, c)| data[[(r + rows - shift_r) % rows, (c + cols - shift_c) % cols]].clone())
}

/// Moves the origin from index 0 to index `N / 2`.
pub fn fftshift<T: Clone>(data: &Array2<T>) -> Array2<T> {
    let (rows, cols) = data.dim();
    roll(data, rows / 2, cols / 2)
}

/// Inverse of [`fftshift`].
pub fn ifftshift<T: Clone>(data: &Array2<T>) -> Array2<T> {
    let (rows, cols) = data.dim();
    roll(data, rows - rows / 2, cols - cols / 2)
}

/// Centered, unnormalized forward transform.
pub fn fft2c(data: &Array2<Complex64>) -> Array2<Complex64> {
    fftshift(&fft2(&ifftshift(data)))
}

/// Maps an `old` spectrum onto `new` bins, keeping the band around DC.
///
/// Growing an even-length spectrum splits the Nyquist bin evenly between the
/// two new half-band edges; shrinking to an even length folds them back
/// together, so shrink(grow(X)) == X.
fn resize_spectrum(old: &[Complex64], new_len: usize) -> Vec<Complex64> {
    let n = old.len();
    let mut out = vec![Complex64::new(0.0, 0.0); new_len];
    if new_len >= n {
        let half = n / 2;
        if n % 2 == 0 {
            out[..half].copy_from_slice(&old[..half]);
            let nyq = old[half] * 0.5;
            out[half] += nyq;
            out[new_len - half] += nyq;
            for k in half + 1..n {
                out[new_len - n + k] = old[k];
            }
        } else {
            out[..=half].copy_from_slice(&old[..=half]);
            for k in half + 1..n {
                out[new_len - n + k] = old[k];
            }
        }
    } else {
        let half = new_len / 2;
        if new_len % 2 == 0 {
            out[..half].copy_from_slice(&old[..half]);
            out[half] = old[half] + old[n - half];
            for k in half + 1..new_len {
                out[k] = old[n - new_len + k];
            }
        } else {
            out[..=half].copy_from_slice(&old[..=half]);
            for k in half + 1..new_len {
                out[k] = old[n - new_len + k];
            }
        }
    }
    out
}

/// Band-limited resampling along one axis to `new_len` samples.
///
/// Normalized by the old length, so an integer-factor upsample keeps the
/// original samples at stride-`m` positions and the matching downsample
/// inverts it.
pub fn resample_axis(data: &Array2<Complex64>, axis: Axis, new_len: usize) -> Array2<Complex64> {
    let old_len = data.len_of(axis);
    if old_len == new_len {
        return data.clone();
    }
    let spectrum = fft_axis(data, axis, FftDirection::Forward);
    let other = data.len_of(Axis(1 - axis.index()));
    let shape = if axis.index() == 0 { (new_len, other) } else { (other, new_len) };
    let mut resized = Array2::zeros(shape);
    for (src, mut dst) in spectrum.lanes(axis).into_iter().zip(resized.lanes_mut(axis)) {
        let lane = resize_spectrum(&src.to_vec(), new_len);
        dst.iter_mut().zip(lane).for_each(|(d, s)| *d = s);
    }
    let mut out = fft_axis(&resized, axis, FftDirection::Inverse);
    let norm = old_len as f64;
    out.mapv_inplace(|v| v / norm);
    out
}

/// Band-limited 2D resampling to `(rows, cols)`.
pub fn resample2(data: &Array2<Complex64>, rows: usize, cols: usize) -> Array2<Complex64> {
    let tmp = resample_axis(data, Axis(0), rows);
    resample_axis(&tmp, Axis(1), cols)
}

/// Physical coordinate of sample `index` on an axis of `len` samples.
pub fn centered_coord(index: usize, len: usize, pitch: f64) -> f64 {
    (index as f64 - (len / 2) as f64) * pitch
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

    /// Direct O(N^2) DFT for cross-checking.
    fn naive_dft2(x: &Array2<Complex64>) -> Array2<Complex64> {
        let (rows, cols) = x.dim();
        Array2::from_shape_fn((rows, cols), |(kr, kc)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for ((r, c), v) in x.indexed_iter() {
                let phase = -2.0 * std::f64::consts::PI * ((kr * r) as f64 / rows as f64 + (kc * c) as f64 / cols as f64);
                acc += v * Complex64::from_polar(1.0, phase);
            }
            acc
        })
    }

    #[test]
    fn matches_naive_dft_and_inverts() {
        let x = random(5, 6, 1);
        let fast = fft2(&x);
        let slow = naive_dft2(&x);
        for (a, b) in fast.iter().zip(slow.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
        let back = ifft2(&fast);
        for (a, b) in back.iter().zip(x.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn shifts_are_inverse_and_place_origin_at_center() {
        for (r, c) in [(4, 4), (5, 7), (1, 3)] {
            let x = random(r, c, 2);
            assert_eq!(ifftshift(&fftshift(&x)), x);
            let shifted = fftshift(&x);
            assert_eq!(shifted[[r / 2, c / 2]], x[[0, 0]]);
        }
    }

    #[test]
    fn parseval_under_unnormalized_convention() {
        let x = random(8, 6, 3);
        let e_x: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let e_f: f64 = fft2c(&x).iter().map(|v| v.norm_sqr()).sum();
        assert!((e_f - 48.0 * e_x).abs() < 1e-9 * e_f);
    }

    #[test]
    fn resample_keeps_samples_and_inverts() {
        for (rows, cols, m) in [(6usize, 8usize, 2usize), (5, 7, 3), (4, 5, 2)] {
            let x = random(rows, cols, 4);
            let up = resample2(&x, rows * m, cols * m);
            for ((r, c), v) in x.indexed_iter() {
                assert!((up[[r * m, c * m]] - v).norm() < 1e-12);
            }
            let down = resample2(&up, rows, cols);
            for (a, b) in down.iter().zip(x.iter()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
