//! Convolution, resampling and pyramid helpers shared by the metrics.

use ndarray::{s, Array2};

/// Normalized 1-D Gaussian of `size` taps centered at `(size - 1) / 2`.
pub fn gaussian_taps(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size as f64 - 1.0) / 2.0;
    let mut taps: Vec<f64> = (0..size).map(|i| (-((i as f64 - c).powi(2)) / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Separable 2-D window `outer(taps, taps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub taps: Vec<f64>,
}

impl Window {
    pub fn gaussian(size: usize, sigma: f64) -> Self {
        Self {
            taps: gaussian_taps(size, sigma),
        }
    }

    pub fn uniform(size: usize) -> Self {
        Self {
            taps: vec![1.0 / size as f64; size],
        }
    }

    pub fn size(&self) -> usize {
        self.taps.len()
    }
}

/// Correlation with a separable window over the fully-overlapping region.
pub fn filter_valid(img: &Array2<f64>, win: &Window) -> Array2<f64> {
    filter_valid_sep(img, &win.taps, &win.taps)
}

pub fn filter_valid_sep(img: &Array2<f64>, kv: &[f64], kh: &[f64]) -> Array2<f64> {
    let (rows, cols) = img.dim();
    let (n, m) = (kv.len(), kh.len());
    assert!(rows >= n && cols >= m, "window larger than image");
    let (orows, ocols) = (rows - n + 1, cols - m + 1);
    let mut horiz = Array2::<f64>::zeros((rows, ocols));
    for r in 0..rows {
        let row = img.row(r);
        for c in 0..ocols {
            let mut acc = 0.0;
            for (k, w) in kh.iter().enumerate() {
                acc += w * row[c + k];
            }
            horiz[[r, c]] = acc;
        }
    }
    let mut out = Array2::<f64>::zeros((orows, ocols));
    for r in 0..orows {
        for (k, w) in kv.iter().enumerate() {
            let src = horiz.row(r + k);
            let mut dst = out.row_mut(r);
            dst.iter_mut().zip(src.iter()).for_each(|(d, s)| *d += w * s);
        }
    }
    out
}

/// Full 2-D correlation over the valid region with an arbitrary kernel.
pub fn correlate_valid(img: &Array2<f64>, kernel: &Array2<f64>) -> Array2<f64> {
    let (rows, cols) = img.dim();
    let (kr, kc) = kernel.dim();
    assert!(rows >= kr && cols >= kc, "kernel larger than image");
    Array2::from_shape_fn((rows - kr + 1, cols - kc + 1), |(r, c)| {
        let mut acc = 0.0;
        for ((i, j), w) in kernel.indexed_iter() {
            acc += w * img[[r + i, c + j]];
        }
        acc
    })
}

/// Correlation producing an output of the input size, zero outside the image.
/// The kernel origin is its center element (`(k - 1) / 2`).
pub fn correlate_same_zero(img: &Array2<f64>, kernel: &Array2<f64>) -> Array2<f64> {
    let (rows, cols) = img.dim();
    let (kr, kc) = kernel.dim();
    let (or, oc) = ((kr - 1) / 2, (kc - 1) / 2);
    Array2::from_shape_fn((rows, cols), |(r, c)| {
        let mut acc = 0.0;
        for ((i, j), w) in kernel.indexed_iter() {
            let (y, x) = (r as isize + i as isize - or as isize, c as isize + j as isize - oc as isize);
            if y >= 0 && x >= 0 && (y as usize) < rows && (x as usize) < cols {
                acc += w * img[[y as usize, x as usize]];
            }
        }
        acc
    })
}

/// Mirror index with edge repetition (`b a | a b c | c b`).
pub fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut k = i.rem_euclid(period);
    if k >= n {
        k = period - 1 - k;
    }
    k as usize
}

/// Correlation with a separable kernel centered at tap `(len - 1) / 2`,
/// symmetric boundaries, output of the input size.
pub fn filter_same_symmetric(img: &Array2<f64>, taps: &[f64]) -> Array2<f64> {
    let (rows, cols) = img.dim();
    let o = ((taps.len() - 1) / 2) as isize;
    let mut horiz = Array2::<f64>::zeros((rows, cols));
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = 0.0;
            for (k, w) in taps.iter().enumerate() {
                acc += w * img[[r, reflect(c as isize + k as isize - o, cols)]];
            }
            horiz[[r, c]] = acc;
        }
    }
    Array2::from_shape_fn((rows, cols), |(r, c)| {
        let mut acc = 0.0;
        for (k, w) in taps.iter().enumerate() {
            acc += w * horiz[[reflect(r as isize + k as isize - o, rows), c]];
        }
        acc
    })
}

/// 2x2 mean (symmetric at the far edges) followed by keeping even samples.
pub fn average_downsample2(img: &Array2<f64>) -> Array2<f64> {
    let (rows, cols) = img.dim();
    let (or, oc) = (rows.div_ceil(2), cols.div_ceil(2));
    Array2::from_shape_fn((or, oc), |(r, c)| {
        let (y, x) = (2 * r, 2 * c);
        let y1 = reflect(y as isize + 1, rows);
        let x1 = reflect(x as isize + 1, cols);
        0.25 * (img[[y, x]] + img[[y, x1]] + img[[y1, x]] + img[[y1, x1]])
    })
}

/// Block-mean downsampling by an integer factor, dropping partial blocks.
pub fn block_downsample(img: &Array2<f64>, f: usize) -> Array2<f64> {
    if f <= 1 {
        return img.clone();
    }
    let (rows, cols) = img.dim();
    let (or, oc) = (rows / f, cols / f);
    let norm = (f * f) as f64;
    Array2::from_shape_fn((or, oc), |(r, c)| img.slice(s![r * f..(r + 1) * f, c * f..(c + 1) * f]).sum() / norm)
}

pub fn subsample2(img: &Array2<f64>) -> Array2<f64> {
    img.slice(s![..;2, ..;2]).to_owned()
}

/// Binomial 5-tap kernel of the Burt-Adelson pyramid.
pub const BINOMIAL5: [f64; 5] = [0.05, 0.25, 0.4, 0.25, 0.05];

/// Blur and decimate by two.
pub fn pyr_reduce(img: &Array2<f64>) -> Array2<f64> {
    subsample2(&filter_same_symmetric(img, &BINOMIAL5))
}

/// Zero-insertion upsampling to `(rows, cols)` followed by the (gain 4) blur.
pub fn pyr_expand(img: &Array2<f64>, rows: usize, cols: usize) -> Array2<f64> {
    let mut up = Array2::<f64>::zeros((rows, cols));
    for ((r, c), v) in img.indexed_iter() {
        if 2 * r < rows && 2 * c < cols {
            up[[2 * r, 2 * c]] = 4.0 * v;
        }
    }
    filter_same_symmetric(&up, &BINOMIAL5)
}

/// Gaussian levels `G_0 = img, G_{k+1} = reduce(G_k)`.
pub fn gaussian_pyramid(img: &Array2<f64>, levels: usize) -> Vec<Array2<f64>> {
    let mut out = vec![img.clone()];
    for _ in 1..levels {
        let next = pyr_reduce(out.last().expect("non-empty"));
        out.push(next);
    }
    out
}

/// `levels - 1` band-pass images followed by the low-pass residual.
pub fn laplacian_pyramid(img: &Array2<f64>, levels: usize) -> Vec<Array2<f64>> {
    let g = gaussian_pyramid(img, levels);
    let mut out = Vec::with_capacity(levels);
    for k in 0..levels - 1 {
        let (rows, cols) = g[k].dim();
        out.push(&g[k] - &pyr_expand(&g[k + 1], rows, cols));
    }
    out.push(g[levels - 1].clone());
    out
}

pub fn mean(a: &Array2<f64>) -> f64 {
    a.sum() / a.len() as f64
}
